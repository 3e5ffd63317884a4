//! The square polynomial system whose affine solutions are the critical
//! rank-one tuples of `f`.
//!
//! Each factor is parametrized in homogeneous coordinates as
//! `v_ℓ = z_0 b_ℓ + B_ℓ z_ℓ`, where `(b_ℓ | B_ℓ)` is a random unitary matrix.
//! With `u_ℓ = contract(f, v, ℓ)` the equations are
//! `F_ℓ = z_0 B_ℓᴴ u_ℓ − (b_ℓᴴ u_ℓ) z_ℓ`, which vanish (for `z_0 ≠ 0`) exactly
//! when `u_ℓ ∥ v_ℓ`, i.e. when `u_ℓ ∧ v_ℓ = 0`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::format::TensorFormat;
use crate::linalg::C64;
use crate::tensor::{Tensor, VectorTuple};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Sparse polynomial in the concatenated coordinates of all factors.
#[derive(Clone, Debug)]
struct SparsePoly {
    vars: usize,
    terms: Vec<(C64, Vec<(usize, u32)>)>,
}

impl SparsePoly {
    /// `f(v) = Σ_m f_m v^m`, which equals `inner(f, rank_one(v))`.
    fn from_tensor(f: &Tensor) -> Self {
        let format = f.format();
        let vars = format.dims().iter().sum();
        let mut terms = Vec::new();
        for (pos, &c) in f.coeffs().iter().enumerate() {
            if c == ZERO {
                continue;
            }
            let m = format.monomial(pos);
            let mut offset = 0;
            let mut support = Vec::new();
            for e in &m.exps {
                for (j, &a) in e.iter().enumerate() {
                    if a > 0 {
                        support.push((offset + j, a));
                    }
                }
                offset += e.len();
            }
            terms.push((c, support));
        }
        Self { vars, terms }
    }

    /// Gradient and Hessian at `x`.
    fn derivatives(&self, x: &[C64]) -> (Vec<C64>, DMatrix<C64>) {
        let mut grad = vec![ZERO; self.vars];
        let mut hess = DMatrix::from_element(self.vars, self.vars, ZERO);
        let mono = |support: &[(usize, u32)], lower: &[(usize, u32)]| -> C64 {
            support
                .iter()
                .map(|&(k, a)| {
                    let drop: u32 = lower.iter().filter(|l| l.0 == k).map(|l| l.1).sum();
                    x[k].powu(a - drop)
                })
                .product()
        };
        for (c, support) in &self.terms {
            for &(i, ai) in support {
                grad[i] += c * mono(support, &[(i, 1)]) * ai as f64;
                for &(j, aj) in support {
                    let v = if i == j {
                        if ai < 2 {
                            continue;
                        }
                        mono(support, &[(i, 2)]) * (ai * (ai - 1)) as f64
                    } else {
                        mono(support, &[(i, 1), (j, 1)]) * (ai * aj) as f64
                    };
                    hess[(i, j)] += c * v;
                }
            }
        }
        (grad, hess)
    }
}

#[derive(Clone, Debug)]
struct Chart {
    base: Vec<C64>,
    frame: DMatrix<C64>,
}

#[derive(Clone, Debug)]
pub struct SquareSystem {
    format: TensorFormat,
    f: Tensor,
    poly: SparsePoly,
    charts: Vec<Chart>,
    /// Start of each factor's coordinates in the concatenated vector.
    x_offsets: Vec<usize>,
    /// Start of each factor's unknowns in `(z_1, …, z_p)`.
    z_offsets: Vec<usize>,
    unknowns: usize,
    degree: usize,
}

fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    });
    g.qr().q()
}

pub fn build_system(f: &Tensor, seed: u64) -> Result<SquareSystem> {
    if f.is_zero() {
        return Err(Error::ZeroTensor);
    }
    let format = f.format().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let charts = (0..format.factors())
        .map(|l| {
            let q = random_unitary(format.dim(l), &mut rng);
            Chart {
                base: q.column(0).iter().copied().collect(),
                frame: q.columns(1, format.dim(l) - 1).into_owned(),
            }
        })
        .collect();
    let mut x_offsets = Vec::new();
    let mut z_offsets = Vec::new();
    let (mut xo, mut zo) = (0, 0);
    for l in 0..format.factors() {
        x_offsets.push(xo);
        z_offsets.push(zo);
        xo += format.dim(l);
        zo += format.proj_dim(l);
    }
    Ok(SquareSystem {
        poly: SparsePoly::from_tensor(f),
        f: f.clone(),
        charts,
        x_offsets,
        z_offsets,
        unknowns: zo,
        degree: format.total_degree(),
        format,
    })
}

impl SquareSystem {
    pub fn format(&self) -> &TensorFormat {
        &self.format
    }

    pub fn tensor(&self) -> &Tensor {
        &self.f
    }

    /// Number of unknowns and of equations, `N = Σ n_ℓ`.
    pub fn unknowns(&self) -> usize {
        self.unknowns
    }

    /// Total degree `D = Σ d_ℓ` of every equation.
    pub fn degree(&self) -> usize {
        self.degree
    }

    fn vectors(&self, zz: &[C64]) -> Vec<Vec<C64>> {
        (0..self.format.factors())
            .map(|l| {
                let ch = &self.charts[l];
                let n = self.format.proj_dim(l);
                let z = &zz[1 + self.z_offsets[l]..1 + self.z_offsets[l] + n];
                (0..self.format.dim(l))
                    .map(|i| {
                        zz[0] * ch.base[i]
                            + (0..n).map(|j| ch.frame[(i, j)] * z[j]).sum::<C64>()
                    })
                    .collect()
            })
            .collect()
    }

    /// The tuple `(v_ℓ)` for homogeneous coordinates `(z_0, z)`.
    pub fn tuple_homogeneous(&self, zz: &[C64]) -> Result<VectorTuple> {
        self.check_len(zz, self.unknowns + 1)?;
        VectorTuple::new(self.vectors(zz))
    }

    pub fn tuple_affine(&self, z: &[C64]) -> Result<VectorTuple> {
        self.tuple_homogeneous(&with_one(z))
    }

    /// Affine chart coordinates of `t`, or `None` if some `v_ℓ` lies on the
    /// hyperplane at infinity of its chart.
    pub fn chart_coordinates(&self, t: &VectorTuple) -> Option<Vec<C64>> {
        let mut z = Vec::with_capacity(self.unknowns);
        for l in 0..self.format.factors() {
            let ch = &self.charts[l];
            let v = t.vector(l);
            let s: C64 = ch.base.iter().zip(v).map(|(b, x)| b.conj() * x).sum();
            if s.norm() <= 1e-14 * crate::linalg::vec_norm(v) {
                return None;
            }
            for j in 0..ch.frame.ncols() {
                let c: C64 = (0..v.len()).map(|i| ch.frame[(i, j)].conj() * v[i]).sum();
                z.push(c / s);
            }
        }
        Some(z)
    }

    fn check_len(&self, z: &[C64], expected: usize) -> Result<()> {
        if z.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: z.len(),
            });
        }
        Ok(())
    }

    /// Equations and their `N × (N+1)` Jacobian in homogeneous coordinates.
    pub(crate) fn eval_homogeneous(&self, zz: &[C64]) -> (Vec<C64>, DMatrix<C64>) {
        let n_unk = self.unknowns;
        let vs = self.vectors(zz);
        let x: Vec<C64> = vs.concat();
        let (grad, hess) = self.poly.derivatives(&x);
        // dx/dZ
        let mut dx = DMatrix::from_element(x.len(), n_unk + 1, ZERO);
        for l in 0..self.format.factors() {
            let ch = &self.charts[l];
            let xo = self.x_offsets[l];
            for i in 0..self.format.dim(l) {
                dx[(xo + i, 0)] = ch.base[i];
                for j in 0..ch.frame.ncols() {
                    dx[(xo + i, 1 + self.z_offsets[l] + j)] = ch.frame[(i, j)];
                }
            }
        }
        let hdx = &hess * &dx;
        let mut values = vec![ZERO; n_unk];
        let mut jac = DMatrix::from_element(n_unk, n_unk + 1, ZERO);
        for l in 0..self.format.factors() {
            let ch = &self.charts[l];
            let (xo, zo) = (self.x_offsets[l], self.z_offsets[l]);
            let m = self.format.dim(l);
            let n = m - 1;
            let inv_d = 1.0 / self.format.degree(l) as f64;
            let u: Vec<C64> = grad[xo..xo + m].iter().map(|g| g * inv_d).collect();
            let du = hdx.rows(xo, m) * C64::new(inv_d, 0.0);
            let bu: C64 = ch.base.iter().zip(&u).map(|(b, x)| b.conj() * x).sum();
            let bdu = (0..=n_unk)
                .map(|k| (0..m).map(|i| ch.base[i].conj() * du[(i, k)]).sum::<C64>())
                .collect::<Vec<_>>();
            let fh = ch.frame.adjoint();
            let fu = &fh * nalgebra::DVector::from_column_slice(&u);
            let fdu = &fh * du;
            let z = &zz[1 + zo..1 + zo + n];
            for r in 0..n {
                values[zo + r] = zz[0] * fu[r] - bu * z[r];
                for k in 0..=n_unk {
                    jac[(zo + r, k)] = zz[0] * fdu[(r, k)] - z[r] * bdu[k];
                }
                jac[(zo + r, 0)] += fu[r];
                jac[(zo + r, 1 + zo + r)] -= bu;
            }
        }
        (values, jac)
    }

    /// Equations at the affine point `(1, z)`.
    pub fn eval_affine(&self, z: &[C64]) -> Result<Vec<C64>> {
        self.check_len(z, self.unknowns)?;
        Ok(self.eval_homogeneous(&with_one(z)).0)
    }

    /// `N × N` Jacobian at the affine point `(1, z)`.
    pub fn jacobian_affine(&self, z: &[C64]) -> Result<DMatrix<C64>> {
        self.check_len(z, self.unknowns)?;
        let (_, j) = self.eval_homogeneous(&with_one(z));
        Ok(j.columns(1, self.unknowns).into_owned())
    }
}

fn with_one(z: &[C64]) -> Vec<C64> {
    let mut zz = Vec::with_capacity(z.len() + 1);
    zz.push(C64::new(1.0, 0.0));
    zz.extend_from_slice(z);
    zz
}
