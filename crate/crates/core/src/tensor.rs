//! Tensors in the monomial basis, rank-one points, contractions and tangent
//! spaces of the Segre–Veronese variety.
//!
//! A tensor is stored as the coefficient vector of a multihomogeneous
//! polynomial: `v^d` has coefficients `d!/α! · v^α`. With this convention the
//! bilinear form is diagonal, `(f|g) = Σ_m w(m) f_m g_m` with
//! `w(m) = Π_ℓ α^(ℓ)!/d_ℓ!`, and pairing with a rank-one tensor is polynomial
//! evaluation: `(f | v_1^{d_1} ⊗ … ⊗ v_p^{d_p}) = f(v_1, …, v_p)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::format::TensorFormat;
use crate::linalg::{bdot, vec_norm, CMatrix, C64};

/// Default isotropy tolerance for `|(v|v)| ≤ tol·‖v‖²`.
pub const DEFAULT_ISO_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    format: TensorFormat,
    coeffs: Vec<C64>,
}

impl Tensor {
    pub fn new(format: TensorFormat, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != format.dim_t() {
            return Err(Error::DimensionMismatch {
                expected: format.dim_t(),
                got: coeffs.len(),
            });
        }
        if let Some(i) = coeffs
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { format, coeffs })
    }

    pub fn from_real(format: TensorFormat, coeffs: &[f64]) -> Result<Self> {
        Self::new(format, coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(format: &TensorFormat) -> Self {
        Self {
            coeffs: vec![C64::new(0.0, 0.0); format.dim_t()],
            format: format.clone(),
        }
    }

    pub fn format(&self) -> &TensorFormat {
        &self.format
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [C64] {
        &mut self.coeffs
    }

    /// The symmetric bilinear form (no conjugation).
    pub fn inner(&self, other: &Tensor) -> Result<C64> {
        self.format.check_same(&other.format)?;
        Ok(self
            .format
            .weights()
            .iter()
            .zip(self.coeffs.iter().zip(&other.coeffs))
            .map(|(w, (a, b))| a * b * w)
            .sum())
    }

    /// Hermitian norm `sqrt(Σ w(m) |f_m|²)`.
    pub fn norm(&self) -> f64 {
        self.format
            .weights()
            .iter()
            .zip(&self.coeffs)
            .map(|(w, a)| w * a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|z| z.im == 0.0)
    }

    pub fn scale(&self, c: C64) -> Tensor {
        Tensor {
            format: self.format.clone(),
            coeffs: self.coeffs.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.format.check_same(&other.format)?;
        Ok(Tensor {
            format: self.format.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.format.check_same(&other.format)?;
        Ok(Tensor {
            format: self.format.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    /// `self += c · other`
    pub fn axpy(&mut self, c: C64, other: &Tensor) -> Result<()> {
        self.format.check_same(&other.format)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
        Ok(())
    }

    /// Hermitian distance `‖self − other‖`.
    pub fn distance(&self, other: &Tensor) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Coefficients scaled by `sqrt(w(m))`, so that the Hermitian norm
    /// becomes the plain Euclidean one.
    pub fn orthonormal_coords(&self) -> Vec<C64> {
        scale_by_sqrt_weights(&self.format, &self.coeffs)
    }

    /// Matrix `A` with `A_ij` the coefficient of `e_i ⊗ e_j`.
    pub fn to_matrix(&self) -> Result<CMatrix> {
        if !self.format.is_matrix() {
            return Err(Error::FormatMismatch(format!("{} is not a matrix format", self.format)));
        }
        CMatrix::from_row_major(self.format.dim(0), self.format.dim(1), self.coeffs.clone())
    }

    pub fn from_matrix(a: &CMatrix) -> Result<Tensor> {
        let format = TensorFormat::ordinary(&[a.rows(), a.cols()])?;
        Tensor::new(format, a.to_row_major())
    }

    /// Evaluates `f` as a polynomial at the tuple, i.e. `(f | rank_one(t))`.
    pub fn evaluate(&self, t: &VectorTuple) -> Result<C64> {
        check_tuple(&self.format, t)?;
        let per_factor: Vec<Vec<C64>> = (0..self.format.factors())
            .map(|l| monomial_values(&self.format, l, t.vector(l)))
            .collect();
        let kron = kron(&self.format, &per_factor);
        Ok(bdot(&self.coeffs, &kron))
    }
}

pub(crate) fn scale_by_sqrt_weights(format: &TensorFormat, coeffs: &[C64]) -> Vec<C64> {
    format
        .weights()
        .iter()
        .zip(coeffs)
        .map(|(w, z)| z * w.sqrt())
        .collect()
}

/// One vector per factor.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorTuple {
    vectors: Vec<Vec<C64>>,
}

impl VectorTuple {
    pub fn new(vectors: Vec<Vec<C64>>) -> Result<Self> {
        for (l, v) in vectors.iter().enumerate() {
            if v.iter().all(|z| z.norm_sqr() == 0.0) {
                return Err(Error::ZeroVector(l));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite(l));
            }
        }
        Ok(Self { vectors })
    }

    pub fn from_real(vectors: &[Vec<f64>]) -> Result<Self> {
        Self::new(
            vectors
                .iter()
                .map(|v| v.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, l: usize) -> &[C64] {
        &self.vectors[l]
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    /// `(v_ℓ|v_ℓ)` under the bilinear form.
    pub fn quadratic(&self, l: usize) -> C64 {
        bdot(&self.vectors[l], &self.vectors[l])
    }

    pub fn is_isotropic(&self, l: usize, tol: f64) -> bool {
        let v = &self.vectors[l];
        self.quadratic(l).norm() <= tol * v.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn isotropy_flags(&self, tol: f64) -> Vec<bool> {
        (0..self.len()).map(|l| self.is_isotropic(l, tol)).collect()
    }

    /// Unit Hermitian norm per factor with the phase fixed so that the first
    /// coordinate of non-negligible size is positive real.
    pub fn normalized(&self) -> VectorTuple {
        let vectors = self
            .vectors
            .iter()
            .map(|v| {
                let n = vec_norm(v);
                let pivot = v
                    .iter()
                    .find(|z| z.norm() > 1e-6 * n)
                    .copied()
                    .unwrap_or(C64::new(1.0, 0.0));
                let phase = pivot.conj() / pivot.norm();
                v.iter().map(|z| z * phase / n).collect()
            })
            .collect();
        VectorTuple { vectors }
    }

    /// Replaces factor `l` by `v`.
    pub fn with_vector(&self, l: usize, v: Vec<C64>) -> Result<VectorTuple> {
        let mut vectors = self.vectors.clone();
        vectors[l] = v;
        VectorTuple::new(vectors)
    }

    /// Projective distance: max over factors of `min_θ ‖v̂ − e^{iθ}ŵ‖`.
    pub fn projective_distance(&self, other: &VectorTuple) -> f64 {
        self.vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| {
                let (na, nb) = (vec_norm(a), vec_norm(b));
                let ov: C64 = b.iter().zip(a).map(|(y, x)| y.conj() * x).sum();
                let phase = if ov.norm() > 0.0 {
                    ov / ov.norm()
                } else {
                    C64::new(1.0, 0.0)
                };
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x / na - phase * y / nb).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

fn check_tuple(format: &TensorFormat, t: &VectorTuple) -> Result<()> {
    if t.len() != format.factors() {
        return Err(Error::DimensionMismatch {
            expected: format.factors(),
            got: t.len(),
        });
    }
    for l in 0..format.factors() {
        if t.vector(l).len() != format.dim(l) {
            return Err(Error::DimensionMismatch {
                expected: format.dim(l),
                got: t.vector(l).len(),
            });
        }
    }
    Ok(())
}

pub(crate) fn power_product(exp: &[u32], v: &[C64]) -> C64 {
    exp.iter()
        .zip(v)
        .filter(|(&a, _)| a > 0)
        .map(|(&a, z)| z.powu(a))
        .product()
}

/// `v^α` for every monomial α of factor `l`.
fn monomial_values(format: &TensorFormat, l: usize, v: &[C64]) -> Vec<C64> {
    format
        .factor_basis(l)
        .exps
        .iter()
        .map(|e| power_product(e, v))
        .collect()
}

/// Coefficients of `(v·x)^{d−1} x_j` for every monomial α of factor `l`.
fn lowered_values(format: &TensorFormat, l: usize, v: &[C64], j: usize) -> Vec<C64> {
    let fb = format.factor_basis(l);
    let d = format.degree(l) as u32;
    let d1_fact = crate::format::factorial(d - 1);
    fb.exps
        .iter()
        .map(|e| {
            if e[j] == 0 {
                return C64::new(0.0, 0.0);
            }
            let mut lowered = e.clone();
            lowered[j] -= 1;
            let multinomial = d1_fact
                / lowered
                    .iter()
                    .map(|&a| crate::format::factorial(a))
                    .product::<f64>();
            power_product(&lowered, v) * multinomial
        })
        .collect()
}

/// Kronecker product of per-factor coefficient vectors in basis order.
pub(crate) fn kron(format: &TensorFormat, per_factor: &[Vec<C64>]) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for (l, vals) in per_factor.iter().enumerate() {
        debug_assert_eq!(vals.len(), format.factor_basis(l).len());
        let mut next = Vec::with_capacity(out.len() * vals.len());
        for a in &out {
            for b in vals {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

/// `v_1^{d_1} ⊗ … ⊗ v_p^{d_p}` in the monomial basis.
pub fn rank_one(format: &TensorFormat, t: &VectorTuple) -> Result<Tensor> {
    check_tuple(format, t)?;
    let per_factor: Vec<Vec<C64>> = (0..format.factors())
        .map(|l| {
            let mult = &format.factor_basis(l).multinomials;
            monomial_values(format, l, t.vector(l))
                .into_iter()
                .zip(mult)
                .map(|(z, m)| z * m)
                .collect()
        })
        .collect();
    Ok(Tensor {
        format: format.clone(),
        coeffs: kron(format, &per_factor),
    })
}

/// The vector `u ∈ V_ℓ` with
/// `(u|z) = (f | v_1^{d_1} ⊗ … ⊗ v_ℓ^{d_ℓ−1} z ⊗ … ⊗ v_p^{d_p})` for all `z`.
///
/// Equivalently `u = (1/d_ℓ) ∇_{x_ℓ} f(v_1, …, v_p)`.
pub fn contract(f: &Tensor, t: &VectorTuple, l: usize) -> Result<Vec<C64>> {
    let format = f.format();
    format.check_factor(l)?;
    check_tuple(format, t)?;
    let p = format.factors();
    let rest: Vec<Vec<C64>> = (0..p)
        .map(|i| {
            if i == l {
                vec![C64::new(1.0, 0.0); format.factor_basis(i).len()]
            } else {
                monomial_values(format, i, t.vector(i))
            }
        })
        .collect();
    let rest_kron = kron(format, &rest);
    let fb = format.factor_basis(l);
    let d = format.degree(l) as f64;
    let v = t.vector(l);
    // derivative table: for local monomial a, Σ_j (α_j/d) v^{α−e_j} e_j
    let deriv: Vec<Vec<(usize, C64)>> = fb
        .exps
        .iter()
        .map(|e| {
            (0..e.len())
                .filter(|&j| e[j] > 0)
                .map(|j| {
                    let mut lowered = e.clone();
                    lowered[j] -= 1;
                    (j, power_product(&lowered, v) * (e[j] as f64 / d))
                })
                .collect()
        })
        .collect();
    let stride = format.stride(l);
    let len_l = fb.len();
    let mut u = vec![C64::new(0.0, 0.0); format.dim(l)];
    for (pos, (&c, &r)) in f.coeffs.iter().zip(&rest_kron).enumerate() {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        let a = (pos / stride) % len_l;
        let cr = c * r;
        for &(j, dv) in &deriv[a] {
            u[j] += cr * dv;
        }
    }
    Ok(u)
}

/// Columns `v_1^{d_1} ⊗ … ⊗ (v_ℓ^{d_ℓ−1} e_j) ⊗ … ⊗ v_p^{d_p}` spanning the
/// tangent space of the rank-one variety at `rank_one(t)`.
pub fn tangent_span(format: &TensorFormat, t: &VectorTuple) -> Result<CMatrix> {
    check_tuple(format, t)?;
    let p = format.factors();
    let full: Vec<Vec<C64>> = (0..p)
        .map(|l| {
            let mult = &format.factor_basis(l).multinomials;
            monomial_values(format, l, t.vector(l))
                .into_iter()
                .zip(mult)
                .map(|(z, m)| z * m)
                .collect()
        })
        .collect();
    let mut columns = Vec::new();
    for l in 0..p {
        for j in 0..format.dim(l) {
            let mut per_factor = full.clone();
            per_factor[l] = lowered_values(format, l, t.vector(l), j);
            columns.push(kron(format, &per_factor));
        }
    }
    CMatrix::from_columns(format.dim_t(), &columns)
}

/// Tensor with i.i.d. standard Gaussian coefficients (real and imaginary
/// parts independent when `real_only` is false), deterministic per seed.
pub fn random_tensor(format: &TensorFormat, seed: u64, real_only: bool) -> Tensor {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..format.dim_t())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = if real_only {
                0.0
            } else {
                StandardNormal.sample(&mut rng)
            };
            C64::new(re, im)
        })
        .collect();
    Tensor {
        format: format.clone(),
        coeffs,
    }
}

/// Random tuple with standard Gaussian entries.
pub fn random_tuple(format: &TensorFormat, seed: u64, real_only: bool) -> VectorTuple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors = (0..format.factors())
        .map(|l| {
            (0..format.dim(l))
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = if real_only {
                        0.0
                    } else {
                        StandardNormal.sample(&mut rng)
                    };
                    C64::new(re, im)
                })
                .collect()
        })
        .collect();
    VectorTuple { vectors }
}
