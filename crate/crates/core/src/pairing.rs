//! Skew-symmetric pairings `[·|·]_ℓ : T × T → ⋀²V_ℓ`.
//!
//! On monomials the pairing is supported on pairs that agree off factor `ℓ`
//! and whose factor-`ℓ` parts are `γ + e_a` and `γ + e_b` with `a ≠ b`. The
//! coefficient on `e_a ∧ e_b` is
//!
//! ```text
//! w_rest · (γ_a + 1)(γ_b + 1) γ! / (d_ℓ · d_ℓ!)
//! ```
//!
//! where `w_rest` is the Gram weight of the shared off-`ℓ` part. This is the
//! normalization for which `[v^d | w^d] = (v|w)^{d−1} v ∧ w`.

use crate::error::{Error, Result};
use crate::format::{factorial, monomial_gcd, MonomialIndex, TensorFormat};
use crate::linalg::{CMatrix, C64};
use crate::tensor::{contract, Tensor, VectorTuple};

/// An element of `⋀²V_ℓ`, stored as the coefficients of `e_a ∧ e_b` for
/// `a < b` (row-major over the strict upper triangle).
#[derive(Clone, Debug, PartialEq)]
pub struct AntisymElement {
    factor: usize,
    dim: usize,
    upper: Vec<C64>,
}

impl AntisymElement {
    pub fn zero(factor: usize, dim: usize) -> Self {
        Self {
            factor,
            dim,
            upper: vec![C64::new(0.0, 0.0); dim * dim.saturating_sub(1) / 2],
        }
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn slot(&self, a: usize, b: usize) -> usize {
        debug_assert!(a < b && b < self.dim);
        a * self.dim - a * (a + 1) / 2 + (b - a - 1)
    }

    /// Entry `M_ab` of the antisymmetric matrix.
    pub fn get(&self, a: usize, b: usize) -> C64 {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => self.upper[self.slot(a, b)],
            std::cmp::Ordering::Greater => -self.upper[self.slot(b, a)],
            std::cmp::Ordering::Equal => C64::new(0.0, 0.0),
        }
    }

    /// Adds `c · e_a ∧ e_b` (`a ≠ b`).
    pub fn add_wedge(&mut self, a: usize, b: usize, c: C64) {
        if a < b {
            let s = self.slot(a, b);
            self.upper[s] += c;
        } else if b < a {
            let s = self.slot(b, a);
            self.upper[s] -= c;
        }
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.upper
    }

    pub fn to_matrix(&self) -> CMatrix {
        let n = self.dim;
        let entries = (0..n * n).map(|k| self.get(k / n, k % n)).collect();
        CMatrix::from_row_major(n, n, entries).expect("finite entries")
    }

    /// Hermitian norm of the coefficient vector on `{e_a ∧ e_b : a < b}`.
    pub fn norm(&self) -> f64 {
        self.upper.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &AntisymElement) -> AntisymElement {
        AntisymElement {
            factor: self.factor,
            dim: self.dim,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> AntisymElement {
        AntisymElement {
            factor: self.factor,
            dim: self.dim,
            upper: self.upper.iter().map(|z| z * c).collect(),
        }
    }
}

/// `u ∧ v`, with coefficient `u_a v_b − u_b v_a` on `e_a ∧ e_b`.
pub fn wedge(factor: usize, u: &[C64], v: &[C64]) -> AntisymElement {
    let n = u.len();
    let mut out = AntisymElement::zero(factor, n);
    for a in 0..n {
        for b in a + 1..n {
            let s = out.slot(a, b);
            out.upper[s] = u[a] * v[b] - u[b] * v[a];
        }
    }
    out
}

/// `(γ_a+1)(γ_b+1) γ! / (d · d!)` for factor-`ℓ` parts `γ+e_a`, `γ+e_b`.
fn wedge_coefficient(gamma: &[u32], a: usize, b: usize, d: u32) -> f64 {
    let gamma_fact: f64 = gamma.iter().map(|&g| factorial(g)).product();
    f64::from(gamma[a] + 1) * f64::from(gamma[b] + 1) * gamma_fact / (f64::from(d) * factorial(d))
}

pub fn pair_monomials(
    format: &TensorFormat,
    m1: &MonomialIndex,
    m2: &MonomialIndex,
    l: usize,
) -> Result<AntisymElement> {
    m1.validate(format)?;
    m2.validate(format)?;
    format.check_factor(l)?;
    let mut out = AntisymElement::zero(l, format.dim(l));
    let p = format.factors();
    if (0..p).any(|i| i != l && m1.exps[i] != m2.exps[i]) {
        return Ok(out);
    }
    let d = format.degree(l) as u32;
    let (g, _) = monomial_gcd(m1, m2)?;
    let gamma = &g.exps[l];
    if gamma.iter().sum::<u32>() + 1 != d {
        return Ok(out);
    }
    let a = (0..gamma.len()).find(|&j| m1.exps[l][j] > gamma[j]).expect("degree d−1 gcd");
    let b = (0..gamma.len()).find(|&j| m2.exps[l][j] > gamma[j]).expect("degree d−1 gcd");
    if a == b {
        return Ok(out);
    }
    let w_rest: f64 = (0..p)
        .filter(|&i| i != l)
        .map(|i| {
            let e = &m1.exps[i];
            e.iter().map(|&x| factorial(x)).product::<f64>() / factorial(format.degree(i) as u32)
        })
        .product();
    out.add_wedge(a, b, C64::new(w_rest * wedge_coefficient(gamma, a, b, d), 0.0));
    Ok(out)
}

/// One nonzero term of the monomial pairing on factor `ℓ`: positions of the
/// two monomials, the wedge indices `(a, b)` and the coefficient.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PairTerm {
    pub m1: usize,
    pub m2: usize,
    pub a: usize,
    pub b: usize,
    pub coeff: f64,
}

/// Every nonzero `[m1|m2]_ℓ` over the monomial basis.
pub(crate) fn pair_terms(format: &TensorFormat, l: usize) -> Vec<PairTerm> {
    let fb = format.factor_basis(l);
    let d = format.degree(l) as u32;
    let stride = format.stride(l);
    // local table: (α index, β index, a, b, coefficient without w_rest)
    let mut local = Vec::new();
    for (ia, alpha) in fb.exps.iter().enumerate() {
        for a in (0..alpha.len()).filter(|&a| alpha[a] > 0) {
            let mut gamma = alpha.clone();
            gamma[a] -= 1;
            for b in (0..alpha.len()).filter(|&b| b != a) {
                let mut beta = gamma.clone();
                beta[b] += 1;
                let ib = fb.index[&beta];
                local.push((ia, ib, a, b, wedge_coefficient(&gamma, a, b, d)));
            }
        }
    }
    let weights = format.weights();
    let mut out = Vec::new();
    for m1 in 0..format.dim_t() {
        let ia = (m1 / stride) % fb.len();
        let w_rest = weights[m1] / fb.weights[ia];
        for &(la, lb, a, b, c) in local.iter().filter(|t| t.0 == ia) {
            let m2 = m1 - la * stride + lb * stride;
            out.push(PairTerm {
                m1,
                m2,
                a,
                b,
                coeff: w_rest * c,
            });
        }
    }
    out
}

/// Bilinear pairing `[f|g]_ℓ`.
pub fn pair_ell(f: &Tensor, g: &Tensor, l: usize) -> Result<AntisymElement> {
    f.format().check_same(g.format())?;
    let format = f.format();
    format.check_factor(l)?;
    let mut out = AntisymElement::zero(l, format.dim(l));
    let (fc, gc) = (f.coeffs(), g.coeffs());
    for t in pair_terms(format, l) {
        out.add_wedge(t.a, t.b, fc[t.m1] * gc[t.m2] * t.coeff);
    }
    Ok(out)
}

/// `[f | rank_one(t)]_ℓ = contract(f, t, ℓ) ∧ v_ℓ`.
pub fn pair_rank_one(f: &Tensor, t: &VectorTuple, l: usize) -> Result<AntisymElement> {
    let u = contract(f, t, l)?;
    Ok(wedge(l, &u, t.vector(l)))
}

/// `D(f) = x ∂f/∂y − y ∂f/∂x` for binary forms.
pub fn binary_d(f: &Tensor) -> Result<Tensor> {
    let format = f.format();
    if format.factors() != 1 || format.dim(0) != 2 {
        return Err(Error::FormatMismatch(format!(
            "binary_d needs a binary form, got {format}"
        )));
    }
    let d = format.degree(0);
    // position i holds x^{d−i} y^i
    let c = f.coeffs();
    let mut out = vec![C64::new(0.0, 0.0); d + 1];
    for i in 0..=d {
        if i > 0 {
            out[i - 1] += c[i] * i as f64;
        }
        if i < d {
            out[i + 1] -= c[i] * (d - i) as f64;
        }
    }
    Tensor::new(format.clone(), out)
}
