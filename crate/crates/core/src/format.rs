//! Tensor formats `S^{d_1}V_1 ⊗ … ⊗ S^{d_p}V_p` and their monomial bases.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Monomials of degree `d` in `dim` variables for one factor.
#[derive(Debug)]
pub(crate) struct FactorBasis {
    pub exps: Vec<Vec<u32>>,
    pub index: HashMap<Vec<u32>, usize>,
    /// Gram weight `α!/d!` of each monomial.
    pub weights: Vec<f64>,
    /// Multinomial coefficient `d!/α!` of each monomial.
    pub multinomials: Vec<f64>,
}

impl FactorBasis {
    fn new(degree: usize, dim: usize) -> Self {
        let mut exps = Vec::new();
        let mut current = vec![0u32; dim];
        compositions(degree as u32, 0, &mut current, &mut exps);
        let index = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let d_fact = factorial(degree as u32);
        let weights = exps
            .iter()
            .map(|e| e.iter().map(|&a| factorial(a)).product::<f64>() / d_fact)
            .collect::<Vec<_>>();
        let multinomials = weights.iter().map(|w| 1.0 / w).collect();
        Self {
            exps,
            index,
            weights,
            multinomials,
        }
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }
}

// Exponent vectors in decreasing lexicographic order: x² , xy, y².
fn compositions(remaining: u32, pos: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        compositions(remaining - a, pos + 1, current, out);
    }
    current[pos] = 0;
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

#[derive(Debug)]
struct BasisData {
    factors: Vec<FactorBasis>,
    strides: Vec<usize>,
    weights: Vec<f64>,
}

/// The format `(d_1..d_p; n_1+1..n_p+1)` of a partially symmetric tensor.
///
/// The monomial basis is computed once at construction and shared between
/// clones.
#[derive(Clone)]
pub struct TensorFormat {
    degrees: Vec<usize>,
    dims: Vec<usize>,
    basis: Arc<BasisData>,
}

impl PartialEq for TensorFormat {
    fn eq(&self, other: &Self) -> bool {
        self.degrees == other.degrees && self.dims == other.dims
    }
}

impl Eq for TensorFormat {}

impl fmt::Debug for TensorFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TensorFormat")
            .field("degrees", &self.degrees)
            .field("dims", &self.dims)
            .finish()
    }
}

impl fmt::Display for TensorFormat {
    /// Canonical short form: `2x3` for matrices, `S3C2` for binary cubics,
    /// `S3C2x3` for mixed formats.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .degrees
            .iter()
            .zip(&self.dims)
            .map(|(&d, &n)| {
                if d == 1 {
                    n.to_string()
                } else {
                    format!("S{d}C{n}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Largest `dim T` we agree to materialize.
pub const MAX_DIM_T: usize = 200_000;

impl TensorFormat {
    pub fn new(degrees: Vec<usize>, dims: Vec<usize>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidInput("format needs at least one factor".into()));
        }
        if degrees.len() != dims.len() {
            return Err(Error::InvalidInput(format!(
                "{} degrees but {} dimensions",
                degrees.len(),
                dims.len()
            )));
        }
        if degrees.contains(&0) {
            return Err(Error::InvalidInput("degrees must be at least 1".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidInput("dimensions must be at least 1".into()));
        }
        let mut dim_t: usize = 1;
        for (&d, &n) in degrees.iter().zip(&dims) {
            dim_t = dim_t
                .checked_mul(binomial(n - 1 + d, d))
                .filter(|&x| x <= MAX_DIM_T)
                .ok_or_else(|| Error::InvalidInput("format too large".into()))?;
        }
        let factors: Vec<FactorBasis> = degrees
            .iter()
            .zip(&dims)
            .map(|(&d, &n)| FactorBasis::new(d, n))
            .collect();
        let mut strides = vec![1; factors.len()];
        for l in (0..factors.len().saturating_sub(1)).rev() {
            strides[l] = strides[l + 1] * factors[l + 1].len();
        }
        let mut weights = vec![1.0; dim_t];
        for (pos, w) in weights.iter_mut().enumerate() {
            for (l, fb) in factors.iter().enumerate() {
                *w *= fb.weights[(pos / strides[l]) % fb.len()];
            }
        }
        Ok(Self {
            degrees,
            dims,
            basis: Arc::new(BasisData {
                factors,
                strides,
                weights,
            }),
        })
    }

    /// Ordinary tensors `C^{dims[0]} ⊗ …`.
    pub fn ordinary(dims: &[usize]) -> Result<Self> {
        Self::new(vec![1; dims.len()], dims.to_vec())
    }

    /// Symmetric tensors `S^d C^dim`.
    pub fn symmetric(degree: usize, dim: usize) -> Result<Self> {
        Self::new(vec![degree], vec![dim])
    }

    pub fn factors(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn degree(&self, l: usize) -> usize {
        self.degrees[l]
    }

    pub fn dim(&self, l: usize) -> usize {
        self.dims[l]
    }

    /// Projective dimension `n_ℓ`.
    pub fn proj_dim(&self, l: usize) -> usize {
        self.dims[l] - 1
    }

    /// `D = Σ d_ℓ`.
    pub fn total_degree(&self) -> usize {
        self.degrees.iter().sum()
    }

    /// `N = Σ n_ℓ`, the dimension of the Segre–Veronese variety.
    pub fn segre_dim(&self) -> usize {
        self.dims.iter().map(|n| n - 1).sum()
    }

    pub fn dim_t(&self) -> usize {
        self.basis.weights.len()
    }

    pub fn is_matrix(&self) -> bool {
        self.degrees == [1, 1]
    }

    pub fn is_ordinary(&self) -> bool {
        self.degrees.iter().all(|&d| d == 1)
    }

    /// `n_ℓ ≤ Σ_{i≠ℓ} n_i`.
    pub fn triangle_ok(&self, l: usize) -> bool {
        let n = self.segre_dim();
        2 * self.proj_dim(l) <= n
    }

    /// Triangle inequality for every factor of degree one.
    pub fn theorem_triangle_ok(&self) -> bool {
        (0..self.factors()).all(|l| self.degrees[l] != 1 || self.triangle_ok(l))
    }

    /// Triangle inequality for every factor.
    pub fn all_triangle_ok(&self) -> bool {
        (0..self.factors()).all(|l| self.triangle_ok(l))
    }

    pub(crate) fn factor_basis(&self, l: usize) -> &FactorBasis {
        &self.basis.factors[l]
    }

    pub(crate) fn stride(&self, l: usize) -> usize {
        self.basis.strides[l]
    }

    /// Per-monomial Gram weights `Π_ℓ α^(ℓ)!/d_ℓ!`.
    pub fn weights(&self) -> &[f64] {
        &self.basis.weights
    }

    /// Local (per-factor) indices of basis position `pos`.
    pub(crate) fn locals(&self, pos: usize) -> Vec<usize> {
        (0..self.factors())
            .map(|l| (pos / self.basis.strides[l]) % self.basis.factors[l].len())
            .collect()
    }

    pub(crate) fn position_of_locals(&self, locals: &[usize]) -> usize {
        locals
            .iter()
            .zip(&self.basis.strides)
            .map(|(a, s)| a * s)
            .sum()
    }

    pub fn monomial(&self, pos: usize) -> MonomialIndex {
        let exps = self
            .locals(pos)
            .iter()
            .enumerate()
            .map(|(l, &a)| self.basis.factors[l].exps[a].clone())
            .collect();
        MonomialIndex { exps }
    }

    pub fn position(&self, m: &MonomialIndex) -> Option<usize> {
        if m.exps.len() != self.factors() {
            return None;
        }
        let mut locals = Vec::with_capacity(self.factors());
        for (l, e) in m.exps.iter().enumerate() {
            locals.push(*self.basis.factors[l].index.get(e)?);
        }
        Some(self.position_of_locals(&locals))
    }

    /// All monomials of the format in basis order.
    pub fn monomial_basis(&self) -> Vec<MonomialIndex> {
        (0..self.dim_t()).map(|p| self.monomial(p)).collect()
    }

    pub(crate) fn check_same(&self, other: &TensorFormat) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::FormatMismatch(format!("{self} vs {other}")))
        }
    }

    pub(crate) fn check_factor(&self, l: usize) -> Result<()> {
        if l < self.factors() {
            Ok(())
        } else {
            Err(Error::FactorOutOfRange {
                index: l,
                factors: self.factors(),
            })
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// A monomial of `T`: one exponent vector per factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialIndex {
    pub exps: Vec<Vec<u32>>,
}

impl MonomialIndex {
    pub fn new(exps: Vec<Vec<u32>>) -> Self {
        Self { exps }
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().flatten().sum()
    }

    /// Checks the exponent sums and lengths against `format`.
    pub fn validate(&self, format: &TensorFormat) -> Result<()> {
        if self.exps.len() != format.factors() {
            return Err(Error::FormatMismatch(format!(
                "monomial has {} factors, format has {}",
                self.exps.len(),
                format.factors()
            )));
        }
        for (l, e) in self.exps.iter().enumerate() {
            if e.len() != format.dim(l) {
                return Err(Error::FormatMismatch(format!(
                    "factor {l}: {} exponents for dimension {}",
                    e.len(),
                    format.dim(l)
                )));
            }
            let s: u32 = e.iter().sum();
            if s as usize != format.degree(l) {
                return Err(Error::FormatMismatch(format!(
                    "factor {l}: exponent sum {s} differs from degree {}",
                    format.degree(l)
                )));
            }
        }
        Ok(())
    }
}

impl Ord for MonomialIndex {
    /// Basis order: factor by factor, and inside a factor by decreasing
    /// lexicographic order of the exponent vector.
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.exps.iter().zip(&other.exps) {
            match b.cmp(a) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.exps.len().cmp(&other.exps.len())
    }
}

impl PartialOrd for MonomialIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Componentwise minimum of two monomials and its total degree.
pub fn monomial_gcd(m1: &MonomialIndex, m2: &MonomialIndex) -> Result<(MonomialIndex, u32)> {
    let same_shape = m1.exps.len() == m2.exps.len()
        && m1.exps.iter().zip(&m2.exps).all(|(a, b)| a.len() == b.len());
    if !same_shape {
        return Err(Error::FormatMismatch("monomials of different shapes".into()));
    }
    let exps: Vec<Vec<u32>> = m1
        .exps
        .iter()
        .zip(&m2.exps)
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x.min(y)).collect())
        .collect();
    let g = MonomialIndex { exps };
    let deg = g.degree();
    Ok((g, deg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_quadrics() {
        let f = TensorFormat::symmetric(2, 2).unwrap();
        let basis = f.monomial_basis();
        let exps: Vec<_> = basis.iter().map(|m| m.exps[0].clone()).collect();
        assert_eq!(exps, vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert!(basis.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn matrix_basis_is_row_major() {
        let f = TensorFormat::ordinary(&[2, 2]).unwrap();
        assert_eq!(f.dim_t(), 4);
        let m = f.monomial(1);
        assert_eq!(m.exps, vec![vec![1, 0], vec![0, 1]]);
        assert!(f.weights().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn mixed_dimension() {
        let f = TensorFormat::new(vec![3, 1], vec![2, 3]).unwrap();
        assert_eq!(f.dim_t(), 12);
        let basis = f.monomial_basis();
        assert!(basis.windows(2).all(|w| w[0] < w[1]));
        for (p, m) in basis.iter().enumerate() {
            assert_eq!(f.position(m), Some(p));
        }
    }

    #[test]
    fn derived_quantities() {
        let f = TensorFormat::ordinary(&[2, 2, 4]).unwrap();
        assert_eq!(f.segre_dim(), 5);
        assert_eq!(f.total_degree(), 3);
        assert!(f.triangle_ok(0) && f.triangle_ok(1) && !f.triangle_ok(2));
        assert!(!f.theorem_triangle_ok());
        let s = TensorFormat::new(vec![1, 2], vec![5, 2]).unwrap();
        // n = (4, 1): fails for the degree-one factor
        assert!(!s.theorem_triangle_ok());
        let s = TensorFormat::new(vec![2, 1], vec![5, 2]).unwrap();
        // only the degree-one factor is constrained
        assert!(s.theorem_triangle_ok());
        assert!(!s.all_triangle_ok());
    }

    #[test]
    fn invalid_formats() {
        assert!(TensorFormat::new(vec![], vec![]).is_err());
        assert!(TensorFormat::new(vec![1], vec![2, 2]).is_err());
        assert!(TensorFormat::new(vec![0], vec![2]).is_err());
        assert!(TensorFormat::new(vec![1], vec![0]).is_err());
    }

    #[test]
    fn gcd_example() {
        let m1 = MonomialIndex::new(vec![vec![2, 1, 0], vec![1, 1, 1], vec![2, 0, 0]]);
        let m2 = MonomialIndex::new(vec![vec![1, 1, 1], vec![0, 0, 3], vec![0, 1, 1]]);
        let (g, deg) = monomial_gcd(&m1, &m2).unwrap();
        assert_eq!(g.exps, vec![vec![1, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]);
        assert_eq!(deg, 3);
    }

    #[test]
    fn gcd_trivial_cases() {
        let m = MonomialIndex::new(vec![vec![2, 1], vec![0, 1]]);
        let (g, deg) = monomial_gcd(&m, &m).unwrap();
        assert_eq!(g, m);
        assert_eq!(deg, 4);
        let a = MonomialIndex::new(vec![vec![2, 0], vec![1, 0]]);
        let b = MonomialIndex::new(vec![vec![0, 2], vec![0, 1]]);
        assert_eq!(monomial_gcd(&a, &b).unwrap().1, 0);
        let c = MonomialIndex::new(vec![vec![2, 0]]);
        assert!(monomial_gcd(&a, &c).is_err());
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(TensorFormat::ordinary(&[2, 2, 4]).unwrap().to_string(), "2x2x4");
        assert_eq!(
            TensorFormat::new(vec![3, 1], vec![2, 3]).unwrap().to_string(),
            "S3C2x3"
        );
    }
}
