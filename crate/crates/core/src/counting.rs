//! Exact counts: the number of critical rank-one tensors of a generic tensor
//! as a top Chern class, Bott's formulas for `h^q(P^n, Ω^r(k))`, Künneth
//! aggregation and the vanishing checks behind the spanning result.
//!
//! No floating point is used here.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::format::TensorFormat;

/// Polynomial in `p` variables with integer coefficients, truncated so that
/// the exponent of variable `ℓ` never exceeds `bounds[ℓ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntPoly {
    bounds: Vec<usize>,
    strides: Vec<usize>,
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn zero(bounds: &[usize]) -> Self {
        let mut strides = vec![1; bounds.len()];
        for l in (0..bounds.len().saturating_sub(1)).rev() {
            strides[l] = strides[l + 1] * (bounds[l + 1] + 1);
        }
        let size = bounds.iter().map(|b| b + 1).product();
        Self {
            bounds: bounds.to_vec(),
            strides,
            coeffs: vec![BigInt::zero(); size],
        }
    }

    pub fn one(bounds: &[usize]) -> Self {
        let mut p = Self::zero(bounds);
        p.coeffs[0] = BigInt::one();
        p
    }

    /// `c · Π t_ℓ^{exps[ℓ]}`, or zero if an exponent is out of bounds.
    pub fn monomial(bounds: &[usize], exps: &[usize], c: BigInt) -> Self {
        let mut p = Self::zero(bounds);
        if exps.iter().zip(bounds).all(|(e, b)| e <= b) {
            let idx = p.index(exps);
            p.coeffs[idx] = c;
        }
        p
    }

    /// The linear form `Σ_ℓ c_ℓ t_ℓ`.
    pub fn linear(bounds: &[usize], coeffs: &[i64]) -> Self {
        let mut p = Self::zero(bounds);
        for (l, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; bounds.len()];
            e[l] = 1;
            p = p.add(&Self::monomial(bounds, &e, BigInt::from(c)));
        }
        p
    }

    fn index(&self, exps: &[usize]) -> usize {
        exps.iter().zip(&self.strides).map(|(e, s)| e * s).sum()
    }

    fn exponents(&self, idx: usize) -> Vec<usize> {
        self.strides
            .iter()
            .zip(&self.bounds)
            .map(|(s, b)| (idx / s) % (b + 1))
            .collect()
    }

    pub fn coefficient(&self, exps: &[usize]) -> BigInt {
        if exps.len() != self.bounds.len() || exps.iter().zip(&self.bounds).any(|(e, b)| e > b) {
            return BigInt::zero();
        }
        self.coeffs[self.index(exps)].clone()
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        assert_eq!(self.bounds, other.bounds, "truncation bounds differ");
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        out
    }

    /// Product with every term beyond the bounds dropped.
    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        assert_eq!(self.bounds, other.bounds, "truncation bounds differ");
        let mut out = IntPoly::zero(&self.bounds);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ea = self.exponents(i);
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let eb = other.exponents(j);
                let sum: Vec<usize> = ea.iter().zip(&eb).map(|(x, y)| x + y).collect();
                if sum.iter().zip(&self.bounds).all(|(e, bd)| e <= bd) {
                    let k = out.index(&sum);
                    out.coeffs[k] += a * b;
                }
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> IntPoly {
        (0..k).fold(IntPoly::one(&self.bounds), |acc, _| acc.mul(self))
    }
}

/// Number of critical rank-one tensors of a generic tensor of this format:
/// the coefficient of `Π t_ℓ^{n_ℓ}` in `Π_ℓ Σ_{i=0}^{n_ℓ} t_ℓ^i h_ℓ^{n_ℓ−i}`
/// with `h_ℓ = Σ_j d_j t_j − t_ℓ`.
pub fn count_critical_rank_one(format: &TensorFormat) -> BigInt {
    let p = format.factors();
    let bounds: Vec<usize> = (0..p).map(|l| format.proj_dim(l)).collect();
    let mut total = IntPoly::one(&bounds);
    for l in 0..p {
        let mut hc: Vec<i64> = format.degrees().iter().map(|&d| d as i64).collect();
        hc[l] -= 1;
        let h = IntPoly::linear(&bounds, &hc);
        let n = bounds[l];
        let mut factor = IntPoly::zero(&bounds);
        for i in 0..=n {
            let mut e = vec![0; p];
            e[l] = i;
            let t_pow = IntPoly::monomial(&bounds, &e, BigInt::one());
            factor = factor.add(&t_pow.mul(&h.pow(n - i)));
        }
        total = total.mul(&factor);
    }
    total.coefficient(&bounds)
}

fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Bott's formulas for `h^q(P^n, Ω^r(k))`.
pub fn bott_h(n: u32, q: u32, r: u32, k: i64) -> BigInt {
    let (n, q, r) = (i64::from(n), i64::from(q), i64::from(r));
    if q == 0 && r <= n && k > r {
        binom(k + n - r, k) * binom(k - 1, r)
    } else if q == r && r <= n && k == 0 {
        BigInt::one()
    } else if q == n && r <= n && k < r - n {
        binom(-k + r, -k) * binom(-k - 1, n - r)
    } else {
        BigInt::zero()
    }
}

/// `Σ_{q_1+…+q_p = q} Π_ℓ tables[ℓ][q_ℓ]`, with missing entries read as 0.
pub fn kunneth_dim(tables: &[Vec<BigInt>], q: usize) -> BigInt {
    // running convolution, truncated at degree q
    let mut acc = vec![BigInt::zero(); q + 1];
    acc[0] = BigInt::one();
    for table in tables {
        let mut next = vec![BigInt::zero(); q + 1];
        for (i, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in table.iter().enumerate().take(q + 1 - i) {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    acc.swap_remove(q)
}

/// `dim H^q(P X, ⋀^k E^* ⊗ O(d_1, …, d_p))` via the decomposition into
/// twisted differential forms on the factors.
pub fn vanishing_check(format: &TensorFormat, k: usize, q: usize) -> Result<BigInt> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("wedge power k = {k} must be at least 2")));
    }
    let p = format.factors();
    let bounds: Vec<usize> = (0..p).map(|l| format.proj_dim(l)).collect();
    let mut total = BigInt::zero();
    let mut r = vec![0usize; p];
    loop {
        if r.iter().sum::<usize>() == k {
            let tables: Vec<Vec<BigInt>> = (0..p)
                .map(|l| {
                    let n = bounds[l] as u32;
                    let twist = -(format.degree(l) as i64) * (k as i64 - 1) + 2 * r[l] as i64;
                    (0..=n).map(|ql| bott_h(n, ql, r[l] as u32, twist)).collect()
                })
                .collect();
            total += kunneth_dim(&tables, q);
        }
        // next r with 0 ≤ r_ℓ ≤ n_ℓ
        let mut l = 0;
        loop {
            if l == p {
                return Ok(total);
            }
            if r[l] < bounds[l] {
                r[l] += 1;
                break;
            }
            r[l] = 0;
            l += 1;
        }
    }
}

/// The expected codimension `Σ_ℓ C(n_ℓ+1, 2)` together with the same number
/// computed as `Σ_ℓ h^0(P^{n_ℓ}, Ω^1(2))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpectedCodim {
    pub value: usize,
    pub via_bott: BigInt,
}

impl ExpectedCodim {
    pub fn consistent(&self) -> bool {
        BigInt::from(self.value) == self.via_bott
    }
}

pub fn expected_codim(format: &TensorFormat) -> ExpectedCodim {
    let value = format.dims().iter().map(|&m| m * (m - 1) / 2).sum();
    let via_bott = (0..format.factors())
        .map(|l| bott_h(format.proj_dim(l) as u32, 0, 1, 2))
        .sum();
    let out = ExpectedCodim { value, via_bott };
    debug_assert!(out.consistent());
    out
}

/// `Σ_{i=0}^{n} (d−1)^i`, written in closed form for the symmetric case.
pub fn symmetric_count_closed_form(d: u32, n: u32) -> BigInt {
    match d {
        1 => BigInt::one(),
        2 => BigInt::from(n + 1),
        _ => {
            let base = BigInt::from(d - 1);
            (num_traits::pow(base, n as usize + 1) - BigInt::one()) / BigInt::from(d - 2)
        }
    }
}

/// Sign helper used by the Serre-duality checks.
pub fn is_nonnegative(x: &BigInt) -> bool {
    !x.is_negative()
}
