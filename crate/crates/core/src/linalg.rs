//! Dense complex matrices, numerical rank, kernels and least squares.
//!
//! Everything here is a thin layer over `nalgebra`'s SVD. The only contract
//! downstream code relies on is the one documented on each function; the
//! decomposition used behind it is an implementation detail.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default relative singular-value threshold for numerical rank.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Dense complex matrix. Entries are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    inner: DMatrix<C64>,
}

impl CMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        check_finite(&entries)?;
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &entries),
        })
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Result<Self> {
        let mut inner = DMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    got: col.len(),
                });
            }
            check_finite(col)?;
            for (i, &x) in col.iter().enumerate() {
                inner[(i, j)] = x;
            }
        }
        Ok(Self { inner })
    }

    pub fn from_dmatrix(inner: DMatrix<C64>) -> Result<Self> {
        check_finite(inner.as_slice())?;
        Ok(Self { inner })
    }

    pub fn from_real(m: &DMatrix<f64>) -> Self {
        Self {
            inner: m.map(|x| C64::new(x, 0.0)),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        self.inner.column(j).iter().copied().collect()
    }

    pub fn columns(&self) -> Vec<Vec<C64>> {
        (0..self.cols()).map(|j| self.column(j)).collect()
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols() != other.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: other.rows(),
            });
        }
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                got: v.len(),
            });
        }
        let x = DVector::from_column_slice(v);
        Ok((&self.inner * x).iter().copied().collect())
    }

    pub fn transpose(&self) -> CMatrix {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn conjugate(&self) -> CMatrix {
        Self {
            inner: self.inner.map(|z| z.conj()),
        }
    }

    pub fn adjoint(&self) -> CMatrix {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.rows() != other.rows() {
            return Err(Error::DimensionMismatch {
                expected: self.rows(),
                got: other.rows(),
            });
        }
        let mut inner = DMatrix::zeros(self.rows(), self.cols() + other.cols());
        inner.columns_mut(0, self.cols()).copy_from(&self.inner);
        inner
            .columns_mut(self.cols(), other.cols())
            .copy_from(&other.inner);
        Ok(Self { inner })
    }

    /// Hermitian Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.inner.iter().all(|z| z.im.abs() <= tol)
    }
}

fn check_finite(entries: &[C64]) -> Result<()> {
    match entries
        .iter()
        .position(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Hermitian 2-norm of a complex vector.
pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product `Σ conj(a_i) b_i`.
pub fn hdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Complex bilinear product `Σ a_i b_i` (no conjugation).
pub fn bdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Full singular value decomposition with descending singular values.
///
/// `v` is `cols × cols`; `u` is `rows × min(rows, cols)`.
pub(crate) struct SortedSvd {
    pub u: DMatrix<C64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<C64>,
}

pub(crate) fn sorted_svd(a: &DMatrix<C64>) -> SortedSvd {
    let (rows, cols) = a.shape();
    let k = rows.min(cols);
    if k == 0 {
        return SortedSvd {
            u: DMatrix::zeros(rows, 0),
            sigma: Vec::new(),
            v: DMatrix::identity(cols, cols),
        };
    }
    let m = faer::Mat::<C64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let svd = m.svd().expect("SVD of a finite matrix");
    let (fu, fv, fs) = (svd.U(), svd.V(), svd.S().column_vector());
    SortedSvd {
        u: DMatrix::from_fn(rows, k, |i, j| fu[(i, j)]),
        sigma: (0..k).map(|i| fs[i].re).collect(),
        v: DMatrix::from_fn(cols, cols, |i, j| fv[(i, j)]),
    }
}

/// Singular values in descending order.
pub(crate) fn singular_values(a: &DMatrix<C64>) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    let m = faer::Mat::<C64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    m.singular_values().expect("SVD of a finite matrix")
}

/// Minimum-norm real least squares, discarding singular values below
/// `1e-13 · σ_max · max(rows, cols)`.
pub(crate) fn real_least_squares(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let (rows, cols) = a.shape();
    let m = faer::Mat::<f64>::from_fn(rows, cols, |i, j| a[(i, j)]);
    let svd = match m.thin_svd() {
        Ok(svd) => svd,
        Err(_) => return vec![0.0; cols],
    };
    let (u, v, s) = (svd.U(), svd.V(), svd.S().column_vector());
    let k = rows.min(cols);
    let cut = if k == 0 { 0.0 } else { 1e-13 * s[0] * rows.max(cols) as f64 };
    let mut x = vec![0.0; cols];
    for i in 0..k {
        if s[i] <= cut {
            break;
        }
        let coeff = (0..rows).map(|r| u[(r, i)] * b[r]).sum::<f64>() / s[i];
        for (c, xc) in x.iter_mut().enumerate() {
            *xc += v[(c, i)] * coeff;
        }
    }
    x
}

#[derive(Clone, Debug)]
pub struct RankResult {
    pub rank: usize,
    /// Orthonormal columns spanning the numerical kernel.
    pub kernel_basis: CMatrix,
    /// The relative threshold that was applied.
    pub tolerance_used: f64,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    /// `σ_rank / σ_{rank+1}`; infinite when no nonzero singular value was
    /// discarded, zero when the rank is zero.
    pub gap: f64,
}

impl RankResult {
    /// Smallest kept singular value relative to the largest one.
    pub fn min_kept_relative(&self) -> f64 {
        if self.rank == 0 {
            return 0.0;
        }
        self.singular_values[self.rank - 1] / self.singular_values[0]
    }
}

pub fn rank_and_kernel(a: &CMatrix, rel_tol: f64) -> Result<RankResult> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidInput(format!(
            "relative tolerance {rel_tol} not in (0, 1)"
        )));
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    let cols = a.cols();
    let svd = sorted_svd(a.as_dmatrix());
    let largest = svd.sigma.first().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return Ok(RankResult {
            rank: 0,
            kernel_basis: CMatrix::identity(cols),
            tolerance_used: rel_tol,
            singular_values: svd.sigma,
            gap: 0.0,
        });
    }
    let threshold = rel_tol * largest;
    let rank = svd.sigma.iter().filter(|&&s| s > threshold).count();
    let next = svd.sigma.get(rank).copied().unwrap_or(0.0);
    let gap = if next == 0.0 {
        f64::INFINITY
    } else {
        svd.sigma[rank - 1] / next
    };
    let kernel = svd.v.columns(rank, cols - rank).into_owned();
    Ok(RankResult {
        rank,
        kernel_basis: CMatrix { inner: kernel },
        tolerance_used: rel_tol,
        singular_values: svd.sigma,
        gap,
    })
}

/// Orthonormal basis of the column space, at the given relative threshold.
pub fn column_space(a: &CMatrix, rel_tol: f64) -> Result<CMatrix> {
    let r = rank_and_kernel(a, rel_tol)?;
    let svd = sorted_svd(a.as_dmatrix());
    Ok(CMatrix {
        inner: svd.u.columns(0, r.rank).into_owned(),
    })
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
///
/// Returns `x` and the residual `‖A x − b‖`.
pub fn least_squares(a: &CMatrix, b: &[C64]) -> Result<(Vec<C64>, f64)> {
    if a.rows() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.rows(),
            got: b.len(),
        });
    }
    check_finite(b)?;
    let svd = sorted_svd(a.as_dmatrix());
    let largest = svd.sigma.first().copied().unwrap_or(0.0);
    let cut = largest * 1e-13 * (a.rows().max(a.cols()) as f64);
    let mut x = DVector::<C64>::zeros(a.cols());
    let bv = DVector::from_column_slice(b);
    for (i, &s) in svd.sigma.iter().enumerate() {
        if s <= cut || s == 0.0 {
            break;
        }
        let coeff = svd.u.column(i).dotc(&bv) / s;
        x += svd.v.column(i) * coeff;
    }
    let r = a.as_dmatrix() * &x - bv;
    let residual = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok((x.iter().copied().collect(), residual))
}

/// Real SVD `A = U diag(σ) Vᵀ` with square orthogonal `U`, `V`.
#[derive(Clone, Debug)]
pub struct SvdBaseline {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl SvdBaseline {
    /// `U diag(σ₁..σ_k, 0, …) Vᵀ` restricted to the chosen indices.
    pub fn truncation(&self, indices: &[usize]) -> DMatrix<f64> {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let mut out = DMatrix::zeros(m, n);
        for &i in indices {
            out += self.u.column(i) * self.v.column(i).transpose() * self.sigma[i];
        }
        out
    }
}

pub fn hermitian_svd_baseline(a: &CMatrix) -> Result<SvdBaseline> {
    if !a.is_real(0.0) {
        return Err(Error::InvalidInput(
            "SVD baseline requires a real matrix".into(),
        ));
    }
    let (m, n) = (a.rows(), a.cols());
    let real = faer::Mat::<f64>::from_fn(m, n, |i, j| a.get(i, j).re);
    let svd = real
        .svd()
        .map_err(|e| Error::InvalidInput(format!("SVD failed: {e:?}")))?;
    let (fu, fv, fs) = (svd.U(), svd.V(), svd.S().column_vector());
    Ok(SvdBaseline {
        u: DMatrix::from_fn(m, m, |i, j| fu[(i, j)]),
        sigma: (0..m.min(n)).map(|i| fs[i]).collect(),
        v: DMatrix::from_fn(n, n, |i, j| fv[(i, j)]),
    })
}
