//! The critical space `H_f = {g : [f|g]_ℓ = 0 for all ℓ}`.

use crate::error::{Error, Result};
use crate::format::TensorFormat;
use crate::linalg::{least_squares, rank_and_kernel, CMatrix, RankResult, C64};
use crate::pairing::{pair_ell, pair_terms};
use crate::tensor::{scale_by_sqrt_weights, Tensor};

/// Linear conditions cutting out `H_f`: one row per `(ℓ, a < b)`, ordered by
/// factor and then lexicographically in `(a, b)`.
pub fn constraint_matrix(f: &Tensor) -> CMatrix {
    let format = f.format();
    let rows: usize = format.dims().iter().map(|&n| n * (n - 1) / 2).sum();
    let cols = format.dim_t();
    let mut entries = vec![C64::new(0.0, 0.0); rows * cols];
    let mut row_offset = 0;
    let fc = f.coeffs();
    for l in 0..format.factors() {
        let n = format.dim(l);
        let row_of = |a: usize, b: usize| row_offset + a * n - a * (a + 1) / 2 + (b - a - 1);
        for t in pair_terms(format, l) {
            let val = fc[t.m1] * t.coeff;
            if t.a < t.b {
                entries[row_of(t.a, t.b) * cols + t.m2] += val;
            } else {
                entries[row_of(t.b, t.a) * cols + t.m2] -= val;
            }
        }
        row_offset += n * (n - 1) / 2;
    }
    CMatrix::from_row_major(rows, cols, entries).expect("finite coefficients")
}

#[derive(Clone, Debug)]
pub struct CriticalSpace {
    pub format: TensorFormat,
    pub f_ref: Tensor,
    /// Orthonormal columns (in monomial coordinates) spanning `H_f`.
    pub basis: CMatrix,
    /// Measured numerical rank of the constraint matrix.
    pub codim: usize,
    /// `σ_codim / σ_{codim+1}` of the constraint matrix (infinite when no
    /// nonzero singular value was discarded).
    pub gap: f64,
    /// Smallest kept singular value relative to the largest.
    pub min_kept_relative: f64,
    pub singular_values: Vec<f64>,
}

impl CriticalSpace {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis_tensors(&self) -> Vec<Tensor> {
        self.basis
            .columns()
            .into_iter()
            .map(|c| Tensor::new(self.format.clone(), c).expect("basis column"))
            .collect()
    }
}

pub fn critical_space(f: &Tensor, rel_tol: f64) -> Result<CriticalSpace> {
    if f.is_zero() {
        return Err(Error::ZeroTensor);
    }
    let a = constraint_matrix(f);
    let RankResult {
        rank,
        kernel_basis,
        singular_values,
        gap,
        ..
    } = rank_and_kernel(&a, rel_tol)?;
    let min_kept_relative = if rank == 0 {
        0.0
    } else {
        singular_values[rank - 1] / singular_values[0]
    };
    Ok(CriticalSpace {
        format: f.format().clone(),
        f_ref: f.clone(),
        basis: kernel_basis,
        codim: rank,
        gap,
        min_kept_relative,
        singular_values,
    })
}

/// `max_ℓ ‖[f|g]_ℓ‖ / (‖f‖ ‖g‖)`; zero exactly when `g ∈ H_f`.
pub fn membership_residual(f: &Tensor, g: &Tensor) -> Result<f64> {
    f.format().check_same(g.format())?;
    if g.is_zero() || f.is_zero() {
        return Err(Error::ZeroTensor);
    }
    let scale = f.norm() * g.norm();
    let mut worst: f64 = 0.0;
    for l in 0..f.format().factors() {
        worst = worst.max(pair_ell(f, g, l)?.norm() / scale);
    }
    Ok(worst)
}

/// Coefficient columns of `tensors`, scaled so that the Hermitian norm on `T`
/// becomes the Euclidean norm of the column.
pub fn orthonormal_columns(format: &TensorFormat, tensors: &[Tensor]) -> Result<CMatrix> {
    let cols: Vec<Vec<C64>> = tensors
        .iter()
        .map(|t| {
            format.check_same(t.format())?;
            Ok(t.orthonormal_coords())
        })
        .collect::<Result<_>>()?;
    CMatrix::from_columns(format.dim_t(), &cols)
}

/// Numerical rank of the linear span of `tensors`.
pub fn span_rank(format: &TensorFormat, tensors: &[Tensor], rel_tol: f64) -> Result<RankResult> {
    if tensors.is_empty() {
        return Err(Error::InvalidInput("no tensors to span".into()));
    }
    rank_and_kernel(&orthonormal_columns(format, tensors)?, rel_tol)
}

/// Relative distance `‖target − Σ c_i t_i‖ / ‖target‖` from `target` to the
/// span of `tensors`, with the best coefficients.
pub fn span_residual(tensors: &[Tensor], target: &Tensor) -> Result<(f64, Vec<C64>)> {
    if target.is_zero() {
        return Err(Error::ZeroTensor);
    }
    let format = target.format();
    if tensors.is_empty() {
        return Ok((1.0, Vec::new()));
    }
    let a = orthonormal_columns(format, tensors)?;
    let b = scale_by_sqrt_weights(format, target.coeffs());
    let (x, res) = least_squares(&a, &b)?;
    Ok((res / target.norm(), x))
}

/// Norm of the orthogonal projection of `r` onto the span of the given
/// coefficient columns, in the Hermitian norm of `T`.
pub fn projection_norm(format: &TensorFormat, columns: &CMatrix, r: &Tensor) -> Result<f64> {
    let scaled: Vec<Vec<C64>> = columns
        .columns()
        .iter()
        .map(|c| scale_by_sqrt_weights(format, c))
        .collect();
    let a = CMatrix::from_columns(format.dim_t(), &scaled)?;
    let b = r.orthonormal_coords();
    let (x, _) = least_squares(&a, &b)?;
    let proj = a.mul_vec(&x)?;
    Ok(crate::linalg::vec_norm(&proj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::binary_d;
    use crate::tensor::random_tensor;

    #[test]
    fn constraint_shape() {
        let f = TensorFormat::ordinary(&[2, 2, 2]).unwrap();
        let a = constraint_matrix(&random_tensor(&f, 0, true));
        assert_eq!((a.rows(), a.cols()), (3, 8));
        let z = constraint_matrix(&Tensor::zeros(&f));
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn constraint_rows_match_pairing() {
        let f = TensorFormat::new(vec![2, 1], vec![3, 2]).unwrap();
        let g = random_tensor(&f, 1, false);
        let h = random_tensor(&f, 2, false);
        let a = constraint_matrix(&g);
        let ah = a.mul_vec(h.coeffs()).unwrap();
        let mut expected = Vec::new();
        for l in 0..2 {
            expected.extend_from_slice(pair_ell(&g, &h, l).unwrap().coefficients());
        }
        for (x, y) in ah.iter().zip(&expected) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn binary_cubic_row_is_weighted_d() {
        let f = TensorFormat::symmetric(3, 2).unwrap();
        let g = random_tensor(&f, 3, true);
        let a = constraint_matrix(&g);
        assert_eq!((a.rows(), a.cols()), (1, 4));
        let dg = binary_d(&g).unwrap();
        let weighted: Vec<C64> = dg.coeffs().iter().zip(f.weights()).map(|(z, w)| z * w).collect();
        let both = CMatrix::from_row_major(2, 4, [a.to_row_major(), weighted].concat()).unwrap();
        assert_eq!(rank_and_kernel(&both, 1e-10).unwrap().rank, 1);
    }

    #[test]
    fn generic_three_qubit_space() {
        let f = TensorFormat::ordinary(&[2, 2, 2]).unwrap();
        let cs = critical_space(&random_tensor(&f, 0, true), 1e-8).unwrap();
        assert_eq!(cs.codim, 3);
        assert_eq!(cs.dim(), 5);
    }

    #[test]
    fn two_by_two_matrix_space() {
        let f = TensorFormat::ordinary(&[2, 2]).unwrap();
        let cs = critical_space(&random_tensor(&f, 4, true), 1e-8).unwrap();
        assert_eq!(cs.dim(), 2);
        for b in cs.basis_tensors() {
            assert!(membership_residual(&cs.f_ref, &b).unwrap() < 1e-10);
        }
    }

    #[test]
    fn f_is_critical_for_itself() {
        let f = TensorFormat::new(vec![3, 1], vec![2, 3]).unwrap();
        for seed in 0..5 {
            let g = random_tensor(&f, seed, false);
            assert!(membership_residual(&g, &g).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn membership_is_scale_invariant() {
        let f = TensorFormat::ordinary(&[2, 3]).unwrap();
        let a = random_tensor(&f, 1, true);
        let g = random_tensor(&f, 2, true);
        let r1 = membership_residual(&a, &g).unwrap();
        let r2 = membership_residual(&a, &g.scale(C64::new(-3.0, 2.0))).unwrap();
        assert!((r1 - r2).abs() <= 1e-13 * r1.max(1e-300));
    }

    #[test]
    fn cokernel_direction_is_not_a_member() {
        let f = TensorFormat::ordinary(&[2, 2, 2]).unwrap();
        let a = random_tensor(&f, 6, true);
        let cs = critical_space(&a, 1e-8).unwrap();
        // orthogonal complement of the kernel: rows of the constraint matrix
        let m = constraint_matrix(&a);
        let row = Tensor::new(f.clone(), m.adjoint().column(0)).unwrap();
        assert!(membership_residual(&a, &row).unwrap() > 1e-4);
        assert_eq!(cs.codim, 3);
    }

    #[test]
    fn zero_inputs_rejected() {
        let f = TensorFormat::ordinary(&[2, 2]).unwrap();
        assert!(matches!(critical_space(&Tensor::zeros(&f), 1e-8), Err(Error::ZeroTensor)));
        let a = random_tensor(&f, 0, true);
        assert!(membership_residual(&a, &Tensor::zeros(&f)).is_err());
    }

    #[test]
    fn span_helpers() {
        let f = TensorFormat::ordinary(&[2, 2]).unwrap();
        let a = random_tensor(&f, 1, true);
        let b = random_tensor(&f, 2, true);
        let sum = a.add(&b.scale(C64::new(2.0, 0.0))).unwrap();
        let r = span_rank(&f, &[a.clone(), b.clone(), sum.clone()], 1e-10).unwrap();
        assert_eq!(r.rank, 2);
        let (res, coeffs) = span_residual(&[a, b], &sum).unwrap();
        assert!(res < 1e-12);
        assert!((coeffs[1] - C64::new(2.0, 0.0)).norm() < 1e-12);
    }
}
