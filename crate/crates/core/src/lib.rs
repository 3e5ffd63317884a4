//! Critical spaces of partially symmetric tensors.
//!
//! A tensor `f` in `S^{d_1}C^{n_1+1} ⊗ … ⊗ S^{d_p}C^{n_p+1}` is stored by its
//! multihomogeneous polynomial coefficients. The crate computes the critical
//! space `H_f`, the critical rank-one tensors of `f` by homotopy
//! continuation, low-rank critical points by alternating least squares, and
//! the exact counts predicted by Chern class and Bott formula computations.

pub mod counting;
pub mod critical_space;
pub mod error;
pub mod format;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod pairing;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use format::{MonomialIndex, TensorFormat};
pub use linalg::{CMatrix, RankResult, C64};
pub use tensor::{Tensor, VectorTuple};
