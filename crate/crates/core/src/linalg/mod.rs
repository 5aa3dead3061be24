//! Dense complex kernels: matrices, Hermitian eigendecomposition, spectral
//! functions, Kronecker products and partial traces.

mod eigen;
mod matrix;
mod ops;

pub use eigen::{HermitianEigen, HERMITIAN_TOL};
pub(crate) use matrix::check_entries;
pub use matrix::{inner, kron_vec, ComplexMatrix, MAX_ENTRIES};
pub use ops::{
    herm_fn, inv_sqrt_psd, kron, kron_all, partial_trace, spectral_apply, sqrt_psd, support_projector, trace_norm,
    unitary_exp, PINV_TOL,
};
