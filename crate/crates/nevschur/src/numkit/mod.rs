//! Dense complex-matrix kernel: Hermitian eigendecomposition, defect
//! square roots, pseudoinverse, range embeddings, operator norm, and
//! dense solves. Everything here is a pure function over immutable
//! values and is deterministic down to the output bytes.

mod eigh;
mod matrix;
mod ops;

pub use eigh::{eigh, EigenDecomposition};
pub use matrix::{ComplexMatrix, HermitianMatrix, HERMITIAN_TOL};
pub use ops::{
    cond2, defect, hermitian_function, inverse, min_eig, opnorm, pinv, psd_sqrt, range_embed,
    singular_values, solve, COND_LIMIT, NEG_EIG_CLAMP, RTOL_DEFAULT,
};
