//! Small dense kernels and the sparse direct solver used by the mixed
//! assembly.

pub mod dense;
pub mod ordering;
pub mod sparse;

pub use dense::{solve_dense, sym2_eigenvalues, DenseLu};
pub use sparse::{CscMatrix, SparseLu, TripletMatrix};
