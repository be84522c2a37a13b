//! Shared numerical kernels: Hermitian factorization and whitening, trace
//! normalization, projection residuals, special functions, root finding, and
//! the DOA objective minimizer.

mod hermitian;
mod roots;
mod search;
pub mod special;

pub use hermitian::{
    hermitian_factor, normalize_trace, projection_residual, HermitianFactor, LsSolver,
};
pub use roots::find_root_monotone;
pub use search::{golden_section_min, minimize_doa_objective, GridSpec};
