//! Statistical and numerical primitives shared by the discovery methods:
//! least squares, hypothesis tests, correlation measures, multiple-testing
//! correction, and sparse regression.

pub mod correlation;
pub mod fdr;
pub mod lasso;
pub mod ols;
pub mod tests;

pub use correlation::{cross_covariance_independence, fisher_z_test, partial_correlation, pearson};
pub use fdr::bh_fdr;
pub use lasso::{adaptive_lasso, SparseFit};
pub use ols::{ols_fit, ols_fit_multi, OlsFit};
pub use tests::{f_test_nested, wald_chi2_block, TestDof, TestResult};
