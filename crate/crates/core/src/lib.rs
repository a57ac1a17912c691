//! Shrinkage-regularized (non)linear serial-dependence testing.
//!
//! The crate builds, from a raw `N x T` series, an augmented `p x T` panel of
//! nonlinear transforms (`p = N*K`), estimates its lagged autocovariances,
//! and tests the joint null that all autocovariances at lags `1..=H` vanish.
//! Two statistics are provided: the plain portmanteau form, which requires
//! inverting the `p x p` lag-0 covariance, and a regularized form that
//! replaces that matrix with its linear shrinkage toward a scaled identity,
//! the variant that stays usable as `p` grows comparable to `T`. Both are
//! asymptotically chi-square with `p^2 H` degrees of freedom under the null.
//!
//! A Monte Carlo harness ([`montecarlo`]) reproduces the empirical-size
//! experiments over (T, N) and (T, K) grids with Student-t innovations.

pub mod error;
pub mod linalg;
pub mod moments;
pub mod montecarlo;
pub mod shrinkage;
pub mod testkit;
pub mod transforms;

pub use error::{Error, Result};
pub use linalg::SquareMatrix;
pub use moments::{autocovariance, autocovariance_sequence, LagCovariance, MeanCorrection};
pub use montecarlo::{
    run_size_experiment, sample_student_t_unit_variance, ExperimentGrid, SizeGrid,
};
pub use shrinkage::{lw_scalars, shrink_covariance, ShrinkageCoefficients, ShrunkCovariance};
pub use testkit::{
    chi_square_cdf, chi_square_critical, chi_square_survival, nlsd_statistic, run_test,
    srnlsd_statistic, Shrinkage, TestConfig, TestReport,
};
pub use transforms::{SeriesMatrix, Transform, TransformSpec};
