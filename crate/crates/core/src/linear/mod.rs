//! Linear generalization: dense kernels, SVD features, LinTS-Cascade and the
//! linear baselines.

pub mod baselines;
pub mod features;
pub mod gram;
pub mod lints;
pub mod matrix;
pub mod svd;

pub use baselines::{CascadeLinTs, CascadeLinUcb};
pub use features::{generate_features, FeatureFile, FeatureMatrix, LinearInstance};
pub use gram::GramState;
pub use lints::{exploration_scale, LinTsCascade};
pub use matrix::Matrix;
pub use svd::{truncated_svd, SvdResult};
