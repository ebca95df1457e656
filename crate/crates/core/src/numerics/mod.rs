//! Numeric kernels shared by the models and the inference code.

pub mod diff;
pub mod linalg;
pub mod mvn;
pub mod normal;
pub mod quadrature;
pub mod rng;
pub mod stable;

pub use diff::finite_diff_gradient;
pub use linalg::check_cnd;
pub use mvn::{mvn_cdf, CdfResult};
pub use quadrature::{integrate_1d, integrate_box};
pub use rng::RngStream;
pub use stable::sample_positive_stable;
