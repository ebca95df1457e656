//! Full-likelihood inference for parametric multivariate max-stable
//! distributions on the unit-Fréchet scale.
//!
//! The density of a simple max-stable vector is a sum over set partitions
//! of products of block derivatives of the exponent function; see
//! [`likelihood::log_density`]. Models live in [`models`], fitting in
//! [`mle`], exact simulation in [`simulate`].

pub mod error;
pub mod likelihood;
pub mod mle;
pub mod models;
pub mod numerics;
pub mod params;
pub mod partitions;
pub mod regularity;
pub mod simulate;
pub mod study;

pub use error::{Error, Result};
pub use params::{
    from_unconstrained, to_unconstrained, validate_params, Dataset, ModelId, Observation,
    ParamVector, Parameterization, Payload, RawParams,
};
pub use partitions::SubsetIndicator;
