//! Skewed probit and skew-normal regression.

pub mod error;
pub mod inference;
pub mod link;
pub mod models;
pub mod pcprior;
pub mod quadrature;
pub mod real;
pub mod roots;
pub mod simstudy;
pub mod sn_core;
pub mod special;

pub use error::{Error, Result};
pub use real::Real;

/// Skew-normal distribution in double precision.
pub type SkewNormal = sn_core::SkewNormalParams<f64>;
/// Standardized skewed probit link in double precision.
pub type Link = link::StandardizedLink<f64>;
/// PC prior for the skewness in double precision.
pub type PcPrior = pcprior::PcSkewPrior<f64>;
/// Single-precision variants.
pub type SkewNormal32 = sn_core::SkewNormalParams<f32>;
pub type Link32 = link::StandardizedLink<f32>;
pub type PcPrior32 = pcprior::PcSkewPrior<f32>;
