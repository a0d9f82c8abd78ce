//! Shannon and Chernoff information for binary and M-ary symmetric channels,
//! an ACE (alternating conditional expectations) decomposition of those
//! measures over the channel parameters, and a Monte Carlo harness that
//! compares the decompositions.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ace;
pub mod channels;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod measures;
pub mod scalar;
pub mod scalar_opt;
pub mod smoother;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Distribution = channels::DiscreteDistribution<f64>;
pub type Joint = channels::JointDistribution<f64>;
pub type Bsc = channels::BscParams<f64>;
pub type Msc = channels::MscParams<f64>;
pub type Measure = measures::MeasureValue<f64>;
pub type Curve = smoother::TransformationCurve<f64>;
pub type Data = ace::Dataset<f64>;
pub type AceFit = ace::AceResult<f64>;
pub type Curves = ace::CurveSet<f64>;
