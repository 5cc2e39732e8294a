//! Elliptic logistic problems on a domain split by a permeable membrane.
//!
//! The domain is reduced to one coordinate (two adjacent intervals or a ball
//! inside a concentric ball) and discretized with piecewise-linear elements.
//! The interface carries two unknowns, one per side, coupled through a flux
//! proportional to the jump.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod asymptotics;
pub mod checks;
pub mod cli;
pub mod eigen;
pub mod expr;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod logistic;
pub mod scalar;

pub use scalar::Real;

pub type Geometry = geometry::Geometry<f64>;
pub type CoefField = fields::CoefField<f64>;
pub type PairField = fields::PairField<f64>;
pub type RobinSpec = fields::RobinSpec<f64>;
pub type OperatorPair = assembly::OperatorPair<f64>;
pub type EigenPair = eigen::EigenPair<f64>;
pub type MembraneLogistic = logistic::MembraneLogistic<f64>;
pub type ScalarLogistic = logistic::ScalarLogistic<f64>;
pub type LogisticOptions = logistic::LogisticOptions<f64>;
pub type SweepTable = asymptotics::SweepTable<f64>;
pub type HCurve = asymptotics::HCurve<f64>;
