//! MlS-LCS: a supervised Michigan-style learning classifier system for
//! multi-label rule induction. Rules carry generalized ternary consequents
//! and evolve under a steady-state niched genetic algorithm; predictions come
//! from fitness-weighted voting with calibrated thresholds or from best-rule
//! selection.

pub mod data;
pub mod error;
pub mod experiments;
pub mod inference;
pub mod metrics;
pub mod representation;
pub mod rng;
pub mod textio;
pub mod training;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    AttributeKind, AttributeSchema, Classifier, Dataset, HyperParams, Instance, Population,
    Rule,
};
