//! Differentially private tabular synthesis with pluggable domain
//! extraction, discretization and marginal-based generators, plus a
//! shadow-model membership-inference harness.

pub mod chart;
pub mod discretize;
pub mod domain;
pub mod dp;
pub mod error;
pub mod experiment;
pub mod marginal;
pub mod mia;
pub mod mst;
pub mod pipeline;
pub mod privbayes;
pub mod table;

pub use error::{Error, Result};
