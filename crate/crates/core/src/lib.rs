//! Budget-constrained redundancy, diversity and hardening design for
//! industrial IoT systems.
//!
//! A [`model::Instance`] holds the component graph and the implementation
//! catalog. A [`model::Design`] deploys types on components and picks a
//! hardening level per type. Zero-day vulnerabilities strike types;
//! [`propagation`] spreads the compromise through the graph, an
//! [`impact::ImpactEvaluator`] scores it, and [`risk`] takes the expectation.
//! [`optimizer`] searches for the design with the lowest risk under a budget.

pub mod error;
pub mod experiments;
pub mod generator;
pub mod impact;
pub mod model;
pub mod optimizer;
pub mod plan;
pub mod propagation;
pub mod risk;
pub mod setcover;
pub mod water;

pub use error::{Error, Result};
