//! Discrete-time consensus on expander graphs under grounding.
//!
//! A node is *grounded* when it keeps influencing its neighbors but stops
//! listening to them (a stubborn agent or a hijacked leader). This crate
//! measures what that does to the Laplacian spectrum, to scalable gain
//! designs and to simulated consensus, and implements the countermeasures:
//! redesign, isolation, and grounding extra nodes chosen by exhaustive search
//! or by cheap layer/Perron heuristics.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`graph`] | simple undirected graphs, d-regular and expander sampling, BFS layers, edge-list IO |
//! | [`spectral`] | normalized and grounded Laplacians, symmetric eigen kernel, bounds and thresholds |
//! | [`control`] | agent dynamics, consensusability, modified Riccati solver, gain design |
//! | [`sim`] | closed-loop simulation with grounding events, steady states, metrics |
//! | [`countermeasure`] | resilience checks, redesign, isolation, node selection and recovery |
//! | [`experiment`] | JSON-configured experiment runner behind the `grounding` binary |
//!
//! Node ids are 1-based throughout the public API.

pub mod control;
pub mod countermeasure;
mod error;
pub mod experiment;
pub mod graph;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::Graph;
