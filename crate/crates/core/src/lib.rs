//! Edge-level differentially private synthetic graph generation.
//!
//! The crate bundles six synthesizers (DP-dK, TmF, PrivSKG, PrivHRG,
//! PrivGraph, DGG), the graph queries and error metrics used to score them,
//! and a benchmark harness that runs privacy-budget sweeps and aggregates
//! best-count tables.
//!
//! Every synthesizer follows the same three stages: a representation of the
//! input graph is extracted, perturbed under a [`dp::BudgetLedger`], and
//! handed to a non-private constructor from [`construct`].

pub mod community;
pub mod config;
pub mod construct;
pub mod dp;
pub mod error;
pub mod graph;
pub mod harness;
pub mod metrics;
pub mod queries;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{DegreeSequence, Graph};
