//! Sampled-leader minimum-energy following for heterogeneous LTI multi-agent
//! systems on directed acyclic interaction graphs.
//!
//! A group of LTI followers tracks an exogenous leader signal of which only
//! samples at scheduled instants are available, and only to a subset of the
//! followers. Between samples every follower applies a minimum-energy steering
//! law built from its controllability Gramian; followers without leader access
//! reconstruct their steering target from packets sent by the agents ahead of
//! them in the graph. The crate provides the linear-algebra substrate, the
//! Gramian machinery, graph/formation handling, the control laws, an
//! epoch-by-epoch closed-loop simulator, an arrival-time designer for bounded
//! inputs, and a scenario configuration layer used by the `lfsim` binary.

pub mod agents;
pub mod arrivals;
pub mod config;
pub mod controller;
pub mod error;
pub mod gramian;
pub mod matrix;
pub mod report;
pub mod simulator;
pub mod topology;

pub use error::{Error, Result};
pub use matrix::{Matrix, NumericPolicy};
