//! Finite-length analysis of spatially coupled LDPC codes on the binary
//! erasure channel.
//!
//! The crate is organised bottom-up:
//!
//! - [`ensemble`] builds coupled base matrices, their node/edge type tables
//!   and finite Tanner graphs (protograph liftings and the random `(l,r,L)_u`
//!   construction).
//! - [`channel`] erases bits and extracts the residual graph.
//! - [`decoders`] runs the sequential and parallel peeling decoders and
//!   flooding belief propagation with per-iteration traces.
//! - [`graph_evolution`] and [`density_evolution`] are the two analytical
//!   routes to the expected decoding trajectory.
//! - [`mc_stats`] aggregates Monte Carlo trials and fits the critical phase.
//! - [`scaling`] holds the Ornstein–Uhlenbeck first-passage model and the
//!   block-error scaling law.

pub mod analytic;
pub mod channel;
pub mod decoders;
pub mod density_evolution;
pub mod ensemble;
mod error;
pub mod graph_evolution;
pub mod mc_stats;
pub mod plateau;
pub mod scaling;
pub mod seed;

pub use error::{Error, Result};

/// Crate version, embedded in every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
