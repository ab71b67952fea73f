//! Fog-network replication simulator with spatio-temporal prediction.
//!
//! The crate replays GPS trajectories against an evenly spaced grid of fog
//! nodes and measures how well a replication policy keeps a user's data at
//! the node the user is connected to. Policies range from the two naive
//! baselines (keep-on-closest, always-on-all) to T-FOMM: a fused
//! multi-discretization Markov next-node predictor paired with a pluggable
//! stay-duration predictor (mean, percentile, time-discretized statistic or
//! Holt-Winters forecast).
//!
//! Pipeline:
//!
//! ```text
//! PLT files ──► trajectory ──► grid (NodeVisits) ──► sim (ReplicaLedger) ──► metrics
//!                                   ▲                     ▲
//!                                   └── fomm + temporal ──┘
//! ```
//!
//! The runnable programs under `examples/` walk through each stage; the
//! `fogsim` binary exposes the `ingest`, `simulate` and `compare` pipelines.

pub mod calendar;
pub mod error;
pub mod experiment;
pub mod fomm;
pub mod grid;
pub mod hwes;
pub mod metrics;
pub mod sim;
pub mod synth;
pub mod temporal;
pub mod trajectory;

pub use error::{Error, Result};
pub use grid::{GridNetwork, NodeId, NodeVisit};
pub use trajectory::{Session, TrackPoint};

/// Absolute UTC time in whole seconds since the Unix epoch.
pub type Timestamp = i64;
