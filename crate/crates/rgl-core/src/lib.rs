//! rgl-core: a laboratory for online and offline edge-coloring games on
//! random graph processes.
//!
//! The crate has three layers:
//!
//! * incremental state ([`graph_state`]) and seeded edge generators
//!   ([`edge_sources`]) that drive million-round trials,
//! * the coloring policies ([`strategies`]) and orientation engines
//!   ([`orientation`]) under test,
//! * pure analytical oracles ([`oracles`]), small-instance structural
//!   checkers ([`diagnostics`]), and the experiment harness ([`lab`]) that
//!   cross-validates Monte Carlo measurements against the oracles.
//!
//! Every run is a pure function of its configuration: edge streams and
//! strategy coins come from ChaCha8 streams split by trial index, so results
//! are bit-reproducible across machines and thread counts.

pub mod diagnostics;
pub mod edge_sources;
pub mod graph_state;
pub mod lab;
pub mod oracles;
pub mod orientation;
pub mod strategies;

pub use edge_sources::{EdgeModel, EdgeStream, StreamConfig};
pub use graph_state::{ComponentTracker, MergeReport, ProcessState, TailFit, VertexId};
pub use lab::{ExperimentConfig, ExperimentReport, TraceSample, TrialResult};
pub use orientation::{Direction, Orientation, OrientationOutcome};
pub use strategies::{Decision, RationaleTag, Strategy, StrategyKind, StrategySpec};

use thiserror::Error;

/// Errors shared across the crate. Infeasible orientations, exhausted
/// streams, and ODE blow-ups are values, not errors; this type covers
/// genuine misuse (bad configuration, out-of-range arguments, I/O).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("self-loop ({0}, {0}) rejected")]
    SelfLoop(u32),

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexRange { vertex: u32, n: usize },

    #[error("color {color} out of range for r = {r}")]
    ColorRange { color: u32, r: usize },

    #[error("{0} is not prime")]
    NotPrime(u32),

    #[error("in-degree {found} at vertex {vertex} exceeds the cap {cap}")]
    InDegreeCap { vertex: u32, found: u32, cap: u32 },

    #[error("gamma = {value} outside the admissible interval {interval}")]
    GammaRange { value: f64, interval: &'static str },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("edge log line {line}: {msg}")]
    LogParse { line: usize, msg: String },

    #[error("inconsistent threshold bracket: {0}")]
    InconsistentBracket(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
