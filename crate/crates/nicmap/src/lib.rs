//! Process-to-core mapping strategies and a message-level simulator for
//! multi-socket clusters.
//!
//! The crate is organized as a pipeline:
//!
//! * [`workload`] — job descriptions (communication patterns or explicit
//!   matrices) and the demand statistics derived from them,
//! * [`topology`] — the cluster shape and free-core bookkeeping,
//! * [`mapping`] — four placement strategies (`blocked`, `cyclic`, `drb`,
//!   `new`) producing a [`mapping::Placement`],
//! * [`simengine`] — a discrete-event simulation of every message a placed
//!   workload sends, with FIFO queueing at the NICs,
//! * [`metrics`] — waiting-time and completion metrics plus CSV/JSON output.
//!
//! The `nicmap` binary wires these together; see the book under `book/` for
//! a guided tour.

pub mod mapping;
pub mod metrics;
pub mod simengine;
pub mod topology;
pub mod units;
pub mod workload;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A placement tried to put two processes on the same core.
    #[error("core {0} is already in use")]
    CoreAlreadyUsed(topology::CoreId),

    /// The workload needs more cores than the cluster has free.
    #[error("cluster is full: {needed} cores needed, {free} free")]
    ClusterFull { needed: u32, free: u32 },

    /// A pattern-only operation was applied to an explicit-matrix job.
    #[error("job {job}: operation requires a built-in pattern, not an explicit matrix")]
    PatternUndefined { job: u32 },

    /// Input data violated the schema; `path` points at the offending field.
    #[error("schema error at {path}: {message}")]
    SchemaError { path: String, message: String },

    /// The simulator was handed a placement that misses a process.
    #[error("no core assigned to process {process} of job {job}")]
    UnplacedProcess { job: u32, process: u32 },

    /// File I/O failed.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::SchemaError {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
