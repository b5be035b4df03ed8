//! The guide from `book/` as compiled documentation.
//!
//! Each module below is one chapter, included verbatim, so `cargo test`
//! runs every fenced Rust sample in the book against the current library.
//! If a chapter drifts from the API, the build of this crate is what
//! catches it.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/topology.md")]
pub mod topology {}

#[doc = include_str!("../../../book/src/workloads.md")]
pub mod workloads {}

#[doc = include_str!("../../../book/src/mapping.md")]
pub mod mapping {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
