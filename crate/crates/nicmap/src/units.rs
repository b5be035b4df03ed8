//! Byte and time units used throughout the crate.
//!
//! All sizes are binary (1 KiB = 1024 bytes) and all simulated time is kept
//! in integer nanoseconds.

pub const KIB: u64 = 1 << 10;
pub const MIB: u64 = 1 << 20;
pub const GIB: u64 = 1 << 30;

pub const NS_PER_SEC: u64 = 1_000_000_000;

/// Simulated time, in nanoseconds since the start of the run.
pub type Nanos = u64;
