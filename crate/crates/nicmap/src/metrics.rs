//! Report metrics computed from raw simulation results, and their CSV/JSON
//! renderings.
//!
//! Three numbers summarize a run:
//!
//! * **total waiting** — queueing time summed over every hop of every
//!   message (service start minus arrival). The scope flag narrows this to
//!   NIC and memory hops, which excludes cache traffic.
//! * **workload finish** — when the last process of any job finished.
//! * **total job finish** — per-job finish times summed, weighting a
//!   workload by how long each of its jobs lingered.
//!
//! All three are integer nanoseconds; CSV output renders them in
//! milliseconds/seconds with exact decimal expansion (no floating point).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::simengine::{HopKind, RawResults};
use crate::units::Nanos;

/// Which hops count toward total waiting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaitingScope {
    /// Every hop.
    #[default]
    All,
    /// NIC and memory hops only.
    NicAndMemory,
}

impl WaitingScope {
    fn includes(self, kind: HopKind) -> bool {
        match self {
            WaitingScope::All => true,
            WaitingScope::NicAndMemory => matches!(
                kind,
                HopKind::NicEgress | HopKind::NicIngress | HopKind::Memory
            ),
        }
    }
}

/// The metrics of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Queueing time summed over all in-scope hops, nanoseconds.
    pub total_waiting_ns: Nanos,
    /// Completion time of the last process, nanoseconds.
    pub workload_finish_ns: Nanos,
    /// Sum of per-job finish times, nanoseconds.
    pub total_job_finish_ns: Nanos,
    /// Finish time per job id.
    #[serde(with = "job_keys")]
    pub per_job_finish_ns: BTreeMap<u32, Nanos>,
    /// Busy fraction per channel instance (key is the channel's display
    /// name, e.g. `nic_egress:3`), in `[0, 1]`.
    pub utilization: BTreeMap<String, f64>,
}

/// JSON object keys are strings; render job ids as decimal strings and
/// parse them back.
mod job_keys {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::units::Nanos;

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<u32, Nanos>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        ser.collect_map(map.iter().map(|(k, v)| (k.to_string(), v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<u32, Nanos>, D::Error> {
        let raw = BTreeMap::<String, Nanos>::deserialize(de)?;
        raw.into_iter()
            .map(|(k, v)| {
                k.parse::<u32>()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("job id {k:?} is not an integer")))
            })
            .collect()
    }
}

/// Reduces raw results to a [`MetricsReport`].
pub fn aggregate(results: &RawResults, scope: WaitingScope) -> MetricsReport {
    let total_waiting_ns = results
        .messages
        .iter()
        .flat_map(|m| m.hops.iter())
        .filter(|h| scope.includes(h.kind))
        .map(|h| h.wait())
        .sum();

    let mut per_job_finish_ns: BTreeMap<u32, Nanos> = BTreeMap::new();
    for (&(job, _), &done) in &results.completions {
        let entry = per_job_finish_ns.entry(job).or_insert(0);
        *entry = (*entry).max(done);
    }
    let workload_finish_ns = per_job_finish_ns.values().copied().max().unwrap_or(0);
    let total_job_finish_ns = per_job_finish_ns.values().sum();

    let utilization = results
        .resources
        .iter()
        .map(|(rid, use_)| {
            let fraction = if results.horizon == 0 {
                0.0
            } else {
                use_.busy as f64 / results.horizon as f64
            };
            (rid.to_string(), fraction)
        })
        .collect();

    MetricsReport {
        total_waiting_ns,
        workload_finish_ns,
        total_job_finish_ns,
        per_job_finish_ns,
        utilization,
    }
}

/// Percentage improvement of `new` over `baseline` (positive when `new` is
/// smaller); `None` when the baseline is zero.
pub fn improvement(new: Nanos, baseline: Nanos) -> Option<f64> {
    if baseline == 0 {
        return None;
    }
    Some(100.0 * (baseline as f64 - new as f64) / baseline as f64)
}

/// One row of a comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub workload: String,
    /// Label for the strategy column; a [`crate::mapping::Strategy`] name for
    /// comparison tables, or any caller-chosen tag for ad-hoc placements.
    pub strategy: String,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

/// Nanoseconds as exact decimal milliseconds (`12.345678`).
pub fn fmt_ms(ns: Nanos) -> String {
    format!("{}.{:06}", ns / 1_000_000, ns % 1_000_000)
}

/// Nanoseconds as exact decimal seconds (`1.234567890`).
pub fn fmt_s(ns: Nanos) -> String {
    format!("{}.{:09}", ns / 1_000_000_000, ns % 1_000_000_000)
}

/// Renders rows as the comparison CSV table.
pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("workload,strategy,total_waiting_ms,workload_finish_s,total_job_finish_s\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.workload,
            row.strategy,
            fmt_ms(row.metrics.total_waiting_ns),
            fmt_s(row.metrics.workload_finish_ns),
            fmt_s(row.metrics.total_job_finish_ns),
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Renders rows as pretty-printed JSON (field order and map order are
/// deterministic).
pub fn to_json(rows: &[ReportRow]) -> String {
    serde_json::to_string_pretty(rows).expect("reports serialize")
}
