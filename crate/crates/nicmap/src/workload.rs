//! Workload descriptions and the demand statistics mapping strategies need.
//!
//! A workload is a list of jobs. Each job either follows a built-in
//! communication pattern (all-to-all, broadcast/scatter, gather/reduce,
//! linear chain) or carries an explicit per-edge matrix. Both forms reduce to
//! a [`CommMatrix`]: for every ordered process pair that communicates, the
//! message length, send rate, and total message count.
//!
//! From the matrix the mapping strategies read three derived quantities:
//!
//! * *adjacency* — how many distinct peers each process talks to (in either
//!   direction), summarized by [`AdjacencyStats`];
//! * *communication demand* — per process, the outgoing bytes-per-second
//!   `sum(length * rate)` over its edges ([`CommMatrix::comm_demand`]);
//! * *pairwise demand* — the same product summed over both directions of a
//!   single pair, used to order a process's neighbors by traffic volume.

use std::collections::BTreeMap;
use std::path::Path;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::units::{KIB, MIB, NS_PER_SEC};
use crate::{Error, Result};

/// Index of a process within its job, `0..processes`.
pub type ProcId = u32;

/// Built-in communication patterns, plus `Explicit` for jobs that list their
/// edges directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// Every ordered pair of processes exchanges messages.
    AllToAll,
    /// Process 0 sends to everyone else.
    BcastScatter,
    /// Everyone else sends to process 0.
    GatherReduce,
    /// Process `i` sends to `i + 1`.
    Linear,
    /// Edges come from the job's `matrix` field.
    Explicit,
}

/// One directed edge of an explicit communication matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub src: ProcId,
    pub dst: ProcId,
    pub length_bytes: u64,
    pub rate_per_sec: f64,
    pub count: u64,
}

/// One job of a workload.
///
/// Pattern jobs give `length_bytes`, `rate_per_sec`, and `message_count`
/// (messages per sending process); explicit jobs give `matrix` instead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub id: u32,
    pub processes: u32,
    pub pattern: Pattern,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_bytes: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_per_sec: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<EdgeSpec>>,
}

/// Message length classes; jobs are mapped large before medium before small.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SizeClass {
    Large,
    Medium,
    Small,
}

impl SizeClass {
    /// Class of a job whose longest message is `max_length` bytes: 1 MiB and
    /// up is large, under 2 KiB is small, the rest is medium.
    pub fn classify(max_length: u64) -> SizeClass {
        if max_length >= MIB {
            SizeClass::Large
        } else if max_length < 2 * KIB {
            SizeClass::Small
        } else {
            SizeClass::Medium
        }
    }
}

/// Traffic parameters of one directed edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLoad {
    pub length: u64,
    /// Messages per second.
    pub rate: f64,
    /// Total messages sent over this edge during the run.
    pub count: u64,
}

/// Neighbor counts over the undirected communication graph.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyStats {
    /// Distinct peers of each process, either direction counting.
    pub per_process: Vec<u32>,
    pub max: u32,
    /// Exact mean of `per_process`.
    pub avg: Ratio<u64>,
}

/// Fully expanded communication matrix of one job: every ordered pair that
/// exchanges messages, with its traffic parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CommMatrix {
    processes: u32,
    edges: BTreeMap<(ProcId, ProcId), EdgeLoad>,
    neighbors: Vec<Vec<ProcId>>,
}

impl CommMatrix {
    fn build(processes: u32, edges: BTreeMap<(ProcId, ProcId), EdgeLoad>) -> Self {
        let mut sets = vec![std::collections::BTreeSet::new(); processes as usize];
        for &(src, dst) in edges.keys() {
            sets[src as usize].insert(dst);
            sets[dst as usize].insert(src);
        }
        let neighbors = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        CommMatrix {
            processes,
            edges,
            neighbors,
        }
    }

    pub fn processes(&self) -> u32 {
        self.processes
    }

    /// All edges in `(src, dst)` order.
    pub fn edges(&self) -> impl Iterator<Item = (ProcId, ProcId, &EdgeLoad)> {
        self.edges.iter().map(|(&(s, d), load)| (s, d, load))
    }

    /// The edge `src -> dst`, if those processes communicate that way.
    pub fn edge(&self, src: ProcId, dst: ProcId) -> Option<&EdgeLoad> {
        self.edges.get(&(src, dst))
    }

    /// Outgoing edges of `src` in destination order.
    pub fn out_edges(&self, src: ProcId) -> impl Iterator<Item = (ProcId, &EdgeLoad)> {
        self.edges
            .range((src, 0)..(src, ProcId::MAX))
            .map(|(&(_, d), load)| (d, load))
    }

    /// Peers of `p` in the undirected graph, ascending.
    pub fn neighbors(&self, p: ProcId) -> &[ProcId] {
        &self.neighbors[p as usize]
    }

    /// Longest message any edge carries.
    pub fn max_length(&self) -> u64 {
        self.edges.values().map(|e| e.length).max().unwrap_or(0)
    }

    /// Per-process communication demand: outgoing `length * rate` summed over
    /// the process's edges, in bytes per second. Processes that never send
    /// (for instance the root of a gather) have demand 0.
    pub fn comm_demand(&self) -> Vec<f64> {
        let mut demand = vec![0.0; self.processes as usize];
        for (&(src, _), load) in &self.edges {
            demand[src as usize] += load.length as f64 * load.rate;
        }
        demand
    }

    /// Combined traffic of the pair `(a, b)`: `length * rate` in both
    /// directions, zero for edges that do not exist.
    pub fn pairwise_demand(&self, a: ProcId, b: ProcId) -> f64 {
        let one = |s, d| {
            self.edges
                .get(&(s, d))
                .map_or(0.0, |e| e.length as f64 * e.rate)
        };
        one(a, b) + one(b, a)
    }

    /// Neighbor counts and their mean/max over the undirected graph.
    pub fn adjacency_stats(&self) -> AdjacencyStats {
        let per_process: Vec<u32> = self.neighbors.iter().map(|n| n.len() as u32).collect();
        let max = per_process.iter().copied().max().unwrap_or(0);
        let sum: u64 = per_process.iter().map(|&a| a as u64).sum();
        AdjacencyStats {
            per_process,
            max,
            avg: Ratio::new(sum, self.processes.max(1) as u64),
        }
    }
}

impl JobSpec {
    /// The job's communication matrix: pattern jobs are expanded, explicit
    /// jobs collect their `matrix` entries. Call [`Workload::validate`]
    /// first; this assumes a well-formed job.
    pub fn comm_matrix(&self) -> Result<CommMatrix> {
        if self.pattern == Pattern::Explicit {
            let mut edges = BTreeMap::new();
            for e in self.matrix.as_deref().unwrap_or(&[]) {
                edges.insert(
                    (e.src, e.dst),
                    EdgeLoad {
                        length: e.length_bytes,
                        rate: e.rate_per_sec,
                        count: e.count,
                    },
                );
            }
            return Ok(CommMatrix::build(self.processes, edges));
        }
        expand_pattern(self)
    }

    /// Longest message the job sends.
    pub fn max_message_length(&self) -> u64 {
        match self.pattern {
            Pattern::Explicit => self
                .matrix
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|e| e.length_bytes)
                .max()
                .unwrap_or(0),
            _ => self.length_bytes.unwrap_or(0),
        }
    }

    pub fn size_class(&self) -> SizeClass {
        SizeClass::classify(self.max_message_length())
    }

    /// Shortest send period of any edge, in nanoseconds (the inverse of the
    /// fastest rate). Used to stagger job start offsets.
    pub fn min_period_ns(&self) -> u64 {
        let max_rate = match self.pattern {
            Pattern::Explicit => self
                .matrix
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|e| e.rate_per_sec)
                .fold(0.0f64, f64::max),
            _ => self.rate_per_sec.unwrap_or(0.0),
        };
        if max_rate <= 0.0 {
            return 0;
        }
        (NS_PER_SEC as f64 / max_rate).round() as u64
    }
}

/// Expands a pattern job into its communication matrix.
///
/// Every generated edge carries the job's length and rate. Message counts
/// per sender are split over that sender's destinations round-robin in
/// ascending destination order, with each sender starting its rotation at
/// destination rank `src mod d` (the same offset the simulator's send
/// timetable uses, so simultaneous senders fan out instead of converging
/// on one receiver). For `message_count = m` over `d` destinations the
/// `m % d` ranks first visited get `m / d + 1` messages and the rest get
/// `m / d`.
///
/// Explicit jobs have nothing to expand and yield
/// [`Error::PatternUndefined`].
pub fn expand_pattern(job: &JobSpec) -> Result<CommMatrix> {
    if job.pattern == Pattern::Explicit {
        return Err(Error::PatternUndefined { job: job.id });
    }
    let length = job.length_bytes.unwrap_or(0);
    let rate = job.rate_per_sec.unwrap_or(0.0);
    let count = job.message_count.unwrap_or(0);
    let p = job.processes;

    let mut edges = BTreeMap::new();
    let mut add_fanout = |src: ProcId, dsts: &[ProcId]| {
        let d = dsts.len() as u64;
        for (rank, &dst) in dsts.iter().enumerate() {
            // Rotation position of this rank in the sender's cycle.
            let turn = (rank as u64 + d - src as u64 % d) % d;
            let extra = (turn < count % d) as u64;
            edges.insert(
                (src, dst),
                EdgeLoad {
                    length,
                    rate,
                    count: count / d + extra,
                },
            );
        }
    };

    match job.pattern {
        Pattern::AllToAll => {
            for src in 0..p {
                let dsts: Vec<ProcId> = (0..p).filter(|&d| d != src).collect();
                add_fanout(src, &dsts);
            }
        }
        Pattern::BcastScatter => {
            let dsts: Vec<ProcId> = (1..p).collect();
            add_fanout(0, &dsts);
        }
        Pattern::GatherReduce => {
            for src in 1..p {
                add_fanout(src, &[0]);
            }
        }
        Pattern::Linear => {
            for src in 0..p.saturating_sub(1) {
                add_fanout(src, &[src + 1]);
            }
        }
        Pattern::Explicit => unreachable!(),
    }
    Ok(CommMatrix::build(p, edges))
}

/// A named list of jobs; the unit the mapper and simulator operate on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Workload {
    pub jobs: Vec<JobSpec>,
}

impl Workload {
    /// Parses and validates a workload from JSON text; `origin` labels schema
    /// errors (a file path or similar).
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let workload: Workload = serde_json::from_str(text)
            .map_err(|e| Error::schema(origin.to_string(), e.to_string()))?;
        workload.validate()?;
        Ok(workload)
    }

    /// Loads a workload from a JSON file.
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Serializes the workload back to pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("workload serializes")
    }

    pub fn total_processes(&self) -> u32 {
        self.jobs.iter().map(|j| j.processes).sum()
    }

    /// Checks the semantic rules the schema cannot express: unique job ids,
    /// pattern jobs carry length/rate/count and no matrix, explicit jobs
    /// carry a well-formed matrix and no pattern parameters.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for (idx, job) in self.jobs.iter().enumerate() {
            let at = |field: &str| format!("jobs[{idx}].{field}");
            if !seen.insert(job.id) {
                return Err(Error::schema(at("id"), format!("duplicate job id {}", job.id)));
            }
            if job.processes == 0 {
                return Err(Error::schema(at("processes"), "must be positive"));
            }
            if job.pattern == Pattern::Explicit {
                for (field, absent) in [
                    ("length_bytes", job.length_bytes.is_none()),
                    ("rate_per_sec", job.rate_per_sec.is_none()),
                    ("message_count", job.message_count.is_none()),
                ] {
                    if !absent {
                        return Err(Error::schema(
                            at(field),
                            "not allowed for explicit jobs; set it per matrix entry",
                        ));
                    }
                }
                let matrix = job
                    .matrix
                    .as_deref()
                    .filter(|m| !m.is_empty())
                    .ok_or_else(|| {
                        Error::schema(at("matrix"), "explicit jobs need a non-empty matrix")
                    })?;
                let mut pairs = std::collections::BTreeSet::new();
                for (e_idx, e) in matrix.iter().enumerate() {
                    let eat = |field: &str| format!("jobs[{idx}].matrix[{e_idx}].{field}");
                    if e.src >= job.processes || e.dst >= job.processes {
                        return Err(Error::schema(
                            eat("src"),
                            format!("process out of range 0..{}", job.processes),
                        ));
                    }
                    if e.src == e.dst {
                        return Err(Error::schema(eat("dst"), "self-edges are not allowed"));
                    }
                    if !pairs.insert((e.src, e.dst)) {
                        return Err(Error::schema(
                            eat("src"),
                            format!("duplicate edge {} -> {}", e.src, e.dst),
                        ));
                    }
                    if e.length_bytes == 0 {
                        return Err(Error::schema(eat("length_bytes"), "must be positive"));
                    }
                    if !(e.rate_per_sec.is_finite() && e.rate_per_sec > 0.0) {
                        return Err(Error::schema(eat("rate_per_sec"), "must be positive"));
                    }
                    if e.count == 0 {
                        return Err(Error::schema(eat("count"), "must be positive"));
                    }
                }
            } else {
                if job.matrix.is_some() {
                    return Err(Error::schema(
                        at("matrix"),
                        "only allowed for explicit jobs",
                    ));
                }
                if job.processes < 2 {
                    return Err(Error::schema(
                        at("processes"),
                        "pattern jobs need at least 2 processes",
                    ));
                }
                match job.length_bytes {
                    Some(l) if l > 0 => {}
                    Some(_) => return Err(Error::schema(at("length_bytes"), "must be positive")),
                    None => return Err(Error::schema(at("length_bytes"), "missing")),
                }
                match job.rate_per_sec {
                    Some(r) if r.is_finite() && r > 0.0 => {}
                    Some(_) => return Err(Error::schema(at("rate_per_sec"), "must be positive")),
                    None => return Err(Error::schema(at("rate_per_sec"), "missing")),
                }
                match job.message_count {
                    Some(c) if c > 0 => {}
                    Some(_) => return Err(Error::schema(at("message_count"), "must be positive")),
                    None => return Err(Error::schema(at("message_count"), "missing")),
                }
            }
        }
        Ok(())
    }
}

/// The four synthetic workloads bundled with the crate, by name
/// (`synt_workload_1` .. `synt_workload_4`).
pub fn bundled(name: &str) -> Option<&'static str> {
    match name {
        "synt_workload_1" => Some(include_str!("../data/synt_workload_1.json")),
        "synt_workload_2" => Some(include_str!("../data/synt_workload_2.json")),
        "synt_workload_3" => Some(include_str!("../data/synt_workload_3.json")),
        "synt_workload_4" => Some(include_str!("../data/synt_workload_4.json")),
        _ => None,
    }
}

/// Names of all bundled workloads, in order.
pub const BUNDLED_NAMES: [&str; 4] = [
    "synt_workload_1",
    "synt_workload_2",
    "synt_workload_3",
    "synt_workload_4",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern_job(pattern: Pattern, processes: u32) -> JobSpec {
        JobSpec {
            id: 0,
            processes,
            pattern,
            length_bytes: Some(64 * KIB),
            rate_per_sec: Some(100.0),
            message_count: Some(2000),
            matrix: None,
        }
    }

    #[test]
    fn all_to_all_has_every_ordered_pair() {
        let m = pattern_job(Pattern::AllToAll, 4).comm_matrix().unwrap();
        assert_eq!(m.edges().count(), 12);
        assert!(m.edges().all(|(s, d, _)| s != d));
        let stats = m.adjacency_stats();
        assert_eq!(stats.per_process, vec![3, 3, 3, 3]);
        assert_eq!(stats.max, 3);
        assert_eq!(stats.avg, Ratio::from_integer(3));
    }

    #[test]
    fn bcast_and_gather_are_star_shaped() {
        let b = pattern_job(Pattern::BcastScatter, 8).comm_matrix().unwrap();
        assert_eq!(b.edges().count(), 7);
        assert!(b.edges().all(|(s, _, _)| s == 0));

        let g = pattern_job(Pattern::GatherReduce, 8).comm_matrix().unwrap();
        assert_eq!(g.edges().count(), 7);
        assert!(g.edges().all(|(_, d, _)| d == 0));

        // Same undirected graph either way: the root sees everyone, the
        // leaves see only the root. Average degree 2*(P-1)/P.
        for m in [&b, &g] {
            let stats = m.adjacency_stats();
            assert_eq!(stats.max, 7);
            assert_eq!(stats.per_process[3], 1);
            assert_eq!(stats.avg, Ratio::new(14, 8));
        }
    }

    #[test]
    fn linear_chain_adjacency() {
        let m = pattern_job(Pattern::Linear, 16).comm_matrix().unwrap();
        assert_eq!(m.edges().count(), 15);
        let stats = m.adjacency_stats();
        assert_eq!(stats.per_process[0], 1);
        assert_eq!(stats.per_process[8], 2);
        assert_eq!(stats.per_process[15], 1);
        // 2*15 neighbor slots over 16 processes.
        assert_eq!(stats.avg, Ratio::new(30, 16));
        assert_eq!(stats.max, 2);
    }

    #[test]
    fn message_counts_split_round_robin_over_destinations() {
        // 2000 messages over 63 destinations: 2000 = 63*31 + 47, so the 47
        // destinations first visited get 32 and the rest get 31. Process 5
        // starts its rotation at rank 5, so ranks 5..52 carry the extras.
        let m = pattern_job(Pattern::AllToAll, 64).comm_matrix().unwrap();
        let counts: Vec<u64> = m.out_edges(5).map(|(_, e)| e.count).collect();
        assert_eq!(counts.len(), 63);
        assert_eq!(counts.iter().sum::<u64>(), 2000);
        assert!(counts[..5].iter().all(|&c| c == 31));
        assert!(counts[5..52].iter().all(|&c| c == 32));
        assert!(counts[52..].iter().all(|&c| c == 31));

        // Single destination keeps the full count.
        let g = pattern_job(Pattern::GatherReduce, 8).comm_matrix().unwrap();
        assert!(g.edges().all(|(_, _, e)| e.count == 2000));
    }

    #[test]
    fn comm_demand_sums_outgoing_length_times_rate() {
        let m = pattern_job(Pattern::AllToAll, 64).comm_matrix().unwrap();
        let demand = m.comm_demand();
        // 63 peers * 64 KiB * 100/s
        assert_eq!(demand[0], 63.0 * 65536.0 * 100.0);
        assert_eq!(demand[0], 412_876_800.0);

        let g = pattern_job(Pattern::GatherReduce, 8).comm_matrix().unwrap();
        let demand = g.comm_demand();
        assert_eq!(demand[0], 0.0); // the root only receives
        assert_eq!(demand[1], 6_553_600.0);
    }

    #[test]
    fn pairwise_demand_sums_both_directions() {
        let m = pattern_job(Pattern::AllToAll, 4).comm_matrix().unwrap();
        assert_eq!(m.pairwise_demand(1, 2), 2.0 * 65536.0 * 100.0);

        let l = pattern_job(Pattern::Linear, 4).comm_matrix().unwrap();
        assert_eq!(l.pairwise_demand(0, 1), 6_553_600.0);
        assert_eq!(l.pairwise_demand(1, 0), 6_553_600.0);
        assert_eq!(l.pairwise_demand(0, 2), 0.0);
    }

    #[test]
    fn size_class_boundaries() {
        assert_eq!(SizeClass::classify(MIB), SizeClass::Large);
        assert_eq!(SizeClass::classify(2 * MIB), SizeClass::Large);
        assert_eq!(SizeClass::classify(MIB - 1), SizeClass::Medium);
        assert_eq!(SizeClass::classify(2 * KIB), SizeClass::Medium);
        assert_eq!(SizeClass::classify(2 * KIB - 1), SizeClass::Small);
        assert_eq!(SizeClass::classify(1), SizeClass::Small);
    }

    #[test]
    fn explicit_jobs_collect_their_matrix() {
        let job = JobSpec {
            id: 3,
            processes: 3,
            pattern: Pattern::Explicit,
            length_bytes: None,
            rate_per_sec: None,
            message_count: None,
            matrix: Some(vec![
                EdgeSpec {
                    src: 0,
                    dst: 2,
                    length_bytes: MIB,
                    rate_per_sec: 10.0,
                    count: 5,
                },
                EdgeSpec {
                    src: 2,
                    dst: 1,
                    length_bytes: KIB,
                    rate_per_sec: 1000.0,
                    count: 50,
                },
            ]),
        };
        let m = job.comm_matrix().unwrap();
        assert_eq!(m.edges().count(), 2);
        assert_eq!(m.max_length(), MIB);
        assert_eq!(job.size_class(), SizeClass::Large);
        assert_eq!(m.neighbors(2), &[0, 1]);
        assert!(matches!(
            expand_pattern(&job),
            Err(Error::PatternUndefined { job: 3 })
        ));
    }

    #[test]
    fn min_period_follows_fastest_rate() {
        assert_eq!(pattern_job(Pattern::Linear, 4).min_period_ns(), 10_000_000);
        let mut job = pattern_job(Pattern::AllToAll, 4);
        job.rate_per_sec = Some(10.0);
        assert_eq!(job.min_period_ns(), 100_000_000);
    }

    #[test]
    fn workload_round_trips_through_json() {
        let w = Workload {
            jobs: vec![
                pattern_job(Pattern::AllToAll, 64),
                JobSpec {
                    id: 1,
                    ..pattern_job(Pattern::Linear, 16)
                },
            ],
        };
        let text = w.to_json();
        let back = Workload::from_json(&text, "round-trip").unwrap();
        assert_eq!(w, back);
        // Optional fields stay out of the patterned-job JSON.
        assert!(!text.contains("matrix"));
    }

    #[test]
    fn validation_pinpoints_offending_fields() {
        let cases = [
            (
                r#"{"jobs":[{"id":0,"processes":4,"pattern":"all_to_all",
                    "rate_per_sec":100.0,"message_count":10}]}"#,
                "jobs[0].length_bytes",
            ),
            (
                r#"{"jobs":[{"id":0,"processes":4,"pattern":"explicit"}]}"#,
                "jobs[0].matrix",
            ),
            (
                r#"{"jobs":[{"id":0,"processes":4,"pattern":"explicit",
                    "matrix":[{"src":0,"dst":9,"length_bytes":8,"rate_per_sec":1.0,"count":1}]}]}"#,
                "jobs[0].matrix[0].src",
            ),
            (
                r#"{"jobs":[{"id":0,"processes":4,"pattern":"linear","length_bytes":8,
                    "rate_per_sec":100.0,"message_count":10},
                   {"id":0,"processes":4,"pattern":"linear","length_bytes":8,
                    "rate_per_sec":100.0,"message_count":10}]}"#,
                "jobs[1].id",
            ),
        ];
        for (text, want_path) in cases {
            match Workload::from_json(text, "inline") {
                Err(Error::SchemaError { path, .. }) => assert_eq!(path, want_path),
                other => panic!("expected schema error at {want_path}, got {other:?}"),
            }
        }
    }

    #[test]
    fn malformed_json_reports_origin() {
        match Workload::from_json("{\"jobs\": [", "bad.json") {
            Err(Error::SchemaError { path, .. }) => assert_eq!(path, "bad.json"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn bundled_workloads_parse_and_match_their_tables() {
        for name in BUNDLED_NAMES {
            let w = Workload::from_json(bundled(name).unwrap(), name).unwrap();
            w.validate().unwrap();
        }
        assert!(bundled("synt_workload_9").is_none());

        let w1 = Workload::from_json(bundled("synt_workload_1").unwrap(), "w1").unwrap();
        assert_eq!(w1.jobs.len(), 4);
        assert!(w1.jobs.iter().all(|j| j.processes == 64));
        assert!(w1.jobs.iter().all(|j| j.length_bytes == Some(64 * KIB)));
        assert!(w1.jobs.iter().all(|j| j.rate_per_sec == Some(100.0)));
        assert!(w1.jobs.iter().all(|j| j.message_count == Some(2000)));
        assert_eq!(
            w1.jobs.iter().map(|j| j.pattern).collect::<Vec<_>>(),
            vec![
                Pattern::AllToAll,
                Pattern::BcastScatter,
                Pattern::GatherReduce,
                Pattern::Linear
            ]
        );

        let w2 = Workload::from_json(bundled("synt_workload_2").unwrap(), "w2").unwrap();
        assert!(w2.jobs.iter().all(|j| j.length_bytes == Some(2 * MIB)));
        assert!(w2.jobs.iter().all(|j| j.rate_per_sec == Some(10.0)));

        for (name, procs) in [("synt_workload_3", 32), ("synt_workload_4", 24)] {
            let w = Workload::from_json(bundled(name).unwrap(), name).unwrap();
            assert_eq!(w.jobs.len(), 8);
            assert!(w.jobs.iter().all(|j| j.processes == procs));
            assert!(w.jobs[..4].iter().all(|j| j.length_bytes == Some(2 * MIB)));
            assert!(w.jobs[4..].iter().all(|j| j.length_bytes == Some(64 * KIB)));
            assert!(w.jobs.iter().all(|j| j.rate_per_sec == Some(10.0)));
            let patterns: Vec<Pattern> = w.jobs.iter().map(|j| j.pattern).collect();
            assert_eq!(&patterns[..4], &patterns[4..]);
        }
    }
}
