//! Process-to-core mapping strategies.
//!
//! All four strategies turn a [`Workload`] plus a [`ClusterSpec`] into a
//! [`Placement`]; they differ in what they look at:
//!
//! * [`map_blocked`] — fill cores in `(node, socket, core)` order, one job
//!   after another. Dense, keeps jobs on few nodes, ignores traffic.
//! * [`map_cyclic`] — deal each job's processes round-robin over the nodes
//!   that still have room. Spreads every job thin, also traffic-blind.
//! * [`map_drb`] — dual recursive bipartitioning: recursively halve the
//!   job's communication graph along minimum-weight cuts and hand each half
//!   a contiguous block of free cores.
//! * [`map_new`] — the contention-aware strategy. Jobs are mapped large
//!   message class first and, within a class, densest communication graph
//!   first. Each job gets a per-node process cap derived from its adjacency
//!   ([`compute_threshold`]), and its processes are placed by walking the
//!   communication graph from the highest-demand process outward so that
//!   chatty pairs land close together without overloading any one NIC.
//!
//! Strategy names (`blocked`, `cyclic`, `drb`, `new`) parse via
//! [`Strategy::from_str`][std::str::FromStr] and are what the CLI accepts.

pub mod bipartition;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::topology::{ClusterSpec, CoreId, Occupancy};
use crate::workload::{AdjacencyStats, CommMatrix, ProcId, SizeClass, Workload};
use crate::{Error, Result};

use bipartition::ProcGraph;

/// The four mapping strategies, in the order reports list them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Blocked,
    Cyclic,
    Drb,
    New,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Blocked,
        Strategy::Cyclic,
        Strategy::Drb,
        Strategy::New,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Blocked => "blocked",
            Strategy::Cyclic => "cyclic",
            Strategy::Drb => "drb",
            Strategy::New => "new",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "blocked" => Ok(Strategy::Blocked),
            "cyclic" => Ok(Strategy::Cyclic),
            "drb" => Ok(Strategy::Drb),
            "new" => Ok(Strategy::New),
            other => Err(format!(
                "unknown strategy {other:?}; expected blocked, cyclic, drb, or new"
            )),
        }
    }
}

/// Where every process of every job runs.
///
/// Serializes as a JSON array of `{job, process, node, socket, core}` rows
/// sorted by `(job, process)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Placement {
    map: BTreeMap<(u32, ProcId), CoreId>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlacementRow {
    job: u32,
    process: ProcId,
    node: u32,
    socket: u32,
    core: u32,
}

impl Placement {
    pub fn new() -> Self {
        Placement::default()
    }

    pub fn insert(&mut self, job: u32, process: ProcId, core: CoreId) {
        self.map.insert((job, process), core);
    }

    pub fn core_of(&self, job: u32, process: ProcId) -> Option<CoreId> {
        self.map.get(&(job, process)).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Assignments in `(job, process)` order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, ProcId, CoreId)> + '_ {
        self.map.iter().map(|(&(j, p), &c)| (j, p, c))
    }

    /// How many processes of `job` sit on each node.
    pub fn nodes_of_job(&self, job: u32) -> BTreeMap<u32, u32> {
        let mut counts = BTreeMap::new();
        for (&(j, _), core) in &self.map {
            if j == job {
                *counts.entry(core.node).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Total processes per node, indexed by node.
    pub fn per_node_totals(&self, num_nodes: u32) -> Vec<u32> {
        let mut totals = vec![0; num_nodes as usize];
        for core in self.map.values() {
            totals[core.node as usize] += 1;
        }
        totals
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<PlacementRow> = self
            .iter()
            .map(|(job, process, c)| PlacementRow {
                job,
                process,
                node: c.node,
                socket: c.socket,
                core: c.core,
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("placement serializes")
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let rows: Vec<PlacementRow> = serde_json::from_str(text)
            .map_err(|e| Error::schema(origin.to_string(), e.to_string()))?;
        let mut placement = Placement::new();
        for (idx, row) in rows.iter().enumerate() {
            let core = CoreId::new(row.node, row.socket, row.core);
            if placement.map.insert((row.job, row.process), core).is_some() {
                return Err(Error::schema(
                    format!("[{idx}]"),
                    format!("duplicate assignment for job {} process {}", row.job, row.process),
                ));
            }
        }
        Ok(placement)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path.display().to_string(), e))
    }

    /// Checks that this placement covers `workload` on `spec`: every process
    /// has a core, cores exist, and no core is shared.
    pub fn validate_against(&self, workload: &Workload, spec: &ClusterSpec) -> Result<()> {
        let occ = Occupancy::new(spec);
        let mut taken = BTreeSet::new();
        for (&(job, process), &core) in &self.map {
            if !occ.contains(core) {
                return Err(Error::schema(
                    format!("job {job} process {process}"),
                    format!("core {core} outside the {} cluster", "configured"),
                ));
            }
            if !taken.insert(core) {
                return Err(Error::CoreAlreadyUsed(core));
            }
        }
        for job in &workload.jobs {
            for process in 0..job.processes {
                if !self.map.contains_key(&(job.id, process)) {
                    return Err(Error::UnplacedProcess {
                        job: job.id,
                        process,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Runs the given strategy.
pub fn map_with(strategy: Strategy, workload: &Workload, spec: &ClusterSpec) -> Result<Placement> {
    match strategy {
        Strategy::Blocked => map_blocked(workload, spec),
        Strategy::Cyclic => map_cyclic(workload, spec),
        Strategy::Drb => map_drb(workload, spec),
        Strategy::New => map_new(workload, spec),
    }
}

fn ensure_capacity(workload: &Workload, occ: &Occupancy) -> Result<()> {
    let needed = workload.total_processes();
    let free = occ.total_free();
    if needed > free {
        return Err(Error::ClusterFull { needed, free });
    }
    Ok(())
}

/// Fills cores in `(node, socket, core)` order, jobs in file order.
pub fn map_blocked(workload: &Workload, spec: &ClusterSpec) -> Result<Placement> {
    let mut occ = Occupancy::new(spec);
    ensure_capacity(workload, &occ)?;
    let mut placement = Placement::new();
    for job in &workload.jobs {
        for process in 0..job.processes {
            let core = occ.first_free().expect("capacity checked above");
            occ.claim(core)?;
            placement.insert(job.id, process, core);
        }
    }
    Ok(placement)
}

/// Deals each job's processes round-robin over the nodes that have free
/// cores when the job starts; process `k` aims at the `k`-th such node
/// (mod their number) and advances to the next node with room if that one
/// has filled up meanwhile. Within a node, lowest socket first.
pub fn map_cyclic(workload: &Workload, spec: &ClusterSpec) -> Result<Placement> {
    let mut occ = Occupancy::new(spec);
    ensure_capacity(workload, &occ)?;
    let mut placement = Placement::new();
    for job in &workload.jobs {
        let available: Vec<u32> =
            (0..spec.num_nodes).filter(|&n| occ.node_free(n) > 0).collect();
        for process in 0..job.processes {
            let core = available
                .iter()
                .cycle()
                .skip(process as usize % available.len())
                .take(available.len())
                .find_map(|&node| {
                    let socket =
                        (0..spec.sockets_per_node).find(|&s| occ.socket_free(node, s) > 0)?;
                    let core = occ.lowest_free_core(node, socket)?;
                    Some(CoreId::new(node, socket, core))
                })
                .expect("capacity checked above");
            occ.claim(core)?;
            placement.insert(job.id, process, core);
        }
    }
    Ok(placement)
}

/// Dual recursive bipartitioning: per job (file order), take the first free
/// cores in `(node, socket, core)` order, then recursively split the job's
/// communication graph along minimum-weight balanced cuts, giving the half
/// with the lowest process index the leading half of the core block.
pub fn map_drb(workload: &Workload, spec: &ClusterSpec) -> Result<Placement> {
    let mut occ = Occupancy::new(spec);
    ensure_capacity(workload, &occ)?;
    let mut placement = Placement::new();
    for job in &workload.jobs {
        let graph = ProcGraph::from_matrix(&job.comm_matrix()?);
        let block: Vec<CoreId> = occ.free_cores().into_iter().take(job.processes as usize).collect();
        debug_assert_eq!(block.len(), job.processes as usize);
        let procs: Vec<ProcId> = (0..job.processes).collect();
        assign_recursive(&graph, &procs, &block, job.id, &mut occ, &mut placement)?;
    }
    Ok(placement)
}

fn assign_recursive(
    graph: &ProcGraph,
    procs: &[ProcId],
    cores: &[CoreId],
    job: u32,
    occ: &mut Occupancy,
    placement: &mut Placement,
) -> Result<()> {
    debug_assert_eq!(procs.len(), cores.len());
    if let [process] = procs {
        occ.claim(cores[0])?;
        placement.insert(job, *process, cores[0]);
        return Ok(());
    }
    let (a, b) = bipartition::split_subset(graph, procs);
    // The half holding the lowest process index keeps the leading cores, so
    // the recursion is deterministic and traffic-free jobs come out packed
    // in index order.
    let (first, second) = if a.contains(&procs[0]) { (a, b) } else { (b, a) };
    assign_recursive(graph, &first, &cores[..first.len()], job, occ, placement)?;
    assign_recursive(graph, &second, &cores[first.len()..], job, occ, placement)
}

/// Per-job cap on processes per node, from the job's adjacency and the
/// cluster's current load.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    /// The job's graph is sparse relative to free capacity; pack freely.
    Unlimited,
    /// At most this many of the job's processes per node (before the cap
    /// has to relax because every node with free cores reached it).
    Bounded(u32),
}

/// Computes the per-node cap for a job about to be placed.
///
/// Jobs whose average adjacency stays a full core below the average free
/// cores per node get [`Threshold::Unlimited`]. Denser jobs get
/// `floor(sum(adjacency) / (max_adjacency * num_nodes))`, clamped up to 1 —
/// a spread just wide enough that each node serves an even share of the
/// job's neighbor links.
pub fn compute_threshold(stats: &AdjacencyStats, occ: &Occupancy) -> Threshold {
    let one = Ratio::from_integer(1);
    if stats.max == 0 || stats.avg + one <= occ.free_cores_avg() {
        return Threshold::Unlimited;
    }
    let sum: u64 = stats.per_process.iter().map(|&a| a as u64).sum();
    let bound = sum / (stats.max as u64 * occ.num_nodes() as u64);
    Threshold::Bounded((bound as u32).max(1))
}

/// Places one job's processes while a cap on processes-per-node holds.
struct CappedPlacer<'a> {
    occ: &'a mut Occupancy,
    /// This job's processes already on each node.
    on_node: Vec<u32>,
    /// Current cap; `u32::MAX` when unbounded. Relaxes by one whenever every
    /// node with free cores has reached it.
    cap: u32,
}

impl<'a> CappedPlacer<'a> {
    fn new(occ: &'a mut Occupancy, threshold: Threshold) -> Self {
        let nodes = occ.num_nodes() as usize;
        CappedPlacer {
            occ,
            on_node: vec![0; nodes],
            cap: match threshold {
                Threshold::Unlimited => u32::MAX,
                Threshold::Bounded(t) => t,
            },
        }
    }

    fn node_open(&self, node: u32) -> bool {
        self.occ.node_free(node) > 0 && self.on_node[node as usize] < self.cap
    }

    /// Most-free node still open for this job (ties to the lowest index),
    /// relaxing the cap when every node with free cores has hit it.
    fn pick_node(&mut self) -> Result<u32> {
        loop {
            let best = (0..self.occ.num_nodes())
                .filter(|&n| self.node_open(n))
                .max_by_key(|&n| (self.occ.node_free(n), std::cmp::Reverse(n)));
            if let Some(node) = best {
                return Ok(node);
            }
            if self.occ.total_free() == 0 {
                return Err(Error::ClusterFull { needed: 1, free: 0 });
            }
            self.cap = self.cap.saturating_add(1);
        }
    }

    /// Claims a core on `node`: the anchor's socket while it has room,
    /// otherwise the node's most-free socket.
    fn place(&mut self, node: u32, anchor: Option<CoreId>) -> Result<CoreId> {
        let socket = match anchor {
            Some(a) if a.node == node && self.occ.socket_free(node, a.socket) > 0 => a.socket,
            _ => self.occ.most_free_socket(node),
        };
        let core = self
            .occ
            .lowest_free_core(node, socket)
            .expect("picked a socket with a free core");
        let core = CoreId::new(node, socket, core);
        self.occ.claim(core)?;
        self.on_node[node as usize] += 1;
        Ok(core)
    }
}

/// The contention-aware strategy.
///
/// Jobs are grouped by message-size class (large, then medium, then small)
/// and, within a class, ordered by average adjacency, densest first. For
/// each job:
///
/// 1. compute the per-node cap once ([`compute_threshold`]);
/// 2. order processes by communication demand, highest first;
/// 3. place the highest-demand unmapped process on the most-free node and
///    socket, then walk the communication graph outward breadth-first:
///    each placed process pulls its still-unmapped neighbors (heaviest
///    pairwise traffic first) onto the current node until the cap or the
///    node's capacity is reached, then the walk moves to the next most-free
///    node;
/// 4. repeat from 3 while unmapped processes remain (covers disconnected
///    components).
pub fn map_new(workload: &Workload, spec: &ClusterSpec) -> Result<Placement> {
    let mut occ = Occupancy::new(spec);
    ensure_capacity(workload, &occ)?;

    let matrices: Vec<CommMatrix> = workload
        .jobs
        .iter()
        .map(|j| j.comm_matrix())
        .collect::<Result<_>>()?;
    let stats: Vec<AdjacencyStats> = matrices.iter().map(|m| m.adjacency_stats()).collect();

    let mut placement = Placement::new();
    for class in [SizeClass::Large, SizeClass::Medium, SizeClass::Small] {
        let mut order: Vec<usize> = (0..workload.jobs.len())
            .filter(|&i| workload.jobs[i].size_class() == class)
            .collect();
        order.sort_by(|&a, &b| {
            stats[b]
                .avg
                .cmp(&stats[a].avg)
                .then(workload.jobs[a].id.cmp(&workload.jobs[b].id))
        });
        for idx in order {
            place_job_by_demand(
                workload.jobs[idx].id,
                &matrices[idx],
                &stats[idx],
                &mut occ,
                &mut placement,
            )?;
        }
    }
    Ok(placement)
}

fn place_job_by_demand(
    job: u32,
    matrix: &CommMatrix,
    stats: &AdjacencyStats,
    occ: &mut Occupancy,
    placement: &mut Placement,
) -> Result<()> {
    let threshold = compute_threshold(stats, occ);
    let mut placer = CappedPlacer::new(occ, threshold);

    let demand = matrix.comm_demand();
    let mut by_demand: Vec<ProcId> = (0..matrix.processes()).collect();
    by_demand.sort_by(|&a, &b| {
        demand[b as usize]
            .total_cmp(&demand[a as usize])
            .then(a.cmp(&b))
    });

    let mut core_of: Vec<Option<CoreId>> = vec![None; matrix.processes() as usize];
    while let Some(&seed) = by_demand.iter().find(|&&p| core_of[p as usize].is_none()) {
        let mut node = placer.pick_node()?;
        core_of[seed as usize] = Some(placer.place(node, None)?);

        // Walk the communication graph breadth-first from the seed. Every
        // placed process becomes an anchor whose unmapped neighbors are
        // pulled in, heaviest pair first, filling the current node before
        // moving on.
        let mut queue = VecDeque::from([seed]);
        while let Some(anchor) = queue.pop_front() {
            let anchor_core = core_of[anchor as usize].expect("anchors are placed");
            let mut pending: Vec<ProcId> = matrix
                .neighbors(anchor)
                .iter()
                .copied()
                .filter(|&p| core_of[p as usize].is_none())
                .collect();
            pending.sort_by(|&a, &b| {
                matrix
                    .pairwise_demand(anchor, b)
                    .total_cmp(&matrix.pairwise_demand(anchor, a))
                    .then(a.cmp(&b))
            });
            for p in pending {
                if core_of[p as usize].is_some() {
                    continue;
                }
                if !placer.node_open(node) {
                    node = placer.pick_node()?;
                }
                core_of[p as usize] = Some(placer.place(node, Some(anchor_core))?);
                queue.push_back(p);
            }
        }
    }

    for (process, core) in core_of.iter().enumerate() {
        placement.insert(job, process as ProcId, core.expect("all processes placed"));
    }
    Ok(())
}
