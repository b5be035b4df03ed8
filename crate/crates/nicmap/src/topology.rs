//! Cluster description and free-core bookkeeping.
//!
//! A cluster is a three-level hierarchy:
//!
//! ```text
//! cluster ── node 0 ── socket 0 ── cores 0..C
//!         │         ├─ socket 1 ── ...
//!         │         └─ ...
//!         ├─ node 1 ── ...
//!         └─ ...
//! ```
//!
//! Nodes exchange messages through per-node NICs and a single switch;
//! processes on the same node communicate through that node's memory, or
//! through the shared cache when they sit on the same socket and the message
//! is small enough. [`ClusterSpec`] holds the shape and the channel speeds,
//! [`Occupancy`] tracks which cores are taken while a mapping strategy runs.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::units::{GIB, MIB};
use crate::{Error, Result};

/// Shape and channel parameters of the simulated cluster.
///
/// Deserializes from JSON with every field optional; missing fields keep the
/// defaults below, which describe the reference platform: 16 dual-unit nodes
/// of 4 sockets x 4 cores, 1 GiB/s NICs, 4 GiB/s memory with a 10% penalty
/// for crossing sockets, and an 8 GiB/s shared cache that takes messages up
/// to 1 MiB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSpec {
    pub num_nodes: u32,
    pub sockets_per_node: u32,
    pub cores_per_socket: u32,
    /// Intra-node memory bandwidth, bytes per second.
    pub mem_bandwidth: u64,
    /// Multiplier on memory transfer time when sender and receiver cores sit
    /// on different sockets of the same node.
    pub remote_mem_penalty: f64,
    /// Shared-cache bandwidth, bytes per second.
    pub cache_bandwidth: u64,
    /// Largest message the shared cache carries; longer intra-socket traffic
    /// falls back to memory.
    pub cache_msg_cap: u64,
    /// Per-NIC bandwidth, bytes per second.
    pub nic_bandwidth: u64,
    /// Flat switch traversal time, nanoseconds.
    pub switch_latency: u64,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        ClusterSpec {
            num_nodes: 16,
            sockets_per_node: 4,
            cores_per_socket: 4,
            mem_bandwidth: 4 * GIB,
            remote_mem_penalty: 1.10,
            cache_bandwidth: 8 * GIB,
            cache_msg_cap: MIB,
            nic_bandwidth: GIB,
            switch_latency: 100,
        }
    }
}

impl ClusterSpec {
    /// Loads a spec from a JSON file. Fields not present keep their defaults.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let spec: ClusterSpec = serde_json::from_str(&text)
            .map_err(|e| Error::schema(path.display().to_string(), e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks that every parameter is usable (nonzero counts and bandwidths,
    /// penalty at least 1).
    pub fn validate(&self) -> Result<()> {
        let positive: [(&str, u64); 6] = [
            ("num_nodes", self.num_nodes as u64),
            ("sockets_per_node", self.sockets_per_node as u64),
            ("cores_per_socket", self.cores_per_socket as u64),
            ("mem_bandwidth", self.mem_bandwidth),
            ("cache_bandwidth", self.cache_bandwidth),
            ("nic_bandwidth", self.nic_bandwidth),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::schema(name, "must be positive"));
            }
        }
        if !self.remote_mem_penalty.is_finite() || self.remote_mem_penalty < 1.0 {
            return Err(Error::schema(
                "remote_mem_penalty",
                "must be a finite number >= 1.0",
            ));
        }
        Ok(())
    }

    pub fn cores_per_node(&self) -> u32 {
        self.sockets_per_node * self.cores_per_socket
    }

    pub fn total_cores(&self) -> u32 {
        self.num_nodes * self.cores_per_node()
    }
}

/// One core, addressed by its position in the hierarchy.
///
/// The derived ordering is lexicographic `(node, socket, core)`; "first free
/// core" everywhere in the crate means first in this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CoreId {
    pub node: u32,
    pub socket: u32,
    pub core: u32,
}

impl CoreId {
    pub fn new(node: u32, socket: u32, core: u32) -> Self {
        CoreId { node, socket, core }
    }
}

impl fmt::Display for CoreId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.node, self.socket, self.core)
    }
}

/// Which cores of a cluster are taken, with per-node and per-socket free
/// counts kept up to date as cores are claimed.
#[derive(Debug, Clone)]
pub struct Occupancy {
    num_nodes: u32,
    sockets_per_node: u32,
    cores_per_socket: u32,
    used: Vec<bool>,
    free_per_node: Vec<u32>,
    free_per_socket: Vec<u32>,
    total_free: u32,
}

impl Occupancy {
    /// An all-free occupancy for the given cluster shape.
    pub fn new(spec: &ClusterSpec) -> Self {
        let nodes = spec.num_nodes;
        let sockets = spec.sockets_per_node;
        let cores = spec.cores_per_socket;
        Occupancy {
            num_nodes: nodes,
            sockets_per_node: sockets,
            cores_per_socket: cores,
            used: vec![false; (nodes * sockets * cores) as usize],
            free_per_node: vec![sockets * cores; nodes as usize],
            free_per_socket: vec![cores; (nodes * sockets) as usize],
            total_free: nodes * sockets * cores,
        }
    }

    fn index(&self, id: CoreId) -> usize {
        debug_assert!(self.contains(id), "core {id} outside cluster");
        ((id.node * self.sockets_per_node + id.socket) * self.cores_per_socket + id.core) as usize
    }

    /// Whether `id` addresses a core that exists in this cluster.
    pub fn contains(&self, id: CoreId) -> bool {
        id.node < self.num_nodes
            && id.socket < self.sockets_per_node
            && id.core < self.cores_per_socket
    }

    pub fn is_used(&self, id: CoreId) -> bool {
        self.used[self.index(id)]
    }

    /// Marks `id` as taken.
    pub fn claim(&mut self, id: CoreId) -> Result<()> {
        let idx = self.index(id);
        if self.used[idx] {
            return Err(Error::CoreAlreadyUsed(id));
        }
        self.used[idx] = true;
        self.free_per_node[id.node as usize] -= 1;
        self.free_per_socket[(id.node * self.sockets_per_node + id.socket) as usize] -= 1;
        self.total_free -= 1;
        Ok(())
    }

    pub fn total_free(&self) -> u32 {
        self.total_free
    }

    pub fn node_free(&self, node: u32) -> u32 {
        self.free_per_node[node as usize]
    }

    pub fn socket_free(&self, node: u32, socket: u32) -> u32 {
        self.free_per_socket[(node * self.sockets_per_node + socket) as usize]
    }

    pub fn num_nodes(&self) -> u32 {
        self.num_nodes
    }

    pub fn sockets_per_node(&self) -> u32 {
        self.sockets_per_node
    }

    /// Free cores averaged over nodes, as an exact fraction.
    ///
    /// ```
    /// use nicmap::topology::{ClusterSpec, CoreId, Occupancy};
    /// use num_rational::Ratio;
    ///
    /// let spec = ClusterSpec::default(); // 16 nodes, 256 cores
    /// let mut occ = Occupancy::new(&spec);
    /// for core in 0..4 {
    ///     occ.claim(CoreId::new(0, 0, core)).unwrap();
    ///     occ.claim(CoreId::new(1, 0, core)).unwrap();
    /// }
    /// assert_eq!(occ.free_cores_avg(), Ratio::new(248, 16)); // 15.5
    /// ```
    pub fn free_cores_avg(&self) -> Ratio<u64> {
        Ratio::new(self.total_free as u64, self.num_nodes as u64)
    }

    /// Lowest-numbered free core in a socket, if any.
    pub fn lowest_free_core(&self, node: u32, socket: u32) -> Option<u32> {
        (0..self.cores_per_socket)
            .find(|&core| !self.is_used(CoreId::new(node, socket, core)))
    }

    /// First free core in `(node, socket, core)` order across the whole
    /// cluster, if any.
    pub fn first_free(&self) -> Option<CoreId> {
        self.used.iter().position(|&u| !u).map(|idx| {
            let idx = idx as u32;
            let per_node = self.sockets_per_node * self.cores_per_socket;
            CoreId::new(
                idx / per_node,
                (idx % per_node) / self.cores_per_socket,
                idx % self.cores_per_socket,
            )
        })
    }

    /// All free cores in `(node, socket, core)` order.
    pub fn free_cores(&self) -> Vec<CoreId> {
        let per_node = self.sockets_per_node * self.cores_per_socket;
        self.used
            .iter()
            .enumerate()
            .filter(|(_, &u)| !u)
            .map(|(idx, _)| {
                let idx = idx as u32;
                CoreId::new(
                    idx / per_node,
                    (idx % per_node) / self.cores_per_socket,
                    idx % self.cores_per_socket,
                )
            })
            .collect()
    }

    /// Node with the most free cores (ties to the lowest index), then the
    /// socket with the most free cores within it (same tie rule).
    ///
    /// ```
    /// use nicmap::topology::{ClusterSpec, Occupancy};
    ///
    /// let occ = Occupancy::new(&ClusterSpec::default());
    /// assert_eq!(occ.select_node_socket().unwrap(), (0, 0));
    /// ```
    pub fn select_node_socket(&self) -> Result<(u32, u32)> {
        let node = self
            .most_free_node()
            .ok_or(Error::ClusterFull { needed: 1, free: 0 })?;
        Ok((node, self.most_free_socket(node)))
    }

    /// Node with the most free cores, lowest index on ties; `None` when the
    /// cluster is full.
    pub fn most_free_node(&self) -> Option<u32> {
        let (node, &free) = self
            .free_per_node
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
        (free > 0).then_some(node as u32)
    }

    /// Socket of `node` with the most free cores, lowest index on ties.
    pub fn most_free_socket(&self, node: u32) -> u32 {
        let base = (node * self.sockets_per_node) as usize;
        let row = &self.free_per_socket[base..base + self.sockets_per_node as usize];
        row.iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(s, _)| s as u32)
            .expect("cluster has at least one socket per node")
    }
}
