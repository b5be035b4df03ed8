//! Message routing and per-channel service times.
//!
//! A message's route depends only on where its endpoints sit:
//!
//! * same node, same socket, and short enough for the cache — one hop
//!   through the socket's shared cache;
//! * same node otherwise — one hop through the sending socket's memory
//!   controller, 10% slower (by default) when the cores sit on different
//!   sockets;
//! * different nodes — the sender's NIC, the switch, the receiver's NIC.
//!
//! Every channel instance — each socket's cache, each socket's memory
//! controller, and each NIC direction — is a FIFO single-server: one
//! transfer in service at a time, the rest waiting in arrival order. The
//! switch is the exception, a flat latency with no queue. In half-duplex
//! mode a node's sends and receives share one NIC queue instead of two.
//!
//! The two NIC directions run at different rates. Egress serializes the
//! payload onto the wire at NIC bandwidth. Ingress is the landing side:
//! the payload is already on the node and only has to be written into host
//! memory, so it drains at memory bandwidth. Splitting the rates this way
//! is what lets a node absorb bursts arriving from many peers at once,
//! while its own sends still pay full wire serialization.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::topology::{ClusterSpec, CoreId};
use crate::units::Nanos;

/// What kind of channel a hop crosses; the `hop` column of traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HopKind {
    Cache,
    Memory,
    NicEgress,
    Switch,
    NicIngress,
}

impl fmt::Display for HopKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HopKind::Cache => "cache",
            HopKind::Memory => "memory",
            HopKind::NicEgress => "egress",
            HopKind::Switch => "switch",
            HopKind::NicIngress => "ingress",
        })
    }
}

/// One queueing server instance in the cluster.
///
/// `Nic` only exists in half-duplex mode, where a node's sends and receives
/// share one queue; full-duplex NICs split into egress and ingress.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ResourceId {
    Cache { node: u32, socket: u32 },
    Memory { node: u32, socket: u32 },
    NicEgress { node: u32 },
    NicIngress { node: u32 },
    Nic { node: u32 },
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceId::Cache { node, socket } => write!(f, "cache:{node}/{socket}"),
            ResourceId::Memory { node, socket } => write!(f, "memory:{node}/{socket}"),
            ResourceId::NicEgress { node } => write!(f, "nic_egress:{node}"),
            ResourceId::NicIngress { node } => write!(f, "nic_ingress:{node}"),
            ResourceId::Nic { node } => write!(f, "nic:{node}"),
        }
    }
}

/// Channel classes with distinct service-time rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Cache,
    MemoryLocal,
    /// Memory crossing sockets; pays the remote penalty.
    MemoryRemote,
    /// Wire serialization out of a node.
    Nic,
    /// Receive-side landing into host memory; drains at memory bandwidth.
    NicLanding,
    Switch,
}

/// Time to push `length` bytes through `channel`, in integer nanoseconds
/// (rounded to nearest).
pub fn service_time(length: u64, channel: Channel, spec: &ClusterSpec) -> Nanos {
    let transfer =
        |bandwidth: u64, penalty: f64| (length as f64 * 1e9 / bandwidth as f64 * penalty).round() as Nanos;
    match channel {
        Channel::Cache => transfer(spec.cache_bandwidth, 1.0),
        Channel::MemoryLocal => transfer(spec.mem_bandwidth, 1.0),
        Channel::MemoryRemote => transfer(spec.mem_bandwidth, spec.remote_mem_penalty),
        Channel::Nic => transfer(spec.nic_bandwidth, 1.0),
        Channel::NicLanding => transfer(spec.mem_bandwidth, 1.0),
        Channel::Switch => spec.switch_latency,
    }
}

/// Whether each NIC serializes its directions separately or as one queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NicDuplex {
    #[default]
    Full,
    Half,
}

/// One step of a message's route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    pub kind: HopKind,
    /// The server the hop queues at; `None` for the switch, which is pure
    /// latency.
    pub resource: Option<ResourceId>,
    /// Service time on this channel.
    pub service: Nanos,
}

/// The hops a message of `length` bytes crosses from `src` to `dst`.
pub fn route(
    src: CoreId,
    dst: CoreId,
    length: u64,
    spec: &ClusterSpec,
    duplex: NicDuplex,
) -> Vec<Hop> {
    if src.node == dst.node {
        let hop = if src.socket == dst.socket && length <= spec.cache_msg_cap {
            Hop {
                kind: HopKind::Cache,
                resource: Some(ResourceId::Cache {
                    node: src.node,
                    socket: src.socket,
                }),
                service: service_time(length, Channel::Cache, spec),
            }
        } else {
            let channel = if src.socket == dst.socket {
                Channel::MemoryLocal
            } else {
                Channel::MemoryRemote
            };
            Hop {
                kind: HopKind::Memory,
                resource: Some(ResourceId::Memory {
                    node: src.node,
                    socket: src.socket,
                }),
                service: service_time(length, channel, spec),
            }
        };
        return vec![hop];
    }

    let (egress, ingress) = match duplex {
        NicDuplex::Full => (
            ResourceId::NicEgress { node: src.node },
            ResourceId::NicIngress { node: dst.node },
        ),
        NicDuplex::Half => (
            ResourceId::Nic { node: src.node },
            ResourceId::Nic { node: dst.node },
        ),
    };
    vec![
        Hop {
            kind: HopKind::NicEgress,
            resource: Some(egress),
            service: service_time(length, Channel::Nic, spec),
        },
        Hop {
            kind: HopKind::Switch,
            resource: None,
            service: service_time(length, Channel::Switch, spec),
        },
        Hop {
            kind: HopKind::NicIngress,
            resource: Some(ingress),
            service: service_time(length, Channel::NicLanding, spec),
        },
    ]
}
