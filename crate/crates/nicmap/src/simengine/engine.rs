//! The discrete-event loop behind [`super::run`].
//!
//! Three event classes move a message along its route:
//!
//! * *inject* — the message reaches its first hop at its creation time;
//! * *kick* — a channel checks whether it can start its next transfer;
//! * *hop done* — a transfer finishes; the channel frees up and the message
//!   enters its next hop (or is delivered).
//!
//! Events are processed in `(time, class, push order)` order with hop
//! completions first, then injections, then kicks. Kicks never jump the
//! queue: every arrival at time `t` is enqueued before any kick at `t`
//! starts a transfer, so a channel picks among all transfers that have
//! arrived by then — ordered by `(arrival, job, sender, sequence)` — and
//! service always starts at the latest of arrival time and the moment the
//! channel frees up. The switch is the one hop without a server: it delays
//! every message by its latency and never queues.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use crate::mapping::Placement;
use crate::topology::ClusterSpec;
use crate::units::Nanos;
use crate::workload::{ProcId, Workload};
use crate::Result;

use super::route::{route, Hop, NicDuplex, ResourceId};
use super::schedule::job_sends;
use super::{HopRecord, MessageRecord, RawResults, ResourceUse, SimOptions};

const CLASS_DONE: u8 = 0;
const CLASS_INJECT: u8 = 1;
const CLASS_KICK: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Action {
    HopDone(u32),
    Inject(u32),
    Kick(ResourceId),
}

/// Transfers waiting at a channel, ordered by
/// `(arrival, job, sender, sender sequence)`; the payload is the message
/// index.
type FifoQueue = BinaryHeap<Reverse<(Nanos, u32, ProcId, u64, u32)>>;

/// A FIFO single-server: one transfer in service at a time, the rest
/// waiting in arrival order.
struct Server {
    queue: FifoQueue,
    busy: bool,
    busy_ns: Nanos,
    transfers: u64,
}

impl Server {
    fn new() -> Self {
        Server {
            queue: BinaryHeap::new(),
            busy: false,
            busy_ns: 0,
            transfers: 0,
        }
    }
}

struct Msg {
    rec: MessageRecord,
    route: Vec<Hop>,
    cur: usize,
}

struct Sim {
    msgs: Vec<Msg>,
    servers: BTreeMap<ResourceId, Server>,
    heap: BinaryHeap<Reverse<(Nanos, u8, u64, Action)>>,
    pushed: u64,
    sender_done: BTreeMap<(u32, ProcId), Nanos>,
    recv_done: BTreeMap<(u32, ProcId), Nanos>,
    horizon: Nanos,
}

impl Sim {
    fn push(&mut self, t: Nanos, class: u8, action: Action) {
        self.heap.push(Reverse((t, class, self.pushed, action)));
        self.pushed += 1;
    }

    /// Moves message `i` into its current hop at time `now`: server hops
    /// join the queue and schedule a kick, the switch serves immediately.
    fn enter_hop(&mut self, i: u32, now: Nanos) {
        let msg = &mut self.msgs[i as usize];
        let hop = msg.route[msg.cur];
        match hop.resource {
            Some(rid) => {
                let server = self.servers.get_mut(&rid).expect("all servers prebuilt");
                server
                    .queue
                    .push(Reverse((now, msg.rec.job, msg.rec.src, msg.rec.seq, i)));
                self.push(now, CLASS_KICK, Action::Kick(rid));
            }
            None => {
                let end = now + hop.service;
                msg.rec.hops.push(HopRecord {
                    kind: hop.kind,
                    resource: None,
                    arrival: now,
                    start: now,
                    end,
                });
                self.push(end, CLASS_DONE, Action::HopDone(i));
            }
        }
    }

    /// Starts the next queued transfer on `rid` if it is idle.
    fn kick(&mut self, rid: ResourceId, now: Nanos) {
        let server = self.servers.get_mut(&rid).expect("all servers prebuilt");
        if server.busy {
            return;
        }
        let Some(Reverse((arrival, _, _, _, i))) = server.queue.pop() else {
            return;
        };
        server.busy = true;
        let msg = &mut self.msgs[i as usize];
        let hop = msg.route[msg.cur];
        let end = now + hop.service;
        msg.rec.hops.push(HopRecord {
            kind: hop.kind,
            resource: hop.resource,
            arrival,
            start: now,
            end,
        });
        server.busy_ns += hop.service;
        server.transfers += 1;
        self.push(end, CLASS_DONE, Action::HopDone(i));
    }

    fn hop_done(&mut self, i: u32, now: Nanos) {
        let msg = &mut self.msgs[i as usize];
        let hop = msg.route[msg.cur];
        let key = (msg.rec.job, msg.rec.src);
        if msg.cur == 0 {
            // A sender is done once its last message clears its first hop.
            let done = self.sender_done.entry(key).or_insert(0);
            *done = (*done).max(now);
        }
        msg.cur += 1;
        let delivered = msg.cur == msg.route.len();
        let dst_key = (msg.rec.job, msg.rec.dst);
        if let Some(rid) = hop.resource {
            let server = self.servers.get_mut(&rid).expect("all servers prebuilt");
            server.busy = false;
            self.push(now, CLASS_KICK, Action::Kick(rid));
        }
        if delivered {
            let done = self.recv_done.entry(dst_key).or_insert(0);
            *done = (*done).max(now);
        } else {
            self.enter_hop(i, now);
        }
        self.horizon = self.horizon.max(now);
    }
}

pub(super) fn simulate(
    workload: &Workload,
    placement: &Placement,
    spec: &ClusterSpec,
    options: SimOptions,
) -> Result<RawResults> {
    placement.validate_against(workload, spec)?;

    let mut servers = BTreeMap::new();
    for node in 0..spec.num_nodes {

        match options.duplex {
            NicDuplex::Full => {
                servers.insert(ResourceId::NicEgress { node }, Server::new());
                servers.insert(ResourceId::NicIngress { node }, Server::new());
            }
            NicDuplex::Half => {
                servers.insert(ResourceId::Nic { node }, Server::new());
            }
        }
        for socket in 0..spec.sockets_per_node {
            servers.insert(ResourceId::Cache { node, socket }, Server::new());
            servers.insert(ResourceId::Memory { node, socket }, Server::new());
        }
    }

    let mut sim = Sim {
        msgs: Vec::new(),
        servers,
        heap: BinaryHeap::new(),
        pushed: 0,
        sender_done: BTreeMap::new(),
        recv_done: BTreeMap::new(),
        horizon: 0,
    };

    // Stagger job start offsets evenly across the shortest send period so
    // distinct jobs do not fire in lockstep on period boundaries.
    let min_period = workload
        .jobs
        .iter()
        .map(|j| j.min_period_ns())
        .min()
        .unwrap_or(0);
    let delta = min_period / (workload.jobs.len().max(1) as u64);

    for (position, job) in workload.jobs.iter().enumerate() {
        let matrix = job.comm_matrix()?;
        let offset = delta * position as u64;
        for send in job_sends(job, &matrix, options.arrivals)? {
            let src_core = placement
                .core_of(job.id, send.src)
                .expect("placement validated");
            let dst_core = placement
                .core_of(job.id, send.dst)
                .expect("placement validated");
            let length = matrix
                .edge(send.src, send.dst)
                .expect("sends follow matrix edges")
                .length;
            let created = offset + send.at;
            let hops = route(src_core, dst_core, length, spec, options.duplex);
            let idx = sim.msgs.len() as u32;
            sim.msgs.push(Msg {
                rec: MessageRecord {
                    job: job.id,
                    src: send.src,
                    dst: send.dst,
                    seq: send.seq,
                    length,
                    created,
                    hops: Vec::with_capacity(hops.len()),
                },
                route: hops,
                cur: 0,
            });
            sim.push(created, CLASS_INJECT, Action::Inject(idx));
        }
    }

    while let Some(Reverse((t, _, _, action))) = sim.heap.pop() {
        match action {
            Action::HopDone(i) => sim.hop_done(i, t),
            Action::Inject(i) => sim.enter_hop(i, t),
            Action::Kick(rid) => sim.kick(rid, t),
        }
    }

    let mut completions = BTreeMap::new();
    for job in &workload.jobs {
        for process in 0..job.processes {
            let key = (job.id, process);
            let sent = sim.sender_done.get(&key).copied().unwrap_or(0);
            let received = sim.recv_done.get(&key).copied().unwrap_or(0);
            completions.insert(key, sent.max(received));
        }
    }

    let resources = sim
        .servers
        .into_iter()
        .map(|(rid, server)| {
            (
                rid,
                ResourceUse {
                    busy: server.busy_ns,
                    transfers: server.transfers,
                },
            )
        })
        .collect();

    Ok(RawResults {
        messages: sim.msgs.into_iter().map(|m| m.rec).collect(),
        completions,
        resources,
        horizon: sim.horizon,
    })
}
