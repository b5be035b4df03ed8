//! Message-level discrete-event simulation of a placed workload.
//!
//! [`run`] plays out every message every process sends: each message is
//! created on its sender's schedule, crosses the channels [`route`] gives it
//! (cache, memory, or NIC + switch + NIC), and is delivered to its receiver.
//! Every channel instance — each socket's cache, each node's memory, each
//! NIC direction — is a FIFO single-server, so co-located traffic queues
//! and waits; those queues are where placement quality shows up. The switch
//! adds flat latency and never queues.
//!
//! The result is a full [`MessageRecord`] per message (arrival, service
//! start, and completion per hop), per-process completion times, and
//! per-channel busy accounting; [`crate::metrics`] reduces these to report
//! numbers. Runs are deterministic: same inputs (and seed, for Poisson
//! arrivals) mean byte-identical results.
//!
//! Job start offsets are staggered evenly across the workload's shortest
//! send period so that independent jobs sharing a rate do not fire their
//! whole periods in lockstep; within a job, all processes keep their
//! synchronized schedule.

mod engine;
pub mod route;
pub mod schedule;

use std::collections::BTreeMap;
use std::io;

pub use route::{route, service_time, Channel, Hop, HopKind, NicDuplex, ResourceId};
pub use schedule::{job_sends, Send};

use crate::mapping::Placement;
use crate::topology::ClusterSpec;
use crate::units::Nanos;
use crate::workload::{ProcId, Workload};
use crate::Result;

/// How message emission times are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ArrivalModel {
    /// Fixed spacing at each sender's configured rate.
    #[default]
    Periodic,
    /// Exponential gaps with the same mean, from a deterministic per-stream
    /// RNG derived from this seed.
    Poisson { seed: u64 },
}

/// Simulation knobs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimOptions {
    pub arrivals: ArrivalModel,
    pub duplex: NicDuplex,
}

/// One hop of one message, fully resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopRecord {
    pub kind: HopKind,
    pub resource: Option<ResourceId>,
    /// When the message reached this channel.
    pub arrival: Nanos,
    /// When the channel started serving it (equals `arrival` if nothing was
    /// ahead of it).
    pub start: Nanos,
    /// When the transfer finished.
    pub end: Nanos,
}

impl HopRecord {
    /// Time spent queueing before service.
    pub fn wait(&self) -> Nanos {
        self.start - self.arrival
    }
}

/// The life of one message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageRecord {
    pub job: u32,
    pub src: ProcId,
    pub dst: ProcId,
    /// Position in the sender's emission order.
    pub seq: u64,
    pub length: u64,
    /// Emission time (job start offset included).
    pub created: Nanos,
    /// One record per hop crossed, in route order.
    pub hops: Vec<HopRecord>,
}

impl MessageRecord {
    /// When the receiver got the message.
    pub fn delivered(&self) -> Nanos {
        self.hops.last().expect("simulated messages have hops").end
    }

    /// When the sender finished pushing the message into its first channel.
    pub fn sent(&self) -> Nanos {
        self.hops.first().expect("simulated messages have hops").end
    }
}

/// Busy accounting for one channel instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceUse {
    /// Total time the channel spent serving transfers.
    pub busy: Nanos,
    pub transfers: u64,
}

/// Everything a simulation run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RawResults {
    /// Every message, in creation order (jobs in file order, senders
    /// ascending, each sender's messages in emission order).
    pub messages: Vec<MessageRecord>,
    /// Per `(job, process)`: when it finished — the later of its last send
    /// clearing its first hop and its last delivery arriving. Processes
    /// that neither send nor receive finish at 0.
    pub completions: BTreeMap<(u32, ProcId), Nanos>,
    /// Busy accounting per channel instance, every instance present.
    pub resources: BTreeMap<ResourceId, ResourceUse>,
    /// Time of the last event; the run's makespan.
    pub horizon: Nanos,
}

/// Simulates `workload` under `placement` on `spec`.
///
/// Fails fast if the placement does not cover the workload
/// ([`crate::Error::UnplacedProcess`]) or violates the cluster shape.
pub fn run(
    workload: &Workload,
    placement: &Placement,
    spec: &ClusterSpec,
    options: SimOptions,
) -> Result<RawResults> {
    engine::simulate(workload, placement, spec, options)
}

/// Writes the per-hop trace as CSV: one row per hop in message order, with
/// columns `job,src,dst,seq,length,created_ns,hop,arrival_ns,start_ns,end_ns`.
pub fn write_trace<W: io::Write>(results: &RawResults, mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "job,src,dst,seq,length,created_ns,hop,arrival_ns,start_ns,end_ns"
    )?;
    for m in &results.messages {
        for h in &m.hops {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                m.job, m.src, m.dst, m.seq, m.length, m.created, h.kind, h.arrival, h.start, h.end
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mapping::Placement;
    use crate::topology::CoreId;
    use crate::units::{KIB, MIB};
    use crate::workload::{EdgeSpec, JobSpec, Pattern};

    fn one_edge_job(length: u64, rate: f64, count: u64) -> Workload {
        Workload {
            jobs: vec![JobSpec {
                id: 0,
                processes: 2,
                pattern: Pattern::Explicit,
                length_bytes: None,
                rate_per_sec: None,
                message_count: None,
                matrix: Some(vec![EdgeSpec {
                    src: 0,
                    dst: 1,
                    length_bytes: length,
                    rate_per_sec: rate,
                    count,
                }]),
            }],
        }
    }

    fn placed(cores: &[(u32, CoreId)]) -> Placement {
        let mut p = Placement::new();
        for &(process, core) in cores {
            p.insert(0, process, core);
        }
        p
    }

    #[test]
    fn single_cross_node_message_timeline() {
        let w = one_edge_job(64 * KIB, 10.0, 1);
        let p = placed(&[(0, CoreId::new(0, 0, 0)), (1, CoreId::new(1, 0, 0))]);
        let r = run(&w, &p, &ClusterSpec::default(), SimOptions::default()).unwrap();

        assert_eq!(r.messages.len(), 1);
        let m = &r.messages[0];
        let hops = &m.hops;
        assert_eq!(hops.len(), 3);
        // Egress 0..61035 at wire speed, switch to 61135, landing to 76394
        // at memory bandwidth; no waiting anywhere.
        assert_eq!((hops[0].start, hops[0].end), (0, 61_035));
        assert_eq!((hops[1].start, hops[1].end), (61_035, 61_135));
        assert_eq!((hops[2].start, hops[2].end), (61_135, 76_394));
        assert_eq!(m.sent(), 61_035);
        assert_eq!(m.delivered(), 76_394);
        assert_eq!(r.completions[&(0, 0)], 61_035);
        assert_eq!(r.completions[&(0, 1)], 76_394);
        assert_eq!(r.horizon, 76_394);

        let egress = r.resources[&ResourceId::NicEgress { node: 0 }];
        assert_eq!(egress.busy, 61_035);
        assert_eq!(egress.transfers, 1);
        let ingress = r.resources[&ResourceId::NicIngress { node: 1 }];
        assert_eq!(ingress.busy, 15_259);
        assert_eq!(ingress.transfers, 1);
    }

    #[test]
    fn same_node_messages_use_memory_or_cache_without_queueing() {
        // Cross-socket on one node: memory with the remote penalty.
        let w = one_edge_job(2 * MIB, 10.0, 2);
        let p = placed(&[(0, CoreId::new(0, 0, 0)), (1, CoreId::new(0, 1, 0))]);
        let r = run(&w, &p, &ClusterSpec::default(), SimOptions::default()).unwrap();
        let m = &r.messages[0];
        assert_eq!(m.hops.len(), 1);
        assert_eq!(m.hops[0].kind, HopKind::Memory);
        assert_eq!(m.hops[0].end - m.hops[0].start, 537_109);

        // Same socket, small: cache.
        let w = one_edge_job(64 * KIB, 10.0, 1);
        let p = placed(&[(0, CoreId::new(0, 0, 0)), (1, CoreId::new(0, 0, 1))]);
        let r = run(&w, &p, &ClusterSpec::default(), SimOptions::default()).unwrap();
        assert_eq!(r.messages[0].hops[0].kind, HopKind::Cache);
        assert_eq!(r.messages[0].hops[0].wait(), 0);
        assert_eq!(r.messages[0].delivered(), 7_629);
    }

    #[test]
    fn simultaneous_sends_on_one_nic_queue_in_sender_order() {
        // Two processes on node 0 each send one message to node 1 at t=0.
        let w = Workload {
            jobs: vec![JobSpec {
                id: 0,
                processes: 3,
                pattern: Pattern::Explicit,
                length_bytes: None,
                rate_per_sec: None,
                message_count: None,
                matrix: Some(vec![
                    EdgeSpec {
                        src: 1,
                        dst: 2,
                        length_bytes: 64 * KIB,
                        rate_per_sec: 10.0,
                        count: 1,
                    },
                    EdgeSpec {
                        src: 0,
                        dst: 2,
                        length_bytes: 64 * KIB,
                        rate_per_sec: 10.0,
                        count: 1,
                    },
                ]),
            }],
        };
        let p = placed(&[
            (0, CoreId::new(0, 0, 0)),
            (1, CoreId::new(0, 0, 1)),
            (2, CoreId::new(1, 0, 0)),
        ]);
        let r = run(&w, &p, &ClusterSpec::default(), SimOptions::default()).unwrap();

        // Both arrive at t=0; the lower sender index goes first.
        let by_src: BTreeMap<ProcId, &MessageRecord> =
            r.messages.iter().map(|m| (m.src, m)).collect();
        assert_eq!(by_src[&0].hops[0].start, 0);
        assert_eq!(by_src[&1].hops[0].wait(), 61_035);
        assert_eq!(by_src[&1].hops[0].start, 61_035);

        let egress = r.resources[&ResourceId::NicEgress { node: 0 }];
        assert_eq!(egress.busy, 2 * 61_035);
        assert_eq!(egress.transfers, 2);
    }

    #[test]
    fn co_located_senders_queue_at_their_node_memory() {
        // Two senders sharing a socket on node 0 both deliver 2 MiB to a
        // process on another socket at t=0; their socket's memory controller
        // serves them one at a time.
        let w = Workload {
            jobs: vec![JobSpec {
                id: 0,
                processes: 3,
                pattern: Pattern::Explicit,
                length_bytes: None,
                rate_per_sec: None,
                message_count: None,
                matrix: Some(vec![
                    EdgeSpec {
                        src: 0,
                        dst: 2,
                        length_bytes: 2 * MIB,
                        rate_per_sec: 10.0,
                        count: 1,
                    },
                    EdgeSpec {
                        src: 1,
                        dst: 2,
                        length_bytes: 2 * MIB,
                        rate_per_sec: 10.0,
                        count: 1,
                    },
                ]),
            }],
        };
        let p = placed(&[
            (0, CoreId::new(0, 0, 0)),
            (1, CoreId::new(0, 0, 1)),
            (2, CoreId::new(0, 2, 0)),
        ]);
        let r = run(&w, &p, &ClusterSpec::default(), SimOptions::default()).unwrap();

        let by_src: BTreeMap<ProcId, &MessageRecord> =
            r.messages.iter().map(|m| (m.src, m)).collect();
        assert_eq!(by_src[&0].hops[0].wait(), 0);
        assert_eq!(by_src[&1].hops[0].wait(), 537_109);
        let memory = r.resources[&ResourceId::Memory { node: 0, socket: 0 }];
        assert_eq!(memory.busy, 2 * 537_109);
        assert_eq!(memory.transfers, 2);
    }

    #[test]
    fn half_duplex_serializes_both_directions() {
        // Node 0 pushes a 2 MiB message out (its NIC is busy until
        // 1,953,125 ns) while a 64 KiB message from node 2 arrives at
        // 61,135 ns. Full duplex receives it in parallel; half duplex makes
        // it wait for the outbound transfer to clear the shared NIC.
        let w = Workload {
            jobs: vec![JobSpec {
                id: 0,
                processes: 4,
                pattern: Pattern::Explicit,
                length_bytes: None,
                rate_per_sec: None,
                message_count: None,
                matrix: Some(vec![
                    EdgeSpec {
                        src: 0,
                        dst: 1,
                        length_bytes: 2 * MIB,
                        rate_per_sec: 10.0,
                        count: 1,
                    },
                    EdgeSpec {
                        src: 2,
                        dst: 3,
                        length_bytes: 64 * KIB,
                        rate_per_sec: 10.0,
                        count: 1,
                    },
                ]),
            }],
        };
        let p = placed(&[
            (0, CoreId::new(0, 0, 0)),
            (1, CoreId::new(1, 0, 0)),
            (2, CoreId::new(2, 0, 0)),
            (3, CoreId::new(0, 0, 1)),
        ]);

        let full = run(&w, &p, &ClusterSpec::default(), SimOptions::default()).unwrap();
        let total_wait: Nanos = full
            .messages
            .iter()
            .flat_map(|m| m.hops.iter().map(HopRecord::wait))
            .sum();
        assert_eq!(total_wait, 0);

        let half = run(
            &w,
            &p,
            &ClusterSpec::default(),
            SimOptions {
                duplex: NicDuplex::Half,
                ..SimOptions::default()
            },
        )
        .unwrap();
        let inbound = half.messages.iter().find(|m| m.src == 2).unwrap();
        let ingress = inbound.hops.last().unwrap();
        assert_eq!(ingress.arrival, 61_135);
        assert_eq!(ingress.start, 1_953_125);
        assert_eq!(ingress.wait(), 1_891_990);

        let nic0 = half.resources[&ResourceId::Nic { node: 0 }];
        assert_eq!(nic0.transfers, 2);
        assert_eq!(nic0.busy, 1_953_125 + 15_259);
    }

    #[test]
    fn job_offsets_stagger_across_the_shortest_period() {
        // Two linear jobs at 100/s: period 10 ms, so job 1 starts 5 ms in.
        let job = |id| JobSpec {
            id,
            processes: 2,
            pattern: Pattern::Linear,
            length_bytes: Some(64 * KIB),
            rate_per_sec: Some(100.0),
            message_count: Some(2),
            matrix: None,
        };
        let w = Workload {
            jobs: vec![job(0), job(1)],
        };
        let mut p = Placement::new();
        p.insert(0, 0, CoreId::new(0, 0, 0));
        p.insert(0, 1, CoreId::new(1, 0, 0));
        p.insert(1, 0, CoreId::new(2, 0, 0));
        p.insert(1, 1, CoreId::new(3, 0, 0));
        let r = run(&w, &p, &ClusterSpec::default(), SimOptions::default()).unwrap();

        let creations: Vec<(u32, Nanos)> = r.messages.iter().map(|m| (m.job, m.created)).collect();
        assert_eq!(
            creations,
            vec![
                (0, 0),
                (0, 10_000_000),
                (1, 5_000_000),
                (1, 15_000_000)
            ]
        );
    }

    #[test]
    fn runs_are_deterministic() {
        let w = Workload {
            jobs: vec![JobSpec {
                id: 0,
                processes: 8,
                pattern: Pattern::AllToAll,
                length_bytes: Some(64 * KIB),
                rate_per_sec: Some(100.0),
                message_count: Some(20),
                matrix: None,
            }],
        };
        let p = crate::mapping::map_cyclic(&w, &ClusterSpec::default()).unwrap();
        for options in [
            SimOptions::default(),
            SimOptions {
                arrivals: ArrivalModel::Poisson { seed: 9 },
                ..SimOptions::default()
            },
        ] {
            let a = run(&w, &p, &ClusterSpec::default(), options).unwrap();
            let b = run(&w, &p, &ClusterSpec::default(), options).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn unplaced_process_is_rejected() {
        let w = one_edge_job(64 * KIB, 10.0, 1);
        let p = placed(&[(0, CoreId::new(0, 0, 0))]);
        assert!(matches!(
            run(&w, &p, &ClusterSpec::default(), SimOptions::default()),
            Err(crate::Error::UnplacedProcess { job: 0, process: 1 })
        ));
    }

    #[test]
    fn trace_lists_every_hop_with_header() {
        let w = one_edge_job(64 * KIB, 10.0, 2);
        let p = placed(&[(0, CoreId::new(0, 0, 0)), (1, CoreId::new(1, 0, 0))]);
        let r = run(&w, &p, &ClusterSpec::default(), SimOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_trace(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "job,src,dst,seq,length,created_ns,hop,arrival_ns,start_ns,end_ns"
        );
        assert_eq!(lines.len(), 1 + 6); // 2 messages x 3 hops
        assert_eq!(lines[1], "0,0,1,0,65536,0,egress,0,0,61035");
        assert!(lines[2].contains(",switch,"));
        assert!(lines[3].contains(",ingress,"));
    }
}
