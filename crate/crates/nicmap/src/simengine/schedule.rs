//! Send timetables: when each process emits each message, and to whom.
//!
//! Pattern jobs emit at the job rate per sending process: message `k` of
//! process `i` leaves at `k / rate` (relative to the job's start) and
//! cycles over `i`'s destinations in ascending index order starting at
//! rank `i mod d`. The per-sender starting offset keeps a round of
//! simultaneous senders fanned out across receivers — with a common start
//! every all-to-all round would converge on the lowest-numbered process
//! and melt its node — and the per-edge totals still match the
//! communication matrix exactly. Explicit jobs emit per edge at the edge's
//! own rate.
//!
//! Poisson arrivals replace the fixed spacing with exponential gaps of the
//! same mean, drawn from a dedicated deterministic RNG stream per process
//! (per edge for explicit jobs), so runs with the same seed are identical
//! and adding a job never perturbs another job's timing. Destination order
//! and message counts stay as in the periodic case.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::units::{Nanos, NS_PER_SEC};
use crate::workload::{CommMatrix, JobSpec, Pattern, ProcId};
use crate::Result;

use super::ArrivalModel;

/// One message emission, relative to the job's start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Send {
    pub src: ProcId,
    pub dst: ProcId,
    pub at: Nanos,
    /// Position in the sender's emission order.
    pub seq: u64,
}

/// All sends of one job, sorted by `(src, seq)`.
pub fn job_sends(job: &JobSpec, matrix: &CommMatrix, arrivals: ArrivalModel) -> Result<Vec<Send>> {
    let mut sends = Vec::new();
    if job.pattern == Pattern::Explicit {
        for src in 0..matrix.processes() {
            let mut mine: Vec<(Nanos, ProcId)> = Vec::new();
            for (dst, load) in matrix.out_edges(src) {
                let times = emission_times(
                    load.count,
                    load.rate,
                    arrivals,
                    stream_seed(job.id, src, dst),
                );
                mine.extend(times.into_iter().map(|t| (t, dst)));
            }
            mine.sort_unstable();
            sends.extend(mine.into_iter().enumerate().map(|(seq, (at, dst))| Send {
                src,
                dst,
                at,
                seq: seq as u64,
            }));
        }
        return Ok(sends);
    }

    let rate = job.rate_per_sec.unwrap_or(0.0);
    let count = job.message_count.unwrap_or(0);
    for src in 0..matrix.processes() {
        let dsts: Vec<ProcId> = matrix.out_edges(src).map(|(d, _)| d).collect();
        if dsts.is_empty() {
            continue;
        }
        let times = emission_times(count, rate, arrivals, stream_seed(job.id, src, ProcId::MAX));
        let phase = src as usize % dsts.len();
        sends.extend(times.into_iter().enumerate().map(|(k, at)| Send {
            src,
            dst: dsts[(phase + k) % dsts.len()],
            at,
            seq: k as u64,
        }));
    }
    Ok(sends)
}

/// `count` emission instants at `rate` per second: multiples of the period
/// for periodic arrivals, a Poisson process of the same rate otherwise.
/// Times are nondecreasing either way.
fn emission_times(count: u64, rate: f64, arrivals: ArrivalModel, stream: u64) -> Vec<Nanos> {
    let period = NS_PER_SEC as f64 / rate;
    match arrivals {
        ArrivalModel::Periodic => (0..count).map(|k| (k as f64 * period).round() as Nanos).collect(),
        ArrivalModel::Poisson { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream);
            let exp = Exp::new(1.0).expect("unit rate is valid");
            let mut at = 0.0;
            (0..count)
                .map(|_| {
                    at += exp.sample(&mut rng) * period;
                    at.round() as Nanos
                })
                .collect()
        }
    }
}

/// Mixes a job/process/edge identity into a seed offset so every emission
/// stream is independent of the others (splitmix-style finalizer).
fn stream_seed(job: u32, src: ProcId, dst: ProcId) -> u64 {
    let mut x = ((job as u64) << 40) ^ ((src as u64) << 20) ^ dst as u64;
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::KIB;

    fn job(pattern: Pattern, processes: u32, rate: f64, count: u64) -> JobSpec {
        JobSpec {
            id: 0,
            processes,
            pattern,
            length_bytes: Some(64 * KIB),
            rate_per_sec: Some(rate),
            message_count: Some(count),
            matrix: None,
        }
    }

    #[test]
    fn periodic_sends_sit_on_the_rate_grid() {
        let j = job(Pattern::Linear, 3, 100.0, 5);
        let m = j.comm_matrix().unwrap();
        let sends = job_sends(&j, &m, ArrivalModel::Periodic).unwrap();
        // Senders 0 and 1, five messages each, every 10 ms.
        assert_eq!(sends.len(), 10);
        let first: Vec<Nanos> = sends.iter().filter(|s| s.src == 0).map(|s| s.at).collect();
        assert_eq!(first, vec![0, 10_000_000, 20_000_000, 30_000_000, 40_000_000]);
        assert!(sends.iter().filter(|s| s.src == 0).all(|s| s.dst == 1));
    }

    #[test]
    fn destinations_rotate_in_ascending_order_from_the_senders_offset() {
        let j = job(Pattern::AllToAll, 4, 100.0, 7);
        let m = j.comm_matrix().unwrap();
        let sends = job_sends(&j, &m, ArrivalModel::Periodic).unwrap();
        let dsts_of = |src: ProcId| -> Vec<ProcId> {
            sends.iter().filter(|s| s.src == src).map(|s| s.dst).collect()
        };
        // Process 2 cycles {0, 1, 3} starting at rank 2 % 3 = 2.
        assert_eq!(dsts_of(2), vec![3, 0, 1, 3, 0, 1, 3]);
        // Process 0 starts at rank 0; process 3 at rank 3 % 3 = 0.
        assert_eq!(dsts_of(0), vec![1, 2, 3, 1, 2, 3, 1]);
        assert_eq!(dsts_of(3), vec![0, 1, 2, 0, 1, 2, 0]);
        // The opening round is a derangement: no receiver is hit twice.
        let mut first_round: Vec<ProcId> = (0..4).map(|s| dsts_of(s)[0]).collect();
        first_round.sort_unstable();
        first_round.dedup();
        assert_eq!(first_round.len(), 4);
    }

    #[test]
    fn send_counts_match_the_matrix_on_every_edge() {
        let j = job(Pattern::AllToAll, 5, 100.0, 11);
        let m = j.comm_matrix().unwrap();
        for arrivals in [ArrivalModel::Periodic, ArrivalModel::Poisson { seed: 7 }] {
            let sends = job_sends(&j, &m, arrivals).unwrap();
            for (src, dst, load) in m.edges() {
                let sent = sends.iter().filter(|s| s.src == src && s.dst == dst).count();
                assert_eq!(sent as u64, load.count, "edge {src}->{dst}");
            }
        }
    }

    #[test]
    fn explicit_jobs_follow_per_edge_rates() {
        let j = JobSpec {
            id: 1,
            processes: 3,
            pattern: Pattern::Explicit,
            length_bytes: None,
            rate_per_sec: None,
            message_count: None,
            matrix: Some(vec![
                crate::workload::EdgeSpec {
                    src: 0,
                    dst: 1,
                    length_bytes: KIB,
                    rate_per_sec: 1000.0,
                    count: 3,
                },
                crate::workload::EdgeSpec {
                    src: 0,
                    dst: 2,
                    length_bytes: KIB,
                    rate_per_sec: 500.0,
                    count: 2,
                },
            ]),
        };
        let m = j.comm_matrix().unwrap();
        let sends = job_sends(&j, &m, ArrivalModel::Periodic).unwrap();
        // Merged per-sender order: (0ms,1), (0ms,2), (1ms,1), (2ms,1|2)...
        let view: Vec<(Nanos, ProcId, u64)> = sends.iter().map(|s| (s.at, s.dst, s.seq)).collect();
        assert_eq!(
            view,
            vec![
                (0, 1, 0),
                (0, 2, 1),
                (1_000_000, 1, 2),
                (2_000_000, 1, 3),
                (2_000_000, 2, 4),
            ]
        );
    }

    #[test]
    fn poisson_times_are_deterministic_per_seed_and_monotone() {
        let j = job(Pattern::AllToAll, 4, 100.0, 50);
        let m = j.comm_matrix().unwrap();
        let a = job_sends(&j, &m, ArrivalModel::Poisson { seed: 42 }).unwrap();
        let b = job_sends(&j, &m, ArrivalModel::Poisson { seed: 42 }).unwrap();
        let c = job_sends(&j, &m, ArrivalModel::Poisson { seed: 43 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for src in 0..4 {
            let times: Vec<Nanos> = a.iter().filter(|s| s.src == src).map(|s| s.at).collect();
            assert!(times.windows(2).all(|w| w[0] <= w[1]));
        }
        // Mean gap should sit near the configured period (10 ms +- 30%).
        let times: Vec<Nanos> = a.iter().filter(|s| s.src == 0).map(|s| s.at).collect();
        let mean_gap = *times.last().unwrap() as f64 / (times.len() - 1) as f64;
        assert!((7e6..13e6).contains(&mean_gap), "mean gap {mean_gap}");
    }
}
