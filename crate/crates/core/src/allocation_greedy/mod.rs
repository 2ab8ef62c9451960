//! Greedy allocation by per-minute virtual price with preemption, and its
//! exact critical values.

use std::cmp::Ordering;

use crate::model::{AuctionInstance, ConflictStructure, IntegralAllocation, Minutes};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreedyStatus {
    Unseen,
    Allocated(usize),
    Rejected,
    Preempted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyState {
    /// Request indices by descending `φ/t`, ties to higher `φ` then lower index.
    pub order: Vec<usize>,
    /// Requests currently holding each channel.
    pub occupancy: Vec<Vec<usize>>,
    pub status: Vec<GreedyStatus>,
}

impl GreedyState {
    pub fn assignment(&self) -> Vec<Option<usize>> {
        self.status
            .iter()
            .map(|s| match s {
                GreedyStatus::Allocated(j) => Some(*j),
                _ => None,
            })
            .collect()
    }
}

pub fn mgca_allocate(instance: &AuctionInstance, weights: &[f64]) -> IntegralAllocation {
    let cs = ConflictStructure::build(instance);
    let durations: Vec<Minutes> = instance.requests.iter().map(|r| r.duration).collect();
    mgca_allocate_with(&cs, &durations, weights)
}

pub fn mgca_allocate_with(conflicts: &ConflictStructure, durations: &[Minutes], weights: &[f64]) -> IntegralAllocation {
    let state = mgca_run(conflicts, durations, weights, None);
    IntegralAllocation::from_assignment(conflicts, state.assignment(), weights)
}

fn greedy_order(durations: &[Minutes], weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ea = weights[a] / durations[a] as f64;
        let eb = weights[b] / durations[b] as f64;
        eb.total_cmp(&ea)
            .then(weights[b].total_cmp(&weights[a]))
            .then(a.cmp(&b))
    });
    order
}

/// Runs the allocator; with a `watch` request, also collects every value of
/// that request's weight at which some comparison made during this run
/// would change outcome.
fn mgca_run(
    conflicts: &ConflictStructure,
    durations: &[Minutes],
    weights: &[f64],
    mut watch: Option<(usize, &mut Vec<f64>)>,
) -> GreedyState {
    let n = weights.len();
    let m = conflicts.n_channels();
    let order = greedy_order(durations, weights);
    let mut occupancy: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut status = vec![GreedyStatus::Unseen; n];

    if let Some((w, ref mut points)) = watch {
        for k in (0..n).filter(|&k| k != w) {
            points.push(weights[k] / durations[k] as f64 * durations[w] as f64);
        }
    }

    let fits = |occ: &[usize], i: usize, j: usize| {
        conflicts.eligible(i, j) && occ.iter().all(|&k| !conflicts.conflicts(i, k, j))
    };

    for (pos, &i) in order.iter().enumerate() {
        if let Some(j) = (0..m).find(|&j| fits(&occupancy[j], i, j)) {
            occupancy[j].push(i);
            status[i] = GreedyStatus::Allocated(j);
            continue;
        }
        status[i] = GreedyStatus::Rejected;
        for j in 0..m {
            if !conflicts.eligible(i, j) {
                continue;
            }
            let blocking: Vec<usize> = occupancy[j]
                .iter()
                .copied()
                .filter(|&k| conflicts.conflicts(i, k, j))
                .collect();
            let total: f64 = blocking.iter().map(|&k| weights[k]).sum();
            if let Some((w, ref mut points)) = watch {
                if w == i {
                    points.push(total);
                } else if blocking.contains(&w) {
                    points.push(weights[i] - (total - weights[w]));
                }
            }
            if total < weights[i] {
                occupancy[j].retain(|k| !blocking.contains(k));
                for &k in &blocking {
                    status[k] = GreedyStatus::Preempted;
                }
                occupancy[j].push(i);
                status[i] = GreedyStatus::Allocated(j);
                for &k in &order[..pos] {
                    if matches!(status[k], GreedyStatus::Rejected | GreedyStatus::Preempted)
                        && fits(&occupancy[j], k, j)
                    {
                        occupancy[j].push(k);
                        status[k] = GreedyStatus::Allocated(j);
                    }
                }
                break;
            }
        }
    }
    GreedyState { order, occupancy, status }
}

/// Exact critical virtual value of every winner, `None` for losers.
///
/// Between consecutive recorded thresholds the run is identical, so the
/// outcome is constant there. Starting from the winner's own weight, the
/// walk probes just below the current boundary, re-probing closer whenever
/// an unseen threshold lies in between, until it reaches a losing interval
/// or zero.
pub fn mgca_critical_values(
    conflicts: &ConflictStructure,
    durations: &[Minutes],
    weights: &[f64],
) -> Vec<Option<f64>> {
    let base = mgca_run(conflicts, durations, weights, None);
    (0..weights.len())
        .map(|i| match base.status[i] {
            GreedyStatus::Allocated(_) => Some(critical_value(conflicts, durations, weights, i)),
            _ => None,
        })
        .collect()
}

fn critical_value(conflicts: &ConflictStructure, durations: &[Minutes], weights: &[f64], i: usize) -> f64 {
    let mut w = weights.to_vec();
    let mut upper = weights[i];
    let mut probe_gap = 1e-9 * upper.abs().max(1.0);
    for _ in 0..10_000 {
        if upper <= 0.0 {
            return 0.0;
        }
        let p = (upper - probe_gap).max(0.0);
        w[i] = p;
        let mut points = Vec::new();
        let state = mgca_run(conflicts, durations, &w, Some((i, &mut points)));
        let above = points
            .iter()
            .copied()
            .filter(|&b| b > p && b < upper)
            .min_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        if let Some(b) = above {
            if upper - b > 1e-12 * upper.max(1.0) {
                probe_gap = (upper - b) / 2.0;
                continue;
            }
        }
        if !matches!(state.status[i], GreedyStatus::Allocated(_)) {
            return upper;
        }
        if p <= 0.0 {
            return 0.0;
        }
        upper = points
            .iter()
            .copied()
            .filter(|&b| b < p)
            .fold(0.0, f64::max);
        probe_gap = 1e-9 * upper.abs().max(1.0);
    }
    upper
}

/// Whether request `i` wins when its weight alone is replaced by `value`.
pub fn mgca_wins_at(conflicts: &ConflictStructure, durations: &[Minutes], weights: &[f64], i: usize, value: f64) -> bool {
    let mut w = weights.to_vec();
    w[i] = value;
    matches!(mgca_run(conflicts, durations, &w, None).status[i], GreedyStatus::Allocated(_))
}

pub fn mgca_state(conflicts: &ConflictStructure, durations: &[Minutes], weights: &[f64]) -> GreedyState {
    mgca_run(conflicts, durations, weights, None)
}
