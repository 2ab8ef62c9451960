use std::fmt;

use serde::{Deserialize, Serialize};

use super::conflict::ConflictStructure;
use super::instance::AuctionInstance;

/// A feasible integral solution: each winner holds one channel for its whole
/// window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralAllocation {
    /// Channel index per request, `None` for losers.
    pub assignment: Vec<Option<usize>>,
    /// Slice indices (on the assigned channel) per request; empty for losers.
    pub schedule: Vec<Vec<usize>>,
    /// Sum of the winners' weights.
    pub weight: f64,
}

impl IntegralAllocation {
    pub fn empty(n: usize) -> Self {
        Self {
            assignment: vec![None; n],
            schedule: vec![Vec::new(); n],
            weight: 0.0,
        }
    }

    /// Fills in the forced schedule (the request's window slices) and weight.
    pub fn from_assignment(
        conflicts: &ConflictStructure,
        assignment: Vec<Option<usize>>,
        weights: &[f64],
    ) -> Self {
        let schedule = assignment
            .iter()
            .enumerate()
            .map(|(i, a)| match a.and_then(|j| conflicts.window(i, j)) {
                Some(range) => range.iter().collect(),
                None => Vec::new(),
            })
            .collect();
        let weight = assignment
            .iter()
            .zip(weights)
            .filter(|(a, _)| a.is_some())
            .map(|(_, w)| *w)
            .sum();
        Self {
            assignment,
            schedule,
            weight,
        }
    }

    pub fn is_winner(&self, i: usize) -> bool {
        self.assignment[i].is_some()
    }

    pub fn winners(&self) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.map(|_| i))
    }

    pub fn n_winners(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    /// Re-evaluates the weight under another weight vector.
    pub fn weight_under(&self, weights: &[f64]) -> f64 {
        self.winners().map(|i| weights[i]).sum()
    }

    /// Drops the winners for which `keep` is false.
    pub fn retain(&mut self, weights: &[f64], mut keep: impl FnMut(usize) -> bool) {
        for i in 0..self.assignment.len() {
            if self.assignment[i].is_some() && !keep(i) {
                self.assignment[i] = None;
                self.schedule[i].clear();
            }
        }
        self.weight = self.weight_under(weights);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityViolation {
    WrongLength,
    UnknownChannel { request: usize, channel: usize },
    Ineligible { request: usize, channel: usize },
    Conflict { first: usize, second: usize, channel: usize },
    ScheduleMismatch { request: usize },
    DurationMismatch { request: usize, scheduled: i64, duration: i64 },
    LoserScheduled { request: usize },
}

impl fmt::Display for FeasibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Independent check of an integral allocation against the instance geometry:
/// eligibility, pairwise conflict freedom per channel, and an exact schedule
/// covering each winner's window.
pub fn check_feasibility(
    instance: &AuctionInstance,
    conflicts: &ConflictStructure,
    allocation: &IntegralAllocation,
) -> Result<(), FeasibilityViolation> {
    let n = instance.n_requests();
    if allocation.assignment.len() != n || allocation.schedule.len() != n {
        return Err(FeasibilityViolation::WrongLength);
    }

    for i in 0..n {
        let Some(j) = allocation.assignment[i] else {
            if !allocation.schedule[i].is_empty() {
                return Err(FeasibilityViolation::LoserScheduled { request: i });
            }
            continue;
        };
        if j >= instance.n_channels() {
            return Err(FeasibilityViolation::UnknownChannel { request: i, channel: j });
        }
        if !instance.is_eligible(i, j) {
            return Err(FeasibilityViolation::Ineligible { request: i, channel: j });
        }

        let r = &instance.requests[i];
        let slices = conflicts.slices(j);
        let sched = &allocation.schedule[i];
        if sched.is_empty() || sched.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(FeasibilityViolation::ScheduleMismatch { request: i });
        }
        let (first, last) = (sched[0], *sched.last().unwrap());
        if last >= slices.len()
            || slices[first].start != r.arrival
            || slices[last].end != r.deadline
        {
            return Err(FeasibilityViolation::ScheduleMismatch { request: i });
        }
        let scheduled: i64 = sched.iter().map(|&l| slices[l].len()).sum();
        if scheduled != r.duration {
            return Err(FeasibilityViolation::DurationMismatch {
                request: i,
                scheduled,
                duration: r.duration,
            });
        }

        for k in (i + 1)..n {
            if allocation.assignment[k] == Some(j)
                && r.overlaps(&instance.requests[k])
                && instance.interferes(i, k, j)
            {
                return Err(FeasibilityViolation::Conflict { first: i, second: k, channel: j });
            }
        }
    }
    Ok(())
}
