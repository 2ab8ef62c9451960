use crate::error::{AuctionError, Result};
use crate::model::{AuctionInstance, ConflictStructure, IntegralAllocation};

pub type ExactAllocation = IntegralAllocation;

pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;

pub fn solve_ip_exact(instance: &AuctionInstance, weights: &[f64]) -> Result<ExactAllocation> {
    let conflicts = ConflictStructure::build(instance);
    solve_ip_exact_with(&conflicts, weights, DEFAULT_NODE_BUDGET)
}

/// Depth-first branch and bound over requests in index order. Each request
/// tries its channels in ascending order before being left out, and the
/// incumbent is replaced only on strict improvement, so ties resolve toward
/// lower request and channel indices. Requests with non-positive weight are
/// never assigned.
pub fn solve_ip_exact_with(
    conflicts: &ConflictStructure,
    weights: &[f64],
    node_budget: u64,
) -> Result<ExactAllocation> {
    let n = conflicts.n_requests();
    if weights.len() != n {
        return Err(AuctionError::Internal(format!(
            "{} weights for {} requests",
            weights.len(),
            n
        )));
    }
    let mut suffix = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1] + weights[i].max(0.0);
    }
    let mut search = Search {
        conflicts,
        weights,
        suffix,
        current: vec![None; n],
        best: vec![None; n],
        best_weight: 0.0,
        nodes: 0,
        budget: node_budget,
    };
    search.visit(0, 0.0)?;
    Ok(IntegralAllocation::from_assignment(conflicts, search.best, weights))
}

struct Search<'a> {
    conflicts: &'a ConflictStructure,
    weights: &'a [f64],
    suffix: Vec<f64>,
    current: Vec<Option<usize>>,
    best: Vec<Option<usize>>,
    best_weight: f64,
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    fn visit(&mut self, i: usize, value: f64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(AuctionError::BudgetExceeded { budget: self.budget });
        }
        if value + self.suffix[i] <= self.best_weight + 1e-12 {
            return Ok(());
        }
        if i == self.current.len() {
            self.best_weight = value;
            self.best.clone_from(&self.current);
            return Ok(());
        }
        if self.weights[i] > 0.0 {
            for j in 0..self.conflicts.n_channels() {
                if self.fits(i, j) {
                    self.current[i] = Some(j);
                    self.visit(i + 1, value + self.weights[i])?;
                    self.current[i] = None;
                }
            }
        }
        self.visit(i + 1, value)
    }

    fn fits(&self, i: usize, j: usize) -> bool {
        self.conflicts.eligible(i, j)
            && (0..i).all(|k| self.current[k] != Some(j) || !self.conflicts.conflicts(i, k, j))
    }
}
