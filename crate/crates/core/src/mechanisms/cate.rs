use std::collections::HashSet;
use std::f64::consts::E;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::allocation_greedy::mgca_allocate_with;
use crate::allocation_lp::{dca_round, Decision, FractionalAllocation, Lp2Model};
use crate::error::{AuctionError, Result};
use crate::lp_core::{solve_ip_exact_with, solve_lp, LinearProgram, Relation};
use crate::model::{AuctionInstance, IntegralAllocation, Minutes};
use crate::EPS;

/// Most columns the decomposition will hold before giving up.
pub const MAX_COLUMNS: usize = 500;

/// Support size up to which the exact solver joins the separation oracles.
const EXACT_SEPARATION_LIMIT: usize = 12;

const EXACT_SEPARATION_BUDGET: u64 = 2_000_000;

/// Scaling factor `e / (e − 1)` between the relaxation and the lottery.
pub fn alpha() -> f64 {
    E / (E - 1.0)
}

/// A lottery over integral allocations whose win probabilities are the
/// fractional ones scaled down by `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CateDecomposition {
    pub columns: Vec<IntegralAllocation>,
    pub probabilities: Vec<f64>,
    pub alpha: f64,
    /// Largest deviation from the target win probabilities.
    pub residual: f64,
}

impl CateDecomposition {
    pub fn win_probability(&self, i: usize) -> f64 {
        self.columns
            .iter()
            .zip(&self.probabilities)
            .filter(|(c, _)| c.is_winner(i))
            .map(|(_, q)| q)
            .sum()
    }

    pub fn expected_weight(&self) -> f64 {
        self.columns.iter().zip(&self.probabilities).map(|(c, q)| q * c.weight).sum()
    }

    /// Index of the column picked by one uniform draw.
    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (k, q) in self.probabilities.iter().enumerate() {
            acc += q;
            if u < acc {
                return k;
            }
        }
        self.probabilities.len().saturating_sub(1)
    }
}

fn winner_key(assignment: &[Option<usize>]) -> Vec<usize> {
    assignment.iter().enumerate().filter_map(|(i, a)| a.map(|_| i)).collect()
}

/// Column generation on the restricted covering program. The dual side
/// `max z + Σ (x_i/α) w_i` over the current columns is solved directly,
/// and its `w` is handed to DCA, MGCA and (on small supports) the exact
/// solver to look for a violated column.
pub fn cate_decompose(
    instance: &AuctionInstance,
    model: &Lp2Model,
    frac: &FractionalAllocation,
    weights: &[f64],
) -> Result<CateDecomposition> {
    let cs = model.conflicts();
    let n = frac.n_requests();
    let m = cs.n_channels();
    let a = alpha();
    let x: Vec<f64> = frac.x.iter().map(|row| row.iter().sum::<f64>().min(1.0)).collect();
    let support: Vec<usize> = (0..n).filter(|&i| x[i] > EPS).collect();
    let in_support: Vec<bool> = (0..n).map(|i| x[i] > EPS).collect();
    let order = instance.arrival_order();
    let durations: Vec<Minutes> = instance.requests.iter().map(|r| r.duration).collect();

    let mut columns: Vec<Vec<Option<usize>>> = Vec::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut push = |columns: &mut Vec<Vec<Option<usize>>>, mut col: Vec<Option<usize>>, keep: &dyn Fn(usize) -> bool| {
        for (i, c) in col.iter_mut().enumerate() {
            if !keep(i) {
                *c = None;
            }
        }
        if seen.insert(winner_key(&col)) {
            columns.push(col);
            true
        } else {
            false
        }
    };

    push(&mut columns, vec![None; n], &|_| true);
    let seed = dca_round(cs, &order, frac, weights).0.assignment;
    push(&mut columns, seed, &|i| in_support[i]);
    for &i in &support {
        let j = (0..m)
            .max_by(|&p, &q| frac.x[i][p].total_cmp(&frac.x[i][q]).then(q.cmp(&p)))
            .unwrap_or(0);
        let mut col = vec![None; n];
        col[i] = Some(j);
        push(&mut columns, col, &|_| true);
    }

    while columns.len() < MAX_COLUMNS {
        let mut dual = LinearProgram::new(0);
        let z = dual.add_var(1.0, 0.0, f64::INFINITY);
        let mut var = vec![usize::MAX; n];
        for &i in &support {
            var[i] = dual.add_var(x[i] / a, f64::NEG_INFINITY, f64::INFINITY);
        }
        for col in &columns {
            let mut row = vec![(z, 1.0)];
            row.extend(winner_key(col).into_iter().map(|i| (var[i], 1.0)));
            dual.add_constraint(row, Relation::Le, 1.0);
        }
        let sol = solve_lp(&dual)?;
        if !sol.is_optimal() {
            return Err(AuctionError::Internal(format!("restricted dual reported {:?}", sol.status)));
        }
        if sol.objective_value <= 1.0 + 1e-10 {
            break;
        }
        let zv = sol.values[z];
        let mut w = vec![0.0; n];
        for &i in &support {
            w[i] = sol.values[var[i]];
        }
        let w_plus: Vec<f64> = w.iter().map(|v| v.max(0.0)).collect();

        let open = vec![Decision::Open; n];
        let mut candidates = Vec::new();
        let relaxed = model.solve(&w_plus, &open)?;
        candidates.push(dca_round(cs, &order, &relaxed, &w_plus).0.assignment);
        candidates.push(mgca_allocate_with(cs, &durations, &w_plus).assignment);
        if support.len() <= EXACT_SEPARATION_LIMIT {
            if let Ok(best) = solve_ip_exact_with(cs, &w_plus, EXACT_SEPARATION_BUDGET) {
                candidates.push(best.assignment);
            }
        }
        let mut added = false;
        for cand in candidates {
            let keep = |i: usize| in_support[i] && w[i] >= 0.0;
            let value = zv + winner_key(&cand).iter().filter(|&&i| keep(i)).map(|&i| w[i]).sum::<f64>();
            if value > 1.0 + 1e-9 && push(&mut columns, cand, &keep) {
                added = true;
            }
        }
        if !added {
            break;
        }
    }

    // Minimum total mass covering x/α exactly, with Σq ≥ 1. The empty column
    // is made marginally cheaper so that ties go to the sparsest lottery.
    let mut primal = LinearProgram::new(0);
    let q: Vec<usize> = columns
        .iter()
        .map(|col| {
            let cost = if col.iter().all(Option::is_none) { -(1.0 - 1e-7) } else { -1.0 };
            primal.add_var(cost, 0.0, f64::INFINITY)
        })
        .collect();
    for &i in &support {
        let row = columns
            .iter()
            .zip(&q)
            .filter(|(col, _)| col[i].is_some())
            .map(|(_, &v)| (v, 1.0))
            .collect();
        primal.add_constraint(row, Relation::Eq, x[i] / a);
    }
    primal.add_constraint(q.iter().map(|&v| (v, 1.0)).collect(), Relation::Ge, 1.0);
    let sol = solve_lp(&primal)?;
    if !sol.is_optimal() {
        return Err(AuctionError::Internal(format!("restricted covering program reported {:?}", sol.status)));
    }
    let total: f64 = q.iter().map(|&v| sol.values[v].max(0.0)).sum();

    let mut kept = Vec::new();
    let mut probabilities = Vec::new();
    for (col, &v) in columns.into_iter().zip(&q) {
        let p = sol.values[v].max(0.0) / total;
        if p > 1e-12 {
            kept.push(IntegralAllocation::from_assignment(cs, col, weights));
            probabilities.push(p);
        }
    }
    let mut decomposition = CateDecomposition { columns: kept, probabilities, alpha: a, residual: 0.0 };
    decomposition.residual = (0..n)
        .map(|i| (decomposition.win_probability(i) - x[i] / a).abs())
        .fold(0.0, f64::max);
    if decomposition.residual > 1e-6 {
        return Err(AuctionError::Decomposition { residual: decomposition.residual });
    }
    Ok(decomposition)
}

/// Externality charge of `i` on the relaxation, per unit of its fractional
/// allocation: the others' optimum with `i`'s weight zeroed, minus the
/// others' share of `frac`.
pub fn cate_payment(model: &Lp2Model, frac: &FractionalAllocation, weights: &[f64], i: usize) -> Result<f64> {
    let xi: f64 = frac.x[i].iter().sum();
    if xi <= EPS {
        return Err(AuctionError::UndefinedPayment(i));
    }
    let mut w = weights.to_vec();
    w[i] = 0.0;
    let open = vec![Decision::Open; weights.len()];
    let others_best = model.solve(&w, &open)?.weight;
    let others_now = frac.weight - weights[i] * xi;
    Ok((others_best - others_now) / xi)
}
