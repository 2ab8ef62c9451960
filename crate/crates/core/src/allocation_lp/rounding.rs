use rand::seq::SliceRandom;
use rand::Rng;

use super::lp2::FractionalAllocation;
use crate::model::{ConflictStructure, IntegralAllocation};
use crate::EPS;

/// `q_i = 1 − Π_j (1 − x_{i,j})`.
pub fn allocation_probability(frac: &FractionalAllocation, i: usize) -> f64 {
    row_probability(&frac.x[i], None)
}

fn row_probability(row: &[f64], skip: Option<usize>) -> f64 {
    let miss: f64 = row
        .iter()
        .enumerate()
        .filter(|&(o, _)| Some(o) != skip)
        .map(|(_, &x)| 1.0 - x)
        .product();
    1.0 - miss
}

/// Probability that `k` wins given `i` has been placed on channel `j`.
pub fn conditional_probability(
    frac: &FractionalAllocation,
    conflicts: &ConflictStructure,
    i: usize,
    j: usize,
    k: usize,
) -> f64 {
    if conflicts.conflicts(i, k, j) {
        row_probability(&frac.x[k], Some(j))
    } else {
        allocation_probability(frac, k)
    }
}

/// `Σ_i φ_i q_i`.
pub fn expected_weight(frac: &FractionalAllocation, weights: &[f64]) -> f64 {
    (0..frac.n_requests())
        .map(|i| weights[i] * allocation_probability(frac, i))
        .sum()
}

/// Expected weight after placing `i` on `j`, with every other request
/// following the product-form retention model.
pub fn conditional_expected_weight(
    frac: &FractionalAllocation,
    conflicts: &ConflictStructure,
    i: usize,
    j: usize,
    weights: &[f64],
) -> f64 {
    weights[i]
        + (0..frac.n_requests())
            .filter(|&k| k != i)
            .map(|k| weights[k] * conditional_probability(frac, conflicts, i, j, k))
            .sum::<f64>()
}

/// Visits the positive `(channel, request)` pairs in random order and keeps
/// request `i` on channel `j` with probability `x_{i,j}` unless an earlier
/// acceptance already decided it. Each acceptance clears the conflicting
/// requests on that channel and the winner's other channels.
pub fn randomized_round(
    conflicts: &ConflictStructure,
    frac: &FractionalAllocation,
    weights: &[f64],
    rng: &mut impl Rng,
) -> IntegralAllocation {
    let n = frac.n_requests();
    let m = conflicts.n_channels();
    let mut pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|j| (0..n).map(move |i| (j, i)))
        .filter(|&(j, i)| frac.x[i][j] > EPS)
        .collect();
    pairs.shuffle(rng);

    let mut alive = vec![true; n * m];
    let mut assignment = vec![None; n];
    for (j, i) in pairs {
        if assignment[i].is_some() || !alive[i * m + j] {
            continue;
        }
        if rng.gen::<f64>() < frac.x[i][j] {
            assignment[i] = Some(j);
            for k in conflicts.neighbours(i, j) {
                alive[k * m + j] = false;
            }
            for o in 0..m {
                alive[i * m + o] = false;
            }
        }
    }
    IntegralAllocation::from_assignment(conflicts, assignment, weights)
}
