use super::lp2::{FractionalAllocation, Lp2Model, Relaxation};
use super::rounding::{conditional_expected_weight, expected_weight};
use crate::error::Result;
use crate::model::{AuctionInstance, ConflictStructure, IntegralAllocation};
use crate::EPS;

/// Running product-form expectation: the initial value, then one entry per
/// request whose row was still positive when scanned.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DcaTrace {
    pub expectations: Vec<f64>,
}

pub fn dca_allocate(instance: &AuctionInstance, weights: &[f64]) -> Result<IntegralAllocation> {
    let cs = ConflictStructure::build(instance);
    dca_allocate_with(instance, &cs, weights, Relaxation::SliceLevel).map(|(a, _)| a)
}

pub fn dca_allocate_with(
    instance: &AuctionInstance,
    conflicts: &ConflictStructure,
    weights: &[f64],
    relaxation: Relaxation,
) -> Result<(IntegralAllocation, DcaTrace)> {
    let open = vec![super::Decision::Open; instance.n_requests()];
    let frac = Lp2Model::new(conflicts, relaxation).solve(weights, &open)?;
    Ok(dca_round(conflicts, &instance.arrival_order(), &frac, weights))
}

/// Derandomises the rounding of `frac` along `order`: each request takes
/// the first channel whose conditional expectation is at least the running
/// one, failed channels are cleared, and a request with no such channel is
/// dropped.
pub fn dca_round(
    conflicts: &ConflictStructure,
    order: &[usize],
    frac: &FractionalAllocation,
    weights: &[f64],
) -> (IntegralAllocation, DcaTrace) {
    let n = frac.n_requests();
    let m = conflicts.n_channels();
    let mut work = frac.clone();
    let mut assignment = vec![None; n];
    let mut trace = DcaTrace { expectations: vec![expected_weight(&work, weights)] };

    for &i in order {
        if work.x[i].iter().sum::<f64>() <= EPS {
            continue;
        }
        for j in 0..m {
            if work.x[i][j] <= EPS {
                continue;
            }
            let current = expected_weight(&work, weights);
            let conditional = conditional_expected_weight(&work, conflicts, i, j, weights);
            if current <= conditional + 1e-12 {
                assignment[i] = Some(j);
                work.x[i] = vec![0.0; m];
                work.x[i][j] = 1.0;
                for k in conflicts.neighbours(i, j) {
                    work.x[k][j] = 0.0;
                }
                break;
            }
            work.x[i][j] = 0.0;
        }
        if assignment[i].is_none() {
            work.x[i] = vec![0.0; m];
        }
        trace.expectations.push(expected_weight(&work, weights));
    }
    (IntegralAllocation::from_assignment(conflicts, assignment, weights), trace)
}
