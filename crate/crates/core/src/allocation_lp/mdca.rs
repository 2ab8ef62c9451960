use super::lp2::{Decision, FractionalAllocation, Lp2Model, Relaxation};
use crate::error::Result;
use crate::model::{AuctionInstance, ConflictStructure, IntegralAllocation};
use crate::EPS;

pub fn mdca_allocate(instance: &AuctionInstance, weights: &[f64]) -> Result<IntegralAllocation> {
    let cs = ConflictStructure::build(instance);
    let model = Lp2Model::new(&cs, Relaxation::SliceLevel);
    mdca_allocate_with(&model, &instance.arrival_order(), weights)
}

pub fn mdca_allocate_with(model: &Lp2Model, order: &[usize], weights: &[f64]) -> Result<IntegralAllocation> {
    let decisions = mdca_scan(model, order, weights, None)?;
    let assignment = decisions
        .iter()
        .map(|d| match d {
            Decision::Assigned(j) => Some(*j),
            _ => None,
        })
        .collect();
    Ok(IntegralAllocation::from_assignment(model.conflicts(), assignment, weights))
}

/// Whether `target` wins under MDCA; the scan stops once it is decided.
pub fn mdca_wins(model: &Lp2Model, order: &[usize], weights: &[f64], target: usize) -> Result<bool> {
    let decisions = mdca_scan(model, order, weights, Some(target))?;
    Ok(matches!(decisions[target], Decision::Assigned(_)))
}

/// Each request with positive mass in the current optimum is committed to
/// the channel whose re-solved relaxation is largest, provided that beats
/// the relaxation with the request removed.
fn mdca_scan(
    model: &Lp2Model,
    order: &[usize],
    weights: &[f64],
    stop_after: Option<usize>,
) -> Result<Vec<Decision>> {
    let cs = model.conflicts();
    let m = cs.n_channels();
    let mut decisions = vec![Decision::Open; cs.n_requests()];
    let mut current = model.solve(weights, &decisions)?;

    for &i in order {
        if current.x[i].iter().all(|&v| v <= EPS) {
            decisions[i] = Decision::Rejected;
        } else {
            decisions[i] = Decision::Rejected;
            let without = model.solve(weights, &decisions)?;
            let mut best: Option<(usize, FractionalAllocation)> = None;
            for j in 0..m {
                let blocked = decisions
                    .iter()
                    .enumerate()
                    .any(|(k, d)| *d == Decision::Assigned(j) && cs.conflicts(i, k, j));
                if !cs.eligible(i, j) || blocked {
                    continue;
                }
                decisions[i] = Decision::Assigned(j);
                let with = model.solve(weights, &decisions)?;
                if best.as_ref().is_none_or(|(_, b)| with.weight > b.weight + EPS) {
                    best = Some((j, with));
                }
            }
            match best {
                Some((j, with)) if with.weight >= without.weight - EPS => {
                    decisions[i] = Decision::Assigned(j);
                    current = with;
                }
                _ => {
                    decisions[i] = Decision::Rejected;
                    current = without;
                }
            }
        }
        if stop_after == Some(i) {
            break;
        }
    }
    Ok(decisions)
}

