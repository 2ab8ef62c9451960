use crate::allocation_lp::{mdca_wins, Lp2Model};
use crate::error::Result;

/// Smallest winning weight for `winner` under MDCA, by bisection on
/// `[floor, weights[winner]]`. Each probe re-runs the allocator, so the cost
/// grows with `log(range / resolution)` full runs. A crossing within one
/// resolution step of the floor is reported as the floor itself, which is
/// where an uncontested winner's price belongs.
pub fn mdca_critical_payment(
    model: &Lp2Model,
    order: &[usize],
    weights: &[f64],
    winner: usize,
    floor: f64,
    resolution: f64,
) -> Result<f64> {
    let mut w = weights.to_vec();
    let mut hi = weights[winner];
    let mut lo = floor.min(hi);
    w[winner] = lo;
    if mdca_wins(model, order, &w, winner)? {
        return Ok(lo);
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        w[winner] = mid;
        if mdca_wins(model, order, &w, winner)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi - floor <= resolution {
        return Ok(floor.min(weights[winner]));
    }
    Ok(hi)
}
