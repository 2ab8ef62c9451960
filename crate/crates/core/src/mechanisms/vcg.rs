use crate::error::Result;
use crate::lp_core::solve_ip_exact_with;
use crate::model::{ConflictStructure, IntegralAllocation};

/// Externality payments: the others' best welfare without `i`, minus what
/// the others get in `chosen`.
pub fn vcg_payments(
    conflicts: &ConflictStructure,
    weights: &[f64],
    chosen: &IntegralAllocation,
    budget: u64,
) -> Result<Vec<Option<f64>>> {
    let mut out = vec![None; weights.len()];
    for i in chosen.winners() {
        let mut w = weights.to_vec();
        w[i] = 0.0;
        let without = solve_ip_exact_with(conflicts, &w, budget)?.weight;
        let others = chosen.weight - weights[i];
        out[i] = Some((without - others).max(0.0));
    }
    Ok(out)
}
