use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::cliques::maximal_cliques;
use crate::error::{AuctionError, Result};
use crate::lp_core::{solve_lp, LinearProgram, Relation};
use crate::model::{AuctionInstance, ConflictStructure};

/// Which form of the relaxation to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relaxation {
    /// Per-slice variables, each tied to its channel variable, with one
    /// packing row per clique of each slice.
    #[default]
    SliceLevel,
    /// Per-slice variables tied to the channel variable only through the
    /// duration-weighted sum, so a request may hold different fractions of
    /// different slices.
    SliceAggregate,
    /// Slice variables substituted by the channel variable (windows are
    /// fixed), packing rows over cliques of each channel's conflict graph.
    WindowLevel,
}

/// Commitment state of a request while an allocator works through the
/// instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Open,
    Assigned(usize),
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceShare {
    pub request: usize,
    pub channel: usize,
    pub slice: usize,
    pub value: f64,
}

/// An optimum of the relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalAllocation {
    /// `x[i][j]`.
    pub x: Vec<Vec<f64>>,
    pub slice_x: Vec<SliceShare>,
    pub x_row_sum: Vec<f64>,
    pub weight: f64,
}

impl FractionalAllocation {
    pub fn zero(n: usize, m: usize) -> Self {
        Self {
            x: vec![vec![0.0; m]; n],
            slice_x: Vec::new(),
            x_row_sum: vec![0.0; n],
            weight: 0.0,
        }
    }

    pub fn n_requests(&self) -> usize {
        self.x.len()
    }

    /// Builds the allocation from `x` alone, spreading each `x[i][j]` evenly
    /// over the request's window slices.
    pub fn from_x(conflicts: &ConflictStructure, x: Vec<Vec<f64>>, weights: &[f64]) -> Self {
        let mut slice_x = Vec::new();
        for (i, row) in x.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > 0.0 {
                    if let Some(w) = conflicts.window(i, j) {
                        slice_x.extend(w.iter().map(|l| SliceShare { request: i, channel: j, slice: l, value: v }));
                    }
                }
            }
        }
        let x_row_sum: Vec<f64> = x.iter().map(|r| r.iter().sum()).collect();
        let weight = x_row_sum.iter().zip(weights).map(|(s, w)| s * w).sum();
        Self { x, slice_x, x_row_sum, weight }
    }
}

struct CliqueRow {
    channel: usize,
    slice: Option<usize>,
    members: Vec<usize>,
}

/// The relaxation of one instance, with clique structure precomputed so
/// that repeated solves under different weights or commitments only
/// restrict it.
pub struct Lp2Model<'a> {
    conflicts: &'a ConflictStructure,
    relaxation: Relaxation,
    cliques: Vec<CliqueRow>,
}

/// A built program together with its variable layout.
pub struct Lp2Program {
    pub lp: LinearProgram,
    /// Variable index of `x[i][j]`, flattened as `i * m + j`.
    pub x_var: Vec<Option<usize>>,
    /// `(request, channel, slice, variable)`.
    pub slice_var: Vec<(usize, usize, usize, usize)>,
    /// Objective contribution of committed winners.
    pub constant: f64,
}

impl<'a> Lp2Model<'a> {
    pub fn new(conflicts: &'a ConflictStructure, relaxation: Relaxation) -> Self {
        let n = conflicts.n_requests();
        let m = conflicts.n_channels();
        let mut cliques = Vec::new();
        for j in 0..m {
            let adjacent = |a: usize, b: usize| conflicts.conflicts(a, b, j);
            match relaxation {
                Relaxation::WindowLevel => {
                    let eligible: Vec<usize> = (0..n).filter(|&i| conflicts.eligible(i, j)).collect();
                    for members in maximal_cliques(&eligible, adjacent) {
                        if members.len() > 1 {
                            cliques.push(CliqueRow { channel: j, slice: None, members });
                        }
                    }
                }
                Relaxation::SliceLevel | Relaxation::SliceAggregate => {
                    let mut cache: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
                    for l in 0..conflicts.slices(j).len() {
                        let active: Vec<usize> = (0..n)
                            .filter(|&i| conflicts.window(i, j).is_some_and(|w| w.contains(l)))
                            .collect();
                        let found = cache
                            .entry(active.clone())
                            .or_insert_with(|| maximal_cliques(&active, adjacent));
                        for members in found.iter() {
                            if members.len() > 1 {
                                cliques.push(CliqueRow { channel: j, slice: Some(l), members: members.clone() });
                            }
                        }
                    }
                }
            }
        }
        Self { conflicts, relaxation, cliques }
    }

    pub fn conflicts(&self) -> &'a ConflictStructure {
        self.conflicts
    }

    pub fn relaxation(&self) -> Relaxation {
        self.relaxation
    }

    /// Requests with non-positive weight get no variables; they can only
    /// lower the objective. Committed winners contribute a constant and
    /// block every conflicting `(request, channel)` pair.
    pub fn build(&self, weights: &[f64], decisions: &[Decision]) -> Lp2Program {
        let cs = self.conflicts;
        let n = cs.n_requests();
        let m = cs.n_channels();
        let mut blocked = vec![false; n * m];
        let mut constant = 0.0;
        for (a, d) in decisions.iter().enumerate() {
            if let Decision::Assigned(j) = *d {
                constant += weights[a];
                for k in cs.neighbours(a, j) {
                    blocked[k * m + j] = true;
                }
            }
        }

        let mut lp = LinearProgram::new(0);
        let mut x_var = vec![None; n * m];
        for i in 0..n {
            if decisions[i] != Decision::Open || weights[i] <= 0.0 {
                continue;
            }
            for j in 0..m {
                if cs.eligible(i, j) && !blocked[i * m + j] {
                    x_var[i * m + j] = Some(lp.add_var(weights[i], 0.0, 1.0));
                }
            }
        }
        for i in 0..n {
            let vars: Vec<(usize, f64)> = x_var[i * m..(i + 1) * m].iter().flatten().map(|&v| (v, 1.0)).collect();
            if vars.len() > 1 {
                lp.add_constraint(vars, Relation::Le, 1.0);
            }
        }

        let mut slice_var = Vec::new();
        let mut slice_lookup: HashMap<(usize, usize, usize), usize> = HashMap::new();
        if self.relaxation != Relaxation::WindowLevel {
            let linked = self.relaxation == Relaxation::SliceLevel;
            for i in 0..n {
                for j in 0..m {
                    let Some(xv) = x_var[i * m + j] else { continue };
                    let w = cs.window(i, j).expect("eligible request has a window");
                    let slices = cs.slices(j);
                    let mut row = Vec::with_capacity(w.len() + 1);
                    let mut duration = 0;
                    for l in w.iter() {
                        let v = lp.add_var(0.0, 0.0, 1.0);
                        slice_var.push((i, j, l, v));
                        slice_lookup.insert((i, j, l), v);
                        row.push((v, slices[l].len() as f64));
                        duration += slices[l].len();
                        if linked {
                            lp.add_constraint(vec![(v, 1.0), (xv, -1.0)], Relation::Eq, 0.0);
                        }
                    }
                    if !linked {
                        row.push((xv, -(duration as f64)));
                        lp.add_constraint(row, Relation::Eq, 0.0);
                    }
                }
            }
        }

        let mut seen: HashSet<(usize, Option<usize>, Vec<usize>)> = HashSet::new();
        for c in &self.cliques {
            let live: Vec<usize> = c
                .members
                .iter()
                .copied()
                .filter(|&i| x_var[i * m + c.channel].is_some())
                .collect();
            if live.len() < 2 || !seen.insert((c.channel, c.slice, live.clone())) {
                continue;
            }
            let row = live
                .iter()
                .map(|&i| {
                    let v = match c.slice {
                        Some(l) => slice_lookup[&(i, c.channel, l)],
                        None => x_var[i * m + c.channel].unwrap(),
                    };
                    (v, 1.0)
                })
                .collect();
            lp.add_constraint(row, Relation::Le, 1.0);
        }

        Lp2Program { lp, x_var, slice_var, constant }
    }

    pub fn solve(&self, weights: &[f64], decisions: &[Decision]) -> Result<FractionalAllocation> {
        let prog = self.build(weights, decisions);
        let sol = solve_lp(&prog.lp)?;
        if !sol.is_optimal() {
            return Err(AuctionError::Internal(format!("relaxation reported {:?}", sol.status)));
        }
        let cs = self.conflicts;
        let n = cs.n_requests();
        let m = cs.n_channels();
        let mut x = vec![vec![0.0; m]; n];
        for i in 0..n {
            for j in 0..m {
                if let Some(v) = prog.x_var[i * m + j] {
                    x[i][j] = sol.values[v];
                }
            }
            if let Decision::Assigned(j) = decisions[i] {
                x[i][j] = 1.0;
            }
        }
        let mut frac = FractionalAllocation::from_x(cs, x, weights);
        if self.relaxation != Relaxation::WindowLevel {
            let mut shares: Vec<SliceShare> = frac
                .slice_x
                .into_iter()
                .filter(|s| matches!(decisions[s.request], Decision::Assigned(_)))
                .collect();
            shares.extend(prog.slice_var.iter().filter_map(|&(i, j, l, v)| {
                let value = sol.values[v];
                (value > 0.0).then_some(SliceShare { request: i, channel: j, slice: l, value })
            }));
            shares.sort_by_key(|s| (s.request, s.channel, s.slice));
            frac.slice_x = shares;
        }
        frac.weight = sol.objective_value + prog.constant;
        Ok(frac)
    }
}

/// The relaxation at slice level with no commitments.
pub fn build_lp2(instance: &AuctionInstance, virtual_bids: &[f64]) -> LinearProgram {
    let cs = ConflictStructure::build(instance);
    let open = vec![Decision::Open; instance.n_requests()];
    Lp2Model::new(&cs, Relaxation::SliceLevel).build(virtual_bids, &open).lp
}

pub fn solve_lp2(
    conflicts: &ConflictStructure,
    weights: &[f64],
    relaxation: Relaxation,
) -> Result<FractionalAllocation> {
    let open = vec![Decision::Open; conflicts.n_requests()];
    Lp2Model::new(conflicts, relaxation).solve(weights, &open)
}
