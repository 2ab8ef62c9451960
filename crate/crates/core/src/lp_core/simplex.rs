use log::trace;

use super::program::{LinearProgram, LpSolution, LpStatus, Relation};
use crate::error::{AuctionError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest-index entering and leaving variables throughout.
    Bland,
    /// Largest reduced cost, falling back to Bland after a run of
    /// degenerate pivots.
    Dantzig,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub rule: PivotRule,
    pub tolerance: f64,
    pub degenerate_limit: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            rule: PivotRule::Dantzig,
            tolerance: 1e-9,
            degenerate_limit: 50,
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lp_with(lp, &SimplexOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution> {
    lp.check()?;
    let (mut tab, map) = Tableau::standard_form(lp, opts);

    if tab.n_art > 0 {
        let mut cost = vec![0.0; tab.ncol];
        for c in &mut cost[tab.art_start..] {
            *c = -1.0;
        }
        if tab.run(&cost, tab.ncol)? == Phase::Unbounded {
            return Err(AuctionError::Internal("phase one reported unbounded".into()));
        }
        let infeas: f64 = (0..tab.m)
            .filter(|&i| tab.basis[i] >= tab.art_start)
            .map(|i| tab.beta[i])
            .sum();
        let scale = 1.0 + tab.rhs_scale;
        if infeas > 1e-7 * scale {
            trace!("phase one residual {infeas}");
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: Vec::new(),
                objective_value: f64::NAN,
            });
        }
        tab.expel_artificials();
    }

    let mut cost = vec![0.0; tab.ncol];
    cost[..map.cost.len()].copy_from_slice(&map.cost);
    let limit = tab.art_start;
    if tab.run(&cost, limit)? == Phase::Unbounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective_value: f64::INFINITY,
        });
    }

    let y = tab.values();
    let values: Vec<f64> = map
        .vars
        .iter()
        .map(|v| {
            let raw = v.offset + v.cols.iter().map(|&(c, s)| s * y[c]).sum::<f64>();
            let (lo, hi) = v.bounds;
            raw.clamp(lo, hi)
        })
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective_value: lp.objective_at(&values),
        values,
    })
}

#[derive(Debug, PartialEq, Eq)]
enum Phase {
    Optimal,
    Unbounded,
}

struct VarMap {
    offset: f64,
    cols: Vec<(usize, f64)>,
    bounds: (f64, f64),
}

struct ColumnMap {
    vars: Vec<VarMap>,
    cost: Vec<f64>,
}

struct Tableau {
    m: usize,
    ncol: usize,
    art_start: usize,
    n_art: usize,
    /// Row-major `m × ncol`, holding `B⁻¹A`.
    a: Vec<f64>,
    beta: Vec<f64>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    rhs_scale: f64,
    opts: SimplexOptions,
}

impl Tableau {
    fn standard_form(lp: &LinearProgram, opts: &SimplexOptions) -> (Self, ColumnMap) {
        let mut vars = Vec::with_capacity(lp.n_vars());
        let mut upper = Vec::new();
        let mut cost = Vec::new();
        for (k, &(lo, hi)) in lp.bounds.iter().enumerate() {
            let c = lp.objective[k];
            let next = upper.len();
            let v = if lo.is_finite() {
                upper.push(hi - lo);
                cost.push(c);
                VarMap { offset: lo, cols: vec![(next, 1.0)], bounds: (lo, hi) }
            } else if hi.is_finite() {
                upper.push(f64::INFINITY);
                cost.push(-c);
                VarMap { offset: hi, cols: vec![(next, -1.0)], bounds: (lo, hi) }
            } else {
                upper.extend([f64::INFINITY, f64::INFINITY]);
                cost.extend([c, -c]);
                VarMap { offset: 0.0, cols: vec![(next, 1.0), (next + 1, -1.0)], bounds: (lo, hi) }
            };
            vars.push(v);
        }
        let ny = upper.len();

        let m = lp.constraints.len();
        let n_slack = lp
            .constraints
            .iter()
            .filter(|c| c.relation != Relation::Eq)
            .count();

        let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::with_capacity(m);
        let mut slack_of_row = vec![None; m];
        let mut next_slack = ny;
        for (r, c) in lp.constraints.iter().enumerate() {
            let mut rhs = c.rhs;
            let mut coeffs: Vec<(usize, f64)> = Vec::with_capacity(c.coeffs.len() + 1);
            for &(k, a) in &c.coeffs {
                let v = &vars[k];
                rhs -= a * v.offset;
                for &(col, s) in &v.cols {
                    coeffs.push((col, a * s));
                }
            }
            match c.relation {
                Relation::Le => {
                    coeffs.push((next_slack, 1.0));
                    slack_of_row[r] = Some(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    coeffs.push((next_slack, -1.0));
                    slack_of_row[r] = Some(next_slack);
                    next_slack += 1;
                }
                Relation::Eq => {}
            }
            if rhs < 0.0 {
                rhs = -rhs;
                for e in &mut coeffs {
                    e.1 = -e.1;
                }
            }
            rows.push((coeffs, rhs));
        }
        upper.extend(std::iter::repeat_n(f64::INFINITY, n_slack));

        let art_start = ny + n_slack;
        let mut basis = vec![usize::MAX; m];
        let mut n_art = 0;
        for (r, (coeffs, _)) in rows.iter().enumerate() {
            let slack_pos = slack_of_row[r]
                .filter(|&s| coeffs.iter().any(|&(col, a)| col == s && a > 0.0));
            match slack_pos {
                Some(s) => basis[r] = s,
                None => {
                    basis[r] = art_start + n_art;
                    n_art += 1;
                }
            }
        }
        upper.extend(std::iter::repeat_n(f64::INFINITY, n_art));
        let ncol = art_start + n_art;

        let mut a = vec![0.0; m * ncol];
        let mut beta = vec![0.0; m];
        let mut rhs_scale: f64 = 0.0;
        for (r, (coeffs, rhs)) in rows.into_iter().enumerate() {
            let row = &mut a[r * ncol..(r + 1) * ncol];
            for (col, v) in coeffs {
                row[col] += v;
            }
            if basis[r] >= art_start {
                row[basis[r]] = 1.0;
            }
            beta[r] = rhs;
            rhs_scale = rhs_scale.max(rhs.abs());
        }
        let mut is_basic = vec![false; ncol];
        for &b in &basis {
            is_basic[b] = true;
        }

        let tab = Tableau {
            m,
            ncol,
            art_start,
            n_art,
            a,
            beta,
            at_upper: vec![false; ncol],
            upper,
            basis,
            is_basic,
            rhs_scale,
            opts: *opts,
        };
        (tab, ColumnMap { vars, cost })
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.ncol..(i + 1) * self.ncol]
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, aij) in d.iter_mut().zip(self.row(i)) {
                    *dj -= cb * aij;
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        d
    }

    /// Maximises `cost` with entering candidates restricted to `col < limit`.
    fn run(&mut self, cost: &[f64], limit: usize) -> Result<Phase> {
        let tol = self.opts.tolerance;
        let mut d = self.reduced_costs(cost);
        let mut degenerate_run = 0usize;
        let max_iter = 100_000 + 50 * (self.m + self.ncol);

        for _ in 0..max_iter {
            let bland = self.opts.rule == PivotRule::Bland
                || degenerate_run >= self.opts.degenerate_limit;

            let mut entering = None;
            let mut best = 0.0;
            for j in 0..limit {
                if self.is_basic[j] || self.upper[j] <= 0.0 {
                    continue;
                }
                let gain = if self.at_upper[j] { -d[j] } else { d[j] };
                if gain > tol {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if gain > best {
                        best = gain;
                        entering = Some(j);
                    }
                }
            }
            let Some(q) = entering else {
                return Ok(Phase::Optimal);
            };
            let dir = if self.at_upper[q] { -1.0 } else { 1.0 };

            let mut theta = self.upper[q];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_piv = 0.0;
            for i in 0..self.m {
                let alpha = self.a[i * self.ncol + q] * dir;
                if alpha.abs() <= tol {
                    continue;
                }
                let b = self.basis[i];
                let (limit_i, to_upper) = if alpha > 0.0 {
                    (self.beta[i].max(0.0) / alpha, false)
                } else if self.upper[b].is_finite() {
                    ((self.upper[b] - self.beta[i]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let better = match leave {
                    None => limit_i < theta,
                    Some((p, _)) => {
                        if limit_i < theta - 1e-12 {
                            true
                        } else if limit_i <= theta + 1e-12 {
                            if bland {
                                b < self.basis[p]
                            } else {
                                alpha.abs() > leave_piv
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    theta = limit_i;
                    leave = Some((i, to_upper));
                    leave_piv = alpha.abs();
                }
            }

            if !theta.is_finite() {
                return Ok(Phase::Unbounded);
            }
            if theta <= tol {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }

            for i in 0..self.m {
                let alpha = self.a[i * self.ncol + q] * dir;
                if alpha != 0.0 {
                    self.beta[i] -= alpha * theta;
                }
            }

            match leave {
                None => {
                    self.at_upper[q] = !self.at_upper[q];
                }
                Some((p, to_upper)) => {
                    let entering_value = if dir > 0.0 { theta } else { self.upper[q] - theta };
                    let out = self.basis[p];
                    self.at_upper[out] = to_upper;
                    self.is_basic[out] = false;
                    self.pivot(p, q);
                    self.beta[p] = entering_value;
                    self.at_upper[q] = false;
                    let dq = d[q];
                    if dq != 0.0 {
                        for (dj, apj) in d.iter_mut().zip(self.row(p)) {
                            *dj -= dq * apj;
                        }
                    }
                    d[q] = 0.0;
                }
            }
        }
        Err(AuctionError::Internal("simplex iteration cap reached".into()))
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let ncol = self.ncol;
        let piv = self.a[p * ncol + q];
        {
            let row = &mut self.a[p * ncol..(p + 1) * ncol];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let (head, tail) = self.a.split_at_mut(p * ncol);
        let (prow, rest) = tail.split_at_mut(ncol);
        for other in head.chunks_exact_mut(ncol).chain(rest.chunks_exact_mut(ncol)) {
            let f = other[q];
            if f != 0.0 {
                for (o, r) in other.iter_mut().zip(prow.iter()) {
                    *o -= f * r;
                }
                other[q] = 0.0;
            }
        }
        self.basis[p] = q;
        self.is_basic[q] = true;
    }

    /// Fixes artificials at zero and pivots basic ones out where a
    /// structural column allows it.
    fn expel_artificials(&mut self) {
        for u in &mut self.upper[self.art_start..] {
            *u = 0.0;
        }
        for p in 0..self.m {
            if self.basis[p] < self.art_start {
                continue;
            }
            let row = self.row(p);
            let mut best = None;
            let mut best_abs = 1e-7;
            for j in 0..self.art_start {
                if !self.is_basic[j] && row[j].abs() > best_abs {
                    best_abs = row[j].abs();
                    best = Some(j);
                }
            }
            if let Some(q) = best {
                let value = if self.at_upper[q] { self.upper[q] } else { 0.0 };
                let out = self.basis[p];
                self.is_basic[out] = false;
                self.at_upper[out] = false;
                self.pivot(p, q);
                self.beta[p] = value;
                self.at_upper[q] = false;
            } else {
                self.beta[p] = 0.0;
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        let mut y: Vec<f64> = (0..self.ncol)
            .map(|j| if self.at_upper[j] { self.upper[j] } else { 0.0 })
            .collect();
        for (i, &b) in self.basis.iter().enumerate() {
            y[b] = self.beta[i];
        }
        y
    }
}
