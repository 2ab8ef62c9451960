#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectrum_auction::lp_core::{LinearProgram, Relation};
use spectrum_auction::model::{
    AuctionInstance, Channel, Disk, GeometryMode, Location, Point, Request,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small dense instance: a 100×100 arena, license disks of radius 40..70,
/// interference radius 30, one hour horizon, durations 10..30 minutes.
pub fn random_instance(rng: &mut impl Rng, n: usize, m: usize) -> AuctionInstance {
    let channels = (0..m)
        .map(|j| {
            let c = Point::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
            Channel::new(j, 30.0, vec![Disk::new(c, rng.gen_range(40.0..70.0))])
        })
        .collect();
    let requests = (0..n)
        .map(|i| {
            let p = Point::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
            let t = rng.gen_range(10..=30);
            let a = rng.gen_range(0..=60 - t);
            let b: f64 = rng.gen_range(0.0..1.0);
            Request::new(i, Location::Point(p), b, a, t)
        })
        .collect();
    AuctionInstance {
        horizon: 60,
        geometry_mode: GeometryMode::PointModel,
        channels,
        requests,
    }
}

/// Same as `random_instance` but with every request inside every license
/// area, so all conflicts come from distances and windows alone.
pub fn crowded_instance(rng: &mut impl Rng, n: usize, m: usize) -> AuctionInstance {
    let mut inst = random_instance(rng, n, m);
    for ch in &mut inst.channels {
        ch.license_areas = vec![Disk::new(Point::new(50.0, 50.0), 200.0)];
    }
    inst
}

/// Maximum weight over every assignment of requests to channels or to
/// nothing, judged directly from the instance geometry.
pub fn brute_force_ip(inst: &AuctionInstance, weights: &[f64]) -> f64 {
    let n = inst.n_requests();
    let m = inst.n_channels();
    let mut best = 0.0f64;
    let mut choice = vec![0; n];
    loop {
        let feasible = (0..n).all(|i| {
            choice[i] == m
                || (inst.is_eligible(i, choice[i])
                    && (0..i).all(|k| {
                        choice[k] != choice[i]
                            || !inst.requests[i].overlaps(&inst.requests[k])
                            || !inst.interferes(i, k, choice[i])
                    }))
        });
        if feasible {
            let w: f64 = (0..n).filter(|&i| choice[i] < m).map(|i| weights[i]).sum();
            best = best.max(w);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return best;
            }
            choice[pos] += 1;
            if choice[pos] <= m {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Best objective over all basic solutions of a box-bounded LP, or `None`
/// when no vertex is feasible.
pub fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.n_vars();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut row = vec![0.0; n];
        for &(k, a) in &c.coeffs {
            row[k] += a;
        }
        planes.push((row, c.rhs));
    }
    for (k, &(lo, hi)) in lp.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        planes.push((e.clone(), lo));
        planes.push((e, hi));
    }
    let mut best: Option<f64> = None;
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        if let Some(x) = solve_square(&pick.iter().map(|&p| planes[p].clone()).collect::<Vec<_>>()) {
            if lp.is_feasible(&x, 1e-7) {
                let v = lp.objective_at(&x);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
        // next combination
        let total = planes.len();
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < total - n + i {
                pick[i] += 1;
                for k in i + 1..n {
                    pick[k] = pick[k - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_square(rows: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows
        .iter()
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(*b);
            v
        })
        .collect();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    Some((0..n).map(|i| a[i][n] / a[i][i]).collect())
}

pub fn relation_from(k: u8) -> Relation {
    match k % 5 {
        0 | 1 | 2 => Relation::Le,
        3 => Relation::Ge,
        _ => Relation::Eq,
    }
}

/// `(x, bid, arrival, duration)` per request on one line, one channel
/// whose license covers everything. Requests conflict when closer than 60.
pub fn line_instance(reqs: &[(f64, f64, i64, i64)]) -> AuctionInstance {
    AuctionInstance {
        horizon: 60,
        geometry_mode: GeometryMode::PointModel,
        channels: vec![Channel::new(0, 30.0, vec![Disk::new(Point::new(0.0, 0.0), 500.0)])],
        requests: reqs
            .iter()
            .enumerate()
            .map(|(i, &(x, b, a, t))| Request::new(i, Location::Point(Point::new(x, 0.0)), b, a, t))
            .collect(),
    }
}
