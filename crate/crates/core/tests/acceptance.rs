//! One test per acceptance criterion. Each writes a `criterion N: PASS|FAIL`
//! line straight to stderr so it shows up even when output is captured.

mod common;

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{random_instance, rng};
use rand::Rng;
use spectrum_auction::allocation_greedy::mgca_allocate;
use spectrum_auction::allocation_lp::{
    dca_allocate, mdca_allocate, randomized_round, solve_lp2, Decision, Lp2Model, Relaxation,
};
use spectrum_auction::lp_core::solve_ip_exact;
use spectrum_auction::mechanisms::*;
use spectrum_auction::model::{check_feasibility, segment_timeline, AuctionInstance, ConflictStructure};
use spectrum_auction::sim::{run_experiment, MetricsTable, SweepConfig};

const BOUND: f64 = 1.0 - 0.367_879_441_171_442_33;
const SWEEP_SEED: u64 = 2024;

fn report(criterion: u32, pass: bool, detail: String) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {criterion}: {verdict}: {detail}");
}

/// `n ∈ [1, 8]`, `m ∈ [1, 2]`, uniform bids.
fn oracle_instance(r: &mut impl Rng) -> AuctionInstance {
    let n = r.gen_range(1..=8);
    let m = r.gen_range(1..=2);
    random_instance(r, n, m)
}

#[test]
fn criterion_01_derandomized_allocators_meet_the_bound() {
    let start = Instant::now();
    let mut r = rng(101);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for k in 0..200 {
        let inst = oracle_instance(&mut r);
        let w = inst.bids();
        let cs = ConflictStructure::build(&inst);
        let lp = solve_lp2(&cs, &w, Relaxation::SliceLevel).unwrap().weight;
        let opt = solve_ip_exact(&inst, &w).unwrap().weight;
        for (name, got) in [("dca", dca_allocate(&inst, &w).unwrap().weight), ("mdca", mdca_allocate(&inst, &w).unwrap().weight)] {
            if lp > 0.0 {
                worst = worst.min(got / lp);
            }
            if got < BOUND * lp - 1e-6 || got < BOUND * opt - 1e-6 {
                failures.push(format!("{name} on instance {k}: {got} vs lp {lp}, opt {opt}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(60);
    report(1, pass, format!("200 instances, worst welfare/LP {worst:.4}, {} misses, {elapsed:.1?}", failures.len()));
    assert!(failures.is_empty(), "{failures:?}");
    assert!(elapsed < Duration::from_secs(60));
}

#[test]
fn criterion_02_randomized_rounding_expectation() {
    let start = Instant::now();
    let mut r = rng(202);
    let mut failures = Vec::new();
    let mut lowest_ratio = f64::INFINITY;
    for k in 0..50 {
        let inst = oracle_instance(&mut r);
        let w = inst.bids();
        let cs = ConflictStructure::build(&inst);
        let frac = solve_lp2(&cs, &w, Relaxation::SliceLevel).unwrap();
        let samples: Vec<f64> = (0..2000u64)
            .map(|s| randomized_round(&cs, &frac, &w, &mut rng(s * 7919 + k)).weight)
            .collect();
        let mean = samples.iter().sum::<f64>() / 2000.0;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 1999.0;
        let se = (var / 2000.0).sqrt();
        if frac.weight > 0.0 {
            lowest_ratio = lowest_ratio.min(mean / frac.weight);
        }
        if mean < BOUND * frac.weight - 3.0 * se {
            failures.push(format!("instance {k}: mean {mean} se {se} lp {}", frac.weight));
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(120);
    report(2, pass, format!("50 x 2000 roundings, lowest mean/LP {lowest_ratio:.4}, {} misses, {elapsed:.1?}", failures.len()));
    assert!(failures.is_empty(), "{failures:?}");
    assert!(elapsed < Duration::from_secs(120));
}

#[test]
fn criterion_03_relaxation_dominates_the_integral_optimum() {
    let mut r = rng(303);
    let mut failures = Vec::new();
    for k in 0..200 {
        let inst = oracle_instance(&mut r);
        let w = inst.bids();
        let cs = ConflictStructure::build(&inst);
        let opt = solve_ip_exact(&inst, &w).unwrap().weight;
        for relaxation in [Relaxation::SliceLevel, Relaxation::WindowLevel, Relaxation::SliceAggregate] {
            let lp = solve_lp2(&cs, &w, relaxation).unwrap().weight;
            if lp < opt - 1e-9 {
                failures.push(format!("instance {k} {relaxation:?}: lp {lp} < opt {opt}"));
            }
        }
    }
    report(3, failures.is_empty(), format!("200 instances, three relaxation forms, {} violations", failures.len()));
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn criterion_04_greedy_within_a_factor_of_32() {
    let mut r = rng(404);
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    for _ in 0..300 {
        let inst = oracle_instance(&mut r);
        let w = inst.bids();
        let opt = solve_ip_exact(&inst, &w).unwrap().weight;
        let got = mgca_allocate(&inst, &w).weight;
        if opt > 0.0 {
            worst = worst.min(got / opt);
        }
        if got < opt / 32.0 - 1e-12 {
            failures += 1;
        }
    }
    report(4, failures == 0, format!("300 instances, worst welfare/OPT {worst:.4}, {failures} below OPT/32"));
    assert_eq!(failures, 0);
}

/// Draws `(instance, winner, raised bid)` triples until `count` are found
/// and counts those where the winner loses after the raise.
fn monotonicity_violations(seed: u64, count: usize, wins: impl Fn(&AuctionInstance, &[f64], usize) -> bool) -> usize {
    let mut r = rng(seed);
    let mut seen = 0;
    let mut violations = 0;
    while seen < count {
        let inst = oracle_instance(&mut r);
        let mut w = inst.bids();
        let winners: Vec<usize> = (0..w.len()).filter(|&i| wins(&inst, &w, i)).collect();
        if winners.is_empty() {
            continue;
        }
        let i = winners[r.gen_range(0..winners.len())];
        w[i] = r.gen_range(w[i]..=1.0);
        seen += 1;
        if !wins(&inst, &w, i) {
            violations += 1;
        }
    }
    violations
}

#[test]
fn criterion_05_bid_monotonicity() {
    let mdca = monotonicity_violations(505, 500, |inst, w, i| mdca_allocate(inst, w).unwrap().is_winner(i));
    let mgca = monotonicity_violations(506, 500, |inst, w, i| mgca_allocate(inst, w).is_winner(i));
    let pass = mdca == 0 && mgca == 0;
    report(5, pass, format!("500 raises each: mdca {mdca} violations, mgca {mgca} violations"));
    assert_eq!((mdca, mgca), (0, 0));
}

fn utility_at(inst: &AuctionInstance, mech: Mechanism, i: usize, bid: f64) -> f64 {
    let mut lie = inst.clone();
    lie.requests[i].bid = bid;
    let out = run_framework(&lie, &MechanismConfig::social(mech)).unwrap();
    out.expected_utility(i, inst.requests[i].valuation)
}

fn grid_violations(seed: u64, mech: Mechanism) -> (usize, f64) {
    let mut r = rng(seed);
    let mut violations = 0;
    let mut worst_gain: f64 = 0.0;
    for _ in 0..100 {
        let inst = oracle_instance(&mut r);
        let i = r.gen_range(0..inst.n_requests());
        let truthful = utility_at(&inst, mech, i, inst.requests[i].valuation);
        let mut bad = false;
        for g in 0..=20 {
            let gain = utility_at(&inst, mech, i, g as f64 / 20.0) - truthful;
            worst_gain = worst_gain.max(gain);
            bad |= gain > 1e-9;
        }
        violations += usize::from(bad);
    }
    (violations, worst_gain)
}

fn duration_violations(seed: u64) -> usize {
    let mut r = rng(seed);
    let mut violations = 0;
    for _ in 0..100 {
        let inst = oracle_instance(&mut r);
        let i = r.gen_range(0..inst.n_requests());
        let value = inst.requests[i].valuation;
        let honest = run_framework(&inst, &MechanismConfig::social(Mechanism::Mgca)).unwrap().expected_utility(i, value);
        let req = &inst.requests[i];
        let mut bad = false;
        for longer in req.duration + 1..=inst.horizon - req.arrival {
            let mut lie = inst.clone();
            lie.requests[i].duration = longer;
            lie.requests[i].deadline = req.arrival + longer;
            let u = run_framework(&lie, &MechanismConfig::social(Mechanism::Mgca)).unwrap().expected_utility(i, value);
            bad |= u > honest + 1e-9;
        }
        violations += usize::from(bad);
    }
    violations
}

#[test]
fn criterion_06_truthfulness_grids() {
    let (vcg, vcg_gain) = grid_violations(601, Mechanism::ExactVcg);
    let (mgca, mgca_gain) = grid_violations(602, Mechanism::Mgca);
    let (cate, cate_gain) = grid_violations(603, Mechanism::Cate);
    let time = duration_violations(604);
    let pass = vcg == 0 && mgca == 0 && cate == 0 && time == 0;
    report(
        6,
        pass,
        format!(
            "instances with a profitable misreport out of 100: vcg {vcg} (max gain {vcg_gain:.2e}), \
             mgca {mgca} ({mgca_gain:.2e}), cate {cate} ({cate_gain:.2e}); longer durations: mgca {time}"
        ),
    );
    assert_eq!((vcg, mgca, cate, time), (0, 0, 0, 0));
}

#[test]
fn criterion_07_lottery_decomposition() {
    let mut r = rng(707);
    let mut worst_residual: f64 = 0.0;
    let mut failures = Vec::new();
    for k in 0..100 {
        let inst = oracle_instance(&mut r);
        let w = inst.bids();
        let cs = ConflictStructure::build(&inst);
        let model = Lp2Model::new(&cs, Relaxation::SliceLevel);
        let frac = model.solve(&w, &vec![Decision::Open; w.len()]).unwrap();
        let d = match cate_decompose(&inst, &model, &frac, &w) {
            Ok(d) => d,
            Err(e) => {
                failures.push(format!("instance {k}: {e}"));
                continue;
            }
        };
        for i in 0..w.len() {
            let xi: f64 = frac.x[i].iter().sum();
            worst_residual = worst_residual.max((d.win_probability(i) - xi / d.alpha).abs());
        }
        let total: f64 = d.probabilities.iter().sum();
        let opt = solve_ip_exact(&inst, &w).unwrap().weight;
        if (total - 1.0).abs() > 1e-6 || d.probabilities.iter().any(|&q| q < 0.0) {
            failures.push(format!("instance {k}: probabilities sum to {total}"));
        }
        if d.expected_weight() < BOUND * opt - 1e-6 {
            failures.push(format!("instance {k}: expected {} vs opt {opt}", d.expected_weight()));
        }
    }
    let pass = failures.is_empty() && worst_residual <= 1e-6;
    report(7, pass, format!("100 instances, worst coverage residual {worst_residual:.2e}, {} failures", failures.len()));
    assert!(failures.is_empty(), "{failures:?}");
    assert!(worst_residual <= 1e-6);
}

struct SweepRun {
    table: MetricsTable,
    csv: String,
    elapsed: Duration,
}

fn standard_sweep() -> &'static SweepRun {
    static RUN: OnceLock<SweepRun> = OnceLock::new();
    RUN.get_or_init(|| {
        let start = Instant::now();
        let table = run_experiment(&SweepConfig::standard(SWEEP_SEED)).unwrap();
        let elapsed = start.elapsed();
        let csv = table.to_csv_string().unwrap();
        SweepRun { table, csv, elapsed }
    })
}

const DISTRIBUTIONS: [&str; 3] = ["uniform", "exponential", "gaussian"];
const SIZES: [usize; 4] = [20, 40, 60, 80];

#[test]
fn criterion_08_lottery_welfare_above_seventy_percent() {
    let run = standard_sweep();
    let mut below = Vec::new();
    let mut lines = Vec::new();
    for mech in [Mechanism::Cate, Mechanism::Dca, Mechanism::Mdca] {
        let mut lowest = f64::INFINITY;
        for d in DISTRIBUTIONS {
            for n in SIZES {
                let row = run.table.row(d, mech, n).unwrap();
                let mean = row.social_efficiency_ratio.unwrap().mean;
                lowest = lowest.min(mean);
                if mean < 0.70 || row.trials != 30 {
                    below.push(format!("{mech} {d} n={n}: {mean:.4} over {} trials", row.trials));
                }
            }
        }
        lines.push(format!("{mech} lowest cell mean {lowest:.4}"));
    }
    let pass = below.is_empty() && run.elapsed < Duration::from_secs(600);
    report(
        8,
        pass,
        format!("{}; {} cells below 0.70; sweep took {:.1?}", lines.join(", "), below.len(), run.elapsed),
    );
    assert!(run.elapsed < Duration::from_secs(600));
    assert!(below.is_empty(), "{below:?}");
}

#[test]
fn criterion_09_revenue_ratio_grows_with_demand() {
    let run = standard_sweep();
    let mut drops = Vec::new();
    for mech in [Mechanism::Mdca, Mechanism::Cate] {
        for d in DISTRIBUTIONS {
            let means: Vec<f64> =
                SIZES.iter().map(|&n| run.table.row(d, mech, n).unwrap().revenue_ratio.unwrap().mean).collect();
            for k in 1..means.len() {
                if means[k] < means[k - 1] - 0.02 {
                    drops.push(format!("{mech} {d}: {:.4} -> {:.4} at n={}", means[k - 1], means[k], SIZES[k]));
                }
            }
        }
    }
    report(9, drops.is_empty(), format!("{} drops beyond 0.02 across six series", drops.len()));
    assert!(drops.is_empty(), "{drops:?}");
}

#[test]
fn criterion_10_structure_and_reproducibility() {
    let mut r = rng(1010);
    let mut issues = Vec::new();
    for k in 0..60 {
        let n = r.gen_range(0..=10);
        let m = r.gen_range(1..=3);
        let inst = random_instance(&mut r, n, m);
        let timeline = segment_timeline(&inst);
        for (j, slices) in timeline.slices.iter().enumerate() {
            if slices.len() > 2 * n + 1 {
                issues.push(format!("instance {k} channel {j}: {} slices for {n} requests", slices.len()));
            }
        }
        let cs = ConflictStructure::build(&inst);
        for mech in Mechanism::ALL {
            let out = run_framework(&inst, &MechanismConfig::social(mech)).unwrap();
            let lottery = out.lottery.iter().flat_map(|l| l.entries.iter().map(|e| &e.allocation));
            for alloc in std::iter::once(&out.allocation).chain(lottery) {
                if let Err(v) = check_feasibility(&inst, &cs, alloc) {
                    issues.push(format!("instance {k} {mech}: {v}"));
                }
            }
        }
    }
    let run = standard_sweep();
    let again = run_experiment(&SweepConfig::standard(SWEEP_SEED)).unwrap().to_csv_string().unwrap();
    let identical = again == run.csv;
    if !identical {
        issues.push("sweep CSV differs between runs".into());
    }
    report(
        10,
        issues.is_empty(),
        format!("60 instances x 5 mechanisms checked, repeated sweep byte-identical: {identical}, {} issues", issues.len()),
    );
    assert!(issues.is_empty(), "{issues:?}");
}
