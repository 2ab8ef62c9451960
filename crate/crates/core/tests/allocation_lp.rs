mod common;

use proptest::prelude::*;
use spectrum_auction::allocation_lp::*;
use spectrum_auction::lp_core::{solve_ip_exact, solve_lp};
use spectrum_auction::model::*;

const LOWER: f64 = 1.0 - 1.0 / std::f64::consts::E;

fn everywhere(m: usize) -> Vec<Channel> {
    (0..m)
        .map(|j| Channel::new(j, 30.0, vec![Disk::new(Point::new(0.0, 0.0), 500.0)]))
        .collect()
}

/// Requests at the given x coordinates, all with window `[0, 30)`.
fn line(xs: &[f64], bids: &[f64], m: usize) -> AuctionInstance {
    AuctionInstance {
        horizon: 60,
        geometry_mode: GeometryMode::PointModel,
        channels: everywhere(m),
        requests: xs
            .iter()
            .zip(bids)
            .enumerate()
            .map(|(i, (&x, &b))| Request::new(i, Location::Point(Point::new(x, 0.0)), b, 0, 30))
            .collect(),
    }
}

fn frac(rows: Vec<Vec<f64>>) -> FractionalAllocation {
    FractionalAllocation {
        x_row_sum: rows.iter().map(|r| r.iter().sum()).collect(),
        x: rows,
        slice_x: Vec::new(),
        weight: 0.0,
    }
}

#[test]
fn lone_request_program_shape() {
    let mut inst = line(&[0.0], &[2.0], 1);
    inst.horizon = 30;
    let lp = build_lp2(&inst, &inst.bids());
    assert_eq!(lp.n_vars(), 2);
    assert_eq!(lp.bounds, vec![(0.0, 1.0); 2]);
    assert_eq!(lp.constraints.len(), 1);
    let sol = solve_lp(&lp).unwrap();
    assert!((sol.values[0] - 1.0).abs() < 1e-9);
}

#[test]
fn non_conflicting_pair_both_fractionally_full() {
    let inst = line(&[0.0, 100.0], &[1.0, 1.0], 1);
    let cs = ConflictStructure::build(&inst);
    let f = solve_lp2(&cs, &inst.bids(), Relaxation::SliceLevel).unwrap();
    assert!((f.x[0][0] - 1.0).abs() < 1e-9 && (f.x[1][0] - 1.0).abs() < 1e-9);
}

#[test]
fn identical_conflicting_pair_splits_unit_mass() {
    let inst = line(&[0.0, 0.0], &[1.0, 1.0], 1);
    for r in [Relaxation::SliceLevel, Relaxation::WindowLevel] {
        let cs = ConflictStructure::build(&inst);
        let f = solve_lp2(&cs, &inst.bids(), r).unwrap();
        assert!((f.weight - 1.0).abs() < 1e-9);
        assert!((f.x[0][0] + f.x[1][0] - 1.0).abs() < 1e-9);
    }
}

#[test]
fn conflicting_bids_three_and_five() {
    let inst = line(&[0.0, 10.0], &[3.0, 5.0], 1);
    let sol = solve_lp(&build_lp2(&inst, &inst.bids())).unwrap();
    assert!((sol.objective_value - 5.0).abs() < 1e-9);
    let cs = ConflictStructure::build(&inst);
    let f = solve_lp2(&cs, &inst.bids(), Relaxation::SliceLevel).unwrap();
    assert!((f.x[1][0] - 1.0).abs() < 1e-9);
}

#[test]
fn star_with_idle_centre_stays_feasible() {
    // Centre 0 touches 1 and 2, which are apart; a literal closed-neighbourhood
    // row would forbid x1 = x2 = 1.
    let inst = line(&[0.0, -40.0, 40.0], &[0.1, 1.0, 1.0], 1);
    let cs = ConflictStructure::build(&inst);
    let f = solve_lp2(&cs, &inst.bids(), Relaxation::SliceLevel).unwrap();
    assert!((f.weight - 2.0).abs() < 1e-9);
}

#[test]
fn product_form_examples() {
    let inst = line(&[0.0, 10.0], &[3.0, 5.0], 2);
    let cs = ConflictStructure::build(&inst);
    let f = frac(vec![vec![0.0, 0.0], vec![0.5, 0.5]]);
    assert!((conditional_probability(&f, &cs, 0, 0, 1) - 0.5).abs() < 1e-12);
    assert!((conditional_expected_weight(&f, &cs, 0, 0, &[3.0, 5.0]) - 5.5).abs() < 1e-12);

    let apart = line(&[0.0, 100.0], &[3.0, 5.0], 2);
    let cs = ConflictStructure::build(&apart);
    assert!((conditional_probability(&f, &cs, 0, 0, 1) - 0.75).abs() < 1e-12);
    assert!((conditional_expected_weight(&f, &cs, 0, 0, &[3.0, 5.0]) - 6.75).abs() < 1e-12);

    let g = frac(vec![vec![0.0, 0.0], vec![0.7, 0.0]]);
    let cs = ConflictStructure::build(&inst);
    assert_eq!(conditional_probability(&g, &cs, 0, 0, 1), 0.0);
    assert!((conditional_expected_weight(&frac(vec![vec![1.0]]), &ConflictStructure::build(&line(&[0.0], &[5.0], 1)), 0, 0, &[5.0]) - 5.0).abs() < 1e-12);
}

#[test]
fn rounding_examples() {
    let lone = line(&[0.0], &[1.0], 2);
    let cs = ConflictStructure::build(&lone);
    let full = frac(vec![vec![1.0, 0.0]]);
    let half = frac(vec![vec![0.5, 0.5]]);
    let mut wins = 0;
    for seed in 0..10_000u64 {
        let mut rng = common::rng(seed);
        assert!(randomized_round(&cs, &full, &[1.0], &mut rng).is_winner(0));
        if randomized_round(&cs, &half, &[1.0], &mut rng).is_winner(0) {
            wins += 1;
        }
    }
    let rate = wins as f64 / 10_000.0;
    assert!((rate - 0.75).abs() < 0.02, "win rate {rate}");

    let zero = frac(vec![vec![0.0, 0.0]]);
    assert_eq!(randomized_round(&cs, &zero, &[1.0], &mut common::rng(1)).n_winners(), 0);
}

#[test]
fn derandomized_examples() {
    let lone = line(&[0.0], &[4.0], 1);
    assert_eq!(dca_allocate(&lone, &[4.0]).unwrap().weight, 4.0);
    assert_eq!(mdca_allocate(&lone, &[4.0]).unwrap().weight, 4.0);

    let pair = line(&[0.0, 10.0], &[3.0, 5.0], 1);
    let d = dca_allocate(&pair, &pair.bids()).unwrap();
    assert_eq!(d.assignment, vec![None, Some(0)]);
    let md = mdca_allocate(&pair, &pair.bids()).unwrap();
    assert_eq!(md.assignment, vec![None, Some(0)]);

    // Reversed scan order: the bid-5 request arrives first.
    let mut rev = pair.clone();
    rev.requests[0].arrival = 20;
    rev.requests[0].deadline = 50;
    let md = mdca_allocate(&rev, &rev.bids()).unwrap();
    assert_eq!(md.assignment, vec![None, Some(0)]);

    let raised = mdca_allocate(&pair, &[3.0, 50.0]).unwrap();
    assert!(raised.is_winner(1));
}

#[test]
fn expectation_identity_without_fractional_competitors() {
    // First request on two channels, its only neighbour integral elsewhere.
    let inst = line(&[0.0, 10.0, 200.0], &[2.0, 1.0, 3.0], 2);
    let cs = ConflictStructure::build(&inst);
    let f = frac(vec![vec![0.3, 0.4], vec![0.0, 0.0], vec![0.5, 0.5]]);
    let w = inst.bids();
    let q1 = f.x[0][0] * (1.0 - f.x[0][1] / 2.0);
    let q2 = f.x[0][1] * (1.0 - f.x[0][0] / 2.0);
    let qn = (1.0 - f.x[0][0]) * (1.0 - f.x[0][1]);
    let mut without = f.clone();
    without.x[0] = vec![0.0, 0.0];
    let lhs = conditional_expected_weight(&f, &cs, 0, 0, &w) * q1
        + conditional_expected_weight(&f, &cs, 0, 1, &w) * q2
        + expected_weight(&without, &w) * qn;
    assert!((lhs - expected_weight(&f, &w)).abs() < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn relaxations_dominate_the_integral_optimum(seed in any::<u64>(), n in 0usize..=7, m in 1usize..=2) {
        let inst = common::random_instance(&mut common::rng(seed), n, m);
        let cs = ConflictStructure::build(&inst);
        let w = inst.bids();
        let opt = solve_ip_exact(&inst, &w).unwrap().weight;
        let slice = solve_lp2(&cs, &w, Relaxation::SliceLevel).unwrap();
        let window = solve_lp2(&cs, &w, Relaxation::WindowLevel).unwrap();
        prop_assert!(slice.weight >= opt - 1e-9);
        prop_assert!(window.weight >= opt - 1e-9);
        let aggregate = solve_lp2(&cs, &w, Relaxation::SliceAggregate).unwrap();
        prop_assert!((window.weight - slice.weight).abs() < 1e-7);
        prop_assert!(aggregate.weight >= slice.weight - 1e-9);
    }

    #[test]
    fn fractional_rows_respect_relaxation(seed in any::<u64>(), n in 1usize..=7, m in 1usize..=2) {
        let inst = common::random_instance(&mut common::rng(seed), n, m);
        let cs = ConflictStructure::build(&inst);
        let f = solve_lp2(&cs, &inst.bids(), Relaxation::SliceLevel).unwrap();
        for i in 0..n {
            prop_assert!(f.x_row_sum[i] <= 1.0 + 1e-9);
            for j in 0..m {
                prop_assert!(f.x[i][j] >= -1e-9 && f.x[i][j] <= 1.0 + 1e-9);
                if !cs.eligible(i, j) {
                    prop_assert_eq!(f.x[i][j], 0.0);
                    continue;
                }
                let w = cs.window(i, j).unwrap();
                let covered: f64 = f
                    .slice_x
                    .iter()
                    .filter(|s| s.request == i && s.channel == j)
                    .map(|s| s.value * cs.slices(j)[s.slice].len() as f64)
                    .sum();
                let _ = w;
                prop_assert!((covered - inst.requests[i].duration as f64 * f.x[i][j]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn allocator_outputs_are_feasible(seed in any::<u64>(), n in 0usize..=8, m in 1usize..=3) {
        let inst = common::random_instance(&mut common::rng(seed), n, m);
        let cs = ConflictStructure::build(&inst);
        let w = inst.bids();
        let f = solve_lp2(&cs, &w, Relaxation::SliceLevel).unwrap();
        let r = randomized_round(&cs, &f, &w, &mut common::rng(seed ^ 7));
        prop_assert!(check_feasibility(&inst, &cs, &r).is_ok());
        let (d, trace) = dca_allocate_with(&inst, &cs, &w, Relaxation::SliceLevel).unwrap();
        prop_assert!(check_feasibility(&inst, &cs, &d).is_ok());
        for step in trace.expectations.windows(2) {
            prop_assert!(step[1] >= step[0] - 1e-9, "expectation fell {:?}", trace.expectations);
        }
        let md = mdca_allocate(&inst, &w).unwrap();
        prop_assert!(check_feasibility(&inst, &cs, &md).is_ok());
        prop_assert!(d.weight >= LOWER * f.weight - 1e-6, "dca {} lp {}", d.weight, f.weight);
        prop_assert!(md.weight >= LOWER * f.weight - 1e-6, "mdca {} lp {}", md.weight, f.weight);
    }
}

fn pentagon() -> AuctionInstance {
    // Side 50 < 60 ≤ diagonal ≈ 80.9: a 5-cycle of conflicts on one channel.
    let r = 50.0 / (2.0 * (std::f64::consts::PI / 5.0).sin());
    let mut inst = line(&[0.0; 5], &[1.0; 5], 1);
    for (i, req) in inst.requests.iter_mut().enumerate() {
        let a = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
        req.location = Location::Point(Point::new(r * a.cos(), r * a.sin()));
    }
    inst
}

#[test]
fn pentagon_rejection_lowers_the_product_expectation() {
    let inst = pentagon();
    let cs = ConflictStructure::build(&inst);
    let w = inst.bids();
    let (alloc, trace) = dca_allocate_with(&inst, &cs, &w, Relaxation::SliceLevel).unwrap();
    assert!((trace.expectations[0] - 2.5).abs() < 1e-9);
    assert!((trace.expectations[1] - 2.0).abs() < 1e-9);
    assert_eq!(alloc.weight, 2.0);
    assert!(alloc.weight >= LOWER * 2.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expectation_identity_where_competitors_are_clear(seed in any::<u64>(), n in 1usize..=7, m in 1usize..=2) {
        let inst = common::crowded_instance(&mut common::rng(seed), n, m);
        let cs = ConflictStructure::build(&inst);
        let w = inst.bids();
        let f = solve_lp2(&cs, &w, Relaxation::SliceLevel).unwrap();
        let Some(&i) = inst.arrival_order().iter().find(|&&i| f.x_row_sum[i] > 1e-9) else { return Ok(()) };
        let clear = (0..m).all(|j| f.x[i][j] <= 1e-9 || cs.neighbours(i, j).all(|k| f.x[k][j] <= 1e-12));
        prop_assume!(clear);
        let x = &f.x[i];
        let other = |j: usize| if m == 2 { x[1 - j] } else { 0.0 };
        let q: Vec<f64> = (0..m).map(|j| x[j] * (1.0 - other(j) / 2.0)).collect();
        let q_none: f64 = x.iter().map(|v| 1.0 - v).product();
        let mut without = f.clone();
        without.x[i] = vec![0.0; m];
        let lhs: f64 = (0..m).map(|j| conditional_expected_weight(&f, &cs, i, j, &w) * q[j]).sum::<f64>()
            + expected_weight(&without, &w) * q_none;
        prop_assert!((lhs - expected_weight(&f, &w)).abs() < 1e-6);
    }
}
