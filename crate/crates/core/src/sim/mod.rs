//! Random scenarios in a square arena and the ratio/utilization sweep.

use std::io::Write;

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::statistics::Statistics;

use crate::allocation_lp::{solve_lp2, Relaxation};
use crate::error::{AuctionError, Result};
use crate::lp_core::{solve_ip_exact_with, DEFAULT_NODE_BUDGET};
use crate::mechanisms::{run_framework, AuctionOutcome, BidDistribution, Mechanism, MechanismConfig, Objective};
use crate::model::{
    check_feasibility, AuctionInstance, Channel, ConflictStructure, IntegralAllocation, Disk, GeometryMode, Location, Minutes, Point,
    Request,
};

/// Largest request count for which the reference optimum is solved exactly.
pub const EXACT_REFERENCE_CAP: usize = 12;

pub const CSV_HEADER: [&str; 11] = [
    "distribution",
    "mechanism",
    "n_requests",
    "trials",
    "reference",
    "social_eff_ratio_mean",
    "social_eff_ratio_se",
    "revenue_ratio_mean",
    "revenue_ratio_se",
    "utilization_mean",
    "utilization_se",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_requests: usize,
    pub n_channels: usize,
    pub arena: f64,
    pub license_radius_range: (f64, f64),
    pub interference_radius: f64,
    pub horizon: Minutes,
    pub duration_range: (Minutes, Minutes),
    pub bid_distribution: BidDistribution,
    pub rng_seed: u64,
    pub trials: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_requests: 20,
            n_channels: 3,
            arena: 100.0,
            license_radius_range: (40.0, 70.0),
            interference_radius: 30.0,
            horizon: 60,
            duration_range: (10, 30),
            bid_distribution: BidDistribution::UniformUnit,
            rng_seed: 1,
            trials: 30,
        }
    }
}

impl ScenarioConfig {
    pub fn check(&self) -> Result<()> {
        let (r0, r1) = self.license_radius_range;
        let (d0, d1) = self.duration_range;
        let ok = self.n_channels >= 1
            && self.arena > 0.0
            && 0.0 < r0
            && r0 <= r1
            && self.interference_radius > 0.0
            && 0 < d0
            && d0 <= d1
            && d1 <= self.horizon;
        if !ok {
            return Err(AuctionError::Config(format!("invalid scenario config {self:?}")));
        }
        self.bid_distribution.check()
    }
}

/// Deterministic in `(config.rng_seed, trial)`: each trial reads its own
/// ChaCha stream.
pub fn generate_scenario(config: &ScenarioConfig, trial: usize) -> AuctionInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(trial as u64);
    let (r0, r1) = config.license_radius_range;
    let (d0, d1) = config.duration_range;
    let point = |rng: &mut ChaCha8Rng| Point::new(rng.gen_range(0.0..config.arena), rng.gen_range(0.0..config.arena));
    let channels = (0..config.n_channels)
        .map(|j| {
            let center = point(&mut rng);
            let radius = if r0 < r1 { rng.gen_range(r0..r1) } else { r0 };
            Channel::new(j, config.interference_radius, vec![Disk::new(center, radius)])
        })
        .collect();
    let requests = (0..config.n_requests)
        .map(|i| {
            let p = point(&mut rng);
            let t = rng.gen_range(d0..=d1);
            let a = rng.gen_range(0..=config.horizon - t);
            let v = config.bid_distribution.sample(&mut rng);
            Request::new(i, Location::Point(p), v, a, t)
        })
        .collect();
    AuctionInstance { horizon: config.horizon, geometry_mode: GeometryMode::PointModel, channels, requests }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    ExactIp,
    LpBound,
}

impl ReferenceKind {
    pub fn label(self) -> &'static str {
        match self {
            ReferenceKind::ExactIp => "exact",
            ReferenceKind::LpBound => "lp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub kind: ReferenceKind,
    pub value: f64,
}

/// Optimal welfare on true valuations: exact up to `EXACT_REFERENCE_CAP`
/// requests, the relaxation bound beyond.
pub fn reference_optimum(instance: &AuctionInstance) -> Result<Reference> {
    let cs = ConflictStructure::build(instance);
    let values = instance.valuations();
    if instance.n_requests() <= EXACT_REFERENCE_CAP {
        let best = solve_ip_exact_with(&cs, &values, DEFAULT_NODE_BUDGET)?;
        Ok(Reference { kind: ReferenceKind::ExactIp, value: best.weight })
    } else {
        let bound = solve_lp2(&cs, &values, Relaxation::WindowLevel)?;
        Ok(Reference { kind: ReferenceKind::LpBound, value: bound.weight })
    }
}

/// One outcome's metrics. Lottery outcomes are scored by their exact
/// expectation over the lottery.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub social_efficiency_ratio: f64,
    pub revenue_ratio: f64,
    pub utilization: f64,
}

pub fn evaluate(instance: &AuctionInstance, outcome: &AuctionOutcome, reference: &Reference) -> Evaluation {
    let ratio = |v: f64| if reference.value > 0.0 { v / reference.value } else { 0.0 };
    let utilization = match &outcome.lottery {
        Some(l) => l.entries.iter().map(|e| e.probability * channel_time_share(instance, &e.allocation)).sum(),
        None => channel_time_share(instance, &outcome.allocation),
    };
    Evaluation {
        social_efficiency_ratio: ratio(outcome.expected_welfare(&instance.valuations())),
        revenue_ratio: ratio(outcome.expected_revenue()),
        utilization,
    }
}

/// Fraction of the `m × horizon` channel-time during which each channel
/// carries at least one winner.
pub fn channel_time_share(instance: &AuctionInstance, allocation: &IntegralAllocation) -> f64 {
    let capacity = (instance.n_channels() as f64) * (instance.horizon as f64);
    if capacity <= 0.0 {
        return 0.0;
    }
    let mut busy: Minutes = 0;
    for j in 0..instance.n_channels() {
        let mut windows: Vec<(Minutes, Minutes)> = allocation
            .winners()
            .filter(|&i| allocation.assignment[i] == Some(j))
            .map(|i| (instance.requests[i].arrival, instance.requests[i].deadline))
            .collect();
        windows.sort_unstable();
        let mut reach = Minutes::MIN;
        for (a, d) in windows {
            let start = a.max(reach);
            if d > start {
                busy += d - start;
            }
            reach = reach.max(d);
        }
    }
    busy as f64 / capacity
}

fn check_outcome(instance: &AuctionInstance, cs: &ConflictStructure, outcome: &AuctionOutcome) -> Result<()> {
    let lottery = outcome.lottery.iter().flat_map(|l| l.entries.iter().map(|e| &e.allocation));
    for alloc in std::iter::once(&outcome.allocation).chain(lottery) {
        if let Err(v) = check_feasibility(instance, cs, alloc) {
            return Err(AuctionError::Internal(format!("{} produced an infeasible allocation: {v}", outcome.mechanism)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub scenarios: Vec<ScenarioConfig>,
    pub mechanisms: Vec<Mechanism>,
    pub reserve: f64,
    pub relaxation: Relaxation,
    pub mdca_resolution: f64,
}

impl SweepConfig {
    /// Every combination of request count and distribution on the default
    /// scenario.
    pub fn grid(
        n_values: &[usize],
        distributions: &[BidDistribution],
        mechanisms: &[Mechanism],
        trials: usize,
        seed: u64,
    ) -> Self {
        let scenarios = distributions
            .iter()
            .flat_map(|&d| {
                n_values.iter().map(move |&n| ScenarioConfig {
                    n_requests: n,
                    bid_distribution: d,
                    rng_seed: seed,
                    trials,
                    ..ScenarioConfig::default()
                })
            })
            .collect();
        Self {
            scenarios,
            mechanisms: mechanisms.to_vec(),
            reserve: 0.0,
            relaxation: Relaxation::WindowLevel,
            mdca_resolution: 1e-4,
        }
    }

    /// The default sweep: 20 to 80 requests, three distributions, the four
    /// polynomial mechanisms, 30 trials per cell.
    pub fn standard(seed: u64) -> Self {
        Self::grid(
            &[20, 40, 60, 80],
            &[BidDistribution::UniformUnit, BidDistribution::exponential(), BidDistribution::gaussian()],
            &[Mechanism::Dca, Mechanism::Mdca, Mechanism::Mgca, Mechanism::Cate],
            30,
            seed,
        )
    }

    fn mechanism_config(&self, mechanism: Mechanism, objective: Objective, scenario: &ScenarioConfig, trial: usize) -> MechanismConfig {
        MechanismConfig {
            objective,
            mechanism,
            reserve: self.reserve,
            distribution: Some(scenario.bid_distribution),
            rng_seed: scenario.rng_seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            relaxation: self.relaxation,
            mdca_resolution: self.mdca_resolution,
            exact_budget: DEFAULT_NODE_BUDGET,
            with_payments: objective == Objective::Revenue,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub se: f64,
}

impl Summary {
    fn of(samples: &[f64]) -> Option<Summary> {
        match samples.len() {
            0 => None,
            1 => Some(Summary { mean: samples[0], se: 0.0 }),
            k => Some(Summary { mean: samples.mean(), se: samples.std_dev() / (k as f64).sqrt() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub distribution: String,
    pub mechanism: Mechanism,
    pub n_requests: usize,
    /// Trials that completed; failed ones are counted in `failures`.
    pub trials: usize,
    pub failures: usize,
    /// `exact`, `lp`, or `mixed` when the trials disagree.
    pub reference: String,
    pub social_efficiency_ratio: Option<Summary>,
    /// Absent for allocation-only mechanisms.
    pub revenue_ratio: Option<Summary>,
    pub utilization: Option<Summary>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn row(&self, distribution: &str, mechanism: Mechanism, n_requests: usize) -> Option<&MetricsRow> {
        self.rows
            .iter()
            .find(|r| r.distribution == distribution && r.mechanism == mechanism && r.n_requests == n_requests)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| AuctionError::Internal(format!("writing csv: {e}"));
        w.write_record(CSV_HEADER).map_err(io)?;
        let pair = |s: &Option<Summary>| match s {
            Some(s) => [s.mean.to_string(), s.se.to_string()],
            None => [String::new(), String::new()],
        };
        for r in &self.rows {
            let [sm, ss] = pair(&r.social_efficiency_ratio);
            let [rm, rs] = pair(&r.revenue_ratio);
            let [um, us] = pair(&r.utilization);
            w.write_record([
                r.distribution.clone(),
                r.mechanism.label().to_string(),
                r.n_requests.to_string(),
                r.trials.to_string(),
                r.reference.clone(),
                sm,
                ss,
                rm,
                rs,
                um,
                us,
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| AuctionError::Internal(format!("writing csv: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| AuctionError::Internal(e.to_string()))
    }
}

#[derive(Default)]
struct Cell {
    social: Vec<f64>,
    revenue: Vec<f64>,
    utilization: Vec<f64>,
    references: Vec<ReferenceKind>,
    failures: usize,
}

fn run_trial(
    sweep: &SweepConfig,
    scenario: &ScenarioConfig,
    trial: usize,
    instance: &AuctionInstance,
    cs: &ConflictStructure,
    reference: &Reference,
    mechanism: Mechanism,
) -> Result<(Evaluation, Option<f64>)> {
    let social_cfg = sweep.mechanism_config(mechanism, Objective::SocialEfficiency, scenario, trial);
    let social = run_framework(instance, &social_cfg)?;
    check_outcome(instance, cs, &social)?;
    let eval = evaluate(instance, &social, reference);
    let revenue = if mechanism == Mechanism::Dca {
        None
    } else {
        let cfg = sweep.mechanism_config(mechanism, Objective::Revenue, scenario, trial);
        let outcome = run_framework(instance, &cfg)?;
        check_outcome(instance, cs, &outcome)?;
        Some(evaluate(instance, &outcome, reference).revenue_ratio)
    };
    Ok((eval, revenue))
}

/// Runs every (scenario, mechanism) cell over its trials. Social efficiency
/// and utilization come from the social-efficiency run, the revenue ratio
/// from a separate revenue run on the same instance. A failed trial is
/// logged and left out of its cell.
pub fn run_experiment(sweep: &SweepConfig) -> Result<MetricsTable> {
    for s in &sweep.scenarios {
        s.check()?;
    }
    let mut rows = Vec::new();
    for scenario in &sweep.scenarios {
        let mut cells: Vec<Cell> = sweep.mechanisms.iter().map(|_| Cell::default()).collect();
        for trial in 0..scenario.trials {
            let instance = generate_scenario(scenario, trial);
            let cs = ConflictStructure::build(&instance);
            let reference = match reference_optimum(&instance) {
                Ok(r) => r,
                Err(e) => {
                    warn!("n={} trial {trial}: reference failed: {e}", scenario.n_requests);
                    cells.iter_mut().for_each(|c| c.failures += 1);
                    continue;
                }
            };
            for (cell, &mechanism) in cells.iter_mut().zip(&sweep.mechanisms) {
                match run_trial(sweep, scenario, trial, &instance, &cs, &reference, mechanism) {
                    Ok((eval, revenue)) => {
                        cell.social.push(eval.social_efficiency_ratio);
                        cell.utilization.push(eval.utilization);
                        cell.revenue.extend(revenue);
                        cell.references.push(reference.kind);
                    }
                    Err(e) => {
                        warn!("{mechanism} n={} trial {trial}: {e}", scenario.n_requests);
                        cell.failures += 1;
                    }
                }
            }
            debug!("{} n={} trial {trial} done", scenario.bid_distribution.label(), scenario.n_requests);
        }
        for (cell, &mechanism) in cells.into_iter().zip(&sweep.mechanisms) {
            let reference = match cell.references.first() {
                None => String::new(),
                Some(k) if cell.references.iter().all(|r| r == k) => k.label().to_string(),
                Some(_) => "mixed".to_string(),
            };
            rows.push(MetricsRow {
                distribution: scenario.bid_distribution.label().to_string(),
                mechanism,
                n_requests: scenario.n_requests,
                trials: cell.social.len(),
                failures: cell.failures,
                reference,
                social_efficiency_ratio: Summary::of(&cell.social),
                revenue_ratio: Summary::of(&cell.revenue),
                utilization: Summary::of(&cell.utilization),
            });
        }
    }
    rows.sort_by(|a, b| {
        (a.distribution.as_str(), a.mechanism.label(), a.n_requests).cmp(&(b.distribution.as_str(), b.mechanism.label(), b.n_requests))
    });
    Ok(MetricsTable { rows })
}
