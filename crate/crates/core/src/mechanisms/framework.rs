use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cate::{cate_decompose, cate_payment, CateDecomposition};
use super::critical::mdca_critical_payment;
use super::distribution::BidDistribution;
use super::vcg::vcg_payments;
use crate::allocation_greedy::{mgca_allocate_with, mgca_critical_values};
use crate::allocation_lp::{dca_allocate_with, mdca_allocate_with, Decision, FractionalAllocation, Lp2Model, Relaxation};
use crate::error::{AuctionError, Result};
use crate::lp_core::{solve_ip_exact_with, DEFAULT_NODE_BUDGET};
use crate::model::{validate_instance, AuctionInstance, ConflictStructure, IntegralAllocation, Minutes};
use crate::EPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    SocialEfficiency,
    Revenue,
}

impl FromStr for Objective {
    type Err = AuctionError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "social" | "social-efficiency" => Ok(Objective::SocialEfficiency),
            "revenue" => Ok(Objective::Revenue),
            other => Err(AuctionError::Config(format!("unknown objective `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    ExactVcg,
    Dca,
    Mdca,
    Mgca,
    Cate,
}

impl Mechanism {
    pub const ALL: [Mechanism; 5] =
        [Mechanism::ExactVcg, Mechanism::Dca, Mechanism::Mdca, Mechanism::Mgca, Mechanism::Cate];

    pub fn label(self) -> &'static str {
        match self {
            Mechanism::ExactVcg => "exact-vcg",
            Mechanism::Dca => "dca",
            Mechanism::Mdca => "mdca",
            Mechanism::Mgca => "mgca",
            Mechanism::Cate => "cate",
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Mechanism {
    type Err = AuctionError;

    fn from_str(s: &str) -> Result<Self> {
        Mechanism::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| AuctionError::Config(format!("unknown mechanism `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaymentRule {
    /// Allocation only; DCA is not known to be bid-monotone.
    None,
    Vcg,
    CriticalValue,
    /// Charges on the relaxation, collected from the lottery's realized
    /// winners.
    Lottery,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismConfig {
    pub objective: Objective,
    pub mechanism: Mechanism,
    /// Minimum virtual price per minute, applied in revenue mode.
    pub reserve: f64,
    pub distribution: Option<BidDistribution>,
    pub rng_seed: u64,
    pub relaxation: Relaxation,
    pub mdca_resolution: f64,
    pub exact_budget: u64,
    /// When false, only the allocation is computed and no payments are set.
    pub with_payments: bool,
}

impl MechanismConfig {
    pub fn social(mechanism: Mechanism) -> Self {
        Self {
            objective: Objective::SocialEfficiency,
            mechanism,
            reserve: 0.0,
            distribution: None,
            rng_seed: 0,
            relaxation: Relaxation::SliceLevel,
            mdca_resolution: 1e-4,
            exact_budget: DEFAULT_NODE_BUDGET,
            with_payments: true,
        }
    }

    pub fn revenue(mechanism: Mechanism, distribution: BidDistribution) -> Self {
        Self {
            objective: Objective::Revenue,
            distribution: Some(distribution),
            ..Self::social(mechanism)
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.reserve.is_finite() && self.reserve >= 0.0) {
            return Err(AuctionError::Config(format!("reserve must be finite and ≥ 0, got {}", self.reserve)));
        }
        if !(self.mdca_resolution.is_finite() && self.mdca_resolution > 0.0) {
            return Err(AuctionError::Config("bisection resolution must be positive".into()));
        }
        if self.objective == Objective::Revenue {
            match self.distribution {
                None => return Err(AuctionError::Config("revenue mode needs a bid distribution".into())),
                Some(d) => d.check()?,
            }
            if self.mechanism == Mechanism::Dca {
                return Err(AuctionError::Config(
                    "dca has no truthful payment rule and cannot run in revenue mode".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LotteryEntry {
    pub allocation: IntegralAllocation,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lottery {
    pub alpha: f64,
    pub entries: Vec<LotteryEntry>,
    /// Index of the realized entry.
    pub sampled: usize,
    pub win_probability: Vec<f64>,
    /// What each request pays if it wins, in currency.
    pub charges: Vec<Option<f64>>,
    pub virtual_charges: Vec<Option<f64>>,
    pub expected_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub mechanism: Mechanism,
    pub objective: Objective,
    /// Indexed like the input instance; weight is in virtual currency.
    pub allocation: IntegralAllocation,
    /// `None` for requests removed by the reserve.
    pub virtual_bids: Vec<Option<f64>>,
    pub payments: Vec<Option<f64>>,
    pub virtual_payments: Vec<Option<f64>>,
    pub objective_value: f64,
    pub payment_rule: PaymentRule,
    pub lottery: Option<Lottery>,
}

impl AuctionOutcome {
    pub fn revenue(&self) -> f64 {
        self.payments.iter().flatten().sum()
    }

    /// Revenue averaged over the lottery when there is one.
    pub fn expected_revenue(&self) -> f64 {
        match &self.lottery {
            Some(l) => l.charges.iter().zip(&l.win_probability).filter_map(|(c, q)| c.map(|c| c * q)).sum(),
            None => self.revenue(),
        }
    }

    pub fn win_probability(&self, i: usize) -> f64 {
        match &self.lottery {
            Some(l) => l.win_probability[i],
            None => f64::from(u8::from(self.allocation.is_winner(i))),
        }
    }

    /// `Σ_i P(i wins)·values[i]`.
    pub fn expected_welfare(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(i, v)| self.win_probability(i) * v).sum()
    }

    /// Expected `value − payment` of request `i`, over the lottery if any.
    pub fn expected_utility(&self, i: usize, value: f64) -> f64 {
        match &self.lottery {
            Some(l) => l.win_probability[i] * (value - l.charges[i].unwrap_or(0.0)),
            None if self.allocation.is_winner(i) => value - self.payments[i].unwrap_or(0.0),
            None => 0.0,
        }
    }
}

/// The lottery and every supported request's charge, on the given relaxation
/// solution.
pub fn cate_lottery(
    instance: &AuctionInstance,
    model: &Lp2Model,
    frac: &FractionalAllocation,
    weights: &[f64],
) -> Result<(CateDecomposition, Vec<Option<f64>>)> {
    let decomposition = cate_decompose(instance, model, frac, weights)?;
    let charges = (0..weights.len())
        .map(|i| {
            if frac.x[i].iter().sum::<f64>() > EPS {
                cate_payment(model, frac, weights, i).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((decomposition, charges))
}

struct Priced {
    assignment: Vec<Option<usize>>,
    virtual_payments: Vec<Option<f64>>,
    rule: PaymentRule,
    lottery: Option<(CateDecomposition, usize, Vec<Option<f64>>)>,
}

fn allocate_and_price(
    instance: &AuctionInstance,
    weights: &[f64],
    floors: &[f64],
    config: &MechanismConfig,
) -> Result<Priced> {
    let cs = ConflictStructure::build(instance);
    let n = instance.n_requests();
    let durations: Vec<Minutes> = instance.requests.iter().map(|r| r.duration).collect();
    let mut virtual_payments = vec![None; n];
    let priced = match config.mechanism {
        Mechanism::ExactVcg => {
            let best = solve_ip_exact_with(&cs, weights, config.exact_budget)?;
            if config.with_payments {
                virtual_payments = vcg_payments(&cs, weights, &best, config.exact_budget)?;
            }
            Priced { assignment: best.assignment, virtual_payments, rule: PaymentRule::Vcg, lottery: None }
        }
        Mechanism::Dca => {
            let (alloc, _) = dca_allocate_with(instance, &cs, weights, config.relaxation)?;
            Priced { assignment: alloc.assignment, virtual_payments, rule: PaymentRule::None, lottery: None }
        }
        Mechanism::Mdca => {
            let model = Lp2Model::new(&cs, config.relaxation);
            let order = instance.arrival_order();
            let alloc = mdca_allocate_with(&model, &order, weights)?;
            for i in alloc.winners().filter(|_| config.with_payments) {
                let p = mdca_critical_payment(&model, &order, weights, i, floors[i], config.mdca_resolution)?;
                virtual_payments[i] = Some(p);
            }
            Priced { assignment: alloc.assignment, virtual_payments, rule: PaymentRule::CriticalValue, lottery: None }
        }
        Mechanism::Mgca => {
            let alloc = mgca_allocate_with(&cs, &durations, weights);
            let critical = if config.with_payments {
                mgca_critical_values(&cs, &durations, weights)
            } else {
                vec![None; n]
            };
            for i in alloc.winners() {
                virtual_payments[i] = critical[i].map(|c| c.max(floors[i]));
            }
            Priced { assignment: alloc.assignment, virtual_payments, rule: PaymentRule::CriticalValue, lottery: None }
        }
        Mechanism::Cate => {
            let model = Lp2Model::new(&cs, config.relaxation);
            let frac = model.solve(weights, &vec![Decision::Open; n])?;
            let (decomposition, charges) = if config.with_payments {
                cate_lottery(instance, &model, &frac, weights)?
            } else {
                (cate_decompose(instance, &model, &frac, weights)?, vec![None; n])
            };
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            let k = decomposition.sample(&mut rng);
            let assignment = decomposition.columns[k].assignment.clone();
            for i in decomposition.columns[k].winners() {
                virtual_payments[i] = charges[i];
            }
            Priced { assignment, virtual_payments, rule: PaymentRule::Lottery, lottery: Some((decomposition, k, charges)) }
        }
    };
    Ok(priced)
}

/// Runs one auction: virtual bids per the objective, the reserve filter in
/// revenue mode, the chosen allocator and its payment rule, with payments
/// mapped back to currency.
pub fn run_framework(instance: &AuctionInstance, config: &MechanismConfig) -> Result<AuctionOutcome> {
    config.check()?;
    let report = validate_instance(instance);
    if !report.is_valid() {
        return Err(AuctionError::InvalidInstance(report));
    }
    let n = instance.n_requests();
    let revenue_dist = match config.objective {
        Objective::SocialEfficiency => None,
        Objective::Revenue => config.distribution,
    };

    let mut virtual_bids = vec![None; n];
    let mut keep = Vec::new();
    for (i, r) in instance.requests.iter().enumerate() {
        let phi = match revenue_dist {
            Some(d) => d.virtual_bid(r.bid)?,
            None => r.bid,
        };
        if revenue_dist.is_none() || phi >= config.reserve * r.duration as f64 {
            virtual_bids[i] = Some(phi);
            keep.push(i);
        }
    }

    let sub = instance.subset(&keep);
    let weights: Vec<f64> = keep.iter().map(|&i| virtual_bids[i].unwrap_or(0.0)).collect();
    let floors: Vec<f64> = match revenue_dist {
        Some(_) => keep.iter().map(|&i| config.reserve * instance.requests[i].duration as f64).collect(),
        None => vec![0.0; keep.len()],
    };
    let priced = allocate_and_price(&sub, &weights, &floors, config)?;

    let to_currency = |i: usize, v: f64| -> Result<f64> {
        match revenue_dist {
            None => Ok(v),
            Some(d) => {
                let (lo, hi) = d.virtual_range();
                d.inverse_virtual_bid(v.clamp(lo, hi)).map(|p| p.min(instance.requests[i].bid))
            }
        }
    };
    let lift = |sub_values: &[Option<f64>]| -> Vec<Option<f64>> {
        let mut full = vec![None; n];
        for (s, &i) in keep.iter().enumerate() {
            full[i] = sub_values[s];
        }
        full
    };
    let lift_assignment = |sub_assignment: &[Option<usize>]| -> Vec<Option<usize>> {
        let mut full = vec![None; n];
        for (s, &i) in keep.iter().enumerate() {
            full[i] = sub_assignment[s];
        }
        full
    };

    let full_cs = ConflictStructure::build(instance);
    let full_weights: Vec<f64> = virtual_bids.iter().map(|v| v.unwrap_or(0.0)).collect();
    let allocation = IntegralAllocation::from_assignment(&full_cs, lift_assignment(&priced.assignment), &full_weights);

    let virtual_payments = lift(&priced.virtual_payments);
    let mut payments = vec![None; n];
    for i in 0..n {
        if let Some(v) = virtual_payments[i] {
            payments[i] = Some(to_currency(i, v)?);
        }
    }

    let lottery = match priced.lottery {
        None => None,
        Some((decomposition, sampled, charges)) => {
            let virtual_charges = lift(&charges);
            let mut currency = vec![None; n];
            for i in 0..n {
                if let Some(v) = virtual_charges[i] {
                    currency[i] = Some(to_currency(i, v)?);
                }
            }
            let win_probability = lift(
                &(0..keep.len()).map(|s| Some(decomposition.win_probability(s))).collect::<Vec<_>>(),
            )
            .into_iter()
            .map(|p| p.unwrap_or(0.0))
            .collect();
            let entries = decomposition
                .columns
                .iter()
                .zip(&decomposition.probabilities)
                .map(|(col, &probability)| LotteryEntry {
                    allocation: IntegralAllocation::from_assignment(
                        &full_cs,
                        lift_assignment(&col.assignment),
                        &full_weights,
                    ),
                    probability,
                })
                .collect();
            Some(Lottery {
                alpha: decomposition.alpha,
                entries,
                sampled,
                win_probability,
                charges: currency,
                virtual_charges,
                expected_weight: decomposition.expected_weight(),
            })
        }
    };

    Ok(AuctionOutcome {
        mechanism: config.mechanism,
        objective: config.objective,
        objective_value: allocation.weight,
        allocation,
        virtual_bids,
        payments,
        virtual_payments,
        payment_rule: priced.rule,
        lottery,
    })
}
