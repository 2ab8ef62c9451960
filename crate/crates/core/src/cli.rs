//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use crate::error::AuctionError;
use crate::mechanisms::{run_framework, AuctionOutcome, BidDistribution, Mechanism, MechanismConfig, Objective, PaymentRule};
use crate::model::{validate_instance, AuctionInstance};
use crate::sim::{generate_scenario, run_experiment, ScenarioConfig, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spectrum-auction", version, about = "Truthful spectrum auctions with spatial and temporal reuse")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one auction on an instance file and print the outcome as JSON.
    Run(RunArgs),
    /// Run the simulation sweep and write the metrics CSV.
    Sweep(SweepArgs),
    /// Write a random scenario as instance JSON.
    Generate(GenerateArgs),
    /// Check an instance file and print the validation report.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// exact-vcg, dca, mdca, mgca or cate.
    #[arg(long, value_parser = parse_mechanism)]
    pub mechanism: Mechanism,
    /// social or revenue.
    #[arg(long, default_value = "social", value_parser = parse_objective)]
    pub objective: Objective,
    /// Bid prior for revenue mode: uniform, exponential or gaussian.
    #[arg(long, value_parser = parse_distribution)]
    pub distribution: Option<BidDistribution>,
    /// Minimum virtual price per minute (revenue mode).
    #[arg(long, default_value_t = 0.0)]
    pub reserve: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Scenario template as JSON; flags below override its request count,
    /// distribution, trials and seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [20usize, 40, 60, 80])]
    pub n_requests: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_mechanism, default_value = "dca,mdca,mgca,cate")]
    pub mechanism: Vec<Mechanism>,
    #[arg(long, value_delimiter = ',', value_parser = parse_distribution, default_value = "uniform,exponential,gaussian")]
    pub distribution: Vec<BidDistribution>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 0.0)]
    pub reserve: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n_requests: Option<usize>,
    #[arg(long, value_parser = parse_distribution)]
    pub distribution: Option<BidDistribution>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Which trial of the seeded scenario stream to write.
    #[arg(long, default_value_t = 0)]
    pub trial: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub instance: PathBuf,
}

fn parse_mechanism(s: &str) -> Result<Mechanism, String> {
    s.parse().map_err(|e: AuctionError| e.to_string())
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    s.parse().map_err(|e: AuctionError| e.to_string())
}

fn parse_distribution(s: &str) -> Result<BidDistribution, String> {
    s.parse().map_err(|e: AuctionError| e.to_string())
}

/// Marks errors caused by the invocation rather than the data.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<AuctionError>() {
            return match e {
                AuctionError::Config(_) => EXIT_CONFIG,
                _ => EXIT_INVALID,
            };
        }
        if cause.is::<UsageError>() || cause.is::<serde_json::Error>() || cause.is::<std::io::Error>() {
            return EXIT_CONFIG;
        }
    }
    EXIT_INVALID
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(stderr, "{e}");
            return EXIT_CONFIG;
        }
        Err(e) => {
            let _ = write!(stdout, "{e}");
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Run(a) => run(a, stdout),
        Command::Sweep(a) => sweep(a, stdout),
        Command::Generate(a) => generate(a, stdout),
        Command::Validate(a) => validate(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e:#}");
            exit_code(&e)
        }
    }
}

fn read_instance(path: &Path) -> anyhow::Result<AuctionInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_scenario(path: Option<&Path>) -> anyhow::Result<ScenarioConfig> {
    match path {
        None => Ok(ScenarioConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => stdout.write_all(bytes).context("writing to stdout"),
    }
}

#[derive(Debug, Serialize)]
struct WinnerReport {
    id: usize,
    channel: usize,
    bid: f64,
    payment: Option<f64>,
    virtual_payment: Option<f64>,
}

#[derive(Debug, Serialize)]
struct EntryReport {
    probability: f64,
    /// Request id to channel id.
    winners: BTreeMap<usize, usize>,
}

#[derive(Debug, Serialize)]
struct LotteryReport {
    alpha: f64,
    expected_weight: f64,
    entries: Vec<EntryReport>,
    win_probability: BTreeMap<usize, f64>,
    charges: BTreeMap<usize, f64>,
}

#[derive(Debug, Serialize)]
struct OutcomeReport {
    mechanism: Mechanism,
    objective: Objective,
    payment_rule: PaymentRule,
    objective_value: f64,
    revenue: f64,
    winners: Vec<WinnerReport>,
    /// Requests removed by the reserve.
    filtered: Vec<usize>,
    lottery: Option<LotteryReport>,
}

fn report(instance: &AuctionInstance, outcome: &AuctionOutcome) -> OutcomeReport {
    let rid = |i: usize| instance.requests[i].id;
    let cid = |j: usize| instance.channels[j].id;
    let winners = outcome
        .allocation
        .winners()
        .map(|i| WinnerReport {
            id: rid(i),
            channel: cid(outcome.allocation.assignment[i].unwrap_or_default()),
            bid: instance.requests[i].bid,
            payment: outcome.payments[i],
            virtual_payment: outcome.virtual_payments[i],
        })
        .collect();
    let lottery = outcome.lottery.as_ref().map(|l| LotteryReport {
        alpha: l.alpha,
        expected_weight: l.expected_weight,
        entries: l
            .entries
            .iter()
            .map(|e| EntryReport {
                probability: e.probability,
                winners: e.allocation.winners().map(|i| (rid(i), cid(e.allocation.assignment[i].unwrap_or_default()))).collect(),
            })
            .collect(),
        win_probability: l.win_probability.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(i, p)| (rid(i), *p)).collect(),
        charges: l.charges.iter().enumerate().filter_map(|(i, c)| c.map(|c| (rid(i), c))).collect(),
    });
    OutcomeReport {
        mechanism: outcome.mechanism,
        objective: outcome.objective,
        payment_rule: outcome.payment_rule,
        objective_value: outcome.objective_value,
        revenue: outcome.revenue(),
        winners,
        filtered: outcome.virtual_bids.iter().enumerate().filter(|(_, v)| v.is_none()).map(|(i, _)| rid(i)).collect(),
        lottery,
    }
}

fn run(args: RunArgs, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let instance = read_instance(&args.instance)?;
    if args.objective == Objective::Revenue && args.distribution.is_none() {
        return Err(AuctionError::Config("revenue mode needs --distribution".into()).into());
    }
    let config = MechanismConfig {
        objective: args.objective,
        reserve: args.reserve,
        distribution: args.distribution,
        rng_seed: args.seed,
        ..MechanismConfig::social(args.mechanism)
    };
    let outcome = match run_framework(&instance, &config) {
        Err(AuctionError::InvalidInstance(report)) => {
            writeln!(stdout, "{report}")?;
            return Ok(EXIT_INVALID);
        }
        other => other?,
    };
    let mut json = serde_json::to_vec_pretty(&report(&instance, &outcome))?;
    json.push(b'\n');
    emit(args.out.as_deref(), stdout, &json)?;
    Ok(EXIT_OK)
}

fn sweep(args: SweepArgs, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let template = read_scenario(args.config.as_deref())?;
    if args.n_requests.is_empty() || args.mechanism.is_empty() || args.distribution.is_empty() {
        return Err(UsageError("sweep needs at least one request count, mechanism and distribution".into()).into());
    }
    let mut sweep = SweepConfig::grid(
        &args.n_requests,
        &args.distribution,
        &args.mechanism,
        args.trials.unwrap_or(template.trials),
        args.seed.unwrap_or(template.rng_seed),
    );
    for s in &mut sweep.scenarios {
        *s = ScenarioConfig { n_requests: s.n_requests, bid_distribution: s.bid_distribution, trials: s.trials, rng_seed: s.rng_seed, ..template.clone() };
    }
    sweep.reserve = args.reserve;
    info!("sweep over {} scenarios", sweep.scenarios.len());
    let table = run_experiment(&sweep)?;
    emit(args.out.as_deref(), stdout, table.to_csv_string()?.as_bytes())?;
    Ok(EXIT_OK)
}

fn generate(args: GenerateArgs, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let mut config = read_scenario(args.config.as_deref())?;
    if let Some(n) = args.n_requests {
        config.n_requests = n;
    }
    if let Some(d) = args.distribution {
        config.bid_distribution = d;
    }
    if let Some(s) = args.seed {
        config.rng_seed = s;
    }
    config.check()?;
    let instance = generate_scenario(&config, args.trial);
    let mut json = serde_json::to_vec_pretty(&instance)?;
    json.push(b'\n');
    emit(args.out.as_deref(), stdout, &json)?;
    Ok(EXIT_OK)
}

fn validate(args: ValidateArgs, stdout: &mut dyn Write) -> anyhow::Result<i32> {
    let instance = read_instance(&args.instance)?;
    let report = validate_instance(&instance);
    if report.is_valid() {
        writeln!(stdout, "instance is valid: {} requests, {} channels", instance.n_requests(), instance.n_channels())?;
        Ok(EXIT_OK)
    } else {
        writeln!(stdout, "{report}")?;
        Ok(EXIT_INVALID)
    }
}
