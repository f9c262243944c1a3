//! `longrate`: rate conversion, curves, rational kernel models, long-rate
//! estimation and audits from the command line.
//!
//! Exit codes: 0 success, 1 an audit check failed, 2 invalid input.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod audit;
mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use longrate_core::montecarlo::CashFlow;
use longrate_core::termstructure::RateConvention;

#[derive(Parser)]
#[command(name = "longrate", version, about = "Long-horizon term-structure analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert a rate between quotation conventions.
    Convert(ConvertArgs),
    /// Tabulate discount factors and rates of a curve or a model state.
    Curve(CurveArgs),
    /// Discount function of a mixture of exponential discounters.
    Aggregate(AggregateArgs),
    /// Simulate the model's martingale drivers and kernel.
    Simulate(SimulateArgs),
    /// Value a schedule of cash flows.
    Value(ValueArgs),
    /// Estimate a long rate from bond prices at increasing maturities.
    Longrate(LongrateArgs),
    /// Classify the asymptotic shape of a discount curve.
    Classify(ClassifyArgs),
    /// Run an audit; exits with 1 when any check fails.
    #[command(subcommand)]
    Audit(AuditCommand),
    /// Build a curve from a banded declining-rate schedule.
    Greenbook(GreenbookArgs),
}

#[derive(Subcommand)]
enum AuditCommand {
    /// Long exponential rates must never fall (along simulated paths, or for a curve).
    Dir(DirArgs),
    /// Long rates of different conventions must be mutually consistent.
    Strat(StratArgs),
    /// Pricing-kernel conditions and the deflated-bond martingale property.
    Kernel(KernelArgs),
    /// Certificate that the kernel is asymptotically tail-Pareto with a given index.
    Pareto(ParetoArgs),
}

#[derive(Args)]
struct ConvertArgs {
    /// Valuation time.
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Maturity.
    #[arg(long = "T")]
    maturity: f64,
    /// Convention of the input: exp, libor, pareto:<index>, zc:<frequency>.
    #[arg(long)]
    from: RateConvention,
    /// Convention of the output.
    #[arg(long, default_value = "exp")]
    to: RateConvention,
    #[arg(long, allow_negative_numbers = true)]
    value: f64,
}

/// A model file or bundled model name.
#[derive(Args, Clone)]
struct ModelArg {
    /// Model JSON file, or the name of a bundled model (ref1f, ref2f, pareto2, ...).
    #[arg(long)]
    model: Option<String>,
}

/// A curve file or bundled curve name, optionally with a tail model.
#[derive(Args, Clone)]
struct CurveArg {
    /// Curve CSV (`maturity_years,discount_factor`) or a bundled curve (flat-exp, hyperbolic, pareto3-curve).
    #[arg(long)]
    curve: Option<String>,
    /// Continuation past the last grid point: exp:<rate> or pareto:<index>:<rate>.
    #[arg(long)]
    tail: Option<String>,
}

#[derive(Args, Clone)]
struct StateArgs {
    /// Valuation time.
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Value of the first factor M_t.
    #[arg(long, default_value_t = 1.0)]
    m: f64,
    /// Value of the second factor N_t (two-factor models).
    #[arg(long = "n", default_value_t = 1.0)]
    n: f64,
}

#[derive(Args, Clone)]
struct SimArgs {
    /// Random seed; falls back to the model file's `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of paths; falls back to `run.n_paths`, then to the command default.
    #[arg(long)]
    paths: Option<usize>,
    /// Simulation times, comma separated; falls back to `run.grid`, then to the command default.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    curve: CurveArg,
    /// Times to maturity to tabulate, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,5,10,20,30,50,100,200,500,1000")]
    maturities: Vec<f64>,
    /// Write the curve (its own grid) as CSV to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AggregateArgs {
    /// Mixture as inline JSON or a JSON file, e.g. {"kind":"gamma","shape":2,"mean_rate":0.05}.
    #[arg(long)]
    mixture: String,
    #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
    times: Vec<f64>,
    /// Also draw this many calamity times and report empirical survival.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Censoring cap on sampled calamity times.
    #[arg(long, default_value_t = longrate_core::aggregation::DEFAULT_CENSOR_CAP)]
    cap: f64,
    /// Write the sampled calamity times as CSV to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    sim: SimArgs,
    /// Write the ensemble (`path,t,M[,N]`) as CSV to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    ClosedForm,
    Simulation,
}

#[derive(Args)]
struct ValueArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    state: StateArgs,
    /// Cash flow, e.g. "T=10,amount=1" or "T=1,M=1,cap=1000"; repeatable.
    #[arg(long = "flow", required = true)]
    flows: Vec<CashFlow>,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    /// Write the valuation report as JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HorizonArgs {
    /// Largest time to maturity.
    #[arg(long, default_value_t = 1e8)]
    horizon: f64,
    /// Smallest time to maturity.
    #[arg(long, default_value_t = 10.0)]
    start: f64,
    #[arg(long, default_value_t = 4)]
    per_decade: usize,
}

#[derive(Args)]
struct LongrateArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    curve: CurveArg,
    /// Convention: exp, libor, pareto:<index>, zc:<frequency>.
    #[arg(long)]
    conv: RateConvention,
    #[command(flatten)]
    horizon: HorizonArgs,
    /// Write the trace (`horizon,rate`) as CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the estimate as JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    curve: CurveArg,
    /// Also report the long rate propagated to these times.
    #[arg(long, value_delimiter = ',')]
    at: Option<Vec<f64>>,
    /// Convention for the propagated long rates.
    #[arg(long, default_value = "libor")]
    conv: RateConvention,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DirArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    curve: CurveArg,
    #[command(flatten)]
    sim: SimArgs,
    /// Times at which long rates are estimated, comma separated.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[command(flatten)]
    horizon: HorizonArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StratArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    state: StateArgs,
    #[command(flatten)]
    curve: CurveArg,
    /// Tail-Pareto indices to compare, comma separated (the model's own index is always added).
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,3")]
    indices: Vec<f64>,
    #[command(flatten)]
    horizon: HorizonArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    sim: SimArgs,
    /// Times at which kernel means are compared with their expectation.
    #[arg(long, value_delimiter = ',', default_value = "1,5,10,20")]
    probes: Vec<f64>,
    /// Bond maturity for the deflated-bond check.
    #[arg(long = "T", default_value_t = 10.0)]
    maturity: f64,
    /// Times for the deflated-bond check.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,5")]
    bond_times: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParetoArgs {
    #[command(flatten)]
    model: ModelArg,
    #[command(flatten)]
    sim: SimArgs,
    /// Index to certify; defaults to the model's own.
    #[arg(long)]
    index: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Compounding {
    Forward,
    Spot,
}

#[derive(Args)]
struct GreenbookArgs {
    /// Schedule JSON with contiguous bands {"from", "to", "rate"}, the last one open.
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long, value_enum, default_value_t = Compounding::Forward)]
    compounding: Compounding,
    #[arg(long, value_delimiter = ',')]
    maturities: Option<Vec<f64>>,
    /// Write the built curve as CSV to this file.
    #[arg(long)]
    curve_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// What a successful run found.
enum Outcome {
    Done,
    AuditFailed,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("LONGRATE_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| anyhow::anyhow!("LONGRATE_THREADS must be a positive integer, got '{v}'"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    configure_threads()?;
    match cli.command {
        Command::Convert(a) => commands::convert(&a),
        Command::Curve(a) => commands::curve(&a),
        Command::Aggregate(a) => commands::aggregate(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Value(a) => commands::value(&a),
        Command::Longrate(a) => commands::longrate(&a),
        Command::Classify(a) => commands::classify(&a),
        Command::Greenbook(a) => commands::greenbook(&a),
        Command::Audit(AuditCommand::Dir(a)) => audit::dir(&a),
        Command::Audit(AuditCommand::Strat(a)) => audit::strat(&a),
        Command::Audit(AuditCommand::Kernel(a)) => audit::kernel(&a),
        Command::Audit(AuditCommand::Pareto(a)) => audit::pareto(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::AuditFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
