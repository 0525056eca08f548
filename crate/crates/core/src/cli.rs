//! Command-line front end.
//!
//! ```text
//! samplekit [--seed S] [--json] [--out-dir DIR] [--config FILE] <survey|mc|mcmc|diag> <algorithm> [flags]
//! ```
//!
//! Every command produces a JSON report `{command, version, seed, config, result}`.
//! With `--json` it goes to stdout; otherwise a short human summary is
//! printed. With `--out-dir` the report is written to `summary.json`, the
//! resolved configuration to `config.txt` and any samples, traces or tables
//! to CSV files next to them.
//!
//! `config.txt` holds one `key = value` line per flag; passing it back with
//! `--config` reproduces the run byte for byte. Flags given on the command line
//! override values from a config file.
//!
//! Exit status: 0 on success, 1 for invalid input or configuration, 2 when a
//! valid computation fails.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::density::{Density, Proposal, ProposalSampler, Quantile, TargetDensity};
use crate::diagnostics::{
    acceptance_tradeoff_probe, chain_distribution_fit, distribution_fit, effective_sample_size, hmc_scaling,
    mixing_report, random_walk_scaling, ScalingExperiment,
};
use crate::efficient::{adler_gibbs, hmc, ordered_overrelax_gibbs, HmcConfig};
use crate::error::{Error, Result};
use crate::io::{format_float, load_population, to_json, write_csv, write_trace_csv};
use crate::mc::{
    estimate_pi, importance_estimate, inverse_cdf_sample, rejection_calibrate_c, rejection_sample, CalibrationConfig,
};
use crate::mcmc::{
    gibbs_with_scan, metropolis, metropolis_hastings, slice_sample, ChainConfig, GaussianStepProposal,
    IndependenceProposal, InitialPoint, ScanOrder, SliceConfig, Trace,
};
use crate::rng::RngStream;
use crate::stats::{self, Divisor};
use crate::survey::{
    bootstrap_draw, cluster_estimate, cluster_variance, demo_population, ht_estimate, multistage_draw, neyman_allocate,
    proportional_allocation, snowball_draw, srs_mean_estimate, srs_variance, stratified_estimate, stratified_objective,
    stratified_variance, FinitePopulation, HtQuantity, Stage,
};

const COMMANDS: &[&str] = &["survey", "mc", "mcmc", "diag"];

#[derive(Parser, Debug)]
#[command(
    name = "samplekit",
    version,
    about = "Survey sampling and Monte Carlo experiments",
    args_override_self = true
)]
struct Cli {
    /// Seed of the root random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the JSON report on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Directory for summary.json, config.txt and CSV artifacts.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// File of `key = value` lines, one per flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Finite-population survey designs and estimators.
    #[command(subcommand)]
    Survey(SurveyCmd),
    /// Memoryless Monte Carlo.
    #[command(subcommand)]
    Mc(McCmd),
    /// Markov chain samplers.
    #[command(subcommand)]
    Mcmc(McmcCmd),
    /// Mixing diagnostics and scaling experiments.
    #[command(subcommand)]
    Diag(DiagCmd),
}

// ---------------------------------------------------------------- survey

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct DataArg {
    /// Population CSV (`value[,stratum][,cluster]`); defaults to the built-in 9-element example.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SrsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArg,
    /// Sample size.
    #[arg(long)]
    n: usize,
    /// Independent repetitions of the design.
    #[arg(long, default_value_t = 1)]
    reps: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct StratifiedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArg,
    /// Total sample size (ignored when an explicit allocation list is given).
    #[arg(long)]
    n: Option<usize>,
    /// `proportional`, `neyman`, or a comma-separated list of per-stratum sizes.
    #[arg(long, default_value = "proportional")]
    allocation: String,
    #[arg(long, default_value_t = 1)]
    reps: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ClusterArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArg,
    /// Number of clusters to sample.
    #[arg(long)]
    c: usize,
    #[arg(long, default_value_t = 1)]
    reps: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct MultistageArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArg,
    /// Comma-separated stages, e.g. `clusters:2,srs:1`.
    #[arg(long)]
    stages: String,
    #[arg(long, default_value_t = 1)]
    reps: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct NeymanArgs {
    #[command(flatten)]
    #[serde(flatten)]
    data: DataArg,
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SnowballArgs {
    /// Number of nodes in the graph.
    #[arg(long)]
    nodes: usize,
    /// Undirected edges `a-b`, comma-separated.
    #[arg(long, default_value = "")]
    edges: String,
    /// Seed nodes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<usize>,
    /// Probability that a sampled node recruits each neighbour.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 10)]
    max_rounds: usize,
}

#[derive(Subcommand, Debug)]
enum SurveyCmd {
    /// Simple random sampling without replacement.
    Srs(SrsArgs),
    /// Sampling with replacement.
    Bootstrap(SrsArgs),
    /// Stratified sampling with a proportional, Neyman or explicit allocation.
    Stratified(StratifiedArgs),
    /// Sample whole clusters.
    Cluster(ClusterArgs),
    /// Clusters, then elements within each selected cluster.
    Multistage(MultistageArgs),
    /// Variance-minimizing allocation across strata.
    Neyman(NeymanArgs),
    /// Link-tracing sample on a graph.
    Snowball(SnowballArgs),
}

// ---------------------------------------------------------------- mc

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct PiArgs {
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct InverseCdfArgs {
    /// `exponential[:rate]`, `uniform[:lo,hi]`, `cauchy[:loc,scale]` or `logistic[:loc,scale]`.
    #[arg(long)]
    quantile: String,
    #[arg(long)]
    n: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Statistic {
    /// First coordinate.
    X,
    /// Square of the first coordinate.
    X2,
}

impl Statistic {
    fn eval(self, x: &[f64]) -> f64 {
        match self {
            Statistic::X => x[0],
            Statistic::X2 => x[0] * x[0],
        }
    }
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ImportanceArgs {
    #[arg(long)]
    target: String,
    /// `normal:mean,sd` or `uniform:lo,hi`.
    #[arg(long)]
    proposal: String,
    #[arg(long)]
    n: usize,
    /// Function whose expectation is estimated.
    #[arg(long, value_enum, default_value_t = Statistic::X2)]
    h: Statistic,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct RejectionArgs {
    #[arg(long)]
    target: String,
    #[arg(long)]
    proposal: String,
    /// Envelope constant.
    #[arg(long)]
    c: f64,
    /// Accepted samples to collect.
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct CalibrateArgs {
    #[arg(long)]
    target: String,
    #[arg(long)]
    proposal: String,
    #[arg(long, default_value_t = 0.1)]
    initial_c: f64,
    #[arg(long, default_value_t = 1.5)]
    growth: f64,
    #[arg(long, default_value_t = 10_000)]
    probe_n: usize,
    #[arg(long, default_value_t = 1e12)]
    ceiling: f64,
}

#[derive(Subcommand, Debug)]
enum McCmd {
    /// Estimate pi from uniform points in the unit square.
    Pi(PiArgs),
    /// Draw through a quantile function.
    InverseCdf(InverseCdfArgs),
    /// Importance-weighted expectation of h(x).
    Importance(ImportanceArgs),
    /// Rejection sampling under c times a proposal.
    Rejection(RejectionArgs),
    /// Search for an envelope constant c.
    CalibrateC(CalibrateArgs),
}

// ---------------------------------------------------------------- mcmc

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct ChainArgs {
    /// Target density, `name[:params]`.
    #[arg(long, default_value = "normal")]
    target: String,
    /// Recorded iterations.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = crate::mcmc::DEFAULT_BURN_IN)]
    burn_in: usize,
    /// Starting point, comma-separated; random in the support when omitted.
    #[arg(long, value_delimiter = ',')]
    init: Vec<f64>,
}

impl ChainArgs {
    fn config(&self) -> ChainConfig {
        ChainConfig {
            n_samples: self.n,
            burn_in: self.burn_in,
            initial: if self.init.is_empty() {
                InitialPoint::RandomInSupport
            } else {
                InitialPoint::Point(self.init.clone())
            },
        }
    }
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct MetropolisArgs {
    #[command(flatten)]
    #[serde(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = 2.38)]
    sigma: f64,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct MhArgs {
    #[command(flatten)]
    #[serde(flatten)]
    chain: ChainArgs,
    /// Random-walk scale, used when no independence proposal is given.
    #[arg(long, default_value_t = 2.38)]
    sigma: f64,
    /// Independence proposal `normal:mean,sd` or `uniform:lo,hi`.
    #[arg(long)]
    proposal: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ScanArg {
    Fixed,
    Random,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct GibbsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    chain: ChainArgs,
    #[arg(long, value_enum, default_value_t = ScanArg::Fixed)]
    scan: ScanArg,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct SliceArgs {
    #[command(flatten)]
    #[serde(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = 1.0)]
    slice_width: f64,
    #[arg(long, default_value_t = 1000)]
    max_slices: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct HmcArgs {
    #[command(flatten)]
    #[serde(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 20)]
    leapfrog_steps: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct AdlerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = -0.9, allow_hyphen_values = true)]
    alpha: f64,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct OrderedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = crate::efficient::DEFAULT_K_ORDER)]
    k_order: usize,
}

#[derive(Subcommand, Debug)]
enum McmcCmd {
    /// Random-walk Metropolis with a Gaussian proposal.
    Metropolis(MetropolisArgs),
    /// Metropolis-Hastings.
    Mh(MhArgs),
    /// Gibbs sampling from Gaussian conditionals.
    Gibbs(GibbsArgs),
    /// Slice sampling with stepping out and shrinkage.
    Slice(SliceArgs),
    /// Hamiltonian Monte Carlo with leapfrog steps.
    Hmc(HmcArgs),
    /// Gibbs sampling with Adler's overrelaxation.
    Adler(AdlerArgs),
    /// Gibbs sampling with ordered overrelaxation.
    Ordered(OrderedArgs),
}

// ---------------------------------------------------------------- diag

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct RandomWalkArgs {
    /// Range widths, comma-separated and increasing.
    #[arg(long = "L", value_delimiter = ',', required = true)]
    #[serde(rename = "L")]
    l: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    delta: usize,
    #[arg(long, default_value_t = 50)]
    chains: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct HmcScalingArgs {
    #[arg(long = "L", value_delimiter = ',', required = true)]
    #[serde(rename = "L")]
    l: Vec<usize>,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    #[arg(long, default_value_t = 50)]
    chains: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct TradeoffArgs {
    #[arg(long, default_value_t = 1.0)]
    ell: f64,
    /// Proposal radii, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    deltas: Vec<f64>,
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, default_value_t = 20_000)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
struct MixingArgs {
    #[command(flatten)]
    #[serde(flatten)]
    chain: ChainArgs,
    #[arg(long, default_value_t = 2.38)]
    sigma: f64,
    #[arg(long, default_value_t = 50)]
    max_lag: usize,
}

#[derive(Subcommand, Debug)]
enum DiagCmd {
    /// Cover time of random-walk Metropolis against range width.
    RandomWalk(RandomWalkArgs),
    /// Cover time of HMC against range width.
    HmcScaling(HmcScalingArgs),
    /// Acceptance rate against proposal radius.
    Tradeoff(TradeoffArgs),
    /// Autocorrelation and effective sample size of a Metropolis chain.
    Mixing(MixingArgs),
}

// ---------------------------------------------------------------- driver

struct Outcome {
    result: Value,
    artifacts: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn new(result: Value) -> Self {
        Self {
            result,
            artifacts: Vec::new(),
        }
    }

    fn with(mut self, name: &str, bytes: Vec<u8>) -> Self {
        self.artifacts.push((name.to_string(), bytes));
        self
    }
}

#[derive(Serialize)]
struct Report<'a> {
    command: String,
    version: &'static str,
    seed: u64,
    config: &'a BTreeMap<String, String>,
    result: &'a Value,
}

/// Runs the command line `argv` (including the program name) against the process's stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 1;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                1
            } else {
                let _ = write!(out, "{}", e.render());
                0
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

/// Splices `--key value` pairs from `--config FILE` in right after the
/// subcommand, so that flags given explicitly later on the line win.
fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    let mut extra: Vec<OsString> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Malformed {
            line: i + 1,
            message: format!("expected `key = value` in {path}"),
        })?;
        let (key, value) = (key.trim().replace('_', "-"), value.trim());
        match value {
            "true" => extra.push(format!("--{key}").into()),
            "false" => {}
            _ => extra.push(format!("--{key}={value}").into()),
        }
    }
    let Some(cmd) = strs.iter().position(|a| COMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let insert_at = (cmd + 2).min(argv.len());
    let mut out = argv[..insert_at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[insert_at..]);
    Ok(out)
}

/// Flattens serialized arguments into `key -> value` strings, lists comma-joined.
fn config_echo<A: Serialize>(args: &A, seed: u64) -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    map.insert("seed".to_string(), seed.to_string());
    if let Ok(Value::Object(obj)) = serde_json::to_value(args) {
        for (k, v) in obj {
            let s = match v {
                Value::Null => continue,
                Value::String(s) => s,
                Value::Array(items) if items.is_empty() => continue,
                Value::Array(items) => items
                    .iter()
                    .map(|i| match i {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
                other => other.to_string(),
            };
            map.insert(k, s);
        }
    }
    map
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut rng = RngStream::new(cli.seed);
    let (name, config, outcome) = dispatch(&cli.command, cli.seed, &mut rng)?;
    let report = Report {
        command: name,
        version: env!("CARGO_PKG_VERSION"),
        seed: cli.seed,
        config: &config,
        result: &outcome.result,
    };
    let json = to_json(&report)?;
    if let Some(dir) = &cli.out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.json"), &json)?;
        let cfg_text: String = config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        fs::write(dir.join("config.txt"), cfg_text)?;
        for (file, bytes) in &outcome.artifacts {
            fs::write(dir.join(file), bytes)?;
        }
        writeln!(
            err,
            "wrote {} artifacts to {}",
            outcome.artifacts.len() + 2,
            dir.display()
        )?;
    }
    if cli.json {
        out.write_all(json.as_bytes())?;
    } else {
        writeln!(out, "{}", report.command)?;
        if let Value::Object(fields) = &outcome.result {
            for (k, v) in fields {
                let shown = v.to_string();
                if shown.len() <= 120 {
                    writeln!(out, "  {k}: {shown}")?;
                }
            }
        }
    }
    Ok(())
}

type Dispatched = (String, BTreeMap<String, String>, Outcome);

fn dispatch(cmd: &Command, seed: u64, rng: &mut RngStream) -> Result<Dispatched> {
    macro_rules! go {
        ($name:expr, $args:expr, $f:expr) => {{
            let args = $args;
            let outcome = $f(args, rng)?;
            Ok(($name.to_string(), config_echo(args, seed), outcome))
        }};
    }
    match cmd {
        Command::Survey(s) => match s {
            SurveyCmd::Srs(a) => go!("survey srs", a, survey_srs),
            SurveyCmd::Bootstrap(a) => go!("survey bootstrap", a, survey_bootstrap),
            SurveyCmd::Stratified(a) => go!("survey stratified", a, survey_stratified),
            SurveyCmd::Cluster(a) => go!("survey cluster", a, survey_cluster),
            SurveyCmd::Multistage(a) => go!("survey multistage", a, survey_multistage),
            SurveyCmd::Neyman(a) => go!("survey neyman", a, |a, _: &mut RngStream| survey_neyman(a)),
            SurveyCmd::Snowball(a) => go!("survey snowball", a, survey_snowball),
        },
        Command::Mc(m) => match m {
            McCmd::Pi(a) => go!("mc pi", a, mc_pi),
            McCmd::InverseCdf(a) => go!("mc inverse-cdf", a, mc_inverse_cdf),
            McCmd::Importance(a) => go!("mc importance", a, mc_importance),
            McCmd::Rejection(a) => go!("mc rejection", a, mc_rejection),
            McCmd::CalibrateC(a) => go!("mc calibrate-c", a, mc_calibrate),
        },
        Command::Mcmc(m) => match m {
            McmcCmd::Metropolis(a) => go!("mcmc metropolis", a, mcmc_metropolis),
            McmcCmd::Mh(a) => go!("mcmc mh", a, mcmc_mh),
            McmcCmd::Gibbs(a) => go!("mcmc gibbs", a, mcmc_gibbs),
            McmcCmd::Slice(a) => go!("mcmc slice", a, mcmc_slice),
            McmcCmd::Hmc(a) => go!("mcmc hmc", a, mcmc_hmc),
            McmcCmd::Adler(a) => go!("mcmc adler", a, mcmc_adler),
            McmcCmd::Ordered(a) => go!("mcmc ordered", a, mcmc_ordered),
        },
        Command::Diag(d) => match d {
            DiagCmd::RandomWalk(a) => go!("diag random-walk", a, diag_random_walk),
            DiagCmd::HmcScaling(a) => go!("diag hmc-scaling", a, diag_hmc_scaling),
            DiagCmd::Tradeoff(a) => go!("diag tradeoff", a, diag_tradeoff),
            DiagCmd::Mixing(a) => go!("diag mixing", a, diag_mixing),
        },
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows)?;
    Ok(buf)
}

fn single_column_csv(name: &str, values: &[f64]) -> Result<Vec<u8>> {
    csv_bytes(
        &["index", name],
        values
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), format_float(*v)]),
    )
}

fn positive(name: &str, n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter(format!("--{name} must be at least 1")))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------- survey handlers

fn population(d: &DataArg) -> Result<FinitePopulation> {
    match &d.data {
        Some(path) => load_population(path),
        None => Ok(demo_population()),
    }
}

/// Mean and divisor-`reps` variance of replicated estimates.
fn replicate_summary(estimates: &[f64]) -> Result<Value> {
    let m = stats::mean(estimates)?;
    let v = stats::variance(estimates, Divisor::Biased)?;
    Ok(json!({ "empirical_mean": m, "empirical_variance": v }))
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(x), Value::Object(y)) = (&mut a, b) {
        x.extend(y);
    }
    a
}

fn survey_srs(a: &SrsArgs, rng: &mut RngStream) -> Result<Outcome> {
    positive("reps", a.reps)?;
    let pop = population(&a.data)?;
    let analytic = srs_variance(&pop, a.n)?;
    let mut estimates = Vec::with_capacity(a.reps);
    let mut first = None;
    for _ in 0..a.reps {
        let est = srs_mean_estimate(&pop, a.n, rng)?;
        estimates.push(est.point);
        first.get_or_insert(est.sample_indices);
    }
    let result = json!({
        "population_size": pop.len(),
        "population_mean": pop.mean(),
        "analytic_variance": analytic,
        "reps": a.reps,
        "first_sample": first,
    });
    Ok(Outcome::new(merge(result, replicate_summary(&estimates)?))
        .with("estimates.csv", single_column_csv("estimate", &estimates)?))
}

fn survey_bootstrap(a: &SrsArgs, rng: &mut RngStream) -> Result<Outcome> {
    positive("reps", a.reps)?;
    positive("n", a.n)?;
    let pop = population(&a.data)?;
    let n_pop = pop.len() as f64;
    let analytic = pop.variance() * (n_pop - 1.0) / n_pop / a.n as f64;
    let mut estimates = Vec::with_capacity(a.reps);
    let mut first = None;
    for _ in 0..a.reps {
        let idx = bootstrap_draw(&pop, a.n, rng)?;
        estimates.push(idx.iter().map(|&i| pop.values()[i]).sum::<f64>() / a.n as f64);
        first.get_or_insert(idx);
    }
    let result = json!({
        "population_size": pop.len(),
        "population_mean": pop.mean(),
        "analytic_variance": analytic,
        "reps": a.reps,
        "first_sample": first,
    });
    Ok(Outcome::new(merge(result, replicate_summary(&estimates)?))
        .with("estimates.csv", single_column_csv("estimate", &estimates)?))
}

fn stratum_summary(pop: &FinitePopulation) -> Result<(Vec<usize>, Vec<f64>)> {
    let groups = pop.strata()?;
    let sizes = groups.iter().map(|g| g.len()).collect();
    let sds = groups
        .iter()
        .map(|g| crate::survey::unit_variance(&g.values(pop)).sqrt())
        .collect();
    Ok((sizes, sds))
}

fn survey_stratified(a: &StratifiedArgs, rng: &mut RngStream) -> Result<Outcome> {
    positive("reps", a.reps)?;
    let pop = population(&a.data)?;
    let (sizes, sds) = stratum_summary(&pop)?;
    let need_n = || {
        a.n.ok_or_else(|| Error::InvalidParameter("--n is required for this allocation".into()))
    };
    let allocation = match a.allocation.as_str() {
        "proportional" => proportional_allocation(&sizes, need_n()?)?,
        "neyman" => neyman_allocate(&sizes, &sds, need_n()?)?,
        list => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidParameter(format!("bad allocation entry `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let analytic = stratified_variance(&pop, &allocation)?;
    let n_total: usize = allocation.iter().sum();
    let mut estimates = Vec::with_capacity(a.reps);
    for _ in 0..a.reps {
        estimates.push(stratified_estimate(&pop, &allocation, rng)?.point);
    }
    let result = json!({
        "population_mean": pop.mean(),
        "strata_sizes": sizes,
        "allocation": allocation,
        "analytic_variance": analytic,
        "srs_variance_same_n": srs_variance(&pop, n_total)?,
        "reps": a.reps,
    });
    Ok(Outcome::new(merge(result, replicate_summary(&estimates)?))
        .with("estimates.csv", single_column_csv("estimate", &estimates)?))
}

fn survey_cluster(a: &ClusterArgs, rng: &mut RngStream) -> Result<Outcome> {
    positive("reps", a.reps)?;
    let pop = population(&a.data)?;
    let analytic = cluster_variance(&pop, a.c)?;
    let mut estimates = Vec::with_capacity(a.reps);
    let mut first = None;
    for _ in 0..a.reps {
        let est = cluster_estimate(&pop, a.c, rng)?;
        estimates.push(est.point);
        first.get_or_insert(est.sample_indices);
    }
    let result = json!({
        "population_mean": pop.mean(),
        "clusters": pop.clusters()?.len(),
        "analytic_variance": analytic,
        "reps": a.reps,
        "first_sample": first,
    });
    Ok(Outcome::new(merge(result, replicate_summary(&estimates)?))
        .with("estimates.csv", single_column_csv("estimate", &estimates)?))
}

fn parse_stages(spec: &str) -> Result<Vec<Stage>> {
    spec.split(',')
        .map(|s| {
            let (kind, k) = s
                .trim()
                .split_once(':')
                .ok_or_else(|| Error::InvalidParameter(format!("stage `{s}` must look like clusters:c or srs:n")))?;
            let k: usize = k
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad stage size in `{s}`")))?;
            match kind.trim() {
                "clusters" => Ok(Stage::Clusters { c: k }),
                "srs" => Ok(Stage::Srs { n: k }),
                other => Err(Error::InvalidParameter(format!("unknown stage kind `{other}`"))),
            }
        })
        .collect()
}

fn survey_multistage(a: &MultistageArgs, rng: &mut RngStream) -> Result<Outcome> {
    positive("reps", a.reps)?;
    let pop = population(&a.data)?;
    let stages = parse_stages(&a.stages)?;
    let mut estimates = Vec::with_capacity(a.reps);
    let mut first = None;
    for _ in 0..a.reps {
        let s = multistage_draw(&pop, &stages, rng)?;
        let values: Vec<f64> = s.indices.iter().map(|&i| pop.values()[i]).collect();
        estimates.push(ht_estimate(
            &values,
            &s.inclusion_probabilities,
            HtQuantity::Mean {
                population_size: pop.len(),
            },
        )?);
        first.get_or_insert(s);
    }
    let result = json!({
        "population_mean": pop.mean(),
        "stages": stages,
        "reps": a.reps,
        "first_sample": first,
    });
    Ok(Outcome::new(merge(result, replicate_summary(&estimates)?))
        .with("estimates.csv", single_column_csv("ht_mean", &estimates)?))
}

fn survey_neyman(a: &NeymanArgs) -> Result<Outcome> {
    let pop = population(&a.data)?;
    let (sizes, sds) = stratum_summary(&pop)?;
    let neyman = neyman_allocate(&sizes, &sds, a.n)?;
    let proportional = proportional_allocation(&sizes, a.n)?;
    Ok(Outcome::new(json!({
        "strata_sizes": sizes,
        "strata_sd": sds,
        "allocation": neyman,
        "objective": stratified_objective(&sizes, &sds, &neyman),
        "proportional_allocation": proportional,
        "proportional_objective": stratified_objective(&sizes, &sds, &proportional),
    })))
}

fn survey_snowball(a: &SnowballArgs, rng: &mut RngStream) -> Result<Outcome> {
    let mut adjacency = vec![Vec::new(); a.nodes];
    for edge in a.edges.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (x, y) = edge
            .split_once('-')
            .and_then(|(x, y)| Some((x.trim().parse::<usize>().ok()?, y.trim().parse::<usize>().ok()?)))
            .ok_or_else(|| Error::InvalidParameter(format!("edge `{edge}` must look like a-b")))?;
        if x >= a.nodes || y >= a.nodes {
            return Err(Error::InvalidParameter(format!(
                "edge `{edge}` refers to a missing node"
            )));
        }
        adjacency[x].push(y);
        adjacency[y].push(x);
    }
    let sample = snowball_draw(&adjacency, &a.seeds, a.p, a.max_rounds, rng)?;
    Ok(Outcome::new(json!({ "sample": sample, "sample_size": sample.len() })))
}

// ---------------------------------------------------------------- mc handlers

fn mc_pi(a: &PiArgs, rng: &mut RngStream) -> Result<Outcome> {
    positive("n", a.n)?;
    let estimate = estimate_pi(a.n, rng)?;
    let q = std::f64::consts::FRAC_PI_4;
    Ok(Outcome::new(json!({
        "estimate": estimate,
        "std_error": 4.0 * (q * (1.0 - q) / a.n as f64).sqrt(),
        "n": a.n,
    })))
}

fn fit_json(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Value {
    match distribution_fit(samples, cdf) {
        Ok(f) => serde_json::to_value(f).unwrap_or(Value::Null),
        Err(_) => Value::Null,
    }
}

fn mc_inverse_cdf(a: &InverseCdfArgs, rng: &mut RngStream) -> Result<Outcome> {
    let q = Quantile::parse(&a.quantile)?;
    let xs = inverse_cdf_sample(|u| q.inverse_cdf(u), a.n, rng)?;
    let m = stats::moments(&xs)?;
    Ok(Outcome::new(json!({
        "n": a.n,
        "moments": m,
        "fit": fit_json(&xs, |x| q.cdf(x)),
    }))
    .with("samples.csv", single_column_csv("x", &xs)?))
}

fn target_and_proposal(target: &str, proposal: &str) -> Result<(Density, Proposal)> {
    let t = Density::parse(target)?;
    let mut p = Proposal::parse(proposal)?;
    if let Proposal::Normal { ref mut dim, .. } = p {
        *dim = t.dimension();
    }
    if p.dimension() != t.dimension() {
        return Err(Error::LengthMismatch {
            left: p.dimension(),
            right: t.dimension(),
        });
    }
    Ok((t, p))
}

fn mc_importance(a: &ImportanceArgs, rng: &mut RngStream) -> Result<Outcome> {
    let (target, proposal) = target_and_proposal(&a.target, &a.proposal)?;
    let h = a.h;
    let est = importance_estimate(&target, &proposal, |x| h.eval(x), a.n, rng)?;
    Ok(Outcome::new(
        serde_json::to_value(est).map_err(|e| Error::Io(e.to_string()))?,
    ))
}

fn mc_rejection(a: &RejectionArgs, rng: &mut RngStream) -> Result<Outcome> {
    let (target, proposal) = target_and_proposal(&a.target, &a.proposal)?;
    let out = rejection_sample(&target, &proposal, a.c, a.n, rng)?;
    let first: Vec<f64> = out.samples.iter().map(|x| x[0]).collect();
    let fit = match target.cdf(0.0) {
        Some(_) if target.dimension() == 1 => fit_json(&first, |x| target.cdf(x).unwrap_or(f64::NAN)),
        _ => Value::Null,
    };
    Ok(Outcome::new(json!({
        "accepted": out.accepted,
        "proposals": out.proposals,
        "acceptance_rate": out.acceptance_rate,
        "predicted_acceptance_rate": 1.0 / a.c,
        "fit": fit,
    }))
    .with("samples.csv", single_column_csv("x0", &first)?))
}

fn mc_calibrate(a: &CalibrateArgs, rng: &mut RngStream) -> Result<Outcome> {
    let (target, proposal) = target_and_proposal(&a.target, &a.proposal)?;
    let cfg = CalibrationConfig {
        initial_c: a.initial_c,
        growth_factor: a.growth,
        probe_n: a.probe_n,
        ceiling: a.ceiling,
    };
    let c = rejection_calibrate_c(&target, &proposal, &cfg, rng)?;
    Ok(Outcome::new(
        serde_json::to_value(c).map_err(|e| Error::Io(e.to_string()))?,
    ))
}

// ---------------------------------------------------------------- mcmc handlers

fn trace_summary(trace: &Trace, target: &Density) -> Result<Value> {
    let d = trace.dimension();
    let mut means = Vec::with_capacity(d);
    let mut variances = Vec::with_capacity(d);
    let mut ess = Vec::with_capacity(d);
    for j in 0..d {
        let xs = trace.coordinate(j);
        means.push(stats::mean(&xs)?);
        variances.push(if xs.len() > 1 {
            stats::variance(&xs, Divisor::Unbiased)?
        } else {
            f64::NAN
        });
        ess.push(effective_sample_size(&xs).ok());
    }
    let (fit, thin) = match (d, target.cdf(0.0)) {
        (1, Some(_)) => match chain_distribution_fit(&trace.coordinate(0), |x| target.cdf(x).unwrap_or(f64::NAN)) {
            Ok((f, thin)) => (serde_json::to_value(f).unwrap_or(Value::Null), Some(thin)),
            Err(_) => (Value::Null, None),
        },
        _ => (Value::Null, None),
    };
    let analytic = target.moments().map(|(m, v)| json!({ "mean": m, "variance": v }));
    Ok(json!({
        "n_samples": trace.len(),
        "acceptance_rate": trace.acceptance_rate(),
        "proposals_total": trace.proposals_total,
        "accepted_total": trace.accepted_total,
        "mean": means,
        "variance": variances,
        "ess": ess,
        "analytic_moments": analytic,
        "fit": fit,
        "fit_thinning": thin,
    }))
}

fn chain_outcome(trace: &Trace, target: &Density) -> Result<Outcome> {
    let mut csv = Vec::new();
    write_trace_csv(&mut csv, trace)?;
    Ok(Outcome::new(trace_summary(trace, target)?).with("trace.csv", csv))
}

fn mcmc_metropolis(a: &MetropolisArgs, rng: &mut RngStream) -> Result<Outcome> {
    let target = Density::parse(&a.chain.target)?;
    let trace = metropolis(&target, &GaussianStepProposal::new(a.sigma)?, &a.chain.config(), rng)?;
    chain_outcome(&trace, &target)
}

fn mcmc_mh(a: &MhArgs, rng: &mut RngStream) -> Result<Outcome> {
    let target = Density::parse(&a.chain.target)?;
    let cfg = a.chain.config();
    let trace = match &a.proposal {
        Some(spec) => {
            let (_, p) = target_and_proposal(&a.chain.target, spec)?;
            metropolis_hastings(&target, &IndependenceProposal(p), &cfg, rng)?
        }
        None => metropolis_hastings(&target, &GaussianStepProposal::new(a.sigma)?, &cfg, rng)?,
    };
    chain_outcome(&trace, &target)
}

/// Gaussian conditional sampler of a built-in target, or an error naming the first coordinate without one.
fn gaussian_target(spec: &str) -> Result<Density> {
    let target = Density::parse(spec)?;
    let x = vec![0.0; target.dimension()];
    match (0..target.dimension()).find(|&j| target.gaussian_conditional(j, &x).is_none()) {
        Some(j) => Err(Error::NonGaussianConditional(j)),
        None => Ok(target),
    }
}

fn conditional_draw(target: &Density) -> impl FnMut(usize, &[f64], &mut RngStream) -> f64 + '_ {
    move |j, x, r| {
        let (m, s) = target.gaussian_conditional(j, x).unwrap_or((f64::NAN, f64::NAN));
        m + s * r.standard_normal()
    }
}

fn mcmc_gibbs(a: &GibbsArgs, rng: &mut RngStream) -> Result<Outcome> {
    let target = gaussian_target(&a.chain.target)?;
    let scan = match a.scan {
        ScanArg::Fixed => ScanOrder::Fixed,
        ScanArg::Random => ScanOrder::Random,
    };
    let trace = gibbs_with_scan(
        conditional_draw(&target),
        target.dimension(),
        &a.chain.config(),
        scan,
        rng,
    )?;
    chain_outcome(&trace, &target)
}

fn mcmc_slice(a: &SliceArgs, rng: &mut RngStream) -> Result<Outcome> {
    let target = Density::parse(&a.chain.target)?;
    let sc = SliceConfig {
        width: a.slice_width,
        max_slices: a.max_slices,
    };
    let trace = slice_sample(&target, &sc, &a.chain.config(), rng)?;
    chain_outcome(&trace, &target)
}

fn mcmc_hmc(a: &HmcArgs, rng: &mut RngStream) -> Result<Outcome> {
    let target = Density::parse(&a.chain.target)?;
    let cfg = HmcConfig::new(a.eta, a.leapfrog_steps, a.chain.config())?;
    let out = hmc(&target, &cfg, rng)?;
    let mut outcome = chain_outcome(&out.trace, &target)?;
    let mean_abs_dh = out.delta_h.iter().map(|d| d.abs()).sum::<f64>() / out.delta_h.len() as f64;
    outcome.result = merge(outcome.result, json!({ "mean_abs_delta_h": mean_abs_dh }));
    Ok(outcome)
}

fn mcmc_adler(a: &AdlerArgs, rng: &mut RngStream) -> Result<Outcome> {
    let target = gaussian_target(&a.chain.target)?;
    let trace = adler_gibbs(
        |j, x| target.gaussian_conditional(j, x),
        target.dimension(),
        a.alpha,
        &a.chain.config(),
        rng,
    )?;
    chain_outcome(&trace, &target)
}

fn mcmc_ordered(a: &OrderedArgs, rng: &mut RngStream) -> Result<Outcome> {
    let target = gaussian_target(&a.chain.target)?;
    let trace = ordered_overrelax_gibbs(
        conditional_draw(&target),
        target.dimension(),
        a.k_order,
        &a.chain.config(),
        rng,
    )?;
    chain_outcome(&trace, &target)
}

// ---------------------------------------------------------------- diag handlers

fn scaling_outcome(exp: &ScalingExperiment) -> Result<Outcome> {
    let rows = exp.points.iter().map(|p| {
        vec![
            p.l.to_string(),
            format_float(p.mean_cost),
            format_float(p.sd_cost),
            p.censored.to_string(),
        ]
    });
    let csv = csv_bytes(&["L", "mean_T", "sd_T", "censored"], rows)?;
    Ok(Outcome::new(json!({
        "step": exp.step,
        "points": exp.points,
        "fit": exp.fit,
    }))
    .with("scaling.csv", csv))
}

fn diag_random_walk(a: &RandomWalkArgs, rng: &mut RngStream) -> Result<Outcome> {
    scaling_outcome(&random_walk_scaling(&a.l, a.delta, a.chains, rng)?)
}

fn diag_hmc_scaling(a: &HmcScalingArgs, rng: &mut RngStream) -> Result<Outcome> {
    scaling_outcome(&hmc_scaling(&a.l, a.eta, a.chains, rng)?)
}

fn diag_tradeoff(a: &TradeoffArgs, rng: &mut RngStream) -> Result<Outcome> {
    positive("n", a.n)?;
    let pts = acceptance_tradeoff_probe(a.ell, &a.deltas, a.r, a.n, rng)?;
    let rows = pts.iter().map(|p| {
        vec![
            format_float(p.delta),
            format_float(p.acceptance_rate),
            format_float(p.predicted),
        ]
    });
    let csv = csv_bytes(&["delta", "acceptance_rate", "predicted"], rows)?;
    Ok(Outcome::new(json!({ "points": pts })).with("tradeoff.csv", csv))
}

fn diag_mixing(a: &MixingArgs, rng: &mut RngStream) -> Result<Outcome> {
    let target = Density::parse(&a.chain.target)?;
    let trace = metropolis(&target, &GaussianStepProposal::new(a.sigma)?, &a.chain.config(), rng)?;
    let report = mixing_report(&trace, a.max_lag)?;
    Ok(Outcome::new(
        serde_json::to_value(report).map_err(|e| Error::Io(e.to_string()))?,
    ))
}
