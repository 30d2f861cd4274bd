//! `scbec` batch front end. Every subcommand writes one CSV or JSON file (or
//! stdout) headed by the version, the resolved config and the seed.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use scbec::decoders::DecoderKind;
use scbec::density_evolution::{self as de, DeModel, DeOptions};
use scbec::ensemble::{CoupledEnsembleSpec, Variant};
use scbec::graph_evolution::{run_ge, GeModel};
use scbec::mc_stats::{self, CriticalPhaseFit, FitOptions, GraphSource, TrialBatchResult, TrialConfig};
use scbec::scaling::{self, OUParameters};
use scbec::Error;

use output::Header;

#[derive(Parser, Debug)]
#[command(name = "scbec", version, about = "Finite-length analysis of spatially coupled LDPC codes on the BEC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// BP threshold by density-evolution bisection (JSON).
    Threshold(ThresholdArgs),
    /// Density-evolution trajectory: iteration, tau, eps, L*delta eps (CSV).
    De(DeArgs),
    /// Graph-evolution trajectory: iteration, c1, unresolved fraction (CSV).
    Ge(GeArgs),
    /// Monte Carlo decoding trials: per-iteration moments (CSV) or the full batch (JSON).
    Simulate(SimulateArgs),
    /// Critical-phase fit of a simulated batch (JSON).
    Fit(FitArgs),
    /// Scaling-law block-error prediction over an eps sweep (CSV or JSON).
    Predict(PredictArgs),
    /// PPD, BP and SPD cross-checks; exits 3 on any mismatch (JSON).
    Equiv(EquivArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct EnsembleArgs {
    #[arg(long, default_value_t = 3)]
    l: usize,
    #[arg(long, default_value_t = 6)]
    r: usize,
    #[arg(long = "L", default_value_t = 100)]
    #[serde(rename = "L")]
    chain_len: usize,
    /// protograph, random_u or uncoupled
    #[arg(long, default_value = "protograph")]
    variant: String,
}

impl EnsembleArgs {
    fn spec(&self) -> Result<CoupledEnsembleSpec, Error> {
        let variant: Variant = self.variant.parse()?;
        let len = if variant == Variant::Uncoupled { 1 } else { self.chain_len };
        CoupledEnsembleSpec::new(self.l, self.r, len, variant)
    }
}

/// Code length per position: `--M` VNs, or `--N` lifting factor (M = kN).
#[derive(Args, Debug, Clone, Serialize)]
struct SizeArgs {
    #[arg(long = "M", conflicts_with = "n")]
    #[serde(rename = "M")]
    m: Option<usize>,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    n: Option<usize>,
}

impl SizeArgs {
    fn resolve(&self, spec: &CoupledEnsembleSpec) -> Result<usize, Error> {
        match (self.m, self.n) {
            (Some(m), _) => Ok(m),
            (None, Some(n)) => Ok(n * spec.k()),
            (None, None) => Err(Error::InvalidParameter("one of --M or --N is required".into())),
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct RunArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available parallelism). Never changes output.
    #[arg(long)]
    #[serde(skip)]
    workers: Option<usize>,
    /// Output file; `.json` selects JSON where both formats exist.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct ThresholdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    /// Width of the final bisection bracket.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
struct DeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    eps: f64,
    /// Threshold for tau and L*delta eps; computed when omitted.
    #[arg(long)]
    eps_star: Option<f64>,
    /// Success tolerance on the erased fraction.
    #[arg(long, default_value_t = de::DEFAULT_TOL)]
    tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
struct GeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Also write the full per-iteration degree distribution as JSON here.
    #[arg(long)]
    dump_dd: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    size: SizeArgs,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// ppd or bp
    #[arg(long, default_value = "ppd")]
    decoder: String,
    /// Decode every trial on the graph of trial 0.
    #[arg(long)]
    fixed_graph: bool,
    /// Report only the frame-error rate.
    #[arg(long)]
    fer: bool,
    #[command(flatten)]
    #[serde(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    /// Batch JSON written by `simulate --out batch.json`.
    #[arg(long)]
    batch: PathBuf,
    /// Threshold; computed by DE for the batch's ensemble when omitted.
    #[arg(long)]
    eps_star: Option<f64>,
    #[arg(long, default_value_t = FitOptions::default().max_lag_tau)]
    max_lag_tau: f64,
    #[command(flatten)]
    #[serde(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
struct PredictArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    size: SizeArgs,
    /// Comma-separated channel erasure probabilities.
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    #[arg(long)]
    eps_star: Option<f64>,
    /// Fit JSON written by `fit`; supplies gamma, delta, Theta and eps*.
    #[arg(long)]
    fit: Option<PathBuf>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Scale-free ratio gamma/sqrt(delta); replaces --delta.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    tau_corr: f64,
    #[command(flatten)]
    #[serde(flatten)]
    run: RunArgs,
}

#[derive(Args, Debug, Serialize)]
struct EquivArgs {
    #[command(flatten)]
    #[serde(flatten)]
    ensemble: EnsembleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    size: SizeArgs,
    #[arg(long, default_value_t = 0.45)]
    eps: f64,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Seeded SPD runs compared against PPD on every residual.
    #[arg(long, default_value_t = 0)]
    spd_runs: usize,
    /// Enumerate every erasure pattern of one lifted graph instead.
    #[arg(long)]
    exhaustive: bool,
    #[command(flatten)]
    #[serde(flatten)]
    run: RunArgs,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(Error::Json(e))
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(
                Error::InvalidEnsemble(_)
                | Error::InvalidParameter(_)
                | Error::MultiplicityExceedsLifting { .. }
                | Error::LengthMismatch { .. },
            ) => 2,
            Failure::Violation(_) => 3,
            _ => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
            Failure::Violation(e) => write!(f, "property violated: {e}"),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn config_value<T: Serialize>(args: &T, extra: Value) -> Value {
    let mut v = serde_json::to_value(args).unwrap_or(Value::Null);
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

fn write(path: Option<&Path>, text: &str) -> CmdResult {
    output::emit(path, text).map_err(|e| Failure::Io(format!("writing {}: {e}", path.map_or("stdout".into(), |p| p.display().to_string()))))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("reading {}: {e}", path.display())))
}

fn threshold_of(model: &DeModel, given: Option<f64>) -> Result<f64, Error> {
    match given {
        Some(e) => Ok(e),
        None => Ok(de::threshold(model, 1e-6, DeOptions::default())?.eps_star),
    }
}

fn cmd_threshold(a: &ThresholdArgs) -> CmdResult {
    let spec = a.ensemble.spec()?;
    let model = DeModel::from_spec(&spec)?;
    let res = de::threshold(&model, a.tol, DeOptions::default())?;
    let header = Header::new("threshold", config_value(a, json!({ "ensemble": spec.label() })), a.run.seed);
    write(a.run.out.as_deref(), &output::json(&header, &res)?)
}

fn cmd_de(a: &DeArgs) -> CmdResult {
    let spec = a.ensemble.spec()?;
    let model = DeModel::from_spec(&spec)?;
    let eps_star = threshold_of(&model, a.eps_star)?;
    let opts = DeOptions {
        tol: a.tol,
        ..DeOptions::default()
    };
    let traj = de::run_de(&model, a.eps, opts)?;
    let points = de::delta_eps_trajectory(&traj, eps_star)?;
    let header = Header::new(
        "de",
        config_value(a, json!({ "ensemble": spec.label(), "eps_star": eps_star, "converged": traj.converged })),
        a.run.seed,
    );
    let text = if output::wants_json(a.run.out.as_deref()) {
        output::json(&header, &points)?
    } else {
        output::csv(&header, &de::delta_eps_csv(&points))
    };
    write(a.run.out.as_deref(), &text)
}

fn cmd_ge(a: &GeArgs) -> CmdResult {
    let spec = a.ensemble.spec()?;
    let model = GeModel::from_spec(&spec)?;
    let traj = run_ge(&model, a.eps, a.max_iters, a.dump_dd.is_some())?;
    let header = Header::new(
        "ge",
        config_value(
            a,
            json!({ "ensemble": spec.label(), "residual_types": model.residual_types().len(), "success": traj.success }),
        ),
        a.run.seed,
    );
    if let Some(p) = &a.dump_dd {
        let dump: Value = serde_json::from_str(&traj.snapshots_json(&model)?)?;
        write(Some(p), &output::json(&header, &dump)?)?;
    }
    let text = if output::wants_json(a.run.out.as_deref()) {
        output::json(&header, &json!({ "c1": traj.c1, "unresolved_fraction": traj.unresolved }))?
    } else {
        output::csv(&header, &traj.to_csv())
    };
    write(a.run.out.as_deref(), &text)
}

fn trial_config(ens: &EnsembleArgs, size: &SizeArgs, eps: f64, trials: usize, seed: u64) -> Result<TrialConfig, Error> {
    let spec = ens.spec()?;
    let m = size.resolve(&spec)?;
    let cfg = TrialConfig::new(spec, m, eps, trials, seed);
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_simulate(a: &SimulateArgs) -> CmdResult {
    let mut cfg = trial_config(&a.ensemble, &a.size, a.eps, a.trials, a.run.seed)?;
    cfg.decoder = a.decoder.parse::<DecoderKind>()?;
    cfg.fixed_graph = a.fixed_graph;
    let header = Header::new("simulate", config_value(a, json!({ "resolved": cfg })), a.run.seed);
    let out = a.run.out.as_deref();
    if a.fer {
        let fer = mc_stats::fer_measure(&cfg, a.run.workers)?;
        let text = if output::wants_json(out) {
            output::json(&header, &fer)?
        } else {
            output::csv(
                &header,
                &format!("eps,trials,errors,fer,lower,upper\n{},{},{},{},{},{}\n", a.eps, fer.trials, fer.errors, fer.rate, fer.lower, fer.upper),
            )
        };
        return write(out, &text);
    }
    let batch = mc_stats::run_trials(&cfg, a.run.workers)?;
    let text = if output::wants_json(out) {
        output::json(&header, &batch)?
    } else {
        output::csv(&header, &batch.to_csv())
    };
    write(out, &text)
}

#[derive(Debug, Serialize, Deserialize)]
struct FitReport {
    spec: CoupledEnsembleSpec,
    #[serde(rename = "M")]
    m: usize,
    epsilon: f64,
    trials: usize,
    fit: CriticalPhaseFit,
}

fn cmd_fit(a: &FitArgs) -> CmdResult {
    let batch: TrialBatchResult = serde_json::from_value(output::unwrap_result(&read(&a.batch)?)?)?;
    let spec = batch.config.spec;
    let eps_star = threshold_of(&DeModel::from_spec(&spec)?, a.eps_star)?;
    let opts = FitOptions {
        max_lag_tau: a.max_lag_tau,
        ..FitOptions::default()
    };
    let fit = mc_stats::fit_critical_phase(&batch, eps_star, opts)?;
    let report = FitReport {
        spec,
        m: batch.config.m,
        epsilon: batch.config.epsilon,
        trials: batch.trials(),
        fit,
    };
    let header = Header::new(
        "fit",
        config_value(a, json!({ "batch_config": batch.config, "eps_star": eps_star })),
        batch.config.base_seed,
    );
    write(a.run.out.as_deref(), &output::json(&header, &report)?)
}

fn cmd_predict(a: &PredictArgs) -> CmdResult {
    let spec = a.ensemble.spec()?;
    let model = DeModel::from_spec(&spec)?;
    let fitted: Option<FitReport> = match &a.fit {
        Some(p) => Some(serde_json::from_value(output::unwrap_result(&read(p)?)?)?),
        None => None,
    };
    let m = match (&fitted, a.size.m.or(a.size.n)) {
        (Some(f), None) => f.m,
        _ => a.size.resolve(&spec)?,
    };
    let eps_star = match (a.eps_star, &fitted) {
        (Some(e), _) => e,
        (None, Some(f)) => f.fit.epsilon_star,
        (None, None) => threshold_of(&model, None)?,
    };
    let missing = |name: &str| Error::InvalidParameter(format!("--{name} is required without --fit"));
    let gamma = a.gamma.or(fitted.as_ref().map(|f| f.fit.gamma)).ok_or_else(|| missing("gamma"))?;
    let theta = a.theta.or(fitted.as_ref().map(|f| f.fit.theta)).ok_or_else(|| missing("theta"))?;
    let first = a.eps[0];
    let params = match a.alpha {
        Some(alpha) => OUParameters::from_alpha(alpha, gamma, theta, eps_star, m as f64, first)?,
        None => {
            let delta = a.delta.or(fitted.as_ref().map(|f| f.fit.delta)).ok_or_else(|| missing("delta or --alpha"))?;
            OUParameters::new(gamma, delta, theta, eps_star, m as f64, first)?
        }
    };
    let rows = scaling::predict_sweep(&model, &params, a.tau_corr, &a.eps)?;
    let header = Header::new(
        "predict",
        config_value(
            a,
            json!({ "ensemble": spec.label(), "resolved_M": m, "resolved": { "gamma": params.gamma, "delta": params.delta, "Theta": params.theta, "eps_star": eps_star } }),
        ),
        a.run.seed,
    );
    let out = a.run.out.as_deref();
    let text = if output::wants_json(out) {
        output::json(&header, &rows)?
    } else {
        output::csv(&header, &scaling::sweep_csv(&rows))
    };
    write(out, &text)
}

fn cmd_equiv(a: &EquivArgs) -> CmdResult {
    let cfg = trial_config(&a.ensemble, &a.size, a.eps, a.trials, a.run.seed)?;
    let report = if a.exhaustive {
        let graph = GraphSource::new(&cfg.spec, cfg.m)?.graph(scbec::seed::derive(cfg.base_seed, &[0, scbec::seed::TAG_LIFT]))?;
        mc_stats::equivalence_exhaustive(&graph, a.spd_runs, cfg.base_seed)?
    } else {
        mc_stats::equivalence_trials(&cfg, a.spd_runs, a.run.workers)?
    };
    let header = Header::new("equiv", config_value(a, json!({ "resolved": cfg })), a.run.seed);
    write(a.run.out.as_deref(), &output::json(&header, &report)?)?;
    if report.all_hold() {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "{} PPD/BP mismatches, {} SPD mismatches, {} upper-bound violations in {} cases",
            report.mismatches, report.spd_mismatches, report.upper_bound_violations, report.cases
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Threshold(a) => cmd_threshold(a),
        Command::De(a) => cmd_de(a),
        Command::Ge(a) => cmd_ge(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Equiv(a) => cmd_equiv(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scbec: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
