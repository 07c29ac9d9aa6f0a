//! Command-line front end: deposit/retrieval runs, figure sweeps, the
//! rotating-wave validation table, and a self-test report.
//!
//! All commands emit UTF-8 CSV with a fixed header per command (UTF-8 text
//! report for `selftest`), to stdout or to `--out`. Output is byte-identical
//! across runs with the same configuration and seed. Exit codes: 0 success,
//! 1 property/runtime failure, 2 configuration error.

mod selftest;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use ecsim_core::analytic::{Branch, ProjectionKind};
use ecsim_core::entanglement::{ecs_concurrence, schmidt_oracle};
use ecsim_core::hilbert::{coherent_state, truncation_loss, FockCutoff};
use ecsim_core::model::SystemParams;
use ecsim_core::protocol::{
    deposit_cutoff, retrieval_cutoff, run_deposit, run_retrieval, rwa_validation, Engine,
};

#[derive(Parser)]
#[command(
    name = "ecsim",
    about = "Entanglement reciprocation between atomic qubits and two-mode entangled coherent states",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deposit stage: all four atomic detection outcomes at time t
    Deposit(CommonArgs),
    /// Retrieval stage: the seven field post-selections at t' = t
    Retrieve(CommonArgs),
    /// Rotating-wave validation table over drive ratios {10, 20, 50, 100}
    Rwa(CommonArgs),
    /// Field-concurrence sweep of the deposited state (minus branch)
    SweepFig1(CommonArgs),
    /// Retrieved atomic concurrence sweep, vacuum projection (plus branch)
    SweepFig2(CommonArgs),
    /// Retrieved atomic concurrence sweep, displaced projections (plus branch)
    SweepFig3(CommonArgs),
    /// Run the invariant suite and print a pass/fail report
    Selftest(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Atom-cavity coupling of arm 1
    #[arg(long)]
    lambda1: Option<f64>,
    /// Atom-cavity coupling of arm 2
    #[arg(long)]
    lambda2: Option<f64>,
    /// Classical Rabi frequency driving atom 1
    #[arg(long)]
    omega1: Option<f64>,
    /// Classical Rabi frequency driving atom 2
    #[arg(long)]
    omega2: Option<f64>,
    /// Interaction time (deposit duration; retrieval reuses it as t')
    #[arg(long)]
    t: Option<f64>,
    /// Sweep start time
    #[arg(long)]
    tmin: Option<f64>,
    /// Sweep end time
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of sweep grid points (>= 2)
    #[arg(long)]
    steps: Option<usize>,
    /// Field-state branch: plus | minus
    #[arg(long)]
    branch: Option<String>,
    /// Restrict retrieval to one projection: vac_vac|mm|pp|m0|p0|0m|0p
    #[arg(long)]
    projection: Option<String>,
    /// Fock-cutoff override (default: cutoff rule from the amplitudes)
    #[arg(long)]
    nmax: Option<usize>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the randomized self-test properties
    #[arg(long)]
    seed: Option<u64>,
    /// Computation engine: analytic | effective | full
    #[arg(long)]
    engine: Option<String>,
    /// TOML config file; flags take precedence over file values
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Optional values loaded from a TOML config file. Precedence is
/// flags > config file > built-in defaults.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    lambda1: Option<f64>,
    lambda2: Option<f64>,
    omega1: Option<f64>,
    omega2: Option<f64>,
    t: Option<f64>,
    tmin: Option<f64>,
    tmax: Option<f64>,
    steps: Option<usize>,
    branch: Option<String>,
    projection: Option<String>,
    nmax: Option<usize>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    engine: Option<String>,
}

/// Fully resolved run configuration.
struct RunConfig {
    params: SystemParams,
    t: f64,
    tmin: f64,
    tmax: f64,
    steps: usize,
    branch: Branch,
    projection: Option<ProjectionKind>,
    nmax: Option<usize>,
    out: Option<PathBuf>,
    seed: u64,
    engine: Engine,
}

enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<ecsim_core::Error> for CliError {
    fn from(e: ecsim_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn pick_opt<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

/// Per-command defaults; the figure sweeps pin the reference parameter set.
struct Defaults {
    t: f64,
    tmin: f64,
    tmax: f64,
    steps: usize,
    branch: Branch,
}

fn resolve(args: &CommonArgs, defaults: Defaults) -> Result<RunConfig, CliError> {
    let file: FileConfig = match &args.config {
        None => FileConfig::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?
        }
    };

    let lambda1 = pick(args.lambda1, file.lambda1, 1.0);
    let lambda2 = pick(args.lambda2, file.lambda2, 1.0);
    let omega1 = pick(args.omega1, file.omega1, 20.0);
    let omega2 = pick(args.omega2, file.omega2, 20.0);
    let params = SystemParams::new(lambda1, lambda2, omega1, omega2)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let branch = match pick_opt(args.branch.clone(), file.branch) {
        None => defaults.branch,
        Some(s) => Branch::from_str(&s).map_err(CliError::Config)?,
    };
    let projection = match pick_opt(args.projection.clone(), file.projection) {
        None => None,
        Some(s) => Some(ProjectionKind::from_str(&s).map_err(CliError::Config)?),
    };
    let engine = match pick_opt(args.engine.clone(), file.engine) {
        None => Engine::Analytic,
        Some(s) => Engine::from_str(&s).map_err(CliError::Config)?,
    };

    let t = pick(args.t, file.t, defaults.t);
    let tmin = pick(args.tmin, file.tmin, defaults.tmin);
    let tmax = pick(args.tmax, file.tmax, defaults.tmax);
    let steps = pick(args.steps, file.steps, defaults.steps);
    if steps < 2 {
        return Err(CliError::Config(format!("steps = {steps} must be >= 2")));
    }
    if tmin < 0.0 {
        return Err(CliError::Config(format!("tmin = {tmin} must be >= 0")));
    }
    if tmax <= tmin {
        return Err(CliError::Config(format!(
            "tmax = {tmax} must exceed tmin = {tmin}"
        )));
    }
    if t < 0.0 {
        return Err(CliError::Config(format!("t = {t} must be >= 0")));
    }
    if let Some(n) = args.nmax.or(file.nmax) {
        if n < 2 {
            return Err(CliError::Config(format!("nmax = {n} must be >= 2")));
        }
    }

    Ok(RunConfig {
        params,
        t,
        tmin,
        tmax,
        steps,
        branch,
        projection,
        nmax: args.nmax.or(file.nmax),
        out: pick_opt(args.out.clone(), file.out),
        seed: pick(args.seed, file.seed, 0),
        engine,
    })
}

fn grid(config: &RunConfig) -> Vec<f64> {
    (0..config.steps)
        .map(|k| config.tmin + (config.tmax - config.tmin) * k as f64 / (config.steps - 1) as f64)
        .collect()
}

/// 17 significant digits, enough to reproduce the f64 bit pattern.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(config: &RunConfig, body: String) -> Result<(), CliError> {
    match &config.out {
        None => {
            print!("{body}");
            Ok(())
        }
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
    }
}

fn warn_weak_driving(params: &SystemParams) {
    let ratio = params.strong_driving_ratio();
    if ratio < 10.0 {
        eprintln!(
            "warning: strong-driving ratio min(omega/lambda) = {ratio:.3} < 10; \
             the effective model may be inaccurate"
        );
    }
}

fn report_truncation(label: &str, params: &SystemParams, cutoff: FockCutoff, alpha_max: f64) {
    let loss = coherent_state(num_complex::Complex64::new(0.0, alpha_max), cutoff)
        .map(|v| truncation_loss(&v))
        .unwrap_or(f64::NAN);
    eprintln!(
        "{label}: nmax = {}, |alpha|max = {alpha_max:.4} (u = {}), truncation loss = {loss:.3e}",
        cutoff.nmax(),
        params.rabi_sum()
    );
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_deposit(config: &RunConfig) -> Result<(), CliError> {
    warn_weak_driving(&config.params);
    let cutoff = match config.nmax {
        Some(n) => FockCutoff::new(n)?,
        None => deposit_cutoff(&config.params, config.t),
    };
    report_truncation(
        "deposit",
        &config.params,
        cutoff,
        config.params.max_lambda() * config.t / 2.0,
    );
    let results = run_deposit(&config.params, config.t, config.engine, config.nmax)?;
    let mut body =
        String::from("outcome,branch,probability,concurrence,norm_const,engine_fidelity,flag\n");
    for r in &results {
        let m = ecsim_core::analytic::norm_const(&config.params, config.t, r.branch);
        match &r.field {
            Some(field) => {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{},",
                    r.outcome.label(),
                    r.branch.label(),
                    fmt17(r.outcome_prob),
                    fmt17(field.concurrence.value()),
                    fmt17(m),
                    fmt17(field.analytic_fidelity),
                );
            }
            None => {
                let _ = writeln!(
                    body,
                    "{},{},{},,{},,degenerate",
                    r.outcome.label(),
                    r.branch.label(),
                    fmt17(r.outcome_prob),
                    fmt17(m),
                );
            }
        }
    }
    emit(config, body)
}

fn cmd_retrieve(config: &RunConfig) -> Result<(), CliError> {
    warn_weak_driving(&config.params);
    let cutoff = match config.nmax {
        Some(n) => FockCutoff::new(n)?,
        None => retrieval_cutoff(&config.params, config.t),
    };
    report_truncation(
        "retrieve",
        &config.params,
        cutoff,
        config.params.max_lambda() * config.t,
    );
    let results = run_retrieval(
        &config.params,
        config.t,
        config.branch,
        config.engine,
        config.nmax,
    )?;
    let mut body = String::from("projection,concurrence,projection_prob,residual_prob\n");
    for r in &results {
        if let Some(only) = config.projection {
            if r.projection != only {
                continue;
            }
        }
        let _ = writeln!(
            body,
            "{},{},{},{}",
            r.projection.label(),
            fmt17(r.concurrence.value()),
            fmt17(r.projection_prob),
            fmt17(r.residual_prob),
        );
    }
    emit(config, body)
}

fn cmd_rwa(config: &RunConfig) -> Result<(), CliError> {
    let lambda = config.params.lambda1();
    if (config.params.lambda1() - config.params.lambda2()).abs() > 1e-12 {
        return Err(CliError::Config(
            "rwa requires lambda1 = lambda2 (symmetric arms)".into(),
        ));
    }
    let ratios = [10.0, 20.0, 50.0, 100.0];
    let params: Vec<SystemParams> = ratios
        .iter()
        .map(|r| SystemParams::new(lambda, lambda, r * lambda, r * lambda))
        .collect::<Result<_, _>>()?;
    let t_grid = grid(config);
    let records = rwa_validation(&params, &t_grid, config.nmax)?;
    let mut body = String::from("ratio,t,fidelity\n");
    for r in &records {
        let _ = writeln!(
            body,
            "{},{},{}",
            fmt17(r.ratio),
            fmt17(r.t),
            fmt17(r.fidelity)
        );
    }
    emit(config, body)
}

fn cmd_sweep_fig1(config: &RunConfig) -> Result<(), CliError> {
    warn_weak_driving(&config.params);
    let mut body = String::from("t,concurrence_analytic,concurrence_oracle,norm_const,flag\n");
    for t in grid(config) {
        let m = ecsim_core::analytic::norm_const(&config.params, t, config.branch);
        match ecsim_core::analytic::deposit_state_analytic(&config.params, t, config.branch) {
            Ok((state, _)) => {
                let closed = ecs_concurrence(&state, config.branch)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                let oracle =
                    schmidt_oracle(&state).map_err(|e| CliError::Runtime(e.to_string()))?;
                let _ = writeln!(
                    body,
                    "{},{},{},{},",
                    fmt17(t),
                    fmt17(closed.value()),
                    fmt17(oracle.value()),
                    fmt17(m),
                );
            }
            Err(ecsim_core::Error::DegenerateBranch { .. }) => {
                let _ = writeln!(body, "{},,,{},degenerate", fmt17(t), fmt17(m));
            }
            Err(e) => return Err(e.into()),
        }
    }
    emit(config, body)
}

fn retrieval_sweep_rows(
    config: &RunConfig,
    projections: &[ProjectionKind],
    with_label: bool,
) -> Result<String, CliError> {
    let mut body = String::new();
    for t in grid(config) {
        match run_retrieval(&config.params, t, config.branch, Engine::Analytic, None) {
            Ok(results) => {
                for kind in projections {
                    let r = results
                        .iter()
                        .find(|r| r.projection == *kind)
                        .expect("retrieval reports all seven projections");
                    if with_label {
                        let _ = writeln!(
                            body,
                            "{},{},{},{}",
                            fmt17(t),
                            kind.label(),
                            fmt17(r.concurrence.value()),
                            fmt17(r.projection_prob),
                        );
                    } else {
                        let _ = writeln!(
                            body,
                            "{},{},{}",
                            fmt17(t),
                            fmt17(r.concurrence.value()),
                            fmt17(r.projection_prob),
                        );
                    }
                }
            }
            Err(ecsim_core::Error::DegenerateBranch { .. }) => {
                for kind in projections {
                    if with_label {
                        let _ = writeln!(body, "{},{},,", fmt17(t), kind.label());
                    } else {
                        let _ = writeln!(body, "{},,", fmt17(t));
                    }
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(body)
}

fn cmd_sweep_fig2(config: &RunConfig) -> Result<(), CliError> {
    warn_weak_driving(&config.params);
    let projection = config.projection.unwrap_or(ProjectionKind::VacVac);
    let rows = retrieval_sweep_rows(config, &[projection], false)?;
    emit(config, format!("t,concurrence,projection_prob\n{rows}"))
}

fn cmd_sweep_fig3(config: &RunConfig) -> Result<(), CliError> {
    warn_weak_driving(&config.params);
    let projections = match config.projection {
        Some(p) => vec![p],
        None => vec![ProjectionKind::MinusMinus, ProjectionKind::MinusVac],
    };
    let rows = retrieval_sweep_rows(config, &projections, true)?;
    emit(
        config,
        format!("t,projection,concurrence,projection_prob\n{rows}"),
    )
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Deposit(args) => {
            let config = resolve(
                &args,
                Defaults {
                    t: 4.0,
                    tmin: 0.0,
                    tmax: 5.0,
                    steps: 2000,
                    branch: Branch::Plus,
                },
            )?;
            cmd_deposit(&config)
        }
        Command::Retrieve(args) => {
            let config = resolve(
                &args,
                Defaults {
                    t: 4.0,
                    tmin: 0.0,
                    tmax: 5.0,
                    steps: 2000,
                    branch: Branch::Plus,
                },
            )?;
            cmd_retrieve(&config)
        }
        Command::Rwa(args) => {
            let config = resolve(
                &args,
                Defaults {
                    t: 1.0,
                    tmin: 0.25,
                    tmax: 1.0,
                    steps: 4,
                    branch: Branch::Plus,
                },
            )?;
            cmd_rwa(&config)
        }
        Command::SweepFig1(args) => {
            let config = resolve(
                &args,
                Defaults {
                    t: 4.0,
                    tmin: 0.0,
                    tmax: 5.0,
                    steps: 2000,
                    branch: Branch::Minus,
                },
            )?;
            cmd_sweep_fig1(&config)
        }
        Command::SweepFig2(args) => {
            let config = resolve(
                &args,
                Defaults {
                    t: 4.0,
                    tmin: 0.0,
                    tmax: 5.0,
                    steps: 2000,
                    branch: Branch::Plus,
                },
            )?;
            cmd_sweep_fig2(&config)
        }
        Command::SweepFig3(args) => {
            let config = resolve(
                &args,
                Defaults {
                    t: 4.0,
                    tmin: 0.0,
                    tmax: 5.0,
                    steps: 2000,
                    branch: Branch::Plus,
                },
            )?;
            cmd_sweep_fig3(&config)
        }
        Command::Selftest(args) => {
            let config = resolve(
                &args,
                Defaults {
                    t: 1.0,
                    tmin: 0.25,
                    tmax: 1.0,
                    steps: 4,
                    branch: Branch::Plus,
                },
            )?;
            let report = selftest::run(&config.params, config.seed, config.nmax);
            emit(&config, report.text)?;
            if report.all_passed {
                Ok(())
            } else {
                Err(CliError::Runtime("self-test reported failures".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}
