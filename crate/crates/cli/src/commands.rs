//! Command implementations. Each writes its files under the output
//! directory and a human-readable summary to standard output.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use predprey::analysis::{
    classify_regime, run_ensemble, verify_all, RegimeReport, VerificationSuite,
};
use predprey::model::{validate_assumptions, Severity, ValidationOptions, ValidationReport};
use predprey::{convergence_study, fixtures, integrate_path, ModelError, Species};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::{Command, Common};

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input, or an invalid solver setting.
    Input(String),
    /// The model violates the standing assumptions.
    Assumption(String),
    Diverged(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Assumption(_) => 2,
            CliError::Diverged(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Assumption(m) | CliError::Diverged(m) => f.write_str(m),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::AllDiverged { .. } => CliError::Diverged(e.to_string()),
            ModelError::InvalidConfig(_) | ModelError::NegativeTime(_) => {
                CliError::Input(e.to_string())
            }
            _ => CliError::Assumption(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Loads the config or preset and applies command-line overrides.
pub fn effective_config(args: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path).map_err(CliError::Input)?,
        (None, Some(name)) => {
            let model = fixtures::by_name(name).ok_or_else(|| {
                CliError::Input(format!(
                    "unknown preset `{name}`; available: {}",
                    fixtures::PRESET_NAMES.join(", ")
                ))
            })?;
            ExperimentConfig::from_model(model)
        }
        (None, None) => return Err(CliError::Input("no config file or preset given".into())),
    };
    if let Some(s) = args.seed {
        cfg.solver.seed = s;
    }
    if let Some(n) = args.paths {
        cfg.analysis.n_paths = n;
        cfg.analysis.convergence.n_paths = n;
    }
    if let Some(h) = args.horizon {
        cfg.solver.horizon = h;
    }
    if let Some(dt) = args.dt {
        cfg.solver.dt_max = dt;
    }
    if let Some(s) = args.stride {
        cfg.solver.record_stride = Some(s);
    }
    if args.allow_degenerate {
        cfg.analysis.classify.allow_degenerate = true;
    }
    if let Some(dir) = &args.out {
        cfg.output.dir = dir.clone();
    }
    cfg.materialize();
    Ok(cfg)
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Validate(c)
        | Command::Classify(c)
        | Command::Simulate(c)
        | Command::Ensemble(c) => c,
        Command::Convergence(c) => &c.common,
    }
}

pub fn dispatch(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut cfg = effective_config(common(cmd))?;
    if let Command::Convergence(c) = cmd {
        if let Some(dts) = &c.dts {
            cfg.analysis.convergence.dts = dts.clone();
        }
        if let Some(h) = c.common.horizon {
            cfg.analysis.convergence.horizon = h;
        }
    }
    writeln!(
        err,
        "effective config (hash {}):\n{}",
        cfg.hash(),
        cfg.to_json()
    )?;
    let threads = common(cmd).threads;
    match cmd {
        Command::Validate(_) => cmd_validate(&cfg, out),
        Command::Classify(_) => cmd_classify(&cfg, out),
        Command::Simulate(_) => cmd_simulate(&cfg, out),
        Command::Ensemble(_) => cmd_ensemble(&cfg, threads, out),
        Command::Convergence(_) => cmd_convergence(&cfg, threads, out),
    }
}

fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> predprey::Result<T> + Send,
) -> Result<T> {
    match threads {
        None => Ok(f()?),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?
            .install(f)
            .map_err(CliError::from),
    }
}

fn validation(cfg: &ExperimentConfig) -> ValidationReport {
    validate_assumptions(
        &cfg.model,
        ValidationOptions {
            allow_degenerate: cfg.analysis.classify.allow_degenerate,
        },
    )
}

/// Fails with exit code 2 naming every failing clause.
fn require_valid(cfg: &ExperimentConfig) -> Result<()> {
    let report = validation(cfg);
    if report.passed() {
        return Ok(());
    }
    let names: Vec<String> = report
        .failures()
        .map(|c| format!("{} ({}): {}", c.id, c.condition, c.detail))
        .collect();
    Err(CliError::Assumption(format!(
        "assumption violated: {}",
        names.join("; ")
    )))
}

fn provenance_line(cfg: &ExperimentConfig) -> String {
    format!("# config_hash={} seed={}", cfg.hash(), cfg.solver.seed)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn prepare_out(cfg: &ExperimentConfig) -> Result<&Path> {
    let dir = cfg.output.dir.as_path();
    fs::create_dir_all(dir)?;
    let mut echo = cfg.provenance_json();
    echo.push('\n');
    fs::write(dir.join("config.json"), echo)?;
    Ok(dir)
}

pub fn cmd_validate(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    let report = validation(cfg);
    for c in &report.clauses {
        let status = match (c.passed, c.severity) {
            (true, _) => "ok",
            (false, Severity::Warning) => "WARN",
            (false, Severity::Error) => "FAIL",
        };
        writeln!(
            out,
            "{status:<5} {:<22} {:<34} {}",
            c.id, c.condition, c.detail
        )?;
    }
    require_valid(cfg)?;
    writeln!(out, "all assumption clauses hold")?;
    Ok(())
}

#[derive(Serialize)]
struct RegimeFile<'a> {
    config_hash: String,
    report: &'a RegimeReport,
}

fn regime_table(r: &RegimeReport, out: &mut dyn Write) -> io::Result<()> {
    writeln!(
        out,
        "{:<9} {:<26} {:>14} {:>14} {:>14}",
        "species", "label", "qbar*", "pbar*", "p_inf"
    )?;
    for sp in Species::BOTH {
        let i = sp.index();
        let pinf = if i == 0 { r.p1_inf } else { r.p2_inf };
        writeln!(
            out,
            "{:<9} {:<26} {:>14.7} {:>14.7} {:>14.7}",
            sp.name(),
            r.labels.get(sp).as_str(),
            r.qbar_star[i],
            r.pbar_star[i],
            pinf
        )?;
    }
    writeln!(out, "ultimately bounded: {}", r.ultimately_bounded)?;
    for f in &r.fired_rules {
        let who = f.species.map_or("both", |s| s.name());
        writeln!(out, "  rule {:<26} {:<9} {}", f.rule, who, f.condition)?;
    }
    Ok(())
}

pub fn cmd_classify(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    require_valid(cfg)?;
    let report = classify_regime(&cfg.model, &cfg.analysis.classify)?;
    regime_table(&report, out)?;
    let dir = prepare_out(cfg)?;
    write_json(
        &dir.join("regime.json"),
        &RegimeFile {
            config_hash: cfg.hash(),
            report: &report,
        },
    )
}

#[derive(Serialize)]
struct TrajectoryMetadata<'a> {
    config_hash: String,
    seed: u64,
    spec_hash: &'a str,
    model: &'a predprey::ModelSpec,
    solver: &'a predprey::SolverConfig,
    n_points: usize,
    n_events: usize,
    diverged: bool,
    diverged_at: Option<f64>,
    underflow: bool,
    final_state: [f64; 2],
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<()> {
    require_valid(cfg)?;
    let solver = cfg.solver_config();
    let path = integrate_path(&cfg.model, &solver)?;
    let dir = prepare_out(cfg)?;
    let header = provenance_line(cfg);

    let mut buf = Vec::new();
    writeln!(buf, "{header}")?;
    path.write_csv(&mut buf)?;
    fs::write(dir.join("trajectory.csv"), &buf)?;
    buf.clear();
    writeln!(buf, "{header}")?;
    path.events.write_csv(&mut buf)?;
    fs::write(dir.join("events.csv"), &buf)?;

    let last = path.last();
    write_json(
        &dir.join("metadata.json"),
        &TrajectoryMetadata {
            config_hash: cfg.hash(),
            seed: cfg.solver.seed,
            spec_hash: &path.meta.spec_hash,
            model: &cfg.model,
            solver: &solver,
            n_points: path.times.len(),
            n_events: path.events.len(),
            diverged: path.meta.diverged,
            diverged_at: path.meta.diverged_at,
            underflow: path.meta.underflow,
            final_state: last,
        },
    )?;
    writeln!(
        out,
        "t = {}  x1 = {}  x2 = {}  ({} points, {} jumps)",
        path.times.last().unwrap(),
        last[0],
        last[1],
        path.times.len(),
        path.events.len()
    )?;
    if let Some(at) = path.meta.diverged_at {
        return Err(CliError::Diverged(format!(
            "path diverged at t = {at} (log density above the overflow guard); reduce --dt below {}",
            solver.dt_max
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct VerdictFile<'a> {
    config_hash: String,
    seed: u64,
    n_paths: usize,
    n_diverged: usize,
    regime: &'a RegimeReport,
    #[serde(flatten)]
    suite: &'a VerificationSuite,
}

pub fn cmd_ensemble(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
    out: &mut dyn Write,
) -> Result<()> {
    require_valid(cfg)?;
    let report = classify_regime(&cfg.model, &cfg.analysis.classify)?;
    let solver = cfg.solver_config();
    let stats = with_threads(threads, || {
        run_ensemble(
            &cfg.model,
            &solver,
            cfg.analysis.n_paths,
            &cfg.analysis.estimator,
        )
    })?;
    let suite = verify_all(&stats, &report, &cfg.analysis.verify);
    let dir = prepare_out(cfg)?;

    let mut buf = Vec::new();
    writeln!(buf, "{}", provenance_line(cfg))?;
    stats.write_csv(&mut buf)?;
    fs::write(dir.join("stats.csv"), &buf)?;
    write_json(
        &dir.join("verdict.json"),
        &VerdictFile {
            config_hash: cfg.hash(),
            seed: cfg.solver.seed,
            n_paths: stats.n_paths,
            n_diverged: stats.n_diverged,
            regime: &report,
            suite: &suite,
        },
    )?;

    writeln!(
        out,
        "{} paths ({} diverged), horizon {}",
        stats.n_paths,
        stats.n_diverged,
        stats.final_time()
    )?;
    regime_table(&report, out)?;
    for (id, v) in &suite.verdicts {
        let value = v
            .value
            .map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
        let power = if v.low_power { "  (low power)" } else { "" };
        writeln!(out, "  {id:<28} {:<15} {value}{power}", v.verdict.as_str())?;
    }
    Ok(())
}

pub fn cmd_convergence(
    cfg: &ExperimentConfig,
    threads: Option<usize>,
    out: &mut dyn Write,
) -> Result<()> {
    cfg.model.check()?;
    let c = &cfg.analysis.convergence;
    let report = with_threads(threads, || {
        convergence_study(&cfg.model, &c.dts, c.n_paths, c.horizon, cfg.solver.seed)
    })?;
    let dir = prepare_out(cfg)?;
    #[derive(Serialize)]
    struct ConvergenceFile<'a> {
        config_hash: String,
        #[serde(flatten)]
        report: &'a predprey::ConvergenceReport,
    }
    write_json(
        &dir.join("convergence.json"),
        &ConvergenceFile {
            config_hash: cfg.hash(),
            report: &report,
        },
    )?;
    writeln!(out, "{:>12} {:>14} {:>14}", "dt", "strong", "weak")?;
    for ((dt, s), w) in report
        .dts
        .iter()
        .zip(&report.strong_errors)
        .zip(&report.weak_errors)
    {
        writeln!(out, "{dt:>12} {s:>14.6e} {w:>14.6e}")?;
    }
    let fmt = |o: Option<f64>| o.map_or_else(|| "n/a".to_string(), |v| format!("{v:.3}"));
    writeln!(
        out,
        "strong order {}  weak order {}",
        fmt(report.strong_order),
        fmt(report.weak_order)
    )?;
    Ok(())
}
