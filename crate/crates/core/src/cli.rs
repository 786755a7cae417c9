//! Command-line front end: `simulate`, `verify` and `compare`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or parameter
//! error, 3 I/O error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytic::TestFunction;
use crate::domain::{make_uniform_grid, Dependence, GammaParams, ProcessKind, TimeGrid};
use crate::error::{param_err, Error, Result};
use crate::processes::{simulate_ensemble, CirMethod, CthinConfig, Ensemble, SimOptions};
use crate::stats::{
    chf_gof_with_formula, default_pair_omegas, default_triplet_omegas, empirical_moments, ensemble_acf,
    ensemble_discrimination, generator_check, ks_statistic, tail_check,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Overrides the formula used by the `chf` verification suite.
pub const CHF_FORMULA_ENV: &str = "STATGAMMA_CHF_FORMULA";

#[derive(Debug, Parser)]
#[command(name = "statgamma", version, about = "Simulate and verify stationary gamma processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate an ensemble and write it as CSV or JSON.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run verification suites against the closed forms; JSON report.
    Verify {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Chf argument magnitudes, scaled by 1/beta.
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2")]
        omega_grid: Vec<f64>,
    },
    /// Compare the joint laws of two processes; JSON report.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Process to compare against.
        #[arg(long, value_parser = parse_kind)]
        vs: ProcessKind,
        /// Seed of the second ensemble [default: seed + 1].
        #[arg(long)]
        vs_seed: Option<u64>,
        #[arg(long)]
        vs_alpha: Option<f64>,
        #[arg(long)]
        vs_beta: Option<f64>,
        #[arg(long, conflicts_with = "vs_lambda")]
        vs_rho: Option<f64>,
        #[arg(long)]
        vs_lambda: Option<f64>,
        /// Number of consecutive grid points whose joint law is compared.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=3))]
        points: u8,
        /// Pair chf argument magnitudes, scaled by 1/beta.
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1,2")]
        omega_grid: Vec<f64>,
    },
}

#[derive(Debug, Clone, Args)]
struct RunArgs {
    #[arg(long, value_parser = parse_kind, default_value = "ar1")]
    process: ProcessKind,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Unit-lag correlation [default: 0.5].
    #[arg(long, conflicts_with = "lambda")]
    rho: Option<f64>,
    /// Correlation decay rate.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.0, conflicts_with = "times")]
    t0: f64,
    #[arg(long, default_value_t = 1.0, conflicts_with = "times")]
    dt: f64,
    /// Number of grid times.
    #[arg(long, conflicts_with = "times")]
    n: Option<usize>,
    /// File of observation times separated by whitespace or commas.
    #[arg(long)]
    times: Option<PathBuf>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CirMethodArg::Exact)]
    cir_method: CirMethodArg,
    /// Substeps per unit time for the euler and squared-ou methods.
    #[arg(long, default_value_t = 64)]
    euler_substeps: u32,
    /// Lattice steps per unit time of the continuously thinned process.
    #[arg(long, default_value_t = 256)]
    cthin_steps: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Marginal,
    Acf,
    Chf,
    Generator,
    Tail,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CirMethodArg {
    Exact,
    Euler,
    SquaredOu,
}

fn parse_kind(s: &str) -> std::result::Result<ProcessKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Everything that determines an ensemble, echoed into every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub process: ProcessKind,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub rho: f64,
    pub grid: GridSpec,
    pub paths: usize,
    pub seed: u64,
    pub options: SimOptions,
    #[serde(skip)]
    params: GammaParams,
    #[serde(skip)]
    dep: Dependence,
    #[serde(skip)]
    time_grid: TimeGrid,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    Uniform { t0: f64, dt: f64, n: usize },
    Explicit { file: String, times: Vec<f64> },
}

fn resolve_dependence(rho: Option<f64>, lambda: Option<f64>) -> Result<Dependence> {
    match (rho, lambda) {
        (Some(_), Some(_)) => param_err("give either rho or lambda, not both"),
        (Some(r), None) => Dependence::from_rho(r),
        (None, Some(l)) => {
            let d = Dependence::new(l)?;
            // Route through rho when it represents lambda faithfully so that
            // `--lambda L` and `--rho exp(-L)` give the same ensemble.
            let r = d.rho();
            if r > 0.0 && r < 1.0 && l >= 1e-6 {
                Dependence::from_rho(r)
            } else {
                Ok(d)
            }
        }
        (None, None) => Dependence::from_rho(0.5),
    }
}

fn read_times(path: &PathBuf) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().or_else(|_| param_err(format!("cannot parse time '{s}' in {}", path.display()))))
        .collect()
}

impl RunArgs {
    fn resolve(&self, default_n: usize, default_paths: usize) -> Result<RunConfig> {
        let params = GammaParams::new(self.alpha, self.beta)?;
        let dep = resolve_dependence(self.rho, self.lambda)?;
        let (grid, time_grid) = match &self.times {
            Some(file) => {
                let times = read_times(file)?;
                let g = TimeGrid::new(times.clone())?;
                (GridSpec::Explicit { file: file.display().to_string(), times }, g)
            }
            None => {
                let n = self.n.unwrap_or(default_n);
                let g = make_uniform_grid(self.t0, self.dt, n)?;
                (GridSpec::Uniform { t0: self.t0, dt: self.dt, n }, g)
            }
        };
        let paths = self.paths.unwrap_or(default_paths);
        if paths == 0 {
            return param_err("--paths must be at least 1");
        }
        if self.euler_substeps == 0 {
            return param_err("--euler-substeps must be at least 1");
        }
        let sub = 1.0 / self.euler_substeps as f64;
        let cir_method = match self.cir_method {
            CirMethodArg::Exact => CirMethod::Exact,
            CirMethodArg::Euler => CirMethod::Euler { dt_sub: sub },
            CirMethodArg::SquaredOu => CirMethod::SquaredOU { dt_sub: sub },
        };
        let options = SimOptions { cir_method, cthin: CthinConfig::new(self.cthin_steps)?, ..Default::default() };
        Ok(RunConfig {
            process: self.process,
            alpha: params.alpha(),
            beta: params.beta(),
            lambda: dep.lambda(),
            rho: dep.rho(),
            grid,
            paths,
            seed: self.seed,
            options,
            params,
            dep,
            time_grid,
        })
    }
}

impl RunConfig {
    fn simulate(&self) -> Result<Ensemble> {
        simulate_ensemble(self.process, &self.time_grid, self.params, self.dep, self.paths, self.seed, &self.options)
    }
}

/// Parse `args` (including the program name), run the command and return
/// the process exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match &cli.command {
        Command::Simulate { run, .. } | Command::Verify { run, .. } | Command::Compare { run, .. } => run.threads,
    };
    let outcome = match threads {
        Some(0) => Err(Error::Parameter("--threads must be at least 1".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(cli.command)),
            Err(e) => Err(Error::Numerical(format!("cannot start worker pool: {e}"))),
        },
        None => dispatch(cli.command),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("statgamma: {e}");
            match e {
                Error::Parameter(_) | Error::Unsupported(_) => EXIT_USAGE,
                Error::Io(_) => EXIT_IO,
                Error::Numerical(_) => EXIT_FAILED,
            }
        }
    }
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Simulate { run, format } => cmd_simulate(&run, format),
        Command::Verify { run, suite, omega_grid } => cmd_verify(&run, suite, &omega_grid),
        Command::Compare { run, vs, vs_seed, vs_alpha, vs_beta, vs_rho, vs_lambda, points, omega_grid } => {
            let b =
                CompareB { kind: vs, seed: vs_seed, alpha: vs_alpha, beta: vs_beta, rho: vs_rho, lambda: vs_lambda };
            cmd_compare(&run, &b, points as usize, &omega_grid)
        }
    }
}

fn open_output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct SimulationDocument<'a> {
    version: &'static str,
    config: &'a RunConfig,
    times: &'a [f64],
    paths: Vec<&'a [f64]>,
}

fn cmd_simulate(run: &RunArgs, format: Format) -> Result<i32> {
    let cfg = run.resolve(100, 1)?;
    let ens = cfg.simulate()?;
    let mut w = open_output(&run.out)?;
    match format {
        Format::Csv => {
            writeln!(w, "path,t,value")?;
            let times = ens.grid().times();
            for m in 0..ens.n_paths() {
                for (t, v) in times.iter().zip(ens.path(m)) {
                    writeln!(w, "{m},{t:.16e},{v:.16e}")?;
                }
            }
        }
        Format::Json => {
            let doc = SimulationDocument {
                version: crate::VERSION,
                config: &cfg,
                times: ens.grid().times(),
                paths: (0..ens.n_paths()).map(|m| ens.path(m)).collect(),
            };
            serde_json::to_writer(&mut w, &doc).map_err(io::Error::from)?;
            writeln!(w)?;
        }
    }
    w.flush()?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct Check {
    suite: &'static str,
    name: String,
    statistic: f64,
    threshold: f64,
    pass: bool,
    skipped: bool,
    details: Value,
}

impl Check {
    fn new(suite: &'static str, name: impl Into<String>, statistic: f64, threshold: f64, details: Value) -> Self {
        Self { suite, name: name.into(), statistic, threshold, pass: statistic < threshold, skipped: false, details }
    }

    fn skipped(suite: &'static str, reason: impl Into<String>) -> Self {
        Self {
            suite,
            name: "skipped".into(),
            statistic: 0.0,
            threshold: 0.0,
            pass: true,
            skipped: true,
            details: json!({ "reason": reason.into() }),
        }
    }
}

const Z_THRESHOLD: f64 = 4.0;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn marginal_checks(cfg: &RunConfig, ens: &Ensemble) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let last = ens.n_times() - 1;
    let t = ens.grid().times();
    if ens.n_paths() >= 100 {
        let ks = ks_statistic(&ens.column(last), cfg.params)?;
        checks.push(Check::new(
            "marginal",
            format!("ks at t={}", t[last]),
            ks.statistic,
            ks.critical_1pct,
            to_value(&ks),
        ));
    }
    for (k, time) in t.iter().enumerate() {
        let m = empirical_moments(&ens.column(k))?;
        let z_mean = (m.mean - cfg.params.mean()).abs() / m.se_mean;
        let z_var = (m.variance - cfg.params.variance()).abs() / m.se_variance;
        checks.push(Check::new("marginal", format!("mean at t={time}"), z_mean, Z_THRESHOLD, to_value(&m)));
        checks.push(Check::new("marginal", format!("variance at t={time}"), z_var, Z_THRESHOLD, to_value(&m)));
    }
    Ok(checks)
}

fn acf_checks(ens: &Ensemble) -> Result<Vec<Check>> {
    let max_lag = (ens.n_times() - 1).min(5);
    if max_lag == 0 {
        return Ok(vec![Check::skipped("acf", "grid has a single time")]);
    }
    if ens.grid().uniform_spacing().is_none() {
        return Ok(vec![Check::skipped("acf", "grid is not uniformly spaced")]);
    }
    let r = ensemble_acf(ens, max_lag)?;
    Ok(r.z_scores()
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let details = json!({
                "lag": r.lags[i],
                "estimate": r.estimates[i],
                "standard_error": r.standard_errors[i],
                "target": r.target[i],
            });
            Check::new("acf", format!("lag {}", r.lags[i]), z, Z_THRESHOLD, details)
        })
        .collect())
}

fn chf_checks(cfg: &RunConfig, ens: &Ensemble, omega_grid: &[f64]) -> Result<Vec<Check>> {
    if cfg.process == ProcessKind::ContinuouslyThinned {
        return Ok(vec![Check::skipped("chf", "no closed-form pair chf for the continuously thinned process")]);
    }
    if ens.n_times() < 2 {
        return Ok(vec![Check::skipped("chf", "grid has a single time")]);
    }
    let formula = match std::env::var(CHF_FORMULA_ENV) {
        Ok(name) if !name.is_empty() => name.parse::<ProcessKind>()?,
        _ => cfg.process,
    };
    let omegas = default_pair_omegas(omega_grid, cfg.beta);
    let cmp = chf_gof_with_formula(ens, &omegas, 1, formula)?;
    let details = json!({
        "formula": formula,
        "argmax": cmp.argmax,
        "points": cmp.points,
    });
    Ok(vec![Check::new("chf", format!("pair chf vs {formula} formula"), cmp.max_z, Z_THRESHOLD, details)])
}

fn generator_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    if !matches!(cfg.process, ProcessKind::SquaredOU | ProcessKind::ContinuouslyThinned) {
        return Ok(vec![Check::skipped("generator", format!("no generator check for {}", cfg.process))]);
    }
    let eps = 1e-3 / cfg.dep.lambda();
    let n_mc = cfg.paths.max(1_000_000);
    let mut checks = Vec::new();
    for (name, phi) in [("identity", TestFunction::Identity), ("square", TestFunction::Square)] {
        for x0 in [0.5, 2.0] {
            let r = generator_check(cfg.process, phi, x0, eps, n_mc, cfg.seed, cfg.params, cfg.dep)?;
            checks.push(Check::new("generator", format!("{name} at x0={x0}"), r.z.abs(), Z_THRESHOLD, to_value(&r)));
        }
    }
    Ok(checks)
}

fn tail_checks(cfg: &RunConfig) -> Result<Vec<Check>> {
    let u: Vec<f64> = [1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 50.0].iter().map(|u| u / cfg.beta).collect();
    let table = tail_check(cfg.params, &u)?;
    let mut c = Check::new("tail", "log ratios approach 1 monotonically", 0.0, 1.0, to_value(&table));
    c.pass = table.monotone_in_tail;
    c.statistic = if table.monotone_in_tail { 0.0 } else { 1.0 };
    Ok(vec![c])
}

fn cmd_verify(run: &RunArgs, suite: Suite, omega_grid: &[f64]) -> Result<i32> {
    if omega_grid.iter().any(|w| !w.is_finite()) || omega_grid.is_empty() {
        return param_err("--omega-grid needs finite values");
    }
    let cfg = run.resolve(6, 100_000)?;
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let needs_ensemble = [Suite::Marginal, Suite::Acf, Suite::Chf].into_iter().any(wants);
    let ens = if needs_ensemble { Some(cfg.simulate()?) } else { None };

    let mut checks = Vec::new();
    if let Some(ens) = &ens {
        if wants(Suite::Marginal) {
            checks.extend(marginal_checks(&cfg, ens)?);
        }
        if wants(Suite::Acf) {
            checks.extend(acf_checks(ens)?);
        }
        if wants(Suite::Chf) {
            checks.extend(chf_checks(&cfg, ens, omega_grid)?);
        }
    }
    if wants(Suite::Generator) {
        checks.extend(generator_checks(&cfg)?);
    }
    if wants(Suite::Tail) {
        checks.extend(tail_checks(&cfg)?);
    }
    let all_pass = checks.iter().all(|c| c.pass);
    let report = json!({
        "version": crate::VERSION,
        "command": "verify",
        "config": cfg,
        "checks": checks,
        "all_pass": all_pass,
    });
    write_report(&run.out, &report)?;
    Ok(if all_pass { EXIT_OK } else { EXIT_FAILED })
}

struct CompareB {
    kind: ProcessKind,
    seed: Option<u64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    rho: Option<f64>,
    lambda: Option<f64>,
}

fn cmd_compare(run: &RunArgs, b: &CompareB, points: usize, omega_grid: &[f64]) -> Result<i32> {
    let cfg_a = run.resolve(3, 100_000)?;
    let mut run_b = run.clone();
    run_b.process = b.kind;
    run_b.seed = b.seed.unwrap_or(run.seed.wrapping_add(1));
    let cfg_b = run_b.resolve(3, 100_000)?;
    let mismatch = |what: &str, given: f64, have: f64| -> Result<()> {
        if given != have {
            return param_err(format!("compared processes must share {what}: {have} vs {given}"));
        }
        Ok(())
    };
    if let Some(a) = b.alpha {
        mismatch("alpha", a, cfg_a.alpha)?;
    }
    if let Some(v) = b.beta {
        mismatch("beta", v, cfg_a.beta)?;
    }
    if b.rho.is_some() || b.lambda.is_some() {
        let dep = resolve_dependence(b.rho, b.lambda)?;
        mismatch("lambda", dep.lambda(), cfg_a.lambda)?;
    }
    if points > cfg_a.time_grid.len() {
        return param_err(format!("--points {points} needs a grid of at least {points} times"));
    }
    if omega_grid.iter().any(|w| !w.is_finite()) || omega_grid.is_empty() {
        return param_err("--omega-grid needs finite values");
    }
    let omegas: Vec<Vec<f64>> = if points == 2 {
        default_pair_omegas(omega_grid, cfg_a.beta).into_iter().map(|(s, t)| vec![s, t]).collect()
    } else {
        default_triplet_omegas(cfg_a.beta)
    };
    let ens_a = cfg_a.simulate()?;
    let ens_b = cfg_b.simulate()?;
    let d = ensemble_discrimination(&ens_a, &ens_b, points, &omegas)?;
    let report = json!({
        "version": crate::VERSION,
        "command": "compare",
        "config_a": cfg_a,
        "config_b": cfg_b,
        "points": points,
        "max_z": d.max_z,
        "argmax": d.argmax,
        "comparisons": d.points,
    });
    write_report(&run.out, &report)?;
    Ok(EXIT_OK)
}

fn write_report(out: &Option<PathBuf>, report: &Value) -> Result<()> {
    let mut w = open_output(out)?;
    serde_json::to_writer_pretty(&mut w, report).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_and_matching_rho_resolve_identically() {
        for l in [0.05, 0.3, 0.7, 1.9, 12.0] {
            let a = resolve_dependence(None, Some(l)).unwrap();
            let b = resolve_dependence(Some((-l).exp()), None).unwrap();
            assert_eq!(a, b, "lambda {l}");
        }
        assert!(resolve_dependence(Some(1.5), None).is_err());
        assert_eq!(resolve_dependence(None, None).unwrap().rho(), 0.5);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["statgamma", "simulate", "--rho", "1.5"]), EXIT_USAGE);
        assert_eq!(run(["statgamma", "simulate", "--rho", "0.5", "--lambda", "1"]), EXIT_USAGE);
        assert_eq!(run(["statgamma", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["statgamma", "simulate", "--process", "nope"]), EXIT_USAGE);
    }
}
