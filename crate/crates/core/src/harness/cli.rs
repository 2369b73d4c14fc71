//! `hdetect` command line.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::detector::{basic_test_with, energy_test, energy_threshold, EnergyDof};
use crate::error::{Error, Result};
use crate::quantiles::{chi2_quantile, q_bound, q_mc, ThresholdMethod, ThresholdTable};
use crate::rng::{domain, standard_normal_vec, Substreams};
use crate::signals::{inf_norm, random_collection, random_spec};
use crate::solver::{NuisanceSpec, SolverOptions};
use crate::verify;

use super::config::{uniform_grid, ExperimentConfig, SignalMode};
use super::io::{read_json, table1_csv, table2_csv, write_json, Observation};
use super::table1::{random_eps_nuisance, summarize};
use super::{basic_threshold, table1_experiment, table2_sweep};

#[derive(Debug, Parser)]
#[command(name = "hdetect", version, about = "Detect harmonic oscillations in white Gaussian noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a test on an observation file and print the outcome as JSON.
    Detect(DetectArgs),
    /// Print detection thresholds as JSON.
    Quantile(QuantileArgs),
    /// Resolution search against an ε-set nuisance; writes CSV.
    Table1(Table1Args),
    /// Power sweep of both tests; writes CSV.
    Table2(Table2Args),
    /// Run the construction checks and print a JSON report.
    Verify(VerifyArgs),
    /// Generate a synthetic observation.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TestChoice {
    Basic,
    Energy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodChoice {
    Mc,
    Formula,
    User,
}

impl From<MethodChoice> for ThresholdMethod {
    fn from(m: MethodChoice) -> Self {
        match m {
            MethodChoice::Mc => ThresholdMethod::MonteCarlo,
            MethodChoice::Formula => ThresholdMethod::FormulaBound,
            MethodChoice::User => ThresholdMethod::UserSupplied,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DofChoice {
    Full,
    Residual,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Basic-test threshold source.
    #[arg(long, value_enum, default_value = "mc")]
    threshold_method: MethodChoice,
    /// Explicit threshold (with `--threshold-method user`).
    #[arg(long)]
    threshold: Option<f64>,
    /// Monte Carlo trials for the basic-test threshold.
    #[arg(long, default_value_t = 100_000)]
    mc_trials: usize,
    /// JSON threshold cache, read and updated.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Observation JSON `{"N": …, "y": […]}`.
    #[arg(long)]
    input: PathBuf,
    /// Nuisance JSON (defaults to the zero nuisance).
    #[arg(long)]
    nuisance: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "basic")]
    test: TestChoice,
    #[command(flatten)]
    threshold: ThresholdArgs,
    /// Degrees of freedom for the energy-test threshold.
    #[arg(long, value_enum, default_value = "full")]
    dof: DofChoice,
    /// Seed of the Monte Carlo threshold.
    #[arg(long)]
    seed: Option<u64>,
    /// Solver iteration budget for the basic test (default 1000·N).
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum QuantileMethod {
    Mc,
    Formula,
    Chi2,
    All,
}

#[derive(Debug, Args)]
struct QuantileArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "all")]
    method: QuantileMethod,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    /// Required for Monte Carlo quantiles.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Full experiment configuration as JSON (flags below override it).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the full records as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mc_trials: Option<usize>,
}

#[derive(Debug, Args)]
struct Table1Args {
    #[arg(long = "N", default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    experiments: usize,
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    common: ExperimentArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeChoice {
    Random,
    Bad,
}

#[derive(Debug, Args)]
struct Table2Args {
    #[arg(long = "N", default_value_t = 256)]
    n: usize,
    #[arg(long, default_value_t = 2000)]
    trials: usize,
    #[arg(long, default_value_t = 0.05)]
    grid_step: f64,
    #[arg(long, default_value_t = 4.0)]
    grid_max: f64,
    #[arg(long, value_enum, default_value = "random")]
    mode: ModeChoice,
    #[arg(long, default_value_t = 4)]
    d_s: usize,
    #[command(flatten)]
    common: ExperimentArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Signal frequencies `d_s` (0 = no signal).
    #[arg(long, default_value_t = 0)]
    signal_d: usize,
    /// Uniform norm of the signal component.
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Nuisance frequencies `d_n` (0 = no nuisance).
    #[arg(long, default_value_t = 0)]
    nuisance_d: usize,
    /// ε of the nuisance set (0 = exact subspace).
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Omit the white noise.
    #[arg(long)]
    noiseless: bool,
    /// Observation output (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the matching nuisance description.
    #[arg(long)]
    nuisance_out: Option<PathBuf>,
}

/// Parse `argv` (including the program name) and run; returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_cli_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn need_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| Error::Config(format!("--seed is required for {what}")))
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_line(value: &impl serde::Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn with_cache<T>(path: Option<&PathBuf>, f: impl FnOnce(Option<&mut ThresholdTable>) -> Result<T>) -> Result<T> {
    match path {
        Some(p) => {
            let mut table = ThresholdTable::load(p)?;
            let v = f(Some(&mut table))?;
            table.save(p)?;
            Ok(v)
        }
        None => f(None),
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Detect(a) => detect(a, out),
        Command::Quantile(a) => quantile(a, out),
        Command::Table1(a) => table1(a, out),
        Command::Table2(a) => table2(a, out),
        Command::Verify(a) => {
            let report = verify::run_all(a.seed);
            emit(out, a.out.as_ref(), &json_line(&report)?)?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Gen(a) => generate(a, out),
    }
}

fn detect(a: DetectArgs, out: &mut dyn Write) -> Result<i32> {
    let obs = Observation::read(&a.input)?;
    let z: NuisanceSpec = match &a.nuisance {
        Some(p) => read_json(p)?,
        None => NuisanceSpec::Zero,
    };
    let t = &a.threshold;
    let outcome = match a.test {
        TestChoice::Energy => {
            let dof = match a.dof {
                DofChoice::Full => EnergyDof::Full,
                DofChoice::Residual => EnergyDof::Residual,
            };
            let q = match (t.threshold_method, t.threshold) {
                (MethodChoice::User, Some(v)) => v,
                (MethodChoice::User, None) => return Err(Error::Config("--threshold is required".into())),
                _ => energy_threshold(obs.n, &z, t.alpha, dof)?,
            };
            energy_test(&obs.y, &z, q)?
        }
        TestChoice::Basic => {
            let method: ThresholdMethod = t.threshold_method.into();
            let seed = if method == ThresholdMethod::MonteCarlo { need_seed(a.seed, "Monte Carlo thresholds")? } else { 0 };
            let cfg = ExperimentConfig {
                n: obs.n,
                alpha: t.alpha,
                seed,
                threshold_method: method,
                threshold_trials: t.mc_trials,
                threshold_value: t.threshold,
                ..ExperimentConfig::default()
            };
            let q = with_cache(t.cache.as_ref(), |c| basic_threshold(&cfg, c))?;
            let opts = SolverOptions { max_iter: a.max_iter.unwrap_or(1000 * obs.n), ..SolverOptions::defaults(obs.n) };
            basic_test_with(&obs.y, &z, q, &opts)?
        }
    };
    emit(out, None, &json_line(&outcome)?)?;
    Ok(0)
}

fn quantile(a: QuantileArgs, out: &mut dyn Write) -> Result<i32> {
    let mut report = serde_json::Map::new();
    report.insert("N".into(), json!(a.n));
    report.insert("alpha".into(), json!(a.alpha));
    let want = |m: QuantileMethod| matches!(a.method, QuantileMethod::All) || std::mem::discriminant(&a.method) == std::mem::discriminant(&m);
    if want(QuantileMethod::Formula) {
        report.insert("formula_bound".into(), json!(q_bound(a.n, a.alpha)?));
    }
    if want(QuantileMethod::Mc) {
        let seed = need_seed(a.seed, "Monte Carlo quantiles")?;
        let v = with_cache(a.cache.as_ref(), |c| {
            let cfg = ExperimentConfig { n: a.n, alpha: a.alpha, seed, threshold_trials: a.trials, ..ExperimentConfig::default() };
            match c {
                Some(t) => basic_threshold(&cfg, Some(t)),
                None => q_mc(a.n, a.alpha, a.trials, seed),
            }
        })?;
        report.insert("monte_carlo".into(), json!(v));
        report.insert("trials".into(), json!(a.trials));
        report.insert("seed".into(), json!(seed));
    }
    if want(QuantileMethod::Chi2) {
        report.insert("chi2".into(), json!(chi2_quantile(a.n, a.alpha)?));
    }
    emit(out, None, &json_line(&report)?)?;
    Ok(0)
}

fn base_config(c: &ExperimentArgs, default: ExperimentConfig) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => read_json(p)?,
        None => default,
    };
    cfg.seed = c.seed;
    cfg.threads = c.threads;
    if let Some(a) = c.alpha {
        cfg.alpha = a;
    }
    if let Some(t) = c.mc_trials {
        cfg.threshold_trials = t;
    }
    Ok(cfg)
}

fn table1(a: Table1Args, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = base_config(&a.common, ExperimentConfig::table1(a.n, a.experiments, a.common.seed))?;
    if a.common.config.is_none() {
        cfg.n = a.n;
        cfg.trials = a.experiments;
    }
    if let Some(e) = a.eps {
        cfg.eps_n = e;
    }
    let records = with_cache(a.common.cache.as_ref(), |c| table1_experiment(&cfg, c))?;
    if let Some(p) = &a.common.json {
        let (mean_res, mean_snr) = summarize(&records);
        write_json(p, &json!({ "config": cfg, "records": records, "mean_resolution": mean_res, "mean_snr": mean_snr }))?;
    }
    emit(out, a.common.out.as_ref(), &table1_csv(&records))?;
    Ok(0)
}

fn table2(a: Table2Args, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = base_config(&a.common, ExperimentConfig::table2(a.n, a.trials, a.common.seed))?;
    if a.common.config.is_none() {
        cfg.n = a.n;
        cfg.trials = a.trials;
        cfg.d_s = a.d_s;
        cfg.rho_grid = uniform_grid(a.grid_step, a.grid_max);
        cfg.signal_mode = match a.mode {
            ModeChoice::Random => SignalMode::Random,
            ModeChoice::Bad => SignalMode::Bad,
        };
    }
    let record = with_cache(a.common.cache.as_ref(), |c| table2_sweep(&cfg, c))?;
    if let Some(p) = &a.common.json {
        write_json(p, &json!({ "config": cfg, "record": record }))?;
    }
    emit(out, a.common.out.as_ref(), &table2_csv(&record.rows))?;
    Ok(0)
}

fn generate(a: GenArgs, out: &mut dyn Write) -> Result<i32> {
    if a.n == 0 {
        return Err(Error::Config("--N must be positive".into()));
    }
    let n = a.n;
    let mut y = vec![0.0; n];
    if a.signal_d > 0 {
        let mut rng = Substreams::new(a.seed, domain::SIGNAL).child(n as u64).stream(0);
        let s = random_spec(a.signal_d, &mut rng).sample(0, n);
        let sup = inf_norm(&s);
        if sup > 0.0 {
            y.iter_mut().zip(&s).for_each(|(v, x)| *v += a.rho * x / sup);
        }
    }
    let z = if a.nuisance_d > 0 {
        let mut rng = Substreams::new(a.seed, domain::NUISANCE).child(n as u64).stream(0);
        let w = random_collection(a.nuisance_d, &mut rng);
        let u = random_eps_nuisance(&w, n, a.eps, &mut rng)?;
        y.iter_mut().zip(&u).for_each(|(v, x)| *v += x);
        if a.eps > 0.0 {
            NuisanceSpec::EpsSet { w, eps: a.eps }
        } else {
            NuisanceSpec::Subspace { w }
        }
    } else {
        NuisanceSpec::Zero
    };
    if !a.noiseless {
        let mut rng = Substreams::new(a.seed, domain::NOISE).child(n as u64).stream(0);
        let xi = standard_normal_vec(&mut rng, n);
        y.iter_mut().zip(&xi).for_each(|(v, x)| *v += x);
    }
    if let Some(p) = &a.nuisance_out {
        write_json(p, &z)?;
    }
    emit(out, a.out.as_ref(), &json_line(&Observation::new(y)?)?)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut o = Vec::new();
        let mut e = Vec::new();
        let code = run_cli_with(std::iter::once("hdetect").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(&["bogus"]).0, 2);
        assert_eq!(run(&["table2", "--N", "64"]).0, 2);
        let (code, _, err) = run(&["quantile", "--N", "64", "--method", "mc", "--trials", "2000"]);
        assert_eq!(code, 2);
        assert!(err.contains("--seed"));
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn quantile_is_deterministic() {
        let args = ["quantile", "--N", "64", "--alpha", "0.05", "--method", "mc", "--trials", "400", "--seed", "7"];
        let (c1, a, _) = run(&args);
        let (c2, b, _) = run(&args);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b);
        assert!(a.contains("monte_carlo"));
    }

    #[test]
    fn gen_then_detect() {
        let dir = tempfile::tempdir().unwrap();
        let obs = dir.path().join("obs.json");
        let nz = dir.path().join("z.json");
        let (code, _, err) = run(&[
            "gen", "--N", "64", "--seed", "3", "--nuisance-d", "2",
            "--out", obs.to_str().unwrap(), "--nuisance-out", nz.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
        let (code, text, err) = run(&[
            "detect", "--input", obs.to_str().unwrap(), "--nuisance", nz.to_str().unwrap(),
            "--threshold-method", "user", "--threshold", "100",
        ]);
        assert_eq!(code, 0, "{err}");
        assert!(text.contains("AcceptH0"));
    }
}
