//! Command-line front end: experiment configs, solver dispatch, sweeps and
//! evaluation artifacts written as CSV/JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::eval::{self, Scheme, SolverOptions, SweepSpec, SweepVariable};
use crate::linalg::{c, CMatrix};
use crate::model::{self, dbm_to_watts, nats_to_bits, rayleigh_channel, Instance, ScattererModel, SystemConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Solver(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Solver(e) => solver_exit_code(e),
        }
    }
}

pub fn solver_exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) => EXIT_CONFIG,
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_NUMERICAL,
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn config_err(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

/// A power given as a bare number (dBm) or a string with a unit tag:
/// `"40 dBm"`, `"10 W"`, `"100 mW"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Power {
    Dbm(f64),
    Tagged(String),
}

impl Power {
    pub fn watts(&self) -> std::result::Result<f64, String> {
        match self {
            Power::Dbm(v) => Ok(dbm_to_watts(*v)),
            Power::Tagged(s) => {
                let s = s.trim();
                let split =
                    s.find(|ch: char| ch.is_ascii_alphabetic()).ok_or_else(|| format!("missing unit in '{s}'"))?;
                let (num, unit) = s.split_at(split);
                let v: f64 = num.trim().parse().map_err(|_| format!("bad number in '{s}'"))?;
                match unit.trim() {
                    "dBm" | "dbm" => Ok(dbm_to_watts(v)),
                    "dBW" | "dbw" => Ok(10f64.powf(v / 10.0)),
                    "W" | "w" => Ok(v),
                    "mW" | "mw" => Ok(v * 1e-3),
                    u => Err(format!("unknown power unit '{u}'")),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default = "six")]
    pub n_tx: usize,
    #[serde(default = "six")]
    pub n_rx: usize,
    #[serde(default = "one")]
    pub n_users: usize,
    #[serde(default = "thirty")]
    pub n_slots: usize,
    pub p0: Power,
    pub sigma_n2: Power,
    pub sigma_z2: Power,
    /// One entry per user, or a single entry shared by all users.
    pub rate_targets: Vec<f64>,
    #[serde(default = "half")]
    pub spacing: f64,
    #[serde(default)]
    pub seed: u64,
}

fn six() -> usize {
    6
}
fn one() -> usize {
    1
}
fn thirty() -> usize {
    30
}
fn half() -> f64 {
    0.5
}

/// `kind = "point"` with `angle_deg`/`strength`, `kind = "extended"` with
/// either explicit `angles_deg`/`strengths` or `range_deg`/`count`/`strength`,
/// or `kind = "none"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererSection {
    pub kind: String,
    pub angle_deg: Option<f64>,
    pub strength: Option<f64>,
    pub angles_deg: Option<Vec<f64>>,
    pub strengths: Option<Vec<f64>>,
    pub range_deg: Option<[f64; 2]>,
    pub count: Option<usize>,
}

impl ScattererSection {
    fn resolve(&self, path: &str) -> CliResult<Option<ScattererModel>> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| config_err(&format!("{path}.{name}"), "missing"));
        let model = match self.kind.as_str() {
            "none" => return Ok(None),
            "point" => ScattererModel::point(need(self.angle_deg, "angle_deg")?, need(self.strength, "strength")?),
            "extended" => match (&self.angles_deg, &self.strengths, self.range_deg, self.count) {
                (Some(a), Some(s), None, None) => {
                    ScattererModel { kind: model::ScattererKind::Extended, angles_deg: a.clone(), strengths: s.clone() }
                }
                (None, None, Some([lo, hi]), Some(n)) => {
                    ScattererModel::extended_uniform(lo, hi, n, need(self.strength, "strength")?)
                }
                _ => {
                    return Err(config_err(
                        path,
                        "extended scatterer needs angles_deg + strengths, or range_deg + count + strength",
                    ))
                }
            },
            k => return Err(config_err(&format!("{path}.kind"), format!("unknown kind '{k}'"))),
        };
        model.validate().map_err(|e| config_err(path, e))?;
        Ok(Some(model))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    /// `"rayleigh"` (seeded) or `"file"`.
    #[serde(default = "rayleigh")]
    pub source: String,
    /// JSON file `{"re": [[…]], "im": [[…]]}`, `K × N_T`, relative to the config.
    pub path: Option<PathBuf>,
}

fn rayleigh() -> String {
    "rayleigh".into()
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { source: rayleigh(), path: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub name: String,
    #[serde(default = "eps1")]
    pub eps1: f64,
    #[serde(default = "eps2")]
    pub eps2: f64,
    #[serde(default = "max_iter")]
    pub max_iter: usize,
    #[serde(default = "randomizations")]
    pub randomizations: usize,
}

fn eps1() -> f64 {
    crate::solver_mm::EPS1
}
fn eps2() -> f64 {
    crate::solver_mm::EPS2
}
fn max_iter() -> usize {
    crate::solver_mm::MAX_ITER
}
fn randomizations() -> usize {
    crate::solver_sdr::DEFAULT_RANDOMIZATIONS
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    #[serde(default)]
    pub grid: Vec<f64>,
    #[serde(default = "one")]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EvalKind {
    Beampattern,
    Capon,
    Rmse,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub kind: Option<EvalKind>,
    /// Angle grid step; defaults to 0.1° for spectra and 0.05° for the MLE.
    pub step_deg: Option<f64>,
    #[serde(default = "loading")]
    pub loading: f64,
    /// Seed of the simulated echo used by `capon`.
    #[serde(default)]
    pub echo_seed: u64,
}

fn loading() -> f64 {
    eval::CAPON_LOADING
}

impl Default for EvalSection {
    fn default() -> Self {
        Self { kind: None, step_deg: None, loading: loading(), echo_seed: 0 }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub target: ScattererSection,
    pub interference: Option<ScattererSection>,
    #[serde(default)]
    pub channel: ChannelSection,
    pub solver: SolverSection,
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// A parsed config resolved against its file location and CLI overrides.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub instance: Instance,
    pub scheme: Scheme,
    pub options: SolverOptions,
    pub seed: u64,
    /// SHA-256 of the config file bytes.
    pub config_hash: String,
}

impl Experiment {
    pub fn load(path: &Path, seed: Option<u64>) -> CliResult<Self> {
        let text = fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_bytes(&text, base, seed)
    }

    pub fn from_bytes(bytes: &[u8], base: &Path, seed: Option<u64>) -> CliResult<Self> {
        let text = std::str::from_utf8(bytes).map_err(|_| CliError::Config("config is not UTF-8".into()))?;
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let hash = hex::encode(Sha256::digest(bytes));
        let seed = seed.unwrap_or(config.system.seed);
        let s = &config.system;
        let power = |p: &Power, name: &str| p.watts().map_err(|e| config_err(&format!("system.{name}"), e));
        let rate_targets = match s.rate_targets.len() {
            1 => vec![s.rate_targets[0]; s.n_users],
            n if n == s.n_users => s.rate_targets.clone(),
            n => return Err(config_err("system.rate_targets", format!("{n} entries for {} users", s.n_users))),
        };
        let sys = SystemConfig {
            n_tx: s.n_tx,
            n_rx: s.n_rx,
            n_users: s.n_users,
            n_slots: s.n_slots,
            p0: power(&s.p0, "p0")?,
            sigma_n2: power(&s.sigma_n2, "sigma_n2")?,
            sigma_z2: power(&s.sigma_z2, "sigma_z2")?,
            rate_targets,
            rng_seed: seed,
            spacing: s.spacing,
        };
        sys.validate().map_err(|e| config_err("system", e))?;
        let target =
            config.target.resolve("target")?.ok_or_else(|| config_err("target.kind", "a target is required"))?;
        let interference = match &config.interference {
            Some(sec) => sec.resolve("interference")?,
            None => None,
        };
        let channel = match config.channel.source.as_str() {
            "rayleigh" => rayleigh_channel(sys.n_users, sys.n_tx, seed),
            "file" => {
                let p = config.channel.path.as_ref().ok_or_else(|| config_err("channel.path", "missing"))?;
                read_channel(&base.join(p), sys.n_users, sys.n_tx)?
            }
            other => return Err(config_err("channel.source", format!("unknown source '{other}'"))),
        };
        let scheme = Scheme::parse(&config.solver.name).map_err(|e| config_err("solver.name", e))?;
        scheme.check(&sys, interference.as_ref().map(|m| m.kind)).map_err(|e| config_err("solver.name", e))?;
        let instance = Instance::new(sys, channel, target, interference).map_err(|e| config_err("instance", e))?;
        let sv = &config.solver;
        let options = SolverOptions {
            eps1: sv.eps1,
            eps2: sv.eps2,
            max_iter: sv.max_iter,
            randomizations: sv.randomizations,
            seed,
        };
        Ok(Self { config, instance, scheme, options, seed, config_hash: hash })
    }
}

#[derive(Deserialize)]
struct ChannelFile {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn read_channel(path: &Path, k: usize, n_tx: usize) -> CliResult<CMatrix> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let f: ChannelFile = serde_json::from_str(&text).map_err(|e| config_err("channel.path", e))?;
    let shape_ok = |m: &Vec<Vec<f64>>| m.len() == k && m.iter().all(|r| r.len() == n_tx);
    if !shape_ok(&f.re) || !shape_ok(&f.im) {
        return Err(config_err("channel.path", format!("channel must be {k} x {n_tx}")));
    }
    Ok(CMatrix::from_fn(k, n_tx, |i, j| c(f.re[i][j], f.im[i][j])))
}

/// `a:step:b` (inclusive) or a comma-separated list.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = |m: &str| CliError::Config(format!("--grid '{spec}': {m}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad("not a number"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.len() {
        1 => spec.split(',').filter(|s| !s.trim().is_empty()).map(num).collect(),
        3 => {
            let (lo, step, hi) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            eval::angle_grid(lo, hi, step).map_err(|e| bad(&e.to_string()))
        }
        _ => Err(bad("expected a:step:b or a comma list")),
    }
}

/// C `%.{digits}g`.
pub fn fmt_g(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if exp < -4 || exp >= p as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mant), sign, exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

fn g12(x: f64) -> String {
    fmt_g(x, 12)
}

/// CSV with a `#` provenance preamble.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(exp: &Experiment, columns: &[String]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# mi-isac {VERSION}");
        let _ = writeln!(text, "# config_sha256 {}", exp.config_hash);
        let _ = writeln!(text, "# seed {}", exp.seed);
        let _ = writeln!(text, "# solver {}", exp.scheme.name());
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}

#[derive(Debug, Serialize)]
struct SolutionFile<'a> {
    version: &'a str,
    config_sha256: &'a str,
    seed: u64,
    solver: &'a str,
    n_tx: usize,
    n_users: usize,
    /// Row-major `N_T × K` real parts.
    w_re: Vec<Vec<f64>>,
    w_im: Vec<Vec<f64>>,
    power_w: f64,
    mi_bits: f64,
    rates_bps_hz: Vec<f64>,
    iterations: usize,
    status: &'a str,
    kkt_residual: Option<f64>,
}

#[derive(Debug, Serialize)]
struct RunFile<'a> {
    version: &'a str,
    command: &'a str,
    config_sha256: &'a str,
    seed: u64,
    wall_time_s: f64,
}

fn write_run(dir: &Path, exp: &Experiment, command: &str, started: Instant) -> CliResult<()> {
    let run = RunFile {
        version: VERSION,
        command,
        config_sha256: &exp.config_hash,
        seed: exp.seed,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    write_file(dir, "run.json", &(serde_json::to_string_pretty(&run).expect("serializable") + "\n"))?;
    Ok(())
}

/// Writes `solution.json` (deterministic), `trace.csv` and `run.json` (timing).
pub fn cmd_solve(exp: &Experiment, out: &Path) -> CliResult<eval::Solution> {
    let started = Instant::now();
    let sol = eval::solve(&exp.instance, exp.scheme, &exp.options)?;
    let w = &sol.beamformer.w;
    let part = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..w.nrows()).map(|i| (0..w.ncols()).map(|j| f(&w[(i, j)])).collect()).collect()
    };
    let file = SolutionFile {
        version: VERSION,
        config_sha256: &exp.config_hash,
        seed: exp.seed,
        solver: exp.scheme.name(),
        n_tx: w.nrows(),
        n_users: w.ncols(),
        w_re: part(|z| z.re),
        w_im: part(|z| z.im),
        power_w: sol.beamformer.power(),
        mi_bits: nats_to_bits(sol.mi),
        rates_bps_hz: sol.rates.clone(),
        iterations: sol.iterations,
        status: &sol.status,
        kkt_residual: sol.kkt_residual,
    };
    write_file(out, "solution.json", &(serde_json::to_string_pretty(&file).expect("serializable") + "\n"))?;
    let mut csv = Csv::new(exp, &["iteration".into(), "mi_bits".into()]);
    for (i, mi) in sol.mi_trace.iter().enumerate() {
        csv.row(&[i.to_string(), g12(nats_to_bits(*mi))]);
    }
    write_file(out, "trace.csv", &csv.into_string())?;
    write_run(out, exp, "solve", started)?;
    Ok(sol)
}

fn sweep_spec(exp: &Experiment, grid: Option<Vec<f64>>) -> CliResult<SweepSpec> {
    let sec = exp.config.sweep.as_ref().ok_or_else(|| config_err("sweep", "missing [sweep] section"))?;
    let spec = SweepSpec {
        variable: sec.variable,
        grid: grid.unwrap_or_else(|| sec.grid.clone()),
        scheme: exp.scheme,
        trials: sec.trials,
        seed: exp.seed,
    };
    spec.validate().map_err(|e| config_err("sweep", e))?;
    Ok(spec)
}

/// Writes `sweep.csv`; failed points keep their row with `nan` values and the
/// failure in the status column. Returns the first failure, if any, after writing.
pub fn cmd_sweep(exp: &Experiment, out: &Path, grid: Option<Vec<f64>>) -> CliResult<Vec<eval::SweepPoint>> {
    let started = Instant::now();
    let spec = sweep_spec(exp, grid)?;
    let points = eval::mi_sweep(&spec, &exp.instance, &exp.options)?;
    let k = exp.instance.config.n_users;
    let mut cols: Vec<String> = ["variable", "value", "scheme", "mi_bits"].iter().map(|s| s.to_string()).collect();
    cols.extend((1..=k).map(|i| format!("rate_{i}")));
    cols.extend(["iterations", "seed", "status"].iter().map(|s| s.to_string()));
    let mut csv = Csv::new(exp, &cols);
    for p in &points {
        let mut row = vec![spec.variable.name().to_string(), g12(p.value), spec.scheme.name().to_string()];
        match &p.outcome {
            Ok(s) => {
                row.push(g12(nats_to_bits(s.mi)));
                row.extend(s.rates.iter().map(|r| g12(*r)));
                row.extend([s.iterations.to_string(), p.seed.to_string(), s.status.clone()]);
            }
            Err(e) => {
                row.extend(std::iter::repeat_n("nan".to_string(), 1 + k));
                let tag = match solver_exit_code(e) {
                    EXIT_INFEASIBLE => "infeasible",
                    EXIT_CONFIG => "invalid",
                    _ => "numerical-failure",
                };
                row.extend(["0".to_string(), p.seed.to_string(), tag.to_string()]);
            }
        }
        csv.row(&row);
    }
    write_file(out, "sweep.csv", &csv.into_string())?;
    write_run(out, exp, "sweep", started)?;
    if let Some(Err(e)) = points.iter().map(|p| &p.outcome).find(|o| o.is_err()) {
        return Err(CliError::Solver(e.clone()));
    }
    Ok(points)
}

/// Writes `spectrum.csv` (beampattern, capon) or `rmse.csv`.
pub fn cmd_eval(exp: &Experiment, out: &Path, kind: EvalKind, grid: Option<Vec<f64>>) -> CliResult<PathBuf> {
    let started = Instant::now();
    let spacing = exp.instance.config.spacing;
    let path = match kind {
        EvalKind::Beampattern | EvalKind::Capon => {
            let step = exp.config.eval.step_deg.unwrap_or(eval::BEAM_STEP_DEG);
            let angles = eval::angle_grid(-90.0, 90.0, step).map_err(|e| config_err("eval.step_deg", e))?;
            let sol = eval::solve(&exp.instance, exp.scheme, &exp.options)?;
            let spectrum = if kind == EvalKind::Beampattern {
                eval::beampattern(&sol.beamformer, &angles, spacing)
            } else {
                let y = model::simulate_echo(&exp.instance, &sol.beamformer, exp.config.eval.echo_seed);
                eval::capon_spectrum(&y, &angles, exp.config.eval.loading, spacing)?
            };
            let mut csv = Csv::new(exp, &["angle_deg".into(), "value_db".into()]);
            for (a, v) in spectrum.angles.iter().zip(&spectrum.values) {
                csv.row(&[g12(*a), g12(*v)]);
            }
            write_file(out, "spectrum.csv", &csv.into_string())?
        }
        EvalKind::Rmse => {
            let mut spec = sweep_spec(exp, grid)?;
            if spec.variable != SweepVariable::RadarSnrDb {
                return Err(config_err("sweep.variable", "rmse sweeps need variable = \"radar_snr_db\""));
            }
            spec.seed = exp.seed;
            let step = exp.config.eval.step_deg.unwrap_or(eval::MLE_STEP_DEG);
            let rows = eval::rmse_sweep(&spec, &exp.instance, &exp.options, step)?;
            let cols: Vec<String> =
                ["snr_db", "rmse_deg", "trials", "iterations", "seed"].iter().map(|s| s.to_string()).collect();
            let mut csv = Csv::new(exp, &cols);
            for r in rows {
                csv.row(&[
                    g12(r.value),
                    g12(r.rmse_deg),
                    r.trials.to_string(),
                    r.iterations.to_string(),
                    r.seed.to_string(),
                ]);
            }
            write_file(out, "rmse.csv", &csv.into_string())?
        }
    };
    write_run(out, exp, "eval", started)?;
    Ok(path)
}

#[derive(Debug, Parser)]
#[command(name = "mi-isac", version, about = "MI-maximizing ISAC beamforming: solve, sweep and evaluate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `system.seed` (channel draw and solver randomness).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps and Monte-Carlo trials.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Sweep grid, `a:step:b` or `v1,v2,…`; overrides `[sweep] grid`.
    #[arg(long)]
    pub grid: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance; writes solution.json, trace.csv, run.json.
    Solve(Common),
    /// Sweep power, rate or radar SNR; writes sweep.csv.
    Sweep(Common),
    /// Beampattern, Capon spectrum or RMSE sweep; writes spectrum.csv or rmse.csv.
    Eval {
        /// Falls back to `[eval] kind`.
        kind: Option<EvalKind>,
        #[command(flatten)]
        common: Common,
    },
}

fn run_command(cli: Cli) -> CliResult<()> {
    let common = match &cli.command {
        Command::Solve(c) | Command::Sweep(c) => c,
        Command::Eval { common, .. } => common,
    };
    if let Some(n) = common.threads {
        // A second call in the same process keeps the first pool; that is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let exp = Experiment::load(&common.config, common.seed)?;
    let out = common.out.clone().or_else(|| exp.config.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let grid = common.grid.as_deref().map(parse_grid).transpose()?;
    match &cli.command {
        Command::Solve(_) => {
            cmd_solve(&exp, &out)?;
        }
        Command::Sweep(_) => {
            cmd_sweep(&exp, &out, grid)?;
        }
        Command::Eval { kind, .. } => {
            let kind = kind
                .or(exp.config.eval.kind)
                .ok_or_else(|| config_err("eval.kind", "give a kind on the command line or in [eval]"))?;
            cmd_eval(&exp, &out, kind, grid)?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run_command(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("mi-isac: {e}");
            e.exit_code()
        }
    }
}
