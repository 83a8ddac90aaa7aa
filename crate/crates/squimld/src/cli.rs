//! Argument parsing and the subcommands.
//!
//! A value is taken from, in order: the command line, a `SQUIMLD_*`
//! environment variable, the `key = value` file given by `--config`, and
//! finally the built-in default.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::parser::ValueSource;
use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use squimld_core::ge::RateParams;
use squimld_core::mc::{self, EnsembleConfig, MetropolisConfig, Model, Observable, Sampler};
use squimld_core::rate::{self, I2Config, RayOrigin, ScanConfig};
use squimld_core::wfe::{self, RareEventConfig, WfeParams};

use crate::exec::RayonExecutor;
use crate::manifest::RunManifest;
use crate::output::{self, EnsembleRow};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "squimld", version, about = "Rate functions, transition bounds and sphere-ensemble Monte Carlo for Schrödingerist Ising models")]
pub struct Cli {
    /// File of `key = value` lines supplying defaults for the subcommand.
    #[arg(long, global = true, env = "SQUIMLD_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, env = "SQUIMLD_OUT_DIR", default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads; 0 means one per core.
    #[arg(long, env = "SQUIMLD_WORKERS", default_value_t = 0)]
    pub workers: usize,
    #[arg(long, env = "SQUIMLD_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Number of random-stream shards. Results depend on it, not on `workers`.
    #[arg(long, env = "SQUIMLD_SHARDS", default_value_t = 64)]
    pub shards: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OriginArg {
    P,
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Scwm,
    ScwmWfe,
    ScwmEntropy,
    SquimD1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Auto,
    Direct,
    Metropolis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObservableArg {
    Msq,
    MAbs,
    MagnetizedFraction,
    Dispersion,
    Magnetization,
}

impl From<ObservableArg> for Observable {
    fn from(o: ObservableArg) -> Self {
        match o {
            ObservableArg::Msq => Observable::Msq,
            ObservableArg::MAbs => Observable::MAbs,
            ObservableArg::MagnetizedFraction => Observable::MagnetizedFraction,
            ObservableArg::Dispersion => Observable::Dispersion,
            ObservableArg::Magnetization => Observable::Magnetization,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct DomainScanArgs {
    #[arg(long, env = "SQUIMLD_X", default_value_t = 0.7)]
    pub x: f64,
    #[arg(long, env = "SQUIMLD_EPS", default_value_t = 0.3)]
    pub eps: f64,
    #[arg(long, env = "SQUIMLD_SAMPLES", default_value_t = 1_000_000)]
    pub samples: u64,
    /// Bias strengths, samples split equally.
    #[arg(long, env = "SQUIMLD_ETA", value_delimiter = ',', default_values_t = [0.0, 2.0, 8.0, 32.0])]
    pub eta: Vec<f64>,
    #[arg(long, value_enum, env = "SQUIMLD_ORIGIN", default_value_t = OriginArg::P)]
    pub origin: OriginArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct RateCurvesArgs {
    #[arg(long, env = "SQUIMLD_XS", value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7])]
    pub xs: Vec<f64>,
    #[arg(long, env = "SQUIMLD_EPS", default_value_t = 0.3)]
    pub eps: f64,
    #[arg(long, env = "SQUIMLD_SAMPLES", default_value_t = 10_000_000)]
    pub samples: u64,
    #[arg(long, env = "SQUIMLD_ETA", value_delimiter = ',', default_values_t = [0.0, 2.0, 8.0, 32.0])]
    pub eta: Vec<f64>,
    /// Skip the local polish of the best sampled point.
    #[arg(long, env = "SQUIMLD_NO_POLISH", action = ArgAction::SetTrue)]
    pub no_polish: bool,
    /// Inverse temperatures for the four-case classification (needs >= 8 grid points).
    #[arg(long, env = "SQUIMLD_CLASSIFY_BETA", value_delimiter = ',')]
    pub classify_beta: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct WfeArgs {
    #[arg(long, env = "SQUIMLD_OMEGA", default_value_t = 1.2)]
    pub omega: f64,
    #[arg(long, env = "SQUIMLD_EPS", default_value_t = 0.1)]
    pub eps: f64,
    /// Defaults to eps.
    #[arg(long, env = "SQUIMLD_DELTA")]
    pub delta: Option<f64>,
    /// Spin count of the rare-event simulation; 0 skips it.
    #[arg(long, env = "SQUIMLD_RARE_N", default_value_t = 0)]
    pub rare_n: usize,
    #[arg(long, env = "SQUIMLD_REPLICAS", default_value_t = 10_000_000)]
    pub replicas: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    #[arg(long, value_enum, env = "SQUIMLD_MODEL", default_value_t = ModelArg::Scwm)]
    pub model: ModelArg,
    #[arg(long = "n", env = "SQUIMLD_N", value_delimiter = ',', default_values_t = [8usize])]
    pub n: Vec<usize>,
    #[arg(long, env = "SQUIMLD_BETA", value_delimiter = ',', default_values_t = [0.0])]
    pub beta: Vec<f64>,
    #[arg(long, env = "SQUIMLD_OMEGA", default_value_t = 1.2)]
    pub omega: f64,
    /// Threshold of the magnetized fraction `m² ≥ eps`.
    #[arg(long, env = "SQUIMLD_EPS", default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, env = "SQUIMLD_SAMPLES", default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, value_enum, env = "SQUIMLD_SAMPLER", default_value_t = SamplerArg::Auto)]
    pub sampler: SamplerArg,
    #[arg(long, env = "SQUIMLD_BURN_IN", default_value_t = 2000)]
    pub burn_in: u64,
    #[arg(long, env = "SQUIMLD_THIN", default_value_t = 1)]
    pub thin: u64,
    #[arg(long, value_enum, env = "SQUIMLD_OBSERVABLES", value_delimiter = ',',
          default_values_t = [ObservableArg::Msq, ObservableArg::MAbs, ObservableArg::MagnetizedFraction, ObservableArg::Dispersion, ObservableArg::Magnetization])]
    pub observables: Vec<ObservableArg>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct EsmArgs {
    #[arg(long = "n", env = "SQUIMLD_N", value_delimiter = ',', default_values_t = [2usize, 4, 8, 12, 16])]
    pub n: Vec<usize>,
    #[arg(long, env = "SQUIMLD_BETA", value_delimiter = ',', default_values_t = [1.0])]
    pub beta: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, env = "SQUIMLD_LEVEL", default_value_t = Level::Fast)]
    pub level: Level,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the domain D and the constraint set G at one (x, eps).
    DomainScan(DomainScanArgs),
    /// I1 and I2 on a grid of x.
    RateCurves(RateCurvesArgs),
    /// Transition bound beta_c and optional rare-event simulation.
    Wfe(WfeArgs),
    /// Thermal averages over sphere ensembles.
    Ensemble(EnsembleArgs),
    /// Exactly solvable Gaussian surrogate.
    Esm(EsmArgs),
    /// Oracle suite; exits 4 when a check fails.
    Validate(ValidateArgs),
}

fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        out.push((k.trim().replace('-', "_"), v.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

/// Parses `argv`, filling values absent from the command line and the
/// environment from the `--config` file.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let cmd = Cli::command();
    let m = cmd.clone().try_get_matches_from(&argv)?;
    let Some((sub_name, sub_m)) = m.subcommand() else {
        return Cli::from_arg_matches(&m);
    };
    let config = sub_m.get_one::<PathBuf>("config").or_else(|| m.get_one::<PathBuf>("config")).cloned();
    let Some(path) = config else {
        return Cli::from_arg_matches(&m);
    };
    let entries = read_config(&path).map_err(|e| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("{e}\n")))?;
    let sub = cmd.find_subcommand(sub_name).expect("matched subcommand exists");
    let mut extra: Vec<OsString> = Vec::new();
    for (key, value) in entries {
        let Some(arg) = sub.get_arguments().find(|a| a.get_id().as_str() == key) else {
            return Err(clap::Error::raw(
                clap::error::ErrorKind::UnknownArgument,
                format!("unknown config key '{key}' for {sub_name}\n"),
            ));
        };
        if matches!(sub_m.value_source(&key), Some(ValueSource::CommandLine | ValueSource::EnvVariable)) {
            continue;
        }
        let long = arg.get_long().unwrap_or(key.as_str());
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            if value == "true" || value == "1" {
                extra.push(format!("--{long}").into());
            }
        } else {
            extra.push(format!("--{long}={value}").into());
        }
    }
    let mut full = argv;
    full.extend(extra);
    let m = cmd.try_get_matches_from(full)?;
    Cli::from_arg_matches(&m)
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn prepare(common: &Common, command: &str) -> Result<(RayonExecutor, RunManifest), CliError> {
    if common.shards == 0 {
        return Err(CliError::Usage("--shards must be at least 1".into()));
    }
    fs::create_dir_all(&common.out_dir)?;
    let exec = RayonExecutor::new(common.workers).map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    let mut m = RunManifest::start(command, exec.workers(), Some(common.seed));
    m.param("shards", common.shards);
    m.param("out_dir", common.out_dir.display());
    Ok((exec, m))
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn finish(mut m: RunManifest, dir: &Path, files: Vec<PathBuf>) -> Result<Vec<PathBuf>, CliError> {
    m.output_files = files.clone();
    let mf = m.finish(dir)?;
    let mut all = files;
    all.push(mf);
    Ok(all)
}

/// Runs one subcommand and returns the files it wrote.
pub fn execute(cmd: &Command) -> Result<Vec<PathBuf>, CliError> {
    match cmd {
        Command::DomainScan(a) => domain_scan(a),
        Command::RateCurves(a) => rate_curves(a),
        Command::Wfe(a) => wfe_cmd(a),
        Command::Ensemble(a) => ensemble(a),
        Command::Esm(a) => esm(a),
        Command::Validate(a) => validate_cmd(a),
    }
}

fn scan_config(samples: u64, eta: &[f64], common: &Common, origin: OriginArg) -> ScanConfig {
    let mut s = ScanConfig::new(samples, common.seed);
    s.eta_schedule = eta.to_vec();
    s.shards = common.shards;
    s.origin = match origin {
        OriginArg::P => RayOrigin::PointP,
        OriginArg::Origin => RayOrigin::Origin,
    };
    s
}

fn domain_scan(a: &DomainScanArgs) -> Result<Vec<PathBuf>, CliError> {
    let params = RateParams::new(a.x, a.eps)?;
    let (exec, mut m) = prepare(&a.common, "domain-scan")?;
    m.param("x", a.x);
    m.param("eps", a.eps);
    m.param("samples", a.samples);
    m.param("eta", join(&a.eta));
    m.param("origin", format!("{:?}", a.origin));
    let cfg = scan_config(a.samples, &a.eta, &a.common, a.origin);
    let samples = rate::domain_scan(params, &cfg, &exec)?;
    let dir = &a.common.out_dir;
    let files = vec![output::write_domain_scan(dir, &samples)?, output::write_plot(dir, "domain_scan.gp", output::DOMAIN_SCAN_GP)?];
    finish(m, dir, files)
}

fn rate_curves(a: &RateCurvesArgs) -> Result<Vec<PathBuf>, CliError> {
    if a.xs.is_empty() {
        return Err(CliError::Usage("--xs is empty".into()));
    }
    let (exec, mut m) = prepare(&a.common, "rate-curves")?;
    m.param("xs", join(&a.xs));
    m.param("eps", a.eps);
    m.param("samples", a.samples);
    m.param("eta", join(&a.eta));
    m.param("polish", !a.no_polish);
    let mut cfg = I2Config::new(a.samples, a.common.seed);
    cfg.scan = scan_config(a.samples, &a.eta, &a.common, OriginArg::P);
    cfg.polish = !a.no_polish;
    let curve = rate::rate_curve(&a.xs, a.eps, &cfg, &exec)?;
    let dir = &a.common.out_dir;
    let mut files = output::write_rate_curve(dir, &curve, a.samples, a.common.seed)?;
    if !a.classify_beta.is_empty() {
        m.param("classify_beta", join(&a.classify_beta));
        let rows = a
            .classify_beta
            .iter()
            .map(|&b| rate::classify_theorem_two(b, &curve).map(|g| (b, g)))
            .collect::<Result<Vec<_>, _>>()?;
        files.push(output::write_classification(dir, &rows)?);
    }
    files.push(output::write_plot(dir, "rate_curve.gp", output::RATE_CURVE_GP)?);
    finish(m, dir, files)
}

fn wfe_cmd(a: &WfeArgs) -> Result<Vec<PathBuf>, CliError> {
    let p = WfeParams::with_delta(a.omega, a.eps, a.delta.unwrap_or(a.eps))?;
    let (exec, mut m) = prepare(&a.common, "wfe")?;
    m.param("omega", a.omega);
    m.param("eps", a.eps);
    m.param("delta", p.delta());
    let bound = wfe::beta_critical(p)?;
    m.param("a_max_line", output::num(wfe::a_max_line(p)));
    m.param("a_max_interval", output::num(wfe::a_extremes(p).1));
    m.param("mean", output::num(wfe::mean(p)));
    let dir = &a.common.out_dir;
    let mut files = vec![output::write_wfe(dir, p, &bound)?];
    let (lo, hi) = bound.pstar.theta_range;
    let rows: Vec<(f64, f64)> = (0..=200)
        .map(|i| lo + (hi - lo) * i as f64 / 200.0)
        .map(|t| (t, wfe::p_theta(t, p).unwrap_or(f64::NAN)))
        .collect();
    files.push(output::write_p_theta(dir, &rows)?);
    if a.rare_n > 0 {
        m.param("rare_n", a.rare_n);
        m.param("replicas", a.replicas);
        let cfg = RareEventConfig { n: a.rare_n, replicas: a.replicas, shards: a.common.shards, seed: a.common.seed };
        let est = wfe::rare_event(p, &cfg, &exec)?;
        files.push(output::write_rare_event(dir, &est, a.rare_n, bound.pstar.p_star_inf, a.common.seed)?);
    }
    files.push(output::write_plot(dir, "wfe_p_theta.gp", output::WFE_GP)?);
    finish(m, dir, files)
}

fn ensemble(a: &EnsembleArgs) -> Result<Vec<PathBuf>, CliError> {
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let model = match a.model {
        ModelArg::Scwm => Model::Scwm,
        ModelArg::ScwmWfe => Model::ScwmWfe { omega: a.omega },
        ModelArg::ScwmEntropy => Model::ScwmEntropy,
        ModelArg::SquimD1 => Model::SquimD1,
    };
    let sampler = match a.sampler {
        SamplerArg::Auto => Sampler::Auto,
        SamplerArg::Direct => Sampler::Direct,
        SamplerArg::Metropolis => Sampler::Metropolis(MetropolisConfig { burn_in_sweeps: a.burn_in, thin_sweeps: a.thin }),
    };
    let (exec, mut m) = prepare(&a.common, "ensemble")?;
    m.param("model", model.name());
    m.param("n", join(&a.n));
    m.param("beta", join(&a.beta));
    if let Some(w) = model.omega() {
        m.param("omega", w);
    }
    m.param("eps", a.eps);
    m.param("samples", a.samples);
    m.param("sampler", format!("{:?}", a.sampler));
    let obs: Vec<Observable> = a.observables.iter().map(|&o| o.into()).collect();
    let mut rows = Vec::new();
    for &n in &a.n {
        for &beta in &a.beta {
            let mut cfg = EnsembleConfig::new(n, beta, model, a.samples, a.common.seed);
            cfg.eps = a.eps;
            cfg.shards = a.common.shards;
            cfg.sampler = sampler;
            let est = mc::thermal_averages(&cfg, &obs, &exec)?;
            for (o, e) in obs.iter().zip(est) {
                rows.push(EnsembleRow { model, n, beta, eps: a.eps, observable: *o, estimate: e, seed: a.common.seed });
            }
        }
    }
    let dir = &a.common.out_dir;
    let files = vec![output::write_ensemble(dir, &rows)?, output::write_plot(dir, "ensemble.gp", output::ENSEMBLE_GP)?];
    finish(m, dir, files)
}

fn esm(a: &EsmArgs) -> Result<Vec<PathBuf>, CliError> {
    let (_, mut m) = prepare(&a.common, "esm")?;
    m.seed = None;
    m.param("n", join(&a.n));
    m.param("beta", join(&a.beta));
    let mut rows = Vec::new();
    for &n in &a.n {
        for &beta in &a.beta {
            rows.push(mc::esm_evaluate(n, beta)?);
        }
    }
    let dir = &a.common.out_dir;
    let files = vec![output::write_esm(dir, &rows)?, output::write_plot(dir, "esm.gp", output::ESM_GP)?];
    finish(m, dir, files)
}

fn validate_cmd(a: &ValidateArgs) -> Result<Vec<PathBuf>, CliError> {
    let (exec, mut m) = prepare(&a.common, "validate")?;
    m.param("level", format!("{:?}", a.level));
    let checks = crate::validate::run_suite(a.level == Level::Full, a.common.seed, &exec);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let dir = &a.common.out_dir;
    let file = output::write_validation(dir, &checks)?;
    let files = finish(m, dir, vec![file])?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(files)
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}
