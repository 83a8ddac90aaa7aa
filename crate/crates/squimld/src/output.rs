//! CSV writers with fixed column order and gnuplot companions.

use std::fs;
use std::path::{Path, PathBuf};

use squimld_core::mc::{EsmResult, McEstimate, Model, Observable};
use squimld_core::rate::{ConstraintSample, GFunctions, RateCurvePoint};
use squimld_core::wfe::{CriticalBound, RareEventEstimate, WfeParams};

use crate::CliError;

/// 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

pub fn write_domain_scan(dir: &Path, samples: &[ConstraintSample]) -> Result<PathBuf, CliError> {
    let path = dir.join("domain_scan.csv");
    let mut w = writer(&path)?;
    w.write_record(["theta1", "theta2", "in_D", "in_G", "k"])?;
    for s in samples {
        let k = s.k.map(num).unwrap_or_default();
        w.write_record([num(s.theta.theta1), num(s.theta.theta2), flag(s.in_d).into(), flag(s.in_g).into(), k])?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_rate_curve(dir: &Path, curve: &[RateCurvePoint], samples: u64, seed: u64) -> Result<Vec<PathBuf>, CliError> {
    let path = dir.join("rate_curve.csv");
    let mut w = writer(&path)?;
    w.write_record(["x", "I1", "I2", "accepted_G", "samples", "seed"])?;
    for p in curve {
        let (i2, g) = match &p.i2 {
            Some(e) => (num(e.value), e.accepted_g.to_string()),
            None => ("NoConstraintPoints".to_string(), "0".to_string()),
        };
        w.write_record([num(p.x), num(p.i1), i2, g, samples.to_string(), seed.to_string()])?;
    }
    w.flush()?;
    let detail = dir.join("rate_curve_detail.csv");
    let mut w = writer(&detail)?;
    w.write_record(["x", "I2_raw_min", "noise_band", "theta1", "theta2", "accepted_D"])?;
    for p in curve {
        match &p.i2 {
            Some(e) => w.write_record([
                num(p.x),
                num(e.raw_min),
                num(e.noise_band),
                num(e.theta.theta1),
                num(e.theta.theta2),
                e.accepted_d.to_string(),
            ])?,
            None => w.write_record([num(p.x), String::new(), String::new(), String::new(), String::new(), String::new()])?,
        }
    }
    w.flush()?;
    Ok(vec![path, detail])
}

pub fn write_classification(dir: &Path, rows: &[(f64, GFunctions)]) -> Result<PathBuf, CliError> {
    let path = dir.join("classification.csv");
    let mut w = writer(&path)?;
    w.write_record(["beta", "g1_hat", "x1_hat", "g2_hat", "x2_hat", "case", "ratio_rate"])?;
    for (beta, g) in rows {
        w.write_record([
            num(*beta),
            num(g.g1_hat),
            num(g.x1_hat),
            num(g.g2_hat),
            num(g.x2_hat),
            format!("{:?}", g.case),
            num(g.ratio_rate),
        ])?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_wfe(dir: &Path, p: WfeParams, bound: &CriticalBound) -> Result<PathBuf, CliError> {
    let path = dir.join("wfe_transition.csv");
    let mut w = writer(&path)?;
    w.write_record(["omega", "eps", "r", "delta", "p_star_inf", "y_at_inf", "beta_c", "hypotheses_ok"])?;
    w.write_record([
        num(p.omega()),
        num(p.eps()),
        num(p.r()),
        num(p.delta()),
        num(bound.pstar.p_star_inf),
        num(bound.pstar.y_at_inf),
        num(bound.beta_c),
        flag(bound.hypotheses.ok()).into(),
    ])?;
    w.flush()?;
    Ok(path)
}

pub fn write_p_theta(dir: &Path, rows: &[(f64, f64)]) -> Result<PathBuf, CliError> {
    let path = dir.join("wfe_p_theta.csv");
    let mut w = writer(&path)?;
    w.write_record(["theta", "p"])?;
    for (t, v) in rows {
        w.write_record([num(*t), num(*v)])?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_rare_event(dir: &Path, est: &RareEventEstimate, n: usize, p_star_inf: f64, seed: u64) -> Result<PathBuf, CliError> {
    let path = dir.join("wfe_rare_event.csv");
    let mut w = writer(&path)?;
    w.write_record(["N", "replicas", "theta", "log_p", "log_p_se", "rate", "p_star_inf", "hits", "seed"])?;
    w.write_record([
        n.to_string(),
        est.replicas.to_string(),
        num(est.theta),
        num(est.log_p),
        num(est.log_p_se),
        num(est.rate),
        num(p_star_inf),
        est.hits.to_string(),
        seed.to_string(),
    ])?;
    w.flush()?;
    Ok(path)
}

pub struct EnsembleRow {
    pub model: Model,
    pub n: usize,
    pub beta: f64,
    pub eps: f64,
    pub observable: Observable,
    pub estimate: McEstimate,
    pub seed: u64,
}

pub fn write_ensemble(dir: &Path, rows: &[EnsembleRow]) -> Result<PathBuf, CliError> {
    let path = dir.join("ensemble.csv");
    let mut w = writer(&path)?;
    w.write_record(["model", "N", "beta", "omega", "eps", "observable", "mean", "std_error", "n_samples", "seed"])?;
    for r in rows {
        w.write_record([
            r.model.name().to_string(),
            r.n.to_string(),
            num(r.beta),
            r.model.omega().map(num).unwrap_or_default(),
            num(r.eps),
            r.observable.name().to_string(),
            num(r.estimate.mean),
            num(r.estimate.std_error),
            r.estimate.n_samples.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_esm(dir: &Path, rows: &[EsmResult]) -> Result<PathBuf, CliError> {
    let path = dir.join("esm.csv");
    let mut w = writer(&path)?;
    w.write_record(["N", "beta", "logZhat", "msq_dispersion"])?;
    for r in rows {
        w.write_record([r.n.to_string(), num(r.beta), num(r.log_z_hat), num(r.msq_dispersion)])?;
    }
    w.flush()?;
    Ok(path)
}

pub fn write_validation(dir: &Path, checks: &[crate::validate::Check]) -> Result<PathBuf, CliError> {
    let path = dir.join("validate.csv");
    let mut w = writer(&path)?;
    w.write_record(["check", "passed", "detail"])?;
    for c in checks {
        w.write_record([c.name.as_str(), flag(c.passed), c.detail.as_str()])?;
    }
    w.flush()?;
    Ok(path)
}

/// Writes a gnuplot script and returns its path.
pub fn write_plot(dir: &Path, name: &str, body: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

pub const DOMAIN_SCAN_GP: &str = "\
set datafile separator ','
set key autotitle columnhead
set xlabel 'theta1'
set ylabel 'theta2'
set terminal pngcairo size 900,700
set output 'domain_scan.png'
plot 'domain_scan.csv' using ($3 == 1 && $4 == 0 ? $1 : 1/0):2 with dots lc rgb '#9090c0' title 'D', \\
     '' using ($4 == 1 ? $1 : 1/0):2 with dots lc rgb '#c03030' title 'G'
";

pub const RATE_CURVE_GP: &str = "\
set datafile separator ','
set xlabel 'x'
set ylabel 'I'
set terminal pngcairo size 900,700
set output 'rate_curve.png'
plot 'rate_curve.csv' using 1:2 every ::1 with linespoints title 'I1', \\
     '' using 1:3 every ::1 with linespoints title 'I2'
";

pub const ENSEMBLE_GP: &str = "\
set datafile separator ','
set xlabel 'beta'
set ylabel '[m^2]'
set terminal pngcairo size 900,700
set output 'ensemble.png'
plot 'ensemble.csv' using (strcol(6) eq 'msq' ? $3 : 1/0):7:8 with yerrorbars title 'msq'
";

pub const WFE_GP: &str = "\
set datafile separator ','
set xlabel 'theta'
set ylabel 'p(theta)'
set terminal pngcairo size 900,700
set output 'wfe_p_theta.png'
plot 'wfe_p_theta.csv' using 1:2 every ::1 with lines title 'p'
";

pub const ESM_GP: &str = "\
set datafile separator ','
set xlabel 'N'
set ylabel 'msq dispersion'
set logscale y
set terminal pngcairo size 900,700
set output 'esm.png'
plot 'esm.csv' using 1:4 every ::1 with linespoints title 'ESM'
";
