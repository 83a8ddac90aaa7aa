//! Critical-temperature bound for the Curie-Weiss model with a wavefunction
//! energy term.
//!
//! With `r = (ω-1)/ω` and `A(x) = √δ·x - r·x² - δ`, the scaled cumulant
//! generating function of the weighted chi-square sum `Σ χ_n² b_n`,
//! `b_n = A(g_n)`, is `p(θ) = -¼ ∫₋₁¹ log(1 - 2θA(x)) dx`. The bound is
//! `β_c = p̄* / ((ω-1)ε)` with `p̄* = inf_{y>0} p*(y)`.

use alloc::format;
use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::{shard_len, shard_rng, CompSum, ShardExecutor};
use crate::optim::golden_section;
use crate::quad::{integrate, QuadTol};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WfeParams {
    omega: f64,
    eps: f64,
    delta: f64,
}

impl WfeParams {
    /// Parameters with `δ = ε`.
    pub fn new(omega: f64, eps: f64) -> Result<Self> {
        Self::with_delta(omega, eps, eps)
    }

    /// Only finiteness and `ω > 1`, `ε, δ > 0` are enforced here; the
    /// remaining hypotheses are reported by [`check_hypotheses`].
    pub fn with_delta(omega: f64, eps: f64, delta: f64) -> Result<Self> {
        if !(omega.is_finite() && eps.is_finite() && delta.is_finite()) {
            return Err(crate::error::invalid("omega, eps and delta must be finite"));
        }
        if omega <= 1.0 || eps <= 0.0 || delta <= 0.0 {
            return Err(crate::error::invalid("need omega > 1, eps > 0, delta > 0"));
        }
        Ok(Self { omega, eps, delta })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn r(&self) -> f64 {
        (self.omega - 1.0) / self.omega
    }
}

pub fn a_of_x(x: f64, p: WfeParams) -> f64 {
    libm::sqrt(p.delta) * x - p.r() * x * x - p.delta
}

/// Location of the maximum of `A` on the whole line, `√δ / (2r)`.
pub fn vertex(p: WfeParams) -> f64 {
    libm::sqrt(p.delta) / (2.0 * p.r())
}

/// `δ(4-3ω) / (4(ω-1))`.
pub fn a_max_line(p: WfeParams) -> f64 {
    p.delta * (4.0 - 3.0 * p.omega) / (4.0 * (p.omega - 1.0))
}

/// Minimum and maximum of `A` on `[-1, 1]`.
pub fn a_extremes(p: WfeParams) -> (f64, f64) {
    let xs = vertex(p);
    let lo = a_of_x(-1.0, p).min(a_of_x(1.0, p));
    let hi = if xs.abs() <= 1.0 { a_of_x(xs, p) } else { a_of_x(-1.0, p).max(a_of_x(1.0, p)) };
    (lo, hi)
}

/// Smaller root of `A`, `√δ(1 - √(1-4r)) / (2r)`, or `None` when `r ≥ 1/4`.
pub fn lower_root(p: WfeParams) -> Option<f64> {
    let d = 1.0 - 4.0 * p.r();
    if d < 0.0 {
        return None;
    }
    let u = libm::sqrt(d);
    // same value as √δ(1-u)/(2r), without the cancellation
    Some(2.0 * libm::sqrt(p.delta) / (1.0 + u))
}

/// `¼(1 + √(1-4r))²`, the upper bound on `ε`.
pub fn eps_bound(p: WfeParams) -> f64 {
    let u = libm::sqrt((1.0 - 4.0 * p.r()).max(0.0));
    0.25 * (1.0 + u) * (1.0 + u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypotheses {
    pub omega_in_range: bool,
    pub eps_below_bound: bool,
    pub root_in_unit: bool,
    pub eps_bound: f64,
    pub lower_root: Option<f64>,
}

impl Hypotheses {
    pub fn ok(&self) -> bool {
        self.omega_in_range && self.eps_below_bound && self.root_in_unit
    }
}

pub fn check_hypotheses(p: WfeParams) -> Hypotheses {
    let root = lower_root(p);
    Hypotheses {
        omega_in_range: p.omega > 1.0 && p.omega < 4.0 / 3.0,
        eps_below_bound: p.eps < eps_bound(p),
        root_in_unit: root.is_some_and(|x| x < 1.0) && a_max_line(p) > 0.0,
        eps_bound: eps_bound(p),
        lower_root: root,
    }
}

/// Open interval `(1/(2A_min), 1/(2A_max))`, extremes taken on `[-1, 1]`.
pub fn theta_range(p: WfeParams) -> (f64, f64) {
    let (lo, hi) = a_extremes(p);
    let a = if lo < 0.0 { 0.5 / lo } else { f64::NEG_INFINITY };
    let b = if hi > 0.0 { 0.5 / hi } else { f64::INFINITY };
    (a, b)
}

/// `p(θ)` by adaptive Gauss–Kronrod. The endpoints of the admissible range
/// are allowed: the singularity of the integrand is logarithmic there.
pub fn p_theta(theta: f64, p: WfeParams) -> Result<f64> {
    let (lo, hi) = theta_range(p);
    if !(theta >= lo && theta <= hi) {
        return Err(Error::OutOfThetaRange { theta, lo, hi });
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    let xs = vertex(p);
    let breaks: &[f64] = if xs.abs() < 1.0 { &[xs] } else { &[] };
    let f = |x: f64| {
        let v = 1.0 - 2.0 * theta * a_of_x(x, p);
        if v > 0.0 {
            libm::log(v)
        } else {
            // only reached exactly at the singular point
            0.0
        }
    };
    let r = integrate(f, -1.0, 1.0, breaks, QuadTol { abs: 1e-13, rel: 1e-12, max_subdivisions: 4000 });
    Ok(-0.25 * r.value)
}

/// `p'(0) = ½∫A = -r/3 - δ`, the mean of `(1/N) Σ χ_n² b_n`.
pub fn mean(p: WfeParams) -> f64 {
    -p.r() / 3.0 - p.delta
}

/// `p*(y) = sup_θ {θy - p(θ)}` by golden section.
pub fn p_star(y: f64, p: WfeParams) -> f64 {
    let (lo, hi) = theta_range(p);
    let m = golden_section(|t| p_theta(t, p).map_or(f64::INFINITY, |v| v - t * y), lo, hi, 1e-8, 400);
    -m.value
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PStarResult {
    /// `inf_{y>0} p*(y)`.
    pub p_star_inf: f64,
    /// Where the infimum is attained; `0` when it is the limit `y → 0+`.
    pub y_at_inf: f64,
    pub theta_range: (f64, f64),
    /// `θ` at which `p*(y_at_inf)` is attained.
    pub theta_at_inf: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalBound {
    pub pstar: PStarResult,
    pub beta_c: f64,
    pub hypotheses: Hypotheses,
}

/// `inf_{y>0} p*(y)`: 64 log-spaced points on `[1e-4, 1e2]`, then golden
/// section inside the bracket. A negative mean makes `p*` increasing on
/// `y > 0`, and the infimum is `p*(0+) = -min_θ p(θ)`.
pub fn pbar_star(p: WfeParams) -> PStarResult {
    let range = theta_range(p);
    let grid: Vec<f64> = (0..64).map(|i| libm::pow(10.0, -4.0 + 6.0 * i as f64 / 63.0)).collect();
    let vals: Vec<f64> = grid.iter().map(|&y| p_star(y, p)).collect();
    let i = (0..grid.len()).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    if i == 0 {
        let m = golden_section(|t| p_theta(t, p).unwrap_or(f64::INFINITY), range.0, range.1, 1e-10, 400);
        return PStarResult { p_star_inf: -m.value, y_at_inf: 0.0, theta_range: range, theta_at_inf: m.x };
    }
    let (a, b) = (grid[i - 1], grid[(i + 1).min(grid.len() - 1)]);
    let m = golden_section(|y| p_star(y, p), a, b, 1e-10 * b, 300);
    let t = golden_section(|t| p_theta(t, p).map_or(f64::INFINITY, |v| v - t * m.x), range.0, range.1, 1e-8, 400);
    PStarResult { p_star_inf: m.value, y_at_inf: m.x, theta_range: range, theta_at_inf: t.x }
}

/// `β_c = p̄* / ((ω-1)ε)`.
pub fn beta_critical(p: WfeParams) -> Result<CriticalBound> {
    let h = check_hypotheses(p);
    if !h.omega_in_range {
        return Err(Error::HypothesisFails(format!("omega = {} not in (1, 4/3)", p.omega)));
    }
    if !h.eps_below_bound {
        return Err(Error::HypothesisFails(format!("eps = {} not below {}", p.eps, h.eps_bound)));
    }
    if !h.root_in_unit {
        return Err(Error::HypothesisFails(format!("lower root of A not in [0, 1): {:?}", h.lower_root)));
    }
    let pstar = pbar_star(p);
    if !(pstar.p_star_inf > 0.0 && pstar.p_star_inf.is_finite()) {
        return Err(Error::Numerical(format!("p_bar_star = {}", pstar.p_star_inf)));
    }
    Ok(CriticalBound { pstar, beta_c: pstar.p_star_inf / ((p.omega - 1.0) * p.eps), hypotheses: h })
}

/// Weights `b_n = A(1 - 2n/N)`, `n = 0..=N`.
pub fn chi_square_weights(n: usize, p: WfeParams) -> Vec<f64> {
    (0..=n).map(|k| a_of_x(1.0 - 2.0 * k as f64 / n as f64, p)).collect()
}

/// `p_N(θ) = -(1/2N) Σ log(1 - 2θ b_n)`, the finite-`N` cumulant function.
pub fn p_finite(theta: f64, b: &[f64]) -> f64 {
    let n = (b.len() - 1) as f64;
    let mut s = CompSum::new();
    for &bn in b {
        let v = 1.0 - 2.0 * theta * bn;
        if v <= 0.0 {
            return f64::INFINITY;
        }
        s.add(libm::log(v));
    }
    -0.5 * s.value() / n
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RareEventConfig {
    pub n: usize,
    pub replicas: u64,
    pub shards: usize,
    pub seed: u64,
}

impl RareEventConfig {
    pub fn new(n: usize, replicas: u64, seed: u64) -> Self {
        Self { n, replicas, shards: 64, seed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RareEventEstimate {
    /// `log P[Σ χ_n² b_n ≥ 0]`.
    pub log_p: f64,
    /// `-log_p / N`.
    pub rate: f64,
    /// Standard error of `log_p` (delta method).
    pub log_p_se: f64,
    pub theta: f64,
    pub hits: u64,
    pub replicas: u64,
}

#[derive(Default)]
struct ShardAcc {
    w: CompSum,
    w2: CompSum,
    hits: u64,
}

/// Estimates `P[Σ χ_n² b_n ≥ 0]` by exponential tilting. Under the tilt
/// `θ = argmin p_N` each `χ_n` is Gaussian with variance `1/(1-2θb_n)`, the
/// event is typical, and the likelihood ratio is `exp(N p_N(θ) - θS)`.
pub fn rare_event<E: ShardExecutor>(p: WfeParams, cfg: &RareEventConfig, exec: &E) -> Result<RareEventEstimate> {
    if cfg.n < 2 || cfg.replicas < 2 || cfg.shards == 0 {
        return Err(crate::error::invalid("need n >= 2, replicas >= 2, shards >= 1"));
    }
    let b = chi_square_weights(cfg.n, p);
    let bmin = b.iter().cloned().fold(f64::INFINITY, f64::min);
    let bmax = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if bmax <= 0.0 {
        return Err(Error::HypothesisFails(format!("all weights negative (max {bmax})")));
    }
    let (lo, hi) = (0.5 / bmin, 0.5 / bmax);
    let m = golden_section(|t| p_finite(t, &b), lo * (1.0 - 1e-12), hi * (1.0 - 1e-12), 1e-12, 400);
    let theta = m.x;
    let sd: Vec<f64> = b.iter().map(|&bn| libm::sqrt(1.0 / (1.0 - 2.0 * theta * bn))).collect();
    let parts = exec.map_shards(cfg.shards, |s| {
        let mut rng = shard_rng(cfg.seed, s);
        let mut acc = ShardAcc::default();
        for _ in 0..shard_len(cfg.replicas, cfg.shards, s) {
            let mut sum = 0.0;
            for (bn, sn) in b.iter().zip(&sd) {
                let z: f64 = rng.sample(StandardNormal);
                let chi = z * sn;
                sum += bn * chi * chi;
            }
            if sum >= 0.0 {
                let w = libm::exp(-theta * sum);
                acc.w.add(w);
                acc.w2.add(w * w);
                acc.hits += 1;
            }
        }
        acc
    });
    let mut w = CompSum::new();
    let mut w2 = CompSum::new();
    let mut hits = 0;
    for a in &parts {
        w.add(a.w.value());
        w2.add(a.w2.value());
        hits += a.hits;
    }
    if hits == 0 {
        return Err(Error::DegenerateWeights { ess: 0.0 });
    }
    let r = cfg.replicas as f64;
    let mean = w.value() / r;
    let var = (w2.value() / r - mean * mean).max(0.0) * r / (r - 1.0);
    let n = cfg.n as f64;
    let log_p = n * m.value + libm::log(mean);
    Ok(RareEventEstimate {
        log_p,
        rate: -log_p / n,
        log_p_se: libm::sqrt(var / r) / mean,
        theta,
        hits,
        replicas: cfg.replicas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    fn p12() -> WfeParams {
        WfeParams::new(1.2, 0.1).unwrap()
    }

    #[test]
    fn closed_forms() {
        let p = p12();
        assert!((p.r() - 1.0 / 6.0).abs() < 1e-15);
        assert!((a_of_x(0.0, p) + 0.1).abs() < 1e-15);
        assert!((a_max_line(p) - 0.05).abs() < 1e-15);
        assert!((a_of_x(vertex(p), p) - a_max_line(p)).abs() < 1e-15);
        let x = lower_root(p).unwrap();
        assert!(a_of_x(x, p).abs() < 1e-12);
        let naive = libm::sqrt(0.1) * (1.0 - libm::sqrt(1.0 - 4.0 / 6.0)) / (2.0 / 6.0);
        assert!((x - naive).abs() < 1e-14);
    }

    #[test]
    fn hypothesis_checks() {
        assert!(check_hypotheses(p12()).ok());
        assert!(!check_hypotheses(WfeParams::new(1.35, 0.1).unwrap()).ok());
        assert!(matches!(beta_critical(WfeParams::new(1.35, 0.1).unwrap()), Err(Error::HypothesisFails(_))));
        for w in [1.01, 1.1, 1.2, 1.3, 1.33] {
            assert!(check_hypotheses(WfeParams::new(w, 0.24).unwrap()).ok(), "omega {w}");
        }
    }

    #[test]
    fn p_theta_basic() {
        let p = p12();
        assert_eq!(p_theta(0.0, p).unwrap(), 0.0);
        let (lo, hi) = theta_range(p);
        assert!(p_theta(hi * 1.001, p).is_err());
        let a = p_theta(hi * 0.999, p).unwrap();
        let b = p_theta(hi * 0.9999, p).unwrap();
        assert!((a - b).abs() < 0.5);
        assert!(p_theta(hi, p).unwrap().is_finite());
        assert!(p_theta(lo, p).unwrap().is_finite());
        // p'(0) against the closed-form mean
        let h = 1e-5;
        let d = (p_theta(h, p).unwrap() - p_theta(-h, p).unwrap()) / (2.0 * h);
        assert!((d - mean(p)).abs() < 1e-8);
    }

    #[test]
    fn tilted_estimator_small_n() {
        // N = 20 is small enough for a direct count at this rate
        let p = p12();
        let cfg = RareEventConfig { n: 20, replicas: 200_000, shards: 8, seed: 3 };
        let est = rare_event(p, &cfg, &Sequential).unwrap();
        let b = chi_square_weights(20, p);
        let mut rng = shard_rng(99, 0);
        let mut count = 0u32;
        let total = 2_000_000;
        for _ in 0..total {
            let s: f64 = b.iter().map(|bn| {
                let z: f64 = rng.sample(StandardNormal);
                bn * z * z
            }).sum();
            count += u32::from(s >= 0.0);
        }
        let direct = libm::log(count as f64 / total as f64);
        let se = 1.0 / libm::sqrt(count as f64);
        assert!((est.log_p - direct).abs() < 4.0 * (se + est.log_p_se), "{} vs {direct}", est.log_p);
    }
}
