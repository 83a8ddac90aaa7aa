//! Rate functions `I₁`, `I₂` of the conditional rare-event problem.
//!
//! `I₂(x) = inf{k(θ) : θ ∈ G ∩ D}` is estimated by sampling `D` along rays
//! through `P` with endpoint-biased coordinates, keeping the smallest `k`
//! among points of the constraint set `G`, then polishing that point with
//! Nelder–Mead inside `G ∩ D`. `I₁(x)` is the one-dimensional problem on the
//! axis `θ₂ = 0` and is computed deterministically.

use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::exec::{shard_len, shard_rng, ShardExecutor};
use crate::ge::{self, CgfPoint, RateParams, ThetaPair};
use crate::interp::Pchip;
use crate::optim::{golden_section, nelder_mead_2d};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasDirection {
    TowardA,
    TowardB,
}

/// Interval `[a, b]` with density `∝ exp(±η·s)` pushing mass to one end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasedInterval {
    pub a: f64,
    pub b: f64,
    pub eta: f64,
    pub direction: BiasDirection,
}

impl BiasedInterval {
    pub fn new(a: f64, b: f64, eta: f64, direction: BiasDirection) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(invalid("biased interval needs a < b"));
        }
        if !(eta >= 0.0) || !eta.is_finite() {
            return Err(invalid("eta must be a finite non-negative number"));
        }
        Ok(BiasedInterval { a, b, eta, direction })
    }

    /// Inverse-transform sample for `u ∈ [0, 1]`; `η = 0` is uniform.
    ///
    /// Toward `b` this is `a + ln(zηu + 1)/η` with `z = (e^{η(b−a)} − 1)/η`,
    /// evaluated as `b + ln(u + (1 − u)e^{−η(b−a)})/η` so large `η(b − a)`
    /// does not overflow.
    pub fn sample(&self, u: f64) -> f64 {
        let len = self.b - self.a;
        if self.eta == 0.0 {
            return self.a + u * len;
        }
        let spread = -libm::expm1(-self.eta * len);
        let s = match self.direction {
            BiasDirection::TowardB => self.b + libm::log1p(-(1.0 - u) * spread) / self.eta,
            BiasDirection::TowardA => self.a - libm::log1p(-u * spread) / self.eta,
        };
        s.clamp(self.a, self.b)
    }

    /// Distribution function of [`sample`](Self::sample).
    pub fn cdf(&self, s: f64) -> f64 {
        let len = self.b - self.a;
        let s = s.clamp(self.a, self.b);
        if self.eta == 0.0 {
            return (s - self.a) / len;
        }
        match self.direction {
            BiasDirection::TowardB => libm::expm1(self.eta * (s - self.a)) / libm::expm1(self.eta * len),
            BiasDirection::TowardA => {
                -libm::expm1(-self.eta * (s - self.a)) / -libm::expm1(-self.eta * len)
            }
        }
    }
}

pub fn biased_sample(interval: &BiasedInterval, u: f64) -> f64 {
    interval.sample(u)
}

/// Where the sampling rays start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RayOrigin {
    /// Rays `θ₂ = α(θ₁ + 1/(2x))` through `P`; `α` is restricted to the
    /// wedge cut out by the two endpoint lines.
    #[default]
    PointP,
    /// Polar rays from `θ = 0`.
    Origin,
}

/// Bias applied to one batch of draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerBias {
    pub eta: f64,
    pub alpha: BiasDirection,
    pub theta1: BiasDirection,
}

impl SamplerBias {
    pub const UNIFORM: SamplerBias =
        SamplerBias { eta: 0.0, alpha: BiasDirection::TowardB, theta1: BiasDirection::TowardA };
}

/// Slope range `[−x/(1+ε), x/(1−ε)]` of rays through `P` that stay in the
/// wedge between the endpoint lines.
pub fn alpha_range(params: RateParams) -> (f64, f64) {
    (-params.x() / (1.0 + params.eps()), params.x() / (1.0 - params.eps()))
}

/// `θ₁` range `[−1/(2x), 5/(1−x)]` of the ray parametrization.
pub fn theta1_range(params: RateParams) -> (f64, f64) {
    (params.p_point(), 5.0 / (1.0 - params.x()))
}

/// One draw; `None` when the point fails the domain tests.
pub fn sample_domain_point<R: Rng + ?Sized>(
    rng: &mut R,
    params: RateParams,
    bias: SamplerBias,
    origin: RayOrigin,
) -> Option<ThetaPair> {
    let theta = raw_point(rng, params, bias, origin);
    ge::in_domain(theta, params).in_domain.then_some(theta)
}

/// One sampled point of a domain scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSample {
    pub theta: ThetaPair,
    pub in_d: bool,
    pub in_g: bool,
    /// `k(θ)` for points strictly inside `D`.
    pub k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub samples: u64,
    pub eta_schedule: Vec<f64>,
    pub shards: usize,
    pub seed: u64,
    pub origin: RayOrigin,
}

impl ScanConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        ScanConfig { samples, eta_schedule: default_eta_schedule(), shards: 64, seed, origin: RayOrigin::PointP }
    }
}

pub fn default_eta_schedule() -> Vec<f64> {
    alloc::vec![0.0, 2.0, 8.0, 32.0]
}

fn bias_batches(schedule: &[f64]) -> Vec<SamplerBias> {
    use BiasDirection::*;
    let mut out = Vec::new();
    for &eta in schedule {
        if eta == 0.0 {
            out.push(SamplerBias::UNIFORM);
        } else {
            for (alpha, theta1) in [(TowardB, TowardA), (TowardB, TowardB), (TowardA, TowardA), (TowardA, TowardB)] {
                out.push(SamplerBias { eta, alpha, theta1 });
            }
        }
    }
    out
}

// Samples are split equally over η values, then over the bias directions
// of each η, then over shards.
fn batch_plan(cfg: &ScanConfig) -> Vec<(SamplerBias, u64)> {
    let n_eta = cfg.eta_schedule.len();
    let mut plan = Vec::new();
    for (i, &eta) in cfg.eta_schedule.iter().enumerate() {
        let per_eta = shard_len(cfg.samples, n_eta, i);
        let batches = bias_batches(&[eta]);
        for (j, b) in batches.iter().enumerate() {
            plan.push((*b, shard_len(per_eta, batches.len(), j)));
        }
    }
    plan
}

fn validate_scan(cfg: &ScanConfig) -> Result<()> {
    if cfg.shards == 0 {
        return Err(invalid("shard count must be positive"));
    }
    if cfg.samples == 0 {
        return Err(invalid("sample count must be positive"));
    }
    if cfg.eta_schedule.is_empty() || cfg.eta_schedule.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
        return Err(invalid("eta schedule must be non-empty and non-negative"));
    }
    Ok(())
}

fn classify(theta: ThetaPair, params: RateParams) -> (bool, Option<CgfPoint>) {
    if !ge::in_domain(theta, params).in_domain {
        return (false, None);
    }
    (true, ge::evaluate(theta, params).ok())
}

fn run_shard<F: FnMut(ThetaPair, bool, Option<CgfPoint>)>(
    params: RateParams,
    cfg: &ScanConfig,
    plan: &[(SamplerBias, u64)],
    shard: usize,
    mut visit: F,
) {
    let mut rng = shard_rng(cfg.seed, shard);
    for &(bias, count) in plan {
        for _ in 0..shard_len(count, cfg.shards, shard) {
            // draw the raw ray point so rejected draws are reported too
            let theta = raw_point(&mut rng, params, bias, cfg.origin);
            let (in_d, eval) = classify(theta, params);
            visit(theta, in_d, eval);
        }
    }
}

fn raw_point<R: Rng + ?Sized>(rng: &mut R, params: RateParams, bias: SamplerBias, origin: RayOrigin) -> ThetaPair {
    match origin {
        RayOrigin::PointP => {
            let (a0, a1) = alpha_range(params);
            let (t0, t1) = theta1_range(params);
            let alpha = BiasedInterval { a: a0, b: a1, eta: bias.eta, direction: bias.alpha }.sample(rng.random());
            let theta1 = BiasedInterval { a: t0, b: t1, eta: bias.eta, direction: bias.theta1 }.sample(rng.random());
            ThetaPair::new(theta1, alpha * (theta1 - params.p_point()))
        }
        RayOrigin::Origin => {
            let (t0, t1) = theta1_range(params);
            let phi = core::f64::consts::TAU * rng.random::<f64>();
            let rho = BiasedInterval { a: 0.0, b: t1 - t0, eta: bias.eta, direction: bias.theta1 }.sample(rng.random());
            ThetaPair::new(rho * libm::cos(phi), rho * libm::sin(phi))
        }
    }
}

/// Every draw of a scan, in shard order.
pub fn domain_scan<E: ShardExecutor>(params: RateParams, cfg: &ScanConfig, exec: &E) -> Result<Vec<ConstraintSample>> {
    validate_scan(cfg)?;
    let plan = batch_plan(cfg);
    let parts = exec.map_shards(cfg.shards, |s| {
        let mut out = Vec::new();
        run_shard(params, cfg, &plan, s, |theta, in_d, eval| {
            out.push(ConstraintSample {
                theta,
                in_d,
                in_g: eval.is_some_and(|e| e.in_g()),
                k: eval.map(|e| e.k),
            });
        });
        out
    });
    Ok(parts.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ShardMin {
    accepted_d: u64,
    accepted_g: u64,
    best: Option<(f64, ThetaPair)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct I2Config {
    pub scan: ScanConfig,
    /// Run the Nelder–Mead polish from the best sample.
    pub polish: bool,
}

impl I2Config {
    pub fn new(samples: u64, seed: u64) -> Self {
        I2Config { scan: ScanConfig::new(samples, seed), polish: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct I2Estimate {
    pub value: f64,
    pub theta: ThetaPair,
    /// Smallest sampled `k` before polishing.
    pub raw_min: f64,
    /// Sampling resolution: spread of the per-shard minima, at least the
    /// polish gain and never below 10⁻⁹.
    pub noise_band: f64,
    pub accepted_d: u64,
    pub accepted_g: u64,
    pub samples: u64,
}

fn g_objective(params: RateParams) -> impl Fn([f64; 2]) -> f64 {
    move |p| {
        let th = ThetaPair::new(p[0], p[1]);
        if !ge::in_domain(th, params).in_domain {
            return f64::INFINITY;
        }
        match ge::evaluate(th, params) {
            Ok(e) if e.in_g() => e.k,
            _ => f64::INFINITY,
        }
    }
}

/// Local minimization of `k` over `G ∩ D` from a feasible start.
///
/// Nelder–Mead on `k − μ[ln(−∂c/∂θ₁) + ln(∂c/∂θ₂)]` for a decreasing
/// sequence of `μ`, each stage started from the previous minimizer. Every
/// iterate stays strictly inside `G ∩ D`, so the result is an upper bound
/// for the infimum.
pub fn polish_i2(params: RateParams, start: ThetaPair) -> (f64, ThetaPair) {
    let barrier = |mu: f64| {
        move |p: [f64; 2]| {
            let th = ThetaPair::new(p[0], p[1]);
            if !ge::in_domain(th, params).in_domain {
                return f64::INFINITY;
            }
            match ge::evaluate(th, params) {
                Ok(e) if e.grad[0] < 0.0 && e.grad[1] > 0.0 => {
                    e.k - mu * (libm::log(-e.grad[0]) + libm::log(e.grad[1]))
                }
                _ => f64::INFINITY,
            }
        }
    };
    let plain = g_objective(params);
    let mut x = [start.theta1, start.theta2];
    let mut best = (plain(x), x);
    if !best.0.is_finite() {
        return (best.0, start);
    }
    let scale = [x[0].abs().max(0.05), x[1].abs().max(0.05)];
    for round in 0..3 {
    let mut mu = if round == 0 { 1e-3 } else { 1e-6 };
    while mu > 1e-13 {
        let f = barrier(mu);
        if f(x).is_finite() {
            let rel = (1e3 * mu).min(1e-2);
            let m = nelder_mead_2d(&f, x, [rel * scale[0], rel * scale[1]], 1e-15, 0.0, 3000);
            x = m.x;
            let k = plain(x);
            if k < best.0 {
                best = (k, x);
            }
        }
        mu *= 0.1;
    }
    }
    for from in [ThetaPair::new(best.1[0], best.1[1]), ThetaPair::default()] {
        if let Some((k, th)) = corner_point(params, from) {
            if k < best.0 {
                best = (k, [th.theta1, th.theta2]);
            }
        }
    }
    (best.0, ThetaPair::new(best.1[0], best.1[1]))
}

/// Corner of `G` where both constraints are active, `∇c = 0`: the minimizer
/// of `c` over `D`, found by damped Newton with a finite-difference
/// Hessian of the analytic gradient. The Hessian step is scaled with the
/// distance to `∂D` because the minimizer can sit very close to `P`.
pub fn corner_point(params: RateParams, start: ThetaPair) -> Option<(f64, ThetaPair)> {
    let eval = |t: ThetaPair| {
        if !ge::in_domain(t, params).in_domain {
            return None;
        }
        ge::evaluate(t, params).ok()
    };
    let mut th = start;
    let mut e = eval(th)?;
    for _ in 0..300 {
        let g = e.grad;
        if libm::hypot(g[0], g[1]) < 1e-12 {
            break;
        }
        let min_q = ge::KernelQ::new(th, params).min_on_interval();
        let mut h = 1e-5 * min_q.min(1.0);
        let probes = loop {
            let p = (
                eval(ThetaPair::new(th.theta1 + h, th.theta2)),
                eval(ThetaPair::new(th.theta1 - h, th.theta2)),
                eval(ThetaPair::new(th.theta1, th.theta2 + h)),
                eval(ThetaPair::new(th.theta1, th.theta2 - h)),
            );
            match p {
                (Some(a), Some(b), Some(c), Some(d)) => break Some([a.grad, b.grad, c.grad, d.grad]),
                _ if h > 1e-18 => h *= 0.1,
                _ => break None,
            }
        };
        let Some([gp1, gm1, gp2, gm2]) = probes else { break };
        let h11 = (gp1[0] - gm1[0]) / (2.0 * h);
        let h22 = (gp2[1] - gm2[1]) / (2.0 * h);
        let h12 = 0.25 * ((gp1[1] - gm1[1]) + (gp2[0] - gm2[0])) / h;
        let det = h11 * h22 - h12 * h12;
        let d = if det > 0.0 && h11 > 0.0 {
            [(h22 * g[0] - h12 * g[1]) / det, (h11 * g[1] - h12 * g[0]) / det]
        } else {
            [g[0], g[1]]
        };
        let mut step = 1.0;
        let mut moved = false;
        for _ in 0..80 {
            let trial = ThetaPair::new(th.theta1 - step * d[0], th.theta2 - step * d[1]);
            if let Some(et) = eval(trial) {
                if et.c < e.c || (et.c <= e.c && libm::hypot(et.grad[0], et.grad[1]) < libm::hypot(g[0], g[1])) {
                    th = trial;
                    e = et;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    if let Some((c, t)) = boundary_layer_min(params, th, e.c) {
        th = t;
        e = eval(th)?;
        e.c = c;
    }
    // Near P the gradient stalls around 1e-5 from cancellation, while c is
    // flat to 1e-12 there. Inside the cone the value at the minimizer of c
    // is -c by duality.
    if libm::hypot(e.grad[0], e.grad[1]) > 1e-3 || th.theta1 > 0.0 || th.theta2 < 0.0 {
        return None;
    }
    Some((-e.c, th))
}

/// Minimizes `c` in the coordinates `(ln q(±1), θ₂)` when the Newton
/// iterate sits in the boundary layer next to an endpoint root, where steps
/// in `θ` are below the resolution of `θ₁`.
fn boundary_layer_min(params: RateParams, th: ThetaPair, c0: f64) -> Option<(f64, ThetaPair)> {
    let (q_minus, q_plus) = ge::KernelQ::new(th, params).endpoints();
    if q_minus.min(q_plus) > 1e-4 {
        return None;
    }
    let (x, eps) = (params.x(), params.eps());
    let upper = q_plus <= q_minus;
    // q(1) = 1 + 2xθ₁ - 2θ₂(1-ε), q(-1) = 1 + 2xθ₁ + 2θ₂(1+ε)
    let to_theta = move |p: [f64; 2]| {
        let s = libm::exp(p[0]);
        let shift = if upper { -2.0 * p[1] * (1.0 - eps) } else { 2.0 * p[1] * (1.0 + eps) };
        ThetaPair::new((s - 1.0 - shift) / (2.0 * x), p[1])
    };
    let f = move |p: [f64; 2]| {
        let t = to_theta(p);
        if !ge::in_domain(t, params).in_domain {
            return f64::INFINITY;
        }
        ge::evaluate(t, params).map_or(f64::INFINITY, |e| e.c)
    };
    let start = [libm::log(if upper { q_plus } else { q_minus }), th.theta2];
    let scale = [1.0, th.theta2.abs().max(1e-6)];
    let mut p = start;
    let mut best = f(p);
    for _ in 0..4 {
        let m = nelder_mead_2d(&f, p, [0.5 * scale[0], 0.5 * scale[1]], 1e-14, 0.0, 4000);
        if m.value < best {
            best = m.value;
            p = m.x;
        } else {
            break;
        }
    }
    (best < c0).then(|| (best, to_theta(p)))
}

/// Sampling estimate of `I₂(x)`; `NoConstraintPoints` if no draw lands in `G`.
pub fn compute_i2<E: ShardExecutor>(params: RateParams, cfg: &I2Config, exec: &E) -> Result<I2Estimate> {
    validate_scan(&cfg.scan)?;
    let plan = batch_plan(&cfg.scan);
    let parts = exec.map_shards(cfg.scan.shards, |s| {
        let mut m = ShardMin { accepted_d: 0, accepted_g: 0, best: None };
        run_shard(params, &cfg.scan, &plan, s, |theta, in_d, eval| {
            m.accepted_d += u64::from(in_d);
            if let Some(e) = eval.filter(|e| e.in_g()) {
                m.accepted_g += 1;
                if m.best.is_none_or(|(k, _)| e.k < k) {
                    m.best = Some((e.k, theta));
                }
            }
        });
        m
    });
    let accepted_d = parts.iter().map(|p| p.accepted_d).sum();
    let accepted_g = parts.iter().map(|p| p.accepted_g).sum();
    let minima: Vec<(f64, ThetaPair)> = parts.iter().filter_map(|p| p.best).collect();
    let Some(&(raw_min, raw_theta)) = minima.iter().min_by(|a, b| a.0.total_cmp(&b.0)) else {
        return Err(Error::NoConstraintPoints);
    };
    let (value, theta) = if cfg.polish { polish_i2(params, raw_theta) } else { (raw_min, raw_theta) };
    let spread = if minima.len() >= 2 {
        let n = minima.len() as f64;
        let mean = minima.iter().map(|m| m.0).sum::<f64>() / n;
        libm::sqrt(minima.iter().map(|m| (m.0 - mean) * (m.0 - mean)).sum::<f64>() / (n - 1.0))
    } else {
        0.0
    };
    Ok(I2Estimate {
        value,
        theta,
        raw_min,
        noise_band: spread.max(raw_min - value).max(1e-9),
        accepted_d,
        accepted_g,
        samples: cfg.scan.samples,
    })
}

/// `I₁(x) = inf{k(θ₁, 0) : θ₁ ∈ (P, Q]}`, zero for `x ≥ 2/3`.
///
/// The segment `(P, Q]` is where `H ≥ 0`. It is searched in the variable
/// `ln t` (see [`ge::solve_q`]) because for small `x` the root `Q` is closer
/// to `P` than the spacing of doubles near `P`.
pub fn compute_i1(params: RateParams) -> f64 {
    i1_at(params.x())
}

/// [`compute_i1`] for a bare `x ∈ (0, 1]`.
pub fn i1_at(x: f64) -> f64 {
    if x >= 2.0 / 3.0 {
        return 0.0;
    }
    let q = match ge::solve_q(x) {
        Ok(q) => q,
        Err(_) => return f64::NAN,
    };
    // golden-section search over [P + guard, Q] in ln t
    let lo = q.ln_t - 30.0;
    let m = golden_section(|u| ge::k_axis_of_ln_t(u, x), lo, q.ln_t, 1e-12, 500);
    m.value.min(ge::k_axis_of_ln_t(q.ln_t, x))
}

/// Rate-function values at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateCurvePoint {
    pub x: f64,
    pub i1: f64,
    /// `None` marks `NoConstraintPoints`.
    pub i2: Option<I2Estimate>,
}

/// `I₁` and `I₂` on a grid of `x`; every grid point reuses the same seed.
pub fn rate_curve<E: ShardExecutor>(xs: &[f64], eps: f64, cfg: &I2Config, exec: &E) -> Result<Vec<RateCurvePoint>> {
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let p = RateParams::new(x, eps)?;
        let i2 = match compute_i2(p, cfg, exec) {
            Ok(e) => Some(e),
            Err(Error::NoConstraintPoints) => None,
            Err(e) => return Err(e),
        };
        out.push(RateCurvePoint { x, i1: compute_i1(p), i2 });
    }
    Ok(out)
}

/// Which term dominates the numerator and the denominator of the ratio
/// `P(|m| ≥ ε, E ≤ x) / P(E ≤ x)` as `N → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// Numerator led by `e^{−Nβ}|B|`, denominator by `e^{−(2/3)Nβ}`.
    FirstFirst,
    /// Numerator led by `e^{−Nβ}|B|`, denominator by the `I₁` integral.
    FirstSecond,
    /// Numerator led by the `I₂` integral, denominator by `e^{−(2/3)Nβ}`.
    SecondFirst,
    /// Both led by their rate-function integrals.
    SecondSecond,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GFunctions {
    /// `min over (0, 2/3] of βx + I₁(x)` and its minimizer.
    pub g1_hat: f64,
    pub x1_hat: f64,
    /// `min over (0, 1] of βx + I₂(x)` and its minimizer.
    pub g2_hat: f64,
    pub x2_hat: f64,
    /// `β + I′(x̂)` at the interior minimizers (zero up to interpolation).
    pub stationarity: [f64; 2],
    pub case: CaseTag,
    /// Exponential decay rate of the ratio, `min(β, ĝ₂) − min(2β/3, ĝ₁)`.
    pub ratio_rate: f64,
}

fn minimize_on_curve(beta: f64, curve: &Pchip, lo: f64, hi: f64) -> (f64, f64) {
    let n = 2000;
    let g = |x: f64| beta * x + curve.eval(x);
    let mut best = (g(lo), lo);
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = g(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    let h = (hi - lo) / n as f64;
    let m = golden_section(g, (best.1 - h).max(lo), (best.1 + h).min(hi), 1e-12, 200);
    if m.value < best.0 {
        (m.value, m.x)
    } else {
        best
    }
}

/// Four-case asymptotic classification of the conditional magnetization
/// probability at inverse temperature `β`.
pub fn classify_theorem_two(beta: f64, curve: &[RateCurvePoint]) -> Result<GFunctions> {
    if !(beta > 0.0) {
        return Err(invalid("beta must be positive"));
    }
    if curve.len() < 8 {
        return Err(Error::InsufficientCurve(String::from("need at least 8 grid points")));
    }
    let mut pts: Vec<RateCurvePoint> = curve.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    let (x1, y1): (Vec<f64>, Vec<f64>) =
        pts.iter().filter(|p| p.x <= 2.0 / 3.0 && p.i1.is_finite()).map(|p| (p.x, p.i1)).unzip();
    let (x2, y2): (Vec<f64>, Vec<f64>) = pts.iter().filter_map(|p| p.i2.map(|e| (p.x, e.value))).unzip();
    if x1.len() < 3 || x2.len() < 3 {
        return Err(Error::InsufficientCurve(String::from("too few finite I1 or I2 values")));
    }
    let c1 = Pchip::new(&x1, &y1)?;
    let c2 = Pchip::new(&x2, &y2)?;
    let (d1lo, d1hi) = c1.domain();
    let (d2lo, d2hi) = c2.domain();
    let (g1_hat, x1_hat) = minimize_on_curve(beta, &c1, d1lo, d1hi);
    let (g2_hat, x2_hat) = minimize_on_curve(beta, &c2, d2lo, d2hi);
    let fd = 1e-4;
    let stationarity = [beta + c1.derivative(x1_hat, fd), beta + c2.derivative(x2_hat, fd)];
    let num_second = g2_hat < beta;
    let den_second = g1_hat < 2.0 / 3.0 * beta;
    let case = match (num_second, den_second) {
        (false, false) => CaseTag::FirstFirst,
        (false, true) => CaseTag::FirstSecond,
        (true, false) => CaseTag::SecondFirst,
        (true, true) => CaseTag::SecondSecond,
    };
    let ratio_rate = beta.min(g2_hat) - (2.0 / 3.0 * beta).min(g1_hat);
    Ok(GFunctions { g1_hat, x1_hat, g2_hat, x2_hat, stationarity, case, ratio_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;

    #[test]
    fn biased_interval_endpoints_and_monotonicity() {
        for dir in [BiasDirection::TowardA, BiasDirection::TowardB] {
            for eta in [0.0, 0.5, 8.0, 32.0, 800.0] {
                let iv = BiasedInterval::new(-2.0, 15.0, eta, dir).unwrap();
                assert!((iv.sample(0.0) + 2.0).abs() < 1e-12);
                assert!((iv.sample(1.0) - 15.0).abs() < 1e-12);
                let mut prev = f64::NEG_INFINITY;
                for i in 0..=1000 {
                    let s = iv.sample(i as f64 / 1000.0);
                    assert!(s >= prev);
                    prev = s;
                }
            }
        }
    }

    #[test]
    fn cdf_inverts_sample() {
        let iv = BiasedInterval::new(0.3, 2.0, 3.0, BiasDirection::TowardA).unwrap();
        for u in [0.01, 0.3, 0.77] {
            assert!((iv.cdf(iv.sample(u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_points_are_in_d() {
        let p = RateParams::new(0.7, 0.3).unwrap();
        let mut rng = shard_rng(3, 0);
        let mut hits = 0;
        for _ in 0..2000 {
            if let Some(th) = sample_domain_point(&mut rng, p, SamplerBias::UNIFORM, RayOrigin::PointP) {
                assert!(ge::in_domain(th, p).in_domain);
                hits += 1;
            }
        }
        assert!(hits > 0 && hits < 2000);
    }

    #[test]
    fn i1_is_zero_past_two_thirds() {
        assert_eq!(i1_at(0.7), 0.0);
        assert_eq!(i1_at(2.0 / 3.0), 0.0);
    }

    #[test]
    fn i1_limit_near_zero() {
        // at P, c(P, 0) = 2 − 2 ln 2 + ln x
        for x in [1e-3, 0.01, 0.02] {
            let target = 2.0 * core::f64::consts::LN_2 - 2.0 - libm::log(x);
            assert!((i1_at(x) - target).abs() < 1e-9);
        }
    }

    #[test]
    fn classifier_needs_points() {
        let pts = [RateCurvePoint { x: 0.5, i1: 0.1, i2: None }; 3];
        assert!(matches!(classify_theorem_two(1.0, &pts), Err(Error::InsufficientCurve(_))));
    }

    #[test]
    fn scan_is_deterministic() {
        let p = RateParams::new(0.5, 0.3).unwrap();
        let mut cfg = ScanConfig::new(500, 11);
        cfg.shards = 7;
        let a = domain_scan(p, &cfg, &Sequential).unwrap();
        let b = domain_scan(p, &cfg, &Sequential).unwrap();
        assert_eq!(a.len(), 500);
        assert_eq!(a, b);
    }
}
