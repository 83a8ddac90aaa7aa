//! Thermal averages over the uniform spherical ensembles, and the two
//! closed-form checks: infinite-temperature moments and the exactly
//! solvable Gaussian surrogate.
//!
//! Every state is summarized per component by three numbers: the mean spin
//! `a`, its square `a²`, and an extra term (`ln C(N, n)` for the entropy
//! model, the number of unequal neighbours for the nearest-neighbour
//! chain). The model exponent `f` depends on the state only through the
//! weighted sums `m = Σ w a`, `Q = Σ w a²`, `e = Σ w extra`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::ensemble::{discordant_pairs, fill_sphere, g, ln_binomial, FULL_N_LIMIT};
use crate::error::{Error, Result};
use crate::exec::{shard_len, shard_rng, ShardExecutor};

/// Smallest accepted effective sample size of the direct-sampling weights.
pub const MIN_ESS: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Curie-Weiss: `f = βN(1 - m² - D)`.
    Scwm,
    /// With wavefunction energy: `f = βN(1 - m² + (ω-1)D)`.
    ScwmWfe { omega: f64 },
    /// Curie-Weiss with the sector entropy `Σ|φ_n|² ln C(N, n)` added to the log-weight.
    ScwmEntropy,
    /// Nearest-neighbour chain on the full `2·2^N` sphere, positive energy convention.
    SquimD1,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Scwm => "SCWM",
            Model::ScwmWfe { .. } => "SCWM_WFE",
            Model::ScwmEntropy => "SCWM_ENTROPY",
            Model::SquimD1 => "SQUIM_d1",
        }
    }

    pub fn omega(&self) -> Option<f64> {
        match self {
            Model::ScwmWfe { omega } => Some(*omega),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observable {
    Msq,
    MAbs,
    MagnetizedFraction,
    Dispersion,
    Magnetization,
}

impl Observable {
    pub const ALL: [Observable; 5] =
        [Observable::Msq, Observable::MAbs, Observable::MagnetizedFraction, Observable::Dispersion, Observable::Magnetization];

    pub fn name(&self) -> &'static str {
        match self {
            Observable::Msq => "msq",
            Observable::MAbs => "m_abs",
            Observable::MagnetizedFraction => "magnetized_fraction",
            Observable::Dispersion => "dispersion",
            Observable::Magnetization => "magnetization",
        }
    }

    fn value(&self, m: f64, q: f64, eps: f64) -> f64 {
        match self {
            Observable::Msq => m * m,
            Observable::MAbs => m.abs(),
            Observable::MagnetizedFraction => f64::from(u8::from(m * m >= eps)),
            Observable::Dispersion => (q - m * m).max(0.0),
            Observable::Magnetization => m,
        }
    }

    /// Average over the state and its spin flip `m → -m`.
    fn symmetrized(&self, m: f64, q: f64, eps: f64) -> f64 {
        0.5 * (self.value(m, q, eps) + self.value(-m, q, eps))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetropolisConfig {
    pub burn_in_sweeps: u64,
    /// Sweeps between recorded states; a sweep is `dim` proposals.
    pub thin_sweeps: u64,
}

impl Default for MetropolisConfig {
    fn default() -> Self {
        Self { burn_in_sweeps: 2000, thin_sweeps: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// Independent uniform draws reweighted by `e^{-f}`.
    Direct,
    /// Metropolis chains on the sphere, one per shard.
    Metropolis(MetropolisConfig),
    /// Direct when the exponent range is at most [`AUTO_DIRECT_RANGE`], else Metropolis.
    Auto,
}

/// Largest exponent range `max f - min f` for which `Auto` samples directly.
pub const AUTO_DIRECT_RANGE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n: usize,
    pub beta: f64,
    pub model: Model,
    /// Threshold of the magnetized-fraction observable, `m² ≥ eps`.
    pub eps: f64,
    /// Recorded states in total.
    pub samples: u64,
    pub seed: u64,
    pub shards: usize,
    pub sampler: Sampler,
    /// Constant added to `f`; averages do not depend on it.
    pub energy_offset: f64,
}

impl EnsembleConfig {
    pub fn new(n: usize, beta: f64, model: Model, samples: u64, seed: u64) -> Self {
        Self { n, beta, model, eps: 0.1, samples, seed, shards: 64, sampler: Sampler::Auto, energy_offset: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(crate::error::invalid("need N >= 2"));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(crate::error::invalid("beta must be finite and >= 0"));
        }
        if self.shards == 0 || self.samples < self.shards as u64 {
            return Err(crate::error::invalid("need shards >= 1 and samples >= shards"));
        }
        if let Model::ScwmWfe { omega } = self.model {
            if !(omega >= 0.0 && omega.is_finite()) {
                return Err(crate::error::invalid("omega must be finite and >= 0"));
            }
        }
        if self.model == Model::SquimD1 && self.n > FULL_N_LIMIT {
            return Err(Error::TooLarge { n: self.n, limit: FULL_N_LIMIT });
        }
        Ok(())
    }

    /// Real dimension of the sphere.
    pub fn dim(&self) -> usize {
        match self.model {
            Model::SquimD1 => 2 << self.n,
            _ => 2 * (self.n + 1),
        }
    }

    fn exponent_range(&self) -> f64 {
        match self.model {
            Model::SquimD1 => self.beta * (self.n - 1) as f64,
            Model::ScwmWfe { omega } => self.beta * self.n as f64 * omega.max(1.0),
            Model::ScwmEntropy => self.beta * self.n as f64 + ln_binomial(self.n, self.n / 2),
            Model::Scwm => self.beta * self.n as f64,
        }
    }

    fn resolved_sampler(&self) -> Sampler {
        match self.sampler {
            Sampler::Auto if self.exponent_range() <= AUTO_DIRECT_RANGE => Sampler::Direct,
            Sampler::Auto => Sampler::Metropolis(MetropolisConfig::default()),
            s => s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Direct,
    Metropolis,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    /// Direct sampling: `(Σw)²/Σw²`. Metropolis: `var F / se²`.
    pub numerator_ess: f64,
    pub sampler: SamplerKind,
}

/// Per-component statistics `[a, a², extra]`.
struct Components {
    stats: Vec<[f64; 3]>,
    model: Model,
    beta: f64,
    n: f64,
    offset: f64,
}

impl Components {
    fn new(cfg: &EnsembleConfig) -> Self {
        let n = cfg.n;
        let stats = match cfg.model {
            Model::SquimD1 => (0..1usize << n)
                .map(|s| {
                    let a = (s.count_ones() as f64 - 0.5 * n as f64) / n as f64;
                    [a, a * a, discordant_pairs(n, s) as f64]
                })
                .collect(),
            Model::ScwmEntropy => (0..=n).map(|k| [g(n, k), g(n, k) * g(n, k), ln_binomial(n, k)]).collect(),
            _ => (0..=n).map(|k| [g(n, k), g(n, k) * g(n, k), 0.0]).collect(),
        };
        Self { stats, model: cfg.model, beta: cfg.beta, n: n as f64, offset: cfg.energy_offset }
    }

    fn sums(&self, u: &[f64]) -> [f64; 3] {
        let mut s = [0.0; 3];
        for (c, st) in u.chunks_exact(2).zip(&self.stats) {
            let w = c[0] * c[0] + c[1] * c[1];
            s[0] += w * st[0];
            s[1] += w * st[1];
            s[2] += w * st[2];
        }
        s
    }

    fn f(&self, s: [f64; 3]) -> f64 {
        let [m, q, e] = s;
        let bn = self.beta * self.n;
        self.offset
            + match self.model {
                Model::Scwm => bn * (1.0 - q),
                Model::ScwmWfe { omega } => bn * (1.0 - omega * m * m + (omega - 1.0) * q),
                Model::ScwmEntropy => bn * (1.0 - q) - e,
                Model::SquimD1 => self.beta * e,
            }
    }
}

/// Weighted sums with a moving shift: weights are `exp(-(f - shift))`.
struct WeightedAcc {
    shift: f64,
    s0: f64,
    w2: f64,
    s1: Vec<f64>,
    s11: Vec<f64>,
    s2: Vec<f64>,
    count: u64,
}

impl WeightedAcc {
    fn new(k: usize) -> Self {
        Self { shift: f64::INFINITY, s0: 0.0, w2: 0.0, s1: vec![0.0; k], s11: vec![0.0; k], s2: vec![0.0; k], count: 0 }
    }

    fn rescale(&mut self, shift: f64) {
        if shift < self.shift {
            if self.shift.is_finite() {
                let r = libm::exp(shift - self.shift);
                self.s0 *= r;
                self.w2 *= r * r;
                self.s1.iter_mut().for_each(|x| *x *= r);
                self.s11.iter_mut().for_each(|x| *x *= r * r);
                self.s2.iter_mut().for_each(|x| *x *= r * r);
            }
            self.shift = shift;
        }
    }

    fn push(&mut self, f: f64, vals: &[f64]) {
        self.rescale(f);
        let w = libm::exp(-(f - self.shift));
        self.s0 += w;
        self.w2 += w * w;
        for (k, &v) in vals.iter().enumerate() {
            self.s1[k] += w * v;
            self.s11[k] += w * w * v;
            self.s2[k] += w * w * v * v;
        }
        self.count += 1;
    }

    fn merge(&mut self, o: &WeightedAcc) {
        if !o.shift.is_finite() {
            return;
        }
        self.rescale(o.shift);
        let r = libm::exp(self.shift - o.shift);
        self.s0 += o.s0 * r;
        self.w2 += o.w2 * r * r;
        for k in 0..self.s1.len() {
            self.s1[k] += o.s1[k] * r;
            self.s11[k] += o.s11[k] * r * r;
            self.s2[k] += o.s2[k] * r * r;
        }
        self.count += o.count;
    }
}

fn run_direct<E: ShardExecutor>(cfg: &EnsembleConfig, obs: &[Observable], exec: &E) -> Result<Vec<McEstimate>> {
    let comps = Components::new(cfg);
    let dim = cfg.dim();
    let parts = exec.map_shards(cfg.shards, |s| {
        let mut rng = shard_rng(cfg.seed, s);
        let mut u = vec![0.0; dim];
        let mut acc = WeightedAcc::new(obs.len());
        let mut vals = vec![0.0; obs.len()];
        for _ in 0..shard_len(cfg.samples, cfg.shards, s) {
            fill_sphere(&mut u, &mut rng);
            let st = comps.sums(&u);
            for (v, o) in vals.iter_mut().zip(obs) {
                *v = o.symmetrized(st[0], st[1], cfg.eps);
            }
            acc.push(comps.f(st), &vals);
        }
        acc
    });
    let mut acc = WeightedAcc::new(obs.len());
    for p in &parts {
        acc.merge(p);
    }
    let ess = acc.s0 * acc.s0 / acc.w2;
    if !(ess >= MIN_ESS) {
        return Err(Error::DegenerateWeights { ess });
    }
    Ok((0..obs.len())
        .map(|k| {
            let r = acc.s1[k] / acc.s0;
            let var = (acc.s2[k] - 2.0 * r * acc.s11[k] + r * r * acc.w2).max(0.0) / (acc.s0 * acc.s0);
            McEstimate { mean: r, std_error: libm::sqrt(var), n_samples: acc.count, numerator_ess: ess, sampler: SamplerKind::Direct }
        })
        .collect())
}

/// Fenwick tree over `u_i²` for drawing a coordinate with probability `∝ u_i²`.
struct Fenwick {
    tree: Vec<f64>,
}

impl Fenwick {
    fn build(vals: &[f64]) -> Self {
        let n = vals.len();
        let mut tree = vec![0.0; n + 1];
        for i in 0..n {
            tree[i + 1] += vals[i];
            let j = (i + 1) + ((i + 1) & (!i));
            if j <= n {
                let v = tree[i + 1];
                tree[j] += v;
            }
        }
        Self { tree }
    }

    fn add(&mut self, i: usize, delta: f64) {
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        let mut s = 0.0;
        let mut j = self.tree.len() - 1;
        while j > 0 {
            s += self.tree[j];
            j &= j - 1;
        }
        s
    }

    /// Smallest `i` whose prefix sum exceeds `target`.
    fn find(&self, mut target: f64) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut step = 1usize << (usize::BITS - 1 - n.leading_zeros());
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }
}

const STEP_SCALES: [f64; 4] = [core::f64::consts::PI, 0.3, 0.03, 0.003];
// sweeps between exact recomputations of the running sums
const REFRESH_SWEEPS: u64 = 256;

struct Chain<'a> {
    comps: &'a Components,
    u: Vec<f64>,
    sq: Fenwick,
    sums: [f64; 3],
    f: f64,
}

impl<'a> Chain<'a> {
    fn new(comps: &'a Components, u: Vec<f64>) -> Self {
        let sq: Vec<f64> = u.iter().map(|x| x * x).collect();
        let sums = comps.sums(&u);
        Self { comps, sq: Fenwick::build(&sq), f: comps.f(sums), sums, u }
    }

    fn refresh(&mut self) {
        let sq: Vec<f64> = self.u.iter().map(|x| x * x).collect();
        self.sq = Fenwick::build(&sq);
        self.sums = self.comps.sums(&self.u);
        self.f = self.comps.f(self.sums);
    }

    /// One rotation proposal in a coordinate plane `(i, j)`. The pair is
    /// uniform with probability ½ and otherwise `i ∝ u_i²`, `j` uniform;
    /// either way the selection probability depends on `u_i² + u_j²` only,
    /// which the rotation preserves.
    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let d = self.u.len();
        let i = if rng.random::<bool>() {
            rng.random_range(0..d)
        } else {
            self.sq.find(rng.random::<f64>() * self.sq.total())
        };
        let mut j = rng.random_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let h = STEP_SCALES[rng.random_range(0..STEP_SCALES.len())];
        let t = h * (2.0 * rng.random::<f64>() - 1.0);
        let (c, s) = (libm::cos(t), libm::sin(t));
        let (ui, uj) = (self.u[i], self.u[j]);
        let (vi, vj) = (c * ui - s * uj, s * ui + c * uj);
        let (ci, cj) = (i / 2, j / 2);
        let mut sums = self.sums;
        if ci != cj {
            let (di, dj) = (vi * vi - ui * ui, vj * vj - uj * uj);
            let (a, b) = (&self.comps.stats[ci], &self.comps.stats[cj]);
            for k in 0..3 {
                sums[k] += di * a[k] + dj * b[k];
            }
        }
        let f = self.comps.f(sums);
        let accept = f <= self.f || rng.random::<f64>() < libm::exp(self.f - f);
        if accept {
            self.sq.add(i, vi * vi - ui * ui);
            self.sq.add(j, vj * vj - uj * uj);
            self.u[i] = vi;
            self.u[j] = vj;
            self.sums = sums;
            self.f = f;
        }
        accept
    }

    fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for _ in 0..self.u.len() {
            self.step(rng);
        }
    }
}

struct ChainOut {
    means: Vec<f64>,
    sq: Vec<f64>,
    count: u64,
}

fn run_metropolis<E: ShardExecutor>(
    cfg: &EnsembleConfig,
    mc: MetropolisConfig,
    obs: &[Observable],
    exec: &E,
) -> Result<Vec<McEstimate>> {
    if cfg.shards < 2 {
        return Err(crate::error::invalid("Metropolis errors need at least two shards"));
    }
    let comps = Components::new(cfg);
    let dim = cfg.dim();
    let parts = exec.map_shards(cfg.shards, |s| {
        let mut rng = shard_rng(cfg.seed, s);
        let mut u = vec![0.0; dim];
        fill_sphere(&mut u, &mut rng);
        let mut chain = Chain::new(&comps, u);
        for k in 0..mc.burn_in_sweeps {
            chain.sweep(&mut rng);
            if k % REFRESH_SWEEPS == REFRESH_SWEEPS - 1 {
                chain.refresh();
            }
        }
        chain.refresh();
        let n = shard_len(cfg.samples, cfg.shards, s);
        let mut sum = vec![0.0; obs.len()];
        let mut sq = vec![0.0; obs.len()];
        let mut sweeps = 0u64;
        for _ in 0..n {
            for _ in 0..mc.thin_sweeps.max(1) {
                chain.sweep(&mut rng);
                sweeps += 1;
                if sweeps.is_multiple_of(REFRESH_SWEEPS) {
                    chain.refresh();
                }
            }
            let [m, q, _] = chain.sums;
            for (k, o) in obs.iter().enumerate() {
                let v = o.symmetrized(m, q, cfg.eps);
                sum[k] += v;
                sq[k] += v * v;
            }
        }
        ChainOut { means: sum.iter().map(|x| x / n as f64).collect(), sq, count: n }
    });
    let total: u64 = parts.iter().map(|p| p.count).sum();
    let k = cfg.shards as f64;
    Ok((0..obs.len())
        .map(|i| {
            let mean = parts.iter().map(|p| p.means[i] * p.count as f64).sum::<f64>() / total as f64;
            let cm = parts.iter().map(|p| p.means[i]).sum::<f64>() / k;
            let between = parts.iter().map(|p| (p.means[i] - cm).powi(2)).sum::<f64>() / (k - 1.0);
            let se = libm::sqrt(between / k);
            let var = (parts.iter().map(|p| p.sq[i]).sum::<f64>() / total as f64 - mean * mean).max(0.0);
            let ess = if se > 0.0 { var / (se * se) } else { total as f64 };
            McEstimate { mean, std_error: se, n_samples: total, numerator_ess: ess, sampler: SamplerKind::Metropolis }
        })
        .collect())
}

/// Estimates several observables from one run.
pub fn thermal_averages<E: ShardExecutor>(cfg: &EnsembleConfig, obs: &[Observable], exec: &E) -> Result<Vec<McEstimate>> {
    cfg.validate()?;
    match cfg.resolved_sampler() {
        Sampler::Metropolis(mc) => run_metropolis(cfg, mc, obs, exec),
        _ => run_direct(cfg, obs, exec),
    }
}

pub fn thermal_average<E: ShardExecutor>(cfg: &EnsembleConfig, obs: Observable, exec: &E) -> Result<McEstimate> {
    Ok(thermal_averages(cfg, &[obs], exec)?[0])
}

/// `Σ_{n=0}^N g_n²` in exact integer arithmetic: `(N+1)(N+2)/(3N)`.
pub fn sum_g_squared(n: usize) -> f64 {
    let n = n as u128;
    // Σ (N-2k)² = N(N+1)(N+2)/3
    (n * (n + 1) * (n + 2) / 3) as f64 / (n * n) as f64
}

/// `[m²]` at `β = 0` on the sphere of real dimension `d = 2(N+1)`:
/// `(c₁ - c₂) Σ g_n²` with `c₁ = 8/(d(d+2))`, `c₂ = 4/(d(d+2))`.
pub fn infinite_t_msq_exact(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(crate::error::invalid("need N >= 2"));
    }
    let d = 2.0 * (n + 1) as f64;
    Ok(4.0 / (d * (d + 2.0)) * sum_g_squared(n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsmResult {
    pub log_z_hat: f64,
    /// `(1/a_N) Σ_S M_S / (1 + βE_S/a_N)`, zero by spin-flip symmetry.
    pub first_term: f64,
    /// `(1/a_N²) Σ_S M_S² / (1 + βE_S/a_N)²`.
    pub msq_dispersion: f64,
    pub n: usize,
    pub beta: f64,
}

/// Gaussian surrogate with `a_N = 2·2^N`: `Ẑ = Π_S 1/(1 + βE_S/a_N)`,
/// `E_S` the positive nearest-neighbour energy and `M_S = Σ S_i`.
pub fn esm_evaluate(n: usize, beta: f64) -> Result<EsmResult> {
    if n < 2 {
        return Err(crate::error::invalid("need N >= 2"));
    }
    if n > FULL_N_LIMIT {
        return Err(Error::TooLarge { n, limit: FULL_N_LIMIT });
    }
    let a = 2.0 * (1u64 << n) as f64;
    let mut log_z = 0.0;
    let mut first = 0.0;
    let mut second = 0.0;
    for s in 0..1usize << n {
        let e = discordant_pairs(n, s) as f64;
        let m = s.count_ones() as f64 - 0.5 * n as f64;
        let t = 1.0 + beta * e / a;
        log_z -= libm::log1p(beta * e / a);
        first += m / t;
        second += m * m / (t * t);
    }
    if !(first.abs() < 1e-9 * (1u64 << n) as f64) {
        return Err(Error::Numerical(format!("first term {first} is not zero")));
    }
    Ok(EsmResult { log_z_hat: log_z, first_term: first / a, msq_dispersion: second / (a * a), n, beta })
}
