//! Wavefunction states, uniform sampling on the sphere, observables of the
//! symmetric (Curie-Weiss) and nearest-neighbour models, and the classical
//! 1-D Ising chain.
//!
//! Symmetric states are indexed by the number `n` of down spins, so that
//! `g_n = 1 - 2n/N` is the mean spin of sector `n` and `n = 0` is all-up.
//! Full states are indexed by configuration: bit `i` set means `S_i = +½`.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Largest spin count for configuration-indexed states.
pub const FULL_N_LIMIT: usize = 20;

const NORM_TOL: f64 = 1e-12;

/// Draws a uniform point on the unit sphere in `R^dim`.
pub fn sample_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    fill_sphere(&mut v, rng);
    v
}

/// In-place version of [`sample_sphere`].
pub fn fill_sphere<R: Rng + ?Sized>(v: &mut [f64], rng: &mut R) {
    loop {
        let mut s = 0.0;
        for x in v.iter_mut() {
            *x = rng.sample(StandardNormal);
            s += *x * *x;
        }
        if s > 0.0 {
            let k = 1.0 / libm::sqrt(s);
            v.iter_mut().for_each(|x| *x *= k);
            return;
        }
    }
}

fn check_norm(norm2: f64) -> Result<()> {
    if (norm2 - 1.0).abs() > NORM_TOL {
        return Err(crate::error::invalid("state is not normalized"));
    }
    Ok(())
}

fn complex_from_reals(re_im: &[f64]) -> Vec<Complex64> {
    re_im.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// `ln C(n, k)` via log-gamma.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    let (n, k) = (n as f64, k as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

/// State of the exchange-symmetric model, `φ_n` for `n = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricWavefunction {
    amps: Vec<Complex64>,
}

impl SymmetricWavefunction {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(crate::error::invalid("need N >= 1"));
        }
        check_norm(amps.iter().map(|a| a.norm_sqr()).sum())?;
        Ok(Self { amps })
    }

    /// From interleaved `(re, im)` pairs, e.g. a point of the `2(N+1)`-sphere.
    pub fn from_reals(re_im: &[f64]) -> Result<Self> {
        if !re_im.len().is_multiple_of(2) {
            return Err(crate::error::invalid("odd number of reals"));
        }
        Self::new(complex_from_reals(re_im))
    }

    /// Real non-negative amplitudes `√w_n` from sector weights.
    pub fn from_weights(w: &[f64]) -> Result<Self> {
        Self::new(w.iter().map(|&x| Complex64::new(libm::sqrt(x), 0.0)).collect())
    }

    /// All weight on sector `n`.
    pub fn basis(n_spins: usize, n: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); n_spins + 1];
        amps[n] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    /// Equal superposition of all-up and all-down.
    pub fn cat(n_spins: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); n_spins + 1];
        amps[0] = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[n_spins] = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { amps }
    }

    pub fn n_spins(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.amps.iter().map(|a| a.norm_sqr())
    }
}

/// `g_n = 1 - 2n/N`.
pub fn g(n_spins: usize, n: usize) -> f64 {
    1.0 - 2.0 * n as f64 / n_spins as f64
}

/// `m = Σ |φ_n|² g_n`.
pub fn magnetization(phi: &SymmetricWavefunction) -> f64 {
    let n = phi.n_spins();
    phi.weights().enumerate().map(|(k, w)| w * g(n, k)).sum()
}

/// `Σ |φ_n|² g_n²`, which equals `m² + D`.
pub fn second_moment(phi: &SymmetricWavefunction) -> f64 {
    let n = phi.n_spins();
    phi.weights().enumerate().map(|(k, w)| w * g(n, k) * g(n, k)).sum()
}

/// `D = Σ |φ_n|² g_n² - m²`, clamped at zero against rounding.
pub fn dispersion(phi: &SymmetricWavefunction) -> f64 {
    let m = magnetization(phi);
    (second_moment(phi) - m * m).max(0.0)
}

/// `E_CW = -(1/N) Σ |φ_n|² (N - 2n)²`.
pub fn energy_cw(phi: &SymmetricWavefunction) -> f64 {
    let n = phi.n_spins();
    let nf = n as f64;
    -phi.weights().enumerate().map(|(k, w)| w * (nf - 2.0 * k as f64).powi(2)).sum::<f64>() / nf
}

/// `Nβ(1 - m² - D)`, the Curie-Weiss `β(E_CW + N) ≥ 0`.
pub fn scwm_f(phi: &SymmetricWavefunction, beta: f64) -> f64 {
    phi.n_spins() as f64 * beta * (1.0 - second_moment(phi))
}

/// `Nβ{1 - m² + (ω-1)D}`.
pub fn wfe_f(phi: &SymmetricWavefunction, beta: f64, omega: f64) -> f64 {
    let m = magnetization(phi);
    let d = dispersion(phi);
    phi.n_spins() as f64 * beta * (1.0 - m * m + (omega - 1.0) * d)
}

/// `Σ |φ_n|² ln C(N, n)`.
pub fn entropy_weight(phi: &SymmetricWavefunction) -> f64 {
    let n = phi.n_spins();
    phi.weights().enumerate().map(|(k, w)| w * ln_binomial(n, k)).sum()
}

/// Configuration-indexed state of `N ≤ 20` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct FullWavefunction {
    n_spins: usize,
    amps: Vec<Complex64>,
}

impl FullWavefunction {
    pub fn new(n_spins: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_spins > FULL_N_LIMIT {
            return Err(Error::TooLarge { n: n_spins, limit: FULL_N_LIMIT });
        }
        if n_spins < 2 || amps.len() != 1 << n_spins {
            return Err(crate::error::invalid("need N >= 2 and 2^N amplitudes"));
        }
        check_norm(amps.iter().map(|a| a.norm_sqr()).sum())?;
        Ok(Self { n_spins, amps })
    }

    pub fn from_reals(n_spins: usize, re_im: &[f64]) -> Result<Self> {
        Self::new(n_spins, complex_from_reals(re_im))
    }

    /// All weight on configuration `config`.
    pub fn basis(n_spins: usize, config: usize) -> Result<Self> {
        if n_spins > FULL_N_LIMIT {
            return Err(Error::TooLarge { n: n_spins, limit: FULL_N_LIMIT });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_spins];
        amps[config] = Complex64::new(1.0, 0.0);
        Self::new(n_spins, amps)
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }
}

/// Sign convention for the nearest-neighbour energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnergyConvention {
    /// `-Σ S_{i-1} S_i`.
    Negative,
    /// `Σ (S_{i-1} - S_i)²`, which equals `2·Negative + (N-1)/2`.
    #[default]
    Positive,
}

/// Number of unequal neighbouring pairs in `config`.
pub fn discordant_pairs(n_spins: usize, config: usize) -> u32 {
    let mask = (1usize << (n_spins - 1)) - 1;
    ((config ^ (config >> 1)) & mask).count_ones()
}

/// Energy of one configuration.
pub fn config_energy(n_spins: usize, config: usize, conv: EnergyConvention) -> f64 {
    let k = discordant_pairs(n_spins, config) as f64;
    let bonds = (n_spins - 1) as f64;
    match conv {
        // each bond contributes ∓¼
        EnergyConvention::Negative => 0.25 * (2.0 * k - bonds),
        EnergyConvention::Positive => k,
    }
}

/// `Σ_S |ψ(S)|² E(S)` for the d = 1 chain with free ends.
pub fn energy_squim_d1(psi: &FullWavefunction, conv: EnergyConvention) -> f64 {
    let n = psi.n_spins;
    psi.amps.iter().enumerate().map(|(s, a)| a.norm_sqr() * config_energy(n, s, conv)).sum()
}

/// `⟨Σ S_i⟩ / N` with `S_i = ±½`.
pub fn magnetization_full(psi: &FullWavefunction) -> f64 {
    let n = psi.n_spins;
    let m: f64 = psi
        .amps
        .iter()
        .enumerate()
        .map(|(s, a)| a.norm_sqr() * (s.count_ones() as f64 - 0.5 * n as f64))
        .sum();
    m / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingChain {
    pub log_z: f64,
    pub mean_m: f64,
    pub var_m: f64,
}

/// `ln Z_N(β, λ)` for the free chain `E = -2 Σ S_{i-1} S_i`, `S_i = ±½`,
/// normalized by the uniform measure `2^{-N}`. Uses the eigen-decomposition
/// of the symmetric transfer matrix.
pub fn ising_log_z(n: usize, beta: f64, lambda: f64) -> f64 {
    // T(s, s') = exp(2β s s' + λ(s + s')/2), u_s = exp(λ s / 2)
    let t11 = libm::exp(0.5 * beta + 0.5 * lambda);
    let t22 = libm::exp(0.5 * beta - 0.5 * lambda);
    let t12 = libm::exp(-0.5 * beta);
    let u = [libm::exp(0.25 * lambda), libm::exp(-0.25 * lambda)];
    let tr = 0.5 * (t11 + t22);
    let disc = libm::hypot(0.5 * (t11 - t22), t12);
    let (mu1, mu2) = (tr + disc, tr - disc);
    // eigenvector of mu1, normalized
    let (a, b) = if t12.abs() > 0.0 { (t12, mu1 - t11) } else { (1.0, 0.0) };
    let len = libm::hypot(a, b);
    let e1 = [a / len, b / len];
    let e2 = [-e1[1], e1[0]];
    let p1 = u[0] * e1[0] + u[1] * e1[1];
    let p2 = u[0] * e2[0] + u[1] * e2[1];
    let k = (n - 1) as f64;
    let ratio = libm::pow((mu2 / mu1).abs(), k) * if mu2 < 0.0 && (n - 1) % 2 == 1 { -1.0 } else { 1.0 };
    k * libm::log(mu1) + libm::log(p1 * p1 + ratio * p2 * p2) - n as f64 * core::f64::consts::LN_2
}

/// `ln Z`, `[M]` and `var M` (with `M = Σ S_i`) from centered differences
/// in `λ` with step `1e-5`.
pub fn classical_ising_1d(n: usize, beta: f64, lambda: f64) -> Result<IsingChain> {
    if n < 2 {
        return Err(crate::error::invalid("need N >= 2"));
    }
    let h = 1e-5;
    let l0 = ising_log_z(n, beta, lambda);
    let lp = ising_log_z(n, beta, lambda + h);
    let lm = ising_log_z(n, beta, lambda - h);
    Ok(IsingChain { log_z: l0, mean_m: (lp - lm) / (2.0 * h), var_m: (lp - 2.0 * l0 + lm) / (h * h) })
}

/// `ln Z` by summing over all `2^N` configurations, for checks.
pub fn ising_log_z_enumerated(n: usize, beta: f64, lambda: f64) -> Result<f64> {
    if n > FULL_N_LIMIT {
        return Err(Error::TooLarge { n, limit: FULL_N_LIMIT });
    }
    let mut z = 0.0;
    for c in 0..1usize << n {
        let s = |i: usize| if c >> i & 1 == 1 { 0.5 } else { -0.5 };
        let mut e = 0.0;
        let mut m = 0.0;
        for i in 0..n {
            m += s(i);
            if i > 0 {
                e -= 2.0 * s(i - 1) * s(i);
            }
        }
        z += libm::exp(-beta * e + lambda * m);
    }
    Ok(libm::log(z) - n as f64 * core::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::shard_rng;

    #[test]
    fn symmetric_examples() {
        let n = 6;
        let up = SymmetricWavefunction::basis(n, 0);
        assert_eq!(magnetization(&up), 1.0);
        assert_eq!(dispersion(&up), 0.0);
        assert_eq!(energy_cw(&up), -6.0);
        assert_eq!(wfe_f(&up, 2.0, 1.2), 0.0);
        let cat = SymmetricWavefunction::cat(n);
        assert!(magnetization(&cat).abs() < 1e-15);
        assert!((dispersion(&cat) - 1.0).abs() < 1e-15);
        assert!((energy_cw(&cat) + 6.0).abs() < 1e-12);
        assert!((wfe_f(&cat, 2.0, 1.2) - 1.2 * 12.0).abs() < 1e-12);
        let uni = SymmetricWavefunction::from_weights(&[1.0 / 7.0; 7]).unwrap();
        assert!(magnetization(&uni).abs() < 1e-15);
        let bin: Vec<f64> = (0..=n).map(|k| libm::exp(ln_binomial(n, k)) / 64.0).collect();
        let b = SymmetricWavefunction::from_weights(&bin).unwrap();
        assert!((dispersion(&b) - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_weight(&SymmetricWavefunction::basis(7, 0)), 0.0);
        assert!((entropy_weight(&SymmetricWavefunction::basis(7, 3)) - libm::log(35.0)).abs() < 1e-12);
        let uni = SymmetricWavefunction::from_weights(&[0.2; 5]).unwrap();
        let want = 0.2 * (2.0 * libm::log(4.0) + libm::log(6.0));
        assert!((entropy_weight(&uni) - want).abs() < 1e-12);
        assert!(ln_binomial(1_000_000, 500_000).is_finite());
    }

    #[test]
    fn squim_energy_conventions() {
        let n = 5;
        let up = FullWavefunction::basis(n, 0b11111).unwrap();
        assert_eq!(energy_squim_d1(&up, EnergyConvention::Negative), -1.0);
        assert_eq!(energy_squim_d1(&up, EnergyConvention::Positive), 0.0);
        let alt = FullWavefunction::basis(n, 0b10101).unwrap();
        assert_eq!(energy_squim_d1(&alt, EnergyConvention::Negative), 1.0);
        let mut amps = vec![Complex64::new(0.0, 0.0); 32];
        amps[0] = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[31] = Complex64::new(0.0, core::f64::consts::FRAC_1_SQRT_2);
        let cat = FullWavefunction::new(n, amps).unwrap();
        assert!((energy_squim_d1(&cat, EnergyConvention::Negative) + 1.0).abs() < 1e-15);
        assert!(magnetization_full(&cat).abs() < 1e-15);
        let mut rng = shard_rng(5, 0);
        let psi = FullWavefunction::from_reals(n, &sample_sphere(64, &mut rng)).unwrap();
        let neg = energy_squim_d1(&psi, EnergyConvention::Negative);
        let pos = energy_squim_d1(&psi, EnergyConvention::Positive);
        assert!((pos - (2.0 * neg + 2.0)).abs() < 1e-12);
        assert!(matches!(FullWavefunction::basis(21, 0), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn ising_chain() {
        for (beta, lambda) in [(0.7, 0.0), (1.3, 0.4), (-0.5, 0.2)] {
            for n in [2, 3, 7] {
                let tm = ising_log_z(n, beta, lambda);
                let en = ising_log_z_enumerated(n, beta, lambda).unwrap();
                assert!((tm - en).abs() < 1e-10, "n={n} {tm} {en}");
            }
        }
        let c = classical_ising_1d(50, 1.0, 0.0).unwrap();
        assert!(c.mean_m.abs() < 1e-9);
        // β = 0: independent spins, var M = N/4
        let c0 = classical_ising_1d(40, 0.0, 0.0).unwrap();
        assert!((c0.var_m - 10.0).abs() < 1e-4);
    }
}
