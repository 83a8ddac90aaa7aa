//! Numerical checks of the layer-cake formula and of the concentration
//! bound for Gibbs measures.
//!
//! The layer-cake formula: for `f` on `B` with values in `[0, c]` and a
//! probability measure `dφ`,
//! `∫_B e^{-f} dφ = e^{-c}|B| + c ∫₀¹ e^{-cx} F(x) dx`, `F(x) = |{f ≤ cx} ∩ B|`.

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadTol};
use alloc::format;

fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    integrate(f, a, b, &[], QuadTol::default()).value
}

/// `e^{-c}|B| + c ∫₀¹ e^{-cx} F(x) dx`.
pub fn uif_rhs<F: Fn(f64) -> f64>(c: f64, volume_b: f64, level_volume: F) -> f64 {
    libm::exp(-c) * volume_b + c * quad(|x| libm::exp(-c * x) * level_volume(x), 0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UifCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// Closed form of the left side where one is known.
    pub exact: Option<f64>,
}

/// `I₀(x)` by its power series.
pub fn bessel_i0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Whole circle with the uniform probability measure and `f = sin²φ`:
/// `c = 1`, `F(x) = (2/π) arcsin √x`, both sides equal `e^{-½} I₀(½)`.
pub fn uif_circle() -> UifCheck {
    let tau = 2.0 * core::f64::consts::PI;
    let lhs = quad(|p| libm::exp(-libm::sin(p).powi(2)), 0.0, tau) / tau;
    let rhs = uif_rhs(1.0, 1.0, |x| core::f64::consts::FRAC_2_PI * libm::asin(libm::sqrt(x)));
    UifCheck { lhs, rhs, exact: Some(libm::exp(-0.5) * bessel_i0(0.5)) }
}

/// The arc `B = [0, π/4]`, on which `f = sin²φ` ranges over `[0, ½]`:
/// `c = ½` and `F(x) = arcsin √(x/2) / (2π)`.
pub fn uif_arc() -> UifCheck {
    let tau = 2.0 * core::f64::consts::PI;
    let q = core::f64::consts::FRAC_PI_4;
    let lhs = quad(|p| libm::exp(-libm::sin(p).powi(2)), 0.0, q) / tau;
    let rhs = uif_rhs(0.5, q / tau, |x| libm::asin(libm::sqrt(0.5 * x)) / tau);
    UifCheck { lhs, rhs, exact: None }
}

/// A zonal example on the unit 2-sphere with the uniform probability
/// measure: `f = κ(1 - z)`, `g = z + x²`, `U = {z > z_u}`, `V = {z > z_v}`.
/// Under this measure `z` is uniform on `[-1, 1]` and `E[x² | z] = (1-z²)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereExample {
    pub kappa: f64,
    pub z_u: f64,
    pub z_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationCheck {
    pub alpha: f64,
    pub eta: f64,
    pub mu: f64,
    pub g_norm: f64,
    /// Hypotheses (A) to (D).
    pub hypotheses: [bool; 4],
    /// `[g]` over the whole sphere.
    pub mean_g: f64,
    pub r: f64,
    pub xi: f64,
    pub zeta: f64,
    /// `e^{-α} e^{η} μ^{-1}`.
    pub bound: f64,
}

impl ConcentrationCheck {
    pub fn holds(&self) -> bool {
        self.hypotheses.iter().all(|&h| h)
            && self.xi.abs() <= self.bound * self.g_norm
            && self.zeta.abs() <= self.bound
            && ((self.r + self.xi) / (1.0 + self.zeta) - self.mean_g).abs() <= 1e-12 * (1.0 + self.mean_g.abs())
    }
}

impl SphereExample {
    pub fn f(&self, z: f64) -> f64 {
        self.kappa * (1.0 - z)
    }

    /// `g` averaged over the circle at height `z`.
    pub fn g_zonal(z: f64) -> f64 {
        z + 0.5 * (1.0 - z * z)
    }

    /// `sup |z + x²|` over the sphere: `5/4`, reached at `z = ½`, `y = 0`.
    pub const G_NORM: f64 = 1.25;

    pub fn check(&self) -> Result<ConcentrationCheck> {
        if !(self.kappa > 0.0 && -1.0 < self.z_u && self.z_u < 1.0 && -1.0 < self.z_v && self.z_v < 1.0) {
            return Err(Error::InvalidParams(format!("bad sphere example {self:?}")));
        }
        // the tightest constants the sets allow
        let alpha = self.f(self.z_u);
        let eta = self.f(self.z_v);
        let mu = 0.5 * (1.0 - self.z_v);
        let hypotheses = [
            self.z_v >= self.z_u,
            self.f(self.z_v) <= eta,
            self.f(self.z_u) >= alpha,
            0.5 * (1.0 - self.z_v) >= mu,
        ];
        let w = |z: f64| 0.5 * libm::exp(-self.f(z));
        let z_in = quad(w, self.z_u, 1.0);
        let z_out = quad(w, -1.0, self.z_u);
        let g_in = quad(|z| w(z) * Self::g_zonal(z), self.z_u, 1.0);
        let g_out = quad(|z| w(z) * Self::g_zonal(z), -1.0, self.z_u);
        Ok(ConcentrationCheck {
            alpha,
            eta,
            mu,
            g_norm: Self::G_NORM,
            hypotheses,
            mean_g: (g_in + g_out) / (z_in + z_out),
            r: g_in / z_in,
            xi: g_out / z_in,
            zeta: z_out / z_in,
            bound: libm::exp(eta - alpha) / mu,
        })
    }
}
