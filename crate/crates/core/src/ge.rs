//! The scaled cumulant generating function of the conditional rare-event
//! problem and everything derived from it.
//!
//! For parameters `(x, ε)` and `θ = (θ₁, θ₂)` put
//! `h(y) = θ₁(1 − x − y²) + θ₂(y − ε)` and `q(y) = 1 − 2h(y)`, a quadratic
//! `2θ₁y² − 2θ₂y + b` with `b = 1 − 2θ₁(1 − x) + 2θ₂ε`. Then
//!
//! ```text
//! c(θ) = −½ ∫₋₁¹ ln q(y) dy,      k(θ) = θ·∇c(θ) − c(θ),
//! ```
//!
//! defined on the convex domain `D = {θ : h(y) ≤ ½ on [−1, 1]}`.
//!
//! All quantities are built from the three moments `∫ yᵏ/q`, `k = 0, 1, 2`,
//! written through partial fractions in the reciprocal roots `w = 1/r` of
//! `q`. That form has no `1/θ₁` factor, so it stays accurate through the
//! line `θ₁ = 0` where `q` is affine, and it covers the log branch
//! (real roots, positive discriminant) and the arctan branch (complex roots)
//! with the same code.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// `θ` counts as strictly inside `D` only if `min q ≥ BOUNDARY_TOL`.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Relative discriminant size below which the roots are treated as equal.
const TIE_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    x: f64,
    eps: f64,
}

impl RateParams {
    /// Requires `0 < x ≤ 1`, `ε > 0` and `(1 − x) − ε² > 0`, the regime in
    /// which `D` is bounded by an ellipse.
    pub fn new(x: f64, eps: f64) -> Result<Self> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(invalid("x must lie in (0, 1]"));
        }
        if !(eps > 0.0) {
            return Err(invalid("eps must be positive"));
        }
        if !((1.0 - x) - eps * eps > 0.0) {
            return Err(invalid("(1 - x) - eps^2 must be positive"));
        }
        Ok(RateParams { x, eps })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The point `P = (−1/(2x), 0)` where both endpoint tests are tight.
    pub fn p_point(&self) -> f64 {
        -0.5 / self.x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ThetaPair {
    pub theta1: f64,
    pub theta2: f64,
}

impl ThetaPair {
    pub const fn new(theta1: f64, theta2: f64) -> Self {
        ThetaPair { theta1, theta2 }
    }
}

/// `h(y) = θ₁(1 − x − y²) + θ₂(y − ε)`.
pub fn h_value(y: f64, theta: ThetaPair, params: RateParams) -> f64 {
    theta.theta1 * (1.0 - params.x - y * y) + theta.theta2 * (y - params.eps)
}

/// The quadratic `q(y) = 2θ₁y² − 2θ₂y + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelQ {
    pub theta: ThetaPair,
    pub b: f64,
    pub params: RateParams,
}

impl KernelQ {
    pub fn new(theta: ThetaPair, params: RateParams) -> Self {
        let b = 1.0 - 2.0 * theta.theta1 * (1.0 - params.x) + 2.0 * theta.theta2 * params.eps;
        KernelQ { theta, b, params }
    }

    pub fn eval(&self, y: f64) -> f64 {
        2.0 * self.theta.theta1 * y * y - 2.0 * self.theta.theta2 * y + self.b
    }

    /// `4θ₂² − 8θ₁b`.
    pub fn discriminant(&self) -> f64 {
        4.0 * self.theta.theta2 * self.theta.theta2 - 8.0 * self.theta.theta1 * self.b
    }

    /// `(q(−1), q(1))` from `1 + 2xθ₁ ± 2θ₂(1 ± ε)` with a fused
    /// multiply-add, accurate to full relative precision near `∂D`.
    pub fn endpoints(&self) -> (f64, f64) {
        let (t, p) = (self.theta, self.params);
        let base = libm::fma(2.0 * p.x, t.theta1, 1.0);
        (base + 2.0 * t.theta2 * (1.0 + p.eps), base - 2.0 * t.theta2 * (1.0 - p.eps))
    }

    /// Stationary point `θ₂/(2θ₁)` of `q`, if `θ₁ ≠ 0`.
    pub fn vertex(&self) -> Option<f64> {
        (self.theta.theta1 != 0.0).then(|| self.theta.theta2 / (2.0 * self.theta.theta1))
    }

    /// Exact minimum of `q` over `[−1, 1]`.
    pub fn min_on_interval(&self) -> f64 {
        let (qm, qp) = self.endpoints();
        let mut m = qm.min(qp);
        if self.theta.theta1 > 0.0 {
            if let Some(yc) = self.vertex() {
                if yc > -1.0 && yc < 1.0 {
                    let t = self.theta;
                    m = m.min(self.b - t.theta2 * t.theta2 / (2.0 * t.theta1));
                }
            }
        }
        m
    }

    fn coeffs(&self) -> Quadratic {
        Quadratic { a: 2.0 * self.theta.theta1, bp: -2.0 * self.theta.theta2, c: self.b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainTest {
    /// `h(1) ≤ ½`
    Test1,
    /// `h(−1) ≤ ½`
    Test2,
    /// `h(θ₂/(2θ₁)) ≤ ½` when the stationary point lies in `[−1, 1]`
    Test3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainVerdict {
    pub in_domain: bool,
    /// First test that failed, in the order 1, 2, 3.
    pub failed_test: Option<DomainTest>,
}

/// Membership of `θ` in `D` by the three endpoint and vertex tests.
pub fn in_domain(theta: ThetaPair, params: RateParams) -> DomainVerdict {
    let fail = |t| DomainVerdict { in_domain: false, failed_test: Some(t) };
    if h_value(1.0, theta, params) > 0.5 {
        return fail(DomainTest::Test1);
    }
    if h_value(-1.0, theta, params) > 0.5 {
        return fail(DomainTest::Test2);
    }
    if theta.theta1 != 0.0 {
        let yc = theta.theta2 / (2.0 * theta.theta1);
        if (-1.0..=1.0).contains(&yc) && h_value(yc, theta, params) > 0.5 {
            return fail(DomainTest::Test3);
        }
    }
    DomainVerdict { in_domain: true, failed_test: None }
}

/// `∫₋₁¹ yᵏ/q(y) dy` for `k = 0, 1, 2`, plus endpoint values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QMoments {
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
    pub q_minus: f64,
    pub q_plus: f64,
    pub min_q: f64,
}

#[derive(Debug, Clone, Copy)]
struct Quadratic {
    a: f64,
    bp: f64,
    c: f64,
}

// Series of t(w) = atanh(w)/w and u(w) = (1 − t(w))/w for small |w|.
fn tu_series_real(w: f64) -> (f64, f64) {
    let w2 = w * w;
    let (mut t, mut u) = (0.0, 0.0);
    let (mut p, mut q) = (1.0, w);
    for k in 0..13 {
        t += p / (2 * k + 1) as f64;
        if k >= 1 {
            u -= q / (2 * k + 1) as f64;
            q *= w2;
        }
        p *= w2;
    }
    (t, u)
}

fn tu_series_complex(w: Complex64) -> (Complex64, Complex64) {
    let w2 = w * w;
    let mut t = Complex64::new(0.0, 0.0);
    let mut u = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    let mut q = w;
    for k in 0..13 {
        t += p / (2 * k + 1) as f64;
        if k >= 1 {
            u -= q / (2 * k + 1) as f64;
            q *= w2;
        }
        p *= w2;
    }
    (t, u)
}

const SERIES_RADIUS: f64 = 0.05;

// With F0 = ∫dy/(y − r) = ln(1 − w) − ln(1 + w), the per-root pieces are
// [F0, r·F0, 2r + r²·F0] for ∫ 1, y, y² over (y − r).
fn pieces_real(w: f64, f0: f64) -> [f64; 3] {
    if w.abs() < SERIES_RADIUS {
        let (t, u) = tu_series_real(w);
        [-2.0 * w * t, -2.0 * t, 2.0 * u]
    } else {
        let f1 = f0 / w;
        [f0, f1, (2.0 + f1) / w]
    }
}

fn pieces_complex(w: Complex64, f0: Complex64) -> [Complex64; 3] {
    if w.norm() < SERIES_RADIUS {
        let (t, u) = tu_series_complex(w);
        [-2.0 * w * t, -2.0 * t, 2.0 * u]
    } else {
        let r = w.inv();
        let f1 = f0 * r;
        [f0, f1, (2.0 + f1) * r]
    }
}

// `q_minus`, `q_plus` must be accurate endpoint values; they pin down the
// factors 1 ∓ w of a root close to ±1, which cannot be formed by
// subtraction without losing most digits.
fn moments_of(qd: Quadratic, q_minus: f64, q_plus: f64, min_q: f64) -> QMoments {
    let Quadratic { a, bp, c } = qd;
    let pack = |j: [f64; 3]| QMoments { j0: j[0], j1: j[1], j2: j[2], q_minus, q_plus, min_q };
    if a == 0.0 && bp == 0.0 {
        return pack([2.0 / c, 0.0, 2.0 / (3.0 * c)]);
    }
    let disc = bp * bp - 4.0 * a * c;
    let scale = (bp * bp).max((4.0 * a * c).abs());
    if disc.abs() < TIE_REL * scale {
        // coincident roots at r = −bp/(2a), outside [−1, 1]
        let w = -2.0 * a / bp;
        let w2 = w * w;
        let (g1, g2) = if w.abs() < SERIES_RADIUS {
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            let mut p = w2;
            for k in 1..13 {
                let kk = k as f64;
                s1 += 2.0 * (2.0 * kk) / (2.0 * kk + 1.0) * p * w;
                s2 += 2.0 * (2.0 * kk - 1.0) / (2.0 * kk + 1.0) * p;
                p *= w2;
            }
            (s1, s2)
        } else {
            let t = libm::atanh(w) / w;
            (-2.0 * libm::atanh(w) + 2.0 * w / (1.0 - w2), 2.0 - 4.0 * t + 2.0 / (1.0 - w2))
        };
        return pack([2.0 * w2 / (a * (1.0 - w2)), g1 / a, g2 / a]);
    }
    if disc > 0.0 {
        let sd = libm::sqrt(disc);
        let dp = -bp + sd;
        let dm = -bp - sd;
        let (wp, wm) = if dp.abs() >= dm.abs() {
            (2.0 * a / dp, dp / (2.0 * c))
        } else {
            (dm / (2.0 * c), 2.0 * a / dm)
        };
        // q(1) = c(1 − w₊)(1 − w₋), q(−1) = c(1 + w₊)(1 + w₋)
        let (mut ap, mut am) = (1.0 - wp, 1.0 - wm);
        if ap < am {
            ap = q_plus / c / am;
        } else {
            am = q_plus / c / ap;
        }
        let (mut bp_, mut bm) = (1.0 + wp, 1.0 + wm);
        if bp_ < bm {
            bp_ = q_minus / c / bm;
        } else {
            bm = q_minus / c / bp_;
        }
        let fp = pieces_real(wp, libm::log(ap) - libm::log(bp_));
        let fm = pieces_real(wm, libm::log(am) - libm::log(bm));
        pack([(fp[0] - fm[0]) / sd, (fp[1] - fm[1]) / sd, (fp[2] - fm[2]) / sd])
    } else {
        let s = libm::sqrt(-disc);
        let wp = Complex64::new(2.0 * a, 0.0) / Complex64::new(-bp, s);
        // |1 − r|² = q(1)/a and |1 + r|² = q(−1)/a fix the real part
        let re = 0.5 * (libm::log(q_plus) - libm::log(q_minus));
        let one = Complex64::new(1.0, 0.0);
        let im = if wp.norm() < 1.0 {
            (one - wp).arg() - (one + wp).arg()
        } else {
            let r = wp.inv();
            (one - r).arg() - (-one - r).arg()
        };
        let f = pieces_complex(wp, Complex64::new(re, im));
        pack([2.0 * f[0].im / s, 2.0 * f[1].im / s, 2.0 * f[2].im / s])
    }
}

/// The three moments of `1/q`, or `NearBoundary` when `min q < BOUNDARY_TOL`.
pub fn q_moments(theta: ThetaPair, params: RateParams) -> Result<QMoments> {
    let k = KernelQ::new(theta, params);
    let min_q = k.min_on_interval();
    if !(min_q >= BOUNDARY_TOL) {
        return Err(Error::NearBoundary { min_q });
    }
    let (qm, qp) = k.endpoints();
    Ok(moments_of(k.coeffs(), qm, qp, min_q))
}

/// `∫₋₁¹ dy/q(y)`.
pub fn integral_inv_q(theta: ThetaPair, params: RateParams) -> Result<f64> {
    Ok(q_moments(theta, params)?.j0)
}

/// `∫₋₁¹ y dy/q(y)`.
pub fn integral_y_over_q(theta: ThetaPair, params: RateParams) -> Result<f64> {
    Ok(q_moments(theta, params)?.j1)
}

/// Value, gradient and Legendre value of `c` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgfPoint {
    pub c: f64,
    pub grad: [f64; 2],
    pub k: f64,
}

impl CgfPoint {
    /// Membership in the constraint set `G = {∂c/∂θ₁ ≤ 0, ∂c/∂θ₂ ≥ 0}`.
    pub fn in_g(&self) -> bool {
        self.grad[0] <= 0.0 && self.grad[1] >= 0.0
    }
}

pub fn evaluate(theta: ThetaPair, params: RateParams) -> Result<CgfPoint> {
    let m = q_moments(theta, params)?;
    let b = KernelQ::new(theta, params).b;
    let c = 2.0 - 0.5 * (libm::log(m.q_minus) + libm::log(m.q_plus)) + theta.theta2 * m.j1 - b * m.j0;
    let g1 = (1.0 - params.x) * m.j0 - m.j2;
    let g2 = m.j1 - params.eps * m.j0;
    let k = -1.0 + 0.5 * m.j0 - c;
    Ok(CgfPoint { c, grad: [g1, g2], k })
}

/// `c(θ) = −½ ∫₋₁¹ ln q(y) dy`.
pub fn cgf(theta: ThetaPair, params: RateParams) -> Result<f64> {
    Ok(evaluate(theta, params)?.c)
}

/// `(∂c/∂θ₁, ∂c/∂θ₂) = (∫(1 − x − y²)/q, ∫(y − ε)/q)`.
pub fn grad_c(theta: ThetaPair, params: RateParams) -> Result<[f64; 2]> {
    Ok(evaluate(theta, params)?.grad)
}

/// `k(θ) = −1 + ½∫1/q + ½∫ln q`, equal to `θ·∇c − c`.
pub fn k_value(theta: ThetaPair, params: RateParams) -> Result<f64> {
    Ok(evaluate(theta, params)?.k)
}

/// `H(θ₁) = −1 + ½∫1/q` on the axis `θ₂ = 0`; only `x` enters.
pub fn h_axis(theta1: f64, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(invalid("x must lie in (0, 1]"));
    }
    let b = 1.0 - 2.0 * theta1 * (1.0 - x);
    let qd = Quadratic { a: 2.0 * theta1, bp: 0.0, c: b };
    let qe = libm::fma(2.0 * x, theta1, 1.0);
    let min_q = if theta1 > 0.0 { b.min(qe) } else { qe.min(b) };
    if !(min_q >= BOUNDARY_TOL) {
        return Err(Error::NearBoundary { min_q });
    }
    Ok(-1.0 + 0.5 * moments_of(qd, qe, qe, min_q).j0)
}

/// On the axis, `θ₁ ∈ (P, 0)` is parametrized by `t = s − 1` with
/// `s² = 1/(−2θ₁) + 1 − x`; `t → 0` at `P` and `t → ∞` at the origin.
pub fn theta1_of_t(t: f64, x: f64) -> f64 {
    -0.5 / (t * t + 2.0 * t + x)
}

pub fn t_of_theta1(theta1: f64, x: f64) -> f64 {
    libm::sqrt(-0.5 / theta1 + 1.0 - x) - 1.0
}

// ln((2 + t)/t) from ln t, safe when t underflows
fn log_ratio(ln_t: f64) -> f64 {
    let t = libm::exp(ln_t);
    if ln_t < 0.0 {
        libm::log(2.0 + t) - ln_t
    } else {
        libm::log1p(2.0 / t)
    }
}

/// `H` as a function of `ln t`.
pub fn h_of_ln_t(ln_t: f64, x: f64) -> f64 {
    let t = libm::exp(ln_t);
    (t * t + 2.0 * t + x) / (2.0 * (1.0 + t)) * log_ratio(ln_t) - 1.0
}

/// `−c(θ₁(t), 0)` as a function of `ln t`.
pub fn neg_c_of_ln_t(ln_t: f64, x: f64) -> f64 {
    let t = libm::exp(ln_t);
    t * log_ratio(ln_t) + 2.0 * libm::log(2.0 + t) - 2.0 - libm::log(t * t + 2.0 * t + x)
}

/// `k(θ₁(t), 0) = H − c` as a function of `ln t`.
pub fn k_axis_of_ln_t(ln_t: f64, x: f64) -> f64 {
    h_of_ln_t(ln_t, x) + neg_c_of_ln_t(ln_t, x)
}

/// The nontrivial negative root `Q` of `H`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QRoot {
    pub theta1: f64,
    /// Transformed root; may underflow to zero for small `x`, see `ln_t`.
    pub t: f64,
    pub ln_t: f64,
    /// `Q − P`, computed from `t` without cancellation.
    pub gap: f64,
    /// `H` at the returned root.
    pub residual: f64,
    /// `ln t − ln(2 + t) + 2(t + 1)/(t² + 2t + x)`, the log form of the
    /// fixed-point equation `t = (2 + t)·exp{−2(t + 1)/(t² + 2t + x)}`.
    pub fixed_point_residual: f64,
}

/// Root of `H` in `(P, 0)` by bisection in `ln t`, refined until
/// `|H| < 10⁻¹²` or the bracket stops shrinking.
pub fn solve_q(x: f64) -> Result<QRoot> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(invalid("x must lie in (0, 1]"));
    }
    if x >= 2.0 / 3.0 {
        return Err(Error::NoRoot { x });
    }
    // H > 0 near P: H ≈ (x/2)(ln 2 − ln t) − 1
    let mut lo = -(4.0 / x + 50.0);
    let mut hi = 0.0;
    while h_of_ln_t(hi, x) >= 0.0 {
        hi += 2.0;
        if hi > 40.0 {
            return Err(Error::NoRoot { x });
        }
    }
    if h_of_ln_t(lo, x) <= 0.0 {
        return Err(Error::Numerical(alloc::string::String::from("H not positive near P")));
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..400 {
        mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let h = h_of_ln_t(mid, x);
        if h.abs() < 1e-12 {
            break;
        }
        if h > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ln_t = mid;
    let t = libm::exp(ln_t);
    let denom = t * t + 2.0 * t + x;
    Ok(QRoot {
        theta1: -0.5 / denom,
        t,
        ln_t,
        gap: (t * t + 2.0 * t) / (2.0 * x * denom),
        residual: h_of_ln_t(ln_t, x),
        fixed_point_residual: ln_t - libm::log(2.0 + t) + 2.0 * (t + 1.0) / denom,
    })
}
