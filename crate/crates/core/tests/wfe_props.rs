use proptest::prelude::*;
use squimld_core::wfe::*;
use squimld_core::Error;

fn base() -> WfeParams {
    WfeParams::new(1.2, 0.1).unwrap()
}

/// Plain midpoint rule, only valid well inside the admissible range.
fn p_midpoint(theta: f64, p: WfeParams, panels: usize) -> f64 {
    let h = 2.0 / panels as f64;
    let s: f64 = (0..panels).map(|i| (1.0 - 2.0 * theta * a_of_x(-1.0 + (i as f64 + 0.5) * h, p)).ln()).sum();
    -0.25 * s * h
}

#[test]
fn p_matches_midpoint_oracle() {
    let p = base();
    for theta in [-0.5, 0.3, 2.0, 7.5] {
        let a = p_theta(theta, p).unwrap();
        let b = p_midpoint(theta, p, 400_000);
        assert!((a - b).abs() < 1e-9, "theta {theta}: {a} vs {b}");
    }
    assert_eq!(p_theta(0.0, p).unwrap(), 0.0);
}

#[test]
fn pbar_star_against_grid_minimum() {
    let p = base();
    let (lo, hi) = theta_range(p);
    let grid_min = (1..4000)
        .map(|i| lo + (hi - lo) * i as f64 / 4000.0)
        .map(|t| p_midpoint(t, p, 40_000))
        .fold(f64::INFINITY, f64::min);
    let r = pbar_star(p);
    assert!((r.p_star_inf + grid_min).abs() < 1e-5, "{} vs {}", r.p_star_inf, -grid_min);
    assert!((r.p_star_inf - 0.340009881859644).abs() < 1e-9);
    assert!(r.p_star_inf > 0.0);
}

#[test]
fn range_edges() {
    let p = base();
    let (lo, hi) = theta_range(p);
    assert!(lo < 0.0 && hi > 0.0);
    let a = p_theta(hi * 0.999, p).unwrap();
    let b = p_theta(hi * 0.9999, p).unwrap();
    assert!(a.is_finite() && b.is_finite() && (a - b).abs() < 0.5);
    assert!(matches!(p_theta(hi * 1.01, p), Err(Error::OutOfThetaRange { .. })));
    assert!(matches!(p_theta(lo * 1.01, p), Err(Error::OutOfThetaRange { .. })));
}

#[test]
fn derivative_increases() {
    let p = base();
    let (lo, hi) = theta_range(p);
    let h = 1e-4;
    let d: Vec<f64> = (1..60)
        .map(|i| lo + (hi - lo) * i as f64 / 60.0)
        .map(|t| (p_theta(t + h, p).unwrap() - p_theta(t - h, p).unwrap()) / (2.0 * h))
        .collect();
    assert!(d.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn conjugate_properties() {
    let p = base();
    let m = mean(p);
    assert!(p_star(m, p) < 1e-6);
    let ys: Vec<f64> = (0..50).map(|i| -0.8 + 1.2 * i as f64 / 49.0).collect();
    let v: Vec<f64> = ys.iter().map(|&y| p_star(y, p)).collect();
    assert!(v.iter().all(|&x| x >= -1e-12));
    for i in 1..49 {
        assert!(v[i] <= 0.5 * (v[i - 1] + v[i + 1]) + 1e-9, "midpoint at {}", ys[i]);
    }
}

#[test]
fn hypotheses_and_bound() {
    assert!(matches!(beta_critical(WfeParams::new(1.35, 0.1).unwrap()), Err(Error::HypothesisFails(_))));
    for omega in [1.05, 1.2, 1.3] {
        assert!(check_hypotheses(WfeParams::new(omega, 0.24).unwrap()).ok(), "omega {omega}");
    }
    let p = base();
    assert!((eps_bound(p) - 0.25 * (1.0 + (1.0f64 / 3.0).sqrt()).powi(2)).abs() < 1e-15);
    let c = beta_critical(p).unwrap();
    assert!((c.beta_c * 0.2 * 0.1 - c.pstar.p_star_inf).abs() < 1e-13);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_inequality(y in -0.6..0.4f64, u in 0.01..0.99f64) {
        let p = base();
        let (lo, hi) = theta_range(p);
        let t = lo + u * (hi - lo);
        prop_assert!(p_star(y, p) >= t * y - p_theta(t, p).unwrap() - 1e-10);
    }
}
