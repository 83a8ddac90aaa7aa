//! Oracle suite behind `squimld validate`. The individual checks are
//! public so the acceptance harness can call them with its own budgets.

use squimld_core::ensemble;
use squimld_core::exec::{shard_rng, ShardExecutor};
use squimld_core::ge::{self, KernelQ, RateParams, ThetaPair};
use squimld_core::lemmas::{self, SphereExample};
use squimld_core::mc::{self, EnsembleConfig, Model, Observable, Sampler};
use squimld_core::quad::trapezoid;
use squimld_core::rate::{self, SamplerBias, RayOrigin};
use squimld_core::wfe::{self, WfeParams};

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, detail }
    }
}

/// Worst relative error of the analytic gradient against centered
/// differences of `c` over `points` random interior points of `D`.
pub fn gradient_consistency(x: f64, eps: f64, points: usize, seed: u64) -> Result<f64, squimld_core::Error> {
    let p = RateParams::new(x, eps)?;
    let mut rng = shard_rng(seed, 0);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < points {
        let Some(th) = rate::sample_domain_point(&mut rng, p, SamplerBias::UNIFORM, RayOrigin::PointP) else {
            continue;
        };
        // keep the stencil well inside D
        if KernelQ::new(th, p).min_on_interval() < 1e-2 {
            continue;
        }
        let g = ge::grad_c(th, p)?;
        let h = 1e-6;
        let c = |a: f64, b: f64| ge::cgf(ThetaPair::new(th.theta1 + a, th.theta2 + b), p);
        let fd = [(c(h, 0.0)? - c(-h, 0.0)?) / (2.0 * h), (c(0.0, h)? - c(0.0, -h)?) / (2.0 * h)];
        let scale = g[0].abs().max(g[1].abs()).max(1e-6);
        worst = worst.max((fd[0] - g[0]).abs().max((fd[1] - g[1]).abs()) / scale);
        done += 1;
    }
    Ok(worst)
}

/// Fixed points on both discriminant branches at `x = 0.4`, `ε = 0.2`.
pub const QUADRATURE_POINTS: [(f64, f64); 6] = [(-0.7, 0.2), (-0.3, -0.2), (0.0, 0.3), (0.6, 0.1), (0.3, -0.2), (0.5, 0.0)];

/// Worst absolute difference of `∫1/q` and `c` against the trapezoid rule,
/// together with the discriminant signs seen.
pub fn quadrature_equivalence(panels: usize) -> Result<(f64, bool, bool), squimld_core::Error> {
    let p = RateParams::new(0.4, 0.2)?;
    let mut worst: f64 = 0.0;
    let (mut pos, mut neg) = (false, false);
    for (a, b) in QUADRATURE_POINTS {
        let th = ThetaPair::new(a, b);
        let k = KernelQ::new(th, p);
        if k.discriminant() > 0.0 {
            pos = true;
        } else {
            neg = true;
        }
        let j0 = trapezoid(|y| 1.0 / k.eval(y), -1.0, 1.0, panels);
        let c = -0.5 * trapezoid(|y| k.eval(y).ln(), -1.0, 1.0, panels);
        worst = worst.max((ge::integral_inv_q(th, p)? - j0).abs()).max((ge::cgf(th, p)? - c).abs());
    }
    Ok((worst, pos, neg))
}

fn check_result<T>(name: &str, r: Result<T, squimld_core::Error>, f: impl FnOnce(T) -> (bool, String)) -> Check {
    match r {
        Ok(v) => {
            let (ok, d) = f(v);
            Check::new(name, ok, d)
        }
        Err(e) => Check::new(name, false, format!("error: {e}")),
    }
}

pub fn run_suite<E: ShardExecutor>(full: bool, seed: u64, exec: &E) -> Vec<Check> {
    let mut out = Vec::new();
    let panels = if full { 1_000_000 } else { 100_000 };
    out.push(check_result("quadrature", quadrature_equivalence(panels), |(e, pos, neg)| {
        (e < 1e-6 && pos && neg, format!("max abs error {e:.3e} over {panels} panels"))
    }));
    let pts = if full { 100 } else { 10 };
    let mut worst: f64 = 0.0;
    let mut err = None;
    for x in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7] {
        for eps in [0.1, 0.3] {
            match gradient_consistency(x, eps, pts, seed) {
                Ok(w) => worst = worst.max(w),
                Err(e) => err = Some(e),
            }
        }
    }
    out.push(match err {
        Some(e) => Check::new("gradient", false, format!("error: {e}")),
        None => Check::new("gradient", worst < 1e-4, format!("max rel error {worst:.3e}, {pts} points per (x, eps)")),
    });
    let samples = if full { 1_000_000 } else { 100_000 };
    for n in [2, 8] {
        let mut cfg = EnsembleConfig::new(n, 0.0, Model::Scwm, samples, seed);
        cfg.sampler = Sampler::Direct;
        let exact = mc::infinite_t_msq_exact(n).unwrap_or(f64::NAN);
        out.push(check_result(&format!("infinite_T_msq_N{n}"), mc::thermal_average(&cfg, Observable::Msq, exec), |e| {
            let z = (e.mean - exact) / e.std_error;
            (z.abs() < 4.0, format!("{:.6} vs {exact:.6} ({z:+.2} se)", e.mean))
        }));
    }
    out.push(check_result("esm_N2", mc::esm_evaluate(2, 1.0), |r| {
        let ok = (r.log_z_hat - 2.0 * (8.0f64 / 9.0).ln()).abs() < 1e-12 && (r.msq_dispersion - 1.0 / 32.0).abs() < 1e-15;
        (ok, format!("logZhat {:.12}, dispersion {:.12}", r.log_z_hat, r.msq_dispersion))
    }));
    out.push(check_result(
        "ising_N2",
        ensemble::ising_log_z_enumerated(2, 0.9, 0.3).map(|e| (e, ensemble::ising_log_z(2, 0.9, 0.3))),
        |(e, t)| ((e - t).abs() < 1e-10, format!("{t:.12} vs {e:.12}")),
    ));
    let c = lemmas::uif_circle();
    out.push(Check::new("uif_circle", (c.lhs - c.rhs).abs() < 1e-4, format!("lhs {:.10}, rhs {:.10}", c.lhs, c.rhs)));
    let a = lemmas::uif_arc();
    out.push(Check::new("uif_arc", (a.lhs - a.rhs).abs() < 1e-4, format!("lhs {:.10}, rhs {:.10}", a.lhs, a.rhs)));
    out.push(check_result("concentration", SphereExample { kappa: 40.0, z_u: 0.5, z_v: 0.9 }.check(), |c| {
        (c.holds(), format!("|xi| {:.3e} <= {:.3e}", c.xi.abs(), c.bound * c.g_norm))
    }));
    out.push(check_result("wfe_bound", WfeParams::new(1.2, 0.1).and_then(wfe::beta_critical), |b| {
        let ok = (b.hypotheses.eps_bound - 0.622).abs() < 1e-3 && b.pstar.p_star_inf > 0.0;
        (ok, format!("eps bound {:.5}, p_bar* {:.6}, beta_c {:.4}", b.hypotheses.eps_bound, b.pstar.p_star_inf, b.beta_c))
    }));
    out.push(Check::new("i1_zero_above_two_thirds", rate::i1_at(0.7) == 0.0, format!("I1(0.7) = {}", rate::i1_at(0.7))));
    let mut rng = shard_rng(seed, 1);
    let v = ensemble::sample_sphere(10, &mut rng);
    let norm: f64 = v.iter().map(|x| x * x).sum();
    out.push(Check::new("sphere_norm", (norm - 1.0).abs() < 1e-12, format!("|u|^2 - 1 = {:.1e}", norm - 1.0)));
    out
}
