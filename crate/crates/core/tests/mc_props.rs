use squimld_core::exec::Sequential;
use squimld_core::mc::*;

#[test]
fn magnetized_fraction_non_increasing_in_eps() {
    for sampler in [Sampler::Direct, Sampler::Metropolis(MetropolisConfig::default())] {
        let mut last = f64::INFINITY;
        for eps in [0.0, 0.05, 0.1, 0.2, 0.4, 0.8] {
            let mut cfg = EnsembleConfig::new(8, 2.0, Model::Scwm, 20_000, 9);
            cfg.eps = eps;
            cfg.sampler = sampler;
            let v = thermal_average(&cfg, Observable::MagnetizedFraction, &Sequential).unwrap().mean;
            assert!(v <= last, "{sampler:?} eps {eps}: {v} > {last}");
            last = v;
        }
    }
}

#[test]
fn shard_results_are_reproducible() {
    let cfg = EnsembleConfig::new(6, 1.5, Model::ScwmEntropy, 6_400, 4);
    let a = thermal_averages(&cfg, &Observable::ALL, &Sequential).unwrap();
    let b = thermal_averages(&cfg, &Observable::ALL, &Sequential).unwrap();
    assert_eq!(a, b);
    assert!(a.iter().all(|e| e.std_error >= 0.0 && e.n_samples > 0));
}

#[test]
fn squim_small_chain_infinite_temperature() {
    // β = 0: uniform on the sphere of real dimension d = 2^{N+1}.
    let n = 3;
    let d = (2usize << n) as f64;
    let mut cfg = EnsembleConfig::new(n, 0.0, Model::SquimD1, 200_000, 2);
    cfg.sampler = Sampler::Direct;
    let e = thermal_average(&cfg, Observable::Msq, &Sequential).unwrap();
    // per-configuration magnetization with S_i = ±½
    let g: Vec<f64> = (0..1usize << n).map(|c| (c.count_ones() as f64 - 0.5 * n as f64) / n as f64).collect();
    let s1: f64 = g.iter().sum();
    let s2: f64 = g.iter().map(|x| x * x).sum();
    // E|ψ_c|⁴ = 8/(d(d+2)) and E|ψ_c|²|ψ_c'|² = 4/(d(d+2)) for c ≠ c'.
    let exact = 4.0 * (s2 + s1 * s1) / (d * (d + 2.0));
    assert!((e.mean - exact).abs() < 4.0 * e.std_error, "{} ± {} vs {exact}", e.mean, e.std_error);
}

#[test]
fn large_beta_msq_decreases_with_n() {
    let run = |n| thermal_average(&EnsembleConfig::new(n, 40.0, Model::Scwm, 20_000, 1), Observable::Msq, &Sequential).unwrap();
    let (a, b, c) = (run(8), run(32), run(128));
    assert!(a.mean > b.mean && b.mean > c.mean, "{} {} {}", a.mean, b.mean, c.mean);
    assert!(a.mean - c.mean >= 3.0 * a.std_error.hypot(c.std_error));
}
