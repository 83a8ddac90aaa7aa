use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use squimld_core::ensemble::*;

fn state(n: usize, re_im: &[f64]) -> SymmetricWavefunction {
    let head = &re_im[..2 * (n + 1)];
    let norm = head.iter().map(|x| x * x).sum::<f64>().sqrt();
    let v: Vec<f64> = head.iter().map(|x| x / norm).collect();
    SymmetricWavefunction::from_reals(&v).unwrap()
}

#[test]
fn curie_weiss_identity_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..10_000 {
        let n = 2 + i % 40;
        let phi = SymmetricWavefunction::from_reals(&sample_sphere(2 * (n + 1), &mut rng)).unwrap();
        let (m, d) = (magnetization(&phi), dispersion(&phi));
        assert!((energy_cw(&phi) + n as f64 * (m * m + d)).abs() < 1e-10);
        assert!(d >= 0.0);
        assert!((phi.weights().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn dispersion_vanishes_only_on_single_sectors() {
    for n in [2, 5, 16] {
        for k in 0..=n {
            let b = SymmetricWavefunction::basis(n, k);
            assert_eq!(dispersion(&b), 0.0);
            assert_eq!(magnetization(&b), g(n, k));
        }
        assert!((dispersion(&SymmetricWavefunction::cat(n)) - 1.0).abs() < 1e-15);
        let two = SymmetricWavefunction::from_weights(&{
            let mut w = vec![0.0; n + 1];
            w[0] = 0.5;
            w[1] = 0.5;
            w
        })
        .unwrap();
        assert!(dispersion(&two) > 0.0);
    }
}

#[test]
fn classical_chain_is_flip_symmetric() {
    for n in [2, 3, 10, 200] {
        let c = classical_ising_1d(n, 0.7, 0.0).unwrap();
        assert!(c.mean_m.abs() < 1e-6, "N={n}: {}", c.mean_m);
        assert!(c.var_m > 0.0);
    }
    for n in [2, 3, 7] {
        let a = ising_log_z(n, 0.4, 0.3);
        let b = ising_log_z_enumerated(n, 0.4, 0.3).unwrap();
        assert!((a - b).abs() < 1e-10, "N={n}: {a} vs {b}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn phase_rotation_invariance(re_im in prop::collection::vec(-1.0..1.0f64, 2 * 13), alpha in 0.0..6.3f64, n in 2usize..12) {
        prop_assume!(re_im[..2 * (n + 1)].iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let phi = state(n, &re_im);
        let rot = Complex64::from_polar(1.0, alpha);
        let psi = SymmetricWavefunction::new(phi.amplitudes().iter().map(|a| a * rot).collect()).unwrap();
        prop_assert!((magnetization(&phi) - magnetization(&psi)).abs() < 1e-12);
        prop_assert!((dispersion(&phi) - dispersion(&psi)).abs() < 1e-12);
    }

    #[test]
    fn spin_flip(re_im in prop::collection::vec(-1.0..1.0f64, 2 * 13), n in 2usize..12) {
        prop_assume!(re_im[..2 * (n + 1)].iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let phi = state(n, &re_im);
        let flipped = SymmetricWavefunction::new(phi.amplitudes().iter().rev().copied().collect()).unwrap();
        prop_assert!((magnetization(&phi) + magnetization(&flipped)).abs() < 1e-12);
        prop_assert!((dispersion(&phi) - dispersion(&flipped)).abs() < 1e-12);
        prop_assert!((energy_cw(&phi) - energy_cw(&flipped)).abs() < 1e-12);
    }
}
