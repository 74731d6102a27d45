mod common;

use common::random_network;
use loadstab_core::graph::{gershgorin_discs, in_disc_union, DiscMode};
use loadstab_core::spectral::greedy_match_distance;
use loadstab_core::{assemble_jacobian, eigenvalues, in_laplacian, tol, JacobianSpec};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn laplacian_annihilates_ones(n in 1usize..30, p in 0.0f64..1.0, weighted: bool, seed: u64) {
        let lap = in_laplacian(&random_network(n, p, weighted, seed));
        prop_assert!(lap.kernel_residual() < tol::KERNEL);
    }

    #[test]
    fn laplacian_spectrum_in_closed_right_half_plane(n in 1usize..30, p in 0.0f64..1.0, weighted: bool, seed: u64) {
        let lap = in_laplacian(&random_network(n, p, weighted, seed));
        let s = eigenvalues(lap.matrix()).unwrap();
        prop_assert!(s.min_real().unwrap() >= -tol::CONTAINMENT);
        prop_assert!(s.eigenvalues().iter().any(|z| z.norm() < tol::CONTAINMENT));
        prop_assert!(s.conjugate_pairing_error() < 1e-9);
    }

    #[test]
    fn eigenvalues_lie_in_both_disc_unions(n in 1usize..25, seed: u64) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
        let rows = gershgorin_discs(&m, DiscMode::Rows).unwrap();
        let cols = gershgorin_discs(&m, DiscMode::Columns).unwrap();
        for &z in eigenvalues(&m).unwrap().eigenvalues() {
            prop_assert!(in_disc_union(&rows, z, tol::CONTAINMENT));
            prop_assert!(in_disc_union(&cols, z, tol::CONTAINMENT));
        }
    }
}

#[test]
fn spectral_shift_law() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for draw in 0..200 {
        let n = rng.random_range(1..20);
        // Unit-weight digraphs can have defective eigenvalues, which no
        // backward-stable solver resolves beyond ε^(1/k); use weighted
        // digraphs and symmetric unit-weight graphs instead.
        let p = rng.random_range(0.05..0.8);
        let net = if draw % 2 == 0 {
            random_network(n, p, true, rng.random())
        } else {
            common::random_connected(n, p, rng.random())
        };
        let lap = in_laplacian(&net);
        let fprime_r = rng.random_range(-3.0..3.0);
        let gamma = rng.random_range(-3.0..3.0);
        let lam = eigenvalues(lap.matrix()).unwrap();
        let predicted: Vec<Complex64> = lam.eigenvalues().iter().map(|l| fprime_r - gamma * l).collect();
        let jac = assemble_jacobian(&JacobianSpec {
            fprime_r,
            gamma,
            laplacian: lap,
        })
        .unwrap();
        let got = eigenvalues(&jac).unwrap();
        let d = greedy_match_distance(got.eigenvalues(), &predicted).unwrap();
        assert!(d < 1e-7, "draw {draw}: distance {d}");
    }
}

#[test]
fn laplacian_column_discs_are_tangent_to_imaginary_axis() {
    for seed in 0..50 {
        let lap = in_laplacian(&random_network(12, 0.3, true, seed));
        for d in gershgorin_discs(lap.matrix(), DiscMode::Columns).unwrap() {
            assert!(d.center >= 0.0);
            assert!((d.center - d.radius).abs() < tol::KERNEL);
        }
    }
}

#[test]
fn large_laplacian_spectrum() {
    let net = random_network(300, 0.02, false, 77);
    let lap = in_laplacian(&net);
    let s = eigenvalues(lap.matrix()).unwrap();
    assert_eq!(s.source_dim(), 300);
    assert!(s.min_real().unwrap() >= -tol::CONTAINMENT);
    let trace: f64 = lap.matrix().trace();
    let sum: f64 = s.eigenvalues().iter().map(|z| z.re).sum();
    assert!((trace - sum).abs() < 1e-8 * trace.max(1.0));
}
