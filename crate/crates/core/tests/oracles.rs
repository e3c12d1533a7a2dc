mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use qgraph::edge::{self, EdgePotential};
use qgraph::graph::GraphBuilder;
use qgraph::linalg::CVector;
use qgraph::mfunction::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn all_eigenvalues(scan: &SpectrumScan) -> Vec<f64> {
    let mut v: Vec<f64> = scan.eigenvalues.iter().map(|e| e.energy).collect();
    v.extend(&scan.dirichlet_coincident);
    distinct(v, 1e-6)
}

fn assert_close_lists(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len(), "got {got:?}, want {want:?}");
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= tol, "got {got:?}, want {want:?}");
    }
}

#[test]
fn shooting_oracle_reproduces_closed_forms() {
    let want: Vec<f64> = (0..4).map(|k| (k as f64 * PI).powi(2)).collect();
    assert_close_lists(&shooting_eigenvalues(&interval(), (-1.0, 90.0), 0.05), &want, 1e-7);
}

#[test]
fn robin_interval_against_shooting() {
    let mut b = GraphBuilder::new(0.0, 0.0);
    let p = b.vertex(0.0, 0.0, -2.0);
    let q = b.vertex(1.0, 0.0, -2.0);
    b.edge(p, q);
    let g = b.build().unwrap();
    let oracle = shooting_eigenvalues(&g, (-10.0, 30.0), 0.02);
    assert!(oracle.iter().any(|e| e.abs() < 1e-7));
    let scan = scan_spectrum(&g, &CouplingMatrix::from_graph(&g), (-10.0, 30.0), 0.01).unwrap();
    assert_close_lists(&all_eigenvalues(&scan), &oracle, 1e-7);
    assert!(spectral_condition(&g, &CouplingMatrix::from_graph(&g), 0.0).unwrap().in_spectrum);
}

#[test]
fn star_and_cycle_against_shooting() {
    let zero = EdgePotential::zero(1.0).unwrap();
    let cases = [
        three_star(zero.clone(), 0.0, 0.0),
        three_star(EdgePotential::constant(1.5, 1.0).unwrap(), 1.7, 0.6),
        four_cycle(zero.clone(), 0.0, 0.0, 0.0),
        four_cycle(zero.clone(), 0.4, 2.3, 0.9),
    ];
    for g in &cases {
        let window = (-3.0, 45.0);
        let oracle = shooting_eigenvalues(g, window, 0.02);
        assert!(oracle.len() >= 5);
        let scan = scan_spectrum(g, &CouplingMatrix::from_graph(g), window, 0.01).unwrap();
        assert_close_lists(&all_eigenvalues(&scan)[..5], &oracle[..5], 1e-7);
    }
}

#[test]
fn cycle_reconstruction_matches_closed_form() {
    // On the unit square cycle, cos(pi s / 2) in arc length s is an
    // eigenfunction at E = pi^2/4 with vertex values 1, 0, -1, 0.
    let g = four_cycle(EdgePotential::zero(1.0).unwrap(), 0.0, 0.0, 0.0);
    let e = PI * PI / 4.0;
    let one = Complex64::from(1.0);
    let zero = Complex64::from(0.0);
    let xi = CVector::from_vec(vec![one, zero, zero, zero, -one, zero, zero, zero]);
    let f = reconstruct_eigenfunction(&g, e, &xi, 51).unwrap();
    for (k, es) in f.edges.iter().enumerate() {
        for (t, v) in es.ts.iter().zip(&es.values) {
            let want = (PI * (k as f64 + t) / 2.0).cos();
            assert!((v[0] - want).norm() < 1e-12 && v[1].norm() < 1e-12);
        }
    }
    let bad = CVector::from_vec(vec![one, zero, one, zero, -one, zero, zero, zero]);
    assert!(reconstruct_eigenfunction(&g, e, &bad, 51).is_err());
}

#[test]
fn cycle_eigenfunction_reconstruction() {
    let g = four_cycle(EdgePotential::zero(1.0).unwrap(), 0.0, 1.1, 0.7);
    let scan = scan_spectrum(&g, &CouplingMatrix::from_graph(&g), (0.5, 12.0), 0.01).unwrap();
    let ev = &scan.eigenvalues[0];
    let cond = spectral_condition_with_tol(&g, &CouplingMatrix::from_graph(&g), ev.energy, 1e-6).unwrap();
    assert!(!cond.kernel_basis.is_empty());
    let f = reconstruct_eigenfunction(&g, ev.energy, &cond.kernel_basis[0], 201).unwrap();
    assert!(f.continuity_defect(&g) < 1e-8);
    assert!(f.ode_residual < 1e-3, "{}", f.ode_residual);
}

#[test]
fn reduction_matches_scan_on_even_cycle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pot = random_even_potential(&mut rng, 8.0, 16);
    for &(field, k_r) in &[(0.0, 0.0), (1.3, 0.8)] {
        let eps = 0.35;
        let g = four_cycle(pot.clone(), 2.0 * eps, field, k_r);
        let window = (-2.0, 40.0);
        let scan = scan_spectrum(&g, &CouplingMatrix::from_graph(&g), window, 0.01).unwrap();
        let delta: Vec<SpectralSet> = distinct(discrete_spectrum(&g), 1e-9).into_iter().map(SpectralSet::Point).collect();
        let reduced = discrete_reduction_spectrum(&pot, eps, k_r, &delta, window, 0.01).unwrap();
        // The identity holds away from the Dirichlet spectrum of the edge.
        let reduced: Vec<f64> = reduced
            .into_iter()
            .map(|r| r.0)
            .filter(|e| scan.dirichlet_points.iter().all(|d| (d - e).abs() > 1e-6))
            .collect();
        let scanned: Vec<f64> = scan.eigenvalues.iter().map(|e| e.energy).collect();
        assert_close_lists(&scanned, &reduced, 1e-7);
    }
}

#[test]
fn gauge_shift_leaves_scan_unchanged() {
    let g = four_cycle(EdgePotential::zero(1.0).unwrap(), 0.0, 0.9, 0.5);
    let shifted = g.clone().with_gauge(vec![0.3, -1.2, 2.0, 0.7]).unwrap();
    let window = (-1.0, 30.0);
    let a = scan_spectrum(&g, &CouplingMatrix::zeros(4), window, 0.01).unwrap();
    let b = scan_spectrum(&shifted, &CouplingMatrix::zeros(4), window, 0.01).unwrap();
    let ea: Vec<f64> = a.eigenvalues.iter().map(|e| e.energy).collect();
    let eb: Vec<f64> = b.eigenvalues.iter().map(|e| e.energy).collect();
    assert_close_lists(&ea, &eb, 1e-8);
}

#[test]
fn edge_closed_forms() {
    let zero = EdgePotential::zero(1.0).unwrap();
    let s = edge::solve_fundamental(&zero, PI * PI / 4.0).unwrap();
    assert!((s.s - 2.0 / PI).abs() < 1e-15 && s.c.abs() < 1e-15 && s.s_prime.abs() < 1e-15);
    assert!((s.c_prime + PI / 2.0).abs() < 1e-14);
    let k = EdgePotential::constant(5.0, 1.0).unwrap();
    let s = edge::solve_fundamental(&k, 5.0).unwrap();
    assert!((s.s - 1.0).abs() < 1e-15 && (s.c - 1.0).abs() < 1e-15);
    assert!((edge::t_epsilon(&zero, 3.0, 0.0, PI * PI / 4.0).unwrap() - 6.0 / PI).abs() < 1e-14);
    assert!((edge::t_epsilon(&zero, 0.0, 0.0, PI * PI).unwrap() + 1.0).abs() < 1e-14);
}

#[test]
fn sampled_integrator_matches_closed_forms() {
    // A sampled zero potential is integrated numerically.
    let flat = EdgePotential::sampled(vec![(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]).unwrap();
    let zero = EdgePotential::zero(1.0).unwrap();
    for k in 0..=50 {
        let z = -50.0 + 5.0 * k as f64;
        let a = edge::solve_fundamental(&flat, z).unwrap();
        let b = edge::solve_fundamental(&zero, z).unwrap();
        for (x, y) in [(a.s, b.s), (a.c, b.c), (a.s_prime, b.s_prime), (a.c_prime, b.c_prime)] {
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0), "z = {z}");
        }
    }
}
