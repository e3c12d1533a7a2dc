mod common;

use std::f64::consts::PI;

use common::{even_from, potential_from, random_graph};

use num_complex::Complex64;
use proptest::prelude::*;
use qgraph::edge::{self, EdgePotential};
use qgraph::error::Error;
use qgraph::graph::{sigma_matrix, transport_matrix, GraphBuilder, GraphModel};
use qgraph::linalg::{self, CMatrix, Mat2};
use qgraph::mfunction::build_m_function;
use qgraph::susy::{gram_spectra, kernel_dims, susy_spectrum, SusyBlock};
use qgraph::t3::{
    assemble_aastar_closed_form, flat_band_certificate, BipartiteOperators, T3Params, T3Torus,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn wronskian_on_energy_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pots = [
        EdgePotential::zero(1.0).unwrap(),
        EdgePotential::constant(-7.5, 1.3).unwrap(),
        common::random_potential(&mut rng, 20.0, 12),
    ];
    for pot in &pots {
        for k in 0..=500 {
            let z = -50.0 + 0.5 * k as f64;
            let s = edge::solve_fundamental(pot, z).unwrap();
            assert!((s.wronskian() - 1.0).abs() <= 1e-10 * s.wronskian_scale(), "z = {z}: {s}");
        }
    }
}

#[test]
fn even_potentials_have_c_equal_s_prime() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pot = common::random_even_potential(&mut rng, 20.0, 10);
    for k in 0..=500 {
        let z = -50.0 + 0.5 * k as f64;
        let s = edge::solve_fundamental(&pot, z).unwrap();
        assert!((s.c - s.s_prime).abs() <= 1e-8 * s.c.abs().max(1.0), "z = {z}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wronskian_random_potentials(vals in prop::collection::vec(-20.0f64..20.0, 2..10), z in -50.0f64..200.0) {
        let s = edge::solve_fundamental(&potential_from(&vals, 1.0), z).unwrap();
        prop_assert!((s.wronskian() - 1.0).abs() <= 1e-10 * s.wronskian_scale());
    }

    #[test]
    fn even_random_potentials(half in prop::collection::vec(-20.0f64..20.0, 2..7), z in -50.0f64..200.0) {
        let s = edge::solve_fundamental(&even_from(&half), z).unwrap();
        prop_assert!((s.c - s.s_prime).abs() <= 1e-8 * s.c.abs().max(1.0));
    }

    #[test]
    fn sigma_is_a_reflection(angle in 0.0f64..(2.0 * PI)) {
        let s = sigma_matrix([angle.cos(), angle.sin()]).unwrap();
        prop_assert!((s - s.adjoint()).norm() < 1e-15);
        prop_assert!((s * s - Mat2::identity()).norm() < 1e-14);
        prop_assert!(s.trace().norm() < 1e-15);
    }

    #[test]
    fn transports_are_unitary(angle in 0.0f64..(2.0 * PI), a in -20.0f64..20.0, k in -5.0f64..5.0, l in 0.1f64..4.0) {
        let s = sigma_matrix([angle.cos(), angle.sin()]).unwrap();
        let t = transport_matrix(a, k, l, &s).unwrap();
        prop_assert!((t.adjoint() * t - Mat2::identity()).norm() <= 1e-12);
        prop_assert!((t.determinant() - linalg::cis(2.0 * a)).norm() <= 1e-12);
        let inv = transport_matrix(-a, -k, l, &s).unwrap();
        prop_assert!((t * inv - Mat2::identity()).norm() <= 1e-12);
        let rev = transport_matrix(-a, k, l, &(-s)).unwrap();
        prop_assert!((rev - t.adjoint()).norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dirichlet_points_are_zeros_of_s(vals in prop::collection::vec(-10.0f64..10.0, 2..6), k_r in -2.0f64..2.0) {
        let pot = potential_from(&vals, 1.0);
        for e in edge::dirichlet_eigenvalues(&pot, k_r, (-20.0, 80.0)).unwrap() {
            let s = edge::solve_fundamental(&pot, e + k_r * k_r).unwrap();
            prop_assert!(s.s.abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn m_function_is_hermitian_and_sparse(seed in any::<u64>(), e in -5.0f64..60.0) {
        let g = random_graph(seed);
        match build_m_function(&g, e) {
            Err(Error::NearSingular { .. }) => return Ok(()),
            Err(err) => return Err(TestCaseError::fail(err.to_string())),
            Ok(m) => {
                let m = m.matrix;
                let norm = linalg::max_abs_entry(&m);
                prop_assert!(linalg::max_abs_entry(&(&m - m.adjoint())) <= 1e-9 * norm.max(1.0));
                let n = g.vertices().len();
                for a in 0..n {
                    for b in 0..n {
                        let linked = a == b || g.edges().iter().any(|ed| (ed.tail, ed.head) == (a, b) || (ed.tail, ed.head) == (b, a));
                        if !linked {
                            let blk = m.view((2 * a, 2 * b), (2, 2));
                            prop_assert!(blk.iter().all(|z| *z == Complex64::from(0.0)));
                        }
                    }
                }
            }
        }
    }
}

fn random_complex(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    use rand_distr::{Distribution, StandardNormal};
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn susy_matches_dense_block(seed in any::<u64>(), p in 1usize..16, q in 1usize..16, m in -3.0f64..3.0, rank_cut in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Low-rank products exercise nontrivial kernels on both sides.
        let r = p.min(q).saturating_sub(rank_cut).max(1);
        let a = random_complex(p, r, &mut rng) * random_complex(r, q, &mut rng);
        let b = SusyBlock::new(a, m).unwrap();
        let got = susy_spectrum(&b);
        let want = linalg::hermitian_eigenvalues(&b.dense());
        prop_assert_eq!(got.len(), want.len());
        for (x, y) in got.iter().zip(&want) {
            prop_assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
        prop_assert!(got.iter().all(|v| v.abs() >= m.abs() - 1e-12));
        let (aa, aat) = gram_spectra(&b.a);
        let k = kernel_dims(&b.a);
        let nz = |v: &[f64], skip: usize| v[skip..].to_vec();
        let (x, y) = (nz(&aa, k.ker_a), nz(&aat, k.ker_a_star));
        prop_assert_eq!(x.len(), y.len());
        for (u, v) in x.iter().zip(&y) {
            prop_assert!((u - v).abs() <= 1e-9 * v.max(1.0));
        }
    }
}

fn commensurate_triple() -> impl Strategy<Value = (f64, f64, usize)> {
    (1usize..=12).prop_flat_map(|n| (0..n, -4.0f64..4.0, Just(n))).prop_map(|(p, k, n)| (2.0 * PI * p as f64 / n as f64, k, n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn t3_operator_identities((omega, k_r, n) in commensurate_triple()) {
        let params = T3Params::free(omega, k_r);
        let torus = T3Torus::new(n, omega).unwrap();
        let ops = BipartiteOperators::build(&params, &torus).unwrap();
        let a = ops.a();
        prop_assert_eq!(ops.a_star(), a.adjoint());
        let closed = assemble_aastar_closed_form(&params, &torus).unwrap();
        prop_assert!(linalg::max_abs_entry(&(ops.a_star_a() - closed)) <= 1e-10);
        let k = kernel_dims(&a);
        prop_assert_eq!(k.ker_a_star - k.ker_a, 2 * n * n);
    }

    #[test]
    fn flatness_ignores_potential_and_couplings(half in prop::collection::vec(-10.0f64..10.0, 2..6), lambda in -5.0f64..5.0, mu in -5.0f64..5.0, flip in any::<bool>()) {
        let k_r = if flip { PI } else { 0.0 };
        let params = T3Params::new(PI / 2.0, k_r, lambda, mu, even_from(&half)).unwrap();
        let cert = flat_band_certificate(&params, &T3Torus::new(4, PI / 2.0).unwrap()).unwrap();
        prop_assert!(cert.is_flat);
    }
}
