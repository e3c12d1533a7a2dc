#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::SMatrix;
use num_complex::Complex64;
use qgraph::edge::EdgePotential;
use qgraph::graph::{GraphBuilder, GraphModel};
use qgraph::linalg::{self, CMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type M4 = SMatrix<Complex64, 4, 4>;

fn c(x: f64) -> Complex64 {
    Complex64::from(x)
}

/// Transfer matrix of `(f, f')` across edge `k` for a constant potential,
/// from `f'' = 2i K f' + (K^2 + U - k_R^2 - E) f`, `K = a + k_R sigma`.
fn edge_transfer(g: &GraphModel, k: usize, energy: f64) -> M4 {
    let e = &g.edges()[k];
    let l = e.length;
    let a = g.flux_integral(k) / l;
    let sigma = g.sigma(k);
    let kk = nalgebra::Matrix2::<Complex64>::identity() * c(a) + sigma * c(g.k_r());
    let u = e.potential.value_at(0.0);
    let lower = kk * kk + nalgebra::Matrix2::identity() * c(u - g.k_r() * g.k_r() - energy);
    let mut gen = M4::zeros();
    for i in 0..2 {
        gen[(i, 2 + i)] = c(1.0);
        for j in 0..2 {
            gen[(2 + i, j)] = lower[(i, j)];
            gen[(2 + i, 2 + j)] = Complex64::new(0.0, 2.0) * kk[(i, j)];
        }
    }
    (gen * c(l)).exp()
}

/// Linear system for vertex values and initial edge derivatives whose
/// kernel is the eigenspace of `E`. Unlike the M-function it is regular at
/// Dirichlet energies.
pub fn shooting_matrix(g: &GraphModel, energy: f64) -> CMatrix {
    let nv = g.vertices().len();
    let ne = g.edges().len();
    let dim = 2 * nv + 2 * ne;
    let mut s = CMatrix::zeros(dim, dim);
    let fv = |v: usize, i: usize| 2 * v + i;
    let dv = |e: usize, i: usize| 2 * nv + 2 * e + i;
    for (k, e) in g.edges().iter().enumerate() {
        let t = edge_transfer(g, k, energy);
        let l = e.length;
        let sigma = g.sigma(k);
        let kk = nalgebra::Matrix2::<Complex64>::identity() * c(g.flux_integral(k) / l) + sigma * c(g.k_r());
        let iu = Complex64::new(0.0, 1.0);
        for i in 0..2 {
            // continuity at the head: f_e(l) - f(head) = 0
            let row = 2 * k + i;
            for j in 0..2 {
                s[(row, fv(e.tail, j))] += t[(i, j)];
                s[(row, dv(k, j))] += t[(i, 2 + j)];
            }
            s[(row, fv(e.head, i))] -= c(1.0);
        }
        for i in 0..2 {
            // tail contributes (f' - iK f)(0)
            let row = 2 * ne + fv(e.tail, i);
            s[(row, dv(k, i))] += c(1.0);
            for j in 0..2 {
                s[(row, fv(e.tail, j))] -= iu * kk[(i, j)];
            }
            // head contributes -(f' - iK f)(l)
            let row = 2 * ne + fv(e.head, i);
            for j in 0..2 {
                let mut coef_f = t[(2 + i, j)];
                let mut coef_d = t[(2 + i, 2 + j)];
                for p in 0..2 {
                    coef_f -= iu * kk[(i, p)] * t[(p, j)];
                    coef_d -= iu * kk[(i, p)] * t[(p, 2 + j)];
                }
                s[(row, fv(e.tail, j))] -= coef_f;
                s[(row, dv(k, j))] -= coef_d;
            }
        }
    }
    for (v, vert) in g.vertices().iter().enumerate() {
        for i in 0..2 {
            s[(2 * ne + fv(v, i), fv(v, i))] -= c(vert.epsilon);
        }
    }
    s
}

fn relative_gap(g: &GraphModel, e: f64) -> f64 {
    let sv = linalg::singular_values(&shooting_matrix(g, e));
    sv[sv.len() - 1] / sv[0]
}

/// Distinct eigenvalues in `window` located as minima of the relative
/// smallest singular value of the shooting matrix.
pub fn shooting_eigenvalues(g: &GraphModel, window: (f64, f64), step: f64) -> Vec<f64> {
    let n = ((window.1 - window.0) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=n).map(|k| window.0 + (window.1 - window.0) * k as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&e| relative_gap(g, e)).collect();
    let mut out: Vec<f64> = Vec::new();
    for i in 1..grid.len() - 1 {
        if vals[i] <= vals[i - 1] && vals[i] < vals[i + 1] {
            let (x, v) = qgraph::roots::golden_section(|e| Ok(relative_gap(g, e)), grid[i - 1], grid[i + 1], 1e-12).unwrap();
            if v < 1e-7 && out.last().is_none_or(|&p| (p - x).abs() > 1e-6) {
                out.push(x);
            }
        }
    }
    out
}

pub fn interval() -> GraphModel {
    let mut b = GraphBuilder::new(0.0, 0.0);
    let p = b.vertex(0.0, 0.0, 0.0);
    let q = b.vertex(1.0, 0.0, 0.0);
    b.edge(p, q);
    b.build().unwrap()
}

/// Unit square, edges oriented around the cycle.
pub fn four_cycle(pot: EdgePotential, eps: f64, field: f64, k_r: f64) -> GraphModel {
    let mut b = GraphBuilder::new(field, k_r);
    let v: Vec<usize> = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
        .iter()
        .map(|&(x, y)| b.vertex(x, y, eps))
        .collect();
    for k in 0..4 {
        b.edge_with_potential(v[k], v[(k + 1) % 4], pot.clone());
    }
    b.build().unwrap()
}

/// Three unit edges leaving the origin at 120 degrees.
pub fn three_star(pot: EdgePotential, field: f64, k_r: f64) -> GraphModel {
    let mut b = GraphBuilder::new(field, k_r);
    let center = b.vertex(0.0, 0.0, 0.0);
    for j in 0..3 {
        let t = 2.0 * PI * j as f64 / 3.0 + 0.3;
        let leaf = b.vertex(t.cos(), t.sin(), 0.0);
        b.edge_with_potential(center, leaf, pot.clone());
    }
    b.build().unwrap()
}

/// Piecewise-linear potential on `[0, 1]`, symmetric about `1/2`, bounded by `amp`.
pub fn random_even_potential<R: Rng>(rng: &mut R, amp: f64, intervals: usize) -> EdgePotential {
    let half: Vec<f64> = (0..=intervals / 2).map(|_| rng.random_range(-amp..=amp)).collect();
    let knots = (0..=intervals)
        .map(|i| {
            let j = i.min(intervals - i);
            (i as f64 / intervals as f64, half[j])
        })
        .collect();
    EdgePotential::sampled(knots).unwrap()
}

/// Piecewise-linear potential with no symmetry.
pub fn random_potential<R: Rng>(rng: &mut R, amp: f64, intervals: usize) -> EdgePotential {
    let knots = (0..=intervals)
        .map(|i| (i as f64 / intervals as f64, rng.random_range(-amp..=amp)))
        .collect();
    EdgePotential::sampled(knots).unwrap()
}

/// Sorted distinct values, merged within `tol`.
pub fn distinct(mut v: Vec<f64>, tol: f64) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= tol);
    v
}

pub fn potential_from(values: &[f64], length: f64) -> EdgePotential {
    let n = values.len() - 1;
    EdgePotential::sampled(values.iter().enumerate().map(|(i, &u)| (length * i as f64 / n as f64, u)).collect()).unwrap()
}

pub fn even_from(half: &[f64]) -> EdgePotential {
    let n = 2 * (half.len() - 1);
    let vals: Vec<f64> = (0..=n).map(|i| half[i.min(n - i)]).collect();
    potential_from(&vals, 1.0)
}

/// Random connected planar graph: a chain through all vertices plus extra chords.
pub fn random_graph(seed: u64) -> GraphModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = rng.random_range(2..=12);
    let mut b = GraphBuilder::new(rng.random_range(-3.0..3.0), rng.random_range(-2.0..2.0));
    let mut pos = Vec::new();
    while pos.len() < nv {
        let p: (f64, f64) = (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0));
        if pos.iter().all(|q: &(f64, f64)| (q.0 - p.0).hypot(q.1 - p.1) > 0.2) {
            pos.push(p);
        }
    }
    let ids: Vec<usize> = pos.iter().map(|&(x, y)| b.vertex(x, y, rng.random_range(-1.0..1.0))).collect();
    let mut pairs: Vec<(usize, usize)> = (1..nv).map(|i| (i - 1, i)).collect();
    for _ in 0..nv {
        let (i, j) = (rng.random_range(0..nv), rng.random_range(0..nv));
        if i != j && !pairs.contains(&(i, j)) && !pairs.contains(&(j, i)) {
            pairs.push((i, j));
        }
    }
    for (i, j) in pairs {
        let l = (pos[i].0 - pos[j].0).hypot(pos[i].1 - pos[j].1);
        let pot = match rng.random_range(0..3) {
            0 => EdgePotential::zero(l).unwrap(),
            1 => EdgePotential::constant(rng.random_range(-5.0..5.0), l).unwrap(),
            _ => potential_from(&[rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)], l),
        };
        b.edge_with_potential(ids[i], ids[j], pot);
    }
    b.build().unwrap()
}
