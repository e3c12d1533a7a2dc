//! Hopping operators of the T3 torus.
//!
//! Rows of `A` are rims (all `beta`, then all `gamma`), columns are hubs;
//! spin is the fastest index. `A` carries `tau`, `A*` carries `tau^*`.

use num_complex::Complex64;

use super::{t3_tau, T3Params, T3Torus};
use crate::error::{Error, Result};
use crate::linalg::{cis, CMatrix, CVector, Mat2};

/// A nonzero 2x2 block at (rim, hub) or (hub, rim).
type Block = (usize, usize, Mat2);

#[derive(Clone, Debug)]
pub struct BipartiteOperators {
    pub torus: T3Torus,
    pub params: T3Params,
    a_blocks: Vec<Block>,
    a_star_blocks: Vec<Block>,
}

fn check(params: &T3Params, torus: &T3Torus) -> Result<()> {
    if !super::is_commensurate(params.omega, torus.n) {
        return Err(Error::Incommensurate {
            omega: params.omega,
            n: torus.n,
        });
    }
    Ok(())
}

impl BipartiteOperators {
    pub fn build(params: &T3Params, torus: &T3Torus) -> Result<Self> {
        check(params, torus)?;
        let t = torus;
        let big_n = t.n as i64;
        let tau = |m: i64, n: i64, j: usize| t3_tau(t.wrap(m) as i64, t.wrap(n) as i64, j, params);
        let mut a_blocks = Vec::with_capacity(6 * t.hubs());
        let mut a_star_blocks = Vec::with_capacity(6 * t.hubs());
        for m in 0..big_n {
            for n in 0..big_n {
                let b = t.beta(m, n);
                a_blocks.push((b, t.hub(m + 1, n), tau(m + 1, n, 2)?));
                a_blocks.push((b, t.hub(m, n + 1), tau(m, n + 1, 4)?));
                a_blocks.push((b, t.hub(m, n), tau(m, n, 6)?));
                let g = t.gamma(m, n);
                a_blocks.push((g, t.hub(m, n), tau(m, n, 1)?));
                a_blocks.push((g, t.hub(m, n + 1), tau(m, n + 1, 3)?));
                a_blocks.push((g, t.hub(m - 1, n + 1), tau(m - 1, n + 1, 5)?));

                let h = t.hub(m, n);
                a_star_blocks.push((h, t.gamma(m, n), tau(m, n, 1)?.adjoint()));
                a_star_blocks.push((h, t.beta(m - 1, n), tau(m, n, 2)?.adjoint()));
                a_star_blocks.push((h, t.gamma(m, n - 1), tau(m, n, 3)?.adjoint()));
                a_star_blocks.push((h, t.beta(m, n - 1), tau(m, n, 4)?.adjoint()));
                a_star_blocks.push((h, t.gamma(m + 1, n - 1), tau(m, n, 5)?.adjoint()));
                a_star_blocks.push((h, t.beta(m, n), tau(m, n, 6)?.adjoint()));
            }
        }
        Ok(Self {
            torus: *torus,
            params: params.clone(),
            a_blocks,
            a_star_blocks,
        })
    }

    /// `(rim, hub, tau)` blocks of `A`, three per rim.
    pub fn a_blocks(&self) -> &[(usize, usize, Mat2)] {
        &self.a_blocks
    }

    /// `(hub, rim, tau^*)` blocks of `A*`, six per hub, assembled from the
    /// hub's own edges rather than by transposing `A`.
    pub fn a_star_blocks(&self) -> &[(usize, usize, Mat2)] {
        &self.a_star_blocks
    }

    fn dense(blocks: &[Block], rows: usize, cols: usize) -> CMatrix {
        let mut out = CMatrix::zeros(2 * rows, 2 * cols);
        for (r, c, b) in blocks {
            for i in 0..2 {
                for j in 0..2 {
                    out[(2 * r + i, 2 * c + j)] += b[(i, j)];
                }
            }
        }
        out
    }

    /// Dense `A`, `4N^2 x 2N^2`.
    pub fn a(&self) -> CMatrix {
        Self::dense(&self.a_blocks, self.torus.rims(), self.torus.hubs())
    }

    /// Dense `A*`, `2N^2 x 4N^2`.
    pub fn a_star(&self) -> CMatrix {
        Self::dense(&self.a_star_blocks, self.torus.hubs(), self.torus.rims())
    }

    /// `A* A`, `2N^2 x 2N^2`, as a sparse product over rims.
    pub fn a_star_a(&self) -> CMatrix {
        let mut by_rim: Vec<Vec<(usize, Mat2)>> = vec![Vec::new(); self.torus.rims()];
        for (r, h, b) in &self.a_blocks {
            by_rim[*r].push((*h, *b));
        }
        let mut out = CMatrix::zeros(2 * self.torus.hubs(), 2 * self.torus.hubs());
        for (h, r, bs) in &self.a_star_blocks {
            for (h2, b) in &by_rim[*r] {
                let p = bs * b;
                for i in 0..2 {
                    for j in 0..2 {
                        out[(2 * h + i, 2 * h2 + j)] += p[(i, j)];
                    }
                }
            }
        }
        out
    }

    fn apply(blocks: &[Block], x: &CVector, rows: usize) -> CVector {
        let mut y = CVector::zeros(2 * rows);
        for (r, c, b) in blocks {
            let (x0, x1) = (x[2 * c], x[2 * c + 1]);
            y[2 * r] += b[(0, 0)] * x0 + b[(0, 1)] * x1;
            y[2 * r + 1] += b[(1, 0)] * x0 + b[(1, 1)] * x1;
        }
        y
    }

    /// Sparse `A x`.
    pub fn apply_a(&self, x: &CVector) -> CVector {
        Self::apply(&self.a_blocks, x, self.torus.rims())
    }

    /// Sparse `A* y`.
    pub fn apply_a_star(&self, y: &CVector) -> CVector {
        Self::apply(&self.a_star_blocks, y, self.torus.hubs())
    }

    pub fn ab(&self, energy: f64) -> Result<(f64, f64)> {
        self.params.ab(energy)
    }
}

/// The six neighbours of `(m, n)` in the order
/// `(m, n+1), (m, n-1), (m+1, n), (m-1, n), (m-1, n+1), (m+1, n-1)`
/// with the phases of the triangular-lattice magnetic hopping.
fn triangular_hops(omega: f64, m: i64, n: i64) -> [((i64, i64), Complex64); 6] {
    let w = 3.0 * omega;
    let (mf, nf) = (m as f64, n as f64);
    [
        ((m, n + 1), cis(-w * mf)),
        ((m, n - 1), cis(w * mf)),
        ((m + 1, n), cis(w * nf)),
        ((m - 1, n), cis(-w * nf)),
        ((m - 1, n + 1), cis(-w * (mf + nf))),
        ((m + 1, n - 1), cis(w * (mf + nf))),
    ]
}

/// Spinless magnetic hopping operator on the triangular lattice of hubs.
pub fn spinless_delta(omega: f64, torus: &T3Torus) -> Result<CMatrix> {
    if !super::is_commensurate(omega, torus.n) {
        return Err(Error::Incommensurate { omega, n: torus.n });
    }
    let big_n = torus.n as i64;
    let mut d = CMatrix::zeros(torus.hubs(), torus.hubs());
    for m in 0..big_n {
        for n in 0..big_n {
            let r = torus.hub(m, n);
            for ((p, q), phase) in triangular_hops(omega, m, n) {
                d[(r, torus.hub(p, q))] += phase;
            }
        }
    }
    Ok(d)
}

fn rashba_r() -> [Mat2; 3] {
    let s3 = 3f64.sqrt();
    let z = Complex64::from(0.0);
    [
        Mat2::new(z, Complex64::new(1.5, -0.5 * s3), Complex64::new(-1.5, -0.5 * s3), z),
        Mat2::new(z, Complex64::new(1.5, 0.5 * s3), Complex64::new(-1.5, 0.5 * s3), z),
        Mat2::new(z, Complex64::new(0.0, -s3), Complex64::new(0.0, -s3), z),
    ]
}

/// Spin-mixing hopping operator: the magnetic triangular hopping with the
/// spin matrices `R1, R2, R3` (and adjoints for the reversed hops).
pub fn rashba_hopping_operator(omega: f64, torus: &T3Torus) -> Result<CMatrix> {
    if !super::is_commensurate(omega, torus.n) {
        return Err(Error::Incommensurate { omega, n: torus.n });
    }
    let [r1, r2, r3] = rashba_r();
    let spin = [r1, r1.adjoint(), r2, r2.adjoint(), r3, r3.adjoint()];
    let big_n = torus.n as i64;
    let mut d = CMatrix::zeros(2 * torus.hubs(), 2 * torus.hubs());
    for m in 0..big_n {
        for n in 0..big_n {
            let r = torus.hub(m, n);
            for (k, ((p, q), phase)) in triangular_hops(omega, m, n).into_iter().enumerate() {
                let c = torus.hub(p, q);
                for i in 0..2 {
                    for j in 0..2 {
                        d[(2 * r + i, 2 * c + j)] += spin[k][(i, j)] * phase;
                    }
                }
            }
        }
    }
    Ok(d)
}

/// `A*A` written through the triangular-lattice operators:
///
/// `6 + cos w sin 2k D~ + 2 [cos w cos^2 k - sin^2 k diag(cos(w - pi/3), cos(w + pi/3))] (D (+) D)`.
pub fn assemble_aastar_closed_form(params: &T3Params, torus: &T3Torus) -> Result<CMatrix> {
    check(params, torus)?;
    let (w, k) = (params.omega, params.k_r);
    let delta = spinless_delta(w, torus)?;
    let tilde = rashba_hopping_operator(w, torus)?;
    let third = std::f64::consts::FRAC_PI_3;
    let coef = [
        2.0 * (w.cos() * k.cos().powi(2) - k.sin().powi(2) * (w - third).cos()),
        2.0 * (w.cos() * k.cos().powi(2) - k.sin().powi(2) * (w + third).cos()),
    ];
    let dim = 2 * torus.hubs();
    let mut out = tilde * Complex64::from(w.cos() * (2.0 * k).sin());
    for r in 0..torus.hubs() {
        for c in 0..torus.hubs() {
            let v = delta[(r, c)];
            if v != Complex64::from(0.0) {
                out[(2 * r, 2 * c)] += v * coef[0];
                out[(2 * r + 1, 2 * c + 1)] += v * coef[1];
            }
        }
    }
    for i in 0..dim {
        out[(i, i)] += 6.0;
    }
    Ok(out)
}
