//! Spectra of supersymmetric block operators `L = [[m, A*], [A, -m]]`.
//!
//! `L^2 = diag(A*A + m^2, AA* + m^2)`, so the spectrum is fixed by the
//! singular values of `A`: each singular value `s` gives the pair
//! `+-sqrt(s^2 + m^2)`, and the remaining `q - min(p, q)` columns and
//! `p - min(p, q)` rows contribute `+m` and `-m` respectively.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::{self, CMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct SusyBlock {
    /// `p x q`, mapping `C^q -> C^p`.
    pub a: CMatrix,
    pub m: f64,
}

impl SusyBlock {
    pub fn new(a: CMatrix, m: f64) -> Result<Self> {
        if !m.is_finite() || a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("SUSY block entries must be finite");
        }
        Ok(Self { a, m })
    }

    /// Builds `A` from `(re, im)` pairs in row-major order.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[(f64, f64)], m: f64) -> Result<Self> {
        if entries.len() != rows * cols {
            return invalid(format!("expected {} entries for a {rows}x{cols} matrix, got {}", rows * cols, entries.len()));
        }
        let a = CMatrix::from_row_iterator(rows, cols, entries.iter().map(|&(re, im)| Complex64::new(re, im)));
        Self::new(a, m)
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    /// The dense `(q + p) x (q + p)` matrix `L`.
    pub fn dense(&self) -> CMatrix {
        let (p, q) = (self.rows(), self.cols());
        let mut l = CMatrix::zeros(p + q, p + q);
        for i in 0..q {
            l[(i, i)] = Complex64::from(self.m);
        }
        for i in 0..p {
            l[(q + i, q + i)] = Complex64::from(-self.m);
        }
        l.view_mut((q, 0), (p, q)).copy_from(&self.a);
        l.view_mut((0, q), (q, p)).copy_from(&self.a.adjoint());
        l
    }
}

/// Kernel dimensions of `A` and `A*`, with the shared threshold
/// `sigma <= 1e-10 * max(1, ||A||)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct KernelDims {
    pub ker_a: usize,
    pub ker_a_star: usize,
    pub rank: usize,
}

pub fn kernel_dims(a: &CMatrix) -> KernelDims {
    let sv = linalg::singular_values(a);
    let thr = linalg::kernel_threshold(sv.first().copied().unwrap_or(0.0));
    let rank = sv.iter().filter(|&&s| s > thr).count();
    KernelDims {
        ker_a: a.ncols() - rank,
        ker_a_star: a.nrows() - rank,
        rank,
    }
}

/// Eigenvalues of `A*A` at or below this fraction of the largest count as
/// zero in [`kernel_dims_from_gram`].
pub const GRAM_KERNEL_TOL: f64 = 1e-9;

/// Kernel dimensions of a `rows x cols` matrix `A` from the ascending
/// eigenvalues of `A*A`. Cheaper than an SVD but with a coarser threshold,
/// since `sigma^2` is only resolved to about machine epsilon times `||A||^2`.
pub fn kernel_dims_from_gram(gram_eigs: &[f64], rows: usize) -> KernelDims {
    let top = gram_eigs.last().copied().unwrap_or(0.0).max(1.0);
    let ker_a = gram_eigs.iter().filter(|&&v| v <= GRAM_KERNEL_TOL * top).count();
    let rank = gram_eigs.len() - ker_a;
    KernelDims {
        ker_a,
        ker_a_star: rows - rank,
        rank,
    }
}

/// Eigenvalues of `A*A` and `AA*`, ascending, from one SVD.
pub fn gram_spectra(a: &CMatrix) -> (Vec<f64>, Vec<f64>) {
    let sv = linalg::singular_values(a);
    let squares = |len: usize| {
        let mut v: Vec<f64> = sv.iter().map(|s| s * s).collect();
        v.resize(len, 0.0);
        v.sort_by(f64::total_cmp);
        v
    };
    (squares(a.ncols()), squares(a.nrows()))
}

/// All `p + q` eigenvalues of `L`, ascending, with multiplicity.
pub fn susy_spectrum(b: &SusyBlock) -> Vec<f64> {
    let (p, q) = (b.rows(), b.cols());
    let m = b.m;
    let sv = linalg::singular_values(&b.a);
    let mut out = Vec::with_capacity(p + q);
    for s in &sv {
        let r = (s * s + m * m).sqrt();
        out.push(r);
        out.push(-r);
    }
    let k = sv.len();
    out.extend(std::iter::repeat(m).take(q - k));
    out.extend(std::iter::repeat(-m).take(p - k));
    out.sort_by(f64::total_cmp);
    out
}

/// Whether `m` and `-m` belong to the spectrum of `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PmMembership {
    pub plus_m_in: bool,
    pub minus_m_in: bool,
}

/// For `m != 0`: `m` is an eigenvalue iff `ker A != 0`, `-m` iff
/// `ker A* != 0`. For `m = 0` both flags report `ker A + ker A* != 0`.
pub fn susy_membership_pm_m(b: &SusyBlock) -> PmMembership {
    let k = kernel_dims(&b.a);
    if b.m == 0.0 {
        let any = k.ker_a + k.ker_a_star > 0;
        PmMembership {
            plus_m_in: any,
            minus_m_in: any,
        }
    } else {
        PmMembership {
            plus_m_in: k.ker_a > 0,
            minus_m_in: k.ker_a_star > 0,
        }
    }
}
