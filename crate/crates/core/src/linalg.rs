//! Thin helpers over `nalgebra` for the dense complex matrices used everywhere.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;
pub type Mat2 = Matrix2<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenpairs of a Hermitian matrix, ascending by eigenvalue.
pub fn hermitian_eigen(m: &CMatrix) -> Vec<(f64, CVector)> {
    let eig = m.clone().symmetric_eigen();
    let mut pairs: Vec<(f64, CVector)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &v)| (v, eig.eigenvectors.column(k).into_owned()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Singular values of a (possibly rectangular) matrix, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Operator 2-norm of a Hermitian matrix (largest |eigenvalue|).
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Rank-deficiency threshold shared by all kernel detections:
/// a singular value counts as zero when `sigma <= 1e-10 * max(1, ||A||)`.
pub fn kernel_threshold(largest_singular_value: f64) -> f64 {
    1e-10 * largest_singular_value.max(1.0)
}

/// Largest `|eigenvalue|` of a Hermitian operator given by its action,
/// estimated from `steps` Lanczos iterations with full reorthogonalisation.
/// Exact once `steps` reaches the dimension; otherwise a lower bound.
pub fn lanczos_extremal_abs(apply: impl Fn(&CVector) -> CVector, start: CVector, steps: usize) -> f64 {
    let norm = start.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut basis: Vec<CVector> = vec![start / Complex64::from(norm)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let steps = steps.min(basis[0].len()).max(1);
    for k in 0..steps {
        let mut w = apply(&basis[k]);
        alpha.push(basis[k].dotc(&w).re);
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w -= q * c;
            }
        }
        let b = w.norm();
        let scale = alpha.iter().chain(&beta).fold(1e-300f64, |m, v| m.max(v.abs()));
        if k + 1 == steps || b <= 1e-13 * scale {
            break;
        }
        beta.push(b);
        basis.push(w / Complex64::from(b));
    }
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| match i.abs_diff(j) {
        0 => alpha[i],
        1 => beta[i.min(j)],
        _ => 0.0,
    });
    t.symmetric_eigenvalues().iter().fold(0.0, |acc, v| acc.max(v.abs()))
}
