//! Discrete M-function of a finite quantum graph.
//!
//! Away from the Dirichlet spectrum of the edges, `E` is an eigenvalue of the
//! graph Hamiltonian iff `M(E) - T` has a kernel, where `T = diag(epsilon)`
//! and `M(E)` acts on vertex data in `C^{2|V|}` (vertex-major, spin fastest):
//!
//! * off-diagonal blocks `tau*_{ab} / s_{ab}` (row `a`, column `b`) and
//!   `tau_{ab} / s_{ab}` (row `b`, column `a`) for every edge `ab`;
//! * diagonal blocks `-(sum_out c/s + sum_in s'/s)`;
//!
//! all evaluated at `E + k_R^2`. Eigenfunctions are recovered edge by edge
//! from their vertex values.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::edge::{self, EdgePotential, EdgeSolution};
use crate::error::{invalid, Error, Result};
use crate::graph::GraphModel;
use crate::linalg::{self, cis, CMatrix, CVector, Mat2, I};
use crate::roots::{golden_section, SampledCurve};

/// Smallest-eigenvalue threshold for "0 is in the spectrum of M(E) - T".
pub const KERNEL_TOL: f64 = 1e-8;
/// Refuse to build `M(E)` when some `|s(l; E + k_R^2)|` is below this.
pub const DIRICHLET_GUARD: f64 = 1e-9;
/// Grid points within this distance of a Dirichlet eigenvalue are skipped.
pub const DIRICHLET_EXCLUSION: f64 = 1e-4;

/// `M(E)` for one energy.
#[derive(Clone, Debug)]
pub struct MFunctionMatrix {
    pub energy: f64,
    pub k_r: f64,
    pub matrix: CMatrix,
}

/// `T = diag(epsilon(vertex))`, duplicated over spin.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingMatrix {
    eps: Vec<f64>,
}

impl CouplingMatrix {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.iter().any(|e| !e.is_finite()) {
            return invalid("coupling constants must be finite");
        }
        Ok(Self { eps })
    }

    pub fn from_graph(g: &GraphModel) -> Self {
        Self {
            eps: g.vertices().iter().map(|v| v.epsilon).collect(),
        }
    }

    pub fn zeros(n_vertices: usize) -> Self {
        Self {
            eps: vec![0.0; n_vertices],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.eps
    }

    fn subtract_from(&self, m: &mut CMatrix) {
        for (k, &e) in self.eps.iter().enumerate() {
            m[(2 * k, 2 * k)] -= e;
            m[(2 * k + 1, 2 * k + 1)] -= e;
        }
    }
}

fn add_block(m: &mut CMatrix, row: usize, col: usize, b: &Mat2) {
    for i in 0..2 {
        for j in 0..2 {
            m[(2 * row + i, 2 * col + j)] += b[(i, j)];
        }
    }
}

/// Endpoint data of every edge at `z = E + k_R^2`, reusing solutions for
/// edges that share a potential.
fn edge_solutions(g: &GraphModel, z: f64) -> Result<Vec<EdgeSolution>> {
    let mut cache: Vec<(&EdgePotential, EdgeSolution)> = Vec::new();
    let mut out = Vec::with_capacity(g.edges().len());
    for e in g.edges() {
        let sol = match cache.iter().find(|(p, _)| *p == &e.potential) {
            Some((_, s)) => *s,
            None => {
                let s = edge::solve_fundamental(&e.potential, z)?;
                cache.push((&e.potential, s));
                s
            }
        };
        out.push(sol);
    }
    Ok(out)
}

pub fn build_m_function(g: &GraphModel, energy: f64) -> Result<MFunctionMatrix> {
    let k_r = g.k_r();
    let sols = edge_solutions(g, energy + k_r * k_r)?;
    let n = g.vertices().len();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for (k, (e, sol)) in g.edges().iter().zip(&sols).enumerate() {
        if sol.s.abs() <= DIRICHLET_GUARD {
            return Err(Error::NearSingular {
                edge: k,
                energy,
                s: sol.s,
            });
        }
        let tau = g.transport(k).matrix;
        let inv_s = Complex64::from(1.0 / sol.s);
        add_block(&mut m, e.tail, e.head, &(tau.adjoint() * inv_s));
        add_block(&mut m, e.head, e.tail, &(tau * inv_s));
        add_block(&mut m, e.tail, e.tail, &(Mat2::identity() * Complex64::from(-sol.c / sol.s)));
        add_block(&mut m, e.head, e.head, &(Mat2::identity() * Complex64::from(-sol.s_prime / sol.s)));
    }
    Ok(MFunctionMatrix {
        energy,
        k_r,
        matrix: m,
    })
}

/// Outcome of the kernel test for `M(E) - T`.
#[derive(Clone, Debug)]
pub struct SpectralCondition {
    pub in_spectrum: bool,
    /// Smallest singular value of `M(E) - T`.
    pub gap: f64,
    /// Orthonormal vectors spanning the numerical kernel.
    pub kernel_basis: Vec<CVector>,
}

fn shifted(g: &GraphModel, t: &CouplingMatrix, energy: f64) -> Result<CMatrix> {
    if t.eps.len() != g.vertices().len() {
        return invalid("coupling matrix does not match the vertex count");
    }
    let mut m = build_m_function(g, energy)?.matrix;
    t.subtract_from(&mut m);
    Ok(m)
}

fn gap_of(m: &CMatrix) -> f64 {
    linalg::hermitian_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, |acc, v| acc.min(v.abs()))
}

pub fn spectral_condition(g: &GraphModel, t: &CouplingMatrix, energy: f64) -> Result<SpectralCondition> {
    spectral_condition_with_tol(g, t, energy, KERNEL_TOL)
}

pub fn spectral_condition_with_tol(
    g: &GraphModel,
    t: &CouplingMatrix,
    energy: f64,
    tol: f64,
) -> Result<SpectralCondition> {
    let m = shifted(g, t, energy)?;
    // M(E) - T is Hermitian, so singular values are |eigenvalues|.
    let pairs = linalg::hermitian_eigen(&m);
    let gap = pairs.iter().fold(f64::INFINITY, |acc, p| acc.min(p.0.abs()));
    let kernel_basis: Vec<CVector> = pairs
        .into_iter()
        .filter(|(v, _)| v.abs() <= tol)
        .map(|(_, x)| x)
        .collect();
    Ok(SpectralCondition {
        in_spectrum: gap <= tol,
        gap,
        kernel_basis,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanSample {
    pub energy: f64,
    pub gap: f64,
    pub in_spectrum: bool,
}

/// A refined eigenvalue found by the scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScannedEigenvalue {
    pub energy: f64,
    pub gap: f64,
    /// Number of (spin-resolved) kernel vectors at the refined energy.
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SpectrumScan {
    pub samples: Vec<ScanSample>,
    pub eigenvalues: Vec<ScannedEigenvalue>,
    /// Dirichlet eigenvalues of the edges inside the window. The M-function
    /// says nothing about them; they are excluded from the scan.
    pub dirichlet_points: Vec<f64>,
    /// Dirichlet points at which the gap extrapolates to zero from outside
    /// the excluded neighbourhood. Whether they belong to the spectrum needs
    /// a separate (Schnol-type) argument.
    pub dirichlet_coincident: Vec<f64>,
}

impl SpectrumScan {
    /// `E,gap,in_spectrum` rows: grid samples merged with refined roots.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<ScanSample> = self.samples.clone();
        rows.extend(self.eigenvalues.iter().map(|e| ScanSample {
            energy: e.energy,
            gap: e.gap,
            in_spectrum: true,
        }));
        rows.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        let mut out = String::from("E,gap,in_spectrum\n");
        for r in rows {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::output::fmt_sig(r.energy),
                crate::output::fmt_sig(r.gap),
                r.in_spectrum
            ));
        }
        out
    }
}

/// Options for [`scan_spectrum_with`].
#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub grid_step: f64,
    pub tol: f64,
    pub exclusion: f64,
    pub dirichlet_step: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid_step: 0.01,
            tol: KERNEL_TOL,
            exclusion: DIRICHLET_EXCLUSION,
            dirichlet_step: edge::DIRICHLET_SCAN_STEP,
        }
    }
}

/// Dirichlet eigenvalues of all edges in `window`, merged.
pub fn graph_dirichlet_points(g: &GraphModel, window: (f64, f64), step: f64) -> Result<Vec<f64>> {
    let mut seen: Vec<&EdgePotential> = Vec::new();
    let mut pts = Vec::new();
    for e in g.edges() {
        if seen.contains(&&e.potential) {
            continue;
        }
        seen.push(&e.potential);
        pts.extend(edge::dirichlet_eigenvalues_with_step(&e.potential, g.k_r(), window, step)?);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    Ok(pts)
}

pub fn scan_spectrum(
    g: &GraphModel,
    t: &CouplingMatrix,
    window: (f64, f64),
    grid_step: f64,
) -> Result<SpectrumScan> {
    scan_spectrum_with(
        g,
        t,
        window,
        &ScanOptions {
            grid_step,
            ..ScanOptions::default()
        },
    )
}

/// Samples the gap of `M(E) - T` on a grid, refines local minima by
/// golden-section search and keeps those whose gap falls below `tol`.
pub fn scan_spectrum_with(
    g: &GraphModel,
    t: &CouplingMatrix,
    window: (f64, f64),
    opts: &ScanOptions,
) -> Result<SpectrumScan> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return invalid(format!("window [{lo}, {hi}] must be finite with lo < hi"));
    }
    if !(opts.grid_step > 0.0) {
        return invalid("grid step must be positive");
    }
    let dirichlet = graph_dirichlet_points(g, (lo - opts.exclusion, hi + opts.exclusion), opts.dirichlet_step)?;
    let excluded = |e: f64| dirichlet.iter().any(|d| (e - d).abs() < opts.exclusion);

    let n = ((hi - lo) / opts.grid_step).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n)
        .map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 })
        .filter(|&e| !excluded(e))
        .collect();
    let gap_at = |e: f64| -> Result<f64> { Ok(gap_of(&shifted(g, t, e)?)) };
    let gaps = grid.par_iter().map(|&e| gap_at(e)).collect::<Result<Vec<_>>>()?;

    // Contiguous runs of grid points not interrupted by an exclusion zone.
    let mut runs: Vec<std::ops::Range<usize>> = Vec::new();
    let mut start = 0;
    for i in 1..=grid.len() {
        if i == grid.len() || grid[i] - grid[i - 1] > 1.5 * opts.grid_step {
            runs.push(start..i);
            start = i;
        }
    }

    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for run in runs {
        let idx: Vec<usize> = run.collect();
        if idx.len() < 2 {
            continue;
        }
        for w in 0..idx.len() {
            let i = idx[w];
            let left = (w > 0).then(|| idx[w - 1]);
            let right = (w + 1 < idx.len()).then(|| idx[w + 1]);
            match (left, right) {
                (Some(l), Some(r)) if gaps[i] <= gaps[l] && gaps[i] < gaps[r] => {
                    brackets.push((grid[l], grid[r]));
                }
                // Window ends may hold a root themselves.
                (None, Some(r)) if grid[i] == lo && gaps[i] < gaps[r] => brackets.push((grid[i], grid[r])),
                (Some(l), None) if grid[i] == hi && gaps[i] < gaps[l] => brackets.push((grid[l], grid[i])),
                _ => {}
            }
        }
    }

    // Keep refinement away from the excluded neighbourhoods.
    let mut split = Vec::with_capacity(brackets.len());
    for (a, b) in brackets {
        let mut cur = a;
        for &d in dirichlet.iter().filter(|&&d| d > a && d < b) {
            if d - opts.exclusion > cur {
                split.push((cur, d - opts.exclusion));
            }
            cur = cur.max(d + opts.exclusion);
        }
        if b > cur {
            split.push((cur, b));
        }
    }

    let mut eigenvalues: Vec<ScannedEigenvalue> = split
        .par_iter()
        .map(|&(a, b)| -> Result<Option<ScannedEigenvalue>> {
            let (e, gap) = golden_section(gap_at, a, b, 1e-10)?;
            let at_exclusion = dirichlet.iter().any(|d| ((e - d).abs() - opts.exclusion).abs() < 1e-8);
            if gap > opts.tol || at_exclusion {
                return Ok(None);
            }
            let multiplicity = linalg::hermitian_eigenvalues(&shifted(g, t, e)?)
                .into_iter()
                .filter(|v| v.abs() <= 1e-6)
                .count();
            Ok(Some(ScannedEigenvalue {
                energy: e,
                gap,
                multiplicity,
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    eigenvalues.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    eigenvalues.dedup_by(|a, b| (a.energy - b.energy).abs() <= 1e-8);

    let dirichlet_points: Vec<f64> = dirichlet.iter().copied().filter(|d| (lo..=hi).contains(d)).collect();
    let mut dirichlet_coincident = Vec::new();
    for &d in &dirichlet_points {
        let mut hits = false;
        for side in [-1.0, 1.0] {
            let e1 = d + side * opts.exclusion;
            let e2 = d + side * 2.0 * opts.exclusion;
            if let (Ok(g1), Ok(g2)) = (gap_at(e1), gap_at(e2)) {
                // Linear extrapolation of the gap into the excluded point.
                if (2.0 * g1 - g2).abs() <= 1e-6 && g1 < g2 {
                    hits = true;
                }
            }
        }
        if hits {
            dirichlet_coincident.push(d);
        }
    }

    let samples = grid
        .iter()
        .zip(&gaps)
        .map(|(&energy, &gap)| ScanSample {
            energy,
            gap,
            in_spectrum: gap <= opts.tol,
        })
        .collect();
    Ok(SpectrumScan {
        samples,
        eigenvalues,
        dirichlet_points,
        dirichlet_coincident,
    })
}

/// Samples of one edge of an eigenfunction.
#[derive(Clone, Debug)]
pub struct EdgeSamples {
    pub edge: usize,
    pub ts: Vec<f64>,
    pub values: Vec<[Complex64; 2]>,
}

#[derive(Clone, Debug)]
pub struct EigenfunctionOnGraph {
    pub energy: f64,
    pub vertex_values: Vec<[Complex64; 2]>,
    pub edges: Vec<EdgeSamples>,
    /// Largest relative residual of the scalar edge equation, checked with
    /// second differences on the gauge-transformed samples.
    pub ode_residual: f64,
}

impl EigenfunctionOnGraph {
    /// Largest mismatch between edge end samples and the vertex values.
    pub fn continuity_defect(&self, g: &GraphModel) -> f64 {
        let mut worst: f64 = 0.0;
        for es in &self.edges {
            let e = &g.edges()[es.edge];
            let first = es.values[0];
            let last = es.values[es.values.len() - 1];
            for k in 0..2 {
                worst = worst.max((first[k] - self.vertex_values[e.tail][k]).norm());
                worst = worst.max((last[k] - self.vertex_values[e.head][k]).norm());
            }
        }
        worst
    }
}

/// `Theta(t) = e^{i a t} (cos k_R t + i sigma sin k_R t)`.
fn theta(a: f64, k_r: f64, sigma: &Mat2, t: f64) -> Mat2 {
    let (sin, cos) = (k_r * t).sin_cos();
    (Mat2::identity() * Complex64::from(cos) + sigma * (I * sin)) * cis(a * t)
}

fn apply(m: &Mat2, v: [Complex64; 2]) -> [Complex64; 2] {
    [
        m[(0, 0)] * v[0] + m[(0, 1)] * v[1],
        m[(1, 0)] * v[0] + m[(1, 1)] * v[1],
    ]
}

/// Rebuilds the eigenfunction with vertex values `xi`, which must lie in the
/// kernel of `M(E) - T` (couplings taken from the graph).
pub fn reconstruct_eigenfunction(
    g: &GraphModel,
    energy: f64,
    xi: &CVector,
    samples_per_edge: usize,
) -> Result<EigenfunctionOnGraph> {
    let n = g.vertices().len();
    if xi.len() != 2 * n {
        return invalid(format!("kernel vector has length {}, expected {}", xi.len(), 2 * n));
    }
    if samples_per_edge < 3 {
        return invalid("need at least three samples per edge");
    }
    let m = shifted(g, &CouplingMatrix::from_graph(g), energy)?;
    let residual = (&m * xi).norm();
    let scale = linalg::max_abs_entry(&m).max(1.0);
    if residual > KERNEL_TOL * scale * xi.norm().max(1e-300) {
        return invalid(format!("vector is not in the kernel of M(E) - T (residual {residual:e})"));
    }

    let k_r = g.k_r();
    let z = energy + k_r * k_r;
    let vertex_values: Vec<[Complex64; 2]> = (0..n).map(|v| [xi[2 * v], xi[2 * v + 1]]).collect();
    let mut edges = Vec::with_capacity(g.edges().len());
    let mut worst: f64 = 0.0;
    for (k, e) in g.edges().iter().enumerate() {
        let l = e.length;
        let ts: Vec<f64> = (0..samples_per_edge)
            .map(|j| if j + 1 == samples_per_edge { l } else { l * j as f64 / (samples_per_edge - 1) as f64 })
            .collect();
        let prof = edge::fundamental_profile(&e.potential, z, &ts)?;
        let end = prof[prof.len() - 1];
        let tau = g.transport(k).matrix;
        let sigma = g.sigma(k);
        let a = g.flux_integral(k) / l;
        let fa = vertex_values[e.tail];
        let fb = apply(&tau.adjoint(), vertex_values[e.head]);
        let jump = [fb[0] - fa[0] * end.c, fb[1] - fa[1] * end.c];
        // g(t) = Theta(t)^* f(t) solves the scalar equation componentwise.
        let gauge_free: Vec<[Complex64; 2]> = prof
            .iter()
            .map(|p| {
                let r = p.s / end.s;
                [jump[0] * r + fa[0] * p.c, jump[1] * r + fa[1] * p.c]
            })
            .collect();
        let values: Vec<[Complex64; 2]> = gauge_free
            .iter()
            .zip(&ts)
            .map(|(v, &t)| apply(&theta(a, k_r, &sigma, t), *v))
            .collect();

        let h = l / (samples_per_edge - 1) as f64;
        let amp = gauge_free
            .iter()
            .flat_map(|v| v.iter().map(|c| c.norm()))
            .fold(0.0, f64::max)
            .max(1e-300);
        for j in 1..samples_per_edge - 1 {
            let q = e.potential.value_at(ts[j]) - z;
            for c in 0..2 {
                let d2 = (gauge_free[j + 1][c] - gauge_free[j][c] * 2.0 + gauge_free[j - 1][c]) / (h * h);
                let r = (d2 - gauge_free[j][c] * q).norm() / (amp * (1.0 + z.abs()));
                worst = worst.max(r);
            }
        }
        edges.push(EdgeSamples { edge: k, ts, values });
    }
    Ok(EigenfunctionOnGraph {
        energy,
        vertex_values,
        edges,
        ode_residual: worst,
    })
}

/// Part of the spectrum of a discrete operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SpectralSet {
    Point(f64),
    Interval(f64, f64),
}

/// Preimage of `delta_spec` under `E -> t_eps(E)` inside `window`, for
/// graphs with identical even edges and couplings `epsilon(v) = deg(v) eps`.
/// Points come back as degenerate intervals.
pub fn discrete_reduction_spectrum(
    pot: &EdgePotential,
    eps: f64,
    k_r: f64,
    delta_spec: &[SpectralSet],
    window: (f64, f64),
    step: f64,
) -> Result<Vec<(f64, f64)>> {
    if !pot.is_even(1e-12) {
        return invalid("the reduction needs an even edge potential");
    }
    let shift = k_r * k_r;
    let curve = SampledCurve::new(
        |e| {
            let sol = edge::solve_fundamental(pot, e + shift)?;
            if (sol.c - sol.s_prime).abs() > 1e-8 * sol.c.abs().max(1.0) {
                return invalid(format!("c(l) != s'(l) at E = {e}; potential is not even"));
            }
            Ok(sol.c + eps * sol.s)
        },
        window.0,
        window.1,
        step,
    )?;
    let mut parts = Vec::new();
    for set in delta_spec {
        match *set {
            SpectralSet::Point(v) => parts.extend(curve.level_set(v)?.into_iter().map(|x| (x, x))),
            SpectralSet::Interval(a, b) => parts.extend(curve.preimage(a, b)?),
        }
    }
    Ok(crate::roots::merge_intervals(parts))
}

/// The unweighted hopping operator `sum tau* xi(head) + sum tau xi(tail)`.
pub fn hopping_operator(g: &GraphModel) -> CMatrix {
    let n = g.vertices().len();
    let mut m = CMatrix::zeros(2 * n, 2 * n);
    for (k, e) in g.edges().iter().enumerate() {
        let tau = g.transport(k).matrix;
        add_block(&mut m, e.tail, e.head, &tau.adjoint());
        add_block(&mut m, e.head, e.tail, &tau);
    }
    m
}

/// `deg^{-1/2} H deg^{-1/2}`, unitarily equivalent to the degree-normalised
/// operator on the weighted space `l^2(V, C^2; deg)`.
pub fn weighted_discrete_operator(g: &GraphModel) -> CMatrix {
    let mut m = hopping_operator(g);
    let w: Vec<f64> = g
        .degrees()
        .iter()
        .flat_map(|(o, i)| {
            let d = 1.0 / ((o + i) as f64).sqrt();
            [d, d]
        })
        .collect();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            m[(r, c)] *= w[r] * w[c];
        }
    }
    m
}

pub fn discrete_spectrum(g: &GraphModel) -> Vec<f64> {
    linalg::hermitian_eigenvalues(&weighted_discrete_operator(g))
}
