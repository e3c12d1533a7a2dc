//! Classified spectrum of the T3 quantum graph.
//!
//! Away from the Dirichlet spectrum of an edge, `E` is in the spectrum iff
//! `(a + b)/2` is an eigenvalue of `[[(b - a)/2, A*], [A, (a - b)/2]]`,
//! i.e. iff one of
//!
//! * `a(E) b(E)` is a nonzero point of `spec A*A`;
//! * `a(E) = 0` and `ker A != 0`;
//! * `b(E) = 0` and `ker A* != 0`.
//!
//! Dirichlet eigenvalues always belong to the spectrum.

use num_complex::Complex64;
use serde::Serialize;

use super::operators::BipartiteOperators;
use super::{T3Params, T3Torus};
use crate::edge;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, CVector};
use crate::output::fmt_sig;
use crate::roots::{merge_intervals, SampledCurve};
use crate::susy::{kernel_dims, kernel_dims_from_gram, KernelDims};

/// Which condition produced an isolated (infinitely degenerate) level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlatSource {
    /// `a(E) b(E)` equals a flat eigenvalue of `A*A`.
    AbLevel,
    /// `a(E) = 0` with a kernel of `A`.
    AZero,
    /// `b(E) = 0` with a kernel of `A*`.
    BZero,
    /// `s(1; E + k_R^2) = 0`.
    Dirichlet,
}

impl FlatSource {
    pub fn as_str(self) -> &'static str {
        match self {
            FlatSource::AbLevel => "ab-level",
            FlatSource::AZero => "a-zero",
            FlatSource::BZero => "b-zero",
            FlatSource::Dirichlet => "dirichlet",
        }
    }
}

/// A group of torus eigenvalues of `A*A`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralCluster {
    /// Eigenvalues merged into `[lo, hi]` (possibly a single point).
    Band { lo: f64, hi: f64, count: usize },
    /// A macroscopically degenerate eigenvalue.
    Flat { value: f64, multiplicity: usize },
}

/// Groups sorted eigenvalues whose consecutive gaps are below `cluster_tol`.
/// Groups with spread below `1e-8` holding at least `N^2/2` values are flat.
pub fn cluster_spectrum(eigs: &[f64], n: usize, cluster_tol: f64) -> Vec<SpectralCluster> {
    let mut sorted = eigs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] - sorted[i - 1] >= cluster_tol {
            let group = &sorted[start..i];
            let (lo, hi) = (group[0], group[group.len() - 1]);
            if hi - lo < 1e-8 && 2 * group.len() >= n * n {
                out.push(SpectralCluster::Flat {
                    value: group.iter().sum::<f64>() / group.len() as f64,
                    multiplicity: group.len(),
                });
            } else {
                out.push(SpectralCluster::Band {
                    lo,
                    hi,
                    count: group.len(),
                });
            }
            start = i;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssemblyOptions {
    /// Sampling step in `E` for the root searches.
    pub step: f64,
    /// Gap below which torus eigenvalues merge; `None` means `10 / N^2`.
    pub cluster_tol: Option<f64>,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            step: 0.01,
            cluster_tol: None,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SpectrumResult {
    pub window: (f64, f64),
    /// Continuous part: preimages of the band clusters under `a b`.
    pub bands: Vec<(f64, f64)>,
    pub flat_eigenvalues: Vec<(f64, FlatSource)>,
    pub points_sigma2: Vec<f64>,
    pub points_sigma3: Vec<f64>,
    pub dirichlet_points: Vec<f64>,
    pub clusters: Vec<SpectralCluster>,
    pub kernels: Option<KernelDims>,
}

/// One line of the spectrum CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub e_lo: f64,
    pub e_hi: f64,
    pub label: &'static str,
    pub source: &'static str,
}

impl SpectrumResult {
    /// All members sorted by energy, tagged with label and origin.
    pub fn rows(&self) -> Vec<SpectrumRow> {
        let mut rows = Vec::new();
        for &(lo, hi) in &self.bands {
            rows.push(SpectrumRow {
                e_lo: lo,
                e_hi: hi,
                label: "Sigma1",
                source: "band",
            });
        }
        for &(e, src) in &self.flat_eigenvalues {
            rows.push(SpectrumRow {
                e_lo: e,
                e_hi: e,
                label: "flat",
                source: src.as_str(),
            });
        }
        let mut points = |pts: &[f64], label, src: FlatSource| {
            for &e in pts {
                rows.push(SpectrumRow {
                    e_lo: e,
                    e_hi: e,
                    label,
                    source: src.as_str(),
                });
            }
        };
        points(&self.points_sigma2, "Sigma2", FlatSource::AZero);
        points(&self.points_sigma3, "Sigma3", FlatSource::BZero);
        points(&self.dirichlet_points, "Dirichlet", FlatSource::Dirichlet);
        rows.sort_by(|a, b| a.e_lo.total_cmp(&b.e_lo).then(a.e_hi.total_cmp(&b.e_hi)));
        rows
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("E_lo,E_hi,label,source\n");
        for r in self.rows() {
            out.push_str(&format!("{},{},{},{}\n", fmt_sig(r.e_lo), fmt_sig(r.e_hi), r.label, r.source));
        }
        out
    }

    /// Every isolated energy, regardless of origin.
    pub fn isolated_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.flat_eigenvalues.iter().map(|p| p.0).collect();
        pts.extend(&self.points_sigma2);
        pts.extend(&self.points_sigma3);
        pts.extend(&self.dirichlet_points);
        pts.extend(self.bands.iter().filter(|b| b.0 == b.1).map(|b| b.0));
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// Bands of positive width.
    pub fn proper_bands(&self) -> Vec<(f64, f64)> {
        self.bands.iter().copied().filter(|b| b.1 > b.0).collect()
    }

    pub fn contains(&self, e: f64, tol: f64) -> bool {
        self.bands.iter().any(|&(lo, hi)| e >= lo - tol && e <= hi + tol)
            || self.isolated_points().iter().any(|p| (p - e).abs() <= tol)
    }
}

fn check_window(window: (f64, f64)) -> Result<()> {
    if !(window.0.is_finite() && window.1.is_finite() && window.0 < window.1) {
        return invalid(format!("window [{}, {}] must be finite with lo < hi", window.0, window.1));
    }
    Ok(())
}

/// Turns a classified `spec A*A` into energies.
fn assemble_from_clusters(
    params: &T3Params,
    clusters: &[SpectralCluster],
    kernels: KernelDims,
    window: (f64, f64),
    step: f64,
) -> Result<SpectrumResult> {
    check_window(window)?;
    let (lo, hi) = window;
    let ab = SampledCurve::new(
        |e| {
            let (a, b) = params.ab(e)?;
            Ok(a * b)
        },
        lo,
        hi,
        step,
    )?;
    let mut bands = Vec::new();
    let mut flat = Vec::new();
    for c in clusters {
        match *c {
            SpectralCluster::Band { lo, hi, .. } => bands.extend(ab.preimage(lo, hi)?),
            SpectralCluster::Flat { value, .. } => {
                flat.extend(ab.level_set(value)?.into_iter().map(|e| (e, FlatSource::AbLevel)));
            }
        }
    }
    let bands = merge_intervals(bands);
    flat.sort_by(|a, b| a.0.total_cmp(&b.0));

    let points_sigma2 = if kernels.ker_a > 0 {
        SampledCurve::new(|e| Ok(params.ab(e)?.0), lo, hi, step)?.level_set(0.0)?
    } else {
        Vec::new()
    };
    let points_sigma3 = if kernels.ker_a_star > 0 {
        SampledCurve::new(|e| Ok(params.ab(e)?.1), lo, hi, step)?.level_set(0.0)?
    } else {
        Vec::new()
    };
    let dirichlet_points = edge::dirichlet_eigenvalues(&params.pot, params.k_r, window)?;
    Ok(SpectrumResult {
        window,
        bands,
        flat_eigenvalues: flat,
        points_sigma2,
        points_sigma3,
        dirichlet_points,
        clusters: clusters.to_vec(),
        kernels: Some(kernels),
    })
}

pub fn assemble_t3_spectrum(params: &T3Params, torus: &T3Torus, window: (f64, f64)) -> Result<SpectrumResult> {
    assemble_t3_spectrum_with(params, torus, window, &AssemblyOptions::default())
}

pub fn assemble_t3_spectrum_with(
    params: &T3Params,
    torus: &T3Torus,
    window: (f64, f64),
    opts: &AssemblyOptions,
) -> Result<SpectrumResult> {
    check_window(window)?;
    let ops = BipartiteOperators::build(params, torus)?;
    let eigs = linalg::hermitian_eigenvalues(&ops.a_star_a());
    let n = torus.n;
    let tol = opts.cluster_tol.unwrap_or(10.0 / (n * n) as f64);
    let clusters = cluster_spectrum(&eigs, n, tol);
    let kernels = kernel_dims_from_gram(&eigs, 2 * torus.rims());
    assemble_from_clusters(params, &clusters, kernels, window, opts.step)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlatBandCertificate {
    pub is_flat: bool,
    /// `||A*A - 6||` in the operator norm.
    pub deviation: f64,
}

/// Torus size up to which the deviation is computed by a dense eigensolve.
const DENSE_LIMIT: usize = 12;
const LANCZOS_STEPS: usize = 120;

/// Checks whether `A*A` is the scalar 6. Large tori use Lanczos on the
/// sparse operator, whose extremal Ritz values bound the norm from below.
pub fn flat_band_certificate(params: &T3Params, torus: &T3Torus) -> Result<FlatBandCertificate> {
    let ops = BipartiteOperators::build(params, torus)?;
    let deviation = if torus.n <= DENSE_LIMIT {
        let mut m = ops.a_star_a();
        for i in 0..m.nrows() {
            m[(i, i)] -= 6.0;
        }
        linalg::hermitian_norm(&m)
    } else {
        lanczos_norm(&ops)
    };
    Ok(FlatBandCertificate {
        is_flat: deviation <= 1e-10,
        deviation,
    })
}

fn lanczos_norm(ops: &BipartiteOperators) -> f64 {
    let dim = 2 * ops.torus.hubs();
    let apply = |x: &CVector| ops.apply_a_star(&ops.apply_a(x)) - x * Complex64::from(6.0);
    let start = CVector::from_fn(dim, |i, _| linalg::cis(0.7 * i as f64 + 0.1 * (i * i) as f64));
    linalg::lanczos_extremal_abs(apply, start, LANCZOS_STEPS)
}

/// Kernel dimensions of `A` and `A*` (equivalently of `A*A` and `AA*`).
pub fn zero_mode_check(params: &T3Params, torus: &T3Torus) -> Result<KernelDims> {
    Ok(kernel_dims(&BipartiteOperators::build(params, torus)?.a()))
}

/// Scalar equations for the degenerate levels at `A*A = 6`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocalizationEquation {
    /// `(c + lambda/6 s)(s' + mu/3 s) = 1/3`.
    Product,
    /// `s' + mu/3 s = 0`.
    Rim,
    /// `s = 0`.
    Dirichlet,
}

pub fn localization_roots(params: &T3Params, which: LocalizationEquation, window: (f64, f64)) -> Result<Vec<f64>> {
    localization_roots_with_step(params, which, window, 0.01)
}

pub fn localization_roots_with_step(
    params: &T3Params,
    which: LocalizationEquation,
    window: (f64, f64),
    step: f64,
) -> Result<Vec<f64>> {
    check_window(window)?;
    let shift = params.k_r * params.k_r;
    let (lambda, mu) = (params.lambda, params.mu);
    match which {
        LocalizationEquation::Product => SampledCurve::new(
            |e| {
                let s = edge::solve_fundamental(&params.pot, e + shift)?;
                Ok((s.c + lambda / 6.0 * s.s) * (s.s_prime + mu / 3.0 * s.s) - 1.0 / 3.0)
            },
            window.0,
            window.1,
            step,
        )?
        .level_set(0.0),
        LocalizationEquation::Rim => SampledCurve::new(
            |e| {
                let s = edge::solve_fundamental(&params.pot, e + shift)?;
                Ok(s.s_prime + mu / 3.0 * s.s)
            },
            window.0,
            window.1,
            step,
        )?
        .level_set(0.0),
        LocalizationEquation::Dirichlet => edge::dirichlet_eigenvalues(&params.pot, params.k_r, window),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MagnetoSpinReport {
    /// Largest distance of a torus eigenvalue of `A*A` from `[0,3] u {6} u [9,12]`.
    pub max_excursion: f64,
    pub multiplicity_six: usize,
    /// Spin component (0 or 1) on which `A*A` acts as 6.
    pub degenerate_component: Option<usize>,
    pub spectrum: SpectrumResult,
}

fn near_multiple(x: f64, period: f64, offset: f64) -> bool {
    let r = (x - offset).rem_euclid(period);
    r.min(period - r) <= 1e-12
}

/// The magneto-spin case `k_R in pi/2 + pi Z`, `omega in +-pi/6 + pi Z`,
/// where `spec A*A = [0,3] u {6} u [9,12]` on the infinite lattice.
pub fn magneto_spin_bands(params: &T3Params, torus: &T3Torus, window: (f64, f64)) -> Result<MagnetoSpinReport> {
    use std::f64::consts::PI;
    if !near_multiple(params.k_r, PI, PI / 2.0) || !super::is_harper_flux(params.omega) {
        return Err(Error::Unsupported(format!(
            "magneto-spin bands need k_R in pi/2 + pi Z and omega in +-pi/6 + pi Z (got k_R = {}, omega = {})",
            params.k_r, params.omega
        )));
    }
    let ops = BipartiteOperators::build(params, torus)?;
    let aa = ops.a_star_a();
    let eigs = linalg::hermitian_eigenvalues(&aa);
    let dist = |v: f64| {
        let d1 = if v < 0.0 { -v } else if v > 3.0 { v - 3.0 } else { 0.0 };
        let d2 = (v - 6.0).abs();
        let d3 = if v < 9.0 { 9.0 - v } else if v > 12.0 { v - 12.0 } else { 0.0 };
        d1.min(d2).min(d3)
    };
    let max_excursion = eigs.iter().map(|&v| dist(v)).fold(0.0, f64::max);
    let multiplicity_six = eigs.iter().filter(|v| (*v - 6.0).abs() <= 1e-8).count();

    let hubs = torus.hubs();
    let degenerate_component = (0..2).find(|&s| {
        (0..hubs).all(|r| {
            (0..hubs).all(|c| {
                let want = if r == c { 6.0 } else { 0.0 };
                (aa[(2 * r + s, 2 * c + s)] - want).norm() <= 1e-10
            })
        })
    });

    let clusters = [
        SpectralCluster::Band {
            lo: 0.0,
            hi: 3.0,
            count: 0,
        },
        SpectralCluster::Flat {
            value: 6.0,
            multiplicity: multiplicity_six,
        },
        SpectralCluster::Band {
            lo: 9.0,
            hi: 12.0,
            count: 0,
        },
    ];
    let kernels = kernel_dims_from_gram(&eigs, 2 * torus.rims());
    let spectrum = assemble_from_clusters(params, &clusters, kernels, window, 0.01)?;
    Ok(MagnetoSpinReport {
        max_excursion,
        multiplicity_six,
        degenerate_component,
        spectrum,
    })
}
