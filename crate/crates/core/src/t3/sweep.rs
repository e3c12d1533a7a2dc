//! Sweeps of `spec A*A` over the flux.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::operators::BipartiteOperators;
use super::spectrum::{assemble_t3_spectrum, cluster_spectrum, SpectralCluster, SpectrumResult};
use super::{is_commensurate, T3Params, T3Torus};
use crate::error::Result;
use crate::linalg;
use crate::output::fmt_sig;
use crate::susy::kernel_dims_from_gram;

/// Smallest `N <= max_n` with `omega N in 2 pi Z`.
pub fn smallest_commensurate_n(omega: f64, max_n: usize) -> Option<usize> {
    (1..=max_n).find(|&n| is_commensurate(omega, n))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenKind {
    Band,
    Flat,
    Kernel,
}

impl EigenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EigenKind::Band => "band",
            EigenKind::Flat => "flat",
            EigenKind::Kernel => "kernel",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ButterflyPoint {
    pub index: usize,
    pub value: f64,
    pub kind: EigenKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct ButterflyColumn {
    pub omega: f64,
    pub n: Option<usize>,
    pub points: Vec<ButterflyPoint>,
    pub spectrum: Option<SpectrumResult>,
    /// Set when this flux value could not be processed.
    pub error: Option<String>,
}

fn column(base: &T3Params, omega: f64, n: usize, window: Option<(f64, f64)>) -> Result<ButterflyColumn> {
    let params = T3Params { omega, ..base.clone() };
    let torus = T3Torus::new(n, omega)?;
    let ops = BipartiteOperators::build(&params, &torus)?;
    let eigs = linalg::hermitian_eigenvalues(&ops.a_star_a());
    let kernel = kernel_dims_from_gram(&eigs, 2 * torus.rims()).ker_a;
    let clusters = cluster_spectrum(&eigs, n, 10.0 / (n * n) as f64);
    let flat: Vec<f64> = clusters
        .iter()
        .filter_map(|c| match c {
            SpectralCluster::Flat { value, .. } => Some(*value),
            _ => None,
        })
        .collect();
    let points = eigs
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            let kind = if index < kernel {
                EigenKind::Kernel
            } else if flat.iter().any(|f| (f - value).abs() < 1e-8) {
                EigenKind::Flat
            } else {
                EigenKind::Band
            };
            ButterflyPoint { index, value, kind }
        })
        .collect();
    let spectrum = window.map(|w| assemble_t3_spectrum(&params, &torus, w)).transpose()?;
    Ok(ButterflyColumn {
        omega,
        n: Some(n),
        points,
        spectrum,
        error: None,
    })
}

/// How the torus size is picked for each flux value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TorusChoice {
    Fixed(usize),
    /// Smallest commensurate size up to the bound.
    Auto(usize),
}

/// `spec A*A` (and optionally the assembled spectrum) for every flux value.
/// Failures are recorded per column; the sweep carries on. Columns come
/// back in input order.
pub fn butterfly_sweep(
    base: &T3Params,
    omegas: &[f64],
    torus: TorusChoice,
    window: Option<(f64, f64)>,
) -> Vec<ButterflyColumn> {
    omegas
        .par_iter()
        .map(|&omega| {
            let n = match torus {
                TorusChoice::Fixed(n) => Some(n),
                TorusChoice::Auto(max) => smallest_commensurate_n(omega, max),
            };
            let failed = |n, msg: String| ButterflyColumn {
                omega,
                n,
                points: Vec::new(),
                spectrum: None,
                error: Some(msg),
            };
            match n {
                None => failed(None, format!("no commensurate torus for omega = {omega}")),
                Some(n) => column(base, omega, n, window).unwrap_or_else(|e| failed(Some(n), e.to_string())),
            }
        })
        .collect()
}

/// Flux values `2 pi p / q` for `p = 0..q`.
pub fn rational_fluxes(q: usize) -> Vec<f64> {
    (0..q).map(|p| 2.0 * PI * p as f64 / q as f64).collect()
}

/// `omega,N,eigenvalue_index,value,kind`; failed columns are skipped.
pub fn butterfly_csv(columns: &[ButterflyColumn]) -> String {
    let mut out = String::from("omega,N,eigenvalue_index,value,kind\n");
    for c in columns {
        let Some(n) = c.n else { continue };
        for p in &c.points {
            out.push_str(&format!("{},{},{},{},{}\n", fmt_sig(c.omega), n, p.index, fmt_sig(p.value), p.kind.as_str()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_n() {
        assert_eq!(smallest_commensurate_n(0.0, 48), Some(1));
        assert_eq!(smallest_commensurate_n(PI / 2.0, 48), Some(4));
        assert_eq!(smallest_commensurate_n(PI / 6.0, 48), Some(12));
        assert_eq!(smallest_commensurate_n(2.0 * PI * 5.0 / 48.0, 48), Some(48));
        assert_eq!(smallest_commensurate_n(1.0, 48), None);
    }

    #[test]
    fn sweep_collapses_at_quarter_flux() {
        let base = T3Params::free(0.0, 0.0);
        let cols = butterfly_sweep(&base, &rational_fluxes(8), TorusChoice::Fixed(8), None);
        assert_eq!(cols.len(), 8);
        let quarter = &cols[2];
        assert!(quarter.points.iter().all(|p| (p.value - 6.0).abs() < 1e-12 && p.kind == EigenKind::Flat));
        let zero = &cols[0];
        let max = zero.points.iter().map(|p| p.value).fold(f64::MIN, f64::max);
        assert!((max - 18.0).abs() < 1e-10);
        assert!(zero.points.iter().all(|p| p.value >= -1e-10));
        let csv = butterfly_csv(&cols);
        assert!(csv.starts_with("omega,N,eigenvalue_index,value,kind\n0,8,0,"));
    }

    #[test]
    fn sweep_reports_bad_columns() {
        let base = T3Params::free(0.0, 0.0);
        let cols = butterfly_sweep(&base, &[PI / 2.0, 1.0], TorusChoice::Auto(12), None);
        assert!(cols[0].error.is_none());
        assert!(cols[1].error.is_some());
        let cols = butterfly_sweep(&base, &[PI / 2.0], TorusChoice::Fixed(3), None);
        assert!(cols[0].error.is_some());
    }
}
