//! Bloch bands of the triangular magnetic hopping operator at
//! `omega in +-pi/6 + pi Z`.
//!
//! After the gauge change `f(m,n) -> e^{3 i omega m n} f(m,n)` the operator
//! is periodic in `n`; Bloch momentum `q` in `n` and a period-2 Bloch
//! momentum `theta` in `m` reduce it to a 2x2 problem with
//! `E^2 / 4 = 1 + cos^2 q + cos q cos(q - theta)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

pub fn is_harper_flux(omega: f64) -> bool {
    if !omega.is_finite() {
        return false;
    }
    [PI / 6.0, -PI / 6.0].iter().any(|&off| {
        let r = (omega - off).rem_euclid(PI);
        r.min(PI - r) <= 1e-12
    })
}

/// Positive root `E(q, theta)`; the negative band is its mirror image.
pub fn harper_energy(q: f64, theta: f64) -> f64 {
    let c = q.cos();
    2.0 * (1.0 + c * c + c * (q - theta).cos()).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarperBands {
    pub lower: (f64, f64),
    pub upper: (f64, f64),
}

impl HarperBands {
    pub fn contains(&self, e: f64, tol: f64) -> bool {
        let inside = |(lo, hi): (f64, f64)| e >= lo - tol && e <= hi + tol;
        inside(self.lower) || inside(self.upper)
    }
}

/// Scans `q_i = 2 pi i / q_grid`, `theta_j = 2 pi j / theta_grid`.
pub fn harper_bloch_bands(omega: f64, q_grid: usize, theta_grid: usize) -> Result<HarperBands> {
    if !is_harper_flux(omega) {
        return Err(Error::Unsupported(format!(
            "the period-2 Bloch reduction needs omega in +-pi/6 + pi Z (got {omega}); use the torus eigensolve"
        )));
    }
    if q_grid < 101 || theta_grid < 101 {
        return invalid("Bloch grids need at least 101 points per direction");
    }
    let (lo, hi) = (0..q_grid)
        .into_par_iter()
        .map(|i| {
            let q = 2.0 * PI * i as f64 / q_grid as f64;
            (0..theta_grid).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), j| {
                let e = harper_energy(q, 2.0 * PI * j as f64 / theta_grid as f64);
                (lo.min(e), hi.max(e))
            })
        })
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    Ok(HarperBands {
        lower: (-hi, -lo),
        upper: (lo, hi),
    })
}
