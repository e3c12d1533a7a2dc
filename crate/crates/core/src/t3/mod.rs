//! The T3 (dice) lattice on an `N x N` torus.
//!
//! Hubs `alpha_{m,n} = m a1 + n a2` with `a1 = (3/2, -sqrt3/2)`,
//! `a2 = (3/2, sqrt3/2)`; rims `beta = alpha + (1, 0)` and
//! `gamma = alpha + (1/2, sqrt3/2)`. Every edge has length 1 and leaves a
//! hub; edge `j` of `alpha_{m,n}` points along `(cos(pi j/3), sin(pi j/3))`.
//! `omega` is the flux through an elementary rhombus.

use std::f64::consts::PI;

use serde::Serialize;

use crate::edge::{self, EdgePotential};
use crate::error::{invalid, Error, Result};
use crate::graph::{edge_magnetic_potential, sigma_matrix, transport_matrix, MagneticField};
use crate::linalg::Mat2;

mod harper;
mod operators;
mod spectrum;
mod sweep;

pub use harper::{harper_bloch_bands, harper_energy, is_harper_flux, HarperBands};
pub use operators::{assemble_aastar_closed_form, rashba_hopping_operator, spinless_delta, BipartiteOperators};
pub use spectrum::{
    assemble_t3_spectrum, assemble_t3_spectrum_with, cluster_spectrum, flat_band_certificate, localization_roots,
    localization_roots_with_step,
    magneto_spin_bands, zero_mode_check, AssemblyOptions, FlatBandCertificate, FlatSource, LocalizationEquation,
    MagnetoSpinReport, SpectralCluster, SpectrumResult, SpectrumRow,
};
pub use sweep::{
    butterfly_csv, butterfly_sweep, rational_fluxes, smallest_commensurate_n, ButterflyColumn, ButterflyPoint, EigenKind,
    TorusChoice,
};

/// Tolerance for `omega N / 2 pi` being an integer.
pub const COMMENSURABILITY_TOL: f64 = 1e-12;

/// Physical parameters of the lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct T3Params {
    pub omega: f64,
    pub k_r: f64,
    /// Coupling constant at the hubs.
    pub lambda: f64,
    /// Coupling constant at the rims.
    pub mu: f64,
    pub pot: EdgePotential,
}

impl T3Params {
    pub fn new(omega: f64, k_r: f64, lambda: f64, mu: f64, pot: EdgePotential) -> Result<Self> {
        if ![omega, k_r, lambda, mu].iter().all(|v| v.is_finite()) {
            return invalid("T3 parameters must be finite");
        }
        if (pot.length() - 1.0).abs() > 1e-12 {
            return invalid(format!("T3 edges have length 1, potential has length {}", pot.length()));
        }
        Ok(Self {
            omega,
            k_r,
            lambda,
            mu,
            pot,
        })
    }

    /// Zero potential and zero couplings.
    pub fn free(omega: f64, k_r: f64) -> Self {
        Self::new(omega, k_r, 0.0, 0.0, EdgePotential::zero(1.0).expect("unit length")).expect("finite parameters")
    }

    /// Field strength `B` producing rhombus flux `omega`.
    pub fn field(&self) -> MagneticField {
        MagneticField {
            strength: 4.0 * self.omega / 3f64.sqrt(),
        }
    }

    /// `a(E) = 6 c + lambda s` and `b(E) = 3 s' + mu s` at `E + k_R^2`.
    pub fn ab(&self, energy: f64) -> Result<(f64, f64)> {
        let sol = edge::solve_fundamental(&self.pot, energy + self.k_r * self.k_r)?;
        Ok((
            6.0 * sol.c + self.lambda * sol.s,
            3.0 * sol.s_prime + self.mu * sol.s,
        ))
    }
}

/// Finite quotient of the lattice with period `n` in both directions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct T3Torus {
    pub n: usize,
}

impl T3Torus {
    /// Requires `omega n` to be a multiple of `2 pi`, so that every phase in
    /// the hopping operators is `n`-periodic.
    pub fn new(n: usize, omega: f64) -> Result<Self> {
        if n == 0 {
            return invalid("torus period must be positive");
        }
        if !is_commensurate(omega, n) {
            return Err(Error::Incommensurate { omega, n });
        }
        Ok(Self { n })
    }

    pub fn hubs(&self) -> usize {
        self.n * self.n
    }

    pub fn rims(&self) -> usize {
        2 * self.n * self.n
    }

    /// Hub index of `alpha_{m,n}`, indices taken mod `N`.
    pub fn hub(&self, m: i64, n: i64) -> usize {
        let (m, n) = (self.wrap(m), self.wrap(n));
        m * self.n + n
    }

    /// Rim index of `beta_{m,n}`.
    pub fn beta(&self, m: i64, n: i64) -> usize {
        self.hub(m, n)
    }

    /// Rim index of `gamma_{m,n}`.
    pub fn gamma(&self, m: i64, n: i64) -> usize {
        self.hubs() + self.hub(m, n)
    }

    pub fn wrap(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }
}

pub fn is_commensurate(omega: f64, n: usize) -> bool {
    if !omega.is_finite() {
        return false;
    }
    let turns = omega * n as f64 / (2.0 * PI);
    (turns - turns.round()).abs() <= COMMENSURABILITY_TOL * turns.abs().max(1.0)
}

/// Position of `alpha_{m,n}`.
pub fn hub_position(m: i64, n: i64) -> [f64; 2] {
    [1.5 * (m + n) as f64, 0.5 * 3f64.sqrt() * (n - m) as f64]
}

/// Unit direction of edge `j` (1..=6).
pub fn edge_direction(j: usize) -> Result<[f64; 2]> {
    if !(1..=6).contains(&j) {
        return invalid(format!("T3 edge index must be in 1..=6, got {j}"));
    }
    let angle = PI * j as f64 / 3.0;
    Ok([angle.cos(), angle.sin()])
}

/// Transport matrix of edge `j` leaving `alpha_{m,n}`.
///
/// Built from the symmetric-gauge potential and the edge spin matrix, which
/// gives `a_{m,n,1} = omega (2m + n)`, `a_{m,n,2} = omega (m + 2n)`,
/// `a_{m,n,3} = omega (n - m)` and `tau_{m,n,j+3} = tau_{m,n,j}^*`.
pub fn t3_tau(m: i64, n: i64, j: usize, params: &T3Params) -> Result<Mat2> {
    if j > 3 && j <= 6 {
        return Ok(t3_tau(m, n, j - 3, params)?.adjoint());
    }
    let dir = edge_direction(j)?;
    let a = edge_magnetic_potential(params.field(), hub_position(m, n), dir);
    transport_matrix(a, params.k_r, 1.0, &sigma_matrix(dir)?)
}
