//! Fundamental solutions of the scalar edge equation `-y'' + U y = z y`.
//!
//! `s` and `c` are fixed by `s(0) = c'(0) = 0`, `s'(0) = c(0) = 1`, so their
//! Wronskian `c s' - c' s` is identically one. Every spectral condition in
//! this crate is written in terms of the endpoint values `s(l), s'(l), c(l),
//! c'(l)` at `z = E + k_R^2`.
//!
//! Zero and constant potentials use closed forms. Sampled potentials are
//! interpolated linearly between grid points and integrated with a
//! fourth-order Magnus scheme whose one-step propagator has unit determinant,
//! so the Wronskian is preserved up to rounding.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::roots::SampledCurve;

/// Steps per unit length of the coarsest integration pass.
const BASE_STEPS: usize = 4096;
/// Finest allowed pass: `h >= l / 2^20`.
const MAX_STEPS: usize = 1 << 20;
/// Two successive passes (h and h/2) must agree to this (relative to max(1, |v|)).
const AGREEMENT: f64 = 1e-9;
/// Default energy step of the Dirichlet scan.
pub const DIRICHLET_SCAN_STEP: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Zero,
    Constant(f64),
    /// `(t, U(t))` knots, strictly increasing in `t`, from `0` to `l`.
    Sampled(Vec<(f64, f64)>),
}

/// A real potential on the edge `[0, l]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgePotential {
    kind: PotentialKind,
    length: f64,
}

fn check_length(length: f64) -> Result<()> {
    if length.is_finite() && length > 0.0 {
        Ok(())
    } else {
        invalid(format!("edge length {length} must be positive and finite"))
    }
}

impl EdgePotential {
    pub fn zero(length: f64) -> Result<Self> {
        check_length(length)?;
        Ok(Self {
            kind: PotentialKind::Zero,
            length,
        })
    }

    pub fn constant(value: f64, length: f64) -> Result<Self> {
        check_length(length)?;
        if !value.is_finite() {
            return invalid("constant potential must be finite");
        }
        Ok(Self {
            kind: PotentialKind::Constant(value),
            length,
        })
    }

    /// Builds a sampled potential; the edge length is the last knot.
    pub fn sampled(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return invalid("a sampled potential needs at least two knots");
        }
        if knots.iter().any(|(t, u)| !t.is_finite() || !u.is_finite()) {
            return invalid("sampled potential contains non-finite values");
        }
        if knots[0].0 != 0.0 {
            return invalid(format!("first knot must be at t = 0, found {}", knots[0].0));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return invalid("knots must be strictly increasing in t");
        }
        let length = knots[knots.len() - 1].0;
        check_length(length)?;
        Ok(Self {
            kind: PotentialKind::Sampled(knots),
            length,
        })
    }

    /// Parses the two-column `t value` format (`#` starts a comment).
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut knots = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |msg: String| Error::Parse {
                path: origin.to_string(),
                line: no + 1,
                msg,
            };
            let mut cols = line.split_whitespace();
            let (Some(t), Some(u), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(parse_err(format!("expected two columns, got {line:?}")));
            };
            let t: f64 = t.parse().map_err(|e| parse_err(format!("bad t {t:?}: {e}")))?;
            let u: f64 = u.parse().map_err(|e| parse_err(format!("bad value {u:?}: {e}")))?;
            knots.push((t, u));
        }
        Self::sampled(knots)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `U(t)`, linearly interpolated for sampled potentials.
    pub fn value_at(&self, t: f64) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant(u) => *u,
            PotentialKind::Sampled(knots) => {
                let t = t.clamp(0.0, self.length);
                let k = knots.partition_point(|(x, _)| *x <= t).clamp(1, knots.len() - 1);
                let (ta, ua) = knots[k - 1];
                let (tb, ub) = knots[k];
                ua + (ub - ua) * (t - ta) / (tb - ta)
            }
        }
    }

    /// Lower bound of the potential.
    pub fn min_value(&self) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant(u) => *u,
            PotentialKind::Sampled(knots) => knots.iter().map(|k| k.1).fold(f64::INFINITY, f64::min),
        }
    }

    /// Whether `U(t) = U(l - t)` at every knot, to `tol`.
    pub fn is_even(&self, tol: f64) -> bool {
        match &self.kind {
            PotentialKind::Sampled(knots) => knots
                .iter()
                .all(|&(t, u)| (u - self.value_at(self.length - t)).abs() <= tol),
            _ => true,
        }
    }
}

/// Endpoint data of the fundamental solutions at spectral parameter `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSolution {
    pub s: f64,
    pub s_prime: f64,
    pub c: f64,
    pub c_prime: f64,
    pub z: f64,
    /// Position along the edge at which the values were taken.
    pub l: f64,
}

impl EdgeSolution {
    /// `c s' - c' s`; equal to one for exact solutions.
    pub fn wronskian(&self) -> f64 {
        self.c * self.s_prime - self.c_prime * self.s
    }

    /// Scale of the products entering the Wronskian, for relative checks.
    pub fn wronskian_scale(&self) -> f64 {
        (self.c * self.s_prime).abs() + (self.c_prime * self.s).abs()
    }

    fn from_transfer(y: &Transfer, z: f64, l: f64) -> Self {
        Self {
            c: y[0],
            s: y[1],
            c_prime: y[2],
            s_prime: y[3],
            z,
            l,
        }
    }
}

impl fmt::Display for EdgeSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "s={:.12} s'={:.12} c={:.12} c'={:.12} (z={}, l={})",
            self.s, self.s_prime, self.c, self.c_prime, self.z, self.l
        )
    }
}

/// Row-major 2x2 transfer matrix `[[c, s], [c', s']]`.
type Transfer = [f64; 4];

const IDENTITY: Transfer = [1.0, 0.0, 0.0, 1.0];

/// `(cosh sqrt(w), sinh sqrt(w) / sqrt(w))`, continued analytically to `w < 0`.
fn cosh_sinhc(w: f64) -> (f64, f64) {
    if w.abs() < 1e-2 {
        // Taylor series; the truncation error is below 1e-20 here.
        let mut c = 1.0;
        let mut s = 1.0;
        let mut term_c = 1.0;
        let mut term_s = 1.0;
        for k in 1..=7 {
            let k = k as f64;
            term_c *= w / ((2.0 * k - 1.0) * (2.0 * k));
            term_s *= w / ((2.0 * k) * (2.0 * k + 1.0));
            c += term_c;
            s += term_s;
        }
        (c, s)
    } else if w > 0.0 {
        let r = w.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-w).sqrt();
        (r.cos(), r.sin() / r)
    }
}

/// Exact propagator over length `h` of `y'' = q y` with constant `q`.
fn constant_step(q: f64, h: f64) -> Transfer {
    let (c, s) = cosh_sinhc(q * h * h);
    [c, s * h, q * s * h, c]
}

fn mul(a: &Transfer, b: &Transfer) -> Transfer {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3) / 6
const COMMUTATOR_WEIGHT: f64 = 0.144_337_567_297_406_43; // sqrt(3) / 12

/// One fourth-order Magnus step for `Y' = [[0, 1], [q(t), 0]] Y` with `q`
/// linear on the step. The exponent is traceless, so `det` stays one.
fn magnus_step(q1: f64, q2: f64, h: f64) -> Transfer {
    let qbar = 0.5 * (q1 + q2);
    let d = COMMUTATOR_WEIGHT * h * h * (q1 - q2);
    let (c, s) = cosh_sinhc(d * d + h * h * qbar);
    [c + s * d, s * h, s * h * qbar, c - s * d]
}

/// Integrates from `t = 0` with step about `h`, recording the transfer matrix
/// at each entry of `stops` (ascending, within `[0, l]`).
fn propagate(knots: &[(f64, f64)], z: f64, h: f64, stops: &[f64]) -> Vec<Transfer> {
    let mut y = IDENTITY;
    let mut out = Vec::with_capacity(stops.len());
    let mut si = 0;
    while si < stops.len() && stops[si] <= 0.0 {
        out.push(y);
        si += 1;
    }
    for seg in knots.windows(2) {
        let (ta, ua) = seg[0];
        let (tb, ub) = seg[1];
        let slope = (ub - ua) / (tb - ta);
        let q_at = |t: f64| ua + slope * (t - ta) - z;
        let mut t = ta;
        while t < tb {
            let next = if si < stops.len() && stops[si] < tb {
                stops[si]
            } else {
                tb
            };
            let span = next - t;
            if span > 0.0 {
                let n = (span / h).ceil().max(1.0) as usize;
                let dt = span / n as f64;
                for k in 0..n {
                    let t0 = t + k as f64 * dt;
                    let q1 = q_at(t0 + (0.5 - GAUSS_OFFSET) * dt);
                    let q2 = q_at(t0 + (0.5 + GAUSS_OFFSET) * dt);
                    y = mul(&magnus_step(q1, q2, dt), &y);
                }
            }
            t = next;
            while si < stops.len() && stops[si] <= t {
                out.push(y);
                si += 1;
            }
        }
    }
    // Stops beyond the last knot (rounding) get the endpoint value.
    while out.len() < stops.len() {
        out.push(y);
    }
    out
}

fn agree(a: &[Transfer], b: &[Transfer]) -> bool {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .all(|(x, y)| (x - y).abs() <= AGREEMENT * y.abs().max(1.0))
}

fn check_z(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        invalid(format!("spectral parameter {z} is not finite"))
    }
}

/// Transfer matrices at the given stops, by closed form or by integration.
fn transfer_at(pot: &EdgePotential, z: f64, stops: &[f64]) -> Vec<Transfer> {
    match pot.kind {
        PotentialKind::Zero | PotentialKind::Constant(_) => {
            let q = pot.value_at(0.0) - z;
            stops.iter().map(|&t| constant_step(q, t)).collect()
        }
        PotentialKind::Sampled(ref knots) => {
            let l = pot.length;
            let mut steps = BASE_STEPS;
            let mut coarse = propagate(knots, z, l / steps as f64, stops);
            loop {
                let fine = propagate(knots, z, l / (2 * steps) as f64, stops);
                steps *= 2;
                if agree(&coarse, &fine) || steps >= MAX_STEPS {
                    return fine;
                }
                coarse = fine;
            }
        }
    }
}

/// `s(l; z), s'(l; z), c(l; z), c'(l; z)` for the potential on `[0, l]`.
pub fn solve_fundamental(pot: &EdgePotential, z: f64) -> Result<EdgeSolution> {
    check_z(z)?;
    let l = pot.length;
    let y = transfer_at(pot, z, &[l]);
    Ok(EdgeSolution::from_transfer(&y[0], z, l))
}

/// Fundamental solutions at each position in `ts` (ascending, within `[0, l]`).
pub fn fundamental_profile(pot: &EdgePotential, z: f64, ts: &[f64]) -> Result<Vec<EdgeSolution>> {
    check_z(z)?;
    if ts.windows(2).any(|w| w[1] < w[0]) {
        return invalid("profile positions must be ascending");
    }
    if ts.iter().any(|t| !(0.0..=pot.length).contains(t)) {
        return invalid("profile positions must lie on the edge");
    }
    let ys = transfer_at(pot, z, ts);
    Ok(ys
        .iter()
        .zip(ts)
        .map(|(y, &t)| EdgeSolution::from_transfer(y, z, t))
        .collect())
}

/// `t_eps(E) = c(l; E + k_R^2) + eps * s(l; E + k_R^2)`.
pub fn t_epsilon(pot: &EdgePotential, eps: f64, k_r: f64, energy: f64) -> Result<f64> {
    let sol = solve_fundamental(pot, energy + k_r * k_r)?;
    Ok(sol.c + eps * sol.s)
}

/// Energies `E` in `window` with `s(l; E + k_R^2) = 0`, ascending.
pub fn dirichlet_eigenvalues(pot: &EdgePotential, k_r: f64, window: (f64, f64)) -> Result<Vec<f64>> {
    dirichlet_eigenvalues_with_step(pot, k_r, window, DIRICHLET_SCAN_STEP)
}

/// As [`dirichlet_eigenvalues`] with a custom scan step.
pub fn dirichlet_eigenvalues_with_step(
    pot: &EdgePotential,
    k_r: f64,
    window: (f64, f64),
    step: f64,
) -> Result<Vec<f64>> {
    let shift = k_r * k_r;
    let curve = SampledCurve::new(
        |e| Ok(solve_fundamental(pot, e + shift)?.s),
        window.0,
        window.1,
        step,
    )?;
    curve.level_set(0.0)
}
