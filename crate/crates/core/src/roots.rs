//! Scalar root bracketing shared by every spectral condition.
//!
//! A function is sampled once on a uniform grid. Turning points of the
//! sampled values are refined by golden-section search, which splits the
//! window into pieces on which the function is monotone at grid resolution.
//! Level sets and preimages of intervals are then resolved piece by piece
//! with bisection, so tangential roots (extrema touching the target) are
//! found as well as sign changes.

use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Bisection stops once the bracket is narrower than this.
pub const ROOT_TOL: f64 = 1e-10;
/// An extremum within this distance of the target counts as a (double) root.
pub const TOUCH_TOL: f64 = 1e-9;
/// Roots and interval ends closer than this are merged.
const MERGE_TOL: f64 = 1e-9;

/// A scalar function together with its samples on a uniform grid.
pub struct SampledCurve<F> {
    f: F,
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Window ends and refined turning points, ascending, with values.
    breaks: Vec<(f64, f64)>,
}

impl<F> SampledCurve<F>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    pub fn new(f: F, lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return invalid(format!("window [{lo}, {hi}] must be finite with lo < hi"));
        }
        if !(step.is_finite() && step > 0.0) {
            return invalid(format!("scan step {step} must be positive"));
        }
        let n = ((hi - lo) / step).ceil().max(1.0) as usize;
        let xs: Vec<f64> = (0..=n)
            .map(|k| if k == n { hi } else { lo + (hi - lo) * k as f64 / n as f64 })
            .collect();
        let ys = xs.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>()?;
        let mut curve = SampledCurve {
            f,
            xs,
            ys,
            breaks: Vec::new(),
        };
        curve.breaks = curve.find_breaks()?;
        Ok(curve)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        (self.f)(x)
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    /// Window ends and turning points; the function is monotone between
    /// consecutive entries.
    pub fn breaks(&self) -> &[(f64, f64)] {
        &self.breaks
    }

    fn find_breaks(&self) -> Result<Vec<(f64, f64)>> {
        let n = self.xs.len();
        let mut breaks = vec![(self.xs[0], self.ys[0])];
        let mut last_dir = 0i8;
        // Index where the current monotone run started.
        let mut run_start = 0usize;
        for i in 1..n {
            let d = self.ys[i] - self.ys[i - 1];
            let dir = if d > 0.0 {
                1
            } else if d < 0.0 {
                -1
            } else {
                0
            };
            if dir != 0 && last_dir != 0 && dir != last_dir {
                let a = self.xs[run_start.max(i.saturating_sub(2))];
                let (x, y) = self.extremum(a, self.xs[i], last_dir > 0)?;
                breaks.push((x, y));
            }
            if dir != 0 {
                if dir != last_dir {
                    run_start = i - 1;
                }
                last_dir = dir;
            }
        }
        breaks.push((self.xs[n - 1], self.ys[n - 1]));
        breaks.sort_by(|p, q| p.0.total_cmp(&q.0));
        breaks.dedup_by(|p, q| (p.0 - q.0).abs() <= MERGE_TOL);
        Ok(breaks)
    }

    /// Golden-section search for a maximum (or minimum) on `[a, b]`.
    fn extremum(&self, a: f64, b: f64, maximize: bool) -> Result<(f64, f64)> {
        let sign = if maximize { -1.0 } else { 1.0 };
        let (x, y) = golden_section(|x| Ok(sign * (self.f)(x)?), a, b, ROOT_TOL)?;
        Ok((x, sign * y))
    }

    /// All `x` in the window with `f(x) = target`, ascending.
    pub fn level_set(&self, target: f64) -> Result<Vec<f64>> {
        let mut roots = Vec::new();
        let last = self.breaks.len() - 1;
        for (k, w) in self.breaks.windows(2).enumerate() {
            let (p, fp) = w[0];
            let (q, fq) = w[1];
            let gp = fp - target;
            let gq = fq - target;
            // Interior break points are extrema: accept near-touches there.
            if k > 0 && gp.abs() <= TOUCH_TOL {
                roots.push(p);
            } else if gp == 0.0 {
                roots.push(p);
            }
            if gp * gq < 0.0 {
                roots.push(self.bisect(p, q, gp, target)?);
            }
            if k + 1 == last && gq == 0.0 {
                roots.push(q);
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= MERGE_TOL);
        Ok(roots)
    }

    /// The set `{x : lo <= f(x) <= hi}` as disjoint closed intervals.
    pub fn preimage(&self, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
        if lo > hi {
            return invalid(format!("empty target interval [{lo}, {hi}]"));
        }
        if lo == hi {
            return Ok(self.level_set(lo)?.into_iter().map(|x| (x, x)).collect());
        }
        let mut parts: Vec<(f64, f64)> = Vec::new();
        for w in self.breaks.windows(2) {
            let (p, fp) = w[0];
            let (q, fq) = w[1];
            let (fmin, fmax) = (fp.min(fq), fp.max(fq));
            // Extremal values carry golden-section noise; allow touching.
            if fmax < lo - TOUCH_TOL || fmin > hi + TOUCH_TOL {
                continue;
            }
            let increasing = fq >= fp;
            let (start, end) = if increasing {
                let start = if fp >= lo { p } else { self.bisect(p, q, fp - lo, lo)? };
                let end = if fq <= hi { q } else { self.bisect(p, q, fp - hi, hi)? };
                (start, end)
            } else {
                let start = if fp <= hi { p } else { self.bisect(p, q, fp - hi, hi)? };
                let end = if fq >= lo { q } else { self.bisect(p, q, fp - lo, lo)? };
                (start, end)
            };
            if start <= end {
                parts.push((start, end));
            } else {
                // Only reachable when an extremum grazes the target band.
                let x = if (fp - lo).abs() <= TOUCH_TOL || (fp - hi).abs() <= TOUCH_TOL {
                    p
                } else {
                    q
                };
                parts.push((x, x));
            }
        }
        Ok(merge_intervals(parts))
    }

    /// Bisection for `f(x) = target` on `[a, b]`, given `g(a) = f(a) - target`
    /// with a sign change somewhere in the bracket.
    fn bisect(&self, mut a: f64, mut b: f64, mut ga: f64, target: f64) -> Result<f64> {
        for _ in 0..200 {
            if b - a <= ROOT_TOL {
                break;
            }
            let m = 0.5 * (a + b);
            let gm = (self.f)(m)? - target;
            if gm == 0.0 {
                return Ok(m);
            }
            if (gm < 0.0) == (ga < 0.0) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

/// Merges overlapping or touching closed intervals.
pub fn merge_intervals(mut parts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    parts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(parts.len());
    for (a, b) in parts {
        match merged.last_mut() {
            Some(last) if a <= last.1 + MERGE_TOL => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

/// Golden-section minimisation on `[a, b]`; returns `(argmin, min)`.
pub fn golden_section<G>(g: G, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    G: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut gc = g(c)?;
    let mut gd = g(d)?;
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d)?;
        }
    }
    let (ga, gb) = (g(a)?, g(b)?);
    let best = [(a, ga), (b, gb), (c, gc), (d, gd)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("non-empty");
    Ok(best)
}
