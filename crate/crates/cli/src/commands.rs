use std::f64::consts::PI;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use qgraph::edge::{self, EdgePotential};
use qgraph::graph::{GraphBuilder, GraphModel};
use qgraph::linalg::{self, CMatrix};
use qgraph::mfunction::{discrete_reduction_spectrum, scan_spectrum, CouplingMatrix, SpectralSet};
use qgraph::output::fmt_sig;
use qgraph::susy::{susy_membership_pm_m, susy_spectrum, SusyBlock};
use qgraph::t3::{
    assemble_t3_spectrum_with, butterfly_csv, butterfly_sweep, flat_band_certificate, rational_fluxes,
    smallest_commensurate_n, AssemblyOptions, T3Params, T3Torus, TorusChoice,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde_json::json;

use crate::args::*;
use crate::output::{Emission, PlotStyle};

pub fn run(cmd: &Command) -> Result<Emission> {
    match cmd {
        Command::EdgeBands(a) => edge_bands(a),
        Command::GraphScan(a) => graph_scan(a),
        Command::T3Spectrum(a) => t3_spectrum(a),
        Command::T3Butterfly(a) => t3_butterfly(a),
        Command::T3FlatbandMap(a) => t3_flatband_map(a),
        Command::SusyCheck(a) => susy_check(a),
    }
}

fn window(w: &[f64]) -> Result<(f64, f64)> {
    match *w {
        [lo, hi] if lo.is_finite() && hi.is_finite() && lo < hi => Ok((lo, hi)),
        _ => bail!("window must be two finite numbers E_MIN < E_MAX, got {w:?}"),
    }
}

fn potential(p: &PotentialArgs, length: f64) -> Result<EdgePotential> {
    let pot = match (&p.potential, p.u) {
        (Some(path), _) => EdgePotential::from_file(path)
            .map_err(|e| anyhow!("cannot load potential file {}: {e}", path.display()))?,
        (None, Some(u)) => EdgePotential::constant(u, length)?,
        (None, None) => EdgePotential::zero(length)?,
    };
    Ok(pot)
}

fn interval_rows(rows: &mut [(f64, f64, &'static str)]) -> (String, serde_json::Value) {
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut csv = String::from("E_lo,E_hi,label\n");
    for (lo, hi, label) in rows.iter() {
        csv.push_str(&format!("{},{},{label}\n", fmt_sig(*lo), fmt_sig(*hi)));
    }
    let json = rows.iter().map(|(lo, hi, label)| json!({"E_lo": lo, "E_hi": hi, "label": label})).collect();
    (csv, json)
}

fn edge_bands(a: &EdgeBandsArgs) -> Result<Emission> {
    let pot = potential(&a.potential, a.length)?;
    let w = window(&a.window)?;
    if a.samples {
        if !(a.step.is_finite() && a.step > 0.0) {
            bail!("step must be positive");
        }
        let n = ((w.1 - w.0) / a.step).ceil() as usize;
        let mut csv = String::from("E,s,s_prime,c,c_prime,t_eps\n");
        let mut rows = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let e = if k == n { w.1 } else { w.0 + (w.1 - w.0) * k as f64 / n as f64 };
            let s = edge::solve_fundamental(&pot, e + a.kr * a.kr)?;
            let t = s.c + a.eps * s.s;
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_sig(e),
                fmt_sig(s.s),
                fmt_sig(s.s_prime),
                fmt_sig(s.c),
                fmt_sig(s.c_prime),
                fmt_sig(t)
            ));
            rows.push(json!({"E": e, "s": s.s, "s_prime": s.s_prime, "c": s.c, "c_prime": s.c_prime, "t_eps": t}));
        }
        return Ok(Emission {
            csv,
            json: rows.into(),
            plot: PlotStyle::Points { x: 1, y: 6 },
            failure: None,
        });
    }
    let bands = discrete_reduction_spectrum(&pot, a.eps, a.kr, &[SpectralSet::Interval(-1.0, 1.0)], w, a.step)?;
    let mut rows: Vec<(f64, f64, &'static str)> = bands.into_iter().map(|(lo, hi)| (lo, hi, "band")).collect();
    rows.extend(edge::dirichlet_eigenvalues(&pot, a.kr, w)?.into_iter().map(|d| (d, d, "dirichlet")));
    let (csv, json) = interval_rows(&mut rows);
    Ok(Emission {
        csv,
        json,
        plot: PlotStyle::Intervals,
        failure: None,
    })
}

fn preset_graph(a: &GraphScanArgs, preset: Preset) -> Result<GraphModel> {
    let pot = potential(&a.potential, 1.0)?;
    if (pot.length() - 1.0).abs() > 1e-9 {
        bail!("preset graphs have unit edges; the potential has length {}", pot.length());
    }
    let mut b = GraphBuilder::new(a.field, a.kr);
    match preset {
        Preset::Interval => {
            let p = b.vertex(0.0, 0.0, a.eps);
            let q = b.vertex(1.0, 0.0, a.eps);
            b.edge_with_potential(p, q, pot);
        }
        Preset::FourCycle => {
            let corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
            let ids: Vec<usize> = corners.iter().map(|&(x, y)| b.vertex(x, y, a.eps)).collect();
            for k in 0..4 {
                b.edge_with_potential(ids[k], ids[(k + 1) % 4], pot.clone());
            }
        }
        Preset::ThreeStar => {
            let center = b.vertex(0.0, 0.0, a.eps);
            for j in 0..3 {
                let t = 2.0 * PI * j as f64 / 3.0;
                let leaf = b.vertex(t.cos(), t.sin(), a.eps);
                b.edge_with_potential(center, leaf, pot.clone());
            }
        }
    }
    Ok(b.build()?)
}

fn graph_scan(a: &GraphScanArgs) -> Result<Emission> {
    let g = match (&a.graph, a.preset) {
        (Some(path), _) => {
            GraphModel::from_file(path).map_err(|e| anyhow!("cannot load graph {}: {e}", path.display()))?
        }
        (None, Some(p)) => preset_graph(a, p)?,
        (None, None) => bail!("either --graph or --preset is required"),
    };
    let w = window(&a.window)?;
    let scan = scan_spectrum(&g, &CouplingMatrix::from_graph(&g), w, a.step)?;
    if a.samples {
        let json = scan
            .samples
            .iter()
            .map(|s| json!({"E": s.energy, "gap": s.gap, "in_spectrum": s.in_spectrum}))
            .collect();
        return Ok(Emission {
            csv: scan.to_csv(),
            json,
            plot: PlotStyle::Points { x: 1, y: 2 },
            failure: None,
        });
    }
    let mut rows: Vec<(f64, Option<f64>, Option<usize>, &str)> = scan
        .eigenvalues
        .iter()
        .map(|e| (e.energy, Some(e.gap), Some(e.multiplicity), "eigenvalue"))
        .collect();
    rows.extend(scan.dirichlet_coincident.iter().map(|&d| (d, None, None, "dirichlet")));
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut csv = String::from("E,gap,multiplicity,kind\n");
    for (e, gap, mult, kind) in &rows {
        let gap = gap.map(fmt_sig).unwrap_or_default();
        let mult = mult.map(|m| m.to_string()).unwrap_or_default();
        csv.push_str(&format!("{},{gap},{mult},{kind}\n", fmt_sig(*e)));
    }
    let json = rows
        .iter()
        .map(|(e, gap, mult, kind)| json!({"E": e, "gap": gap, "multiplicity": mult, "kind": kind}))
        .collect();
    Ok(Emission {
        csv,
        json,
        plot: PlotStyle::Points { x: 1, y: 3 },
        failure: None,
    })
}

fn t3_params(a: &T3Args, omega: f64) -> Result<T3Params> {
    Ok(T3Params::new(omega, a.kr, a.lambda, a.mu, potential(&a.potential, 1.0)?)?)
}

fn torus_for(size: TorusSize, omega: f64) -> Result<T3Torus> {
    let n = match size {
        TorusSize::Fixed(n) => n,
        TorusSize::Auto => smallest_commensurate_n(omega, AUTO_MAX_N)
            .with_context(|| format!("no commensurate torus with N <= {AUTO_MAX_N} for omega = {omega}"))?,
    };
    Ok(T3Torus::new(n, omega)?)
}

fn t3_spectrum(a: &T3SpectrumArgs) -> Result<Emission> {
    let params = t3_params(&a.t3, a.omega)?;
    let torus = torus_for(a.t3.n, a.omega)?;
    let opts = AssemblyOptions {
        step: a.step,
        ..AssemblyOptions::default()
    };
    let s = assemble_t3_spectrum_with(&params, &torus, window(&a.window)?, &opts)?;
    let json = json!({
        "omega": a.omega,
        "k_R": a.t3.kr,
        "N": torus.n,
        "kernels": s.kernels,
        "rows": s.rows(),
    });
    Ok(Emission {
        csv: s.to_csv(),
        json,
        plot: PlotStyle::Intervals,
        failure: None,
    })
}

fn t3_butterfly(a: &T3ButterflyArgs) -> Result<Emission> {
    let omegas = match a.q {
        Some(0) => bail!("--q must be positive"),
        Some(q) => rational_fluxes(q),
        None => a.omega.clone(),
    };
    let win = a.window.as_deref().map(window).transpose()?;
    let base = t3_params(&a.t3, 0.0)?;
    let choice = match a.t3.n {
        TorusSize::Fixed(n) => TorusChoice::Fixed(n),
        TorusSize::Auto => TorusChoice::Auto(AUTO_MAX_N),
    };
    let columns = butterfly_sweep(&base, &omegas, choice, win);
    for c in columns.iter().filter(|c| c.error.is_some()) {
        eprintln!("notice: skipping omega = {}: {}", c.omega, c.error.as_deref().unwrap_or(""));
    }
    let mut rows = Vec::new();
    let mut spectra = Vec::new();
    for c in columns.iter().filter(|c| c.error.is_none()) {
        for p in &c.points {
            rows.push(json!({"omega": c.omega, "N": c.n, "eigenvalue_index": p.index, "value": p.value, "kind": p.kind}));
        }
        if let Some(s) = &c.spectrum {
            spectra.push(json!({"omega": c.omega, "N": c.n, "rows": s.rows()}));
        }
    }
    let json = if win.is_some() {
        json!({"rows": rows, "spectra": spectra})
    } else {
        json!({ "rows": rows })
    };
    Ok(Emission {
        csv: butterfly_csv(&columns),
        json,
        plot: PlotStyle::Points { x: 1, y: 4 },
        failure: None,
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `2 pi i / g`, computed from the reduced fraction so that magic values are exact.
fn grid_angle(i: usize, g: usize) -> f64 {
    let d = gcd(2 * i, g).max(1);
    PI * (2 * i / d) as f64 / (g / d) as f64
}

fn t3_flatband_map(a: &T3FlatbandMapArgs) -> Result<Emission> {
    if a.omega_grid < 2 || a.kr_grid < 2 {
        bail!("grids need at least 2 points");
    }
    let pot = potential(&a.t3.potential, 1.0)?;
    let mut tori = Vec::with_capacity(a.omega_grid);
    for i in 0..a.omega_grid {
        let omega = grid_angle(i, a.omega_grid);
        match torus_for(a.t3.n, omega) {
            Ok(t) => tori.push(Some((omega, t))),
            Err(e) => {
                eprintln!("notice: skipping omega = {omega}: {e}");
                tori.push(None);
            }
        }
    }
    let jobs: Vec<(f64, T3Torus, f64)> = tori
        .iter()
        .flatten()
        .flat_map(|&(omega, t)| (0..a.kr_grid).map(move |j| (omega, t, j)))
        .map(|(omega, t, j)| (omega, t, grid_angle(j, a.kr_grid)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(omega, t, k_r)| {
            let p = T3Params::new(omega, k_r, a.t3.lambda, a.t3.mu, pot.clone())?;
            flat_band_certificate(&p, &t)
        })
        .collect::<qgraph::error::Result<Vec<_>>>()?;
    let mut csv = String::from("omega,k_R,N,deviation,is_flat\n");
    let mut json = Vec::with_capacity(jobs.len());
    for ((omega, t, k_r), c) in jobs.iter().zip(&results) {
        csv.push_str(&format!("{},{},{},{},{}\n", fmt_sig(*omega), fmt_sig(*k_r), t.n, fmt_sig(c.deviation), c.is_flat));
        json.push(json!({"omega": omega, "k_R": k_r, "N": t.n, "deviation": c.deviation, "is_flat": c.is_flat}));
    }
    Ok(Emission {
        csv,
        json: json.into(),
        plot: PlotStyle::Map { x: 1, y: 2, z: 4 },
        failure: None,
    })
}

fn random_complex(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

pub fn parse_matrix(text: &str, origin: &str) -> Result<CMatrix> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| Complex64::from_str(t).map_err(|_| anyhow!("{origin}:{}: bad complex entry {t:?}", no + 1)))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                bail!("{origin}:{}: expected {} entries, found {}", no + 1, first.len(), row.len());
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("{origin}: no matrix rows");
    }
    let cols = rows[0].len();
    Ok(CMatrix::from_row_iterator(rows.len(), cols, rows.into_iter().flatten()))
}

struct SusyCase {
    rows: usize,
    cols: usize,
    m: f64,
    deviation: f64,
    plus_m_in: bool,
    minus_m_in: bool,
    consistent: bool,
}

fn check_block(b: &SusyBlock) -> SusyCase {
    let got = susy_spectrum(b);
    let want = linalg::hermitian_eigenvalues(&b.dense());
    let deviation = got.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let pm = susy_membership_pm_m(b);
    let hit = |t: f64| want.iter().any(|v| (v - t).abs() <= 1e-8);
    SusyCase {
        rows: b.rows(),
        cols: b.cols(),
        m: b.m,
        deviation,
        plus_m_in: pm.plus_m_in,
        minus_m_in: pm.minus_m_in,
        consistent: got.len() == want.len() && deviation <= 1e-9 && pm.plus_m_in == hit(b.m) && pm.minus_m_in == hit(-b.m),
    }
}

fn susy_check(a: &SusyCheckArgs) -> Result<Emission> {
    let cases = match (&a.matrix, a.random) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            vec![check_block(&SusyBlock::new(parse_matrix(&text, &path.display().to_string())?, a.m)?)]
        }
        (None, Some(count)) => {
            if a.max_rows == 0 || a.max_cols == 0 {
                bail!("--max-rows and --max-cols must be positive");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut blocks = Vec::with_capacity(count);
            for _ in 0..count {
                let p = rng.random_range(1..=a.max_rows);
                let q = rng.random_range(1..=a.max_cols);
                let m = rng.random_range(-3.0..=3.0);
                let mat = if rng.random_bool(0.5) {
                    random_complex(p, q, &mut rng)
                } else {
                    let r = rng.random_range(1..=p.min(q));
                    random_complex(p, r, &mut rng) * random_complex(r, q, &mut rng)
                };
                blocks.push(SusyBlock::new(mat, m)?);
            }
            blocks.par_iter().map(check_block).collect()
        }
        (None, None) => bail!("either --random or --matrix is required"),
    };
    let mut csv = String::from("case,rows,cols,m,max_deviation,plus_m_in,minus_m_in,consistent\n");
    let mut json = Vec::with_capacity(cases.len());
    for (k, c) in cases.iter().enumerate() {
        csv.push_str(&format!(
            "{k},{},{},{},{},{},{},{}\n",
            c.rows,
            c.cols,
            fmt_sig(c.m),
            fmt_sig(c.deviation),
            c.plus_m_in,
            c.minus_m_in,
            c.consistent
        ));
        json.push(json!({
            "case": k, "rows": c.rows, "cols": c.cols, "m": c.m, "max_deviation": c.deviation,
            "plus_m_in": c.plus_m_in, "minus_m_in": c.minus_m_in, "consistent": c.consistent,
        }));
    }
    let worst = cases.iter().map(|c| c.deviation).fold(0.0, f64::max);
    let failed = cases.iter().filter(|c| !c.consistent).count();
    eprintln!("checked {} cases, max deviation {worst:e}, {failed} inconsistent", cases.len());
    Ok(Emission {
        csv,
        json: json.into(),
        plot: PlotStyle::Points { x: 1, y: 5 },
        failure: (failed > 0).then(|| format!("{failed} SUSY checks are inconsistent")),
    })
}
