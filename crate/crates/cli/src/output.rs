use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

use crate::args::{Cli, Format};

/// How the CSV output should be drawn by the generated gnuplot script.
#[derive(Clone, Copy, Debug)]
pub enum PlotStyle {
    /// `E_lo,E_hi,...` rows drawn as segments on the energy axis.
    Intervals,
    /// Column `x` against column `y` (1-based).
    Points { x: usize, y: usize },
    /// Columns `x`, `y` and colour `z` as a map.
    Map { x: usize, y: usize, z: usize },
}

pub struct Emission {
    pub csv: String,
    pub json: Value,
    pub plot: PlotStyle,
    /// Reported after the output has been written; makes the run fail.
    pub failure: Option<String>,
}

pub fn gnuplot_script(data: &Path, style: PlotStyle) -> String {
    let file = data.display().to_string().replace('\'', "''");
    let mut s = String::from("set datafile separator ','\nset key off\n");
    match style {
        PlotStyle::Intervals => {
            s.push_str("set xlabel 'E'\nunset ytics\nset yrange [-1:1]\n");
            s.push_str(&format!(
                "plot '{file}' every ::1 using 1:(0):($2-$1):(0) with vectors nohead lw 6, \\\n     '{file}' every ::1 using 1:(0) with points pt 7\n"
            ));
        }
        PlotStyle::Points { x, y } => {
            s.push_str(&format!("plot '{file}' every ::1 using {x}:{y} with points pt 7 ps 0.3\n"));
        }
        PlotStyle::Map { x, y, z } => {
            s.push_str("set view map\nset xlabel 'omega'\nset ylabel 'k_R'\n");
            s.push_str(&format!("splot '{file}' every ::1 using {x}:{y}:{z} with points pt 5 palette\n"));
        }
    }
    s
}

/// Writes the whole result in one go, after all computation has finished.
pub fn emit(cli: &Cli, out: Emission) -> Result<()> {
    let body = match cli.format {
        Format::Csv => out.csv,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json)?;
            s.push('\n');
            s
        }
    };
    if let Some(script) = &cli.plot {
        let Some(data) = &cli.output else {
            bail!("--plot needs --output so the script can reference the data file");
        };
        if cli.format != Format::Csv {
            bail!("--plot needs --format csv");
        }
        std::fs::write(script, gnuplot_script(data, out.plot))
            .with_context(|| format!("cannot write {}", script.display()))?;
    }
    match &cli.output {
        Some(path) => std::fs::write(path, body).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
