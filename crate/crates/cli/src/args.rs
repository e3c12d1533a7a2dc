use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::angle::{parse_angle, parse_finite};

#[derive(Debug, Parser)]
#[command(name = "qgraph", version, about = "Spectra of magnetic quantum graphs with Rashba coupling")]
pub struct Cli {
    /// `key = value` file with default flags; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file (default: standard output).
    #[arg(long, short, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write a gnuplot script that plots the CSV output.
    #[arg(long, global = true, value_name = "FILE")]
    pub plot: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral set of the edge transfer function t_eps over a window.
    EdgeBands(EdgeBandsArgs),
    /// M-function spectrum scan of a finite graph.
    GraphScan(GraphScanArgs),
    /// Assembled spectrum of the T3 lattice on a torus.
    T3Spectrum(T3SpectrumArgs),
    /// spec A*A against the flux (Hofstadter-type dataset).
    T3Butterfly(T3ButterflyArgs),
    /// Flat-band deviation ||A*A - 6|| over a (omega, k_R) grid.
    T3FlatbandMap(T3FlatbandMapArgs),
    /// Random or user-supplied checks of the supersymmetric block spectrum.
    SusyCheck(SusyCheckArgs),
}

#[derive(Debug, Clone, Args)]
pub struct PotentialArgs {
    /// Two-column `t value` potential file.
    #[arg(long, value_name = "FILE", conflicts_with = "u")]
    pub potential: Option<PathBuf>,
    /// Constant potential value.
    #[arg(long, value_parser = parse_finite, allow_negative_numbers = true)]
    pub u: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusSize {
    Auto,
    Fixed(usize),
}

pub const AUTO_MAX_N: usize = 48;

pub fn parse_torus_size(s: &str) -> Result<TorusSize, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(TorusSize::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(TorusSize::Fixed(n)),
        _ => Err(format!("torus size must be a positive integer or \"auto\", got {s:?}")),
    }
}

#[derive(Debug, Args)]
pub struct EdgeBandsArgs {
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Edge length (ignored for potential files).
    #[arg(long, default_value_t = 1.0, value_parser = parse_finite)]
    pub length: f64,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub kr: f64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, num_args = 2, value_names = ["E_MIN", "E_MAX"], required = true, allow_negative_numbers = true)]
    pub window: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Emit s, s', c, c' and t_eps on the energy grid instead of the bands.
    #[arg(long)]
    pub samples: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Interval,
    FourCycle,
    ThreeStar,
}

#[derive(Debug, Args)]
pub struct GraphScanArgs {
    /// Graph description file.
    #[arg(long, value_name = "FILE", required_unless_present = "preset", conflicts_with = "preset")]
    pub graph: Option<PathBuf>,
    /// Built-in unit-edge graph.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub potential: PotentialArgs,
    /// Magnetic field for presets.
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub field: f64,
    /// Rashba constant for presets.
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub kr: f64,
    /// Vertex coupling for presets.
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub eps: f64,
    #[arg(long, num_args = 2, value_names = ["E_MIN", "E_MAX"], required = true, allow_negative_numbers = true)]
    pub window: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    /// Emit every grid sample rather than the eigenvalue list.
    #[arg(long)]
    pub samples: bool,
}

#[derive(Debug, Clone, Args)]
pub struct T3Args {
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, default_value = "0", value_parser = parse_angle, allow_hyphen_values = true)]
    pub kr: f64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub mu: f64,
    /// Torus period, or `auto` for the smallest commensurate N <= 48.
    #[arg(long = "N", default_value = "auto", value_parser = parse_torus_size)]
    pub n: TorusSize,
}

#[derive(Debug, Args)]
pub struct T3SpectrumArgs {
    #[command(flatten)]
    pub t3: T3Args,
    #[arg(long, value_parser = parse_angle, allow_hyphen_values = true)]
    pub omega: f64,
    #[arg(long, num_args = 2, value_names = ["E_MIN", "E_MAX"], required = true, allow_negative_numbers = true)]
    pub window: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
}

#[derive(Debug, Args)]
pub struct T3ButterflyArgs {
    #[command(flatten)]
    pub t3: T3Args,
    /// Fluxes 2 pi p / q for p = 0..q.
    #[arg(long, required_unless_present = "omega", conflicts_with = "omega")]
    pub q: Option<usize>,
    /// Explicit comma-separated flux list.
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    pub omega: Vec<f64>,
    /// Also assemble the energy spectrum of every column over this window.
    #[arg(long, num_args = 2, value_names = ["E_MIN", "E_MAX"], allow_negative_numbers = true)]
    pub window: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct T3FlatbandMapArgs {
    #[command(flatten)]
    pub t3: T3Args,
    /// omega runs over 2 pi i / G, i = 0..G.
    #[arg(long, default_value_t = 48)]
    pub omega_grid: usize,
    /// k_R runs over 2 pi j / K, j = 0..K.
    #[arg(long, default_value_t = 48)]
    pub kr_grid: usize,
}

#[derive(Debug, Args)]
pub struct SusyCheckArgs {
    /// Number of random matrices to check.
    #[arg(long, required_unless_present = "matrix", conflicts_with = "matrix")]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 40)]
    pub max_rows: usize,
    #[arg(long, default_value_t = 50)]
    pub max_cols: usize,
    /// Matrix file: one row per line, entries like `1.5`, `2-0.5i`, `0.3i`.
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
    /// Mass term for `--matrix`.
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite, allow_negative_numbers = true)]
    pub m: f64,
}
