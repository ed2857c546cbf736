use crate::parse::{parse_complex, parse_model_file};
use clap::{Parser, Subcommand, ValueEnum};
use hdeform_core::{catalog, CatalogEntry, Tolerances};
use num_complex::Complex64;
use std::path::PathBuf;

#[derive(Parser, Debug, Clone)]
#[command(name = "hdeform", version, about = "h-deformed Frölicher spectral sequence computations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Catalog model name (see `hdeform list`).
    #[arg(long, global = true, conflicts_with = "file")]
    pub model: Option<String>,

    /// Model file with structure equations.
    #[arg(long, global = true)]
    pub file: Option<PathBuf>,

    /// Total degree.
    #[arg(long, global = true)]
    pub k: Option<usize>,

    /// Page / tower level (defaults to the degeneration page).
    #[arg(long, global = true)]
    pub r: Option<usize>,

    /// Comma-separated complex values, or `default`.
    #[arg(long = "h-grid", global = true, default_value = "default")]
    pub h_grid: String,

    /// Comma-separated complex values, or `square:<half-width>:<points per side>`.
    #[arg(long = "t-grid", global = true, default_value = "square:0.3:5")]
    pub t_grid: String,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long = "tol-rank", global = true, default_value_t = 1e-9)]
    pub tol_rank: f64,

    #[arg(long = "tol-zero", global = true, default_value_t = 1e-10)]
    pub tol_zero: f64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Check the bicomplex identities and the conjugation.
    Validate,
    /// E_r pages up to degeneration, cross-checked through d_r.
    Pages,
    /// Dimensions of d_h-cohomology over the h-grid.
    Dh,
    /// Kernel dimensions of the page-r Laplacian over the h-grid.
    Favb,
    /// Harmonic tower dimensions against the pages.
    Tower,
    /// Gauduchon and E_r-sG level of the identity metric.
    Sg,
    /// Fibre dimensions over the (h, t) grid of a family.
    Family {
        #[arg(long, value_enum, default_value_t = FamilyScan::Dims)]
        scan: FamilyScan,
    },
    /// Catalog names.
    List,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyScan {
    Dims,
    Sg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Csv,
    Json,
}

/// Where the model came from, for report headers.
#[derive(Debug, Clone)]
pub enum Source {
    Catalog(String),
    File(PathBuf),
    None,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub source: Source,
    pub entry: Option<CatalogEntry>,
    pub k: Option<usize>,
    pub r: Option<usize>,
    pub h_grid: Vec<Complex64>,
    pub t_grid: Vec<Complex64>,
    pub seed: u64,
    pub tol: Tolerances,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Input problems; these exit with status 2.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{0}")]
    Model(String),
    #[error("bad grid value '{value}': {reason}")]
    Grid { value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

/// `{0} ∪ {±2^{−j}, ±i·2^{−j} : j = 0..6}`.
pub fn default_h_grid() -> Vec<Complex64> {
    hdeform_core::sampling::default_h_grid::<f64>()
}

pub fn parse_grid(s: &str, fallback: impl Fn() -> Vec<Complex64>) -> Result<Vec<Complex64>, InputError> {
    let s = s.trim();
    if s == "default" {
        return Ok(fallback());
    }
    if let Some(rest) = s.strip_prefix("square:") {
        let bad = |reason: &str| InputError::Grid {
            value: s.to_string(),
            reason: reason.to_string(),
        };
        let (half, count) = rest.split_once(':').ok_or_else(|| bad("expected square:<half-width>:<points>"))?;
        let half: f64 = half.parse().map_err(|_| bad("half-width is not a number"))?;
        let count: usize = count.parse().map_err(|_| bad("point count is not an integer"))?;
        if count == 0 || !(half >= 0.0) {
            return Err(bad("need a non-negative half-width and at least one point"));
        }
        let axis: Vec<f64> = if count == 1 {
            vec![0.0]
        } else {
            (0..count)
                .map(|i| half * (2 * i) as f64 / (count - 1) as f64 - half)
                .collect()
        };
        return Ok(axis
            .iter()
            .flat_map(|&a| axis.iter().map(move |&b| Complex64::new(a, b)))
            .collect());
    }
    let values = s
        .split(',')
        .map(|v| {
            parse_complex(v.trim()).map_err(|e| InputError::Grid {
                value: v.trim().to_string(),
                reason: e.message,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(InputError::Invalid("grid is empty".into()));
    }
    Ok(values)
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, InputError> {
        let (source, entry) = match (&cli.model, &cli.file) {
            (Some(name), None) => (
                Source::Catalog(name.clone()),
                Some(catalog(name).map_err(|e| InputError::Model(e.to_string()))?),
            ),
            (None, Some(path)) => (
                Source::File(path.clone()),
                Some(parse_model_file(path).map_err(|e| InputError::Model(format!("{}: {e}", path.display())))?),
            ),
            (None, None) => (Source::None, None),
            (Some(_), Some(_)) => return Err(InputError::Invalid("give either --model or --file".into())),
        };
        if entry.is_none() && cli.command != Command::List {
            return Err(InputError::Invalid("a model is required: pass --model or --file".into()));
        }
        if !(cli.tol_rank > 0.0) || !(cli.tol_zero > 0.0) {
            return Err(InputError::Invalid("tolerances must be positive".into()));
        }
        if cli.jobs == Some(0) {
            return Err(InputError::Invalid("--jobs must be at least 1".into()));
        }
        if cli.r == Some(0) {
            return Err(InputError::Invalid("--r starts at 1".into()));
        }
        let tol = Tolerances {
            rank: cli.tol_rank,
            zero: cli.tol_zero,
            ..Tolerances::default()
        };
        Ok(RunConfig {
            command: cli.command,
            source,
            entry,
            k: cli.k,
            r: cli.r,
            h_grid: parse_grid(&cli.h_grid, default_h_grid)?,
            t_grid: parse_grid(&cli.t_grid, || parse_grid("square:0.3:5", Vec::new).expect("literal"))?,
            seed: cli.seed,
            tol,
            format: cli.format,
            out: cli.out.clone(),
            jobs: cli.jobs,
        })
    }
}
