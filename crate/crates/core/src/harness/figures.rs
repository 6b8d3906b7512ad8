//! Data bundles for the selection-pattern and CRB-curve figures.
//!
//! Every bundle directory holds a `manifest.json` listing its files. Pattern
//! files are CSV with columns `method,pattern,worst_case_crb`, one row per
//! method, `pattern` being an `N`-character `0`/`1` string. Curve bundles
//! carry the raw sweep table and a `curves.csv` with per-method mean, minimum
//! and maximum.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{GridSpec, RunConfig};
use super::pipeline::run_method;
use super::record::{Method, SelectionRecord, TOOL_VERSION};
use super::sweep::{
    run_sweep, summarize, write_curves_csv, write_sweep_csv, SweepAxis, SweepConfig,
};
use crate::{Error, Result};

/// `(N, M)` pairs of the pattern figure, in display order.
pub const PATTERN_PAIRS: [(usize, usize); 5] = [(128, 32), (64, 16), (32, 8), (16, 4), (8, 4)];
pub const ARRAY_SIZES: [usize; 5] = [8, 16, 32, 64, 128];
pub const SELECTION_SIZES: [usize; 5] = [4, 8, 16, 32, 64];
/// Lower grid end of the alternate-grid figure.
pub const ALTERNATE_GRID_MIN: f64 = PI / 18.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Patterns,
    AlternateGrid,
    CurvesN,
    CurvesM,
}

impl std::str::FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Self::Patterns),
            "2" => Ok(Self::AlternateGrid),
            "3a" => Ok(Self::CurvesN),
            "3b" => Ok(Self::CurvesM),
            other => Err(Error::Config(format!(
                "unknown figure {other:?} (expected 1, 2, 3a or 3b)"
            ))),
        }
    }
}

impl FigureId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Patterns => "1",
            Self::AlternateGrid => "2",
            Self::CurvesN => "3a",
            Self::CurvesM => "3b",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub figure: String,
    pub tool_version: String,
    pub kind: &'static str,
    pub factor: f64,
    pub trials: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub files: Vec<String>,
}

/// Settings shared by every figure.
#[derive(Debug, Clone)]
pub struct FigureConfig {
    /// Grid points, factor, trials, seed and solver; `n`, `m` and the grid
    /// bounds are set per figure.
    pub base: RunConfig,
    pub random_seeds: usize,
}

impl FigureConfig {
    pub fn new(base: RunConfig) -> Self {
        Self {
            base,
            random_seeds: super::sweep::DEFAULT_RANDOM_SEEDS,
        }
    }

    fn grid_points(&self) -> usize {
        match self.base.grid {
            GridSpec::Linspace { points, .. } => points,
            GridSpec::Explicit { .. } => super::config::DEFAULT_GRID_POINTS,
        }
    }

    fn run(&self, n: usize, m: usize, grid_min: Option<f64>) -> RunConfig {
        let mut c = self.base.clone();
        c.n = n;
        c.m = m;
        c.grid = GridSpec::linspace(self.grid_points(), grid_min, PI);
        c
    }
}

fn write_patterns(path: &Path, records: &[SelectionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(["method", "pattern", "worst_case_crb"])?;
    for r in records {
        let bits: String = (0..r.n)
            .map(|i| {
                if r.selected.binary_search(&i).is_ok() {
                    '1'
                } else {
                    '0'
                }
            })
            .collect();
        w.write_record([r.method.to_string(), bits, r.worst_case.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<PathBuf> {
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

/// Writes the bundle for `figure` into `dir` (created if missing) and returns
/// the manifest.
pub fn figure_data(figure: FigureId, cfg: &FigureConfig, dir: &Path) -> Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut manifest_grid = GridSpec::linspace(cfg.grid_points(), None, PI);
    let kind;
    match figure {
        FigureId::Patterns | FigureId::AlternateGrid => {
            kind = "patterns";
            let (pairs, grid_min): (&[(usize, usize)], _) = match figure {
                FigureId::Patterns => (&PATTERN_PAIRS, None),
                _ => (&[(64, 16)], Some(ALTERNATE_GRID_MIN)),
            };
            manifest_grid = GridSpec::linspace(cfg.grid_points(), grid_min, PI);
            for &(n, m) in pairs {
                let run = cfg.run(n, m, grid_min);
                let records = vec![
                    run_method(&run, Method::Edge)?,
                    run_method(&run, Method::Proposed)?,
                ];
                let name = format!("patterns_N{n}_M{m}.csv");
                write_patterns(&dir.join(&name), &records)?;
                files.push(name);
                for r in records {
                    let name = format!("record_N{n}_M{m}_{}.json", r.method);
                    std::fs::write(dir.join(&name), r.to_json()?)?;
                    files.push(name);
                }
            }
        }
        FigureId::CurvesN | FigureId::CurvesM => {
            kind = "curves";
            let (axis, values) = match figure {
                FigureId::CurvesN => (SweepAxis::N, ARRAY_SIZES.to_vec()),
                _ => (SweepAxis::M, SELECTION_SIZES.to_vec()),
            };
            let mut sweep = SweepConfig::new(axis, values, cfg.run(cfg.base.n, cfg.base.m, None));
            sweep.random_seeds = cfg.random_seeds;
            let rows = run_sweep(&sweep)?;
            write_sweep_csv(BufWriter::new(File::create(dir.join("sweep.csv"))?), &rows)?;
            let curves = summarize(&rows, axis);
            write_curves_csv(
                BufWriter::new(File::create(dir.join("curves.csv"))?),
                axis,
                &curves,
            )?;
            files.push("sweep.csv".into());
            files.push("curves.csv".into());
        }
    }
    let manifest = Manifest {
        figure: figure.as_str().into(),
        tool_version: TOOL_VERSION.into(),
        kind,
        factor: cfg.base.factor,
        trials: cfg.base.trials,
        seed: cfg.base.seed,
        grid: manifest_grid,
        files,
    };
    write_manifest(dir, &manifest)?;
    Ok(manifest)
}
