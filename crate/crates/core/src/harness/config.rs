use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::array::default_grid_min;
use crate::conic::SolverConfig;
use crate::rounding::{RoundingConfig, DEFAULT_TRIALS};
use crate::{ArrayGeometry, CrbParams, DeltaGrid, Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 128;

/// How to build the Δω grid for an `N`-sensor array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GridSpec {
    /// Equally spaced points, both ends included. `min: None` means the
    /// half-power beamwidth `1.772 / N`.
    Linspace {
        points: usize,
        min: Option<f64>,
        max: f64,
    },
    Explicit {
        values: Vec<f64>,
    },
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::Linspace {
            points: DEFAULT_GRID_POINTS,
            min: None,
            max: PI,
        }
    }
}

impl GridSpec {
    pub fn linspace(points: usize, min: Option<f64>, max: f64) -> Self {
        Self::Linspace { points, min, max }
    }

    pub fn build(&self, n: usize) -> Result<DeltaGrid> {
        match self {
            Self::Linspace { points, min, max } => {
                let lo = min.unwrap_or_else(|| default_grid_min(n));
                if !(lo < *max) {
                    return Err(Error::InvalidGrid(format!(
                        "grid minimum {lo} is not below maximum {max}"
                    )));
                }
                DeltaGrid::linspace(lo, *max, *points)
            }
            Self::Explicit { values } => DeltaGrid::new(values.clone()),
        }
    }

    /// The same grid with the automatic minimum made explicit, as stored in
    /// output records.
    pub fn resolved(&self, n: usize) -> Self {
        match self {
            Self::Linspace { points, min, max } => Self::Linspace {
                points: *points,
                min: Some(min.unwrap_or_else(|| default_grid_min(n))),
                max: *max,
            },
            other => other.clone(),
        }
    }
}

/// Everything a single selection run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub m: usize,
    /// Non-uniform candidate positions; `None` is the ULA `0..N`.
    pub positions: Option<Vec<f64>>,
    pub grid: GridSpec,
    pub factor: f64,
    pub trials: usize,
    pub seed: u64,
    pub solver: SolverConfig,
}

impl RunConfig {
    pub fn new(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            positions: None,
            grid: GridSpec::default(),
            factor: 1.0,
            trials: DEFAULT_TRIALS,
            seed: 0,
            solver: SolverConfig::default(),
        }
    }

    /// Checks every precondition that a run would otherwise hit halfway.
    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        self.grid()?;
        self.params()?;
        if self.m < 2 || self.m > self.n {
            return Err(Error::InvalidCardinality {
                n: self.n,
                m: self.m,
            });
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        match &self.positions {
            None => ArrayGeometry::ula(self.n),
            Some(p) if p.len() != self.n => Err(Error::Config(format!(
                "{} positions given for n = {}",
                p.len(),
                self.n
            ))),
            Some(p) => ArrayGeometry::new(p.clone()),
        }
    }

    pub fn grid(&self) -> Result<DeltaGrid> {
        self.grid.build(self.n)
    }

    pub fn params(&self) -> Result<CrbParams> {
        CrbParams::with_factor(self.factor)
    }

    pub fn rounding(&self) -> RoundingConfig {
        RoundingConfig::new(self.trials, self.seed)
    }
}
