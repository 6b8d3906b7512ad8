//! Candidate geometries, selections, Δω grids and the per-Δω sums the CRB is
//! built from.
//!
//! Positions are dimensionless phase positions: sensor `n` of a candidate
//! array contributes `exp(j * x_n * ω)` to the steering vector of a source at
//! electrical angle `ω`. A ULA has `x_n = n`.

use std::f64::consts::PI;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type C64 = Complex<f64>;

/// Tolerance used when checking that relaxed weights lie in `[0, 1]`.
pub const BOX_TOLERANCE: f64 = 1e-8;
/// Tolerance on `|Σ p − m|` for relaxed selections.
pub const CARDINALITY_TOLERANCE: f64 = 1e-6;
/// Lower end of the default Δω grid is this constant divided by `N`.
pub const HALF_POWER_BEAMWIDTH: f64 = 1.772;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ArrayGeometry {
    positions: Vec<f64>,
}

impl ArrayGeometry {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.len() < 2 {
            return Err(Error::InvalidGeometry(format!(
                "need at least 2 positions, got {}",
                positions.len()
            )));
        }
        if let Some(bad) = positions.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidGeometry(format!("non-finite position {bad}")));
        }
        if let Some(w) = positions.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGeometry(format!(
                "positions must be strictly increasing ({} >= {})",
                w[0], w[1]
            )));
        }
        Ok(Self { positions })
    }

    /// Uniform linear array with positions `0, 1, ..., n - 1`.
    pub fn ula(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn is_uniform(&self) -> bool {
        self.positions
            .iter()
            .enumerate()
            .all(|(i, &x)| x == i as f64)
    }

    pub fn translated(&self, offset: f64) -> Result<Self> {
        Self::new(self.positions.iter().map(|x| x + offset).collect())
    }

    /// Mirror image about the array centre, re-anchored so the first
    /// position is unchanged: `x_n -> x_0 + x_{N-1} - x_{N-1-n}`.
    pub fn reflected(&self) -> Self {
        let first = self.positions[0];
        let last = self.positions[self.len() - 1];
        let positions = self
            .positions
            .iter()
            .rev()
            .map(|x| first + last - x)
            .collect();
        Self { positions }
    }

    pub(crate) fn check_weights(&self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                actual: weights.len(),
            });
        }
        if let Some(w) = weights
            .iter()
            .find(|w| !(-BOX_TOLERANCE..=1.0 + BOX_TOLERANCE).contains(*w))
        {
            return Err(Error::Domain(format!("weight {w} is outside [0, 1]")));
        }
        Ok(())
    }
}

impl TryFrom<Vec<f64>> for ArrayGeometry {
    type Error = Error;

    fn try_from(positions: Vec<f64>) -> Result<Self> {
        Self::new(positions)
    }
}

impl From<ArrayGeometry> for Vec<f64> {
    fn from(g: ArrayGeometry) -> Self {
        g.positions
    }
}

/// Binary selection over the candidate sensors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Selection {
    flags: Vec<bool>,
}

impl Selection {
    pub fn from_flags(flags: Vec<bool>) -> Self {
        Self { flags }
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut flags = vec![false; n];
        for &i in indices {
            if i >= n {
                return Err(Error::Domain(format!("index {i} out of range for n = {n}")));
            }
            if flags[i] {
                return Err(Error::Domain(format!("duplicate index {i}")));
            }
            flags[i] = true;
        }
        Ok(Self { flags })
    }

    pub fn full(n: usize) -> Self {
        Self {
            flags: vec![true; n],
        }
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    /// Number of selected sensors.
    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn contains(&self, index: usize) -> bool {
        self.flags.get(index).copied().unwrap_or(false)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
            .collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.flags
            .iter()
            .map(|&f| if f { 1.0 } else { 0.0 })
            .collect()
    }

    /// `0`/`1` string, one character per candidate.
    pub fn bit_string(&self) -> String {
        self.flags
            .iter()
            .map(|&f| if f { '1' } else { '0' })
            .collect()
    }

    /// `#` for selected, `.` for unselected.
    pub fn pattern(&self) -> String {
        self.flags
            .iter()
            .map(|&f| if f { '#' } else { '.' })
            .collect()
    }

    pub fn reversed(&self) -> Self {
        Self {
            flags: self.flags.iter().rev().copied().collect(),
        }
    }
}

/// Box-relaxed selection weights in `[0, 1]^N` summing to `target_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxedSelection {
    values: Vec<f64>,
    target_m: usize,
}

impl RelaxedSelection {
    pub fn new(values: Vec<f64>, target_m: usize) -> Result<Self> {
        if target_m > values.len() {
            return Err(Error::InvalidCardinality {
                n: values.len(),
                m: target_m,
            });
        }
        if let Some(v) = values
            .iter()
            .find(|v| !(-BOX_TOLERANCE..=1.0 + BOX_TOLERANCE).contains(*v))
        {
            return Err(Error::Domain(format!(
                "relaxed weight {v} is outside [0, 1]"
            )));
        }
        let sum: f64 = values.iter().sum();
        if (sum - target_m as f64).abs() > CARDINALITY_TOLERANCE {
            return Err(Error::Domain(format!(
                "relaxed weights sum to {sum}, expected {target_m}"
            )));
        }
        Ok(Self { values, target_m })
    }

    /// Clamps solver output into the box, then validates.
    pub fn from_solver_output(mut values: Vec<f64>, target_m: usize) -> Result<Self> {
        for v in &mut values {
            *v = v.clamp(0.0, 1.0);
        }
        Self::new(values, target_m)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn target_m(&self) -> usize {
        self.target_m
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<&Selection> for RelaxedSelection {
    fn from(s: &Selection) -> Self {
        Self {
            values: s.weights(),
            target_m: s.count(),
        }
    }
}

/// Sorted set of positive phase-angle differences in `(0, π]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DeltaGrid {
    points: Vec<f64>,
}

impl DeltaGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if let Some(p) = points.iter().find(|&&p| !(p > 0.0 && p <= PI)) {
            return Err(Error::InvalidGrid(format!("point {p} is outside (0, π]")));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGrid(
                "points must be strictly increasing".into(),
            ));
        }
        Ok(Self { points })
    }

    /// `count` equally spaced points from `min` to `max`, both included.
    pub fn linspace(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {count}"
            )));
        }
        let step = (max - min) / (count - 1) as f64;
        let mut points: Vec<f64> = (0..count).map(|i| min + step * i as f64).collect();
        // pin the endpoints exactly
        points[0] = min;
        points[count - 1] = max;
        Self::new(points)
    }

    /// `count` points from `1.772 / N` to `π` inclusive.
    pub fn default_for(geometry: &ArrayGeometry, count: usize) -> Result<Self> {
        Self::linspace(default_grid_min(geometry.len()), PI, count)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    /// First `count` points of the grid (or all of them).
    pub fn truncated(&self, count: usize) -> Result<Self> {
        Self::new(self.points.iter().copied().take(count).collect())
    }
}

impl TryFrom<Vec<f64>> for DeltaGrid {
    type Error = Error;

    fn try_from(points: Vec<f64>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<DeltaGrid> for Vec<f64> {
    fn from(g: DeltaGrid) -> Self {
        g.points
    }
}

pub fn default_grid_min(n: usize) -> f64 {
    HALF_POWER_BEAMWIDTH / n as f64
}

/// The sums that make up the two-target CRB at one Δω.
///
/// `Z = [[total, z], [conj(z), total]]` is not stored; see
/// [`CrbComponents::z_matrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrbComponents {
    /// `Σ p_n exp(j x_n Δω)`
    pub z: C64,
    /// `(Σ p_n x_n, Σ p_n x_n exp(-j x_n Δω))`
    pub zbar: [C64; 2],
    /// `Σ p_n x_n²`
    pub zbarbar: f64,
    /// `Σ p_n`
    pub total: f64,
}

impl CrbComponents {
    pub fn z_matrix(&self) -> [[C64; 2]; 2] {
        let t = C64::new(self.total, 0.0);
        [[t, self.z], [self.z.conj(), t]]
    }

    /// Components at `-Δω`, which are the complex conjugates.
    pub fn conjugated(&self) -> Self {
        Self {
            z: self.z.conj(),
            zbar: [self.zbar[0].conj(), self.zbar[1].conj()],
            ..*self
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            z: self.z * alpha,
            zbar: [self.zbar[0] * alpha, self.zbar[1] * alpha],
            zbarbar: self.zbarbar * alpha,
            total: self.total * alpha,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            z: self.z + other.z,
            zbar: [self.zbar[0] + other.zbar[0], self.zbar[1] + other.zbar[1]],
            zbarbar: self.zbarbar + other.zbarbar,
            total: self.total + other.total,
        }
    }
}

/// Evaluates the CRB sums for weights `p` at phase difference `dw`.
pub fn crb_components(geometry: &ArrayGeometry, weights: &[f64], dw: f64) -> Result<CrbComponents> {
    geometry.check_weights(weights)?;
    check_delta(dw)?;
    Ok(components_unchecked(geometry.positions(), weights, dw))
}

pub(crate) fn check_delta(dw: f64) -> Result<()> {
    if dw > 0.0 && dw <= PI {
        Ok(())
    } else {
        Err(Error::Domain(format!("Δω = {dw} is outside (0, π]")))
    }
}

pub(crate) fn components_unchecked(positions: &[f64], weights: &[f64], dw: f64) -> CrbComponents {
    let mut out = CrbComponents {
        z: C64::new(0.0, 0.0),
        zbar: [C64::new(0.0, 0.0); 2],
        zbarbar: 0.0,
        total: 0.0,
    };
    for (&x, &p) in positions.iter().zip(weights) {
        if p == 0.0 {
            continue;
        }
        let phase = C64::from_polar(1.0, x * dw);
        out.z += phase * p;
        out.zbar[0] += C64::new(p * x, 0.0);
        out.zbar[1] += phase.conj() * (p * x);
        out.zbarbar += p * x * x;
        out.total += p;
    }
    out
}
