//! Cramér-Rao bounds for angle-of-arrival estimation with a selected subarray.

use std::cmp::Ordering;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::array::{components_unchecked, ArrayGeometry, CrbComponents, DeltaGrid, Selection, C64};
use crate::{Error, Result};

/// `|det Z| <= SINGULAR_TOL * (Σp)²` means `Z` is treated as singular.
pub const SINGULAR_TOL: f64 = 1e-12;
/// Denominators at or below `IDENTIFIABILITY_TOL * zbarbar` give an infinite bound.
pub const IDENTIFIABILITY_TOL: f64 = 1e-12;
/// Allowed imaginary residue of the Schur complement, relative to `1 + |Re|`.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;
/// Allowed relative mismatch between the two diagonal entries in the oracle.
pub const ORACLE_SYMMETRY_TOL: f64 = 1e-9;

/// Noise and snapshot scale, entering every bound as `σ² / (2T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrbParams {
    noise_variance: f64,
    snapshots: u32,
}

impl CrbParams {
    pub fn new(noise_variance: f64, snapshots: u32) -> Result<Self> {
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(Error::Domain(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        if snapshots == 0 {
            return Err(Error::Domain("snapshot count must be positive".into()));
        }
        Ok(Self {
            noise_variance,
            snapshots,
        })
    }

    /// Parameters with `σ² / (2T) = factor`, using a single snapshot.
    pub fn with_factor(factor: f64) -> Result<Self> {
        Self::new(2.0 * factor, 1)
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn snapshots(&self) -> u32 {
        self.snapshots
    }

    pub fn factor(&self) -> f64 {
        self.noise_variance / (2.0 * self.snapshots as f64)
    }
}

impl Default for CrbParams {
    fn default() -> Self {
        Self {
            noise_variance: 2.0,
            snapshots: 1,
        }
    }
}

/// A positive bound, or `+∞` when the configuration is unidentifiable.
///
/// Serialized as a JSON number, or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            Self::Finite(v)
        } else {
            Self::Infinite
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Self::Finite(v) => v,
            Self::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    pub fn scaled(self, alpha: f64) -> Self {
        match self {
            Self::Finite(v) => Self::Finite(v * alpha),
            Self::Infinite => Self::Infinite,
        }
    }
}

impl Eq for ExtendedReal {}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value().total_cmp(&other.value())
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) if v.is_finite() && v >= 0.0 => Ok(Self::Finite(v)),
            Repr::Num(v) => Err(serde::de::Error::custom(format!("invalid bound {v}"))),
            Repr::Str(s) if s == "inf" => Ok(Self::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("invalid bound {s:?}"))),
        }
    }
}

/// Worst case of the two-target bound over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub value: ExtendedReal,
    pub argmax_dw: f64,
}

/// `zbar^H Z^{-1} zbar`, or `None` when `Z` is singular.
pub fn schur_term(c: &CrbComponents) -> Result<Option<f64>> {
    let t = c.total;
    let det = t * t - c.z.norm_sqr();
    if t <= 0.0 || det <= SINGULAR_TOL * t * t {
        return Ok(None);
    }
    // Z^{-1} = [[t, -z], [-conj z, t]] / det
    let [a, b] = c.zbar;
    let q = (a.conj() * a * t + b.conj() * b * t - a.conj() * c.z * b - b.conj() * c.z.conj() * a)
        / det;
    if q.im.abs() > IMAG_RESIDUE_TOL * (1.0 + q.re.abs()) {
        return Err(Error::Numerical(format!(
            "Schur complement has imaginary part {} (real part {})",
            q.im, q.re
        )));
    }
    Ok(Some(q.re))
}

fn bound_from_components(c: &CrbComponents, factor: f64) -> Result<ExtendedReal> {
    let Some(q) = schur_term(c)? else {
        return Ok(ExtendedReal::Infinite);
    };
    let denominator = c.zbarbar - q;
    if denominator <= IDENTIFIABILITY_TOL * c.zbarbar {
        return Ok(ExtendedReal::Infinite);
    }
    Ok(ExtendedReal::Finite(factor / denominator))
}

/// Positions shifted so the array midpoint sits at the origin. The bounds do
/// not depend on the origin, and centring keeps the cancellation in
/// `zbarbar - zbar^H Z^{-1} zbar` small for arrays placed far from zero.
fn centered(geometry: &ArrayGeometry) -> Vec<f64> {
    let x = geometry.positions();
    let mid = 0.5 * (x[0] + x[x.len() - 1]);
    x.iter().map(|v| v - mid).collect()
}

/// Two-target bound at separation `dw` for the (possibly fractional) weights.
pub fn two_target_crb(
    geometry: &ArrayGeometry,
    weights: &[f64],
    dw: f64,
    params: &CrbParams,
) -> Result<ExtendedReal> {
    geometry.check_weights(weights)?;
    crate::array::check_delta(dw)?;
    let c = components_unchecked(&centered(geometry), weights, dw);
    bound_from_components(&c, params.factor())
}

/// Single-target bound, `factor / (Σ p x² − (Σ p x)² / Σ p)`.
pub fn single_target_crb(
    geometry: &ArrayGeometry,
    weights: &[f64],
    params: &CrbParams,
) -> Result<ExtendedReal> {
    geometry.check_weights(weights)?;
    let (mut total, mut first, mut second) = (0.0, 0.0, 0.0);
    for (&x, &p) in centered(geometry).iter().zip(weights) {
        total += p;
        first += p * x;
        second += p * x * x;
    }
    if total <= 1e-12 {
        return Ok(ExtendedReal::Infinite);
    }
    let denominator = second - first * first / total;
    if denominator <= IDENTIFIABILITY_TOL * second {
        return Ok(ExtendedReal::Infinite);
    }
    Ok(ExtendedReal::Finite(params.factor() / denominator))
}

/// Two-target bound at every grid point, in grid order.
pub fn crb_profile(
    geometry: &ArrayGeometry,
    weights: &[f64],
    grid: &DeltaGrid,
    params: &CrbParams,
) -> Result<Vec<ExtendedReal>> {
    geometry.check_weights(weights)?;
    let factor = params.factor();
    let positions = centered(geometry);
    grid.points()
        .par_iter()
        .with_min_len(32)
        .map(|&dw| {
            let c = components_unchecked(&positions, weights, dw);
            bound_from_components(&c, factor)
        })
        .collect()
}

/// Maximum of the two-target bound over the grid. Ties go to the smallest Δω.
pub fn worst_case_crb(
    geometry: &ArrayGeometry,
    weights: &[f64],
    grid: &DeltaGrid,
    params: &CrbParams,
) -> Result<WorstCase> {
    let profile = crb_profile(geometry, weights, grid, params)?;
    Ok(worst_of_profile(&profile, grid))
}

/// Maximum of a profile computed on `grid`; ties go to the smallest Δω.
pub fn worst_of_profile(profile: &[ExtendedReal], grid: &DeltaGrid) -> WorstCase {
    let mut best = WorstCase {
        value: profile[0],
        argmax_dw: grid.points()[0],
    };
    for (&value, &dw) in profile.iter().zip(grid.points()).skip(1) {
        if value > best.value {
            best = WorstCase {
                value,
                argmax_dw: dw,
            };
        }
    }
    best
}

/// Two-target bound evaluated from the steering and derivative matrices of
/// the selected subarray, via the orthogonal projector onto the complement of
/// the steering column space.
///
/// Shares no code with [`two_target_crb`] and is used to cross-check it.
pub fn projection_oracle_crb(
    geometry: &ArrayGeometry,
    selection: &Selection,
    omega1: f64,
    omega2: f64,
    params: &CrbParams,
) -> Result<ExtendedReal> {
    if selection.len() != geometry.len() {
        return Err(Error::Shape {
            expected: geometry.len(),
            actual: selection.len(),
        });
    }
    if selection.count() < 2 {
        return Err(Error::Domain(
            "the oracle needs at least 2 selected sensors".into(),
        ));
    }
    let separation = (omega2 - omega1).rem_euclid(std::f64::consts::TAU);
    if separation.min(std::f64::consts::TAU - separation) < 1e-15 {
        return Err(Error::Domain("target angles coincide modulo 2π".into()));
    }
    let rows: Vec<f64> = selection
        .indices()
        .into_iter()
        .map(|i| geometry.positions()[i])
        .collect();
    let m = rows.len();
    let omegas = [omega1, omega2];
    let steering = DMatrix::<C64>::from_fn(m, 2, |r, k| C64::from_polar(1.0, rows[r] * omegas[k]));
    let derivative = DMatrix::<C64>::from_fn(m, 2, |r, k| {
        C64::new(0.0, rows[r]) * C64::from_polar(1.0, rows[r] * omegas[k])
    });

    let svd = steering.clone().svd(true, false);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > 1e-10 * smax).count();
    if rank < 2 {
        return Ok(ExtendedReal::Infinite);
    }
    let u = svd.u.expect("left singular vectors requested");
    let basis = u.columns(0, 2);
    let residual = &derivative - basis * (basis.adjoint() * &derivative);
    let fim = residual.adjoint() * &residual;
    let h11 = fim[(0, 0)].re;
    let h22 = fim[(1, 1)].re;
    let scale = derivative.column(0).norm_squared();
    if h11 <= IDENTIFIABILITY_TOL * scale || h22 <= IDENTIFIABILITY_TOL * scale {
        return Ok(ExtendedReal::Infinite);
    }
    if (h11 - h22).abs() > ORACLE_SYMMETRY_TOL * h11.max(h22) {
        return Err(Error::Numerical(format!(
            "oracle diagonal entries disagree: {h11} vs {h22}"
        )));
    }
    Ok(ExtendedReal::Finite(params.factor() / h11))
}
