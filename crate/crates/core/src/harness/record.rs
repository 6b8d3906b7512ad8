use serde::{Deserialize, Serialize};

use super::config::GridSpec;
use crate::rounding::RoundingWinner;
use crate::{ArrayGeometry, Error, ExtendedReal, Result, Selection};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Proposed,
    Edge,
    Random,
    Exhaustive,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Proposed => "proposed",
            Self::Edge => "edge",
            Self::Random => "random",
            Self::Exhaustive => "exhaustive",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Self::Proposed),
            "edge" => Ok(Self::Edge),
            "random" => Ok(Self::Random),
            "exhaustive" => Ok(Self::Exhaustive),
            other => Err(Error::Parse(format!("unknown method {other:?}"))),
        }
    }
}

/// Relaxation and rounding details of a `proposed` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelaxationSummary {
    pub c_star: f64,
    pub g_star: f64,
    pub iterations: usize,
    pub trials: usize,
    pub winner: RoundingWinner,
    pub winning_trial: usize,
}

/// One selection and its worst-case bound, as written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionRecord {
    pub tool_version: String,
    pub method: Method,
    pub n: usize,
    pub m: usize,
    pub positions: Vec<f64>,
    pub selected: Vec<usize>,
    /// `#` for selected sensors, `.` otherwise.
    pub pattern: String,
    pub worst_case: ExtendedReal,
    pub argmax_dw: f64,
    pub factor: f64,
    pub grid: GridSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub relaxation: Option<RelaxationSummary>,
}

impl SelectionRecord {
    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.positions.clone())
    }

    pub fn selection(&self) -> Result<Selection> {
        Selection::from_indices(self.n, &self.selected)
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.len() != self.n {
            return Err(Error::Shape {
                expected: self.n,
                actual: self.positions.len(),
            });
        }
        self.geometry()?;
        if self.selected.len() != self.m {
            return Err(Error::Shape {
                expected: self.m,
                actual: self.selected.len(),
            });
        }
        if self.selected.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(
                "selected indices must be sorted and unique".into(),
            ));
        }
        let sel = self.selection()?;
        if self.pattern != sel.pattern() {
            return Err(Error::Domain(
                "pattern does not match the selected indices".into(),
            ));
        }
        if !(self.factor.is_finite() && self.factor > 0.0) {
            return Err(Error::Domain(format!(
                "factor must be positive, got {}",
                self.factor
            )));
        }
        self.grid.build(self.n)?;
        Ok(())
    }

    /// Parses and validates a record.
    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        r.validate()?;
        Ok(r)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SelectionRecord {
        SelectionRecord {
            tool_version: TOOL_VERSION.into(),
            method: Method::Edge,
            n: 4,
            m: 2,
            positions: vec![0.0, 1.0, 2.0, 3.0],
            selected: vec![0, 3],
            pattern: "#..#".into(),
            worst_case: ExtendedReal::Finite(0.5),
            argmax_dw: 1.0,
            factor: 1.0,
            grid: GridSpec::default().resolved(4),
            seed: None,
            relaxation: None,
        }
    }

    #[test]
    fn roundtrip() {
        let r = sample();
        assert_eq!(
            SelectionRecord::from_json(&r.to_json().unwrap()).unwrap(),
            r
        );
        let mut inf = sample();
        inf.worst_case = ExtendedReal::Infinite;
        let text = inf.to_json().unwrap();
        assert!(text.contains("\"inf\""));
        assert_eq!(SelectionRecord::from_json(&text).unwrap(), inf);
    }

    #[test]
    fn rejects_inconsistent_records() {
        let mut r = sample();
        r.selected = vec![3, 0];
        assert!(r.validate().is_err());
        let mut r = sample();
        r.selected = vec![0, 4];
        r.pattern = "#...".into();
        assert!(r.validate().is_err());
        let mut r = sample();
        r.pattern = "##..".into();
        assert!(r.validate().is_err());
        let mut r = sample();
        r.m = 3;
        assert!(r.validate().is_err());
        assert!(SelectionRecord::from_json("{\"n\": 3}").is_err());
    }
}
