use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Relative asymmetry tolerated in block matrices.
const SYMMETRY_TOL: f64 = 1e-12;

/// `coefficients · x = rhs`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEquality {
    pub coefficients: Vec<f64>,
    pub rhs: f64,
}

/// Per-variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VariableBounds {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

impl VariableBounds {
    pub const FREE: Self = Self {
        lower: None,
        upper: None,
    };

    pub fn boxed(lower: f64, upper: f64) -> Self {
        Self {
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    pub fn active_count(&self) -> usize {
        self.lower.is_some() as usize + self.upper.is_some() as usize
    }
}

/// Coefficient matrix of one variable inside a [`PsdBlock`], dense row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTerm {
    pub var: usize,
    pub matrix: Vec<f64>,
}

/// Affine matrix `constant + Σ_i x_i · coefficient_i`, constrained PSD.
///
/// Variables without a term have a zero coefficient matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdBlock {
    pub label: String,
    pub dim: usize,
    pub constant: Vec<f64>,
    pub terms: Vec<BlockTerm>,
}

impl PsdBlock {
    pub fn new(label: impl Into<String>, constant: DMatrix<f64>) -> Self {
        let dim = constant.nrows();
        Self {
            label: label.into(),
            dim,
            constant: row_major(&constant),
            terms: Vec::new(),
        }
    }

    /// Adds a coefficient matrix for `var`; all-zero matrices are skipped.
    pub fn push_term(&mut self, var: usize, matrix: &DMatrix<f64>) {
        if matrix.iter().any(|&v| v != 0.0) {
            self.terms.push(BlockTerm {
                var,
                matrix: row_major(matrix),
            });
        }
    }

    pub fn constant_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.constant)
    }

    pub fn coefficient(&self, var: usize) -> DMatrix<f64> {
        self.terms
            .iter()
            .find(|t| t.var == var)
            .map(|t| DMatrix::from_row_slice(self.dim, self.dim, &t.matrix))
            .unwrap_or_else(|| DMatrix::zeros(self.dim, self.dim))
    }

    /// The block's matrix at the point `x`.
    pub fn evaluate(&self, x: &[f64]) -> DMatrix<f64> {
        let mut out = self.constant_matrix();
        for t in &self.terms {
            let xi = x[t.var];
            for (o, m) in out.iter_mut().zip(transpose_row_major(&t.matrix, self.dim)) {
                *o += xi * m;
            }
        }
        out
    }

    /// Smallest eigenvalue of the block at `x`.
    pub fn min_eigenvalue(&self, x: &[f64]) -> f64 {
        let m = self.evaluate(x);
        let sym = (&m + m.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Row-major storage read back in column-major order.
fn transpose_row_major(data: &[f64], dim: usize) -> impl Iterator<Item = f64> + '_ {
    (0..dim * dim).map(move |k| {
        let (col, row) = (k / dim, k % dim);
        data[row * dim + col]
    })
}

/// A conic program in canonical form:
///
/// ```text
/// minimize    objective · x
/// subject to  equalities[k].coefficients · x = equalities[k].rhs
///             bounds[i].lower <= x_i <= bounds[i].upper
///             psd_blocks[b](x) ⪰ 0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicProblem {
    pub num_vars: usize,
    #[serde(default)]
    pub variable_names: Vec<String>,
    pub objective: Vec<f64>,
    pub equalities: Vec<LinearEquality>,
    pub bounds: Vec<VariableBounds>,
    pub psd_blocks: Vec<PsdBlock>,
}

impl ConicProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars;
        if n == 0 {
            return Err(Error::Domain("problem has no variables".into()));
        }
        let shape = |expected: usize, actual: usize| -> Result<()> {
            if expected == actual {
                Ok(())
            } else {
                Err(Error::Shape { expected, actual })
            }
        };
        shape(n, self.objective.len())?;
        shape(n, self.bounds.len())?;
        if !self.variable_names.is_empty() {
            shape(n, self.variable_names.len())?;
        }
        finite("objective", &self.objective)?;
        for eq in &self.equalities {
            shape(n, eq.coefficients.len())?;
            finite("equality", &eq.coefficients)?;
            finite("equality rhs", &[eq.rhs])?;
        }
        for (i, b) in self.bounds.iter().enumerate() {
            let lo = b.lower.unwrap_or(f64::NEG_INFINITY);
            let hi = b.upper.unwrap_or(f64::INFINITY);
            if lo.is_nan()
                || hi.is_nan()
                || lo > hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(Error::Domain(format!(
                    "variable {i} has bounds [{lo}, {hi}]"
                )));
            }
        }
        for block in &self.psd_blocks {
            if block.dim == 0 {
                return Err(Error::Domain(format!(
                    "block {:?} has dimension 0",
                    block.label
                )));
            }
            let d2 = block
                .dim
                .checked_mul(block.dim)
                .ok_or_else(|| Error::Domain(format!("block {:?} is too large", block.label)))?;
            shape(d2, block.constant.len())?;
            finite("block constant", &block.constant)?;
            check_symmetric(&block.label, &block.constant, block.dim)?;
            let mut seen = vec![false; n];
            for t in &block.terms {
                if t.var >= n {
                    return Err(Error::Domain(format!(
                        "block {:?} references variable {} of {n}",
                        block.label, t.var
                    )));
                }
                if std::mem::replace(&mut seen[t.var], true) {
                    return Err(Error::Domain(format!(
                        "block {:?} has two terms for variable {}",
                        block.label, t.var
                    )));
                }
                shape(d2, t.matrix.len())?;
                finite("block coefficient", &t.matrix)?;
                check_symmetric(&block.label, &t.matrix, block.dim)?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and validates a problem dump.
    pub fn from_json(text: &str) -> Result<Self> {
        let problem: Self = serde_json::from_str(text)?;
        problem.validate()?;
        Ok(problem)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

fn finite(what: &str, values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::Domain(format!(
            "{what} contains non-finite value {v}"
        ))),
        None => Ok(()),
    }
}

fn check_symmetric(label: &str, data: &[f64], dim: usize) -> Result<()> {
    let scale = data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 0..dim {
        for j in 0..i {
            if (data[i * dim + j] - data[j * dim + i]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::Domain(format!(
                    "block {label:?} is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ConicProblem {
        let mut block = PsdBlock::new("b", DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        block.push_term(0, &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        block.push_term(1, &DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
        ConicProblem {
            num_vars: 2,
            variable_names: vec!["a".into(), "b".into()],
            objective: vec![1.0, 1.0],
            equalities: vec![],
            bounds: vec![VariableBounds::FREE; 2],
            psd_blocks: vec![block],
        }
    }

    #[test]
    fn evaluate_block() {
        let p = tiny();
        let m = p.psd_blocks[0].evaluate(&[2.0, 3.0]);
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]));
        assert!(p.psd_blocks[0].min_eigenvalue(&[2.0, 3.0]) > 0.0);
        assert!(p.psd_blocks[0].min_eigenvalue(&[0.5, 0.5]) < 0.0);
    }

    #[test]
    fn zero_terms_are_dropped() {
        let mut b = PsdBlock::new("z", DMatrix::zeros(3, 3));
        b.push_term(4, &DMatrix::zeros(3, 3));
        assert!(b.terms.is_empty());
        assert_eq!(b.coefficient(4), DMatrix::zeros(3, 3));
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let p = tiny();
        let back = ConicProblem::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);

        let mut bad = tiny();
        bad.psd_blocks[0].terms[0].matrix = vec![1.0, 2.0, 0.0, 0.0];
        assert!(bad.validate().is_err());

        let mut bad = tiny();
        bad.psd_blocks[0].terms[0].var = 7;
        assert!(bad.validate().is_err());

        let mut bad = tiny();
        bad.bounds[0] = VariableBounds::boxed(1.0, 0.0);
        assert!(bad.validate().is_err());

        assert!(ConicProblem::from_json("{}").is_err());
        assert!(ConicProblem::from_json("not json").is_err());
    }
}
