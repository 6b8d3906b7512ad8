//! Convex relaxation of the worst-case sensor selection program.
//!
//! Variables are `(p_0, ..., p_{N-1}, c, g)`. The program is
//!
//! ```text
//! minimize    c
//! subject to  Σ p_n = M,  0 <= p_n <= 1
//!             [[zbarbar(p) - g, 1], [1, c]] ⪰ 0
//!             [[g, zbar(Δω)ᴴ], [zbar(Δω), Z(Δω)]] ⪰ 0   for every Δω in the grid
//! ```
//!
//! The first matrix inequality is equivalent to `c >= 1 / (zbarbar - g)` and
//! the per-grid ones to `g >= zbarᴴ Z⁻¹ zbar`, so for binary `p` the optimal
//! `c` is the worst-case CRB with unit factor. The complex Hermitian 3×3
//! blocks are passed to the solver through their real 6×6 embedding.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::array::{components_unchecked, ArrayGeometry, DeltaGrid, RelaxedSelection, C64};
use crate::conic::{
    ConicProblem, ConicSolver, InteriorPointSolver, LinearEquality, PsdBlock, SolveStatus,
    SolverConfig, VariableBounds,
};
use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Index of `c` in the variable vector of a relaxation over `n` sensors.
pub fn c_index(n: usize) -> usize {
    n
}

/// Index of `g` in the variable vector of a relaxation over `n` sensors.
pub fn g_index(n: usize) -> usize {
    n + 1
}

/// Full variable vector `(p, c, g)`.
pub fn relaxation_point(p: &[f64], c: f64, g: f64) -> Vec<f64> {
    let mut x = p.to_vec();
    x.push(c);
    x.push(g);
    x
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a Hermitian
/// matrix. Its spectrum is that of `H` with every multiplicity doubled.
pub fn hermitian_to_real_embedding(h: &DMatrix<C64>) -> Result<DMatrix<f64>> {
    let m = h.nrows();
    if h.ncols() != m {
        return Err(Error::Shape {
            expected: m,
            actual: h.ncols(),
        });
    }
    let scale = h.iter().fold(1.0f64, |a, v| a.max(v.norm()));
    for i in 0..m {
        for j in 0..=i {
            if (h[(i, j)] - h[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                return Err(Error::Domain(format!(
                    "matrix is not Hermitian at ({i}, {j})"
                )));
            }
        }
    }
    Ok(DMatrix::from_fn(2 * m, 2 * m, |r, c| {
        let v = h[(r % m, c % m)];
        match (r < m, c < m) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    }))
}

/// Hermitian 3×3 block `[[g, zbarᴴ], [zbar, Z]]` of one sensor's unit
/// contribution (or of `g` alone when `sensor` is `None`).
fn unit_schur_block(positions: &[f64], sensor: Option<usize>, dw: f64) -> DMatrix<C64> {
    let zero = C64::new(0.0, 0.0);
    let mut h = DMatrix::from_element(3, 3, zero);
    match sensor {
        None => h[(0, 0)] = C64::new(1.0, 0.0),
        Some(i) => {
            let mut w = vec![0.0; positions.len()];
            w[i] = 1.0;
            let c = components_unchecked(positions, &w, dw);
            let zm = c.z_matrix();
            for (k, zb) in c.zbar.iter().enumerate() {
                h[(k + 1, 0)] = *zb;
                h[(0, k + 1)] = zb.conj();
            }
            for r in 0..2 {
                for col in 0..2 {
                    h[(r + 1, col + 1)] = zm[r][col];
                }
            }
        }
    }
    h
}

/// Builds the relaxation for selecting `m` of the candidate sensors.
pub fn build_relaxation(
    geometry: &ArrayGeometry,
    m: usize,
    grid: &DeltaGrid,
) -> Result<ConicProblem> {
    let n = geometry.len();
    if m < 2 || m > n {
        return Err(Error::InvalidCardinality { n, m });
    }
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    let positions = geometry.positions();
    let (ci, gi) = (c_index(n), g_index(n));

    let mut variable_names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    variable_names.push("c".into());
    variable_names.push("g".into());

    let mut objective = vec![0.0; n + 2];
    objective[ci] = 1.0;

    let mut cardinality = vec![1.0; n];
    cardinality.extend([0.0, 0.0]);

    let mut bounds = vec![VariableBounds::boxed(0.0, 1.0); n];
    bounds.extend([VariableBounds::FREE, VariableBounds::FREE]);

    // [[zbarbar - g, 1], [1, c]]
    let mut reciprocal = PsdBlock::new(
        "reciprocal",
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
    );
    for (i, &x) in positions.iter().enumerate() {
        reciprocal.push_term(i, &DMatrix::from_row_slice(2, 2, &[x * x, 0.0, 0.0, 0.0]));
    }
    reciprocal.push_term(ci, &DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
    reciprocal.push_term(gi, &DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]));

    let schur_blocks: Vec<PsdBlock> = grid
        .points()
        .par_iter()
        .enumerate()
        .map(|(k, &dw)| -> Result<PsdBlock> {
            let mut block = PsdBlock::new(format!("schur[{k}] dw={dw}"), DMatrix::zeros(6, 6));
            for i in 0..n {
                let real = hermitian_to_real_embedding(&unit_schur_block(positions, Some(i), dw))?;
                block.push_term(i, &real);
            }
            let real = hermitian_to_real_embedding(&unit_schur_block(positions, None, dw))?;
            block.push_term(gi, &real);
            Ok(block)
        })
        .collect::<Result<_>>()?;

    let mut psd_blocks = Vec::with_capacity(1 + grid.len());
    psd_blocks.push(reciprocal);
    psd_blocks.extend(schur_blocks);

    Ok(ConicProblem {
        num_vars: n + 2,
        variable_names,
        objective,
        equalities: vec![LinearEquality {
            coefficients: cardinality,
            rhs: m as f64,
        }],
        bounds,
        psd_blocks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelaxationStatus {
    Optimal,
    MaxIterations,
    Infeasible,
    NumericalFailure,
}

impl From<SolveStatus> for RelaxationStatus {
    fn from(s: SolveStatus) -> Self {
        match s {
            SolveStatus::Optimal => Self::Optimal,
            SolveStatus::MaxIterations => Self::MaxIterations,
            SolveStatus::Infeasible => Self::Infeasible,
            // c is bounded below by zero through the reciprocal block, so an
            // unboundedness certificate can only come from numerical trouble
            SolveStatus::Unbounded | SolveStatus::NumericalFailure => Self::NumericalFailure,
        }
    }
}

impl std::fmt::Display for RelaxationStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Optimal => "optimal",
            Self::MaxIterations => "max-iterations",
            Self::Infeasible => "infeasible",
            Self::NumericalFailure => "numerical-failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationResult {
    pub status: RelaxationStatus,
    /// Relaxed weights; present only when the solve was optimal.
    pub relaxed: Option<RelaxedSelection>,
    /// Optimal `c`, the relaxed worst-case bound at unit factor. `+∞` when
    /// the program is infeasible.
    pub c_star: f64,
    pub g_star: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
}

impl RelaxationResult {
    pub fn is_optimal(&self) -> bool {
        self.status == RelaxationStatus::Optimal
    }
}

/// Solves a relaxation with the built-in interior-point solver.
pub fn solve_relaxation(problem: &ConicProblem, config: &SolverConfig) -> Result<RelaxationResult> {
    solve_relaxation_with(problem, &InteriorPointSolver::new(*config))
}

/// Solves a relaxation produced by [`build_relaxation`] with any conic solver.
pub fn solve_relaxation_with(
    problem: &ConicProblem,
    solver: &dyn ConicSolver,
) -> Result<RelaxationResult> {
    problem.validate()?;
    if problem.num_vars < 4 || problem.equalities.len() != 1 {
        return Err(Error::Domain(
            "not a selection relaxation: expected N + 2 variables and one cardinality equality"
                .into(),
        ));
    }
    let n = problem.num_vars - 2;
    let rhs = problem.equalities[0].rhs;
    let out = solver.solve(problem);
    let mut status = RelaxationStatus::from(out.status);
    let mut relaxed = None;
    if status == RelaxationStatus::Optimal {
        let m = rhs.round();
        if (rhs - m).abs() > 1e-9 || m < 0.0 {
            return Err(Error::Domain(format!(
                "cardinality {rhs} is not an integer"
            )));
        }
        match RelaxedSelection::from_solver_output(out.x[..n].to_vec(), m as usize) {
            Ok(r) => relaxed = Some(r),
            Err(_) => status = RelaxationStatus::NumericalFailure,
        }
    }
    let (c_star, g_star) = match status {
        RelaxationStatus::Infeasible => (f64::INFINITY, f64::NAN),
        _ => (out.x[c_index(n)], out.x[g_index(n)]),
    };
    Ok(RelaxationResult {
        status,
        relaxed,
        c_star,
        g_star,
        primal_residual: out.primal_residual,
        dual_residual: out.dual_residual,
        gap: out.gap,
        iterations: out.iterations,
    })
}

/// Constraint-by-constraint margins of a candidate point. Negative margins
/// are violations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// `|a·x - b|` for every equality.
    pub equality_residuals: Vec<f64>,
    /// `min(x_i - lower_i, upper_i - x_i)` per variable (`+∞` when free).
    pub bound_margins: Vec<f64>,
    /// Smallest eigenvalue of every PSD block, in block order.
    pub block_min_eigenvalues: Vec<f64>,
    pub feasible: bool,
}

impl FeasibilityReport {
    pub fn worst_block(&self) -> Option<(usize, f64)> {
        self.block_min_eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

pub fn verify_solution_feasibility(
    problem: &ConicProblem,
    x: &[f64],
    tol: f64,
) -> Result<FeasibilityReport> {
    if x.len() != problem.num_vars {
        return Err(Error::Shape {
            expected: problem.num_vars,
            actual: x.len(),
        });
    }
    let equality_residuals: Vec<f64> = problem
        .equalities
        .iter()
        .map(|e| {
            (e.coefficients
                .iter()
                .zip(x)
                .map(|(a, v)| a * v)
                .sum::<f64>()
                - e.rhs)
                .abs()
        })
        .collect();
    let bound_margins: Vec<f64> = problem
        .bounds
        .iter()
        .zip(x)
        .map(|(b, &v)| {
            let lo = b.lower.map_or(f64::INFINITY, |l| v - l);
            let hi = b.upper.map_or(f64::INFINITY, |u| u - v);
            lo.min(hi)
        })
        .collect();
    let block_min_eigenvalues: Vec<f64> = problem
        .psd_blocks
        .par_iter()
        .map(|b| b.min_eigenvalue(x))
        .collect();
    let feasible = equality_residuals.iter().all(|&r| r <= tol)
        && bound_margins.iter().all(|&m| m >= -tol)
        && block_min_eigenvalues.iter().all(|&e| e >= -tol);
    Ok(FeasibilityReport {
        equality_residuals,
        bound_margins,
        block_min_eigenvalues,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crb::{schur_term, worst_case_crb, CrbParams};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn embedding_of_identity() {
        let h = DMatrix::<C64>::identity(2, 2);
        assert_eq!(
            hermitian_to_real_embedding(&h).unwrap(),
            DMatrix::identity(4, 4)
        );
    }

    #[test]
    fn embedding_spectrum_is_doubled() {
        let h =
            DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]);
        let e = hermitian_to_real_embedding(&h).unwrap();
        let mut ev: Vec<f64> = e.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (got, want) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn embedding_rejects_non_hermitian() {
        let h =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        assert!(matches!(
            hermitian_to_real_embedding(&h),
            Err(Error::Domain(_))
        ));
        let h = DMatrix::<C64>::zeros(2, 3);
        assert!(hermitian_to_real_embedding(&h).is_err());
    }

    #[test]
    fn structure_counts() {
        let g = ArrayGeometry::ula(4).unwrap();
        let p = build_relaxation(&g, 2, &DeltaGrid::new(vec![PI]).unwrap()).unwrap();
        p.validate().unwrap();
        assert_eq!(p.num_vars, 6);
        assert_eq!(p.equalities.len(), 1);
        assert_eq!(p.bounds.iter().map(|b| b.active_count()).sum::<usize>(), 8);
        assert_eq!(p.psd_blocks.len(), 2);
        assert_eq!(p.psd_blocks[0].dim, 2);
        assert_eq!(p.psd_blocks[1].dim, 6);
    }

    #[test]
    fn build_preconditions() {
        let g = ArrayGeometry::ula(4).unwrap();
        let grid = DeltaGrid::new(vec![1.0]).unwrap();
        assert!(matches!(
            build_relaxation(&g, 1, &grid),
            Err(Error::InvalidCardinality { .. })
        ));
        assert!(matches!(
            build_relaxation(&g, 5, &grid),
            Err(Error::InvalidCardinality { .. })
        ));
        assert!(DeltaGrid::new(vec![]).is_err());
    }

    #[test]
    fn blocks_match_components_at_binary_points() {
        let g = ArrayGeometry::new(vec![0.0, 1.0, 2.5, 4.0, 4.5]).unwrap();
        let grid = DeltaGrid::new(vec![0.3, 1.7]).unwrap();
        let p = build_relaxation(&g, 3, &grid).unwrap();
        let w = [1.0, 0.0, 1.0, 0.0, 1.0];
        let x = relaxation_point(&w, 0.7, 2.0);
        for (k, &dw) in grid.points().iter().enumerate() {
            let comps = crate::array::crb_components(&g, &w, dw).unwrap();
            let mut h = DMatrix::from_element(3, 3, c(0.0, 0.0));
            h[(0, 0)] = c(2.0, 0.0);
            for i in 0..2 {
                h[(i + 1, 0)] = comps.zbar[i];
                h[(0, i + 1)] = comps.zbar[i].conj();
            }
            let zm = comps.z_matrix();
            for r in 0..2 {
                for col in 0..2 {
                    h[(r + 1, col + 1)] = zm[r][col];
                }
            }
            let want = hermitian_to_real_embedding(&h).unwrap();
            let got = p.psd_blocks[k + 1].evaluate(&x);
            assert!((got - want).amax() < 1e-12);
        }
        let b0 = p.psd_blocks[0].evaluate(&x);
        assert_eq!(
            b0,
            DMatrix::from_row_slice(2, 2, &[0.0 + 6.25 + 20.25 - 2.0, 1.0, 1.0, 0.7])
        );
    }

    #[test]
    fn binary_points_are_feasible_and_halved_g_is_not() {
        let g = ArrayGeometry::ula(7).unwrap();
        let grid = DeltaGrid::default_for(&g, 12).unwrap();
        let prob = build_relaxation(&g, 4, &grid).unwrap();
        let w = [1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0];
        let mut gmax = f64::NEG_INFINITY;
        for &dw in grid.points() {
            let comps = crate::array::crb_components(&g, &w, dw).unwrap();
            gmax = gmax.max(schur_term(&comps).unwrap().unwrap());
        }
        let zbarbar = 1.0 + 16.0 + 36.0;
        let cval = 1.0 / (zbarbar - gmax);
        let wc = worst_case_crb(&g, &w, &grid, &CrbParams::default()).unwrap();
        assert!((cval - wc.value.value()).abs() < 1e-12 * cval);

        let report =
            verify_solution_feasibility(&prob, &relaxation_point(&w, cval, gmax), 1e-9).unwrap();
        assert!(report.feasible, "{report:?}");

        let report =
            verify_solution_feasibility(&prob, &relaxation_point(&w, cval, gmax / 2.0), 1e-9)
                .unwrap();
        assert!(!report.feasible);
        assert!(report.block_min_eigenvalues[1..].iter().any(|&e| e < -1e-9));

        let report =
            verify_solution_feasibility(&prob, &relaxation_point(&[1.0; 7], cval, gmax), 1e-9)
                .unwrap();
        assert!((report.equality_residuals[0] - 3.0).abs() < 1e-12);
        assert!(!report.feasible);
    }

    #[test]
    fn forced_full_selection() {
        let g = ArrayGeometry::ula(4).unwrap();
        let prob = build_relaxation(&g, 4, &DeltaGrid::new(vec![PI]).unwrap()).unwrap();
        let res = solve_relaxation(&prob, &SolverConfig::default()).unwrap();
        assert!(res.is_optimal(), "{res:?}");
        assert!((res.c_star - 0.25).abs() < 1e-5, "{}", res.c_star);
    }

    #[test]
    fn corrupted_cardinality_is_infeasible() {
        let g = ArrayGeometry::ula(4).unwrap();
        let mut prob = build_relaxation(&g, 2, &DeltaGrid::new(vec![1.0, PI]).unwrap()).unwrap();
        prob.equalities[0].rhs = 5.0;
        let res = solve_relaxation(&prob, &SolverConfig::default()).unwrap();
        assert_eq!(res.status, RelaxationStatus::Infeasible);
        assert!(res.relaxed.is_none());
    }
}
