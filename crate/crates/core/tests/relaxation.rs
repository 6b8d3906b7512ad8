mod common;

use crbsel::conic::{ConicProblem, SolverConfig};
use crbsel::crb::{schur_term, two_target_crb};
use crbsel::relaxation::{
    build_relaxation, hermitian_to_real_embedding, relaxation_point, solve_relaxation,
    verify_solution_feasibility, RelaxationResult,
};
use crbsel::{ArrayGeometry, CrbParams, DeltaGrid, Selection};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{subsets, C};

fn solve(g: &ArrayGeometry, m: usize, grid: &DeltaGrid) -> RelaxationResult {
    let problem = build_relaxation(g, m, grid).unwrap();
    let r = solve_relaxation(&problem, &SolverConfig::default()).unwrap();
    assert!(r.is_optimal(), "n={} m={m}: {}", g.len(), r.status);
    r
}

/// Best worst case over all `m`-subsets, by plain enumeration.
fn scan(g: &ArrayGeometry, m: usize, grid: &DeltaGrid) -> f64 {
    let p = CrbParams::default();
    subsets(g.len(), m)
        .into_iter()
        .map(|flags| {
            let w = Selection::from_flags(flags).weights();
            grid.points()
                .iter()
                .map(|&dw| two_target_crb(g, &w, dw, &p).unwrap().value())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lower_bounds_the_binary_optimum((n, m) in (4usize..=9).prop_flat_map(|n| (Just(n), 3..=n)), points in 4usize..24) {
        let g = ArrayGeometry::ula(n).unwrap();
        let grid = DeltaGrid::default_for(&g, points).unwrap();
        let r = solve(&g, m, &grid);
        let best = scan(&g, m, &grid);
        prop_assert!(r.c_star <= best * (1.0 + 1e-6), "c* {} above optimum {best}", r.c_star);
    }
}

#[test]
fn finer_grid_never_lowers_the_optimum() {
    for (n, m) in [(8, 3), (10, 4), (12, 5)] {
        let g = ArrayGeometry::ula(n).unwrap();
        let coarse = DeltaGrid::default_for(&g, 8).unwrap();
        let fine = DeltaGrid::default_for(&g, 15).unwrap();
        let a = solve(&g, m, &coarse).c_star;
        let b = solve(&g, m, &fine).c_star;
        assert!(a <= b * (1.0 + 1e-6), "n={n}: {a} > {b}");
    }
}

#[test]
fn solution_satisfies_every_block() {
    let g = ArrayGeometry::ula(16).unwrap();
    let grid = DeltaGrid::default_for(&g, 32).unwrap();
    let problem = build_relaxation(&g, 5, &grid).unwrap();
    let r = solve_relaxation(&problem, &SolverConfig::default()).unwrap();
    let p = r.relaxed.as_ref().unwrap();
    assert!((p.values().iter().sum::<f64>() - 5.0).abs() < 1e-6);
    let x = relaxation_point(p.values(), r.c_star, r.g_star);
    let report = verify_solution_feasibility(&problem, &x, 1e-6).unwrap();
    assert!(report.feasible, "{report:?}");

    // g* dominates the Schur term everywhere, and c* covers the relaxed bound
    let params = CrbParams::default();
    for &dw in grid.points() {
        let c = crbsel::array::crb_components(&g, p.values(), dw).unwrap();
        let q = schur_term(&c).unwrap().unwrap();
        assert!(
            r.g_star >= q - 1e-6 * c.zbarbar,
            "dw={dw}: g* {} < {q}",
            r.g_star
        );
        let bound = two_target_crb(&g, p.values(), dw, &params).unwrap().value();
        assert!(
            bound <= r.c_star * (1.0 + 1e-5),
            "dw={dw}: {bound} > {}",
            r.c_star
        );
    }
}

#[test]
fn problem_survives_json() {
    let g = ArrayGeometry::ula(6).unwrap();
    let grid = DeltaGrid::default_for(&g, 4).unwrap();
    let problem = build_relaxation(&g, 3, &grid).unwrap();
    let back = ConicProblem::from_json(&problem.to_json().unwrap()).unwrap();
    assert_eq!(back, problem);
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C> {
    let b = DMatrix::<C>::from_fn(n, n, |_, _| {
        C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&b + b.adjoint()) * C::new(0.5, 0.0)
}

#[test]
fn embedding_preserves_the_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..6 {
        let b = random_hermitian(&mut rng, n);
        let psd = &b * b.adjoint();
        let e = hermitian_to_real_embedding(&psd).unwrap();
        let min = e.symmetric_eigenvalues().min();
        assert!(min >= -1e-10, "n={n}: {min}");

        // shift so the smallest eigenvalue is -1
        let shift = b.clone().symmetric_eigenvalues().min() + 1.0;
        let indefinite = &b - DMatrix::<C>::identity(n, n) * C::new(shift, 0.0);
        let mut want: Vec<f64> = indefinite
            .symmetric_eigenvalues()
            .iter()
            .flat_map(|&v| [v, v])
            .collect();
        let mut got: Vec<f64> = hermitian_to_real_embedding(&indefinite)
            .unwrap()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!((got[0] + 1.0).abs() < 1e-10);
    }
}

#[test]
fn embedding_rejects_non_hermitian() {
    let mut m = DMatrix::<C>::identity(2, 2);
    m[(0, 1)] = C::new(0.0, 1.0);
    assert!(hermitian_to_real_embedding(&m).is_err());
}
