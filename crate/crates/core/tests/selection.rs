mod common;

use std::f64::consts::PI;

use crbsel::baselines::{binomial, exhaustive_best, random_selection, DEFAULT_EXHAUSTIVE_CAP};
use crbsel::conic::SolverConfig;
use crbsel::crb::two_target_crb;
use crbsel::harness::sweep::{run_sweep, write_sweep_csv, SweepAxis, SweepConfig};
use crbsel::harness::{select, GridSpec, Method, RunConfig};
use crbsel::relaxation::{build_relaxation, solve_relaxation};
use crbsel::rounding::{randomized_round, RoundingConfig};
use crbsel::{ArrayGeometry, CrbParams, DeltaGrid, Error, ExtendedReal, Selection};

use common::subsets;

/// `(value, selection)` minimizing the worst case; the first subset in
/// lexicographic index order wins ties.
fn scan(g: &ArrayGeometry, m: usize, grid: &DeltaGrid) -> (ExtendedReal, Vec<usize>) {
    let p = CrbParams::default();
    let mut all: Vec<Vec<usize>> = subsets(g.len(), m)
        .into_iter()
        .map(|f| (0..g.len()).filter(|&i| f[i]).collect())
        .collect();
    all.sort();
    let mut best = (ExtendedReal::Infinite, all[0].clone());
    for idx in all {
        let w = Selection::from_indices(g.len(), &idx).unwrap().weights();
        let wc = grid
            .points()
            .iter()
            .map(|&dw| two_target_crb(g, &w, dw, &p).unwrap())
            .max()
            .unwrap();
        if wc < best.0 {
            best = (wc, idx);
        }
    }
    best
}

#[test]
fn exhaustive_matches_a_plain_scan() {
    let g = ArrayGeometry::ula(6).unwrap();
    let p = CrbParams::default();
    let grid = DeltaGrid::new(vec![PI / 2.0, PI]).unwrap();
    for m in 2..=6 {
        let (sel, wc) = exhaustive_best(&g, m, &grid, &p, DEFAULT_EXHAUSTIVE_CAP).unwrap();
        let (value, idx) = scan(&g, m, &grid);
        assert_eq!(wc.value, value, "m={m}");
        assert_eq!(sel.indices(), idx, "m={m}");
    }
    // two sensors cannot resolve two targets, so the first subset is kept
    let (sel, wc) = exhaustive_best(&g, 2, &grid, &p, DEFAULT_EXHAUSTIVE_CAP).unwrap();
    assert!(wc.value.is_infinite());
    assert_eq!(sel.indices(), vec![0, 1]);
}

#[test]
fn exhaustive_respects_the_cap() {
    let g = ArrayGeometry::ula(30).unwrap();
    let grid = DeltaGrid::default_for(&g, 4).unwrap();
    assert!(binomial(30, 10) > DEFAULT_EXHAUSTIVE_CAP);
    let err =
        exhaustive_best(&g, 10, &grid, &CrbParams::default(), DEFAULT_EXHAUSTIVE_CAP).unwrap_err();
    assert!(matches!(err, Error::CapExceeded { .. }), "{err}");
}

fn rounds_to_optimum(n: usize, m: usize) {
    let g = ArrayGeometry::ula(n).unwrap();
    let grid = DeltaGrid::default_for(&g, 16).unwrap();
    let p = CrbParams::default();
    let problem = build_relaxation(&g, m, &grid).unwrap();
    let relaxed = solve_relaxation(&problem, &SolverConfig::default())
        .unwrap()
        .relaxed
        .unwrap();
    let r = randomized_round(&relaxed, &g, &grid, &p, &RoundingConfig::new(1000, 7)).unwrap();
    let (_, best) = exhaustive_best(&g, m, &grid, &p, DEFAULT_EXHAUSTIVE_CAP).unwrap();
    assert_eq!(r.selection.count(), m);
    assert_eq!(r.worst_case, best.value, "n={n} m={m}");
}

#[test]
fn rounding_finds_small_optima() {
    rounds_to_optimum(6, 2);
    rounds_to_optimum(6, 3);
    rounds_to_optimum(8, 4);
}

#[test]
fn random_baseline_is_uniform() {
    // 6 subsets of 2 out of 4, 60000 draws
    let mut counts = std::collections::BTreeMap::new();
    for seed in 0..60_000 {
        *counts
            .entry(random_selection(4, 2, seed).unwrap().indices())
            .or_insert(0u32) += 1;
    }
    assert_eq!(counts.len(), 6);
    let expected = 10_000.0;
    let chi2: f64 = counts
        .values()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    // 0.1% critical value with 5 degrees of freedom
    assert!(chi2 < 20.52, "chi-square {chi2}");
}

#[test]
fn runs_are_reproducible() {
    let mut cfg = RunConfig::new(24, 6);
    cfg.seed = 42;
    cfg.grid = GridSpec::linspace(48, None, PI);
    let a = select(&cfg).unwrap().record.to_json().unwrap();
    let b = select(&cfg).unwrap().record.to_json().unwrap();
    assert_eq!(a, b);

    let mut sweep = SweepConfig::new(SweepAxis::N, vec![8, 16], cfg.clone());
    sweep.methods = vec![Method::Proposed, Method::Random, Method::Edge];
    sweep.random_seeds = 5;
    let csv = |s: &SweepConfig| {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &run_sweep(s).unwrap()).unwrap();
        buf
    };
    assert_eq!(csv(&sweep), csv(&sweep));
    assert_ne!(
        random_selection(24, 6, 42).unwrap(),
        random_selection(24, 6, 43).unwrap()
    );
}
