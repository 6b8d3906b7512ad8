use std::io::Write;

use super::config::RunConfig;
use super::record::{Method, RelaxationSummary, SelectionRecord, TOOL_VERSION};
use crate::baselines::{edge_selection, exhaustive_best, random_selection, DEFAULT_EXHAUSTIVE_CAP};
use crate::crb::{crb_profile, worst_case_crb, worst_of_profile, WorstCase};
use crate::relaxation::{build_relaxation, solve_relaxation, RelaxationResult, RelaxationStatus};
use crate::rounding::{round_hedged, HedgedRounding};
use crate::{ArrayGeometry, CrbParams, DeltaGrid, Error, ExtendedReal, Result, Selection};

#[derive(Debug, Clone)]
pub struct SelectOutcome {
    pub record: SelectionRecord,
    pub relaxation: RelaxationResult,
    pub rounding: HedgedRounding,
}

fn make_record(
    cfg: &RunConfig,
    geometry: &ArrayGeometry,
    method: Method,
    selection: &Selection,
    wc: WorstCase,
    seed: Option<u64>,
) -> SelectionRecord {
    SelectionRecord {
        tool_version: TOOL_VERSION.into(),
        method,
        n: geometry.len(),
        m: selection.count(),
        positions: geometry.positions().to_vec(),
        selected: selection.indices(),
        pattern: selection.pattern(),
        worst_case: wc.value,
        argmax_dw: wc.argmax_dw,
        factor: cfg.factor,
        grid: cfg.grid.resolved(cfg.n),
        seed,
        relaxation: None,
    }
}

/// Relaxation, randomized rounding with the top-`M` hedge, and evaluation.
pub fn select(cfg: &RunConfig) -> Result<SelectOutcome> {
    cfg.validate()?;
    let geometry = cfg.geometry()?;
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let problem = build_relaxation(&geometry, cfg.m, &grid)?;
    let relaxation = solve_relaxation(&problem, &cfg.solver)?;
    let relaxed = match (relaxation.status, &relaxation.relaxed) {
        (RelaxationStatus::Optimal, Some(r)) => r.clone(),
        (RelaxationStatus::Infeasible, _) => {
            return Err(Error::Infeasible(format!(
                "relaxation for n = {}, m = {} is infeasible",
                cfg.n, cfg.m
            )))
        }
        (status, _) => {
            return Err(Error::Solver(format!(
                "relaxation ended with status {status} after {} iterations \
                 (primal residual {:.2e}, dual residual {:.2e}, gap {:.2e})",
                relaxation.iterations,
                relaxation.primal_residual,
                relaxation.dual_residual,
                relaxation.gap
            )))
        }
    };
    let rounding = round_hedged(&relaxed, &geometry, &grid, &params, &cfg.rounding())?;
    let mut record = make_record(
        cfg,
        &geometry,
        Method::Proposed,
        &rounding.selection,
        rounding.worst_case,
        Some(cfg.seed),
    );
    record.relaxation = Some(RelaxationSummary {
        c_star: relaxation.c_star,
        g_star: relaxation.g_star,
        iterations: relaxation.iterations,
        trials: cfg.trials,
        winner: rounding.winner,
        winning_trial: rounding.randomized.winning_trial,
    });
    Ok(SelectOutcome {
        record,
        relaxation,
        rounding,
    })
}

/// Runs any method and returns its record. `random` uses `cfg.seed`.
pub fn run_method(cfg: &RunConfig, method: Method) -> Result<SelectionRecord> {
    if method == Method::Proposed {
        return Ok(select(cfg)?.record);
    }
    let geometry = cfg.geometry()?;
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let (selection, seed) = match method {
        Method::Edge => (edge_selection(cfg.n, cfg.m)?, None),
        Method::Random => (random_selection(cfg.n, cfg.m, cfg.seed)?, Some(cfg.seed)),
        Method::Exhaustive => {
            let (sel, _) =
                exhaustive_best(&geometry, cfg.m, &grid, &params, DEFAULT_EXHAUSTIVE_CAP)?;
            (sel, None)
        }
        Method::Proposed => unreachable!(),
    };
    let wc = worst_case_crb(&geometry, &selection.weights(), &grid, &params)?;
    Ok(make_record(cfg, &geometry, method, &selection, wc, seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub worst_case: WorstCase,
    /// `(Δω, bound)` in grid order.
    pub profile: Vec<(f64, ExtendedReal)>,
}

pub fn evaluate(
    geometry: &ArrayGeometry,
    selection: &Selection,
    grid: &DeltaGrid,
    params: &CrbParams,
) -> Result<Evaluation> {
    let weights = selection.weights();
    let values = crb_profile(geometry, &weights, grid, params)?;
    let worst_case = worst_of_profile(&values, grid);
    Ok(Evaluation {
        worst_case,
        profile: grid.points().iter().copied().zip(values).collect(),
    })
}

/// Re-evaluates a stored record on its own grid and factor.
pub fn evaluate_record(record: &SelectionRecord) -> Result<Evaluation> {
    record.validate()?;
    evaluate(
        &record.geometry()?,
        &record.selection()?,
        &record.grid.build(record.n)?,
        &CrbParams::with_factor(record.factor)?,
    )
}

/// Writes `delta_omega,crb` rows.
pub fn write_profile_csv<W: Write>(out: W, profile: &[(f64, ExtendedReal)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta_omega", "crb"])?;
    for (dw, v) in profile {
        w.write_record([dw.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
