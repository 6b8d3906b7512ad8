//! Randomized rounding of a relaxed selection to exactly `M` sensors.
//!
//! Each trial draws every sensor independently with probability `p_n` from
//! its own ChaCha stream keyed by `(seed, trial)`, then repairs the draw to
//! the target cardinality. Trials are evaluated in parallel and reduced by
//! `(worst case, trial index)`, so the outcome does not depend on scheduling.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crb::{worst_case_crb, CrbParams, ExtendedReal, WorstCase};
use crate::{ArrayGeometry, DeltaGrid, Error, RelaxedSelection, Result, Selection};

pub const DEFAULT_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundingConfig {
    pub trials: usize,
    pub seed: u64,
    /// Keep every trial's worst case in the result.
    pub record_trials: bool,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self {
            trials: DEFAULT_TRIALS,
            seed: 0,
            record_trials: false,
        }
    }
}

impl RoundingConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            record_trials: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundedResult {
    pub selection: Selection,
    pub worst_case: ExtendedReal,
    pub argmax_dw: f64,
    pub winning_trial: usize,
    pub per_trial_values: Option<Vec<ExtendedReal>>,
}

/// Bernoulli draw for one trial, before repair.
pub fn draw(relaxed: &RelaxedSelection, seed: u64, trial: usize) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    relaxed
        .values()
        .iter()
        .map(|&p| rng.random::<f64>() < p)
        .collect()
}

/// Forces `flags` to exactly `m` ones. Surplus sensors are dropped in
/// increasing weight order, missing ones added in decreasing weight order;
/// ties go to the lower index in both cases.
pub fn repair(mut flags: Vec<bool>, weights: &[f64], m: usize) -> Selection {
    let count = flags.iter().filter(|&&f| f).count();
    match count.cmp(&m) {
        Ordering::Equal => {}
        Ordering::Greater => {
            let mut on: Vec<usize> = (0..flags.len()).filter(|&i| flags[i]).collect();
            on.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
            for &i in &on[..count - m] {
                flags[i] = false;
            }
        }
        Ordering::Less => {
            let mut off: Vec<usize> = (0..flags.len()).filter(|&i| !flags[i]).collect();
            off.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
            for &i in &off[..m - count] {
                flags[i] = true;
            }
        }
    }
    Selection::from_flags(flags)
}

/// The repaired selection of a single trial.
pub fn trial_selection(relaxed: &RelaxedSelection, seed: u64, trial: usize) -> Selection {
    repair(
        draw(relaxed, seed, trial),
        relaxed.values(),
        relaxed.target_m(),
    )
}

pub fn randomized_round(
    relaxed: &RelaxedSelection,
    geometry: &ArrayGeometry,
    grid: &DeltaGrid,
    params: &CrbParams,
    config: &RoundingConfig,
) -> Result<RoundedResult> {
    if config.trials == 0 {
        return Err(Error::Config(
            "at least one rounding trial is required".into(),
        ));
    }
    if relaxed.len() != geometry.len() {
        return Err(Error::Shape {
            expected: geometry.len(),
            actual: relaxed.len(),
        });
    }
    let outcomes: Vec<(Selection, WorstCase)> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let sel = trial_selection(relaxed, config.seed, t);
            let wc = worst_case_crb(geometry, &sel.weights(), grid, params)?;
            Ok((sel, wc))
        })
        .collect::<Result<_>>()?;
    // collect() keeps trial order, so the first minimum is the lowest index.
    let mut best = 0;
    for (t, (_, wc)) in outcomes.iter().enumerate().skip(1) {
        if wc.value < outcomes[best].1.value {
            best = t;
        }
    }
    let per_trial_values = config
        .record_trials
        .then(|| outcomes.iter().map(|(_, wc)| wc.value).collect());
    let (selection, wc) = outcomes.into_iter().nth(best).expect("trials >= 1");
    Ok(RoundedResult {
        selection,
        worst_case: wc.value,
        argmax_dw: wc.argmax_dw,
        winning_trial: best,
        per_trial_values,
    })
}

/// The `M` largest weights, ties to the lower index.
pub fn round_by_top_m(relaxed: &RelaxedSelection) -> Selection {
    let v = relaxed.values();
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let mut flags = vec![false; v.len()];
    for &i in &order[..relaxed.target_m()] {
        flags[i] = true;
    }
    Selection::from_flags(flags)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingWinner {
    Randomized,
    TopM,
}

/// Better of randomized rounding and the top-`M` fallback.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgedRounding {
    pub selection: Selection,
    pub worst_case: WorstCase,
    pub winner: RoundingWinner,
    pub randomized: RoundedResult,
    pub top_m: (Selection, WorstCase),
}

/// Runs both roundings and keeps the smaller worst case. On a tie the
/// randomized result is kept.
pub fn round_hedged(
    relaxed: &RelaxedSelection,
    geometry: &ArrayGeometry,
    grid: &DeltaGrid,
    params: &CrbParams,
    config: &RoundingConfig,
) -> Result<HedgedRounding> {
    let randomized = randomized_round(relaxed, geometry, grid, params, config)?;
    let top = round_by_top_m(relaxed);
    let top_wc = worst_case_crb(geometry, &top.weights(), grid, params)?;
    let (selection, worst_case, winner) = if top_wc.value < randomized.worst_case {
        (top.clone(), top_wc, RoundingWinner::TopM)
    } else {
        (
            randomized.selection.clone(),
            WorstCase {
                value: randomized.worst_case,
                argmax_dw: randomized.argmax_dw,
            },
            RoundingWinner::Randomized,
        )
    };
    Ok(HedgedRounding {
        selection,
        worst_case,
        winner,
        randomized,
        top_m: (top, top_wc),
    })
}
