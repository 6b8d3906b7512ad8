use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::pipeline::run_method;
use super::record::Method;
use crate::{Error, ExtendedReal, Result};

pub const DEFAULT_RANDOM_SEEDS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    N,
    M,
}

/// Selection size for each array size when sweeping over `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MRule {
    /// `M = N / 4`
    Quarter,
    Fixed(usize),
}

impl MRule {
    pub fn apply(self, n: usize) -> usize {
        match self {
            Self::Quarter => n / 4,
            Self::Fixed(m) => m,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<usize>,
    /// Array size used when sweeping over `M`.
    pub fixed_n: usize,
    pub m_rule: MRule,
    pub methods: Vec<Method>,
    /// Number of random baselines per point, seeded `seed, seed + 1, ...`.
    pub random_seeds: usize,
    /// Grid, factor, trials, seed and solver settings; `n` and `m` are
    /// overwritten per point.
    pub base: RunConfig,
}

impl SweepConfig {
    pub fn new(axis: SweepAxis, values: Vec<usize>, base: RunConfig) -> Self {
        Self {
            axis,
            values,
            fixed_n: 128,
            m_rule: MRule::Quarter,
            methods: vec![Method::Proposed, Method::Edge, Method::Random],
            random_seeds: DEFAULT_RANDOM_SEEDS,
            base,
        }
    }

    /// `(N, M)` for every sweep value.
    pub fn points(&self) -> Vec<(usize, usize)> {
        self.values
            .iter()
            .map(|&v| match self.axis {
                SweepAxis::N => (v, self.m_rule.apply(v)),
                SweepAxis::M => (self.fixed_n, v),
            })
            .collect()
    }

    fn jobs(&self) -> Vec<(RunConfig, Method)> {
        let mut jobs = Vec::new();
        for (n, m) in self.points() {
            for &method in &self.methods {
                let seeds: Vec<u64> = match method {
                    Method::Random => (0..self.random_seeds as u64)
                        .map(|i| self.base.seed.wrapping_add(i))
                        .collect(),
                    _ => vec![self.base.seed],
                };
                for seed in seeds {
                    let mut c = self.base.clone();
                    c.n = n;
                    c.m = m;
                    c.seed = seed;
                    jobs.push((c, method));
                }
            }
        }
        jobs
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Config("sweep has no values".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("sweep has no methods".into()));
        }
        if self.methods.contains(&Method::Random) && self.random_seeds == 0 {
            return Err(Error::Config(
                "random baseline needs at least one seed".into(),
            ));
        }
        for (n, m) in self.points() {
            let mut c = self.base.clone();
            c.n = n;
            c.m = m;
            c.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub method: Method,
    pub seed: Option<u64>,
    pub worst_case_crb: ExtendedReal,
    pub argmax_dw: f64,
}

impl SweepRow {
    fn key(&self) -> (usize, usize, &'static str, Option<u64>) {
        (self.n, self.m, self.method.as_str(), self.seed)
    }
}

/// Runs every `(point, method, seed)` combination; rows come back sorted by
/// `(N, M, method, seed)`.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows: Vec<SweepRow> = cfg
        .jobs()
        .par_iter()
        .map(|(job, method)| {
            let record = run_method(job, *method)?;
            Ok(SweepRow {
                n: job.n,
                m: job.m,
                method: *method,
                seed: record.seed,
                worst_case_crb: record.worst_case,
                argmax_dw: record.argmax_dw,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.key().cmp(&b.key()));
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["N", "M", "method", "seed", "worst_case_crb", "argmax_dw"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.m.to_string(),
            r.method.to_string(),
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            r.worst_case_crb.to_string(),
            r.argmax_dw.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Mean, minimum and maximum worst case of one method at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub x: usize,
    pub method: Method,
    pub mean: ExtendedReal,
    pub min: ExtendedReal,
    pub max: ExtendedReal,
    pub count: usize,
}

pub fn summarize(rows: &[SweepRow], axis: SweepAxis) -> Vec<CurvePoint> {
    let mut out: Vec<CurvePoint> = Vec::new();
    for r in rows {
        let x = match axis {
            SweepAxis::N => r.n,
            SweepAxis::M => r.m,
        };
        match out.iter_mut().find(|p| p.x == x && p.method == r.method) {
            Some(p) => {
                p.min = p.min.min(r.worst_case_crb);
                p.max = p.max.max(r.worst_case_crb);
                p.mean = match (p.mean, r.worst_case_crb) {
                    (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => {
                        ExtendedReal::Finite(a + b)
                    }
                    _ => ExtendedReal::Infinite,
                };
                p.count += 1;
            }
            None => out.push(CurvePoint {
                x,
                method: r.method,
                mean: r.worst_case_crb,
                min: r.worst_case_crb,
                max: r.worst_case_crb,
                count: 1,
            }),
        }
    }
    for p in &mut out {
        // `mean` holds the running sum until here
        p.mean = p.mean.scaled(1.0 / p.count as f64);
    }
    out.sort_by(|a, b| (a.x, a.method.as_str()).cmp(&(b.x, b.method.as_str())));
    out
}

pub fn write_curves_csv<W: Write>(out: W, axis: SweepAxis, points: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let x = match axis {
        SweepAxis::N => "N",
        SweepAxis::M => "M",
    };
    w.write_record([x, "method", "mean", "min", "max", "count"])?;
    for p in points {
        w.write_record([
            p.x.to_string(),
            p.method.to_string(),
            p.mean.to_string(),
            p.min.to_string(),
            p.max.to_string(),
            p.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
