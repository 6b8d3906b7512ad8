use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use crbsel::harness::figures::{figure_data, FigureConfig, FigureId};
use crbsel::harness::sweep::{run_sweep, write_sweep_csv, MRule, SweepAxis, SweepConfig};
use crbsel::harness::{
    evaluate, parse_angle, parse_count_list, parse_real_list, run_method, select,
    write_profile_csv, GridSpec, Method, RunConfig, SelectionRecord, DEFAULT_GRID_POINTS,
};
use crbsel::{CrbParams, Error};

const EXIT_INVALID: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

/// Sparse linear-array sensor selection by worst-case two-target CRB.
#[derive(Parser)]
#[command(name = "crbsel", version)]
struct Cli {
    /// Print interior-point iterations to stderr.
    #[arg(long, global = true, env = "CRBSEL_SOLVER_VERBOSE", value_parser = parse_flag, default_value = "0")]
    solver_verbose: bool,

    #[command(subcommand)]
    command: Command,
}

fn parse_flag(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "" | "0" | "false" | "no" | "off" => Ok(false),
        "1" | "true" | "yes" | "on" => Ok(true),
        other => Err(format!("expected a boolean, got {other:?}")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Select M of N sensors with the convex relaxation and randomized rounding.
    Select(SelectArgs),
    /// Evaluate a stored selection on a grid.
    Evaluate(EvaluateArgs),
    /// Produce a reference selection.
    Baseline(BaselineArgs),
    /// Run a method over a range of array or selection sizes.
    Sweep(SweepArgs),
    /// Write the data bundle behind one figure.
    FigureData(FigureArgs),
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Number of equally spaced grid points.
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Smallest Δω, e.g. `0.05`, `10deg`, `pi/18`. Defaults to 1.772/N.
    #[arg(long, value_parser = angle)]
    grid_min: Option<f64>,
    /// Largest Δω.
    #[arg(long, value_parser = angle, default_value = "180deg")]
    grid_max: f64,
    /// Explicit comma-separated Δω values; overrides the other grid flags.
    #[arg(long, value_delimiter = ',', value_parser = angle, conflicts_with_all = ["grid_min", "grid_points"])]
    grid_values: Option<Vec<f64>>,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        match &self.grid_values {
            Some(values) => GridSpec::Explicit {
                values: values.clone(),
            },
            None => GridSpec::linspace(self.grid_points, self.grid_min, self.grid_max),
        }
    }
}

fn angle(s: &str) -> Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

/// One `--positions` value; a bare `Vec` would make clap expect repeated flags.
#[derive(Clone)]
struct PositionList(Vec<f64>);

fn positions(s: &str) -> Result<PositionList, String> {
    parse_real_list(s).map(PositionList).map_err(|e| e.to_string())
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Number of candidate sensors; implied by --positions if omitted.
    #[arg(long)]
    n: Option<usize>,
    /// Number of sensors to select.
    #[arg(long)]
    m: usize,
    /// Candidate positions, e.g. "0,1,2.5,4"; defaults to a ULA.
    #[arg(long, value_parser = positions)]
    positions: Option<PositionList>,
    #[command(flatten)]
    grid: GridArgs,
    /// Noise scale σ²/(2T).
    #[arg(long, default_value_t = 1.0)]
    factor: f64,
    /// Randomized rounding trials.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl RunArgs {
    fn config(&self, verbose: bool) -> Result<RunConfig, Error> {
        let n = match (self.n, &self.positions) {
            (Some(n), _) => n,
            (None, Some(p)) => p.0.len(),
            (None, None) => {
                return Err(Error::Config(
                    "either --n or --positions is required".into(),
                ))
            }
        };
        let mut cfg = RunConfig::new(n, self.m);
        cfg.positions = self.positions.clone().map(|p| p.0);
        cfg.grid = self.grid.spec();
        cfg.factor = self.factor;
        cfg.trials = self.trials;
        cfg.seed = self.seed;
        cfg.solver.verbose = verbose;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Where to write the selection record (JSON); stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Selection record written by `select` or `baseline`.
    #[arg(long)]
    selection: PathBuf,
    /// Evaluate on this grid instead of the record's.
    #[arg(long)]
    override_grid: bool,
    #[command(flatten)]
    grid: GridArgs,
    /// Override the record's factor.
    #[arg(long)]
    factor: Option<f64>,
    /// Where to write the per-Δω CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineMethod {
    Edge,
    Random,
    Exhaustive,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long, value_enum)]
    method: BaselineMethod,
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Vary {
    N,
    M,
}

#[derive(Args)]
struct SweepArgs {
    /// Which size to vary.
    #[arg(long, value_enum)]
    vary: Vary,
    /// Comma-separated sizes, e.g. "8,16,32,64,128".
    #[arg(long)]
    values: String,
    /// Array size when varying M.
    #[arg(long, default_value_t = 128)]
    n: usize,
    /// Selection size when varying N: `quarter` (M = N/4) or a number.
    #[arg(long, default_value = "quarter")]
    m_rule: String,
    /// Comma-separated methods.
    #[arg(long = "method", default_value = "proposed,edge,random")]
    methods: String,
    /// Random baselines per point.
    #[arg(long, default_value_t = 100)]
    random_seeds: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 1.0)]
    factor: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    /// Figure id: 1, 2, 3a or 3b.
    #[arg(long)]
    figure: String,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    #[arg(long, default_value_t = 1.0)]
    factor: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    random_seeds: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_record(record: &SelectionRecord, out: Option<&Path>) -> Result<(), Error> {
    let mut w = open_out(out)?;
    w.write_all(record.to_json()?.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn report(record: &SelectionRecord) {
    let bits: String = record
        .pattern
        .chars()
        .map(|c| if c == '#' { '1' } else { '0' })
        .collect();
    println!("{bits}");
    eprintln!(
        "{} N={} M={} worst case {} at Δω = {}",
        record.method, record.n, record.m, record.worst_case, record.argmax_dw
    );
}

fn run(cli: Cli) -> Result<(), Error> {
    let verbose = cli.solver_verbose;
    match cli.command {
        Command::Select(a) => {
            let cfg = a.run.config(verbose)?;
            let out = select(&cfg)?;
            write_record(&out.record, a.out.as_deref())?;
            if a.out.is_some() {
                report(&out.record);
            }
        }
        Command::Baseline(a) => {
            let cfg = a.run.config(verbose)?;
            let method = match a.method {
                BaselineMethod::Edge => Method::Edge,
                BaselineMethod::Random => Method::Random,
                BaselineMethod::Exhaustive => Method::Exhaustive,
            };
            let record = run_method(&cfg, method)?;
            write_record(&record, a.out.as_deref())?;
            if a.out.is_some() {
                report(&record);
            }
        }
        Command::Evaluate(a) => {
            let text = std::fs::read_to_string(&a.selection).map_err(|e| {
                Error::Config(format!("cannot read {}: {e}", a.selection.display()))
            })?;
            let record = SelectionRecord::from_json(&text)?;
            let grid = if a.override_grid {
                a.grid.spec()
            } else {
                record.grid.clone()
            };
            let factor = a.factor.unwrap_or(record.factor);
            let eval = evaluate(
                &record.geometry()?,
                &record.selection()?,
                &grid.build(record.n)?,
                &CrbParams::with_factor(factor)?,
            )?;
            write_profile_csv(open_out(a.out.as_deref())?, &eval.profile)?;
            eprintln!(
                "worst case {} at Δω = {}",
                eval.worst_case.value, eval.worst_case.argmax_dw
            );
        }
        Command::Sweep(a) => {
            let values = parse_count_list(&a.values)?;
            let mut base = RunConfig::new(a.n, 2);
            base.grid = a.grid.spec();
            base.factor = a.factor;
            base.trials = a.trials;
            base.seed = a.seed;
            base.solver.verbose = verbose;
            let axis = match a.vary {
                Vary::N => SweepAxis::N,
                Vary::M => SweepAxis::M,
            };
            let mut cfg = SweepConfig::new(axis, values, base);
            cfg.fixed_n = a.n;
            cfg.m_rule = match a.m_rule.as_str() {
                "quarter" => MRule::Quarter,
                other => MRule::Fixed(
                    other
                        .parse()
                        .map_err(|_| Error::Config(format!("invalid --m-rule {other:?}")))?,
                ),
            };
            cfg.methods = a
                .methods
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<_, _>>()?;
            cfg.random_seeds = a.random_seeds;
            let rows = run_sweep(&cfg)?;
            write_sweep_csv(open_out(a.out.as_deref())?, &rows)?;
        }
        Command::FigureData(a) => {
            let figure: FigureId = a.figure.parse()?;
            let mut base = RunConfig::new(2, 2);
            base.grid = GridSpec::linspace(a.grid_points, None, std::f64::consts::PI);
            base.factor = a.factor;
            base.trials = a.trials;
            base.seed = a.seed;
            base.solver.verbose = verbose;
            if base.params().is_err() || a.trials == 0 || a.grid_points < 2 {
                return Err(Error::Config(
                    "factor must be positive, trials and grid points at least 1 and 2".into(),
                ));
            }
            let mut cfg = FigureConfig::new(base);
            cfg.random_seeds = a.random_seeds;
            let manifest = figure_data(figure, &cfg, &a.out)?;
            for f in &manifest.files {
                println!("{}", a.out.join(f).display());
            }
        }
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Solver(_) | Error::Numerical(_) => EXIT_SOLVER,
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        _ => EXIT_INVALID,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Solver("x".into())), 3);
        assert_eq!(exit_code(&Error::Numerical("x".into())), 3);
        assert_eq!(exit_code(&Error::Infeasible("x".into())), 4);
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
    }

    #[test]
    fn flags() {
        assert_eq!(parse_flag("Yes"), Ok(true));
        assert_eq!(parse_flag(""), Ok(false));
        assert!(parse_flag("maybe").is_err());
    }
}
