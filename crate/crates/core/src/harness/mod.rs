//! End-to-end pipelines, run configuration, file schemas and sweeps.

mod config;
pub mod figures;
mod parse;
mod pipeline;
mod record;
pub mod sweep;

pub use config::{GridSpec, RunConfig, DEFAULT_GRID_POINTS};
pub use parse::{parse_angle, parse_count_list, parse_real_list};
pub use pipeline::{
    evaluate, evaluate_record, run_method, select, write_profile_csv, Evaluation, SelectOutcome,
};
pub use record::{Method, RelaxationSummary, SelectionRecord, TOOL_VERSION};
