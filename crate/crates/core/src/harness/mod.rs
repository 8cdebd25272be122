//! Experiment orchestration: config, seed sweeps, comparison reports, and
//! plot emission.

pub mod compare;
pub mod config;
pub mod csvio;
pub mod gradsuite;
pub mod plot;
pub mod runner;

pub use compare::{compare, load_strategy_dir, ComparisonReport, StrategyResults};
pub use gradsuite::{run_grad_suite, GradCheckCase};
pub use config::{EnvKind, ExperimentConfig, GateMode};
pub use csvio::{parse_metrics_csv, parse_query_log_csv, write_metrics_csv, write_query_log_csv};
pub use plot::{emit_plot, Trace};
pub use runner::{run_experiment, RunPaths};
