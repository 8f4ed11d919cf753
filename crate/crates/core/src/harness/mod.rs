//! Config-driven experiments: multi-seed runs, reports, CSV and SVG output.

mod config;
mod plot;
mod report;
mod runner;
mod synthetic;

pub use config::{
    build_policy, prepare_instance, ExperimentConfig, InstanceSpec, PolicySpec, PreparedInstance,
    LINTS_LAMBDA_PRESETS,
};
pub use plot::{emit_plot, render_svg, sig6, PlotStyle};
pub use report::{
    emit_report, format_sci, ranked, report_table, runs_csv, trajectory_csv, ReportFiles,
};
pub use runner::{
    checkpoint_grid, resolve_threads, run_experiment, run_experiment_with_threads, run_prepared,
    simulate, summarize, ExperimentResult, PolicySummary, RunRecord, THREADS_ENV,
};
pub use synthetic::{generate_synthetic_instance, SyntheticInstance};
