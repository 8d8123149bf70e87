//! Multi-seed experiments, CSV persistence, across-seed aggregation and the
//! command-line front end.

mod aggregate;
pub mod cli;
mod config;
mod experiment;
mod plot;
pub mod selftest;
mod sweep;

pub use aggregate::{
    aggregate, aggregate_series, load_column, mean, rolling_mean, sample_variance, t_critical,
    variance_report, AggregateCurve, Column, CurvePoint, VarianceReport, DEFAULT_CONFIDENCE,
    DEFAULT_WINDOW,
};
pub use config::{ExperimentConfig, Settings, DEFAULT_SEEDS};
pub use experiment::{
    episode_csv_header, read_episode_csv, read_episode_csv_file, run_experiment, seed_csv_path,
    write_episode_csv, AgentRecord, ExperimentRecord, ExperimentReport, SeedFailure,
    EXPERIMENT_FILE, FAILURES_FILE,
};
pub use plot::{
    commit_hash, curve_rows, emit_plot_data, final_ordering, read_curves_csv, read_manifest,
    write_curves_csv, CurveRow, CurveSource, FinalStanding, LabelledCurve, Manifest, PlotFormat,
    CURVES_CSV, CURVES_JSON, MANIFEST_FILE,
};
pub use sweep::{run_sweep, sweep_plan, Matchup, ScenarioSweep, SweepConfig, SWEEP_BETAS};
