//! Monte Carlo sweeps of scaled MSE over a grid of `1/SNR` values, with
//! deterministic CSV and SVG output.

pub mod config;
pub mod plot;
pub mod report;
pub mod run;

pub use config::{GridConfig, SweepConfig, TuningMode};
pub use plot::{emit_plot, read_csv, render_svg, OverlaySpec, PlotOptions};
pub use report::{compare_theory, csv_string, format_sig17, write_csv, TheoryReport, CSV_HEADER};
pub use run::{
    plan_tunings, run_sweep, run_trial, stream_id, CellSummary, Phase, RecordStatus, SweepResult,
    TheoryPoint, TrialRecord, TuningChoice,
};
