//! Experiment harness library: sweeps, angle analysis, and SVG plots.
//! The `harness` binary is a thin CLI over these functions so tests can
//! drive the same code paths in process.

pub mod analyze;
pub mod plot;
pub mod sweep;

pub use analyze::{
    align_lp_angles, qwp_angle_scatter, wrap_half, write_angles_csv, AngleAnalysis, AngleRecord,
    AnalyzeError, RankStats,
};
pub use plot::{accuracy_plot, angle_scatter_plot};
pub use sweep::{
    mean_std, run_sweep, summarize, write_plans, write_results_csv, write_summary_csv, SummaryRow,
    SweepResult, SweepSpec, TrialRow,
};
