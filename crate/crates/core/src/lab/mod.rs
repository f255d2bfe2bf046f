//! Experiment orchestration: sweeps, verdicts, experiments and their output
//! files.

pub mod config;
pub mod diagnostics;
pub mod experiments;
pub mod output;
pub mod sweep;

pub use config::{
    load_config, parse_config, BumpConfig, GapConfig, MonoConfig, ProbeConfig, Resolution,
    SweepConfig, SweepPlan, Thresholds, Truncation, SCHEMA_VERSION,
};
pub use diagnostics::{concentration, decay_fit, ConcentrationDiagnostic, DecayFit};
pub use experiments::{
    bump_search, decay_experiment, gap_experiment, monotonicity_suite, nonattainment_probe,
    Assertion, BumpReport, DecayReport, GapReport, MonoReport, ProbeReport, transition_is_monotone,
};
pub use sweep::{classify, solve_point, sweep_truncation, Classification, SweepOutcome, SweepRow, Verdict};
