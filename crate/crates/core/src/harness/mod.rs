//! Monte Carlo orchestration: seeds, trial execution, statistics, configuration,
//! reports and the experiment drivers behind the command line.

pub mod config;
pub mod experiments;
pub mod report;
pub mod seed;
pub mod stats;
pub mod trials;

pub use config::{parse_sizes, resolve_config, ExperimentConfig, ExperimentKind, Knobs, Overrides};
pub use experiments::{run_experiment, selftest_checks, RunOutput};
pub use report::{validate_report, Check, CsvTable, ExperimentReport, Summary, SCHEMA};

pub use seed::{derive_seed, mix64, stream_rng, StreamTag};
pub use stats::{bootstrap_ci, ks_two_sample, wilson_interval, Interval};
pub use trials::{run_trials, TrialFailure, TrialOutcome, TrialSettings};
