//! Scenario configuration, Monte-Carlo trials, sweeps and result files.

pub mod config;
pub mod diagnostic;
pub mod plot;
pub mod results;
pub mod study;
pub mod sweep;
pub mod trial;

pub use config::{Estimator, LsDenoise, NoiseReference, Redraw, ScenarioConfig, SerPoint, SweepConfig};
pub use results::{read_results, write_results, CSV_HEADER};
pub use study::{flatness_report, pole_modulus_study, FlatnessEntry, FlatnessReport};
pub use sweep::{ci95, run_sweep, SweepResult, SweepRow};
pub use trial::{run_block_trial, BlockSetup, Link, TrialCounts};
