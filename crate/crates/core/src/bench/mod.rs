//! Experiment harness: threshold table, formula timing, the counterexample
//! checks, success-rate sweeps and the CLI.

pub mod cli;
pub mod counterexample;
pub mod sweep;
pub mod table1;
pub mod timing;

pub use counterexample::{counterexample_check, CounterexampleReport};
pub use sweep::{run_sweep, SweepConfig, TrialReport};
pub use table1::{table1_report, ThresholdRow};
pub use timing::{timing_bench, TimingRow};
