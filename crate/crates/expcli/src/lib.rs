//! Experiment orchestration for `macrospin`: plans, parallel sweeps over
//! disorder realizations and initial states, saturation analysis and CSV/JSON
//! output for plotting.

pub mod error;
pub mod meta;
pub mod plan;
pub mod records;
pub mod run;

pub use error::{ExpError, Result};
pub use plan::{ExperimentPlan, StateKind};
pub use records::{EthRecord, LbitRecord, RunRecord};
pub use run::{run_eth_report, run_lbit_demo, run_scaling, run_staggered, run_time_series, RunOutput};
