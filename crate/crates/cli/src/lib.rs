//! Command implementations behind the `dynstc` binary: certificate
//! synthesis, single simulations and benchmark suites.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::{
    cmd_bench, cmd_certify, cmd_simulate, run_experiment, write_run, BenchOutput, CertifyOutput,
    CommandArgs, RunOutput, BOUND_TOLERANCE,
};
pub use config::{BenchConfig, ExperimentConfig, MechanismSpec, SystemSpec};
pub use error::{CliError, ExitKind};
