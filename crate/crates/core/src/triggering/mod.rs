//! Dynamic self-triggering: the dynamic variable `η`, its update, and the
//! inter-event time selection for the ISS and RAS variants.

pub mod config;
pub mod gamma;
pub mod mechanism;

use thiserror::Error;

pub use config::{TriggerConfig, Variant, DEFAULT_DELTA, V_FLOOR};
pub use gamma::{candidate_intervals, decide_interval, gamma_iss, gamma_ras, Decision};
pub use mechanism::{MechanismKind, MechanismState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TriggerError {
    #[error("invalid trigger configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid mechanism: {0}")]
    InvalidMechanism(&'static str),
    #[error("state left the certified region: V = {v}, C = {c}")]
    OutOfRegion { v: f64, c: f64 },
}

/// `C(x, η)`; see [`MechanismState::c_value`].
pub fn c_value<T: crate::scalar::Real>(
    state: &MechanismState<T>,
    v_of_x: T,
    config: &TriggerConfig<T>,
) -> T {
    state.c_value(v_of_x, config)
}

/// `S(η, x)`; see [`MechanismState::s_update`].
pub fn s_update<T: crate::scalar::Real>(
    state: &MechanismState<T>,
    v_of_x: T,
    gamma_out: T,
    config: &TriggerConfig<T>,
) -> MechanismState<T> {
    state.s_update(v_of_x, gamma_out, config)
}
