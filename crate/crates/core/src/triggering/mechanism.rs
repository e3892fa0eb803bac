use serde::{Deserialize, Serialize};

use super::config::{TriggerConfig, Variant};
use super::TriggerError;
use crate::scalar::Real;

/// Which dynamic variable drives the sampling decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MechanismKind<T = f64> {
    /// Discounted moving average over the last `m` values of `V`.
    Fir { m: usize },
    /// First-order filter `η⁺ = e^{−ε_ref Γ}(r₁η + r₂V)`.
    Iir { r1: T, r2: T },
    /// Exponential reference function.
    Ref,
}

/// State of the dynamic variable `η`.
#[derive(Debug, Clone, PartialEq)]
pub enum MechanismState<T = f64> {
    /// `m − 1` discounted past values of `V`, oldest first.
    Fir {
        buffer: Vec<T>,
    },
    Iir {
        r1: T,
        r2: T,
        eta: T,
    },
    Ref {
        eta: T,
    },
}

impl<T: Real> MechanismKind<T> {
    pub fn validate(&self) -> Result<(), TriggerError> {
        match *self {
            MechanismKind::Fir { m: 0 } => Err(TriggerError::InvalidMechanism(
                "FIR window length must be ≥ 1",
            )),
            MechanismKind::Iir { r1, r2 }
                if !(r1 > T::zero() && r2 > T::zero() && r1 + r2 <= T::one()) =>
            {
                Err(TriggerError::InvalidMechanism(
                    "IIR weights need r1, r2 > 0 and r1 + r2 ≤ 1",
                ))
            }
            _ => Ok(()),
        }
    }

    /// Initial dynamic variable for an initial Lyapunov value `v0`.
    ///
    /// FIR buffers and the IIR state start at `v0`; the reference state starts
    /// at `v0` (ISS) or at `clamp(v0 − c_w, 0, c_max − c_w)` (RAS).
    pub fn initial_state(
        &self,
        v0: T,
        config: &TriggerConfig<T>,
    ) -> Result<MechanismState<T>, TriggerError> {
        self.validate()?;
        Ok(match *self {
            MechanismKind::Fir { m } => MechanismState::Fir {
                buffer: vec![v0; m - 1],
            },
            MechanismKind::Iir { r1, r2 } => MechanismState::Iir { r1, r2, eta: v0 },
            MechanismKind::Ref => {
                let eta = match config.variant {
                    Variant::Iss => v0,
                    Variant::Ras { c_w, c_max, .. } => (v0 - c_w).max(T::zero()).min(c_max - c_w),
                };
                MechanismState::Ref { eta }
            }
        })
    }
}

impl<T: Real> MechanismState<T> {
    pub fn fir(buffer: Vec<T>) -> Result<Self, TriggerError> {
        if buffer.iter().any(|v| !(*v >= T::zero())) {
            return Err(TriggerError::InvalidMechanism(
                "FIR entries must be non-negative",
            ));
        }
        Ok(Self::Fir { buffer })
    }

    pub fn iir(r1: T, r2: T, eta: T) -> Result<Self, TriggerError> {
        MechanismKind::Iir { r1, r2 }.validate()?;
        if !(eta >= T::zero()) {
            return Err(TriggerError::InvalidMechanism("η must be non-negative"));
        }
        Ok(Self::Iir { r1, r2, eta })
    }

    pub fn reference(eta: T) -> Result<Self, TriggerError> {
        if !(eta >= T::zero()) {
            return Err(TriggerError::InvalidMechanism("η must be non-negative"));
        }
        Ok(Self::Ref { eta })
    }

    /// The dynamic variable as a flat vector (`n_η` entries).
    pub fn values(&self) -> Vec<T> {
        match self {
            Self::Fir { buffer } => buffer.clone(),
            Self::Iir { eta, .. } | Self::Ref { eta } => vec![*eta],
        }
    }

    /// `C(x, η)` for the configured variant.
    pub fn c_value(&self, v_of_x: T, config: &TriggerConfig<T>) -> T {
        let raw = match self {
            Self::Fir { buffer } => {
                let m = T::from_usize(buffer.len() + 1).expect("window length fits scalar");
                (v_of_x + buffer.iter().fold(T::zero(), |a, &b| a + b)) / m
            }
            Self::Iir { eta, .. } | Self::Ref { eta } => *eta,
        };
        match (config.variant, self) {
            (Variant::Iss, _) => raw,
            (Variant::Ras { c_w, .. }, Self::Ref { .. }) => c_w + raw,
            (Variant::Ras { c_w, c_max, .. }, _) => raw.min(c_max).max(c_w),
        }
    }

    /// `S(η, x)` given the interval `Γ` just chosen for this sampling instant.
    pub fn s_update(&self, v_of_x: T, gamma_out: T, config: &TriggerConfig<T>) -> Self {
        let discount = (-config.eps_ref * gamma_out).exp();
        match self {
            Self::Fir { buffer } => {
                let mut next: Vec<T> = buffer.iter().skip(1).copied().collect();
                if !buffer.is_empty() {
                    next.push(v_of_x);
                }
                Self::Fir {
                    buffer: next.into_iter().map(|v| discount * v).collect(),
                }
            }
            Self::Iir { r1, r2, eta } => Self::Iir {
                r1: *r1,
                r2: *r2,
                eta: discount * (*r1 * *eta + *r2 * v_of_x),
            },
            Self::Ref { eta } => Self::Ref {
                eta: discount * *eta,
            },
        }
    }
}
