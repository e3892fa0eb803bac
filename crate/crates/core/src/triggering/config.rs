use serde::{Deserialize, Serialize};

use super::TriggerError;
use crate::certificates::CertificateBank;
use crate::scalar::Real;

/// Default safety factor on the MATI.
pub const DEFAULT_DELTA: f64 = 0.999;

/// Below this value `V(x)` is treated as zero: the log bound becomes
/// unbounded and only the MATI limits the interval.
pub const V_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant<T = f64> {
    /// Input-to-state stability; no disturbance knowledge, single global level.
    Iss,
    /// Robust asymptotic stability of `{V ≤ c_w}` with region `{V ≤ c_max}`
    /// for disturbances bounded by `w_bar`.
    Ras { w_bar: T, c_w: T, c_max: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriggerConfig<T = f64> {
    pub eps_ref: T,
    pub delta: T,
    pub variant: Variant<T>,
}

impl<T: Real> TriggerConfig<T> {
    pub fn iss(eps_ref: T) -> Self {
        Self {
            eps_ref,
            delta: T::lit(DEFAULT_DELTA),
            variant: Variant::Iss,
        }
    }

    pub fn ras(eps_ref: T, w_bar: T, c_w: T, c_max: T) -> Self {
        Self {
            eps_ref,
            delta: T::lit(DEFAULT_DELTA),
            variant: Variant::Ras { w_bar, c_w, c_max },
        }
    }

    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<(), TriggerError> {
        if !(self.eps_ref > T::zero()) || !self.eps_ref.is_finite() {
            return Err(TriggerError::InvalidConfig("eps_ref must be positive"));
        }
        if !(self.delta > T::zero() && self.delta < T::one()) {
            return Err(TriggerError::InvalidConfig("delta must lie in (0, 1)"));
        }
        if let Variant::Ras { w_bar, c_w, c_max } = self.variant {
            if !(w_bar >= T::zero()) || !(c_w > T::zero()) || !(c_max >= c_w) {
                return Err(TriggerError::InvalidConfig(
                    "RAS needs w_bar ≥ 0 and c_max ≥ c_w > 0",
                ));
            }
        }
        Ok(())
    }

    /// Additionally checks `c_w ≥ max_l α_w(w̄)/ε_{1,l}` and
    /// `c_max ≤ max_l c_l` against a bank.
    pub fn validate_against(&self, bank: &CertificateBank<T>) -> Result<(), TriggerError> {
        self.validate()?;
        match self.variant {
            Variant::Iss => {
                if !bank.is_global() {
                    return Err(TriggerError::InvalidConfig(
                        "the ISS variant needs a single global level",
                    ));
                }
            }
            Variant::Ras { w_bar, c_w, c_max } => {
                let alpha = bank.alpha_w(w_bar);
                let required = bank
                    .levels()
                    .iter()
                    .map(|l| alpha / l.fallback_set().epsilon)
                    .fold(T::zero(), T::max);
                // a relative slack absorbs the rounding of α/ε₁ at equality
                if c_w < required * (T::one() - T::lit(1e-12)) {
                    return Err(TriggerError::InvalidConfig(
                        "c_w is below the disturbance-induced lower bound",
                    ));
                }
                if c_max > bank.max_level() {
                    return Err(TriggerError::InvalidConfig(
                        "c_max exceeds the largest certified level",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn alpha_bar(&self, bank: &CertificateBank<T>) -> T {
        match self.variant {
            Variant::Iss => T::zero(),
            Variant::Ras { w_bar, .. } => bank.alpha_w(w_bar),
        }
    }
}
