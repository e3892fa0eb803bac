//! Closed-form hybrid Lyapunov quantities: the coupling ratio, the maximum
//! allowable transmission interval (MATI), its finite-`λ` counterpart, the
//! solution of the scalar Riccati equation
//!
//! ```text
//! φ' = -2Λφ - γ(φ² + 1),   φ(0) = 1/λ
//! ```
//!
//! and the hybrid Lyapunov function `U = V + γ φ(τ) W²`.
//!
//! Every function here is pure.

use thiserror::Error;

use crate::scalar::Real;

/// Relative distance `|γ/Λ − 1|` below which the `γ = Λ` branch is used.
pub const SEAM_TOLERANCE: f64 = 1e-9;

/// Upper clamp margin for `arctanh` arguments.
const ATANH_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MathError {
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("parameter `lambda` must lie in (0, 1), got {0}")]
    LambdaOutOfRange(f64),
    #[error("tau = {tau} is outside the validity window [0, {window}]")]
    TauOutOfWindow { tau: f64, window: f64 },
    #[error("parameter `{name}` must be finite and non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
}

fn positive<T: Real>(name: &'static str, value: T) -> Result<T, MathError> {
    if value > T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(MathError::NonPositive {
            name,
            value: value.to_f64_lossy(),
        })
    }
}

fn nonnegative<T: Real>(name: &'static str, value: T) -> Result<T, MathError> {
    if value >= T::zero() && value.is_finite() {
        Ok(value)
    } else {
        Err(MathError::Negative {
            name,
            value: value.to_f64_lossy(),
        })
    }
}

/// Parameters of the Riccati equation: coupling gain `γ`, rate `Λ` and
/// initial-condition parameter `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatiParams<T = f64> {
    gamma: T,
    lambda_cap: T,
    lambda_small: T,
}

impl<T: Real> MatiParams<T> {
    pub fn new(gamma: T, lambda_cap: T, lambda_small: T) -> Result<Self, MathError> {
        positive("gamma", gamma)?;
        positive("lambda_cap", lambda_cap)?;
        if !(lambda_small > T::zero() && lambda_small < T::one()) {
            return Err(MathError::LambdaOutOfRange(lambda_small.to_f64_lossy()));
        }
        Ok(Self {
            gamma,
            lambda_cap,
            lambda_small,
        })
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn lambda_cap(&self) -> T {
        self.lambda_cap
    }

    pub fn lambda_small(&self) -> T {
        self.lambda_small
    }

    /// Length of the interval on which `φ` travels from `1/λ` down to `λ`.
    pub fn window(&self) -> T {
        mati_tilde_unchecked(self.lambda_small, self.gamma, self.lambda_cap)
    }
}

/// Flow-rate parameters: decay rate `ε` (any sign) and error growth `L > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowRateParams<T = f64> {
    pub epsilon: T,
    l_gain: T,
}

impl<T: Real> FlowRateParams<T> {
    pub fn new(epsilon: T, l_gain: T) -> Result<Self, MathError> {
        positive("l_gain", l_gain)?;
        Ok(Self { epsilon, l_gain })
    }

    pub fn l_gain(&self) -> T {
        self.l_gain
    }

    /// The rate `Λ = L + ε/2` that makes the exponential bound decay with `-ε`.
    pub fn matched_rate(&self) -> T {
        self.l_gain + self.epsilon / T::lit(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Tan,
    Seam,
    Tanh,
}

fn branch<T: Real>(gamma: T, lambda_cap: T) -> Branch {
    let ratio = gamma / lambda_cap;
    if (ratio - T::one()).abs() < T::lit(SEAM_TOLERANCE) {
        Branch::Seam
    } else if ratio > T::one() {
        Branch::Tan
    } else {
        Branch::Tanh
    }
}

fn clamped_atanh<T: Real>(z: T) -> T {
    let upper = T::one() - T::lit(ATANH_MARGIN).max(T::epsilon());
    z.max(T::zero()).min(upper).atanh()
}

fn ratio_unchecked<T: Real>(gamma: T, lambda_cap: T) -> T {
    let q = gamma / lambda_cap;
    (q * q - T::one()).abs().sqrt()
}

/// `r = √|(γ/Λ)² − 1|`.
pub fn coupling_ratio<T: Real>(gamma: T, lambda_cap: T) -> Result<T, MathError> {
    positive("gamma", gamma)?;
    positive("lambda_cap", lambda_cap)?;
    Ok(ratio_unchecked(gamma, lambda_cap))
}

pub(crate) fn mati_unchecked<T: Real>(gamma: T, lambda_cap: T) -> T {
    let r = ratio_unchecked(gamma, lambda_cap);
    match branch(gamma, lambda_cap) {
        Branch::Seam => T::one() / lambda_cap,
        Branch::Tan => r.atan() / (lambda_cap * r),
        Branch::Tanh => clamped_atanh(r) / (lambda_cap * r),
    }
}

/// Maximum allowable transmission interval `T_max(γ, Λ)`.
pub fn mati<T: Real>(gamma: T, lambda_cap: T) -> Result<T, MathError> {
    positive("gamma", gamma)?;
    positive("lambda_cap", lambda_cap)?;
    Ok(mati_unchecked(gamma, lambda_cap))
}

fn mati_tilde_unchecked<T: Real>(lambda_small: T, gamma: T, lambda_cap: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let r = ratio_unchecked(gamma, lambda_cap);
    let arg = || {
        r * (one - lambda_small)
            / (two * lambda_small / (one + lambda_small) * (gamma / lambda_cap - one)
                + one
                + lambda_small)
    };
    match branch(gamma, lambda_cap) {
        Branch::Seam => (one - lambda_small) / (one + lambda_small) / lambda_cap,
        Branch::Tan => arg().atan() / (lambda_cap * r),
        Branch::Tanh => clamped_atanh(arg()) / (lambda_cap * r),
    }
}

/// Time `T̃_max(λ, γ, Λ)` the Riccati solution needs to travel from `1/λ`
/// to `λ`. Increases to [`mati`] as `λ → 0⁺`.
pub fn mati_tilde<T: Real>(lambda_small: T, gamma: T, lambda_cap: T) -> Result<T, MathError> {
    MatiParams::new(gamma, lambda_cap, lambda_small)?;
    Ok(mati_tilde_unchecked(lambda_small, gamma, lambda_cap))
}

/// Closed-form solution `φ(τ)` of the Riccati equation.
///
/// With `ψ = φ + Λ/γ` the equation becomes `ψ' = −γ(ψ² ± k²)`, solved by a
/// tangent (`γ > Λ`), a rational (`γ = Λ`) or a hyperbolic cotangent
/// (`γ < Λ`) substitution.
pub fn phi_eval<T: Real>(tau: T, params: &MatiParams<T>) -> Result<T, MathError> {
    nonnegative("tau", tau)?;
    let window = params.window();
    if tau > window * (T::one() + T::lit(1e-12)) {
        return Err(MathError::TauOutOfWindow {
            tau: tau.to_f64_lossy(),
            window: window.to_f64_lossy(),
        });
    }
    Ok(phi_unchecked(tau, params))
}

pub(crate) fn phi_unchecked<T: Real>(tau: T, params: &MatiParams<T>) -> T {
    let MatiParams {
        gamma,
        lambda_cap,
        lambda_small,
    } = *params;
    let shift = lambda_cap / gamma;
    let psi0 = lambda_small.recip() + shift;
    // k = rΛ/γ, and γk = rΛ is the angular rate.
    let r = ratio_unchecked(gamma, lambda_cap);
    let k = r * shift;
    let rate = r * lambda_cap;
    let psi = match branch(gamma, lambda_cap) {
        Branch::Seam => psi0 / (T::one() + gamma * psi0 * tau),
        Branch::Tan => k * ((psi0 / k).atan() - rate * tau).tan(),
        Branch::Tanh => k / ((k / psi0).atanh() + rate * tau).tanh(),
    };
    psi - shift
}

/// Hybrid Lyapunov function `U = V + γ φ(τ) W²`.
pub fn hybrid_u<T: Real>(
    v_of_x: T,
    w_of_e: T,
    tau: T,
    params: &MatiParams<T>,
) -> Result<T, MathError> {
    nonnegative("v_of_x", v_of_x)?;
    nonnegative("w_of_e", w_of_e)?;
    if w_of_e == T::zero() {
        phi_eval(tau, params)?;
        return Ok(v_of_x);
    }
    let phi = phi_eval(tau, params)?;
    Ok(v_of_x + params.gamma * phi * w_of_e * w_of_e)
}
