//! Independent numeric reference for the Riccati transit time.
//!
//! With `θ = atan φ` the Riccati equation becomes `θ' = −γ − Λ sin 2θ`, which
//! is strictly negative on `[0, π/2]`. The transit time from `φ = 1/λ` to
//! `φ = λ` is therefore `∫ dθ / (γ + Λ sin 2θ)` between the two angles,
//! integrated here as the ODE `dt/dθ` with classical RK4.

/// Default number of RK4 steps over the full angle range `[0, π/2]`.
pub const DEFAULT_STEPS: usize = 20_000;

fn dt_dtheta(gamma: f64, lambda_cap: f64, theta: f64) -> f64 {
    1.0 / (gamma + lambda_cap * (2.0 * theta).sin())
}

/// Time for `φ` to travel from `1/λ` down to `λ`; `λ = 0` gives the MATI.
pub fn transit_time(gamma: f64, lambda_cap: f64, lambda_small: f64, steps: usize) -> f64 {
    let start = if lambda_small == 0.0 {
        std::f64::consts::FRAC_PI_2
    } else {
        (1.0 / lambda_small).atan()
    };
    let end = lambda_small.atan();
    let h = (start - end) / steps as f64;
    let f = |theta| dt_dtheta(gamma, lambda_cap, theta);
    let mut t = 0.0;
    for k in 0..steps {
        let theta = end + k as f64 * h;
        let k1 = f(theta);
        let k2 = f(theta + h / 2.0);
        let k4 = f(theta + h);
        // k3 equals k2 for an autonomous right-hand side in θ
        t += h / 6.0 * (k1 + 4.0 * k2 + k4);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_limit() {
        // Λ → 0: θ' = −γ, so the transit takes (π/2)/γ
        let t = transit_time(2.0, 1e-300, 0.0, 1000);
        assert!((t - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn symmetric_window_is_empty() {
        assert_eq!(transit_time(1.0, 1.0, 1.0, 10), 0.0);
    }
}
