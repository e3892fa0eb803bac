use serde::{Deserialize, Serialize};

use super::trajectory::{BoundForm, HybridTrajectory, Sample};
use crate::mati::{phi_unchecked, MatiParams};

/// Initial-condition parameter of `φ` used when evaluating `U` along flows.
pub const U_LAMBDA: f64 = 1e-9;

/// Absolute slack added to the relative tolerance near the origin.
const ABS_FLOOR: f64 = 1e-12;

/// Maximum number of violations stored in a report.
const MAX_LISTED: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundQuantity {
    /// `V(x(t))`.
    V,
    /// `U(ξ(t)) = V + γφ(τ)|e|²`.
    U,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub event: usize,
    pub t: f64,
    pub quantity: BoundQuantity,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub tolerance: f64,
    pub flows_checked: usize,
    /// Flows without a certificate (fixed-period baselines).
    pub flows_skipped: usize,
    pub samples_checked: usize,
    /// Largest `lhs / rhs` seen.
    pub worst_ratio: f64,
    pub violation_count: usize,
    pub violations: Vec<BoundViolation>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }
}

fn flow_supply(form: BoundForm, rho: f64, elapsed: f64) -> Option<f64> {
    match form {
        BoundForm::Uniform { alpha } => Some(if rho == 0.0 {
            alpha * elapsed
        } else {
            alpha * (rho * elapsed).exp_m1() / rho
        }),
        BoundForm::Integral { .. } => None,
    }
}

/// Checks `V(x(t)) ≤ U(ξ(t)) ≤ e^{ρ(t−t_j)}V(x(t_j)) + supply` on every
/// certified flow, with `ρ = max{−ε, 2(L − Λ)}` of the set chosen at `t_j`.
///
/// The supply is the trapezoidal integral of `e^{ρ(t−s)}θ²|w(s)|²` over the
/// logged samples, or `α(e^{ρ(t−t_j)} − 1)/ρ` for a uniform disturbance bound.
pub fn check_prop1_bound(trajectory: &HybridTrajectory, tolerance: f64) -> BoundReport {
    let mut report = BoundReport {
        tolerance,
        flows_checked: 0,
        flows_skipped: 0,
        samples_checked: 0,
        worst_ratio: 0.0,
        violation_count: 0,
        violations: Vec::new(),
    };
    let samples = &trajectory.samples;
    let mut cursor = 0;
    for (k, event) in trajectory.events.iter().enumerate() {
        let j = k + 1;
        while cursor < samples.len() && samples[cursor].j < j {
            cursor += 1;
        }
        let start = cursor;
        while cursor < samples.len() && samples[cursor].j == j {
            cursor += 1;
        }
        let flow: &[Sample] = &samples[start..cursor];
        let Some(active) = event.active else {
            report.flows_skipped += 1;
            continue;
        };
        report.flows_checked += 1;
        let rho = active.growth_rate();
        let phi_params = MatiParams::new(active.gamma, active.rate, U_LAMBDA).ok();
        let window = phi_params.map_or(0.0, |p| p.window());

        let mut integral = 0.0;
        let mut prev: Option<(f64, f64)> = None;
        for s in flow {
            let elapsed = s.t - event.t;
            let supply = match flow_supply(trajectory.bound_form, rho, elapsed) {
                Some(v) => v,
                None => {
                    let BoundForm::Integral { theta } = trajectory.bound_form else {
                        unreachable!()
                    };
                    let a = theta * theta * s.w * s.w;
                    if let Some((t_prev, a_prev)) = prev {
                        let h = s.t - t_prev;
                        let decay = (rho * h).exp();
                        integral = decay * integral + 0.5 * h * (decay * a_prev + a);
                    }
                    prev = Some((s.t, a));
                    integral
                }
            };
            let rhs = (rho * elapsed).exp() * event.v + supply;
            report.samples_checked += 1;

            let mut check = |quantity, lhs: f64| {
                if rhs > 0.0 {
                    report.worst_ratio = report.worst_ratio.max(lhs / rhs);
                }
                if !(lhs <= rhs * (1.0 + tolerance) + ABS_FLOOR) {
                    report.violation_count += 1;
                    if report.violations.len() < MAX_LISTED {
                        report.violations.push(BoundViolation {
                            event: k,
                            t: s.t,
                            quantity,
                            lhs,
                            rhs,
                        });
                    }
                }
            };
            check(BoundQuantity::V, s.v);
            let tau = elapsed.max(0.0);
            if let Some(params) = phi_params {
                if tau <= window {
                    let w2: f64 = s.e.iter().map(|c| c * c).sum();
                    let u = if w2 == 0.0 {
                        s.v
                    } else {
                        s.v + active.gamma * phi_unchecked(tau, &params) * w2
                    };
                    check(BoundQuantity::U, u);
                }
            }
        }
    }
    report
}
