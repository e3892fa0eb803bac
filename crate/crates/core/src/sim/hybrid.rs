use super::disturbance::{BoundExceeded, DisturbanceSignal};
use super::system::NonlinearSystem;
use super::trajectory::{ActiveSet, BoundForm, EventRecord, HybridTrajectory, Sample};
use crate::certificates::{fallback_period, minimum_dwell, CertificateBank};
use crate::triggering::{
    decide_interval, Decision, MechanismKind, MechanismState, TriggerConfig, TriggerError, Variant,
};

/// Intermediate `(τ, x)` points of one flow.
pub type FlowPoints = Vec<(f64, Vec<f64>)>;

/// Upper bound on the integration step.
pub const MAX_DT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error(transparent)]
    Trigger(#[from] TriggerError),
    #[error(transparent)]
    Disturbance(#[from] BoundExceeded),
    #[error("invalid simulation input: {0}")]
    InvalidInput(&'static str),
}

/// Hybrid state `ξ = (x, e, η, τ, τ_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub x: Vec<f64>,
    pub e: Vec<f64>,
    pub eta: MechanismState<f64>,
    pub tau: f64,
    pub tau_max: f64,
}

impl HybridState {
    /// State on the jump set at `t = 0` with `x̂ = x`.
    pub fn initial(x0: Vec<f64>, eta: MechanismState<f64>) -> Self {
        let n = x0.len();
        Self {
            x: x0,
            e: vec![0.0; n],
            eta,
            tau: 0.0,
            tau_max: 0.0,
        }
    }

    /// Held values `x̂ = x + e`.
    pub fn x_hat(&self) -> Vec<f64> {
        self.x.iter().zip(&self.e).map(|(a, b)| a + b).collect()
    }

    pub fn on_jump_set(&self) -> bool {
        self.tau == self.tau_max
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimOptions {
    /// Integration step; defaults to `min(10⁻³, t_min/50)`.
    pub dt: Option<f64>,
}

/// Interval rule for periodic baselines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Period {
    Fixed(f64),
    /// Fall-back interval of the smallest level containing `V(x)`.
    LevelAdaptive {
        delta: f64,
    },
}

fn active_set(bank: &CertificateBank<f64>, decision: &Decision<f64>, delta: f64) -> ActiveSet {
    let set = bank.levels()[decision.level].sets[decision.set_index];
    let rate = if decision.set_index == 0 {
        set.matched_rate()
    } else {
        set.clamped_rate(delta)
    };
    ActiveSet {
        epsilon: set.epsilon,
        gamma: set.gamma,
        l_gain: set.l_gain,
        rate,
    }
}

/// Sampling instant: measure, compute `Γ(x, η)` from the pre-update `η`, then
/// update `η`, reset `e` and `τ`.
pub fn jump(
    state: &HybridState,
    bank: &CertificateBank<f64>,
    config: &TriggerConfig<f64>,
) -> Result<(HybridState, Decision<f64>), SimError> {
    let v = bank.lyapunov(&state.x);
    let c = state.eta.c_value(v, config);
    let decision = decide_interval(v, c, bank, config)?;
    let next = HybridState {
        x: state.x.clone(),
        e: vec![0.0; state.x.len()],
        eta: state.eta.s_update(v, decision.interval, config),
        tau: 0.0,
        tau_max: decision.interval,
    };
    Ok((next, decision))
}

fn disturbance_vec(n_w: usize, value: f64) -> Vec<f64> {
    let mut w = vec![0.0; n_w];
    if let Some(first) = w.first_mut() {
        *first = value;
    }
    w
}

fn rk4_step<S: NonlinearSystem + ?Sized>(
    system: &S,
    x_hat: &[f64],
    w: &DisturbanceSignal,
    t: f64,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>, SimError> {
    let n = x.len();
    let n_w = system.n_w();
    let field = |t: f64, x: &[f64]| -> Result<Vec<f64>, SimError> {
        let e: Vec<f64> = x_hat.iter().zip(x).map(|(a, b)| a - b).collect();
        let wv = disturbance_vec(n_w, w.checked_value(t)?);
        Ok(system.eval(x, &e, &wv))
    };
    let shifted = |k: &[f64], s: f64| -> Vec<f64> { (0..n).map(|i| x[i] + s * k[i]).collect() };
    let k1 = field(t, x)?;
    let k2 = field(t + h / 2.0, &shifted(&k1, h / 2.0))?;
    let k3 = field(t + h / 2.0, &shifted(&k2, h / 2.0))?;
    let k4 = field(t + h, &shifted(&k3, h))?;
    Ok((0..n)
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Flows with `x̂` held from `τ = 0` up to `until ≤ τ_max`, using steps of
/// `dt` and a shortened final step. Returns the final state and every
/// intermediate `(τ, x)`, the last one at exactly `until`.
pub fn flow<S: NonlinearSystem + ?Sized>(
    state: &HybridState,
    system: &S,
    w: &DisturbanceSignal,
    t0: f64,
    dt: f64,
    until: f64,
) -> Result<(HybridState, FlowPoints), SimError> {
    if !(dt > 0.0) || !(until >= 0.0) || until > state.tau_max {
        return Err(SimError::InvalidInput(
            "flow needs dt > 0 and 0 ≤ until ≤ τ_max",
        ));
    }
    let x_hat = state.x_hat();
    let mut x = state.x.clone();
    let mut points = Vec::new();
    let steps = ((until / dt) - 1e-9).ceil().max(0.0) as usize;
    let mut tau = 0.0;
    for k in 1..=steps {
        let next_tau = if k == steps { until } else { k as f64 * dt };
        x = rk4_step(system, &x_hat, w, t0 + tau, &x, next_tau - tau)?;
        tau = next_tau;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite { t: t0 + tau });
        }
        points.push((tau, x.clone()));
    }
    let e = x_hat.iter().zip(&x).map(|(a, b)| a - b).collect();
    Ok((
        HybridState {
            x,
            e,
            eta: state.eta.clone(),
            tau,
            tau_max: state.tau_max,
        },
        points,
    ))
}

struct Choice {
    state: HybridState,
    record: EventRecord,
}

fn horizon_slack(horizon: f64) -> f64 {
    1e-12 * horizon.abs().max(1.0)
}

#[allow(clippy::too_many_arguments)]
fn run<S, D>(
    system: &S,
    bank: &CertificateBank<f64>,
    x0: &[f64],
    eta0: MechanismState<f64>,
    w: &DisturbanceSignal,
    horizon: f64,
    dt: f64,
    bound_form: BoundForm,
    mut decide: D,
) -> Result<HybridTrajectory, SimError>
where
    S: NonlinearSystem + ?Sized,
    D: FnMut(&HybridState, f64, usize) -> Result<Choice, SimError>,
{
    if x0.len() != system.n_x() || bank.n_x() != system.n_x() {
        return Err(SimError::InvalidInput(
            "x0, bank and system dimensions differ",
        ));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SimError::InvalidInput("x0 must be finite"));
    }
    if !(horizon >= 0.0) || !horizon.is_finite() {
        return Err(SimError::InvalidInput(
            "horizon must be finite and non-negative",
        ));
    }
    if !(dt > 0.0) {
        return Err(SimError::InvalidInput("dt must be positive"));
    }
    let mut state = HybridState::initial(x0.to_vec(), eta0);
    let mut samples = Vec::new();
    let mut events = Vec::new();
    let mut t = 0.0;
    let mut j = 0usize;
    let mut level = None;
    let mut fallback = false;

    let sample = |t: f64, j: usize, st: &HybridState, event, level, fallback| Sample {
        t,
        j,
        x: st.x.clone(),
        e: st.e.clone(),
        v: bank.lyapunov(&st.x),
        w: w.value(t),
        eta: st.eta.values(),
        interval: st.tau_max,
        event,
        level,
        fallback,
    };
    samples.push(sample(t, j, &state, false, level, fallback));

    loop {
        let Choice {
            state: next,
            record,
        } = decide(&state, t, j)?;
        level = record.level;
        fallback = record.fallback;
        events.push(record);
        state = next;
        j += 1;
        samples.push(sample(t, j, &state, true, level, fallback));

        let remaining = horizon - t;
        let full = state.tau_max <= remaining + horizon_slack(horizon);
        let until = if full { state.tau_max } else { remaining };
        if until <= 0.0 {
            break;
        }
        let x_hat = state.x_hat();
        let (flowed, points) = flow(&state, system, w, t, dt, until)?;
        let t_end = if full { t + state.tau_max } else { horizon };
        let n_points = points.len();
        for (k, (tau, x)) in points.into_iter().enumerate() {
            let ts = if k + 1 == n_points { t_end } else { t + tau };
            let st = HybridState {
                e: x_hat.iter().zip(&x).map(|(a, b)| a - b).collect(),
                x,
                eta: state.eta.clone(),
                tau,
                tau_max: state.tau_max,
            };
            samples.push(sample(ts, j, &st, false, level, fallback));
        }
        state = flowed;
        t = t_end;
        if !full {
            break;
        }
    }
    Ok(HybridTrajectory {
        samples,
        events,
        horizon,
        dt,
        bound_form,
    })
}

/// Default integration step `min(10⁻³, t_min/50)`.
pub fn default_dt(t_min: f64) -> f64 {
    MAX_DT.min(t_min / 50.0)
}

/// Closed loop under the dynamic self-triggered mechanism.
#[allow(clippy::too_many_arguments)]
pub fn simulate<S: NonlinearSystem + ?Sized>(
    system: &S,
    bank: &CertificateBank<f64>,
    config: &TriggerConfig<f64>,
    mechanism: &MechanismKind<f64>,
    x0: &[f64],
    w: &DisturbanceSignal,
    horizon: f64,
    options: SimOptions,
) -> Result<HybridTrajectory, SimError> {
    config.validate_against(bank)?;
    let v0 = bank.lyapunov(x0);
    let bound_form = match config.variant {
        Variant::Iss => BoundForm::Integral {
            theta: bank.theta(),
        },
        Variant::Ras { w_bar, c_max, .. } => {
            if v0 > c_max {
                return Err(TriggerError::OutOfRegion { v: v0, c: c_max }.into());
            }
            BoundForm::Uniform {
                alpha: bank.alpha_w(w_bar),
            }
        }
    };
    let eta0 = mechanism.initial_state(v0, config)?;
    let dt = options
        .dt
        .unwrap_or_else(|| default_dt(minimum_dwell(bank, config.delta)));
    run(
        system,
        bank,
        x0,
        eta0,
        w,
        horizon,
        dt,
        bound_form,
        |state, t, j| {
            let (next, decision) = jump(state, bank, config)?;
            Ok(Choice {
                state: next,
                record: EventRecord {
                    t,
                    j,
                    interval: decision.interval,
                    v: decision.v,
                    c: Some(decision.c),
                    level: Some(decision.level),
                    set_index: Some(decision.set_index),
                    fallback: decision.is_fallback(),
                    active: Some(active_set(bank, &decision, config.delta)),
                },
            })
        },
    )
}

/// Closed loop under periodic sampling. The bank supplies `V` and, for the
/// level-adaptive rule, the intervals. The disturbance bound `w_bar` of the
/// signal (if any) selects the uniform bound form.
pub fn simulate_periodic<S: NonlinearSystem + ?Sized>(
    system: &S,
    bank: &CertificateBank<f64>,
    period: Period,
    x0: &[f64],
    w: &DisturbanceSignal,
    horizon: f64,
    options: SimOptions,
) -> Result<HybridTrajectory, SimError> {
    let dt = match period {
        Period::Fixed(p) => {
            if !(p > 0.0) || !p.is_finite() {
                return Err(SimError::InvalidInput("period must be positive"));
            }
            options.dt.unwrap_or_else(|| default_dt(p))
        }
        Period::LevelAdaptive { delta } => {
            if !(delta > 0.0 && delta < 1.0) {
                return Err(SimError::InvalidInput("delta must lie in (0, 1)"));
            }
            options
                .dt
                .unwrap_or_else(|| default_dt(minimum_dwell(bank, delta)))
        }
    };
    let bound_form = match w.w_bar {
        Some(w_bar) if !bank.is_global() => BoundForm::Uniform {
            alpha: bank.alpha_w(w_bar),
        },
        _ => BoundForm::Integral {
            theta: bank.theta(),
        },
    };
    run(
        system,
        bank,
        x0,
        MechanismState::Fir { buffer: vec![] },
        w,
        horizon,
        dt,
        bound_form,
        |state, t, j| {
            let v = bank.lyapunov(&state.x);
            let (interval, level, active) = match period {
                Period::Fixed(p) => (p, None, None),
                Period::LevelAdaptive { delta } => {
                    let level = bank.select_level(v).ok_or(TriggerError::OutOfRegion {
                        v,
                        c: bank.max_level(),
                    })?;
                    let set = bank.levels()[level].sets[0];
                    let interval = fallback_period(bank, level, delta)
                        .map_err(|_| SimError::InvalidInput("level index out of range"))?;
                    let active = ActiveSet {
                        epsilon: set.epsilon,
                        gamma: set.gamma,
                        l_gain: set.l_gain,
                        rate: set.matched_rate(),
                    };
                    (interval, Some(level), Some(active))
                }
            };
            Ok(Choice {
                state: HybridState {
                    x: state.x.clone(),
                    e: vec![0.0; state.x.len()],
                    eta: state.eta.clone(),
                    tau: 0.0,
                    tau_max: interval,
                },
                record: EventRecord {
                    t,
                    j,
                    interval,
                    v,
                    c: None,
                    level,
                    set_index: active.map(|_| 0),
                    fallback: active.is_some(),
                    active,
                },
            })
        },
    )
}
