use super::config::{TriggerConfig, Variant, V_FLOOR};
use super::TriggerError;
use crate::certificates::{CertificateBank, LevelCertificate};
use crate::mati::mati_unchecked;
use crate::scalar::Real;

/// Outcome of one sampling decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision<T = f64> {
    /// Inter-event time `Γ`.
    pub interval: T,
    /// Index of the winning parameter set within its level (0 = fall-back).
    pub set_index: usize,
    /// Index of the level whose sets were used.
    pub level: usize,
    pub v: T,
    pub c: T,
}

impl<T: Real> Decision<T> {
    pub fn is_fallback(&self) -> bool {
        self.set_index == 0
    }
}

/// Candidate interval of every set on one level; the first entry is the
/// fall-back.
///
/// With `alpha = 0` the log bound is `(ln C − ln V)/(ε_ref − εᵢ)`; otherwise
/// both arguments are shifted by `α/εᵢ` and sets with `εᵢ ≥ 0` are skipped.
pub fn candidate_intervals<T: Real>(
    v: T,
    c: T,
    level: &LevelCertificate<T>,
    alpha: T,
    config: &TriggerConfig<T>,
) -> Vec<Option<T>> {
    let delta = config.delta;
    let first = level.fallback_set();
    let mut out = Vec::with_capacity(level.sets.len());
    out.push(Some(
        delta * mati_unchecked(first.gamma, first.matched_rate()),
    ));
    for set in &level.sets[1..] {
        if alpha > T::zero() && set.epsilon >= T::zero() {
            out.push(None);
            continue;
        }
        let h = if c >= v {
            let window = delta * mati_unchecked(set.gamma, set.clamped_rate(delta));
            let gap = config.eps_ref - set.epsilon;
            if gap > T::zero() {
                let shift = alpha / set.epsilon;
                let lower = v - shift;
                let log_bound = if lower < T::lit(V_FLOOR) {
                    T::infinity()
                } else {
                    ((c - shift).ln() - lower.ln()) / gap
                };
                window.min(log_bound)
            } else {
                window
            }
        } else {
            T::zero()
        };
        out.push(Some(h));
    }
    out
}

fn decide<T: Real>(
    v: T,
    c: T,
    bank: &CertificateBank<T>,
    level: usize,
    alpha: T,
    config: &TriggerConfig<T>,
) -> Decision<T> {
    let candidates = candidate_intervals(v, c, &bank.levels()[level], alpha, config);
    let mut best = (T::neg_infinity(), 0);
    for (i, h) in candidates.into_iter().enumerate() {
        if let Some(h) = h {
            if h > best.0 {
                best = (h, i);
            }
        }
    }
    Decision {
        interval: best.0,
        set_index: best.1,
        level,
        v,
        c,
    }
}

/// Dynamic interval for the ISS variant; uses the first (global) level.
pub fn gamma_iss<T: Real>(
    v: T,
    c: T,
    bank: &CertificateBank<T>,
    config: &TriggerConfig<T>,
) -> Decision<T> {
    decide(v, c, bank, 0, T::zero(), config)
}

/// Dynamic interval for the RAS variant: picks the smallest level with
/// `c_l ≥ max{V, C}` and shifts the log bound by the disturbance term.
pub fn gamma_ras<T: Real>(
    v: T,
    c: T,
    bank: &CertificateBank<T>,
    config: &TriggerConfig<T>,
) -> Result<Decision<T>, TriggerError> {
    let w_bar = match config.variant {
        Variant::Ras { w_bar, .. } => w_bar,
        Variant::Iss => T::zero(),
    };
    let level = bank
        .select_level(v.max(c))
        .ok_or(TriggerError::OutOfRegion {
            v: v.to_f64_lossy(),
            c: c.to_f64_lossy(),
        })?;
    Ok(decide(v, c, bank, level, bank.alpha_w(w_bar), config))
}

/// Dispatches on the configured variant.
pub fn decide_interval<T: Real>(
    v: T,
    c: T,
    bank: &CertificateBank<T>,
    config: &TriggerConfig<T>,
) -> Result<Decision<T>, TriggerError> {
    match config.variant {
        Variant::Iss => Ok(gamma_iss(v, c, bank, config)),
        Variant::Ras { .. } => gamma_ras(v, c, bank, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::ParameterSet;
    use crate::mati::mati;
    use nalgebra::DMatrix;

    fn bank(levels: Vec<LevelCertificate<f64>>) -> CertificateBank<f64> {
        CertificateBank::new(DMatrix::identity(2, 2), 1.0, levels).unwrap()
    }

    fn set(e: f64, g: f64, l: f64) -> ParameterSet<f64> {
        ParameterSet::new(e, g, l).unwrap()
    }

    #[test]
    fn single_set_returns_fallback() {
        let b = bank(vec![LevelCertificate {
            c: f64::INFINITY,
            sets: vec![set(0.5, 2.0, 1.0)],
        }]);
        let cfg = TriggerConfig::iss(0.2);
        let d = gamma_iss(3.0, 1.0, &b, &cfg);
        assert_eq!(d.set_index, 0);
        assert_eq!(d.interval, 0.999 * mati(2.0, 1.25).unwrap());
    }

    #[test]
    fn log_bound_limits_dynamic_set() {
        let b = bank(vec![LevelCertificate {
            c: f64::INFINITY,
            sets: vec![set(0.5, 4.0, 1.0), set(-1.0, 0.5, 1.0)],
        }]);
        let cfg = TriggerConfig::iss(0.2);
        let d = gamma_iss(1.0, 2.0, &b, &cfg);
        let expected = 2f64.ln() / 1.2;
        let fb = 0.999 * mati(4.0, 1.25).unwrap();
        assert!(expected > fb);
        assert_eq!(d.set_index, 1);
        assert!((d.interval - expected).abs() < 1e-15);
    }

    #[test]
    fn c_below_v_falls_back() {
        let b = bank(vec![LevelCertificate {
            c: f64::INFINITY,
            sets: vec![set(0.5, 4.0, 1.0), set(-1.0, 0.5, 1.0)],
        }]);
        let d = gamma_iss(2.0, 1.0, &b, &TriggerConfig::iss(0.2));
        assert!(d.is_fallback());
    }

    #[test]
    fn zero_v_uses_window() {
        let b = bank(vec![LevelCertificate {
            c: f64::INFINITY,
            sets: vec![set(0.5, 4.0, 1.0), set(-1.0, 0.5, 1.0)],
        }]);
        let cfg = TriggerConfig::iss(0.2);
        let d = gamma_iss(0.0, 0.0, &b, &cfg);
        let rate = (1.0f64 - 0.5).max(1.0 - 0.999);
        assert_eq!(d.interval, 0.999 * mati(0.5, rate).unwrap());
    }

    #[test]
    fn ras_selects_level_and_reports_out_of_region() {
        let levels = vec![
            LevelCertificate {
                c: 1.0,
                sets: vec![set(1.0, 1.0, 1.0), set(-2.0, 0.5, 1.0)],
            },
            LevelCertificate {
                c: 10.0,
                sets: vec![set(1.0, 3.0, 2.0), set(-2.0, 1.0, 2.0)],
            },
        ];
        let b = bank(levels);
        let cfg = TriggerConfig::ras(1.0, 0.1, 0.5, 10.0);
        assert_eq!(gamma_ras(0.5, 0.6, &b, &cfg).unwrap().level, 0);
        assert_eq!(gamma_ras(0.5, 2.0, &b, &cfg).unwrap().level, 1);
        assert!(matches!(
            gamma_ras(11.0, 2.0, &b, &cfg),
            Err(TriggerError::OutOfRegion { .. })
        ));
    }

    #[test]
    fn ras_skips_nonnegative_rates() {
        let lvl = LevelCertificate {
            c: f64::INFINITY,
            sets: vec![set(1.0, 1.0, 1.0), set(0.5, 0.1, 0.1)],
        };
        let cands = candidate_intervals(
            1.0,
            2.0,
            &lvl,
            0.01,
            &TriggerConfig::ras(1.0, 0.1, 0.5, 10.0),
        );
        assert!(cands[1].is_none());
    }

    #[test]
    fn ties_keep_smallest_index() {
        let b = bank(vec![LevelCertificate {
            c: f64::INFINITY,
            sets: vec![
                set(0.5, 2.0, 1.0),
                set(-1.0, 1.0, 1.75),
                set(-1.0, 1.0, 1.75),
            ],
        }]);
        let d = gamma_iss(1.0, 1e6, &b, &TriggerConfig::iss(0.2));
        assert_eq!(d.set_index, 1);
    }
}
