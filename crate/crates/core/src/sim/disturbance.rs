use serde::{Deserialize, Serialize};

/// Shape of a windowed disturbance pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pulse {
    /// `amplitude · sin(frequency · t)`
    Sine {
        amplitude: f64,
        frequency: f64,
    },
    Constant {
        value: f64,
    },
}

/// Pulse active on the closed interval `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: f64,
    pub end: f64,
    #[serde(flatten)]
    pub pulse: Pulse,
}

/// Scalar piecewise disturbance `w(t)`: sum of the active windows, zero
/// elsewhere.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSignal {
    #[serde(default)]
    pub windows: Vec<Window>,
    #[serde(default)]
    pub w_bar: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("disturbance |w({t})| = {value} exceeds the declared bound {bound}")]
pub struct BoundExceeded {
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

impl DisturbanceSignal {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn windowed(start: f64, end: f64, pulse: Pulse) -> Self {
        Self {
            windows: vec![Window { start, end, pulse }],
            w_bar: None,
        }
    }

    pub fn with_bound(mut self, w_bar: f64) -> Self {
        self.w_bar = Some(w_bar);
        self
    }

    /// `w(t) = sin t` on `[2π, 4π]`.
    pub fn example1() -> Self {
        let tau = std::f64::consts::TAU;
        Self::windowed(
            tau,
            2.0 * tau,
            Pulse::Sine {
                amplitude: 1.0,
                frequency: 1.0,
            },
        )
    }

    /// `w(t) = 0.4` on `[5.3, 8]`, declared bound `0.4`.
    pub fn example2() -> Self {
        Self::windowed(5.3, 8.0, Pulse::Constant { value: 0.4 }).with_bound(0.4)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.windows
            .iter()
            .filter(|w| t >= w.start && t <= w.end)
            .map(|w| match w.pulse {
                Pulse::Sine {
                    amplitude,
                    frequency,
                } => amplitude * (frequency * t).sin(),
                Pulse::Constant { value } => value,
            })
            .sum()
    }

    /// Like [`value`](Self::value) but checks the declared bound.
    pub fn checked_value(&self, t: f64) -> Result<f64, BoundExceeded> {
        let value = self.value(t);
        match self.w_bar {
            Some(bound) if value.abs() > bound * (1.0 + 1e-12) => {
                Err(BoundExceeded { t, value, bound })
            }
            _ => Ok(value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_signals() {
        let w1 = DisturbanceSignal::example1();
        assert_eq!(w1.value(1.0), 0.0);
        assert!((w1.value(2.5 * std::f64::consts::PI) - 1.0).abs() < 1e-12);
        let w2 = DisturbanceSignal::example2();
        assert_eq!(w2.value(5.2), 0.0);
        assert_eq!(w2.value(6.0), 0.4);
        assert_eq!(w2.value(8.0), 0.4);
        assert!(w2.checked_value(6.0).is_ok());
    }

    #[test]
    fn bound_is_checked() {
        let w =
            DisturbanceSignal::windowed(0.0, 1.0, Pulse::Constant { value: 0.5 }).with_bound(0.4);
        assert!(w.checked_value(0.5).is_err());
        assert!(w.checked_value(2.0).is_ok());
    }

    #[test]
    fn json_shape() {
        let w = DisturbanceSignal::example2();
        let text = serde_json::to_string(&w).unwrap();
        assert!(text.contains("\"kind\":\"constant\""));
        let back: DisturbanceSignal = serde_json::from_str(&text).unwrap();
        assert_eq!(back, w);
    }
}
