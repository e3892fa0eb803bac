use std::io::{self, Write};

use serde::{Deserialize, Serialize};

/// Parameter set that certified one inter-sample flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    pub epsilon: f64,
    pub gamma: f64,
    pub l_gain: f64,
    /// Rate `Λ` that bounds the interval (`L + ε/2` or its clamped variant).
    pub rate: f64,
}

impl ActiveSet {
    /// Growth exponent `max{−ε, 2(L − Λ)}` of the flow bound.
    pub fn growth_rate(&self) -> f64 {
        (-self.epsilon).max(2.0 * (self.l_gain - self.rate))
    }
}

/// One sampling instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    /// Jump count before the jump.
    pub j: usize,
    pub interval: f64,
    pub v: f64,
    /// Dynamic threshold `C(x, η)`; `None` for periodic schemes.
    pub c: Option<f64>,
    pub level: Option<usize>,
    pub set_index: Option<usize>,
    pub fallback: bool,
    /// `None` when the interval is not covered by a certificate.
    pub active: Option<ActiveSet>,
}

/// One logged point `(t, j)` of the hybrid arc.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub j: usize,
    pub x: Vec<f64>,
    pub e: Vec<f64>,
    pub v: f64,
    pub w: f64,
    pub eta: Vec<f64>,
    /// Current `τ_max`.
    pub interval: f64,
    /// Post-jump sample of a sampling instant.
    pub event: bool,
    pub level: Option<usize>,
    pub fallback: bool,
}

/// Disturbance handling used by the flow bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundForm {
    /// Integral of `θ²|w(s)|²` along the logged disturbance.
    Integral { theta: f64 },
    /// Constant `α_w(w̄)` as the disturbance supply.
    Uniform { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridTrajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<EventRecord>,
    pub horizon: f64,
    pub dt: f64,
    pub bound_form: BoundForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub num_events: usize,
    pub min_interval: f64,
    pub max_interval: f64,
    #[serde(rename = "final_V")]
    pub final_v: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("time decreases at sample {0}")]
    TimeDecreasing(usize),
    #[error("jump count changes by more than one at sample {0}")]
    JumpSkipped(usize),
    #[error("jump count changes without an event at sample {0}")]
    UnloggedJump(usize),
    #[error("gap before event {index} is {gap}, logged interval {interval}")]
    GapMismatch {
        index: usize,
        gap: f64,
        interval: f64,
    },
}

impl HybridTrajectory {
    pub fn summary(&self) -> TrajectorySummary {
        let intervals = self.events.iter().map(|e| e.interval);
        TrajectorySummary {
            num_events: self.events.len(),
            min_interval: intervals.clone().fold(f64::INFINITY, f64::min),
            max_interval: intervals.fold(f64::NEG_INFINITY, f64::max),
            final_v: self.samples.last().map_or(f64::NAN, |s| s.v),
        }
    }

    /// Gaps `t_{j+1} − t_j` between consecutive sampling instants.
    pub fn gaps(&self) -> Vec<f64> {
        self.events.windows(2).map(|p| p[1].t - p[0].t).collect()
    }

    /// Checks the hybrid time domain and that event gaps match the logged
    /// intervals.
    pub fn validate(&self) -> Result<(), DomainError> {
        for (i, pair) in self.samples.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if b.t < a.t {
                return Err(DomainError::TimeDecreasing(i + 1));
            }
            match b.j.checked_sub(a.j) {
                Some(0) => {}
                Some(1) if b.event && b.t == a.t => {}
                Some(1) => return Err(DomainError::UnloggedJump(i + 1)),
                _ => return Err(DomainError::JumpSkipped(i + 1)),
            }
        }
        for (index, pair) in self.events.windows(2).enumerate() {
            let gap = pair[1].t - pair[0].t;
            let interval = pair[0].interval;
            let slack = 4.0 * f64::EPSILON * pair[1].t.abs().max(1.0);
            if (gap - interval).abs() > slack {
                return Err(DomainError::GapMismatch {
                    index: index + 1,
                    gap,
                    interval,
                });
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n_x = self.samples.first().map_or(0, |s| s.x.len());
        write!(out, "t,j")?;
        for i in 1..=n_x {
            write!(out, ",x{i}")?;
        }
        writeln!(out, ",V,interval,event_flag,level,fallback_flag")?;
        for s in &self.samples {
            write!(out, "{},{}", s.t, s.j)?;
            for xi in &s.x {
                write!(out, ",{xi}")?;
            }
            let level = s.level.map(|l| l.to_string()).unwrap_or_default();
            writeln!(
                out,
                ",{},{},{},{},{}",
                s.v,
                s.interval,
                u8::from(s.event),
                level,
                u8::from(s.fallback)
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}
