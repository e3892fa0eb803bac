use std::fmt::Write;

use dynstc::certificates::{fallback_period, CertificateBank};
use dynstc::triggering::DEFAULT_DELTA;

use crate::error::CliError;

/// Reference count of the static mechanism of Tiberi et al. for the cubic
/// example.
pub const TIBERI_EVENTS: usize = 12907;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub name: String,
    pub mechanism: String,
    pub events: usize,
    pub fallback_events: usize,
    pub mean_interval: f64,
    pub min_interval: f64,
    pub max_interval: f64,
    pub final_v: f64,
    pub bound_ok: bool,
}

pub fn render_certify(bank: &CertificateBank<f64>) -> Result<String, CliError> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5}  {:>10}  {:>8}  {:>10}  {:>10}  {:>10}  {:>4}",
        "level", "c", "eps1", "gamma1", "L1", "fallback", "sets"
    );
    for (i, level) in bank.levels().iter().enumerate() {
        let s = level.fallback_set();
        let c = if level.is_global() {
            "inf".to_string()
        } else {
            format!("{:.4}", level.c)
        };
        let period = fallback_period(bank, i, DEFAULT_DELTA)?;
        let _ = writeln!(
            out,
            "{:>5}  {:>10}  {:>8.4}  {:>10.4}  {:>10.4}  {:>10.5}  {:>4}",
            i,
            c,
            s.epsilon,
            s.gamma,
            s.l_gain,
            period,
            level.sets.len()
        );
    }
    Ok(out)
}

pub fn render_bench(rows: &[BenchRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0).max(10);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>6}  {:>8}  {:>9}  {:>9}  {:>9}  {:>11}  {:>5}",
        "experiment", "events", "fallback", "mean", "min", "max", "final V", "bound"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>8}  {:>9.5}  {:>9.5}  {:>9.5}  {:>11.4e}  {:>5}",
            r.name,
            r.events,
            r.fallback_events,
            r.mean_interval,
            r.min_interval,
            r.max_interval,
            r.final_v,
            if r.bound_ok { "ok" } else { "FAIL" }
        );
    }
    let _ = writeln!(
        out,
        "reference: static STC of Tiberi et al. on the cubic example, {TIBERI_EVENTS} events (external, not reproduced)"
    );
    out
}

pub fn render_bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "experiment,mechanism,events,fallback_events,mean_interval,min_interval,max_interval,final_V,bound_ok\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.name,
            r.mechanism,
            r.events,
            r.fallback_events,
            r.mean_interval,
            r.min_interval,
            r.max_interval,
            r.final_v,
            u8::from(r.bound_ok)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_has_header_and_footer() {
        let text = render_bench(&[]);
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("external, not reproduced"));
        assert_eq!(render_bench_csv(&[]).lines().count(), 1);
    }
}
