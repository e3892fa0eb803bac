//! Acceptance checks that exercise the whole pipeline: closed forms against a
//! numeric oracle, certificate soundness, the example suites, the flow-bound
//! verifier and benchmark determinism.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod oracle;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use dynstc::certificates::{minimum_dwell, verify_pointwise, CertificateBank};
use dynstc::presets::{example1, example2};
use dynstc::sim::{simulate, DisturbanceSignal, HybridTrajectory, Pulse, SimOptions, Window};
use dynstc::triggering::{
    gamma_iss, gamma_ras, MechanismKind, TriggerConfig, Variant, DEFAULT_DELTA,
};
use dynstc::{fallback_period, mati, mati_tilde, phi_eval, MatiParams};
use dynstc_cli::config::suite;
use dynstc_cli::{cmd_bench, run_experiment, CliError, CommandArgs, MechanismSpec, RunOutput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{:>2}] {}  {} ({}; {:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed(id: u8, title: &'static str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = f();
    Outcome {
        id,
        title,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

fn failed_to_run(id: u8, title: &'static str, err: impl std::fmt::Display) -> Outcome {
    Outcome {
        id,
        title,
        passed: false,
        detail: format!("error: {err}"),
        elapsed: Duration::ZERO,
    }
}

/// Banks and full suite runs shared by several criteria.
pub struct SuiteRuns {
    pub bank1: CertificateBank<f64>,
    pub bank2: CertificateBank<f64>,
    pub example1: Vec<RunOutput>,
    pub example2: Vec<RunOutput>,
}

fn run_suite(name: &str, bank: &CertificateBank<f64>) -> Result<Vec<RunOutput>, CliError> {
    suite(name)?
        .iter()
        .map(|cfg| run_experiment(cfg, bank, None))
        .collect()
}

impl SuiteRuns {
    pub fn new() -> Result<Self, String> {
        let bank1 = example1::bank().map_err(|e| e.to_string())?;
        let bank2 = example2::bank().map_err(|e| e.to_string())?;
        let example1 = run_suite("example1", &bank1).map_err(|e| e.to_string())?;
        let example2 = run_suite("example2", &bank2).map_err(|e| e.to_string())?;
        Ok(Self {
            bank1,
            bank2,
            example1,
            example2,
        })
    }

    fn all(&self) -> impl Iterator<Item = (&RunOutput, &CertificateBank<f64>)> {
        self.example1
            .iter()
            .map(|r| (r, &self.bank1))
            .chain(self.example2.iter().map(|r| (r, &self.bank2)))
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.gen_range(lo.log10()..hi.log10()))
}

/// `(γ, Λ)` draws cycling through the `γ > Λ`, `γ ≈ Λ` and `γ < Λ` branches.
fn branch_draw(rng: &mut ChaCha8Rng, k: usize) -> (f64, f64) {
    let lambda_cap = log_uniform(rng, 0.1, 20.0);
    let ratio = match k % 3 {
        0 => log_uniform(rng, 1.01, 20.0),
        1 => 1.0 + rng.gen_range(-5e-10..5e-10),
        _ => log_uniform(rng, 0.05, 0.99),
    };
    (ratio * lambda_cap, lambda_cap)
}

pub fn mati_oracle() -> Outcome {
    timed(1, "MATI matches the ODE transit-time oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        let mut worst_tilde: f64 = 0.0;
        for k in 0..100 {
            let (gamma, lambda_cap) = branch_draw(&mut rng, k);
            let closed = mati(gamma, lambda_cap).unwrap();
            let numeric = oracle::transit_time(gamma, lambda_cap, 0.0, oracle::DEFAULT_STEPS);
            worst = worst.max((closed - numeric).abs() / numeric);
            let small = rng.gen_range(0.01..0.9);
            let closed = mati_tilde(small, gamma, lambda_cap).unwrap();
            let numeric = oracle::transit_time(gamma, lambda_cap, small, oracle::DEFAULT_STEPS);
            worst_tilde = worst_tilde.max((closed - numeric).abs() / numeric);
        }
        let mut seam: f64 = 0.0;
        for lambda_cap in [0.1f64, 0.5, 1.0, 3.0, 10.0, 57.0] {
            for s in [1.0 - 1e-6, 1.0 + 1e-6] {
                seam =
                    seam.max((mati(lambda_cap * s, lambda_cap).unwrap() - 1.0 / lambda_cap).abs());
            }
        }
        (
            worst < 1e-6 && worst_tilde < 1e-6 && seam < 1e-4,
            format!("worst rel err {worst:.1e}, finite-λ {worst_tilde:.1e}, seam {seam:.1e}"),
        )
    })
}

pub fn phi_window() -> Outcome {
    timed(2, "φ stays in [λ, 1/λ] and decreases", || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut bad = 0usize;
        for k in 0..100 {
            let (gamma, lambda_cap) = branch_draw(&mut rng, k);
            let small = rng.gen_range(0.01..0.95);
            let params = MatiParams::new(gamma, lambda_cap, small).unwrap();
            let window = params.window();
            let mut last = f64::INFINITY;
            for i in 0..=200 {
                let phi = phi_eval(window * i as f64 / 200.0, &params).unwrap();
                let inside = phi >= small * (1.0 - 1e-9) && phi <= (1.0 + 1e-9) / small;
                if !inside || phi > last * (1.0 + 1e-12) {
                    bad += 1;
                }
                last = phi;
            }
        }
        (
            bad == 0,
            format!("100 draws × 201 points, {bad} violations"),
        )
    })
}

pub fn certificate_soundness(runs: &SuiteRuns) -> Outcome {
    timed(3, "pointwise certificate verification", || {
        let r1 = verify_pointwise(
            &runs.bank1,
            example1::embedding,
            &example1::system(),
            example1::sampling_region,
            10_000,
            0,
        );
        let r2 = verify_pointwise(
            &runs.bank2,
            example2::embedding,
            &example2::system(),
            example2::sampling_region,
            10_000,
            0,
        );
        match (r1, r2) {
            (Ok(a), Ok(b)) => (
                a.worst_margin() >= -1e-6 && b.worst_margin() >= -1e-6,
                format!(
                    "worst margins {:.3e} / {:.3e} over 10^4 samples each",
                    a.worst_margin(),
                    b.worst_margin()
                ),
            ),
            (a, b) => (
                false,
                format!("verification error: {:?} {:?}", a.err(), b.err()),
            ),
        }
    })
}

pub fn fallback_band(runs: &SuiteRuns) -> Outcome {
    timed(4, "robot-arm fall-back period in [0.09, 0.35] s", || {
        let h = fallback_period(&runs.bank1, 0, DEFAULT_DELTA).unwrap();
        ((0.09..=0.35).contains(&h), format!("fall-back {h:.5} s"))
    })
}

fn bounds_hold(runs: &[RunOutput]) -> (usize, usize, f64) {
    let failing = runs.iter().filter(|r| !r.report.passed()).count();
    let skipped = runs.iter().map(|r| r.report.flows_skipped).sum();
    let worst = runs
        .iter()
        .map(|r| r.report.worst_ratio)
        .fold(0.0, f64::max);
    (failing, skipped, worst)
}

pub fn flow_bound_oracle(runs: &SuiteRuns) -> Outcome {
    timed(
        5,
        "flow bounds hold on the suites and fail for halved γ",
        || {
            let all: Vec<RunOutput> = runs
                .example1
                .iter()
                .chain(&runs.example2)
                .cloned()
                .collect();
            let (failing, skipped, worst) = bounds_hold(&all);
            let halved1 = runs.bank1.with_scaled_gamma(0.5);
            let halved2 = runs.bank2.with_scaled_gamma(0.5);
            let negative = run_suite("example1", &halved1).and_then(|mut a| {
                a.extend(run_suite("example2", &halved2)?);
                Ok(a)
            });
            let pointwise = [
                verify_pointwise(
                    &halved1,
                    example1::embedding,
                    &example1::system(),
                    example1::sampling_region,
                    10_000,
                    0,
                ),
                verify_pointwise(
                    &halved2,
                    example2::embedding,
                    &example2::system(),
                    example2::sampling_region,
                    10_000,
                    0,
                ),
            ]
            .iter()
            .map(|r| r.as_ref().map_or(f64::NAN, |r| r.worst_margin()))
            .fold(f64::INFINITY, f64::min);
            let (neg_detected, neg_detail) = match negative {
                Ok(neg) => {
                    let (neg_failing, _, neg_worst) = bounds_hold(&neg);
                    (
                    neg_failing > 0,
                    format!(
                        "halved γ: {neg_failing}/{} runs flagged, worst ratio {neg_worst:.4} (pointwise margin {pointwise:.2e})",
                        neg.len()
                    ),
                )
                }
                Err(e) => (false, format!("halved γ run error: {e}")),
            };
            (
            failing == 0 && neg_detected,
            format!(
                "{failing}/{} suite runs flagged, worst ratio {worst:.4}, {skipped} uncertified flows skipped; {neg_detail}",
                all.len()
            ),
        )
        },
    )
}

fn dwell_bound(run: &RunOutput, bank: &CertificateBank<f64>) -> f64 {
    match run.mechanism {
        MechanismSpec::Periodic { period } => period,
        _ => minimum_dwell(bank, DEFAULT_DELTA),
    }
}

pub fn minimum_dwell_time(runs: &SuiteRuns) -> Outcome {
    timed(6, "inter-event gaps respect the minimum dwell time", || {
        let mut gaps = 0usize;
        let mut short = 0usize;
        let mut worst = f64::INFINITY;
        for (run, bank) in runs.all() {
            let t_min = dwell_bound(run, bank);
            for (g, ev) in run
                .trajectory
                .gaps()
                .iter()
                .zip(&run.trajectory.events[1..])
            {
                gaps += 1;
                worst = worst.min(g / t_min);
                if *g < t_min - 4.0 * f64::EPSILON * ev.t.max(1.0) {
                    short += 1;
                }
            }
        }
        (
            short == 0,
            format!("{gaps} gaps, {short} short, min gap/t_min {worst:.6}"),
        )
    })
}

fn eta_sup(traj: &HybridTrajectory) -> f64 {
    traj.samples[0].eta.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn iss_nominal_decay(runs: &SuiteRuns) -> Outcome {
    timed(
        7,
        "undisturbed robot arm decays within the ISS envelope",
        || {
            let bank = &runs.bank1;
            let cfg = example1::trigger();
            let rate = bank.levels()[0].fallback_set().epsilon.min(cfg.eps_ref);
            let mut detail = Vec::new();
            let mut ok = true;
            for (label, mech) in example1::mechanisms() {
                let traj = simulate(
                    &example1::system(),
                    bank,
                    &cfg,
                    &mech,
                    &example1::X0,
                    &DisturbanceSignal::zero(),
                    example1::horizon(),
                    SimOptions::default(),
                );
                let Ok(traj) = traj else {
                    ok = false;
                    detail.push(format!("{label}: simulation error"));
                    continue;
                };
                let scale = traj.samples[0].v.max(eta_sup(&traj));
                let envelope = |t: f64| (-rate * t).exp() * scale + 1e-9;
                ok &= traj.events.iter().all(|ev| ev.v <= envelope(ev.t));
                let ratio = traj.events[1..]
                    .iter()
                    .map(|ev| ev.v / envelope(ev.t))
                    .fold(0.0, f64::max);
                detail.push(format!("{label} max V/envelope {ratio:.3}"));
            }
            (ok, detail.join(", "))
        },
    )
}

pub fn sample_count_band(runs: &SuiteRuns) -> Outcome {
    timed(8, "cubic example sample counts", || {
        let dynamic: Vec<(String, usize)> = runs
            .example2
            .iter()
            .filter(|r| r.mechanism.dynamic().is_some())
            .map(|r| (r.mechanism.label().to_string(), r.summary.num_events))
            .collect();
        let baseline = runs
            .example2
            .iter()
            .find(|r| r.mechanism == MechanismSpec::LevelAdaptive)
            .map(|r| r.summary.num_events)
            .unwrap_or(0);
        let counts: Vec<usize> = dynamic.iter().map(|d| d.1).collect();
        let lo = counts.iter().copied().min().unwrap_or(0);
        let hi = counts.iter().copied().max().unwrap_or(0);
        let in_band = counts.iter().all(|&n| (30..=300).contains(&n));
        let reduction = counts.iter().all(|&n| 5 * n <= baseline);
        let spread = lo > 0 && hi as f64 <= 1.5 * lo as f64;
        let listing: Vec<String> = dynamic.iter().map(|(l, n)| format!("{l} {n}")).collect();
        (
            in_band && reduction && spread,
            format!(
                "{}, level-adaptive {baseline}; band {}, ≥5× reduction {}, spread {}",
                listing.join(" / "),
                if in_band { "ok" } else { "FAIL" },
                if reduction { "ok" } else { "FAIL" },
                if spread { "ok" } else { "FAIL" }
            ),
        )
    })
}

/// Disturbance signals with `|w| ≤ w̄` used for the invariance check.
pub fn bounded_test_signals(w_bar: f64, horizon: f64) -> Vec<(&'static str, DisturbanceSignal)> {
    let constant = |value| {
        DisturbanceSignal::windowed(0.0, horizon, Pulse::Constant { value }).with_bound(w_bar)
    };
    let switching = DisturbanceSignal {
        windows: (0..(2.0 * horizon).ceil() as usize)
            .map(|k| Window {
                start: 0.5 * k as f64,
                end: 0.5 * (k + 1) as f64,
                pulse: Pulse::Constant {
                    value: if k % 2 == 0 { w_bar } else { -w_bar },
                },
            })
            .collect(),
        w_bar: Some(w_bar),
    };
    vec![
        ("reference", example2::disturbance()),
        ("zero", DisturbanceSignal::zero().with_bound(w_bar)),
        ("+w̄", constant(w_bar)),
        ("−w̄", constant(-w_bar)),
        (
            "sine",
            DisturbanceSignal::windowed(
                0.0,
                horizon,
                Pulse::Sine {
                    amplitude: w_bar,
                    frequency: 3.0,
                },
            )
            .with_bound(w_bar),
        ),
        ("switching", switching),
    ]
}

pub fn ras_invariance(runs: &SuiteRuns) -> Outcome {
    timed(
        9,
        "cubic example stays in the region and the target set",
        || {
            let cfg = example2::trigger();
            let Variant::Ras { w_bar, c_w, c_max } = cfg.variant else {
                return (false, "preset is not RAS".into());
            };
            let mut checked = 0usize;
            let mut failures = Vec::new();
            let mut peak: f64 = 0.0;
            let mut peak_inside: f64 = 0.0;
            for (signal, w) in bounded_test_signals(w_bar, example2::HORIZON) {
                for (label, mech) in example2::mechanisms() {
                    let traj = simulate(
                        &example2::system(),
                        &runs.bank2,
                        &cfg,
                        &mech,
                        &example2::X0,
                        &w,
                        example2::HORIZON,
                        SimOptions::default(),
                    );
                    let Ok(traj) = traj else {
                        failures.push(format!("{signal}/{label}: error"));
                        continue;
                    };
                    checked += 1;
                    let v_max = traj.samples.iter().map(|s| s.v).fold(0.0, f64::max);
                    peak = peak.max(v_max);
                    let entry = traj.events.iter().position(|e| e.v <= c_w);
                    let after = entry.map_or(0.0, |k| {
                        traj.events[k..].iter().map(|e| e.v).fold(0.0, f64::max)
                    });
                    peak_inside = peak_inside.max(after);
                    if v_max > c_max + 1e-6 || after > c_w + 1e-6 || entry.is_none() {
                        failures.push(format!("{signal}/{label}"));
                    }
                }
            }
            (
                failures.is_empty(),
                format!(
                    "{checked} runs, peak V {peak:.3}, peak event V after entry {peak_inside:.4}{}",
                    if failures.is_empty() {
                        String::new()
                    } else {
                        format!(", failing: {}", failures.join(" "))
                    }
                ),
            )
        },
    )
}

pub fn reductions(runs: &SuiteRuns) -> Outcome {
    timed(10, "reduction equivalences", || {
        let bank = &runs.bank1;
        let iss = example1::trigger();
        let ras = TriggerConfig {
            variant: Variant::Ras {
                w_bar: 0.0,
                c_w: 1e-3,
                c_max: 1e6,
            },
            ..iss
        };
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut mismatches = 0usize;
        let mut fir_mismatches = 0usize;
        let fir = MechanismKind::Fir { m: 1 };
        for _ in 0..1000 {
            let v = log_uniform(&mut rng, 1e-14, 1e2);
            let c = v * log_uniform(&mut rng, 0.1, 10.0);
            let a = gamma_iss(v, c, bank, &iss);
            match gamma_ras(v, c, bank, &ras) {
                Ok(b)
                    if a.interval.to_bits() == b.interval.to_bits()
                        && a.set_index == b.set_index
                        && a.level == b.level => {}
                _ => mismatches += 1,
            }
            let state = fir.initial_state(c, &iss).unwrap();
            let next = state.s_update(v, a.interval, &iss);
            if state.c_value(v, &iss).to_bits() != v.to_bits()
                || next.c_value(c, &iss).to_bits() != c.to_bits()
            {
                fir_mismatches += 1;
            }
        }
        let telescoping = simulate(
            &example1::system(),
            bank,
            &iss,
            &MechanismKind::Ref,
            &example1::X0,
            &example1::disturbance(),
            example1::horizon(),
            SimOptions::default(),
        )
        .map(|traj| {
            let eta0 = traj.samples[0].eta[0];
            traj.samples
                .iter()
                .filter(|s| s.event)
                .map(|s| {
                    let ev = &traj.events[s.j - 1];
                    let expected = (-iss.eps_ref * (ev.t + ev.interval)).exp() * eta0;
                    (s.eta[0] - expected).abs() / expected
                })
                .fold(0.0, f64::max)
        });
        let tele = telescoping.unwrap_or(f64::INFINITY);
        (
            mismatches == 0 && fir_mismatches == 0 && tele <= 1e-12,
            format!(
                "RAS(w̄=0)≠ISS on {mismatches}/1000, FIR(m=1) C≠V on {fir_mismatches}/1000, REF telescoping rel err {tele:.1e}"
            ),
        )
    })
}

fn bench_once(config: &Path, out: &Path) -> Result<(String, String), CliError> {
    let args = CommandArgs {
        config: Some(config.to_path_buf()),
        out: Some(out.to_path_buf()),
        ..CommandArgs::default()
    };
    cmd_bench(&args).map(|b| (b.table, b.csv))
}

fn directory_bytes(dir: &Path) -> std::io::Result<Vec<(PathBuf, Vec<u8>)>> {
    let mut files: Vec<_> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let bytes = fs::read(&p)?;
            Ok((p.strip_prefix(dir).unwrap().to_path_buf(), bytes))
        })
        .collect()
}

pub fn bench_determinism(configs: &Path) -> Outcome {
    timed(11, "bench output is byte-identical across runs", || {
        let mut compared = 0usize;
        let mut differing = Vec::new();
        for name in ["bench_example1.json", "bench_example2.json"] {
            let dirs = [tempfile::tempdir(), tempfile::tempdir()];
            let [Ok(a), Ok(b)] = dirs else {
                return (false, "cannot create temporary directories".into());
            };
            let cfg = configs.join(name);
            match (bench_once(&cfg, a.path()), bench_once(&cfg, b.path())) {
                (Ok(x), Ok(y)) if x == y => {}
                (Ok(_), Ok(_)) => differing.push(format!("{name}: table")),
                (Err(e), _) | (_, Err(e)) => return (false, format!("{name}: {e}")),
            }
            match (directory_bytes(a.path()), directory_bytes(b.path())) {
                (Ok(fa), Ok(fb)) => {
                    compared += fa.len();
                    if fa != fb {
                        differing.push(name.to_string());
                    }
                }
                _ => return (false, format!("{name}: cannot read outputs")),
            }
        }
        (
            differing.is_empty(),
            format!("{compared} files compared, {} differing", differing.len()),
        )
    })
}

/// Runs every criterion in order.
pub fn run_all(configs: &Path) -> Vec<Outcome> {
    let mut out = vec![mati_oracle(), phi_window()];
    match SuiteRuns::new() {
        Ok(runs) => {
            out.push(certificate_soundness(&runs));
            out.push(fallback_band(&runs));
            out.push(flow_bound_oracle(&runs));
            out.push(minimum_dwell_time(&runs));
            out.push(iss_nominal_decay(&runs));
            out.push(sample_count_band(&runs));
            out.push(ras_invariance(&runs));
            out.push(reductions(&runs));
        }
        Err(e) => {
            let titles = [
                (3, "pointwise certificate verification"),
                (4, "robot-arm fall-back period"),
                (5, "flow bounds"),
                (6, "minimum dwell time"),
                (7, "ISS envelope"),
                (8, "sample counts"),
                (9, "region invariance"),
                (10, "reduction equivalences"),
            ];
            out.extend(titles.iter().map(|(id, t)| failed_to_run(*id, t, &e)));
        }
    }
    out.push(bench_determinism(configs));
    out
}
