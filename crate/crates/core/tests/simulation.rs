use std::sync::OnceLock;

use dynstc::certificates::{CertificateBank, LevelCertificate, ParameterSet};
use dynstc::presets::{example1, example2};
use dynstc::sim::{
    check_prop1_bound, flow, simulate, simulate_periodic, DisturbanceSignal, HybridState,
    LinearSystem, Period, SimError, SimOptions,
};
use dynstc::triggering::{MechanismKind, MechanismState, TriggerConfig, TriggerError};
use nalgebra::DMatrix;

fn bank1() -> CertificateBank<f64> {
    static BANK: OnceLock<CertificateBank<f64>> = OnceLock::new();
    BANK.get_or_init(|| example1::bank().unwrap()).clone()
}

fn bank2() -> CertificateBank<f64> {
    static BANK: OnceLock<CertificateBank<f64>> = OnceLock::new();
    BANK.get_or_init(|| example2::bank().unwrap()).clone()
}

fn decaying() -> LinearSystem {
    LinearSystem {
        a: -DMatrix::<f64>::identity(2, 2),
        b: DMatrix::zeros(2, 2),
        e: DMatrix::zeros(2, 1),
    }
}

fn unit_bank() -> CertificateBank<f64> {
    CertificateBank::new(
        DMatrix::identity(2, 2),
        1.0,
        vec![LevelCertificate {
            c: f64::INFINITY,
            sets: vec![ParameterSet::new(0.5, 1.0, 1.0).unwrap()],
        }],
    )
    .unwrap()
}

fn ex1_run(
    mechanism: MechanismKind<f64>,
    horizon: f64,
    dt: Option<f64>,
) -> dynstc::HybridTrajectory {
    simulate(
        &example1::system(),
        &bank1(),
        &example1::trigger(),
        &mechanism,
        &example1::X0,
        &example1::disturbance(),
        horizon,
        SimOptions { dt },
    )
    .unwrap()
}

#[test]
fn flow_matches_linear_solution() {
    let mut state = HybridState::initial(vec![1.0, -2.0], MechanismState::reference(0.0).unwrap());
    state.tau_max = 1.3;
    let (end, points) = flow(
        &state,
        &decaying(),
        &DisturbanceSignal::zero(),
        0.0,
        1e-3,
        1.3,
    )
    .unwrap();
    assert_eq!(end.tau, 1.3);
    assert_eq!(points.last().unwrap().0, 1.3);
    for (tau, x) in &points {
        assert!((x[0] - (-tau).exp()).abs() < 1e-8);
        assert!((x[1] + 2.0 * (-tau).exp()).abs() < 1e-8);
    }
    assert!((end.e[0] - (1.0 - (-1.3f64).exp())).abs() < 1e-8);
}

#[test]
fn flow_rejects_overshoot() {
    let mut state = HybridState::initial(vec![1.0, 0.0], MechanismState::reference(0.0).unwrap());
    state.tau_max = 0.5;
    let err = flow(
        &state,
        &decaying(),
        &DisturbanceSignal::zero(),
        0.0,
        1e-3,
        0.6,
    );
    assert!(matches!(err, Err(SimError::InvalidInput(_))));
}

#[test]
fn equilibrium_stays_put() {
    let traj = simulate(
        &example2::system(),
        &bank2(),
        &example2::trigger(),
        &MechanismKind::Ref,
        &[0.0, 0.0],
        &DisturbanceSignal::zero(),
        2.0,
        SimOptions::default(),
    )
    .unwrap();
    assert!(traj
        .samples
        .iter()
        .all(|s| s.x == vec![0.0, 0.0] && s.v == 0.0));
}

#[test]
fn short_horizons() {
    let traj = ex1_run(MechanismKind::Ref, 0.05, None);
    assert_eq!(traj.events.len(), 1);
    assert_eq!(traj.samples.last().unwrap().t, 0.05);
    let zero = ex1_run(MechanismKind::Ref, 0.0, None);
    assert_eq!(zero.events.len(), 1);
    assert_eq!(zero.samples.len(), 2);
}

#[test]
fn period_equal_to_horizon_samples_twice() {
    let traj = simulate_periodic(
        &decaying(),
        &unit_bank(),
        Period::Fixed(0.7),
        &[1.0, 1.0],
        &DisturbanceSignal::zero(),
        0.7,
        SimOptions::default(),
    )
    .unwrap();
    assert_eq!(traj.events.len(), 2);
    assert_eq!(traj.events[1].t, 0.7);
    traj.validate().unwrap();
}

#[test]
fn fir_buffer_after_first_jump() {
    let traj = ex1_run(MechanismKind::Fir { m: 3 }, 0.5, None);
    let post = traj.samples.iter().find(|s| s.event).unwrap();
    let ev = traj.events[0];
    let expected = (-example1::EPS_REF * ev.interval).exp() * ev.v;
    assert_eq!(post.eta.len(), 2);
    assert!((post.eta[1] - expected).abs() <= 1e-15 * expected);
}

#[test]
fn origin_gets_the_longest_window() {
    let bank = bank1();
    let cfg = example1::trigger();
    let traj = simulate(
        &example1::system(),
        &bank,
        &cfg,
        &MechanismKind::Ref,
        &[0.0, 0.0],
        &DisturbanceSignal::zero(),
        0.01,
        SimOptions::default(),
    )
    .unwrap();
    let level = &bank.levels()[0];
    let first = level.fallback_set();
    let expected = level.sets[1..]
        .iter()
        .map(|s| cfg.delta * dynstc::mati(s.gamma, s.clamped_rate(cfg.delta)).unwrap())
        .fold(
            cfg.delta * dynstc::mati(first.gamma, first.matched_rate()).unwrap(),
            f64::max,
        );
    assert_eq!(traj.events[0].interval, expected);
}

#[test]
fn runs_are_deterministic() {
    let a = ex1_run(MechanismKind::Iir { r1: 0.9, r2: 0.1 }, 3.0, None);
    let b = ex1_run(MechanismKind::Iir { r1: 0.9, r2: 0.1 }, 3.0, None);
    assert_eq!(a, b);
    assert_eq!(a.to_csv_string(), b.to_csv_string());
}

#[test]
fn step_refinement_converges() {
    let coarse = ex1_run(MechanismKind::Ref, 3.0, Some(1e-3));
    let fine = ex1_run(MechanismKind::Ref, 3.0, Some(5e-4));
    assert_eq!(coarse.events.len(), fine.events.len());
    let (vc, vf) = (coarse.summary().final_v, fine.summary().final_v);
    assert!((vc - vf).abs() <= 1e-5 * vf.abs().max(1e-12));
}

#[test]
fn example_trajectories_are_consistent() {
    for (_, mech) in example1::mechanisms() {
        let traj = ex1_run(mech, 6.0, None);
        traj.validate().unwrap();
        assert!(check_prop1_bound(&traj, 1e-6).passed());
        let csv = traj.to_csv_string();
        assert_eq!(
            csv.lines().next().unwrap(),
            "t,j,x1,x2,V,interval,event_flag,level,fallback_flag"
        );
        assert_eq!(csv.lines().count(), traj.samples.len() + 1);
        let summary = traj.summary();
        assert_eq!(summary.num_events, traj.events.len());
        assert!(summary.min_interval <= summary.max_interval);
        let json = serde_json::to_value(summary).unwrap();
        assert!(json.get("final_V").is_some());
    }
}

#[test]
fn out_of_region_start_is_rejected() {
    let err = simulate(
        &example2::system(),
        &bank2(),
        &example2::trigger(),
        &MechanismKind::Ref,
        &[10.0, 10.0],
        &example2::disturbance(),
        1.0,
        SimOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(
        err,
        SimError::Trigger(TriggerError::OutOfRegion { .. })
    ));
}

#[test]
fn iss_config_needs_global_bank() {
    let err = simulate(
        &example2::system(),
        &bank2(),
        &TriggerConfig::iss(1.0),
        &MechanismKind::Ref,
        &[1.0, 1.0],
        &DisturbanceSignal::zero(),
        1.0,
        SimOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(
        err,
        SimError::Trigger(TriggerError::InvalidConfig(_))
    ));
}

#[test]
fn disturbance_above_declared_bound_is_an_error() {
    let w = DisturbanceSignal::windowed(0.0, 1.0, dynstc::sim::Pulse::Constant { value: 1.0 })
        .with_bound(0.4);
    let err = simulate(
        &example2::system(),
        &bank2(),
        &example2::trigger(),
        &MechanismKind::Ref,
        &[1.0, 1.0],
        &w,
        1.0,
        SimOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, SimError::Disturbance(_)));
}

#[test]
fn divergence_is_reported() {
    let unstable = LinearSystem {
        a: DMatrix::identity(2, 2) * 1000.0,
        b: DMatrix::zeros(2, 2),
        e: DMatrix::zeros(2, 1),
    };
    let err = simulate_periodic(
        &unstable,
        &unit_bank(),
        Period::Fixed(2.0),
        &[1.0, 1.0],
        &DisturbanceSignal::zero(),
        2.0,
        SimOptions { dt: Some(1e-2) },
    )
    .unwrap_err();
    assert!(matches!(err, SimError::NonFinite { .. }));
}

#[test]
fn invalid_inputs() {
    let run = |x0: &[f64], horizon: f64, period: f64| {
        simulate_periodic(
            &decaying(),
            &unit_bank(),
            Period::Fixed(period),
            x0,
            &DisturbanceSignal::zero(),
            horizon,
            SimOptions::default(),
        )
    };
    assert!(matches!(
        run(&[1.0], 1.0, 0.1),
        Err(SimError::InvalidInput(_))
    ));
    assert!(matches!(
        run(&[f64::NAN, 0.0], 1.0, 0.1),
        Err(SimError::InvalidInput(_))
    ));
    assert!(matches!(
        run(&[1.0, 0.0], -1.0, 0.1),
        Err(SimError::InvalidInput(_))
    ));
    assert!(matches!(
        run(&[1.0, 0.0], 1.0, 0.0),
        Err(SimError::InvalidInput(_))
    ));
}

#[test]
fn level_adaptive_baseline_uses_fallbacks() {
    let bank = bank2();
    let traj = simulate_periodic(
        &example2::system(),
        &bank,
        Period::LevelAdaptive { delta: 0.999 },
        &example2::X0,
        &example2::disturbance(),
        3.0,
        SimOptions::default(),
    )
    .unwrap();
    for ev in &traj.events {
        let level = ev.level.unwrap();
        assert!(bank.levels()[level].c >= ev.v);
        assert_eq!(
            ev.interval,
            dynstc::fallback_period(&bank, level, 0.999).unwrap()
        );
    }
    assert!(check_prop1_bound(&traj, 1e-6).passed());
}
