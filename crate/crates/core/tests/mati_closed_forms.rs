use dynstc::mati::{coupling_ratio, hybrid_u, mati, mati_tilde, phi_eval, MatiParams};
use proptest::prelude::*;

/// `∫ dφ / (γφ² + 2Λφ + γ)` from `lo` to `hi` by composite Simpson in the
/// angle `ϑ = arctan φ`, where the integrand is `1/(γ + Λ sin 2ϑ)`.
fn transit_quadrature(gamma: f64, lambda_cap: f64, lo: f64, hi: f64) -> f64 {
    let (a, b) = (lo.atan(), hi.atan());
    let n = 20_000;
    let h = (b - a) / n as f64;
    let f = |t: f64| 1.0 / (gamma + lambda_cap * (2.0 * t).sin());
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn mati_matches_quadrature_on_all_branches() {
    for &(g, l) in &[
        (2.0, 1.0),
        (1.0, 1.0),
        (0.5, 1.0),
        (10.0, 0.1),
        (0.1, 10.0),
        (3.0, 2.9),
    ] {
        let exact = transit_quadrature(g, l, 0.0, f64::INFINITY);
        let got = mati(g, l).unwrap();
        assert!(
            (got - exact).abs() / exact < 1e-8,
            "γ={g} Λ={l}: {got} vs {exact}"
        );
    }
}

#[test]
fn mati_tilde_matches_quadrature() {
    for &(lam, g, l) in &[
        (0.2, 2.0, 1.0),
        (0.5, 1.0, 1.0),
        (0.01, 0.5, 2.0),
        (0.9, 4.0, 0.5),
    ] {
        let exact = transit_quadrature(g, l, lam, 1.0 / lam);
        let got = mati_tilde(lam, g, l).unwrap();
        assert!((got - exact).abs() / exact < 1e-8, "{got} vs {exact}");
    }
}

#[test]
fn seam_is_continuous() {
    for l in [0.1f64, 1.0, 7.5] {
        for f in [1.0 - 1e-6, 1.0 + 1e-6, 1.0 - 1e-10, 1.0 + 1e-10] {
            assert!((mati(l * f, l).unwrap() - 1.0 / l).abs() < 1e-4);
        }
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    assert!(mati(0.0, 1.0).is_err());
    assert!(mati(1.0, -1.0).is_err());
    assert!(coupling_ratio(f64::NAN, 1.0).is_err());
    assert!(mati_tilde(1.0, 1.0, 1.0).is_err());
    let p = MatiParams::new(1.0, 1.0, 0.5).unwrap();
    assert!(phi_eval(-0.1, &p).is_err());
    assert!(phi_eval(p.window() * 1.1, &p).is_err());
    assert!(hybrid_u(-1.0, 0.0, 0.0, &p).is_err());
}

#[test]
fn hybrid_u_after_jump_is_v() {
    let p = MatiParams::new(2.0, 1.0, 0.3).unwrap();
    assert_eq!(hybrid_u(5.0, 0.0, 0.0, &p).unwrap(), 5.0);
    let u: f64 = hybrid_u(1.0, 0.5, 0.0, &p).unwrap();
    assert!((u - (1.0 + 2.0 / 0.3 * 0.25)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn phi_stays_in_window_and_decreases(
        g in 0.05f64..20.0,
        l in 0.05f64..20.0,
        lam in 0.01f64..0.99,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        let p = MatiParams::new(g, l, lam).unwrap();
        let w = p.window();
        let (t1, t2) = (w * a.min(b), w * a.max(b));
        let (f1, f2) = (phi_eval(t1, &p).unwrap(), phi_eval(t2, &p).unwrap());
        let tol = 1e-9 / lam;
        prop_assert!(f1 >= lam - tol && f1 <= 1.0 / lam + tol);
        prop_assert!(f2 >= lam - tol && f2 <= 1.0 / lam + tol);
        prop_assert!(f2 <= f1 + tol);
    }

    #[test]
    fn phi_solves_riccati(g in 0.1f64..10.0, l in 0.1f64..10.0, lam in 0.05f64..0.95, s in 0.05f64..0.95) {
        let p = MatiParams::new(g, l, lam).unwrap();
        let tau = s * p.window();
        let h = 1e-6 * p.window();
        let d = (phi_eval(tau + h, &p).unwrap() - phi_eval(tau - h, &p).unwrap()) / (2.0 * h);
        let phi = phi_eval(tau, &p).unwrap();
        let rhs = -2.0 * l * phi - g * (phi * phi + 1.0);
        prop_assert!((d - rhs).abs() <= 1e-4 * rhs.abs().max(1.0));
    }

    #[test]
    fn mati_tilde_increases_to_mati(g in 0.1f64..10.0, l in 0.1f64..10.0) {
        let m = mati(g, l).unwrap();
        let a = mati_tilde(0.5, g, l).unwrap();
        let b = mati_tilde(0.01, g, l).unwrap();
        let c = mati_tilde(1e-8, g, l).unwrap();
        prop_assert!(a <= b && b <= c && c <= m * (1.0 + 1e-12));
        prop_assert!((m - c) / m < 1e-6);
    }

    #[test]
    fn f32_agrees_with_f64(g in 0.1f64..10.0, l in 0.1f64..10.0) {
        let d = mati(g, l).unwrap();
        let s = mati(g as f32, l as f32).unwrap() as f64;
        prop_assert!((d - s).abs() / d < 1e-4);
    }
}
