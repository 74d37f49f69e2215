mod common;

use arrabbit::special::{coulomb_f, coulomb_fg, coulomb_phase, log_gamma_complex};
use common::{coulomb_f_rk, log_diff, riccati_bessel, stirling_log_gamma};
use num_complex::Complex64;
use proptest::prelude::*;

// (l, eta, rho, F, G) evaluated with mpmath at 30 digits.
const MPMATH_FG: &[(i32, f64, f64, f64, f64)] = &[
    (0, -1.0, 5.0, 0.90941019611717469, 0.13959252776182732),
    (2, -1.0, 5.0, -0.63513233607201772, -0.72340260742041557),
    (1, -0.5, 0.3, 0.055839615273022204, 2.0214587696101333),
    (3, -2.0, 12.0, -0.74698982620057408, 0.58008938178588119),
    (0, -0.3, 60.0, -0.94081782277079326, 0.33151121732806692),
    (4, -1.5, 25.0, -0.66130989247351311, -0.7220683545891132),
    (1, -10.0, 3.0, -0.19164756662251127, 0.57470236155099678),
    (2, 0.5, 8.0, -0.98837946910372898, -0.38908754558195211),
];

const MPMATH_LOGGAMMA: &[(f64, f64, f64, f64)] = &[
    (0.3, -2.7, -3.5198783852427613, 0.32430720910645882),
    (5.5, 1.0, 3.8587865879581753, 1.6176185789905071),
    (1.0, 10.0, -13.637732188247271, 13.802912974229901),
    (-2.5, 0.4, -0.67126841537903435, -8.9823668857205561),
];

#[test]
fn coulomb_fg_matches_mpmath() {
    for &(l, eta, rho, f, g) in MPMATH_FG {
        let (cf, cg) = coulomb_fg(l, eta, rho).unwrap();
        assert!(
            (cf - f).abs() < 1e-9 * f.abs().max(1.0),
            "F l={l} eta={eta} rho={rho}: {cf} vs {f}"
        );
        assert!(
            (cg - g).abs() < 1e-9 * g.abs().max(1.0),
            "G l={l} eta={eta} rho={rho}: {cg} vs {g}"
        );
    }
}

#[test]
fn log_gamma_matches_mpmath_principal_branch() {
    for &(x, y, re, im) in MPMATH_LOGGAMMA {
        let v = log_gamma_complex(Complex64::new(x, y)).unwrap();
        assert!((v.re - re).abs() < 1e-10, "{x}+{y}i: {v}");
        assert!(log_diff(v, Complex64::new(re, im)) < 1e-10, "{x}+{y}i: {v}");
    }
}

#[test]
fn coulomb_f_matches_runge_kutta() {
    for &(l, eta, rho) in &[
        (0, -1.0, 5.0),
        (1, -0.5, 20.0),
        (2, -2.0, 7.5),
        (3, 0.8, 15.0),
    ] {
        let f = coulomb_f(l, eta, rho).unwrap();
        let rk = coulomb_f_rk(l, eta, rho);
        assert!(
            (f - rk).abs() < 1e-6,
            "l={l} eta={eta} rho={rho}: {f} vs {rk}"
        );
    }
}

#[test]
fn free_limit_is_riccati_bessel() {
    for l in 0..=4 {
        for i in 1..=400 {
            let rho = 0.25 * i as f64;
            let f = coulomb_f(l, 0.0, rho).unwrap();
            let j = riccati_bessel(l, rho);
            assert!((f - j).abs() < 1e-8, "l={l} rho={rho}: {f} vs {j}");
        }
    }
}

proptest! {
    #[test]
    fn log_gamma_agrees_with_stirling(x in 0.05f64..30.0, y in -30.0f64..30.0) {
        let z = Complex64::new(x, y);
        let v = log_gamma_complex(z).unwrap();
        let s = stirling_log_gamma(z);
        prop_assert!(log_diff(v, s) < 1e-10 * s.norm().max(1.0), "{z}: {v} vs {s}");
    }

    #[test]
    fn coulomb_phase_recurrence(l in 0i32..8, eta in -20.0f64..20.0) {
        let d = coulomb_phase(l + 1, eta).unwrap() - coulomb_phase(l, eta).unwrap();
        prop_assert!((d - (eta / (l + 1) as f64).atan()).abs() < 1e-12);
    }

    #[test]
    fn wronskian_is_one(l in 0i32..5, eta in -3.0f64..1.0, rho in 0.5f64..60.0) {
        let h = 1e-5;
        let (f0, g0) = coulomb_fg(l, eta, rho).unwrap();
        let (f1, g1) = coulomb_fg(l, eta, rho + h).unwrap();
        let (fm, gm) = coulomb_fg(l, eta, rho - h).unwrap();
        let fp = (f1 - fm) / (2.0 * h);
        let gp = (g1 - gm) / (2.0 * h);
        prop_assert!((fp * g0 - f0 * gp - 1.0).abs() < 1e-5);
    }
}
