mod common;

use arrabbit::angular::{clebsch_gordan, gaunt, wigner3j, ylm};
use common::{gaunt_quadrature, ylm_direct};
use proptest::prelude::*;

#[test]
fn ylm_matches_explicit_sum() {
    for l in 0..=6 {
        for m in -l..=l {
            for &(t, p) in &[(0.3, 0.1), (1.2, -2.0), (2.9, 4.0)] {
                let a = ylm(l, m, t, p).unwrap();
                let b = ylm_direct(l, m, t, p);
                assert!((a - b).norm() < 1e-12, "Y{l}{m}({t},{p}): {a} vs {b}");
            }
        }
    }
}

#[test]
fn gaunt_matches_sphere_quadrature() {
    for l1 in 0i32..=4 {
        for l2 in 0..=4 {
            for big_l in 0..=4 {
                for m1 in -l1..=l1 {
                    for m2 in -l2..=l2 {
                        let big_m = m1 - m2;
                        if big_m.abs() > big_l {
                            continue;
                        }
                        let g = gaunt(l1, m1, l2, m2, big_l, big_m).unwrap();
                        let q = gaunt_quadrature(l1, m1, l2, m2, big_l, big_m);
                        assert!(
                            (g - q).abs() < 1e-10,
                            "({l1}{m1},{l2}{m2},{big_l}{big_m}): {g} vs {q}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn clebsch_gordan_orthogonality() {
    for j1 in 0i32..=3 {
        for j2 in 0..=3 {
            for j in (j1 - j2).abs()..=j1 + j2 {
                for jp in (j1 - j2).abs()..=j1 + j2 {
                    for m in -j.min(jp)..=j.min(jp) {
                        let mut s = 0.0;
                        for m1 in -j1..=j1 {
                            let m2 = m - m1;
                            if m2.abs() > j2 {
                                continue;
                            }
                            s += clebsch_gordan(j1, m1, j2, m2, j, m).unwrap()
                                * clebsch_gordan(j1, m1, j2, m2, jp, m).unwrap();
                        }
                        let want = if j == jp { 1.0 } else { 0.0 };
                        assert!(
                            (s - want).abs() < 1e-12,
                            "j1={j1} j2={j2} j={j} j'={jp} m={m}: {s}"
                        );
                    }
                }
            }
        }
    }
}

fn three_j_args() -> impl Strategy<Value = (i32, i32, i32, i32, i32)> {
    (0i32..6, 0i32..6).prop_flat_map(|(a, b)| {
        ((a - b).abs()..=a + b, -a..=a, -b..=b).prop_map(move |(c, ma, mb)| (a, b, c, ma, mb))
    })
}

proptest! {
    #[test]
    fn three_j_column_symmetries((a, b, c, ma, mb) in three_j_args()) {
        let mc = -ma - mb;
        prop_assume!(mc.abs() <= c);
        let w = wigner3j(a, b, c, ma, mb, mc).unwrap();
        let sign = if (a + b + c) % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((wigner3j(b, c, a, mb, mc, ma).unwrap() - w).abs() < 1e-13);
        prop_assert!((wigner3j(b, a, c, mb, ma, mc).unwrap() - sign * w).abs() < 1e-13);
        prop_assert!((wigner3j(a, b, c, -ma, -mb, -mc).unwrap() - sign * w).abs() < 1e-13);
    }

    #[test]
    fn three_j_vanishes_off_projection((a, b, c, ma, mb) in three_j_args(), off in 1i32..3) {
        let mc = -ma - mb + off;
        prop_assume!(mc.abs() <= c);
        prop_assert_eq!(wigner3j(a, b, c, ma, mb, mc).unwrap(), 0.0);
    }
}

#[test]
fn three_j_rejects_bad_arguments() {
    assert!(wigner3j(1, 1, 1, 2, 0, -2).is_err());
}
