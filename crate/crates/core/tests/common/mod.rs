//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// `ln Gamma(z)` from the Stirling series after shifting `Re z` above 20.
/// Only the real part and the imaginary part modulo `2 pi` are meaningful.
pub fn stirling_log_gamma(z: Complex64) -> Complex64 {
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 20.0 {
        shift += w.ln();
        w += 1.0;
    }
    // Bernoulli numbers B_2k / (2k (2k - 1)).
    let coeffs = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in coeffs {
        series += c * p;
        p *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift
}

/// Difference of two complex logarithms of the same number, imaginary part
/// reduced modulo `2 pi`.
pub fn log_diff(a: Complex64, b: Complex64) -> f64 {
    let d = a - b;
    let im = d.im - 2.0 * PI * (d.im / (2.0 * PI)).round();
    d.re.abs().max(im.abs())
}

/// Riccati-Bessel `rho j_l(rho)`, from the power series for small `rho` and
/// the closed forms otherwise.
pub fn riccati_bessel(l: i32, x: f64) -> f64 {
    if x < 1.0 {
        let mut dfact = 1.0;
        for k in 0..=l {
            dfact *= (2 * k + 1) as f64;
        }
        let mut term = x.powi(l) / dfact;
        let mut sum = term;
        for k in 1..40 {
            term *= -x * x / (2.0 * k as f64 * (2 * l + 2 * k + 1) as f64);
            sum += term;
        }
        return x * sum;
    }
    let (s, c) = x.sin_cos();
    let j = match l {
        0 => s / x,
        1 => s / (x * x) - c / x,
        2 => (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x),
        3 => (15.0 / x.powi(3) - 6.0 / x) * s / x - (15.0 / (x * x) - 1.0) * c / x,
        4 => {
            (105.0 / x.powi(4) - 45.0 / (x * x) + 1.0) * s / x
                - (105.0 / x.powi(3) - 10.0 / x) * c / x
        }
        _ => panic!("closed form only for l <= 4"),
    };
    x * j
}

fn factorial(n: i32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `Y_lm` from the explicit associated-Legendre sum, Condon-Shortley phase.
pub fn ylm_direct(l: i32, m: i32, theta: f64, phi: f64) -> Complex64 {
    let am = m.abs();
    let x = theta.cos();
    // Rodrigues form: P_l^m(x) = (-1)^m (1-x^2)^{m/2} d^{l+m}/dx^{l+m} P_l(x),
    // with P_l(x) = 2^-l sum_k (-1)^k C(l,k) C(2l-2k, l) x^{l-2k}.
    let mut deriv = 0.0;
    for k in 0..=l / 2 {
        let pow = l - 2 * k;
        if pow < am {
            continue;
        }
        let coef = (-1f64).powi(k) * factorial(l) / (factorial(k) * factorial(l - k))
            * factorial(2 * l - 2 * k)
            / (factorial(l) * factorial(l - 2 * k));
        let d = factorial(pow) / factorial(pow - am);
        deriv += coef * d * x.powi(pow - am);
    }
    deriv /= 2f64.powi(l);
    let plm = (-1f64).powi(am) * (1.0 - x * x).max(0.0).powf(am as f64 / 2.0) * deriv;
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - am) / factorial(l + am)).sqrt();
    let y = Complex64::from_polar(norm * plm, am as f64 * phi);
    if m < 0 {
        (-1f64).powi(am) * y.conj()
    } else {
        y
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gl_nodes(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `int Y_{l1 m1} Y*_{l2 m2} Y*_{L M} dOmega` by product quadrature, exact
/// for the band limits used here.
pub fn gaunt_quadrature(l1: i32, m1: i32, l2: i32, m2: i32, big_l: i32, big_m: i32) -> f64 {
    let nodes = gl_nodes(24);
    let nphi = 32;
    let mut acc = Complex64::new(0.0, 0.0);
    for &(x, w) in &nodes {
        let theta = x.acos();
        for j in 0..nphi {
            let phi = 2.0 * PI * j as f64 / nphi as f64;
            acc += w
                * (2.0 * PI / nphi as f64)
                * ylm_direct(l1, m1, theta, phi)
                * ylm_direct(l2, m2, theta, phi).conj()
                * ylm_direct(big_l, big_m, theta, phi).conj();
        }
    }
    acc.re
}

/// Regular Coulomb function by RK4 integration of
/// `u'' = (l(l+1)/rho^2 + 2 eta/rho - 1) u` from a series start, normalized
/// against the asymptotic amplitude `u^2 + u'^2 -> 1` over the last cycle.
/// Returns `u(rho_target)`. Accurate to about 1e-7 for moderate `eta`.
pub fn coulomb_f_rk(l: i32, eta: f64, rho_target: f64) -> f64 {
    let f = |r: f64, u: f64| ((l * (l + 1)) as f64 / (r * r) + 2.0 * eta / r - 1.0) * u;
    let r0 = 1e-3_f64;
    // Leading behaviour u ~ r^{l+1} (1 + eta r / (l+1)).
    let c1 = eta / (l + 1) as f64;
    let mut u = r0.powi(l + 1) * (1.0 + c1 * r0);
    let mut v = r0.powi(l) * ((l + 1) as f64 + (l + 2) as f64 * c1 * r0);
    let h = 1e-4;
    let mut r = r0;
    let rho_end = rho_target.max(400.0);
    let mut at_target = None;
    while r < rho_end {
        let k1u = v;
        let k1v = f(r, u);
        let k2u = v + 0.5 * h * k1v;
        let k2v = f(r + 0.5 * h, u + 0.5 * h * k1u);
        let k3u = v + 0.5 * h * k2v;
        let k3v = f(r + 0.5 * h, u + 0.5 * h * k2u);
        let k4u = v + h * k3v;
        let k4v = f(r + h, u + h * k3u);
        let (u_old, r_old) = (u, r);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        r += h;
        if at_target.is_none() && r >= rho_target {
            let t = (rho_target - r_old) / h;
            at_target = Some(u_old + t * (u - u_old));
        }
    }
    // At this range the WKB amplitude correction for the local momentum
    // sqrt(1 - 2 eta / r - l(l+1)/r^2) is applied to u'.
    let p = (1.0 - 2.0 * eta / r - (l * (l + 1)) as f64 / (r * r)).sqrt();
    let amp = (u * u + v * v / (p * p)).sqrt() * p.sqrt();
    at_target.expect("target reached") / amp
}
