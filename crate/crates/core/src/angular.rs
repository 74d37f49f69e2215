//! Angular-momentum coupling coefficients and spherical harmonics.
//!
//! Everything here uses the Condon-Shortley phase convention. Coupling
//! coefficients are evaluated with the Racah single-sum formula in floating
//! point using a log-factorial table, which is sufficient for the small
//! orbital momenta (l <= 8 or so) that appear in two-photon ionization.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest angular momentum accepted by the coupling routines.
pub const MAX_J: i32 = 40;

const LOG_FACTORIAL_LEN: usize = (3 * MAX_J + 2) as usize;

fn log_factorial(n: i32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LOG_FACTORIAL_LEN);
        t.push(0.0);
        for k in 1..LOG_FACTORIAL_LEN {
            let prev = t[k - 1];
            t.push(prev + (k as f64).ln());
        }
        t
    });
    table[n as usize]
}

fn parity_sign(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// An orbital angular-momentum label `|l m>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AngularMomentumState {
    l: i32,
    m: i32,
}

impl AngularMomentumState {
    pub fn new(l: i32, m: i32) -> Result<Self> {
        if l < 0 {
            return Err(Error::InvalidArgument(format!("negative l = {l}")));
        }
        if m.abs() > l {
            return Err(Error::InvalidArgument(format!(
                "|m| > l for l = {l}, m = {m}"
            )));
        }
        Ok(Self { l, m })
    }

    pub fn l(&self) -> i32 {
        self.l
    }

    pub fn m(&self) -> i32 {
        self.m
    }
}

fn check_j(j: i32, m: i32) -> Result<()> {
    if j < 0 {
        return Err(Error::InvalidArgument(format!(
            "negative angular momentum j = {j}"
        )));
    }
    if j > MAX_J {
        return Err(Error::InvalidArgument(format!(
            "angular momentum j = {j} exceeds supported maximum {MAX_J}"
        )));
    }
    if m.abs() > j {
        return Err(Error::InvalidArgument(format!(
            "|m| > j for j = {j}, m = {m}"
        )));
    }
    Ok(())
}

/// True when `(a, b, c)` satisfy the triangle inequality.
pub fn triangle(a: i32, b: i32, c: i32) -> bool {
    c >= (a - b).abs() && c <= a + b
}

/// Wigner 3j symbol for integer arguments.
pub fn wigner3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> Result<f64> {
    check_j(j1, m1)?;
    check_j(j2, m2)?;
    check_j(j3, m3)?;
    if m1 + m2 + m3 != 0 || !triangle(j1, j2, j3) {
        return Ok(0.0);
    }

    let log_delta =
        log_factorial(j1 + j2 - j3) + log_factorial(j1 - j2 + j3) + log_factorial(-j1 + j2 + j3)
            - log_factorial(j1 + j2 + j3 + 1);
    let log_norm = log_factorial(j1 + m1)
        + log_factorial(j1 - m1)
        + log_factorial(j2 + m2)
        + log_factorial(j2 - m2)
        + log_factorial(j3 + m3)
        + log_factorial(j3 - m3);
    let log_prefactor = 0.5 * (log_delta + log_norm);

    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let log_den = log_factorial(k)
            + log_factorial(j3 - j2 + k + m1)
            + log_factorial(j3 - j1 + k - m2)
            + log_factorial(j1 + j2 - j3 - k)
            + log_factorial(j1 - k - m1)
            + log_factorial(j2 - k + m2);
        sum += parity_sign(k) * (log_prefactor - log_den).exp();
    }
    Ok(parity_sign(j1 - j2 - m3) * sum)
}

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | J M>`.
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> Result<f64> {
    let w = wigner3j(j1, j2, j, m1, m2, -m)?;
    Ok(parity_sign(j1 - j2 + m) * ((2 * j + 1) as f64).sqrt() * w)
}

/// Dipole coupling `<l_i m_i; 1 q | l_f m_f>` for absorption of one photon
/// with spherical polarization component `q`.
///
/// Zero unless `m_f = m_i + q` and `|l_f - l_i| = 1`.
pub fn photon_coupling(l_i: i32, m_i: i32, q: i32, l_f: i32, m_f: i32) -> Result<f64> {
    if !(-1..=1).contains(&q) {
        return Err(Error::InvalidArgument(format!(
            "photon polarization index q = {q} not in {{-1, 0, +1}}"
        )));
    }
    check_j(l_i, m_i)?;
    check_j(l_f, m_f)?;
    if (l_f - l_i).abs() != 1 {
        return Ok(0.0);
    }
    clebsch_gordan(l_i, m_i, 1, q, l_f, m_f)
}

/// `\int Y_{l1 m1} Y*_{l2 m2} Y*_{L M} dOmega`.
///
/// This is the coefficient of `Y_{LM}` in the expansion of the product
/// `Y_{l1 m1} Y*_{l2 m2}`.
pub fn gaunt(l1: i32, m1: i32, l2: i32, m2: i32, big_l: i32, big_m: i32) -> Result<f64> {
    check_j(l1, m1)?;
    check_j(l2, m2)?;
    check_j(big_l, big_m)?;
    if big_m != m1 - m2 || !triangle(l1, l2, big_l) || (l1 + l2 + big_l) % 2 != 0 {
        return Ok(0.0);
    }
    let norm = (((2 * l1 + 1) * (2 * l2 + 1) * (2 * big_l + 1)) as f64 / (4.0 * PI)).sqrt();
    let w0 = wigner3j(l1, l2, big_l, 0, 0, 0)?;
    let w = wigner3j(l1, l2, big_l, m1, -m2, -big_m)?;
    Ok(parity_sign(m2 + big_m) * norm * w0 * w)
}

/// Index of `(l, m)` in the packed arrays returned by [`ylm_table`].
#[inline]
pub fn lm_index(l: i32, m: i32) -> usize {
    (l * l + l + m) as usize
}

/// Normalized associated Legendre functions (Condon-Shortley phase) for
/// `0 <= m <= l <= lmax`, packed with [`lm_index`]. Negative-m slots are left
/// at zero.
pub fn legendre_table(lmax: i32, x: f64) -> Vec<f64> {
    let n = ((lmax + 1) * (lmax + 1)) as usize;
    let mut p = vec![0.0; n];
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            pmm *= -(((2 * m + 1) as f64) / ((2 * m) as f64)).sqrt() * s;
        }
        p[lm_index(m, m)] = pmm;
        if m == lmax {
            break;
        }
        let mut prev2 = pmm;
        let mut prev1 = ((2 * m + 3) as f64).sqrt() * x * pmm;
        p[lm_index(m + 1, m)] = prev1;
        let mut a_prev = ((2 * m + 3) as f64).sqrt();
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let cur = a * (x * prev1 - prev2 / a_prev);
            p[lm_index(l, m)] = cur;
            prev2 = prev1;
            prev1 = cur;
            a_prev = a;
        }
    }
    p
}

/// All `Y_{lm}(theta, phi)` for `l <= lmax`, packed with [`lm_index`].
pub fn ylm_table(lmax: i32, theta: f64, phi: f64) -> Vec<Complex64> {
    let p = legendre_table(lmax, theta.cos());
    let mut out = vec![Complex64::new(0.0, 0.0); p.len()];
    for m in 0..=lmax {
        let phase = Complex64::from_polar(1.0, m as f64 * phi);
        for l in m..=lmax {
            let y = phase * p[lm_index(l, m)];
            out[lm_index(l, m)] = y;
            if m > 0 {
                out[lm_index(l, -m)] = parity_sign(m) * y.conj();
            }
        }
    }
    out
}

/// Complex orthonormal spherical harmonic `Y_{lm}(theta, phi)`.
pub fn ylm(l: i32, m: i32, theta: f64, phi: f64) -> Result<Complex64> {
    if l < 0 || m.abs() > l {
        return Err(Error::InvalidArgument(format!(
            "invalid spherical harmonic indices l = {l}, m = {m}"
        )));
    }
    let p = legendre_table(l, theta.cos());
    let y = Complex64::from_polar(1.0, m.abs() as f64 * phi) * p[lm_index(l, m.abs())];
    if m < 0 {
        Ok(parity_sign(m) * y.conj())
    } else {
        Ok(y)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 0 { 0.0 } else { p0 };
            dp = nf * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn three_j_basic_values() {
        assert_relative_eq!(
            wigner3j(1, 1, 0, 0, 0, 0).unwrap(),
            -1.0 / 3f64.sqrt(),
            epsilon = 1e-14
        );
        // (1 1 1; 1 0 -1) = -1/sqrt(6), cross-checked against sympy.physics.wigner
        assert_relative_eq!(
            wigner3j(1, 1, 1, 1, 0, -1).unwrap(),
            -1.0 / 6f64.sqrt(),
            epsilon = 1e-14
        );
        assert_eq!(wigner3j(1, 2, 4, 0, 0, 0).unwrap(), 0.0);
        assert_eq!(wigner3j(1, 1, 2, 1, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn three_j_rejects_bad_arguments() {
        assert!(matches!(
            wigner3j(-1, 1, 0, 0, 0, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(wigner3j(1, 1, 0, 2, 0, 0).is_err());
        assert!(wigner3j(MAX_J + 1, 1, MAX_J, 0, 0, 0).is_err());
    }

    #[test]
    fn photon_coupling_examples() {
        assert_relative_eq!(
            photon_coupling(0, 0, 1, 1, 1).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            photon_coupling(0, 0, 0, 1, 0).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_eq!(photon_coupling(1, 0, 1, 2, 0).unwrap(), 0.0);
        assert_eq!(photon_coupling(1, 0, 0, 1, 0).unwrap(), 0.0);
        assert!(photon_coupling(1, 0, 2, 2, 2).is_err());
    }

    #[test]
    fn gaunt_trivial_values() {
        let y00 = 1.0 / (4.0 * PI).sqrt();
        assert_relative_eq!(gaunt(0, 0, 0, 0, 0, 0).unwrap(), y00, epsilon = 1e-14);
        assert_relative_eq!(gaunt(2, 2, 2, 2, 0, 0).unwrap(), y00, epsilon = 1e-14);
        assert_eq!(gaunt(1, 0, 1, 0, 1, 0).unwrap(), 0.0);
        assert_eq!(gaunt(1, 1, 1, 0, 2, 0).unwrap(), 0.0);
    }

    #[test]
    fn ylm_values() {
        let y00 = ylm(0, 0, 0.3, 1.1).unwrap();
        assert_relative_eq!(y00.re, 0.282_094_791_773_878_14, epsilon = 1e-15);
        let y10 = ylm(1, 0, 0.0, 0.0).unwrap();
        assert_relative_eq!(y10.re, (3.0 / (4.0 * PI)).sqrt(), epsilon = 1e-15);
        // Y_11 = -sqrt(3/8pi) sin(theta) e^{i phi}
        let y11 = ylm(1, 1, 0.7, 0.4).unwrap();
        let expect = Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * 0.7f64.sin(), 0.4);
        assert_relative_eq!(y11.re, expect.re, epsilon = 1e-15);
        assert_relative_eq!(y11.im, expect.im, epsilon = 1e-15);
        assert!(ylm(1, 2, 0.0, 0.0).is_err());
    }

    #[test]
    fn ylm_table_matches_pointwise() {
        let table = ylm_table(5, 1.234, -0.77);
        for l in 0..=5 {
            for m in -l..=l {
                let y = ylm(l, m, 1.234, -0.77).unwrap();
                assert!((table[lm_index(l, m)] - y).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let total: f64 = w.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-14);
        let x22: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert_relative_eq!(x22, 2.0 / 23.0, epsilon = 1e-14);
    }
}
