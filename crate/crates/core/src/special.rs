//! Complex log-gamma, Coulomb phase shifts and Coulomb radial functions.
//!
//! Sign convention: the Sommerfeld parameter is `eta = -Z/k` for an electron
//! leaving an ion of charge `+Z`, so attraction means `eta < 0`. The radial
//! equation is `u'' = (l(l+1)/rho^2 + 2 eta/rho - 1) u` and the regular
//! solution is normalized to `F ~ sin(rho - eta ln 2rho - l pi/2 + sigma_l)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Parameters of a Coulomb partial wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombParams {
    /// Sommerfeld parameter (negative for attraction).
    pub eta: f64,
    pub l: i32,
    /// Scaled radius `k r`.
    pub rho: f64,
}

impl CoulombParams {
    pub fn new(l: i32, eta: f64, rho: f64) -> Result<Self> {
        if l < 0 {
            return Err(Error::InvalidArgument(format!("negative l = {l}")));
        }
        if !(rho >= 0.0) {
            return Err(Error::InvalidArgument(format!("rho = {rho} must be >= 0")));
        }
        Ok(Self { eta, l, rho })
    }

    /// Sommerfeld parameter for an electron of momentum `k` (a.u.) leaving a
    /// core of charge `+charge`.
    pub fn sommerfeld(charge: f64, k: f64) -> f64 {
        -charge / k
    }
}

fn lanczos_log_gamma(z: Complex64) -> Complex64 {
    let zm1 = z - 1.0;
    let mut series = Complex64::new(LANCZOS_COEFFS[0], 0.0);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (zm1 + 0.5) * t.ln() - t + series.ln()
}

/// Principal branch of `log Gamma(z)`, continuous off the negative real axis.
pub fn log_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!(
            "log-gamma of non-finite argument {z}"
        )));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return Err(Error::Domain(format!("log-gamma pole at z = {}", z.re)));
    }
    if z.re >= 0.5 {
        return Ok(lanczos_log_gamma(z));
    }
    // Shift upward with Gamma(z) = Gamma(z + n) / prod_{k<n} (z + k); the sum
    // of principal logs keeps the imaginary part on the continuous branch.
    let n = (0.5 - z.re).ceil() as usize;
    let mut shift = Complex64::new(0.0, 0.0);
    for k in 0..n {
        shift += (z + k as f64).ln();
    }
    Ok(lanczos_log_gamma(z + n as f64) - shift)
}

/// Coulomb phase shift `sigma_l(eta) = arg Gamma(l + 1 + i eta)`, continuous
/// in `eta`.
pub fn coulomb_phase(l: i32, eta: f64) -> Result<f64> {
    if l < 0 {
        return Err(Error::InvalidArgument(format!("negative l = {l}")));
    }
    if eta == 0.0 {
        return Ok(0.0);
    }
    Ok(lanczos_log_gamma(Complex64::new(l as f64 + 1.0, eta)).im)
}

/// Natural log of the Coulomb normalization constant
/// `C_l(eta) = 2^l e^{-pi eta / 2} |Gamma(l + 1 + i eta)| / (2l + 1)!`.
pub fn log_coulomb_normalization(l: i32, eta: f64) -> f64 {
    let lf = l as f64;
    let lg = lanczos_log_gamma(Complex64::new(lf + 1.0, eta)).re;
    let lfact = lanczos_log_gamma(Complex64::new(2.0 * lf + 2.0, 0.0)).re;
    lf * 2f64.ln() - 0.5 * PI * eta + lg - lfact
}

/// Value and derivative of a radial solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct WaveValue {
    pub u: f64,
    pub du: f64,
}

/// Origin power series of the regular solution, valid for small `rho`.
fn origin_series(l: i32, eta: f64, rho: f64) -> WaveValue {
    let lf = l as f64;
    let log_c = log_coulomb_normalization(l, eta);
    let mut a_prev2 = 0.0;
    let mut a_prev = 1.0;
    let mut sum = 1.0;
    let mut dsum = lf + 1.0;
    let mut power = 1.0;
    let mut small = 0;
    for n in 1..400 {
        let nf = n as f64;
        let a = if n == 1 {
            eta / (lf + 1.0)
        } else {
            (2.0 * eta * a_prev - a_prev2) / ((nf + 2.0 * lf + 1.0) * nf)
        };
        power *= rho;
        let term = a * power;
        sum += term;
        dsum += (nf + lf + 1.0) * term;
        a_prev2 = a_prev;
        a_prev = a;
        if term.abs() < 1e-18 * sum.abs() {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    let scale = (log_c + lf * rho.ln()).exp();
    WaveValue {
        u: scale * rho * sum,
        du: scale * dsum,
    }
}

/// One Taylor step of the Coulomb equation from `c` to `c + h`.
///
/// The coefficients follow from `rho^2 u'' = (L + 2 eta rho - rho^2) u`
/// expanded about `c`; the series converges for `|h| < c`.
fn taylor_step(l: i32, eta: f64, c: f64, h: f64, start: WaveValue) -> WaveValue {
    let big_l = (l * (l + 1)) as f64;
    let diag = big_l + 2.0 * eta * c - c * c;
    let lin = (2.0 * eta - 2.0 * c) * h;
    let quad = h * h;
    // b_n = a_n h^n
    let mut b = [0.0f64; 3]; // b_{n-2}, b_{n-1}, b_n
    let mut b_next = start.du * h; // b_{n+1}
    b[2] = start.u;
    let mut u = start.u + b_next;
    let mut du = b_next / h;
    let scale = start.u.abs() + (start.du * h).abs();
    let mut small = 0;
    for n in 0..400usize {
        let nf = n as f64;
        let numer = (diag - nf * (nf - 1.0)) * b[2] + lin * b[1]
            - quad * b[0]
            - 2.0 * c * (nf + 1.0) * nf * b_next / h;
        let b_new = numer * h * h / (c * c * (nf + 2.0) * (nf + 1.0));
        u += b_new;
        du += (nf + 2.0) * b_new / h;
        b = [b[1], b[2], b_next];
        b_next = b_new;
        if b_new.abs() <= 1e-18 * (scale + u.abs()) {
            small += 1;
            if small >= 3 {
                break;
            }
        } else {
            small = 0;
        }
    }
    WaveValue { u, du }
}

fn step_limit(l: i32, eta: f64, c: f64) -> f64 {
    let big_l = (l * (l + 1)) as f64;
    let k_local = (1.0 - 2.0 * eta / c - big_l / (c * c)).abs().sqrt() + 0.1;
    (0.5 * c).min(1.2 / k_local).min(1.0)
}

/// Propagate a solution from `from` to `to` (either direction) with Taylor
/// steps.
pub(crate) fn propagate(l: i32, eta: f64, from: f64, to: f64, mut value: WaveValue) -> WaveValue {
    let mut c = from;
    let forward = to > from;
    loop {
        let remaining = to - c;
        if remaining.abs() <= 1e-15 * to.abs().max(1.0) {
            return value;
        }
        let h_max = step_limit(l, eta, c);
        let h = if remaining.abs() <= h_max {
            remaining
        } else if forward {
            h_max
        } else {
            -h_max
        };
        value = taylor_step(l, eta, c, h, value);
        c += h;
    }
}

/// Asymptotic expansion of `(F, F', G, G')` for large `rho`.
///
/// Returns `None` when the series has not converged to near machine
/// precision before its terms start growing.
pub(crate) fn asymptotic_fg(l: i32, eta: f64, rho: f64) -> Option<(WaveValue, WaveValue)> {
    asymptotic_fg_with_sigma(l, eta, rho, coulomb_phase(l, eta).ok()?)
}

pub(crate) fn asymptotic_fg_with_sigma(
    l: i32,
    eta: f64,
    rho: f64,
    sigma: f64,
) -> Option<(WaveValue, WaveValue)> {
    if rho <= 0.0 {
        return None;
    }
    let big_l = (l * (l + 1)) as f64;
    let (mut f, mut g, mut fs, mut gs) = (1.0, 0.0, 0.0, 1.0 - eta / rho);
    let (mut fk, mut gk, mut fsk, mut gsk) = (1.0, 0.0, 0.0, 1.0 - eta / rho);
    let mut last = f64::INFINITY;
    let mut converged = false;
    for k in 0..500 {
        let kf = k as f64;
        let denom = (2.0 * kf + 2.0) * rho;
        let a = (2.0 * kf + 1.0) * eta / denom;
        let b = (big_l - kf * (kf + 1.0) + eta * eta) / denom;
        let fk1 = a * fk - b * gk;
        let gk1 = a * gk + b * fk;
        let fsk1 = a * fsk - b * gsk - fk1 / rho;
        let gsk1 = a * gsk + b * fsk - gk1 / rho;
        fk = fk1;
        gk = gk1;
        fsk = fsk1;
        gsk = gsk1;
        f += fk;
        g += gk;
        fs += fsk;
        gs += gsk;
        let size = fk.abs() + gk.abs() + fsk.abs() + gsk.abs();
        if size < 1e-16 {
            converged = true;
            break;
        }
        if k > 2 && size > last {
            break;
        }
        last = size;
    }
    if !converged {
        return None;
    }
    let theta = rho - eta * (2.0 * rho).ln() - 0.5 * l as f64 * PI + sigma;
    let (s, c) = theta.sin_cos();
    let fv = WaveValue {
        u: g * c + f * s,
        du: gs * c + fs * s,
    };
    let gv = WaveValue {
        u: f * c - g * s,
        du: fs * c - gs * s,
    };
    Some((fv, gv))
}

fn origin_radius(eta: f64) -> f64 {
    0.1f64.min(1.0 / (2.0 * eta.abs() + 1.0))
}

/// Regular solution (value and derivative) by origin series plus Taylor
/// propagation.
pub(crate) fn regular_propagated(l: i32, eta: f64, rho: f64) -> WaveValue {
    let rho0 = origin_radius(eta);
    if rho <= rho0 {
        return origin_series(l, eta, rho);
    }
    let start = origin_series(l, eta, rho0);
    propagate(l, eta, rho0, rho, start)
}

/// Regular Coulomb function `F_l(eta, rho)`.
pub fn coulomb_f(l: i32, eta: f64, rho: f64) -> Result<f64> {
    CoulombParams::new(l, eta, rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    if let Some((f, _)) = asymptotic_fg(l, eta, rho) {
        return Ok(f.u);
    }
    Ok(regular_propagated(l, eta, rho).u)
}

/// Regular Coulomb function and its `rho`-derivative.
pub fn coulomb_f_prime(l: i32, eta: f64, rho: f64) -> Result<(f64, f64)> {
    CoulombParams::new(l, eta, rho)?;
    if rho == 0.0 {
        let d = if l == 0 {
            log_coulomb_normalization(0, eta).exp()
        } else {
            0.0
        };
        return Ok((0.0, d));
    }
    if let Some((f, _)) = asymptotic_fg(l, eta, rho) {
        return Ok((f.u, f.du));
    }
    let v = regular_propagated(l, eta, rho);
    Ok((v.u, v.du))
}

/// Smallest radius (from a geometric search) where the asymptotic series
/// converges for `(l, eta)`.
pub(crate) fn asymptotic_radius(l: i32, eta: f64) -> f64 {
    let mut rho = 8.0f64.max(eta.abs());
    while asymptotic_fg(l, eta, rho).is_none() {
        rho *= 1.15;
    }
    rho
}

/// Regular and irregular Coulomb functions `(F_l, G_l)` at `rho > 0`.
///
/// Used for the outgoing/incoming combinations `G +- iF` that enter the
/// continuum-continuum coupling. Below the asymptotic region `G` is
/// propagated inward, where it is the dominant solution.
pub fn coulomb_fg(l: i32, eta: f64, rho: f64) -> Result<(f64, f64)> {
    CoulombParams::new(l, eta, rho)?;
    if rho == 0.0 {
        return Err(Error::Domain(
            "irregular Coulomb function diverges at rho = 0".into(),
        ));
    }
    if let Some((f, g)) = asymptotic_fg(l, eta, rho) {
        return Ok((f.u, g.u));
    }
    let rho_a = asymptotic_radius(l, eta);
    let (_, g_a) = asymptotic_fg(l, eta, rho_a).expect("asymptotic radius converges");
    let g = propagate(l, eta, rho_a, rho, g_a);
    Ok((regular_propagated(l, eta, rho).u, g.u))
}

/// Sample `F_l` and `G_l` on an ascending list of positive radii.
pub(crate) fn sample_fg(l: i32, eta: f64, rhos: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = rhos.len();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    if n == 0 {
        return (f, g);
    }
    let sigma = coulomb_phase(l, eta).expect("l >= 0");
    let rho_a = asymptotic_radius(l, eta);
    let split = rhos.partition_point(|&r| r < rho_a);
    for i in split..n {
        let (fv, gv) = asymptotic_fg_with_sigma(l, eta, rhos[i], sigma)
            .or_else(|| asymptotic_fg(l, eta, rhos[i]))
            .expect("asymptotic series converges beyond the asymptotic radius");
        f[i] = fv.u;
        g[i] = gv.u;
    }
    if split > 0 {
        let rho0 = origin_radius(eta);
        let mut pos = 0.0;
        let mut val = WaveValue { u: 0.0, du: 0.0 };
        let mut started = false;
        for i in 0..split {
            let r = rhos[i];
            if r <= rho0 {
                f[i] = origin_series(l, eta, r).u;
                continue;
            }
            if !started {
                val = origin_series(l, eta, rho0);
                pos = rho0;
                started = true;
            }
            val = propagate(l, eta, pos, r, val);
            pos = r;
            f[i] = val.u;
        }
        let (_, mut gval) = asymptotic_fg_with_sigma(l, eta, rho_a, sigma).expect("converges");
        let mut gpos = rho_a;
        for i in (0..split).rev() {
            gval = propagate(l, eta, gpos, rhos[i], gval);
            gpos = rhos[i];
            g[i] = gval.u;
        }
    }
    (f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_gamma_integers() {
        assert!(log_gamma_complex(Complex64::new(1.0, 0.0)).unwrap().norm() < 1e-15);
        let lg5 = log_gamma_complex(Complex64::new(5.0, 0.0)).unwrap();
        assert_relative_eq!(lg5.re, 24f64.ln(), epsilon = 1e-14);
        assert!(lg5.im.abs() < 1e-15);
    }

    #[test]
    fn log_gamma_poles_rejected() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(
                log_gamma_complex(Complex64::new(x, 0.0)),
                Err(Error::Domain(_))
            ));
        }
    }

    #[test]
    fn log_gamma_reflection_region() {
        // Gamma(0.5) = sqrt(pi); Gamma(-0.5) = -2 sqrt(pi).
        let a = log_gamma_complex(Complex64::new(0.5, 0.0)).unwrap();
        assert_relative_eq!(a.re, PI.sqrt().ln(), epsilon = 1e-14);
        let b = log_gamma_complex(Complex64::new(-0.5, 0.0)).unwrap();
        assert_relative_eq!(b.re, (2.0 * PI.sqrt()).ln(), epsilon = 1e-14);
        assert_relative_eq!(b.im.abs(), PI, epsilon = 1e-14);
    }

    #[test]
    fn coulomb_phase_trivial() {
        assert_eq!(coulomb_phase(0, 0.0).unwrap(), 0.0);
        assert_eq!(coulomb_phase(3, 0.0).unwrap(), 0.0);
        assert!(coulomb_phase(-1, 0.3).is_err());
    }

    #[test]
    fn free_particle_limits() {
        for &rho in &[0.05, 0.7, 3.0, 17.0, 80.0] {
            assert_relative_eq!(coulomb_f(0, 0.0, rho).unwrap(), rho.sin(), epsilon = 1e-12);
            let j1 = rho.sin() / rho - rho.cos();
            assert_relative_eq!(coulomb_f(1, 0.0, rho).unwrap(), j1, epsilon = 1e-11);
            let (_, g0) = coulomb_fg(0, 0.0, rho).unwrap();
            assert_relative_eq!(g0, rho.cos(), epsilon = 1e-11);
        }
        assert!(coulomb_f(0, 0.0, -1.0).is_err());
    }

    #[test]
    fn propagated_and_asymptotic_agree() {
        for &(l, eta) in &[(0, -1.0), (2, -3.0), (3, 0.8), (1, -9.8)] {
            let rho_a = asymptotic_radius(l, eta);
            let (fa, ga) = asymptotic_fg(l, eta, rho_a * 1.5).unwrap();
            let fp = regular_propagated(l, eta, rho_a * 1.5);
            assert!(
                (fa.u - fp.u).abs() < 1e-10,
                "F l={l} eta={eta}: {} vs {}",
                fa.u,
                fp.u
            );
            assert!((fa.du - fp.du).abs() < 1e-10);
            // Wronskian F'G - FG' = 1.
            let w = fa.du * ga.u - fa.u * ga.du;
            assert_relative_eq!(w, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sampled_grid_matches_pointwise() {
        let rhos: Vec<f64> = (1..400).map(|i| i as f64 * 0.37).collect();
        let (f, g) = sample_fg(2, -2.5, &rhos);
        for (i, &r) in rhos.iter().enumerate().step_by(37) {
            let (fp, gp) = coulomb_fg(2, -2.5, r).unwrap();
            assert!((f[i] - fp).abs() < 1e-9, "F at {r}");
            assert!((g[i] - gp).abs() < 1e-9 * gp.abs().max(1.0), "G at {r}");
        }
    }
}
