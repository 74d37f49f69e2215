//! Laser-field model: XUV harmonic comb, IR carrier phasor, polarization in
//! the spherical (circular) basis and the XUV-IR delay grid.
//!
//! The XUV pulse is treated in the delta-pulse limit, so the delay enters
//! only through the IR phasor evaluated at `t = tau`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `h c` in eV nm.
pub const HC_EV_NM: f64 = 1_239.841_984;
/// `hbar` in eV s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// Propagation axis of a transverse field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Field polarization as spherical components `e_q`, `q = -1, 0, +1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    components: [Complex64; 3],
    phi_y: Option<f64>,
}

impl PolarizationState {
    /// Linear polarization along the laboratory z axis (`e_0 = 1`).
    pub fn linear_z() -> Self {
        Self {
            components: [
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
            phi_y: None,
        }
    }

    /// Build from a Cartesian (complex) field vector, normalized to unit
    /// intensity.
    pub fn from_cartesian(ex: Complex64, ey: Complex64, ez: Complex64) -> Result<Self> {
        let norm = (ex.norm_sqr() + ey.norm_sqr() + ez.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "zero or non-finite field vector".into(),
            ));
        }
        let (ex, ey, ez) = (ex / norm, ey / norm, ez / norm);
        let i = Complex64::i();
        let s2 = std::f64::consts::SQRT_2;
        let plus = (-ex + i * ey) / s2;
        let minus = (ex + i * ey) / s2;
        Ok(Self {
            components: [minus, ez, plus],
            phi_y: None,
        })
    }

    /// Spherical component `e_q`.
    pub fn component(&self, q: i32) -> Complex64 {
        match q {
            -1 => self.components[0],
            0 => self.components[1],
            1 => self.components[2],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Iterator over nonzero `(q, e_q)` pairs.
    pub fn nonzero(&self) -> impl Iterator<Item = (i32, Complex64)> + '_ {
        (-1..=1)
            .map(|q| (q, self.component(q)))
            .filter(|(_, e)| e.norm_sqr() > 0.0)
    }

    /// Normalized circularity `|e_+1|^2 - |e_-1|^2`, in `[-1, 1]`.
    pub fn ellipticity(&self) -> f64 {
        self.component(1).norm_sqr() - self.component(-1).norm_sqr()
    }

    pub fn phi_y(&self) -> Option<f64> {
        self.phi_y
    }

    /// `sum_q |e_q|^2`.
    pub fn intensity(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Spherical components of an equal-amplitude transverse field whose second
/// Cartesian component is phase shifted by `phi_y`.
///
/// For propagation along z the transverse pair is `(x, y)`; along x it is
/// `(y, z)` and along y `(z, x)`. `phi_y = pi/2` along z gives pure `q = +1`.
pub fn circular_components(phi_y: f64, propagation: Axis) -> PolarizationState {
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let b = Complex64::from_polar(std::f64::consts::FRAC_1_SQRT_2, phi_y);
    let zero = Complex64::new(0.0, 0.0);
    let (ex, ey, ez) = match propagation {
        Axis::Z => (a, b, zero),
        Axis::X => (zero, a, b),
        Axis::Y => (b, zero, a),
    };
    let mut state = PolarizationState::from_cartesian(ex, ey, ez).expect("unit vector");
    // Remove rounding residue so the pure-circular case is exactly pure.
    for c in state.components.iter_mut() {
        if c.norm() < 1e-15 {
            *c = zero;
        }
    }
    state.phi_y = Some(phi_y);
    state
}

/// Analytic IR field factor `e^{-i omega tau}`.
pub fn ir_phasor(tau: f64, omega: f64) -> Complex64 {
    Complex64::from_polar(1.0, -omega * tau)
}

/// Angular frequency (rad/s) of a photon of the given energy.
pub fn angular_frequency(photon_ev: f64) -> f64 {
    photon_ev / HBAR_EV_S
}

/// Photon energy (eV) for a wavelength in nm.
pub fn photon_energy_ev(wavelength_nm: f64) -> f64 {
    HC_EV_NM / wavelength_nm
}

/// XUV harmonic comb.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicComb {
    pub driver_wavelength_nm: f64,
    orders: Vec<i32>,
    amplitudes: Vec<f64>,
    optical_phases: Vec<f64>,
    pub include_even: bool,
}

impl HarmonicComb {
    pub fn new(
        driver_wavelength_nm: f64,
        orders: Vec<i32>,
        amplitudes: Option<Vec<f64>>,
        optical_phases: Option<Vec<f64>>,
        include_even: bool,
    ) -> Result<Self> {
        if !(driver_wavelength_nm > 0.0) {
            return Err(Error::InvalidArgument(
                "driver wavelength must be positive".into(),
            ));
        }
        if orders.is_empty() {
            return Err(Error::InvalidArgument("harmonic comb has no orders".into()));
        }
        if orders.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(
                "harmonic orders must be strictly increasing".into(),
            ));
        }
        if orders.iter().any(|&n| n <= 0) {
            return Err(Error::InvalidArgument(
                "harmonic orders must be positive".into(),
            ));
        }
        if !include_even && orders.iter().any(|n| n % 2 == 0) {
            return Err(Error::InvalidArgument(
                "even harmonic orders present but even harmonics are disabled".into(),
            ));
        }
        let n = orders.len();
        let amplitudes = amplitudes.unwrap_or_else(|| vec![1.0; n]);
        let optical_phases = optical_phases.unwrap_or_else(|| vec![0.0; n]);
        if amplitudes.len() != n || optical_phases.len() != n {
            return Err(Error::InvalidArgument(format!(
                "expected {n} amplitudes and phases, got {} and {}",
                amplitudes.len(),
                optical_phases.len()
            )));
        }
        if amplitudes.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::InvalidArgument(
                "harmonic amplitudes must be >= 0".into(),
            ));
        }
        Ok(Self {
            driver_wavelength_nm,
            orders,
            amplitudes,
            optical_phases,
            include_even,
        })
    }

    /// Odd orders `first, first + 2, ..., last` with unit amplitude and zero phase.
    pub fn odd(driver_wavelength_nm: f64, first: i32, last: i32) -> Result<Self> {
        let orders = (first..=last).filter(|n| n % 2 != 0).collect();
        Self::new(driver_wavelength_nm, orders, None, None, false)
    }

    pub fn orders(&self) -> &[i32] {
        &self.orders
    }

    pub fn contains(&self, order: i32) -> bool {
        self.orders.binary_search(&order).is_ok()
    }

    /// Complex field amplitude `A_n e^{i phi_n}` of an order, zero if absent.
    pub fn field(&self, order: i32) -> Complex64 {
        match self.orders.binary_search(&order) {
            Ok(i) => Complex64::from_polar(self.amplitudes[i], self.optical_phases[i]),
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }
}

/// Uniform delay samples on the half-open interval `[start, stop)` (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct DelayGrid {
    start: f64,
    step: f64,
    n: usize,
}

impl DelayGrid {
    pub fn new(start: f64, stop: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "delay grid needs at least one sample".into(),
            ));
        }
        if !(start.is_finite() && stop.is_finite()) || (n > 1 && stop <= start) {
            return Err(Error::InvalidArgument(format!(
                "delay grid needs finite start < stop, got [{start}, {stop})"
            )));
        }
        Ok(Self {
            start,
            step: (stop - start) / n as f64,
            n,
        })
    }

    /// `n` samples spanning `cycles` IR periods starting at zero delay.
    pub fn ir_cycles(
        ir_photon_ev: f64,
        start_cycles: f64,
        stop_cycles: f64,
        n: usize,
    ) -> Result<Self> {
        let period = 2.0 * PI / angular_frequency(ir_photon_ev);
        Self::new(start_cycles * period, stop_cycles * period, n)
    }

    pub fn single(tau: f64) -> Self {
        Self {
            start: tau,
            step: 0.0,
            n: 1,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n)
            .map(|j| self.start + j as f64 * self.step)
            .collect()
    }

    /// Samples per period of a signal at angular frequency `omega`.
    pub fn samples_per_period(&self, omega: f64) -> f64 {
        if self.step == 0.0 {
            return 0.0;
        }
        2.0 * PI / (omega * self.step)
    }
}

/// Complete field specification.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    pub comb: HarmonicComb,
    /// IR photon energy in eV; harmonic `n` has energy `n` times this.
    pub ir_photon_ev: f64,
    pub ip_ev: f64,
    pub xuv_polarization: PolarizationState,
    pub ir_polarization: PolarizationState,
}

impl FieldSpec {
    pub fn ir_omega(&self) -> f64 {
        angular_frequency(self.ir_photon_ev)
    }

    pub fn harmonic_energy(&self, order: i32) -> f64 {
        order as f64 * self.ir_photon_ev
    }

    /// Photoelectron energy after absorbing harmonic `order`.
    pub fn photoelectron_energy(&self, order: i32) -> f64 {
        self.harmonic_energy(order) - self.ip_ev
    }
}

/// One contributing pathway into a photoelectron band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Path {
    /// Single XUV photon of the given order.
    Xuv(i32),
    /// XUV photon of the given order followed by IR absorption.
    XuvPlusIr(i32),
    /// XUV photon of the given order followed by IR emission.
    XuvMinusIr(i32),
}

/// Whether a band sits at an odd (direct) or even (sideband) harmonic position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BandKind {
    Direct,
    Sideband,
}

/// A photoelectron band at `order * ir_photon - ip`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Band {
    pub label: String,
    /// Harmonic position (odd for direct bands, even for sidebands).
    pub order: i32,
    pub energy_ev: f64,
    pub kind: BandKind,
    pub paths: Vec<Path>,
}

impl Band {
    pub fn has_two_photon_paths(&self) -> bool {
        self.paths.iter().any(|p| !matches!(p, Path::Xuv(_)))
    }

    /// Both absorption and emission pathways present, so the yield beats at
    /// `2 omega`.
    pub fn has_rabbit_pair(&self) -> bool {
        self.paths.iter().any(|p| matches!(p, Path::XuvPlusIr(_)))
            && self.paths.iter().any(|p| matches!(p, Path::XuvMinusIr(_)))
    }

    pub fn has_one_photon_path(&self) -> bool {
        self.paths.iter().any(|p| matches!(p, Path::Xuv(_)))
    }
}

/// Photoelectron bands produced by a harmonic comb.
///
/// A band at harmonic position `m` collects `Xuv(m)` when `m` is in the comb,
/// `XuvPlusIr(m - 1)` and `XuvMinusIr(m + 1)` when those orders are. Only
/// bands above threshold are returned, and a two-photon band requires its
/// emission path's intermediate state above threshold.
pub fn band_energies(comb: &HarmonicComb, ip_ev: f64, ir_photon_ev: f64) -> Result<Vec<Band>> {
    if !(ir_photon_ev > 0.0) {
        return Err(Error::InvalidArgument(
            "IR photon energy must be positive".into(),
        ));
    }
    let energy = |m: i32| m as f64 * ir_photon_ev - ip_ev;
    if comb.orders().iter().all(|&n| energy(n) <= 0.0) {
        return Err(Error::EmptySpectrum(format!(
            "all harmonic orders lie below the ionization potential {ip_ev} eV"
        )));
    }
    let lo = comb.orders()[0] - 1;
    let hi = comb.orders()[comb.orders().len() - 1] + 1;
    let mut bands = Vec::new();
    for m in lo..=hi {
        let e = energy(m);
        if e <= 0.0 {
            continue;
        }
        let mut paths = Vec::new();
        if comb.contains(m) {
            paths.push(Path::Xuv(m));
        }
        if comb.contains(m - 1) {
            paths.push(Path::XuvPlusIr(m - 1));
        }
        if comb.contains(m + 1) && energy(m + 1) > 0.0 {
            paths.push(Path::XuvMinusIr(m + 1));
        }
        // A lone two-photon path at the comb edge is not a RABBIT band.
        if paths.is_empty() || (paths.len() == 1 && !matches!(paths[0], Path::Xuv(_))) {
            continue;
        }
        let kind = if m % 2 != 0 {
            BandKind::Direct
        } else {
            BandKind::Sideband
        };
        let prefix = match kind {
            BandKind::Direct => "DB",
            BandKind::Sideband => "SB",
        };
        bands.push(Band {
            label: format!("{prefix}{m}"),
            order: m,
            energy_ev: e,
            kind,
            paths,
        });
    }
    Ok(bands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_in_plane() {
        let p = circular_components(0.0, Axis::Z);
        assert_relative_eq!(
            p.component(1).norm(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            p.component(-1).norm(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_eq!(p.component(0).norm(), 0.0);
        assert!(p.ellipticity().abs() < 1e-15);
    }

    #[test]
    fn circular_is_pure_plus() {
        let p = circular_components(PI / 2.0, Axis::Z);
        assert_relative_eq!(p.component(1).norm(), 1.0, epsilon = 1e-15);
        assert_eq!(p.component(-1).norm(), 0.0);
        assert_eq!(p.nonzero().count(), 1);
    }

    #[test]
    fn intermediate_ellipticity() {
        let phi = 0.436;
        let p = circular_components(phi, Axis::Z);
        let plus = p.component(1).norm();
        let minus = p.component(-1).norm();
        assert!(plus > minus && minus > 0.0);
        // |e_{+-1}|^2 = (1 +- sin phi_y) / 2
        assert_relative_eq!(plus * plus, (1.0 + phi.sin()) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(minus * minus, (1.0 - phi.sin()) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(p.ellipticity(), phi.sin(), epsilon = 1e-14);
    }

    #[test]
    fn propagation_along_x_has_z_component() {
        let p = circular_components(0.0, Axis::X);
        assert_relative_eq!(
            p.component(0).norm(),
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_relative_eq!(p.intensity(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn phasor_values() {
        let omega = angular_frequency(1.55);
        assert!((ir_phasor(0.0, omega) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((ir_phasor(PI / omega, omega) + Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn neon_band_positions() {
        let comb = HarmonicComb::odd(800.0, 13, 21).unwrap();
        let bands = band_energies(&comb, 21.56, 1.55).unwrap();
        let db15 = bands.iter().find(|b| b.label == "DB15").unwrap();
        assert_relative_eq!(db15.energy_ev, 1.69, epsilon = 1e-12);
        let sb16 = bands.iter().find(|b| b.label == "SB16").unwrap();
        assert_relative_eq!(sb16.energy_ev, 3.24, epsilon = 1e-12);
        assert_eq!(sb16.paths, vec![Path::XuvPlusIr(15), Path::XuvMinusIr(17)]);
        // SB14 is reached from H13 (below threshold) and H15.
        let sb14 = bands.iter().find(|b| b.label == "SB14").unwrap();
        assert_eq!(sb14.paths, vec![Path::XuvPlusIr(13), Path::XuvMinusIr(15)]);
        assert!(bands.iter().all(|b| b.label != "DB13"));
        assert!(bands.iter().all(|b| b.label != "SB22"));
    }

    #[test]
    fn even_harmonic_joins_sideband() {
        let comb = HarmonicComb::new(800.0, (14..=20).collect(), None, None, true).unwrap();
        let bands = band_energies(&comb, 21.56, 1.55).unwrap();
        let sb16 = bands.iter().find(|b| b.label == "SB16").unwrap();
        assert_eq!(
            sb16.paths,
            vec![Path::Xuv(16), Path::XuvPlusIr(15), Path::XuvMinusIr(17)]
        );
        let db17 = bands.iter().find(|b| b.label == "DB17").unwrap();
        assert_eq!(db17.paths.len(), 3);
    }

    #[test]
    fn empty_spectrum() {
        let comb = HarmonicComb::odd(800.0, 3, 9).unwrap();
        assert!(matches!(
            band_energies(&comb, 21.56, 1.55),
            Err(Error::EmptySpectrum(_))
        ));
    }

    #[test]
    fn comb_validation() {
        assert!(HarmonicComb::new(800.0, vec![15, 13], None, None, false).is_err());
        assert!(HarmonicComb::new(800.0, vec![14], None, None, false).is_err());
        assert!(HarmonicComb::new(800.0, vec![13], Some(vec![-1.0]), None, false).is_err());
    }

    #[test]
    fn delay_grid_is_half_open() {
        let g = DelayGrid::new(0.0, 1.0, 4).unwrap();
        assert_eq!(g.values(), vec![0.0, 0.25, 0.5, 0.75]);
        assert!(DelayGrid::new(1.0, 0.0, 4).is_err());
    }
}
