//! Radial matrix elements: energy-independent model parameters, bound-free
//! tables ingested from CSV, and Coulomb continuum-continuum couplings.
//!
//! Continuum-continuum elements use the partial-wave form
//! `phi_l(k, r) = (2l + 1)/(k r) i^l e^{i sigma_l} u_l(k r)` for both states,
//! with the final state conjugated (bra). The final wave is the regular
//! Coulomb function `F`; the intermediate wave is the incoming combination
//! `G - iF`, which carries the phase of the scattering solution. The `r^2`
//! volume element is absorbed, so the radial integrand is `u_f r u_i`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::gauss_legendre;
use crate::error::{Error, Result};
use crate::special::{coulomb_phase, log_gamma_complex, sample_fg, CoulombParams};
use crate::HARTREE_EV;

/// Photoelectron momentum (a.u.) for a kinetic energy in eV.
pub fn momentum(energy_ev: f64) -> Result<f64> {
    if !(energy_ev > 0.0) || !energy_ev.is_finite() {
        return Err(Error::Domain(format!(
            "photoelectron energy must be positive, got {energy_ev} eV"
        )));
    }
    Ok((2.0 * energy_ev / HARTREE_EV).sqrt())
}

/// One radial matrix element. `k_i` is `None` for bound-free elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialElement {
    pub l_i: u32,
    pub l_f: u32,
    pub k_i: Option<f64>,
    pub k_f: f64,
    pub value: Complex64,
}

/// Complex radial elements for one channel, keyed by `(l_i, l_f)`.
///
/// Each pair owns an energy grid (eV, strictly increasing). A pair with a
/// single grid point, or a table built by [`RadialElementTable::model`], is
/// energy independent.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialElementTable {
    channel: String,
    entries: BTreeMap<(u32, u32), Vec<(f64, Complex64)>>,
}

fn check_pair(l_i: u32, l_f: u32) -> Result<()> {
    if l_i.abs_diff(l_f) != 1 {
        return Err(Error::Validation(format!(
            "radial element ({l_i} -> {l_f}) violates |l_f - l_i| = 1"
        )));
    }
    Ok(())
}

impl RadialElementTable {
    /// Energy-independent table from `(l_i, l_f, magnitude, phase)` tuples.
    pub fn model(channel: impl Into<String>, spec: &[(u32, u32, f64, f64)]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for &(l_i, l_f, mag, phase) in spec {
            check_pair(l_i, l_f)?;
            if !(mag >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "magnitude for ({l_i} -> {l_f}) must be >= 0, got {mag}"
                )));
            }
            if entries
                .insert((l_i, l_f), vec![(0.0, Complex64::from_polar(mag, phase))])
                .is_some()
            {
                return Err(Error::InvalidArgument(format!(
                    "duplicate radial element ({l_i} -> {l_f})"
                )));
            }
        }
        Ok(Self {
            channel: channel.into(),
            entries,
        })
    }

    /// Table from `(E_eV, l_i, l_f, value)` rows. Rows may come in any pair
    /// order but energies within a pair must be strictly increasing.
    pub fn from_rows(
        channel: impl Into<String>,
        rows: impl IntoIterator<Item = (f64, u32, u32, Complex64)>,
    ) -> Result<Self> {
        let mut entries: BTreeMap<(u32, u32), Vec<(f64, Complex64)>> = BTreeMap::new();
        for (e, l_i, l_f, v) in rows {
            check_pair(l_i, l_f)?;
            let grid = entries.entry((l_i, l_f)).or_default();
            if let Some(&(last, _)) = grid.last() {
                if !(e > last) {
                    return Err(Error::Validation(format!(
                        "energies for ({l_i} -> {l_f}) are not strictly increasing ({e} after {last} eV)"
                    )));
                }
            }
            grid.push((e, v));
        }
        if entries.is_empty() {
            return Err(Error::Validation("matrix-element table is empty".into()));
        }
        Ok(Self {
            channel: channel.into(),
            entries,
        })
    }

    pub fn channel(&self) -> &str {
        &self.channel
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.entries.keys().copied()
    }

    pub fn contains(&self, l_i: u32, l_f: u32) -> bool {
        self.entries.contains_key(&(l_i, l_f))
    }

    /// Grid energies of one pair.
    pub fn energies(&self, l_i: u32, l_f: u32) -> Option<Vec<f64>> {
        self.entries
            .get(&(l_i, l_f))
            .map(|g| g.iter().map(|&(e, _)| e).collect())
    }

    /// Lowest grid energy over all pairs.
    pub fn min_energy(&self) -> f64 {
        self.entries
            .values()
            .map(|g| g[0].0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_energy_independent(&self) -> bool {
        self.entries.values().all(|g| g.len() == 1)
    }

    /// Element at an energy: linear complex interpolation inside the grid,
    /// nearest grid value (with a warning) outside it.
    pub fn value(&self, l_i: u32, l_f: u32, energy_ev: f64) -> Option<Complex64> {
        let grid = self.entries.get(&(l_i, l_f))?;
        if grid.len() == 1 {
            return Some(grid[0].1);
        }
        let (e0, v0) = grid[0];
        let (e1, v1) = grid[grid.len() - 1];
        if energy_ev <= e0 {
            if energy_ev < e0 {
                log::warn!(
                    "{}: ({l_i} -> {l_f}) queried at {energy_ev} eV below grid start {e0} eV; using nearest value",
                    self.channel
                );
            }
            return Some(v0);
        }
        if energy_ev >= e1 {
            if energy_ev > e1 {
                log::warn!(
                    "{}: ({l_i} -> {l_f}) queried at {energy_ev} eV above grid end {e1} eV; using nearest value",
                    self.channel
                );
            }
            return Some(v1);
        }
        let j = grid.partition_point(|&(e, _)| e <= energy_ev);
        let (ea, va) = grid[j - 1];
        let (eb, vb) = grid[j];
        if energy_ev == ea {
            return Some(va);
        }
        let t = (energy_ev - ea) / (eb - ea);
        Some(va + (vb - va) * t)
    }

    pub fn element(&self, l_i: u32, l_f: u32, energy_ev: f64) -> Result<RadialElement> {
        let value = self.value(l_i, l_f, energy_ev).ok_or_else(|| {
            Error::Config(format!(
                "channel {} has no radial element ({l_i} -> {l_f})",
                self.channel
            ))
        })?;
        Ok(RadialElement {
            l_i,
            l_f,
            k_i: None,
            k_f: momentum(energy_ev).unwrap_or(0.0),
            value,
        })
    }

    /// Parse CSV text with columns `E_eV,l_i,l_f,mag,phase_rad`.
    /// Lines starting with `#` are ignored.
    pub fn parse_csv(source_name: &str, text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let parse_err = |line: u64, message: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let headers = reader
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        let expected = ["E_eV", "l_i", "l_f", "mag", "phase_rad"];
        if headers.len() != expected.len() || headers.iter().zip(expected).any(|(h, e)| h != e) {
            return Err(parse_err(
                1,
                format!(
                    "expected header {}, found {}",
                    expected.join(","),
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        let mut rows = Vec::new();
        let mut record = csv::StringRecord::new();
        loop {
            let line_hint = reader.position().line();
            match reader.read_record(&mut record) {
                Ok(false) => break,
                Ok(true) => {}
                Err(e) => {
                    let line = e.position().map(|p| p.line()).unwrap_or(line_hint);
                    return Err(parse_err(line, e.to_string()));
                }
            }
            let line = record.position().map(|p| p.line()).unwrap_or(line_hint);
            if record.len() != 5 {
                return Err(parse_err(
                    line,
                    format!("expected 5 fields, found {}", record.len()),
                ));
            }
            let num = |i: usize| -> Result<f64> {
                let v: f64 = record[i]
                    .parse()
                    .map_err(|e| parse_err(line, format!("column {}: {e}", expected[i])))?;
                if !v.is_finite() {
                    return Err(parse_err(
                        line,
                        format!("column {}: non-finite value", expected[i]),
                    ));
                }
                Ok(v)
            };
            let int = |i: usize| -> Result<u32> {
                record[i]
                    .parse()
                    .map_err(|e| parse_err(line, format!("column {}: {e}", expected[i])))
            };
            let e = num(0)?;
            let (l_i, l_f) = (int(1)?, int(2)?);
            let mag = num(3)?;
            let phase = num(4)?;
            if mag < 0.0 {
                return Err(parse_err(line, "negative magnitude".into()));
            }
            rows.push((e, l_i, l_f, Complex64::from_polar(mag, phase)));
        }
        Self::from_rows(source_name, rows)
    }

    /// Write the table as CSV (`E_eV,l_i,l_f,mag,phase_rad`).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("E_eV,l_i,l_f,mag,phase_rad\n");
        for (&(l_i, l_f), grid) in &self.entries {
            for &(e, v) in grid {
                out.push_str(&format!("{e},{l_i},{l_f},{},{}\n", v.norm(), v.arg()));
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Load a bound-free table from a CSV file.
pub fn load_bound_free(path: &Path) -> Result<RadialElementTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RadialElementTable::parse_csv(&path.display().to_string(), &text)
}

/// Source of bound-free (first, XUV) radial elements.
pub trait BoundFreeSource: Send + Sync {
    fn bound_free(&self, l_i: u32, l_f: u32, energy_ev: f64) -> Result<Complex64>;
    /// Lowest energy with tabulated data, if the source is tabulated.
    fn lowest_energy(&self) -> Option<f64>;
}

/// Source of continuum-continuum (second, IR) radial elements.
pub trait ContinuumCouplingSource: Send + Sync {
    fn continuum(&self, l_i: u32, l_f: u32, e_i_ev: f64, e_f_ev: f64) -> Result<Complex64>;
}

impl BoundFreeSource for RadialElementTable {
    fn bound_free(&self, l_i: u32, l_f: u32, energy_ev: f64) -> Result<Complex64> {
        Ok(self.element(l_i, l_f, energy_ev)?.value)
    }

    fn lowest_energy(&self) -> Option<f64> {
        if self.is_energy_independent() {
            None
        } else {
            Some(self.min_energy())
        }
    }
}

/// Model tables double as energy-independent continuum couplings.
impl ContinuumCouplingSource for RadialElementTable {
    fn continuum(&self, l_i: u32, l_f: u32, _e_i_ev: f64, e_f_ev: f64) -> Result<Complex64> {
        Ok(self.element(l_i, l_f, e_f_ev)?.value)
    }
}

/// Model-system phase scenarios for an initial s state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelScenario {
    A,
    B,
    C,
}

impl FromStr for ModelScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().trim_start_matches("model-") {
            "a" => Ok(Self::A),
            "b" => Ok(Self::B),
            "c" => Ok(Self::C),
            other => Err(Error::InvalidArgument(format!(
                "unknown model scenario '{other}'"
            ))),
        }
    }
}

impl fmt::Display for ModelScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::A => "a",
            Self::B => "b",
            Self::C => "c",
        };
        f.write_str(s)
    }
}

/// Model radial elements for the two sideband channels.
///
/// Index 0 is channel 1 (absorption path), index 1 is channel 2 (emission
/// path). Each table holds `s->p = 1`, `p->d = 1` and `p->s = 0.3` with the
/// scenario's phases.
pub fn model_channels(scenario: ModelScenario) -> [RadialElementTable; 2] {
    let (sp2, pd1) = match scenario {
        ModelScenario::A => (0.0, 0.0),
        ModelScenario::B => (FRAC_PI_2, 0.0),
        ModelScenario::C => (FRAC_PI_2, PI / 4.0),
    };
    let one = RadialElementTable::model(
        "channel-1",
        &[(0, 1, 1.0, 0.0), (1, 2, 1.0, pd1), (1, 0, 0.3, 0.0)],
    )
    .expect("valid model");
    let two = RadialElementTable::model(
        "channel-2",
        &[(0, 1, 1.0, sp2), (1, 2, 1.0, 0.0), (1, 0, 0.3, 0.0)],
    )
    .expect("valid model");
    [one, two]
}

/// Numerical settings of the regularized continuum-continuum integral.
#[derive(Debug, Clone, PartialEq)]
pub struct CcSettings {
    /// Upper bound on the largest damping rate (a.u.).
    pub eps_max: f64,
    /// Largest damping rate as a fraction of `|k_f - k_i|`.
    pub eps_fraction: f64,
    /// Number of halvings of the damping rate (three rates for two).
    pub halvings: usize,
    /// Integration range in units of the smallest damping length.
    pub decay_lengths: f64,
    /// Gauss-Legendre points per panel.
    pub points_per_panel: usize,
    /// Largest panel length (a.u.).
    pub max_panel: f64,
    /// Multiplier on the panel length.
    pub panel_scale: f64,
    /// Multiplier on the integration range.
    pub range_scale: f64,
    /// Allowed relative spread between the last two extrapolants.
    pub tolerance: f64,
    /// Smallest allowed `|k_f - k_i|`.
    pub k_min: f64,
}

impl Default for CcSettings {
    fn default() -> Self {
        Self {
            eps_max: 0.02,
            eps_fraction: 0.2,
            halvings: 2,
            decay_lengths: 40.0,
            points_per_panel: 10,
            max_panel: 2.0,
            panel_scale: 1.0,
            range_scale: 1.0,
            tolerance: 0.1,
            k_min: 1e-3,
        }
    }
}

/// Result of the regularized integral with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CcIntegral {
    /// Extrapolated radial element including the partial-wave prefactors.
    pub value: Complex64,
    /// Damping rates used.
    pub eps: Vec<f64>,
    /// Raw damped integrals, one per rate.
    pub damped: Vec<Complex64>,
    /// Richardson table rows, last entry is the final extrapolant.
    pub extrapolants: Vec<Complex64>,
    pub spread: f64,
    pub r_max: f64,
}

/// Partial-wave prefactor of the continuum-continuum element:
/// `(2l_i + 1)(2l_f + 1)/(k_i k_f) i^{l_i - l_f} e^{i(sigma_li - sigma_lf)}`.
///
/// Swapping `(l_i, k_i)` with `(l_f, k_f)` conjugates the phase.
pub fn cc_prefactor(l_i: u32, k_i: f64, l_f: u32, k_f: f64, charge: f64) -> Result<Complex64> {
    if !(k_i > 0.0 && k_f > 0.0) {
        return Err(Error::Domain("continuum momenta must be positive".into()));
    }
    let s_i = coulomb_phase(l_i as i32, CoulombParams::sommerfeld(charge, k_i))?;
    let s_f = coulomb_phase(l_f as i32, CoulombParams::sommerfeld(charge, k_f))?;
    let mag = ((2 * l_i + 1) * (2 * l_f + 1)) as f64 / (k_i * k_f);
    let phase = (l_i as f64 - l_f as f64) * FRAC_PI_2 + s_i - s_f;
    Ok(Complex64::from_polar(mag, phase))
}

fn check_cc_args(l_i: u32, l_f: u32, k_i: f64, k_f: f64, k_min: f64) -> Result<()> {
    if !(k_i > 0.0 && k_f > 0.0) || !k_i.is_finite() || !k_f.is_finite() {
        return Err(Error::Domain(format!(
            "continuum momenta must be positive, got k_i = {k_i}, k_f = {k_f}"
        )));
    }
    if l_i.abs_diff(l_f) != 1 {
        return Err(Error::InvalidArgument(format!(
            "continuum coupling ({l_i} -> {l_f}) violates |l_f - l_i| = 1"
        )));
    }
    if (k_f - k_i).abs() < k_min {
        return Err(Error::Domain(format!(
            "|k_f - k_i| = {:.3e} below the minimum {k_min:.1e}; the undamped integral diverges",
            (k_f - k_i).abs()
        )));
    }
    Ok(())
}

/// Regularized continuum-continuum integral with full diagnostics.
///
/// `I(eps) = int_0^R e^{-eps r} F_lf(k_f r) r [G_li - i F_li](k_i r) dr` is
/// evaluated on a shared Gauss-Legendre panel grid for a ladder of halved
/// damping rates and Richardson-extrapolated to `eps -> 0`.
pub fn cc_integral(
    l_i: u32,
    l_f: u32,
    k_i: f64,
    k_f: f64,
    charge: f64,
    settings: &CcSettings,
) -> Result<CcIntegral> {
    check_cc_args(l_i, l_f, k_i, k_f, settings.k_min)?;
    if settings.halvings == 0 || settings.points_per_panel == 0 {
        return Err(Error::InvalidArgument(
            "cc settings need halvings >= 1 and points >= 1".into(),
        ));
    }
    let dk = (k_f - k_i).abs();
    let eps0 = settings.eps_max.min(settings.eps_fraction * dk);
    let eps: Vec<f64> = (0..=settings.halvings)
        .map(|j| eps0 / 2f64.powi(j as i32))
        .collect();
    let eps_min = eps[eps.len() - 1];
    let r_max = settings.range_scale * settings.decay_lengths / eps_min;
    let panel = settings.panel_scale * (PI / (k_i + k_f)).min(settings.max_panel);
    let n_panels = (r_max / panel).ceil() as usize;
    let h = r_max / n_panels as f64;
    let (x, w) = gauss_legendre(settings.points_per_panel);

    let mut r = Vec::with_capacity(n_panels * x.len());
    let mut wr = Vec::with_capacity(r.capacity());
    for p in 0..n_panels {
        let mid = (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            r.push(mid + 0.5 * h * xi);
            wr.push(0.5 * h * wi);
        }
    }
    let eta_i = CoulombParams::sommerfeld(charge, k_i);
    let eta_f = CoulombParams::sommerfeld(charge, k_f);
    let rho_i: Vec<f64> = r.iter().map(|&x| k_i * x).collect();
    let rho_f: Vec<f64> = r.iter().map(|&x| k_f * x).collect();
    let (f_i, g_i) = sample_fg(l_i as i32, eta_i, &rho_i);
    let (f_f, _) = sample_fg(l_f as i32, eta_f, &rho_f);

    let mut damped = vec![Complex64::new(0.0, 0.0); eps.len()];
    for j in 0..r.len() {
        let base = wr[j] * f_f[j] * r[j];
        let h_minus = Complex64::new(g_i[j], -f_i[j]);
        for (acc, &e) in damped.iter_mut().zip(&eps) {
            *acc += h_minus * (base * (-e * r[j]).exp());
        }
    }

    // Richardson extrapolation for a ladder with ratio 2.
    let mut row = damped.clone();
    let mut extrapolants = Vec::new();
    let mut order = 1;
    while row.len() > 1 {
        let factor = 2f64.powi(order);
        row = row
            .windows(2)
            .map(|p| (p[1] * factor - p[0]) / (factor - 1.0))
            .collect();
        extrapolants.extend_from_slice(&row);
        order += 1;
    }
    let best = *extrapolants.last().expect("at least one halving");
    let previous = extrapolants[extrapolants.len().saturating_sub(2)];
    let spread = if extrapolants.len() >= 2 {
        (best - previous).norm() / best.norm().max(f64::MIN_POSITIVE)
    } else {
        0.0
    };
    let value = best * cc_prefactor(l_i, k_i, l_f, k_f, charge)?;
    if !value.norm().is_finite() || spread > settings.tolerance {
        return Err(Error::Convergence {
            message: format!(
                "continuum-continuum integral ({l_i} -> {l_f}, k_i = {k_i:.5}, k_f = {k_f:.5}) did not settle under eps -> 0"
            ),
            spread,
            tolerance: settings.tolerance,
            extrapolants,
        });
    }
    Ok(CcIntegral {
        value,
        eps,
        damped,
        extrapolants,
        spread,
        r_max,
    })
}

/// Continuum-continuum radial element with default numerical settings.
pub fn cc_radial_numeric(l_i: u32, l_f: u32, k_i: f64, k_f: f64, charge: f64) -> Result<Complex64> {
    Ok(cc_integral(l_i, l_f, k_i, k_f, charge, &CcSettings::default())?.value)
}

/// Phase of the numeric element with the constant `-pi/2` of the
/// partial-wave convention removed, wrapped to `(-pi, pi]`. Directly
/// comparable to [`cc_phase_analytic`].
pub fn cc_numeric_phase(l_i: u32, l_f: u32, k_i: f64, k_f: f64, charge: f64) -> Result<f64> {
    let v = cc_radial_numeric(l_i, l_f, k_i, k_f, charge)?;
    Ok(wrap_phase(v.arg() + FRAC_PI_2))
}

/// Wrap an angle to `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// `a^{i b}` on the principal branch of `ln a` (real `a`, possibly negative).
fn real_pow_imag(a: f64, b: f64) -> Complex64 {
    (Complex64::new(a, 0.0).ln() * Complex64::new(0.0, b)).exp()
}

/// Complex expression inside the long-range continuum-continuum phase
/// formula, including the amplitude correction term.
pub fn cc_analytic_expression(k_i: f64, k_f: f64, charge: f64) -> Result<Complex64> {
    if !(k_i > 0.0 && k_f > 0.0) {
        return Err(Error::Domain("continuum momenta must be positive".into()));
    }
    if k_i == k_f {
        return Err(Error::Domain(
            "analytic continuum-continuum phase undefined at k_i = k_f".into(),
        ));
    }
    let z = charge;
    let x = z * (1.0 / k_f - 1.0 / k_i);
    let gamma1 = log_gamma_complex(Complex64::new(1.0, x))?.exp();
    let gamma2 = log_gamma_complex(Complex64::new(2.0, x))?.exp();
    let amp = Complex64::new(0.0, z)
        * ((k_f - k_i) * (k_f * k_f - k_i * k_i) / (2.0 * k_f * k_f * k_i * k_i))
        * gamma1;
    let ratio = real_pow_imag(2.0 * k_f, z / k_f) / real_pow_imag(2.0 * k_i, z / k_i);
    Ok(ratio * (gamma2 + amp) / real_pow_imag(k_f - k_i, x))
}

/// Long-range approximation of the continuum-continuum phase.
pub fn cc_phase_analytic(k_i: f64, k_f: f64, charge: f64) -> Result<f64> {
    Ok(cc_analytic_expression(k_i, k_f, charge)?.arg())
}

/// Analytic element: the modulus of the analytic expression with phase
/// `phi_cc - pi/2`, matching the convention of the numeric element.
pub fn cc_analytic_element(k_i: f64, k_f: f64, charge: f64) -> Result<Complex64> {
    let e = cc_analytic_expression(k_i, k_f, charge)?;
    Ok(Complex64::from_polar(e.norm(), e.arg() - FRAC_PI_2))
}

/// How continuum-continuum couplings are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CcMode {
    #[default]
    Numeric,
    Analytic,
}

type CcKey = (u32, u32, u64, u64);

/// Coulomb continuum-continuum couplings with a memo cache.
#[derive(Debug)]
pub struct CoulombCoupling {
    pub charge: f64,
    pub mode: CcMode,
    pub settings: CcSettings,
    cache: Mutex<HashMap<CcKey, Complex64>>,
}

impl CoulombCoupling {
    pub fn new(charge: f64, mode: CcMode) -> Self {
        Self {
            charge,
            mode,
            settings: CcSettings::default(),
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn element(&self, l_i: u32, l_f: u32, k_i: f64, k_f: f64) -> Result<Complex64> {
        let key = (l_i, l_f, k_i.to_bits(), k_f.to_bits());
        if let Some(v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = match self.mode {
            CcMode::Numeric => cc_integral(l_i, l_f, k_i, k_f, self.charge, &self.settings)?.value,
            CcMode::Analytic => {
                check_cc_args(l_i, l_f, k_i, k_f, 0.0)?;
                cc_analytic_element(k_i, k_f, self.charge)?
            }
        };
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }
}

impl ContinuumCouplingSource for CoulombCoupling {
    fn continuum(&self, l_i: u32, l_f: u32, e_i_ev: f64, e_f_ev: f64) -> Result<Complex64> {
        self.element(l_i, l_f, momentum(e_i_ev)?, momentum(e_f_ev)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_rejects_duplicates_and_bad_pairs() {
        assert!(RadialElementTable::model("c", &[(0, 1, 1.0, 0.0), (0, 1, 1.0, 0.0)]).is_err());
        assert!(RadialElementTable::model("c", &[(1, 1, 1.0, 0.0)]).is_err());
        assert!(RadialElementTable::model("c", &[(0, 1, -1.0, 0.0)]).is_err());
    }

    #[test]
    fn scenario_phases() {
        let [one, two] = model_channels(ModelScenario::C);
        assert!((two.value(0, 1, 5.0).unwrap().arg() - FRAC_PI_2).abs() < 1e-15);
        assert!((one.value(1, 2, 5.0).unwrap().arg() - PI / 4.0).abs() < 1e-15);
        assert!((one.value(1, 0, 5.0).unwrap().norm() - 0.3).abs() < 1e-15);
        let [a1, a2] = model_channels(ModelScenario::A);
        assert_eq!(a1.value(0, 1, 1.0), a2.value(0, 1, 1.0));
    }

    #[test]
    fn csv_round_trip_and_midpoint() {
        let text = "E_eV,l_i,l_f,mag,phase_rad\n1.0,1,2,2.0,0.5\n3.0,1,2,1.0,-0.25\n";
        let t = RadialElementTable::parse_csv("mem", text).unwrap();
        assert_eq!(t.energies(1, 2).unwrap(), vec![1.0, 3.0]);
        let a = Complex64::from_polar(2.0, 0.5);
        let b = Complex64::from_polar(1.0, -0.25);
        assert_eq!(t.value(1, 2, 1.0).unwrap(), a);
        assert_eq!(t.value(1, 2, 3.0).unwrap(), b);
        assert!((t.value(1, 2, 2.0).unwrap() - (a + b) / 2.0).norm() < 1e-15);
        assert_eq!(t.value(1, 2, 10.0).unwrap(), b);
        let again = RadialElementTable::parse_csv("mem", &t.to_csv_string()).unwrap();
        for e in [1.0, 1.7, 3.0] {
            assert!((again.value(1, 2, e).unwrap() - t.value(1, 2, e).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn csv_errors() {
        let bad = "E_eV,l_i,l_f,mag,phase_rad\n1.0,1,2,2.0,0.5\n2.0,1,x,1.0,0.0\n";
        match RadialElementTable::parse_csv("mem", bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let unsorted = "E_eV,l_i,l_f,mag,phase_rad\n2.0,1,2,2.0,0.5\n1.0,1,2,1.0,0.0\n";
        assert!(matches!(
            RadialElementTable::parse_csv("mem", unsorted),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn analytic_phase_limits() {
        assert!(matches!(
            cc_phase_analytic(0.5, 0.5, 1.0),
            Err(Error::Domain(_))
        ));
        for k in [1.2, 2.0] {
            let p = cc_phase_analytic(k, k * (1.0 + 1e-4), 1.0).unwrap();
            assert!(p.abs() < 1e-3, "{p}");
        }
    }

    #[test]
    fn prefactor_conjugates_under_swap() {
        let a = cc_prefactor(1, 0.6, 2, 0.7, 1.0).unwrap();
        let b = cc_prefactor(2, 0.7, 1, 0.6, 1.0).unwrap();
        assert!((a - b.conj()).norm() < 1e-14);
    }

    #[test]
    fn degenerate_momenta_rejected() {
        assert!(matches!(
            cc_radial_numeric(1, 2, 0.5, 0.5 + 1e-5, 1.0),
            Err(Error::Domain(_))
        ));
    }
}
