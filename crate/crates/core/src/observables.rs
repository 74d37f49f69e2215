//! Observables: spherical-harmonic expansions of the angular distribution,
//! delay scans, fixed-frequency sideband fits, spectra and asymmetries.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::angular::{gaunt, gauss_legendre, lm_index, ylm_table, AngularMomentumState};
use crate::error::{Error, Result};
use crate::fields::{Band, FieldSpec, Path};
use crate::matrix_elements::{BoundFreeSource, ContinuumCouplingSource};
use crate::wavefunction::{
    compose, one_photon_state, two_photon_state, IrDirection, PartialWaveState,
};

/// `beta_{L M}` coefficients keyed by `(L, M)`.
pub type BetaMap = BTreeMap<(i32, i32), Complex64>;

/// `beta_{LM} = sum a_{lm} a*_{l'm'} gaunt(l, m, l', m', L, M)`, for every
/// `L <= 2 l_max` and `|M| <= L`.
pub fn beta_expansion(state: &PartialWaveState) -> BetaMap {
    let amps: Vec<((i32, i32), Complex64)> =
        state.iter().filter(|(_, a)| a.norm_sqr() > 0.0).collect();
    let l_max = state.l_max();
    let mut beta = BetaMap::new();
    for big_l in 0..=2 * l_max {
        for big_m in -big_l..=big_l {
            beta.insert((big_l, big_m), Complex64::new(0.0, 0.0));
        }
    }
    for &((l1, m1), a1) in &amps {
        for &((l2, m2), a2) in &amps {
            let big_m = m1 - m2;
            let lo = (l1 - l2).abs().max(big_m.abs());
            for big_l in lo..=(l1 + l2) {
                if (l1 + l2 + big_l) % 2 != 0 {
                    continue;
                }
                let g = gaunt(l1, m1, l2, m2, big_l, big_m).expect("valid momenta");
                if g != 0.0 {
                    *beta.get_mut(&(big_l, big_m)).expect("allocated") += a1 * a2.conj() * g;
                }
            }
        }
    }
    beta
}

/// Largest `L` present in a beta map.
pub fn beta_l_max(beta: &BetaMap) -> i32 {
    beta.keys().map(|&(l, _)| l).max().unwrap_or(0)
}

/// Total yield `sqrt(4 pi) beta_00`.
pub fn beta_yield(beta: &BetaMap) -> f64 {
    (4.0 * PI).sqrt() * beta.get(&(0, 0)).map_or(0.0, |b| b.re)
}

/// Angular distribution `I(theta, phi) = Re sum beta_{LM} Y_{LM}`.
pub fn intensity_at(beta: &BetaMap, theta: f64, phi: f64) -> f64 {
    let table = ylm_table(beta_l_max(beta), theta, phi);
    beta.iter()
        .map(|(&(l, m), b)| (b * table[lm_index(l, m)]).re)
        .sum()
}

/// Element-wise average of beta maps with weights.
pub fn beta_weighted_sum(maps: &[(f64, BetaMap)]) -> BetaMap {
    let mut out = BetaMap::new();
    for (w, m) in maps {
        for (&k, &v) in m {
            *out.entry(k).or_default() += v * *w;
        }
    }
    out
}

/// Observables at one delay.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularRecord {
    pub tau: f64,
    pub beta: BetaMap,
    pub yield_: f64,
}

impl AngularRecord {
    pub fn from_state(state: &PartialWaveState) -> Self {
        let beta = beta_expansion(state);
        Self {
            tau: state.tau,
            yield_: beta_yield(&beta),
            beta,
        }
    }

    pub fn from_beta(tau: f64, beta: BetaMap) -> Self {
        Self {
            tau,
            yield_: beta_yield(&beta),
            beta,
        }
    }

    /// `beta_{LM} / beta_00`.
    pub fn normalized(&self, l: i32, m: i32) -> Complex64 {
        let b00 = self.beta.get(&(0, 0)).map_or(0.0, |b| b.re);
        self.beta.get(&(l, m)).copied().unwrap_or_default() / b00
    }
}

/// One-photon band: `|Psi_xuv|^2`.
pub fn intensity_i1(psi_xuv: &PartialWaveState) -> AngularRecord {
    AngularRecord::from_state(psi_xuv)
}

/// Standard sideband: `|Psi_+ + Psi_-|^2`.
pub fn intensity_i2(plus: &PartialWaveState, minus: &PartialWaveState) -> Result<AngularRecord> {
    Ok(AngularRecord::from_state(&compose(
        &[plus.clone(), minus.clone()],
        &[],
    )?))
}

/// Extended band: `|Psi_+ + Psi_- + Psi_xuv|^2`.
pub fn intensity_i3(
    plus: &PartialWaveState,
    minus: &PartialWaveState,
    xuv: &PartialWaveState,
) -> Result<AngularRecord> {
    Ok(AngularRecord::from_state(&compose(
        &[plus.clone(), minus.clone(), xuv.clone()],
        &[],
    )?))
}

/// Delay-dependent observables of one band.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularObservable {
    pub label: String,
    pub energy_ev: f64,
    pub records: Vec<AngularRecord>,
}

impl AngularObservable {
    pub fn yields(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.yield_).collect()
    }

    pub fn taus(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.tau).collect()
    }

    /// Series of one coefficient over the scan.
    pub fn beta_series(&self, l: i32, m: i32) -> Vec<Complex64> {
        self.records
            .iter()
            .map(|r| r.beta.get(&(l, m)).copied().unwrap_or_default())
            .collect()
    }

    pub fn normalized_series(&self, l: i32, m: i32) -> Vec<Complex64> {
        self.records.iter().map(|r| r.normalized(l, m)).collect()
    }

    /// `(L, M)` keys present in the records.
    pub fn keys(&self) -> Vec<(i32, i32)> {
        let mut keys: Vec<(i32, i32)> = self
            .records
            .iter()
            .flat_map(|r| r.beta.keys().copied())
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }
}

/// Initial state, optionally averaged incoherently over `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub l: i32,
    pub m: i32,
    pub average_m: bool,
}

impl InitialState {
    pub fn new(l: i32, m: i32, average_m: bool) -> Result<Self> {
        AngularMomentumState::new(l, m)?;
        Ok(Self { l, m, average_m })
    }

    /// `(weight, state)` pairs of the incoherent sum.
    pub fn components(&self) -> Vec<(f64, AngularMomentumState)> {
        if self.average_m {
            let w = 1.0 / (2 * self.l + 1) as f64;
            (-self.l..=self.l)
                .map(|m| (w, AngularMomentumState::new(self.l, m).expect("valid")))
                .collect()
        } else {
            vec![(
                1.0,
                AngularMomentumState::new(self.l, self.m).expect("valid"),
            )]
        }
    }
}

/// Sources of radial elements per pathway.
#[derive(Clone, Copy)]
pub struct ChannelSources<'a> {
    /// One-photon pathways.
    pub direct: &'a dyn BoundFreeSource,
    /// Absorption pathway: bound-free and continuum-continuum sources.
    pub plus: (&'a dyn BoundFreeSource, &'a dyn ContinuumCouplingSource),
    /// Emission pathway.
    pub minus: (&'a dyn BoundFreeSource, &'a dyn ContinuumCouplingSource),
}

/// All pathway states of one band at zero delay, per initial `m` component.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPathways {
    pub band: Band,
    pub omega: f64,
    /// `(weight, states with their IR direction)` per initial component.
    pub components: Vec<(f64, Vec<(Option<IrDirection>, PartialWaveState)>)>,
}

impl BandPathways {
    /// Build every pathway listed in `band.paths`.
    pub fn build(
        band: &Band,
        field: &FieldSpec,
        initial: InitialState,
        sources: ChannelSources<'_>,
    ) -> Result<Self> {
        let mut components = Vec::new();
        for (w, init) in initial.components() {
            let mut states = Vec::new();
            for path in &band.paths {
                let entry = match *path {
                    Path::Xuv(n) => (None, one_photon_state(init, n, field, sources.direct, 0.0)?),
                    Path::XuvPlusIr(n) => (
                        Some(IrDirection::Absorb),
                        two_photon_state(
                            init,
                            n,
                            IrDirection::Absorb,
                            field,
                            sources.plus.0,
                            sources.plus.1,
                            0.0,
                        )?,
                    ),
                    Path::XuvMinusIr(n) => (
                        Some(IrDirection::Emit),
                        two_photon_state(
                            init,
                            n,
                            IrDirection::Emit,
                            field,
                            sources.minus.0,
                            sources.minus.1,
                            0.0,
                        )?,
                    ),
                };
                states.push(entry);
            }
            components.push((w, states));
        }
        Ok(Self {
            band: band.clone(),
            omega: field.ir_omega(),
            components,
        })
    }

    /// Coherent sum of the pathways for each initial component at `tau`.
    pub fn composed(&self, tau: f64) -> Result<Vec<(f64, PartialWaveState)>> {
        self.components
            .iter()
            .map(|(w, states)| {
                let shifted: Vec<PartialWaveState> = states
                    .iter()
                    .map(|(d, s)| s.at_delay(*d, self.omega, tau))
                    .collect();
                Ok((*w, compose(&shifted, &[])?))
            })
            .collect()
    }

    /// Observables at one delay (incoherent over initial components).
    pub fn record(&self, tau: f64) -> Result<AngularRecord> {
        let maps: Vec<(f64, BetaMap)> = self
            .composed(tau)?
            .iter()
            .map(|(w, s)| (*w, beta_expansion(s)))
            .collect();
        Ok(AngularRecord::from_beta(tau, beta_weighted_sum(&maps)))
    }
}

/// Evaluate a band at every delay; parallel over delays, ordered output.
pub fn delay_scan(pathways: &BandPathways, taus: &[f64]) -> Result<AngularObservable> {
    let records: Result<Vec<AngularRecord>> =
        taus.par_iter().map(|&t| pathways.record(t)).collect();
    Ok(AngularObservable {
        label: pathways.band.label.clone(),
        energy_ev: pathways.band.energy_ev,
        records: records?,
    })
}

/// `y = offset + amplitude cos(omega tau + phase)` at fixed `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SidebandFit {
    pub offset: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub frequency: f64,
    pub rms: f64,
}

/// Least-squares fit of a cosine of known angular frequency.
///
/// Requires at least 8 samples per period on a uniform grid.
pub fn fit_fixed_frequency(taus: &[f64], y: &[f64], omega: f64) -> Result<SidebandFit> {
    if taus.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "{} delays but {} samples",
            taus.len(),
            y.len()
        )));
    }
    if taus.len() < 3 {
        return Err(Error::DegenerateFit("fewer than three samples".into()));
    }
    let dt = (taus[taus.len() - 1] - taus[0]) / (taus.len() - 1) as f64;
    let per_period = 2.0 * PI / (omega * dt);
    if !(per_period >= 8.0 - 1e-9) {
        return Err(Error::Validation(format!(
            "sampling precondition violated: {per_period:.2} samples per period of the fit frequency, need >= 8"
        )));
    }
    let n = taus.len();
    let design = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => (omega * taus[i]).cos(),
        _ => (omega * taus[i]).sin(),
    });
    let rhs = DVector::from_column_slice(y);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(Error::DegenerateFit(
            "design matrix is rank deficient".into(),
        ));
    }
    let coef = svd
        .solve(&rhs, 1e-14 * smax)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let (c, a, b) = (coef[0], coef[1], coef[2]);
    let amplitude = a.hypot(b);
    let scale = y
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    if amplitude <= 1e-12 * scale {
        return Err(Error::DegenerateFit(
            "series has no component at the fit frequency".into(),
        ));
    }
    let resid = &design * &coef - &rhs;
    Ok(SidebandFit {
        offset: c,
        amplitude,
        phase: (-b).atan2(a),
        frequency: omega,
        rms: (resid.norm_squared() / n as f64).sqrt(),
    })
}

/// `|DFT|^2` of a real series, bins `0..n`.
pub fn power_spectrum(series: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = series.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).collect()
}

/// `|DFT|^2` of a complex series.
pub fn power_spectrum_complex(series: &[Complex64]) -> Vec<f64> {
    let mut buf = series.to_vec();
    let fft = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf.iter().map(|c| c.norm_sqr()).collect()
}

/// Index of the largest nonzero bin among `1..=n/2`.
pub fn dominant_bin(power: &[f64]) -> usize {
    (1..=power.len() / 2)
        .max_by(|&a, &b| power[a].total_cmp(&power[b]))
        .unwrap_or(0)
}

/// Up-down asymmetry `(Y_up - Y_down) / (Y_up + Y_down)` about the z = 0
/// plane.
pub fn up_down_asymmetry(beta: &BetaMap) -> f64 {
    let (x, w) = gauss_legendre(64);
    let l_max = beta_l_max(beta);
    let mut up = 0.0;
    let mut down = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        // Map [-1, 1] onto cos(theta) in [0, 1].
        let c = 0.5 * (xi + 1.0);
        let wt = 0.5 * wi * 2.0 * PI;
        let t_up = ylm_table(l_max, c.acos(), 0.0);
        let t_down = ylm_table(l_max, (-c).acos(), 0.0);
        for l in 0..=l_max {
            if let Some(b) = beta.get(&(l, 0)) {
                up += wt * (b * t_up[lm_index(l, 0)]).re;
                down += wt * (b * t_down[lm_index(l, 0)]).re;
            }
        }
    }
    (up - down) / (up + down)
}
