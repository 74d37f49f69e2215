//! Partial-wave final states for one- and two-photon pathways.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::angular::{photon_coupling, AngularMomentumState};
use crate::error::{Error, Result};
use crate::fields::{ir_phasor, FieldSpec, PolarizationState};
use crate::matrix_elements::{BoundFreeSource, ContinuumCouplingSource};

/// Final-state amplitudes `a_{l m}` at one photoelectron energy.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialWaveState {
    pub energy_ev: f64,
    pub channel: String,
    pub tau: f64,
    amplitudes: BTreeMap<(i32, i32), Complex64>,
}

impl PartialWaveState {
    pub fn new(energy_ev: f64, channel: impl Into<String>) -> Self {
        Self {
            energy_ev,
            channel: channel.into(),
            tau: 0.0,
            amplitudes: BTreeMap::new(),
        }
    }

    /// Build from explicit `((l, m), amplitude)` pairs.
    pub fn from_amplitudes(
        energy_ev: f64,
        channel: impl Into<String>,
        amps: impl IntoIterator<Item = ((i32, i32), Complex64)>,
    ) -> Result<Self> {
        let mut s = Self::new(energy_ev, channel);
        for ((l, m), a) in amps {
            s.add(l, m, a)?;
        }
        Ok(s)
    }

    /// Add to the amplitude of `(l, m)`.
    pub fn add(&mut self, l: i32, m: i32, value: Complex64) -> Result<()> {
        AngularMomentumState::new(l, m)?;
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite amplitude for ({l}, {m})"
            )));
        }
        *self
            .amplitudes
            .entry((l, m))
            .or_insert(Complex64::new(0.0, 0.0)) += value;
        Ok(())
    }

    pub fn amplitude(&self, l: i32, m: i32) -> Complex64 {
        self.amplitudes.get(&(l, m)).copied().unwrap_or_default()
    }

    /// Iterate `((l, m), a_lm)` in `(l, m)` order.
    pub fn iter(&self) -> impl Iterator<Item = ((i32, i32), Complex64)> + '_ {
        self.amplitudes.iter().map(|(&k, &v)| (k, v))
    }

    /// `(l, m)` pairs with amplitude above `tol` in modulus.
    pub fn support(&self, tol: f64) -> Vec<(i32, i32)> {
        self.iter()
            .filter(|(_, a)| a.norm() > tol)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn l_max(&self) -> i32 {
        self.amplitudes.keys().map(|&(l, _)| l).max().unwrap_or(0)
    }

    /// `sum |a_lm|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for a in out.amplitudes.values_mut() {
            *a *= factor;
        }
        out
    }

    /// The same pathway at another delay, given the IR direction of the
    /// pathway that produced `self` at `self.tau`.
    pub fn at_delay(&self, direction: Option<IrDirection>, omega: f64, tau: f64) -> Self {
        let mut out = match direction {
            None => self.clone(),
            Some(d) => {
                let shift = d.field_factor(omega, tau) / d.field_factor(omega, self.tau);
                self.scaled(shift)
            }
        };
        out.tau = tau;
        out
    }
}

/// Absorption (+) or emission (-) of the IR photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum IrDirection {
    Absorb,
    Emit,
}

impl IrDirection {
    /// `e^{-i omega tau}` for absorption, its conjugate for emission.
    pub fn field_factor(self, omega: f64, tau: f64) -> Complex64 {
        match self {
            IrDirection::Absorb => ir_phasor(tau, omega),
            IrDirection::Emit => ir_phasor(tau, omega).conj(),
        }
    }

    /// Change of photon energy count in units of the IR photon.
    pub fn sign(self) -> i32 {
        match self {
            IrDirection::Absorb => 1,
            IrDirection::Emit => -1,
        }
    }
}

/// Field source of one photon step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhotonSource {
    Xuv(i32),
    Ir(IrDirection),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonStep {
    pub source: PhotonSource,
    pub polarization: PolarizationState,
}

/// Ordered photon steps of one pathway: an XUV step, optionally followed by
/// one IR step.
#[derive(Debug, Clone, PartialEq)]
pub struct PathwaySpec {
    steps: Vec<PhotonStep>,
}

impl PathwaySpec {
    pub fn new(steps: Vec<PhotonStep>) -> Result<Self> {
        match steps.as_slice() {
            [PhotonStep {
                source: PhotonSource::Xuv(_),
                ..
            }] => {}
            [PhotonStep {
                source: PhotonSource::Xuv(_),
                ..
            }, PhotonStep {
                source: PhotonSource::Ir(_),
                ..
            }] => {}
            _ => {
                return Err(Error::InvalidArgument(
                    "a pathway is one XUV step optionally followed by one IR step".into(),
                ))
            }
        }
        Ok(Self { steps })
    }

    pub fn one_photon(order: i32, field: &FieldSpec) -> Self {
        Self {
            steps: vec![PhotonStep {
                source: PhotonSource::Xuv(order),
                polarization: field.xuv_polarization,
            }],
        }
    }

    pub fn two_photon(order: i32, direction: IrDirection, field: &FieldSpec) -> Self {
        Self {
            steps: vec![
                PhotonStep {
                    source: PhotonSource::Xuv(order),
                    polarization: field.xuv_polarization,
                },
                PhotonStep {
                    source: PhotonSource::Ir(direction),
                    polarization: field.ir_polarization,
                },
            ],
        }
    }

    pub fn steps(&self) -> &[PhotonStep] {
        &self.steps
    }

    pub fn order(&self) -> i32 {
        match self.steps[0].source {
            PhotonSource::Xuv(n) => n,
            PhotonSource::Ir(_) => unreachable!("validated"),
        }
    }

    pub fn ir_direction(&self) -> Option<IrDirection> {
        self.steps.get(1).map(|s| match s.source {
            PhotonSource::Ir(d) => d,
            PhotonSource::Xuv(_) => unreachable!("validated"),
        })
    }

    /// Final photoelectron energy (eV).
    pub fn final_energy(&self, field: &FieldSpec) -> f64 {
        let n = self.order() + self.ir_direction().map_or(0, |d| d.sign());
        field.photoelectron_energy(n)
    }
}

/// Dipole-coupled one-photon step from amplitudes `src` into `dst`.
fn photon_step(
    src: &BTreeMap<(i32, i32), Complex64>,
    pol: &PolarizationState,
    mut radial: impl FnMut(i32, i32) -> Result<Complex64>,
) -> Result<BTreeMap<(i32, i32), Complex64>> {
    let mut dst: BTreeMap<(i32, i32), Complex64> = BTreeMap::new();
    for (&(l, m), &a) in src {
        for l_f in [l - 1, l + 1] {
            if l_f < 0 {
                continue;
            }
            let mut r = None;
            for (q, e_q) in pol.nonzero() {
                let m_f = m + q;
                if m_f.abs() > l_f {
                    continue;
                }
                let c = photon_coupling(l, m, q, l_f, m_f)?;
                if c == 0.0 {
                    continue;
                }
                let r = match r {
                    Some(v) => v,
                    None => {
                        let v = radial(l, l_f)?;
                        r = Some(v);
                        v
                    }
                };
                *dst.entry((l_f, m_f)).or_default() += a * r * e_q * c;
            }
        }
    }
    Ok(dst)
}

fn initial_map(initial: AngularMomentumState) -> BTreeMap<(i32, i32), Complex64> {
    BTreeMap::from([((initial.l(), initial.m()), Complex64::new(1.0, 0.0))])
}

/// Final state of direct XUV ionization by harmonic `order`.
pub fn one_photon_state(
    initial: AngularMomentumState,
    order: i32,
    field: &FieldSpec,
    bound_free: &dyn BoundFreeSource,
    tau: f64,
) -> Result<PartialWaveState> {
    let energy = field.photoelectron_energy(order);
    if energy <= 0.0 {
        return Err(Error::Domain(format!(
            "harmonic {order} lies below threshold ({energy:.3} eV)"
        )));
    }
    let xuv = field.comb.field(order);
    let amps = photon_step(
        &initial_map(initial),
        &field.xuv_polarization,
        |l_i, l_f| bound_free.bound_free(l_i as u32, l_f as u32, energy),
    )?;
    let mut state = PartialWaveState::new(energy, format!("H{order}"));
    state.tau = tau;
    for ((l, m), a) in amps {
        state.add(l, m, a * xuv)?;
    }
    Ok(state)
}

/// Final state of XUV harmonic `order` followed by IR absorption or emission.
///
/// When the intermediate energy lies below threshold the bound-free element
/// is taken at the lowest tabulated energy of the source, and the continuum
/// coupling is evaluated from that energy to one IR photon above it, keeping
/// the energy transfer of the step.
pub fn two_photon_state(
    initial: AngularMomentumState,
    order: i32,
    direction: IrDirection,
    field: &FieldSpec,
    bound_free: &dyn BoundFreeSource,
    continuum: &dyn ContinuumCouplingSource,
    tau: f64,
) -> Result<PartialWaveState> {
    let e_final = field.photoelectron_energy(order + direction.sign());
    if e_final <= 0.0 {
        return Err(Error::Domain(format!(
            "final energy {e_final:.3} eV of H{order}{} is below threshold",
            if direction == IrDirection::Absorb {
                "+IR"
            } else {
                "-IR"
            }
        )));
    }
    let mut e_mid = field.photoelectron_energy(order);
    let mut e_cc_final = e_final;
    if e_mid <= 0.0 {
        let sub = bound_free.lowest_energy().ok_or_else(|| {
            Error::Config(format!(
                "intermediate state of H{order} is below threshold and the bound-free source has no lowest tabulated energy"
            ))
        })?;
        log::warn!(
            "H{order} intermediate at {e_mid:.3} eV is below threshold; using bound-free elements at {sub} eV"
        );
        e_mid = sub;
        e_cc_final = sub + direction.sign() as f64 * field.ir_photon_ev;
    }
    let xuv = field.comb.field(order);
    let mid = photon_step(
        &initial_map(initial),
        &field.xuv_polarization,
        |l_i, l_v| bound_free.bound_free(l_i as u32, l_v as u32, e_mid),
    )?;
    let fin = photon_step(&mid, &field.ir_polarization, |l_v, l_f| {
        continuum.continuum(l_v as u32, l_f as u32, e_mid, e_cc_final)
    })?;
    let factor = xuv * direction.field_factor(field.ir_omega(), tau);
    let label = match direction {
        IrDirection::Absorb => format!("H{order}+IR"),
        IrDirection::Emit => format!("H{order}-IR"),
    };
    let mut state = PartialWaveState::new(e_final, label);
    state.tau = tau;
    for ((l, m), a) in fin {
        state.add(l, m, a * factor)?;
    }
    Ok(state)
}

/// Coherent sum `sum_c e^{i phi_c} Psi_c`.
pub fn compose(states: &[PartialWaveState], extra_phases: &[f64]) -> Result<PartialWaveState> {
    let first = states
        .first()
        .ok_or_else(|| Error::InvalidArgument("compose needs at least one state".into()))?;
    if !extra_phases.is_empty() && extra_phases.len() != states.len() {
        return Err(Error::InvalidArgument(format!(
            "{} states but {} extra phases",
            states.len(),
            extra_phases.len()
        )));
    }
    let tol = 1e-9 * first.energy_ev.abs().max(1.0);
    let mut out = PartialWaveState::new(
        first.energy_ev,
        states
            .iter()
            .map(|s| s.channel.as_str())
            .collect::<Vec<_>>()
            .join(" + "),
    );
    out.tau = first.tau;
    for (i, s) in states.iter().enumerate() {
        if (s.energy_ev - first.energy_ev).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "cannot compose states at {} eV and {} eV",
                first.energy_ev, s.energy_ev
            )));
        }
        let phase = extra_phases.get(i).copied().unwrap_or(0.0);
        let f = Complex64::from_polar(1.0, phase);
        for ((l, m), a) in s.iter() {
            out.add(l, m, a * f)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{circular_components, Axis, HarmonicComb};
    use crate::matrix_elements::{model_channels, ModelScenario, RadialElementTable};
    use std::f64::consts::FRAC_PI_2;

    fn field(xuv: PolarizationState, ir: PolarizationState) -> FieldSpec {
        FieldSpec {
            comb: HarmonicComb::odd(800.0, 13, 21).unwrap(),
            ir_photon_ev: 1.55,
            ip_ev: 15.0,
            xuv_polarization: xuv,
            ir_polarization: ir,
        }
    }

    fn s() -> AngularMomentumState {
        AngularMomentumState::new(0, 0).unwrap()
    }

    #[test]
    fn s_linear_one_photon() {
        let f = field(PolarizationState::linear_z(), PolarizationState::linear_z());
        let [one, _] = model_channels(ModelScenario::A);
        let st = one_photon_state(s(), 15, &f, &one, 0.0).unwrap();
        assert_eq!(st.support(1e-14), vec![(1, 0)]);
    }

    #[test]
    fn circular_selects_d_m2() {
        let c = circular_components(FRAC_PI_2, Axis::Z);
        let f = field(c, c);
        let [one, _] = model_channels(ModelScenario::C);
        let st = two_photon_state(s(), 15, IrDirection::Absorb, &f, &one, &one, 0.3e-15).unwrap();
        assert_eq!(st.support(1e-14), vec![(2, 2)]);
    }

    #[test]
    fn p_linear_two_photon_support() {
        let f = field(PolarizationState::linear_z(), PolarizationState::linear_z());
        let t = RadialElementTable::model(
            "t",
            &[
                (1, 0, 0.5, 0.1),
                (1, 2, 1.0, 0.2),
                (0, 1, 1.0, 0.0),
                (2, 1, 1.0, 0.3),
                (2, 3, 1.0, 0.4),
            ],
        )
        .unwrap();
        let p0 = AngularMomentumState::new(1, 0).unwrap();
        let st = two_photon_state(p0, 15, IrDirection::Emit, &f, &t, &t, 0.0).unwrap();
        assert_eq!(st.support(1e-14), vec![(1, 0), (3, 0)]);
        let one = one_photon_state(p0, 15, &f, &t, 0.0).unwrap();
        assert_eq!(one.support(1e-14), vec![(0, 0), (2, 0)]);
    }

    #[test]
    fn missing_element_is_config_error() {
        let f = field(PolarizationState::linear_z(), PolarizationState::linear_z());
        let t = RadialElementTable::model("t", &[(1, 2, 1.0, 0.0)]).unwrap();
        let p0 = AngularMomentumState::new(1, 0).unwrap();
        assert!(matches!(
            one_photon_state(p0, 15, &f, &t, 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn compose_identity_and_mismatch() {
        let a = PartialWaveState::from_amplitudes(1.0, "a", [((1, 0), Complex64::new(0.5, 0.2))])
            .unwrap();
        let c = compose(std::slice::from_ref(&a), &[0.0]).unwrap();
        assert_eq!(c.amplitude(1, 0), a.amplitude(1, 0));
        let b = PartialWaveState::new(2.0, "b");
        assert!(compose(&[a, b], &[]).is_err());
    }

    #[test]
    fn delay_shift_matches_direct_evaluation() {
        let f = field(PolarizationState::linear_z(), PolarizationState::linear_z());
        let [one, _] = model_channels(ModelScenario::A);
        let a = two_photon_state(s(), 15, IrDirection::Emit, &f, &one, &one, 0.0).unwrap();
        let tau = 0.7e-15;
        let b = two_photon_state(s(), 15, IrDirection::Emit, &f, &one, &one, tau).unwrap();
        let shifted = a.at_delay(Some(IrDirection::Emit), f.ir_omega(), tau);
        for ((l, m), v) in b.iter() {
            assert!((shifted.amplitude(l, m) - v).norm() < 1e-14);
        }
    }
}
