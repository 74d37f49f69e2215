//! Config-driven runner: parse a TOML run description, assemble the scheme,
//! execute delay scans and write tables, images and a checksum manifest.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::angular::AngularMomentumState;
use crate::error::{Error, Result};
use crate::fields::{
    angular_frequency, band_energies, circular_components, photon_energy_ev, Axis, Band, BandKind,
    DelayGrid, FieldSpec, HarmonicComb, Path as BandPath, PolarizationState,
};
use crate::matrix_elements::{
    load_bound_free, model_channels, BoundFreeSource, CcMode, ContinuumCouplingSource,
    CoulombCoupling, ModelScenario, RadialElementTable,
};
use crate::observables::{
    beta_expansion, delay_scan, fit_fixed_frequency, intensity_at, up_down_asymmetry,
    AngularObservable, BandPathways, ChannelSources, InitialState, SidebandFit,
};
use crate::vmi::{project, synthesize_volume, write_image, ImageFormat, VmiBand, VmiGrid};
use crate::wavefunction::{compose, one_photon_state, two_photon_state, IrDirection};

/// Interferometer scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Standard,
    Extended,
    ModelA,
    ModelB,
    ModelC,
    ParityMix,
}

impl Scheme {
    pub fn model_scenario(self) -> Option<ModelScenario> {
        match self {
            Scheme::ModelA => Some(ModelScenario::A),
            Scheme::ModelB => Some(ModelScenario::B),
            Scheme::ModelC => Some(ModelScenario::C),
            _ => None,
        }
    }

    pub fn from_model(s: ModelScenario) -> Self {
        match s {
            ModelScenario::A => Scheme::ModelA,
            ModelScenario::B => Scheme::ModelB,
            ModelScenario::C => Scheme::ModelC,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub driver_wavelength_nm: f64,
    /// Overrides the photon energy derived from the wavelength.
    pub ir_photon_ev: Option<f64>,
    pub orders: Vec<i32>,
    #[serde(default)]
    pub even_harmonics: bool,
    pub amplitudes: Option<Vec<f64>>,
    pub xuv_phases_rad: Option<Vec<f64>>,
    pub ip_ev: f64,
    /// Transverse XUV field with this y-phase; linear along z when absent.
    pub phi_y_xuv_rad: Option<f64>,
    #[serde(default = "axis_z")]
    pub xuv_propagation: Axis,
    pub phi_y_ir_rad: Option<f64>,
    #[serde(default = "axis_z")]
    pub ir_propagation: Axis,
}

fn axis_z() -> Axis {
    Axis::Z
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub l: i32,
    #[serde(default)]
    pub m: i32,
    #[serde(default)]
    pub average_m: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementSource {
    Model,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixElementConfig {
    pub source: ElementSource,
    /// Scenario for model sources in non-model schemes.
    pub model_scenario: Option<ModelScenario>,
    /// Bound-free CSV, relative to the config file.
    pub bound_free_csv: Option<PathBuf>,
    #[serde(default)]
    pub continuum: CcMode,
    #[serde(default = "unit_charge")]
    pub charge: f64,
}

fn unit_charge() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGridConfig {
    pub start_cycles: Option<f64>,
    pub stop_cycles: Option<f64>,
    pub start_fs: Option<f64>,
    pub stop_fs: Option<f64>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Band labels to keep; all bands when absent.
    pub bands: Option<Vec<String>>,
    #[serde(default = "yes")]
    pub fit: bool,
    #[serde(default = "default_theta")]
    pub pad_theta_points: usize,
    #[serde(default = "default_phi")]
    pub pad_phi_points: usize,
    #[serde(default)]
    pub pad_tau_fs: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            bands: None,
            fit: true,
            pad_theta_points: default_theta(),
            pad_phi_points: default_phi(),
            pad_tau_fs: 0.0,
        }
    }
}

fn yes() -> bool {
    true
}
fn default_theta() -> usize {
    91
}
fn default_phi() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParityMixConfig {
    /// Band whose one-photon (odd) and absorption (even) pathways interfere.
    pub band: String,
    #[serde(default)]
    pub phi2_start_rad: f64,
    #[serde(default = "two_pi")]
    pub phi2_stop_rad: f64,
    #[serde(default = "default_phi2_samples")]
    pub samples: usize,
}

fn two_pi() -> f64 {
    2.0 * PI
}
fn default_phi2_samples() -> usize {
    21
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VmiConfig {
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_sigma")]
    pub sigma_ev: f64,
    pub extent_au: Option<f64>,
    #[serde(default)]
    pub tau_fs: f64,
    #[serde(default = "all_axes")]
    pub projections: Vec<Axis>,
    #[serde(default = "default_format")]
    pub format: ImageFormat,
    #[serde(default)]
    pub export_volume: bool,
}

fn default_grid() -> usize {
    200
}
fn default_sigma() -> f64 {
    0.1
}
fn all_axes() -> Vec<Axis> {
    vec![Axis::X, Axis::Y, Axis::Z]
}
fn default_format() -> ImageFormat {
    ImageFormat::Pgm
}

/// Complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Scheme,
    #[serde(default)]
    pub description: String,
    pub field: FieldConfig,
    pub initial: InitialConfig,
    pub matrix_elements: MatrixElementConfig,
    pub tau_grid: TauGridConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    pub parity_mix: Option<ParityMixConfig>,
    pub vmi: Option<VmiConfig>,
    /// Directory of the config file, for resolving relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Command-line overrides of a config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub matrix_elements: Option<PathBuf>,
    pub model: Option<ModelScenario>,
}

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, &base)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.matrix_elements {
            self.matrix_elements.source = ElementSource::File;
            self.matrix_elements.bound_free_csv = Some(p.clone());
            if self.scheme.model_scenario().is_some() {
                self.scheme = Scheme::Standard;
            }
            // Paths given on the command line are relative to the caller.
            self.base_dir = PathBuf::new();
        }
        if let Some(m) = o.model {
            self.scheme = Scheme::from_model(m);
            self.matrix_elements.source = ElementSource::Model;
        }
    }

    pub fn ir_photon_ev(&self) -> f64 {
        self.field
            .ir_photon_ev
            .unwrap_or_else(|| photon_energy_ev(self.field.driver_wavelength_nm))
    }

    pub fn ir_omega(&self) -> f64 {
        angular_frequency(self.ir_photon_ev())
    }

    pub fn ir_period_s(&self) -> f64 {
        2.0 * PI / self.ir_omega()
    }

    fn polarization(phi: Option<f64>, axis: Axis) -> PolarizationState {
        match phi {
            Some(p) => circular_components(p, axis),
            None => PolarizationState::linear_z(),
        }
    }

    pub fn field_spec(&self) -> Result<FieldSpec> {
        let f = &self.field;
        let comb = HarmonicComb::new(
            f.driver_wavelength_nm,
            f.orders.clone(),
            f.amplitudes.clone(),
            f.xuv_phases_rad.clone(),
            f.even_harmonics,
        )?;
        if !(f.ip_ev > 0.0) {
            return Err(Error::InvalidArgument("ip_ev must be positive".into()));
        }
        Ok(FieldSpec {
            comb,
            ir_photon_ev: self.ir_photon_ev(),
            ip_ev: f.ip_ev,
            xuv_polarization: Self::polarization(f.phi_y_xuv_rad, f.xuv_propagation),
            ir_polarization: Self::polarization(f.phi_y_ir_rad, f.ir_propagation),
        })
    }

    pub fn delay_grid(&self) -> Result<DelayGrid> {
        let d = &self.tau_grid;
        let period = self.ir_period_s();
        match (d.start_cycles, d.stop_cycles, d.start_fs, d.stop_fs) {
            (Some(a), Some(b), None, None) => DelayGrid::new(a * period, b * period, d.n),
            (None, None, Some(a), Some(b)) => DelayGrid::new(a * 1e-15, b * 1e-15, d.n),
            _ => Err(Error::Config(
                "tau_grid needs either start_cycles/stop_cycles or start_fs/stop_fs".into(),
            )),
        }
    }

    pub fn initial_state(&self) -> Result<InitialState> {
        InitialState::new(self.initial.l, self.initial.m, self.initial.average_m)
    }

    pub fn bound_free_path(&self) -> Option<PathBuf> {
        self.matrix_elements.bound_free_csv.as_ref().map(|p| {
            if p.is_absolute() {
                p.clone()
            } else {
                self.base_dir.join(p)
            }
        })
    }

    /// Every violation found without running; empty when the run would pass
    /// validation.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let field = match self.field_spec() {
            Ok(f) => Some(f),
            Err(e) => {
                v.push(e.to_string());
                None
            }
        };
        if self.ir_photon_ev() <= 0.0 {
            v.push("ir_photon_ev must be positive".into());
        }
        let has_even = self.field.orders.iter().any(|n| n % 2 == 0);
        match self.scheme {
            Scheme::Extended | Scheme::ParityMix => {
                if !self.field.even_harmonics || !has_even {
                    v.push("even harmonics required: set even_harmonics = true and include even orders".into());
                }
            }
            _ => {
                if has_even {
                    v.push(
                        "even harmonic orders are only allowed in extended and parity-mix schemes"
                            .into(),
                    );
                }
            }
        }
        if let Err(e) = self.initial_state() {
            v.push(format!("initial state: {e}"));
        }
        let model_like = self.scheme.model_scenario().is_some() || self.scheme == Scheme::ParityMix;
        if model_like && self.initial.l != 0 {
            v.push("model schemes start from an s state (initial.l = 0)".into());
        }
        match self.matrix_elements.source {
            ElementSource::File => match self.bound_free_path() {
                None => v.push("matrix_elements.source = \"file\" needs bound_free_csv".into()),
                Some(p) => {
                    if !p.is_file() {
                        v.push(format!("bound-free file {} does not exist", p.display()));
                    } else if let Err(e) = load_bound_free(&p) {
                        v.push(e.to_string());
                    }
                }
            },
            ElementSource::Model => {
                if !model_like && self.matrix_elements.model_scenario.is_none() {
                    v.push("model matrix elements need matrix_elements.model_scenario".into());
                }
                if self.initial.l != 0 {
                    v.push("model matrix elements only cover an initial s state".into());
                }
            }
        }
        if model_like && self.matrix_elements.source == ElementSource::File {
            v.push("model and parity-mix schemes use built-in model matrix elements".into());
        }
        if !(self.matrix_elements.charge > 0.0) {
            v.push("matrix_elements.charge must be positive".into());
        }
        let grid = match self.delay_grid() {
            Ok(g) => Some(g),
            Err(e) => {
                v.push(e.to_string());
                None
            }
        };
        if self.analysis.fit {
            if let Some(g) = &grid {
                let spp = g.samples_per_period(2.0 * self.ir_omega());
                if g.len() > 1 && spp < 8.0 - 1e-9 {
                    v.push(format!(
                        "sampling precondition: fits need >= 8 samples per period of 2w, delay grid gives {spp:.2}"
                    ));
                }
                if g.len() < 3 {
                    v.push("fits need at least three delay samples".into());
                }
            }
        }
        if self.analysis.pad_theta_points < 2 || self.analysis.pad_phi_points < 1 {
            v.push("PAD grid needs >= 2 theta points and >= 1 phi point".into());
        }
        if let Some(f) = &field {
            match band_energies(&f.comb, f.ip_ev, f.ir_photon_ev) {
                Err(e) => v.push(e.to_string()),
                Ok(bands) => {
                    if let Some(sel) = &self.analysis.bands {
                        for b in sel {
                            if !bands.iter().any(|x| &x.label == b) {
                                v.push(format!("band {b} is not produced by this comb"));
                            }
                        }
                    }
                    if self.scheme == Scheme::ParityMix {
                        match &self.parity_mix {
                            None => v.push("parity-mix scheme needs a [parity_mix] section".into()),
                            Some(pm) => match bands.iter().find(|x| x.label == pm.band) {
                                None => v.push(format!(
                                    "parity-mix band {} not produced by this comb",
                                    pm.band
                                )),
                                Some(b) => {
                                    if !b.paths.iter().any(|p| matches!(p, BandPath::Xuv(_)))
                                        || !b
                                            .paths
                                            .iter()
                                            .any(|p| matches!(p, BandPath::XuvPlusIr(_)))
                                    {
                                        v.push(format!(
                                            "parity-mix band {} needs a one-photon and an absorption pathway",
                                            pm.band
                                        ));
                                    }
                                    if pm.samples < 2 {
                                        v.push("parity_mix.samples must be >= 2".into());
                                    }
                                }
                            },
                        }
                    }
                }
            }
        }
        if let Some(vc) = &self.vmi {
            if vc.enabled {
                if vc.grid == 0 {
                    v.push("vmi.grid must be positive".into());
                }
                if !(vc.sigma_ev > 0.0) {
                    v.push("vmi.sigma_ev must be positive".into());
                }
            }
        }
        v
    }
}

/// Loaded radial-element sources for a run.
struct Sources {
    bound_free: Option<RadialElementTable>,
    coulomb: Option<CoulombCoupling>,
    model: Option<[RadialElementTable; 2]>,
}

impl Sources {
    fn load(cfg: &RunConfig) -> Result<Self> {
        match cfg.matrix_elements.source {
            ElementSource::File => {
                let path = cfg
                    .bound_free_path()
                    .ok_or_else(|| Error::Config("bound_free_csv missing".into()))?;
                Ok(Self {
                    bound_free: Some(load_bound_free(&path)?),
                    coulomb: Some(CoulombCoupling::new(
                        cfg.matrix_elements.charge,
                        cfg.matrix_elements.continuum,
                    )),
                    model: None,
                })
            }
            ElementSource::Model => {
                let scenario = cfg
                    .scheme
                    .model_scenario()
                    .or(cfg.matrix_elements.model_scenario)
                    .unwrap_or(ModelScenario::A);
                Ok(Self {
                    bound_free: None,
                    coulomb: None,
                    model: Some(model_channels(scenario)),
                })
            }
        }
    }

    fn channels(&self) -> ChannelSources<'_> {
        if let Some([one, two]) = &self.model {
            return ChannelSources {
                direct: one,
                plus: (one, one),
                minus: (two, two),
            };
        }
        let bf: &dyn BoundFreeSource = self.bound_free.as_ref().expect("file source");
        let cc: &dyn ContinuumCouplingSource = self.coulomb.as_ref().expect("file source");
        ChannelSources {
            direct: bf,
            plus: (bf, cc),
            minus: (bf, cc),
        }
    }
}

/// Results of a run held in memory.
#[derive(Debug, Clone)]
pub struct RunResults {
    pub bands: Vec<Band>,
    pub observables: Vec<AngularObservable>,
    pub fits: Vec<FitRow>,
    pub asymmetry: Vec<AsymmetryRow>,
    pub pathways: Vec<BandPathways>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRow {
    pub band: String,
    pub energy_ev: f64,
    pub quantity: String,
    pub harmonic: u32,
    pub fit: SidebandFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AsymmetryRow {
    pub phi2: f64,
    pub asymmetry: f64,
    pub yield_: f64,
    pub beta: crate::observables::BetaMap,
}

/// Compute every observable of a validated config without writing files.
pub fn compute(cfg: &RunConfig) -> Result<RunResults> {
    let problems = cfg.validate();
    if !problems.is_empty() {
        return Err(Error::Validation(problems.join("; ")));
    }
    let field = cfg.field_spec()?;
    let grid = cfg.delay_grid()?;
    let taus = grid.values();
    let initial = cfg.initial_state()?;
    let sources = Sources::load(cfg)?;
    let channels = sources.channels();
    let mut bands = band_energies(&field.comb, field.ip_ev, field.ir_photon_ev)?;
    if let Some(sel) = &cfg.analysis.bands {
        bands.retain(|b| sel.contains(&b.label));
    }
    let omega = field.ir_omega();

    let mut pathways = Vec::new();
    let mut observables = Vec::new();
    for band in &bands {
        let bp = BandPathways::build(band, &field, initial, channels)?;
        observables.push(delay_scan(&bp, &taus)?);
        pathways.push(bp);
    }

    let mut fits = Vec::new();
    if cfg.analysis.fit {
        for (band, obs) in bands.iter().zip(&observables) {
            if band.has_rabbit_pair() {
                let fit = fit_fixed_frequency(&taus, &obs.yields(), 2.0 * omega)?;
                fits.push(FitRow {
                    band: band.label.clone(),
                    energy_ev: band.energy_ev,
                    quantity: "yield".into(),
                    harmonic: 2,
                    fit,
                });
            }
            let y_scale = obs.yields().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if band.has_one_photon_path() && band.has_two_photon_paths() {
                for (l, m) in obs.keys() {
                    if l % 2 == 1 && m == 0 {
                        let series: Vec<f64> = obs.beta_series(l, 0).iter().map(|c| c.re).collect();
                        let peak = series.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                        if peak <= 1e-12 * y_scale {
                            continue;
                        }
                        if let Ok(fit) = fit_fixed_frequency(&taus, &series, omega) {
                            fits.push(FitRow {
                                band: band.label.clone(),
                                energy_ev: band.energy_ev,
                                quantity: format!("beta_{l}_0"),
                                harmonic: 1,
                                fit,
                            });
                        }
                    }
                }
            }
        }
    }

    let mut asymmetry = Vec::new();
    if cfg.scheme == Scheme::ParityMix {
        let pm = cfg.parity_mix.as_ref().expect("validated");
        let band = band_energies(&field.comb, field.ip_ev, field.ir_photon_ev)?
            .into_iter()
            .find(|b| b.label == pm.band)
            .expect("validated");
        asymmetry = parity_mix_sweep(&band, &field, initial, channels, pm)?;
    }

    Ok(RunResults {
        bands,
        observables,
        fits,
        asymmetry,
        pathways,
    })
}

/// `Psi = Psi_odd + Psi_even e^{i phi2}` over a uniform `phi2` sweep
/// including both end points.
pub fn parity_mix_sweep(
    band: &Band,
    field: &FieldSpec,
    initial: InitialState,
    channels: ChannelSources<'_>,
    pm: &ParityMixConfig,
) -> Result<Vec<AsymmetryRow>> {
    let init = AngularMomentumState::new(initial.l, initial.m)?;
    let odd = one_photon_state(init, band.order, field, channels.direct, 0.0)?;
    let even = two_photon_state(
        init,
        band.order - 1,
        IrDirection::Absorb,
        field,
        channels.plus.0,
        channels.plus.1,
        0.0,
    )?;
    let n = pm.samples;
    (0..n)
        .map(|j| {
            let phi2 = pm.phi2_start_rad
                + (pm.phi2_stop_rad - pm.phi2_start_rad) * j as f64 / (n - 1) as f64;
            let psi = compose(&[odd.clone(), even.clone()], &[0.0, phi2])?;
            let beta = beta_expansion(&psi);
            Ok(AsymmetryRow {
                phi2,
                asymmetry: up_down_asymmetry(&beta),
                yield_: crate::observables::beta_yield(&beta),
                beta,
            })
        })
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.15e}")
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
        self.written.push(p);
        Ok(())
    }

    fn remove_all(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

#[derive(Debug, Serialize)]
struct ManifestEntry {
    file: String,
    bytes: u64,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest {
    config: String,
    scheme: Scheme,
    files: Vec<ManifestEntry>,
}

/// Summary of a completed run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Run a config and write outputs into `out_dir`. On failure every file
/// written by this run is removed.
pub fn run(cfg: &RunConfig, config_name: &str, out_dir: &Path) -> Result<RunSummary> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut w = Writer {
        dir: out_dir.to_path_buf(),
        written: Vec::new(),
    };
    match write_outputs(cfg, config_name, &mut w) {
        Ok(manifest) => Ok(RunSummary {
            out_dir: out_dir.to_path_buf(),
            files: w.written.clone(),
            manifest,
        }),
        Err(e) => {
            w.remove_all();
            Err(e)
        }
    }
}

fn write_outputs(cfg: &RunConfig, config_name: &str, w: &mut Writer) -> Result<PathBuf> {
    let res = compute(cfg)?;
    let period = cfg.ir_period_s();

    let mut betas = String::from("band,energy_ev,tau_fs,tau_cycles,L,M,re,im\n");
    let mut yields = String::from("band,energy_ev,tau_fs,tau_cycles,yield\n");
    for obs in &res.observables {
        for r in &obs.records {
            let (tf, tc) = (fmt(r.tau * 1e15), fmt(r.tau / period));
            yields.push_str(&format!(
                "{},{},{tf},{tc},{}\n",
                obs.label,
                fmt(obs.energy_ev),
                fmt(r.yield_)
            ));
            for (&(l, m), b) in &r.beta {
                betas.push_str(&format!(
                    "{},{},{tf},{tc},{l},{m},{},{}\n",
                    obs.label,
                    fmt(obs.energy_ev),
                    fmt(b.re),
                    fmt(b.im)
                ));
            }
        }
    }
    w.write("betas.csv", betas.as_bytes())?;
    w.write("yields.csv", yields.as_bytes())?;

    if cfg.analysis.fit {
        let mut fits =
            String::from("band,energy_ev,quantity,frequency,offset,amplitude,phase_rad,rms\n");
        for f in &res.fits {
            fits.push_str(&format!(
                "{},{},{},{}w,{},{},{},{}\n",
                f.band,
                fmt(f.energy_ev),
                f.quantity,
                f.harmonic,
                fmt(f.fit.offset),
                fmt(f.fit.amplitude),
                fmt(f.fit.phase),
                fmt(f.fit.rms)
            ));
        }
        w.write("fits.csv", fits.as_bytes())?;
    }

    // Angular distributions on a (theta, phi) grid at one delay.
    let a = &cfg.analysis;
    let tau_pad = a.pad_tau_fs * 1e-15;
    let mut pads = String::from("band,tau_fs,theta_deg,phi_deg,intensity\n");
    for bp in &res.pathways {
        let rec = bp.record(tau_pad)?;
        for it in 0..a.pad_theta_points {
            let theta = PI * it as f64 / (a.pad_theta_points - 1) as f64;
            for ip in 0..a.pad_phi_points {
                let phi = 2.0 * PI * ip as f64 / a.pad_phi_points as f64;
                pads.push_str(&format!(
                    "{},{},{},{},{}\n",
                    bp.band.label,
                    fmt(a.pad_tau_fs),
                    fmt(theta.to_degrees()),
                    fmt(phi.to_degrees()),
                    fmt(intensity_at(&rec.beta, theta, phi))
                ));
            }
        }
    }
    w.write("pads.csv", pads.as_bytes())?;

    if !res.asymmetry.is_empty() {
        let mut s = String::from("phi2_rad,asymmetry,yield\n");
        for r in &res.asymmetry {
            s.push_str(&format!(
                "{},{},{}\n",
                fmt(r.phi2),
                fmt(r.asymmetry),
                fmt(r.yield_)
            ));
        }
        w.write("asymmetry.csv", s.as_bytes())?;
    }

    if let Some(vc) = cfg.vmi.as_ref().filter(|v| v.enabled) {
        let tau = vc.tau_fs * 1e-15;
        let mut vbands = Vec::new();
        for bp in &res.pathways {
            vbands.push(VmiBand {
                label: bp.band.label.clone(),
                energy_ev: bp.band.energy_ev,
                sigma_ev: vc.sigma_ev,
                beta: bp.record(tau)?.beta,
            });
        }
        let grid = match vc.extent_au {
            Some(e) => VmiGrid::new(vc.grid, e)?,
            None => VmiGrid::for_bands(vc.grid, &vbands)?,
        };
        let volume = synthesize_volume(&vbands, grid)?;
        for &axis in &vc.projections {
            let img = project(&volume, axis);
            let name = format!("vmi_{}.{}", axis_name(axis), vc.format.extension());
            let p = w.dir.join(&name);
            write_image(&img, &p, vc.format)?;
            w.written.push(p);
        }
        if vc.export_volume {
            let p = w.dir.join("vmi_volume.bin");
            w.written.push(p.clone());
            let side = volume.export(&p)?;
            w.written.push(side);
        }
        let mut rings = String::from("band,kind,energy_ev,speed_au,radius_pixels\n");
        for b in &res.bands {
            let k = crate::vmi::energy_to_speed(b.energy_ev)?;
            let kind = match b.kind {
                BandKind::Direct => "direct",
                BandKind::Sideband => "sideband",
            };
            rings.push_str(&format!(
                "{},{kind},{},{},{}\n",
                b.label,
                fmt(b.energy_ev),
                fmt(k),
                fmt(k / grid.cell())
            ));
        }
        w.write("vmi_rings.csv", rings.as_bytes())?;
    }

    let mut files = Vec::new();
    for p in &w.written {
        let bytes = fs::read(p).map_err(|e| Error::io(p, e))?;
        files.push(ManifestEntry {
            file: p
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default(),
            bytes: bytes.len() as u64,
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
    }
    let manifest = Manifest {
        config: config_name.to_string(),
        scheme: cfg.scheme,
        files,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("serializable manifest");
    w.write("manifest.json", text.as_bytes())?;
    Ok(w.dir.join("manifest.json"))
}

fn axis_name(a: Axis) -> &'static str {
    match a {
        Axis::X => "x",
        Axis::Y => "y",
        Axis::Z => "z",
    }
}

/// Machine-readable error report.
pub fn error_report(e: &Error) -> serde_json::Value {
    let mut v = serde_json::json!({
        "status": "error",
        "kind": e.kind(),
        "message": e.to_string(),
    });
    if let Error::Convergence {
        spread,
        tolerance,
        extrapolants,
        ..
    } = e
    {
        v["spread"] = serde_json::json!(spread);
        v["tolerance"] = serde_json::json!(tolerance);
        v["extrapolants"] = serde_json::json!(extrapolants
            .iter()
            .map(|c| [c.re, c.im])
            .collect::<Vec<_>>());
    }
    if let Error::Validation(msg) = e {
        v["violations"] = serde_json::json!(msg.split("; ").collect::<Vec<_>>());
    }
    v
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct W {
            s: Scheme,
        }
        toml::from_str::<W>(&format!("s = {:?}", s))
            .map(|w| w.s)
            .map_err(|_| Error::InvalidArgument(format!("unknown scheme '{s}'")))
    }
}
