//! Velocity-map-imaging synthesis: 3D velocity-space density from band
//! observables, 2D projections and image/volume export.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::{lm_index, ylm_table};
use crate::error::{Error, Result};
use crate::fields::Axis;
use crate::observables::{beta_l_max, BetaMap};
use crate::HARTREE_EV;

/// Speed in a.u. for a kinetic energy in eV.
pub fn energy_to_speed(energy_ev: f64) -> Result<f64> {
    if !(energy_ev > 0.0) {
        return Err(Error::Domain(format!(
            "energy must be positive, got {energy_ev} eV"
        )));
    }
    Ok((2.0 * energy_ev / HARTREE_EV).sqrt())
}

/// One band for the volume: centre energy, Gaussian width and angular
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct VmiBand {
    pub label: String,
    pub energy_ev: f64,
    pub sigma_ev: f64,
    pub beta: BetaMap,
}

/// Cubic velocity grid centred on zero, `n` cells per side spanning
/// `[-extent, extent]` a.u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VmiGrid {
    pub n: usize,
    pub extent: f64,
}

impl VmiGrid {
    pub fn new(n: usize, extent: f64) -> Result<Self> {
        if n == 0 || !(extent > 0.0) {
            return Err(Error::InvalidArgument(
                "VMI grid needs n >= 1 and extent > 0".into(),
            ));
        }
        Ok(Self { n, extent })
    }

    /// Default extent `1.15 k(E_max + 4 sigma_max)` for the given bands.
    pub fn for_bands(n: usize, bands: &[VmiBand]) -> Result<Self> {
        Self::new(n, default_extent(bands)?)
    }

    pub fn cell(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    /// Velocity at the centre of cell `i`.
    pub fn center(&self, i: usize) -> f64 {
        -self.extent + (i as f64 + 0.5) * self.cell()
    }
}

fn default_extent(bands: &[VmiBand]) -> Result<f64> {
    if bands.is_empty() {
        return Err(Error::InvalidArgument("no bands for the VMI volume".into()));
    }
    let e_max = bands.iter().map(|b| b.energy_ev).fold(f64::MIN, f64::max);
    let sigma = bands.iter().map(|b| b.sigma_ev).fold(0.0, f64::max);
    Ok(1.15 * energy_to_speed(e_max + 4.0 * sigma)?)
}

/// Speed a band's Gaussian must fit within: `k(E + 4 sigma)`.
fn required_extent(bands: &[VmiBand]) -> Result<f64> {
    let mut req: f64 = 0.0;
    for b in bands {
        req = req.max(energy_to_speed(b.energy_ev + 4.0 * b.sigma_ev)?);
    }
    Ok(req)
}

/// Voxel density, index `(ix, iy, iz)` stored at `(ix * n + iy) * n + iz`.
#[derive(Debug, Clone, PartialEq)]
pub struct VmiVolume {
    pub grid: VmiGrid,
    pub data: Vec<f64>,
}

impl VmiVolume {
    pub fn get(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        let n = self.grid.n;
        self.data[(ix * n + iy) * n + iz]
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Shell-averaged density against speed, one bin per cell width.
    pub fn radial_profile(&self) -> Vec<(f64, f64)> {
        let n = self.grid.n;
        let dv = self.grid.cell();
        let nbins = (self.grid.extent * 3f64.sqrt() / dv).ceil() as usize + 1;
        let mut sum = vec![0.0; nbins];
        let mut count = vec![0usize; nbins];
        for ix in 0..n {
            let vx = self.grid.center(ix);
            for iy in 0..n {
                let vy = self.grid.center(iy);
                for iz in 0..n {
                    let vz = self.grid.center(iz);
                    let v = (vx * vx + vy * vy + vz * vz).sqrt();
                    let b = (v / dv).floor() as usize;
                    sum[b] += self.get(ix, iy, iz);
                    count[b] += 1;
                }
            }
        }
        (0..nbins)
            .filter(|&b| count[b] > 0)
            .map(|b| ((b as f64 + 0.5) * dv, sum[b] / count[b] as f64))
            .collect()
    }

    /// Write `f64` little-endian data plus a JSON header `<stem>.json`.
    pub fn export(&self, path: &Path) -> Result<PathBuf> {
        let mut bytes = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
        let header = VolumeHeader {
            dims: [self.grid.n; 3],
            extent: self.grid.extent,
            order: "row-major (x, y, z), z fastest".into(),
            dtype: "f64-le".into(),
            units: "velocity in atomic units".into(),
        };
        let side = path.with_extension("json");
        let text = serde_json::to_string_pretty(&header).expect("serializable header");
        fs::write(&side, text).map_err(|e| Error::io(&side, e))?;
        Ok(side)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VolumeHeader {
    dims: [usize; 3],
    extent: f64,
    order: String,
    dtype: String,
    units: String,
}

/// Gaussian band profiles are cut at this many widths.
const GAUSS_CUTOFF: f64 = 12.0;
const MAX_BANDS: usize = 64;

/// Density `sum_b exp(-(E(v) - E_b)^2 / 2 sigma_b^2) max(I_b(theta, phi), 0)`
/// with `E(v) = v^2 / 2` at each cell centre.
pub fn synthesize_volume(bands: &[VmiBand], grid: VmiGrid) -> Result<VmiVolume> {
    let req = required_extent(bands)?;
    if grid.extent < req {
        return Err(Error::Config(format!(
            "VMI extent {:.4} a.u. is too small; bands need at least {req:.4} a.u.",
            grid.extent
        )));
    }
    for b in bands {
        if !(b.sigma_ev > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "band {} has non-positive width",
                b.label
            )));
        }
    }
    if bands.len() > MAX_BANDS {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_BANDS} bands per volume"
        )));
    }
    let n = grid.n;
    let l_max = bands.iter().map(|b| beta_l_max(&b.beta)).max().unwrap_or(0);
    let coeffs: Vec<Vec<(usize, Complex64)>> = bands
        .iter()
        .map(|b| {
            b.beta
                .iter()
                .map(|(&(l, m), &v)| (lm_index(l, m), v))
                .collect()
        })
        .collect();
    let mut data = vec![0.0; n * n * n];
    data.par_chunks_mut(n * n)
        .enumerate()
        .for_each(|(ix, slab)| {
            let vx = grid.center(ix);
            for iy in 0..n {
                let vy = grid.center(iy);
                for iz in 0..n {
                    let vz = grid.center(iz);
                    let v2 = vx * vx + vy * vy + vz * vz;
                    let e = 0.5 * v2 * HARTREE_EV;
                    let mut weights = [0.0; MAX_BANDS];
                    let mut any = false;
                    for (w, b) in weights.iter_mut().zip(bands) {
                        let d = (e - b.energy_ev) / b.sigma_ev;
                        if d.abs() < GAUSS_CUTOFF {
                            *w = (-0.5 * d * d).exp();
                            any = true;
                        }
                    }
                    if !any {
                        continue;
                    }
                    let v = v2.sqrt();
                    let theta = if v > 0.0 {
                        (vz / v).clamp(-1.0, 1.0).acos()
                    } else {
                        0.0
                    };
                    let phi = vy.atan2(vx);
                    let table = ylm_table(l_max, theta, phi);
                    let mut density = 0.0;
                    for (w, c) in weights.iter().zip(&coeffs) {
                        if *w == 0.0 {
                            continue;
                        }
                        let i: f64 = c.iter().map(|(k, b)| (b * table[*k]).re).sum();
                        density += w * i.max(0.0);
                    }
                    slab[iy * n + iz] = density;
                }
            }
        });
    Ok(VmiVolume { grid, data })
}

/// 2D image; pixel `(row, col)` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VmiImage {
    pub axis: Axis,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
}

impl VmiImage {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pixels[r * self.cols + c]
    }

    pub fn sum(&self) -> f64 {
        self.pixels.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.pixels.iter().fold(0.0, |m: f64, &v| m.max(v))
    }
}

/// Sum the volume along `axis`. The remaining axes keep their cyclic order:
/// projecting along x gives `(y, z)`, along y `(z, x)`, along z `(x, y)`,
/// with the first as rows.
pub fn project(volume: &VmiVolume, axis: Axis) -> VmiImage {
    let n = volume.grid.n;
    let mut pixels = vec![0.0; n * n];
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                let v = volume.get(ix, iy, iz);
                let (r, c) = match axis {
                    Axis::X => (iy, iz),
                    Axis::Y => (iz, ix),
                    Axis::Z => (ix, iy),
                };
                pixels[r * n + c] += v;
            }
        }
    }
    VmiImage {
        axis,
        rows: n,
        cols: n,
        pixels,
    }
}

/// Image file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageFormat {
    Pgm,
    Csv,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Pgm => "pgm",
            ImageFormat::Csv => "csv",
        }
    }
}

/// Write an image. PGM stores 16-bit samples `round(65535 v / max)` with a
/// `# scale <max>` comment so readers can restore physical values.
pub fn write_image(image: &VmiImage, path: &Path, format: ImageFormat) -> Result<()> {
    let bytes = match format {
        ImageFormat::Pgm => {
            let max = image.max();
            let mut out = format!(
                "P5\n# scale {max:e}\n{} {}\n65535\n",
                image.cols, image.rows
            )
            .into_bytes();
            for &v in &image.pixels {
                let q = if max > 0.0 {
                    (v / max * 65535.0).round() as u16
                } else {
                    0
                };
                out.extend_from_slice(&q.to_be_bytes());
            }
            out
        }
        ImageFormat::Csv => {
            let mut out = Vec::new();
            for r in 0..image.rows {
                let row: Vec<String> = (0..image.cols)
                    .map(|c| format!("{}", image.get(r, c)))
                    .collect();
                writeln!(out, "{}", row.join(",")).expect("in-memory write");
            }
            out
        }
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn pgm_token<'a>(data: &'a [u8], pos: &mut usize, scale: &mut Option<f64>) -> Option<&'a [u8]> {
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            let start = *pos;
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
            let line = String::from_utf8_lossy(&data[start..*pos]);
            if let Some(v) = line.trim_start_matches('#').trim().strip_prefix("scale") {
                *scale = v.trim().parse().ok();
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &data[start..*pos])
}

/// Read an image written by [`write_image`].
pub fn read_image(path: &Path, format: ImageFormat, axis: Axis) -> Result<VmiImage> {
    let data = fs::read(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let perr = |line: u64, message: &str| Error::Parse {
        source_name: name.clone(),
        line,
        message: message.to_string(),
    };
    match format {
        ImageFormat::Pgm => {
            let mut pos = 0;
            let mut scale = None;
            let magic =
                pgm_token(&data, &mut pos, &mut scale).ok_or_else(|| perr(1, "empty file"))?;
            if magic != b"P5" {
                return Err(perr(1, "not a binary PGM"));
            }
            let mut num = |what: &str| -> Result<usize> {
                let t = pgm_token(&data, &mut pos, &mut scale).ok_or_else(|| perr(1, what))?;
                std::str::from_utf8(t)
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| perr(1, what))
            };
            let cols = num("missing width")?;
            let rows = num("missing height")?;
            let maxval = num("missing maxval")?;
            if maxval != 65535 {
                return Err(perr(1, "expected 16-bit samples"));
            }
            pos += 1;
            let payload = &data[pos.min(data.len())..];
            if payload.len() != rows * cols * 2 {
                return Err(perr(1, "payload size does not match dimensions"));
            }
            let scale = scale.unwrap_or(65535.0);
            let pixels = payload
                .chunks_exact(2)
                .map(|b| u16::from_be_bytes([b[0], b[1]]) as f64 / 65535.0 * scale)
                .collect();
            Ok(VmiImage {
                axis,
                rows,
                cols,
                pixels,
            })
        }
        ImageFormat::Csv => {
            let text = String::from_utf8(data).map_err(|_| perr(1, "not UTF-8"))?;
            let mut pixels = Vec::new();
            let mut rows = 0;
            let mut cols = None;
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let vals: std::result::Result<Vec<f64>, _> =
                    line.split(',').map(|s| s.trim().parse::<f64>()).collect();
                let vals = vals.map_err(|e| perr(i as u64 + 1, &e.to_string()))?;
                if *cols.get_or_insert(vals.len()) != vals.len() {
                    return Err(perr(i as u64 + 1, "ragged row"));
                }
                pixels.extend(vals);
                rows += 1;
            }
            Ok(VmiImage {
                axis,
                rows,
                cols: cols.unwrap_or(0),
                pixels,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso(e: f64) -> VmiBand {
        let mut beta = BetaMap::new();
        beta.insert(
            (0, 0),
            Complex64::new(1.0 / (4.0 * std::f64::consts::PI).sqrt(), 0.0),
        );
        VmiBand {
            label: "b".into(),
            energy_ev: e,
            sigma_ev: 0.1,
            beta,
        }
    }

    #[test]
    fn speed_values() {
        assert!((energy_to_speed(0.5 * HARTREE_EV).unwrap() - 1.0).abs() < 1e-14);
        let r = energy_to_speed(4.0).unwrap() / energy_to_speed(1.0).unwrap();
        assert!((r - 2.0).abs() < 1e-14);
        assert!((energy_to_speed(1.69).unwrap() - 0.3524).abs() < 1e-4);
        assert!(energy_to_speed(0.0).is_err());
    }

    #[test]
    fn extent_check() {
        let bands = [iso(3.24)];
        assert!(matches!(
            synthesize_volume(&bands, VmiGrid::new(8, 0.1).unwrap()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn shell_radius_and_flux() {
        let bands = [iso(3.24)];
        let grid = VmiGrid::for_bands(40, &bands).unwrap();
        let vol = synthesize_volume(&bands, grid).unwrap();
        let prof = vol.radial_profile();
        let peak = prof.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
        assert!((peak - energy_to_speed(3.24).unwrap()).abs() <= grid.cell());
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            let img = project(&vol, axis);
            assert!((img.sum() - vol.sum()).abs() <= 1e-9 * vol.sum());
        }
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = VmiImage {
            axis: Axis::Z,
            rows: 2,
            cols: 3,
            pixels: vec![0.0, 1.0, 2.0, 3.5, 0.25, 7.0],
        };
        let p = dir.path().join("a.pgm");
        write_image(&img, &p, ImageFormat::Pgm).unwrap();
        let back = read_image(&p, ImageFormat::Pgm, Axis::Z).unwrap();
        for (a, b) in img.pixels.iter().zip(&back.pixels) {
            assert!((a - b).abs() <= 7.0 / 65535.0);
        }
        let c = dir.path().join("a.csv");
        write_image(&img, &c, ImageFormat::Csv).unwrap();
        assert_eq!(
            read_image(&c, ImageFormat::Csv, Axis::Z).unwrap().pixels,
            img.pixels
        );
    }
}
