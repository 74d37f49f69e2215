//! Regenerate the bundled neon 2p bound-free table.
//!
//! Phases follow a quantum-defect model, `sigma_l + pi mu_l - l pi / 2` with
//! the Coulomb phase of the outgoing wave, and magnitudes decay smoothly with
//! energy. Run with `cargo run --example neon_table -- <out.csv>`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::PathBuf;

use arrabbit::matrix_elements::{momentum, RadialElementTable};
use arrabbit::special::{coulomb_phase, CoulombParams};
use num_complex::Complex64;

const MU_S: f64 = 1.30;
const MU_D: f64 = 0.02;

fn main() -> arrabbit::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data/neon_2p_bound_free.csv"));
    let mut rows = Vec::new();
    for i in 1..=200 {
        let e = i as f64 / 10.0;
        let eta = CoulombParams::sommerfeld(1.0, momentum(e)?);
        let envelope = (1.0 + e / 40.0).powf(-1.5);
        for (l_f, mu, mag) in [(0u32, MU_S, 0.35), (2, MU_D, 1.0)] {
            let phase = coulomb_phase(l_f as i32, eta)? + PI * mu - l_f as f64 * FRAC_PI_2;
            rows.push((e, 1u32, l_f, Complex64::from_polar(mag * envelope, phase)));
        }
    }
    let table = RadialElementTable::from_rows("neon-2p", rows)?;
    table.write_csv(&out)?;
    println!("wrote {}", out.display());
    Ok(())
}
