//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the library's physics or encoder code; constants
//! are restated from CODATA 2018 (with the conventional μ0/4π = 1e-7) and
//! formulas are written out in SI units.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nvscope::Vec3;

/// γ_p / 2π, Hz/T.
pub const GAMMA_BAR_HZ_PER_T: f64 = 42.577_478_518e6;
/// γ_p, rad s⁻¹ T⁻¹.
pub const GAMMA_RAD: f64 = 2.675_221_874_4e8;
pub const MU0_OVER_4PI: f64 = 1e-7;
pub const HBAR: f64 = 1.054_571_817e-34;

pub fn beta_cd_path() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/data/beta_cyclodextrin.xyz").to_string()
}

pub fn beta_cd_pdb_path() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/data/beta_cyclodextrin.pdb").to_string()
}

/// Field variance (T²) along `axis` at `nv` from one unpolarized proton at `spin`,
/// positions in nm: (μ0 γ ħ / 4π)² (3 cos²θ + 1) / (4 r⁶).
pub fn proton_variance(spin: &Vec3, nv: &Vec3, axis: &Vec3) -> f64 {
    let dx = (spin.x - nv.x) * 1e-9;
    let dy = (spin.y - nv.y) * 1e-9;
    let dz = (spin.z - nv.z) * 1e-9;
    let r2 = dx * dx + dy * dy + dz * dz;
    let r = r2.sqrt();
    let an = (axis.x * axis.x + axis.y * axis.y + axis.z * axis.z).sqrt();
    let cos = (dx * axis.x + dy * axis.y + dz * axis.z) / (r * an);
    let k = MU0_OVER_4PI * GAMMA_RAD * HBAR;
    k * k * (3.0 * cos * cos + 1.0) / (4.0 * r2 * r2 * r2)
}

pub fn brms(spins: &[Vec3], nv: &Vec3, axis: &Vec3) -> f64 {
    spins.iter().map(|s| proton_variance(s, nv, axis)).sum::<f64>().sqrt()
}

/// Brute-force slice binning: each spin goes to the slice k = round(u·x / Δr)
/// and slice amplitudes are the root of the summed variances.
pub fn binned_spectrum(
    spins: &[Vec3],
    theta: f64,
    phi: f64,
    delta_f: f64,
    gradient_t_per_m: f64,
    nv: &Vec3,
    axis: &Vec3,
) -> BTreeMap<i64, f64> {
    let dr = delta_f / (GAMMA_BAR_HZ_PER_T * gradient_t_per_m * 1e-9);
    let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let mut slices: BTreeMap<i64, f64> = BTreeMap::new();
    for s in spins {
        let r = s.x * u[0] + s.y * u[1] + s.z * u[2];
        *slices.entry((r / dr).round() as i64).or_default() += proton_variance(s, nv, axis);
    }
    slices.into_iter().map(|(k, v)| (k, v.sqrt())).collect()
}

/// Occupied band (first to last occupied slice, inclusive) in Hz.
pub fn occupied_band_hz(slices: &BTreeMap<i64, f64>, delta_f: f64) -> f64 {
    match (slices.keys().next(), slices.keys().next_back()) {
        (Some(a), Some(b)) => (b - a + 1) as f64 * delta_f,
        _ => 0.0,
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
