//! Physical constants, thermal polarization, spin-noise statistics, the
//! dipolar field fluctuation at the NV sensor, Larmor mapping, and the
//! magnetic-tip gradient model.

mod tip;

pub use tip::{gradient_at_sample, moment_for_gradient, tip_field, GradientReport, TipModel};

use crate::error::{Error, Result};
use crate::Vec3;

/// CODATA 2018 values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Proton gyromagnetic ratio, rad s^-1 T^-1.
    pub gamma_h: f64,
    /// Proton gyromagnetic ratio over 2π, Hz/T.
    pub gamma_h_hz: f64,
    /// μ0/4π, T·m/A.
    pub mu0_over_4pi: f64,
    pub hbar: f64,
    pub h_planck: f64,
    pub k_boltzmann: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    gamma_h: 2.675_221_874_4e8,
    gamma_h_hz: 42.577_478_518e6,
    mu0_over_4pi: 1.0e-7,
    hbar: 1.054_571_817e-34,
    h_planck: 6.626_070_15e-34,
    k_boltzmann: 1.380_649e-23,
};

impl PhysicalConstants {
    /// γ/2π in kHz per gauss.
    pub fn gamma_h_khz_per_gauss(&self) -> f64 {
        self.gamma_h_hz * 1e-4 * 1e-3
    }
}

pub const GAUSS: f64 = 1e-4;
/// 1 G/nm expressed in T/m.
pub const GAUSS_PER_NM: f64 = 1e5;
pub const NM: f64 = 1e-9;

/// Closest approach allowed between a spin and the sensor.
pub const MIN_SPIN_DISTANCE_NM: f64 = 0.1;

/// Excess spin population from the Boltzmann distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoltzmannExcess {
    /// N (exp(ΔE/kT) - 1)
    pub exact: f64,
    /// N h γ B / (2π k T)
    pub approx: f64,
    /// ΔE / kT
    pub energy_ratio: f64,
}

pub fn boltzmann_excess(n_spins: f64, b_field: f64, temperature: f64) -> Result<BoltzmannExcess> {
    if !(temperature > 0.0) {
        return Err(Error::invalid(format!("temperature must be > 0 K, got {temperature}")));
    }
    if !(n_spins >= 0.0) {
        return Err(Error::invalid("spin count must be >= 0"));
    }
    let c = &CONSTANTS;
    let delta_e = c.hbar * c.gamma_h * b_field;
    let x = delta_e / (c.k_boltzmann * temperature);
    Ok(BoltzmannExcess {
        exact: n_spins * x.exp_m1(),
        approx: n_spins * c.h_planck * c.gamma_h * b_field
            / (2.0 * std::f64::consts::PI * c.k_boltzmann * temperature),
        energy_ratio: x,
    })
}

/// r.m.s. of n_up - n_down for N unpolarized spin-1/2 particles.
pub fn spin_noise_sigma(n_spins: f64) -> f64 {
    n_spins.max(0.0).sqrt()
}

/// Larmor frequency in Hz for a field in tesla.
pub fn larmor_frequency(b0: f64) -> f64 {
    CONSTANTS.gamma_h_hz * b0
}

/// Frequency-to-position slope γ/2π·|∇B| in Hz/nm, with the gradient in T/m.
pub fn hz_per_nm(gradient_t_per_m: f64) -> f64 {
    CONSTANTS.gamma_h_hz * gradient_t_per_m * NM
}

/// NV sensor location (nm) and unit quantization axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NvGeometry {
    pub position: Vec3,
    pub axis: Vec3,
}

impl NvGeometry {
    pub fn new(position: Vec3, axis: Vec3) -> Result<Self> {
        let norm = axis.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::invalid("NV axis must be a nonzero finite vector"));
        }
        Ok(NvGeometry {
            position,
            axis: axis / norm,
        })
    }

    /// ⟨111⟩ bond direction of an NV in a (100)-cut diamond, 54.74° from the
    /// surface normal, tilted toward +x.
    pub fn axis_111() -> Vec3 {
        Vec3::new((2.0f64 / 3.0).sqrt(), 0.0, (1.0f64 / 3.0).sqrt())
    }
}

/// (μ0/4π · γħ)² / 4 with lengths in nm, so that dividing by r_nm⁶ gives T².
fn dipolar_prefactor() -> f64 {
    let c = &CONSTANTS;
    let coupling = c.mu0_over_4pi * c.gamma_h * c.hbar;
    coupling * coupling * 0.25 / NM.powi(6)
}

/// Variance (T²) of the field component along `nv_axis` produced at the NV by
/// one unpolarized proton: (μ0γħ/4π)² (3cos²θ + 1) / (4 r⁶).
pub fn dipolar_variance(spin: &Vec3, nv_pos: &Vec3, nv_axis: &Vec3) -> Result<f64> {
    let d = spin - nv_pos;
    let r2 = d.norm_squared();
    let r = r2.sqrt();
    if !(r > MIN_SPIN_DISTANCE_NM) {
        return Err(Error::SpinTooClose { distance_nm: r });
    }
    let proj = d.dot(nv_axis);
    let cos2 = proj * proj / r2;
    Ok(dipolar_prefactor() * (3.0 * cos2 + 1.0) / (r2 * r2 * r2))
}

/// r.m.s. field fluctuation (T) at the NV: the root of the summed per-spin variances.
pub fn dipolar_brms<'a, I>(spins: I, nv_pos: &Vec3, nv_axis: &Vec3) -> Result<f64>
where
    I: IntoIterator<Item = &'a Vec3>,
{
    let mut total = 0.0;
    for s in spins {
        total += dipolar_variance(s, nv_pos, nv_axis)?;
    }
    Ok(total.sqrt())
}

/// Gradient encoding axis: u = (sinθ cosφ, sinθ sinφ, cosθ) and |∇B| in T/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientSetting {
    pub theta: f64,
    pub phi: f64,
    /// T/m
    pub magnitude: f64,
}

impl GradientSetting {
    pub fn new(theta: f64, phi: f64, magnitude: f64) -> Result<Self> {
        if !(magnitude > 0.0 && magnitude.is_finite()) {
            return Err(Error::invalid(format!("gradient magnitude must be > 0, got {magnitude}")));
        }
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::invalid("gradient angles must be finite"));
        }
        Ok(GradientSetting {
            theta,
            phi,
            magnitude,
        })
    }

    pub fn from_g_per_nm(theta: f64, phi: f64, g_per_nm: f64) -> Result<Self> {
        Self::new(theta, phi, g_per_nm * GAUSS_PER_NM)
    }

    /// Setting whose direction is that of `v` (any length).
    pub fn from_vector(v: &Vec3, magnitude: f64) -> Result<Self> {
        let n = v.norm();
        if !(n > 0.0) {
            return Err(Error::invalid("zero gradient direction"));
        }
        let u = v / n;
        Self::new(u.z.clamp(-1.0, 1.0).acos(), u.y.atan2(u.x), magnitude)
    }

    pub fn direction(&self) -> Vec3 {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vec3::new(st * cp, st * sp, ct)
    }

    pub fn magnitude_g_per_nm(&self) -> f64 {
        self.magnitude / GAUSS_PER_NM
    }

    /// Frequency per unit length along the gradient, Hz/nm.
    pub fn hz_per_nm(&self) -> f64 {
        hz_per_nm(self.magnitude)
    }

    /// Whether the angles lie in the encoded hemisphere θ, φ ∈ [0, π).
    pub fn in_hemisphere(&self) -> bool {
        use std::f64::consts::PI;
        (0.0..PI).contains(&self.theta) && (0.0..PI).contains(&self.phi)
    }

    /// The antipodal direction (π − θ, φ + π mod 2π).
    pub fn reversed(&self) -> Self {
        use std::f64::consts::{PI, TAU};
        GradientSetting {
            theta: PI - self.theta,
            phi: (self.phi + PI).rem_euclid(TAU),
            magnitude: self.magnitude,
        }
    }

    /// Maps the setting into the encoded hemisphere. The flag is true when the
    /// direction had to be reversed, in which case r-axes flip sign.
    pub fn to_hemisphere(&self) -> (Self, bool) {
        use std::f64::consts::{PI, TAU};
        let u = self.direction();
        let mut theta = u.z.clamp(-1.0, 1.0).acos();
        let mut phi = u.y.atan2(u.x).rem_euclid(TAU);
        let mut flipped = false;
        if phi >= PI {
            theta = PI - theta;
            phi -= PI;
            flipped = true;
        }
        if theta >= PI {
            theta = 0.0;
            flipped = !flipped;
        }
        (
            GradientSetting {
                theta,
                phi,
                magnitude: self.magnitude,
            },
            flipped,
        )
    }
}
