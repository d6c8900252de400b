//! Point-dipole magnetic tip and the gradient it imposes on the sample.

use super::{GradientSetting, CONSTANTS, GAUSS_PER_NM, NM};
use crate::error::{Error, Result};
use crate::Vec3;

/// Minimum tip-to-sample distance for the uniform-gradient approximation.
pub const FAR_FIELD_MIN_NM: f64 = 10.0;
/// Central-difference step for field gradients.
pub const FD_STEP_NM: f64 = 0.01;
/// Relative gradient deviation across the sample above which it is flagged non-uniform.
pub const NON_UNIFORM_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TipModel {
    /// nm
    pub position: Vec3,
    /// A·m²
    pub moment: Vec3,
}

impl TipModel {
    /// Tip at `standoff` nm from `sample_center` along the direction (Θ, Φ),
    /// magnetized along that same direction and calibrated so the gradient
    /// magnitude at the sample is `gradient_g_per_nm`.
    pub fn calibrated(
        sample_center: Vec3,
        tip_theta: f64,
        tip_phi: f64,
        standoff: f64,
        gradient_g_per_nm: f64,
    ) -> Result<Self> {
        let dir = GradientSetting::new(tip_theta, tip_phi, 1.0)?.direction();
        let m = moment_for_gradient(gradient_g_per_nm, standoff)?;
        Ok(TipModel {
            position: sample_center + dir * standoff,
            moment: dir * m,
        })
    }
}

/// B(r) = (μ0/4π)[3(m·r̂)r̂ − m]/r³, tesla.
pub fn tip_field(tip: &TipModel, at: &Vec3) -> Result<Vec3> {
    let d = at - tip.position;
    let r_nm = d.norm();
    if !(r_nm > 1.0) {
        return Err(Error::TooCloseToDipole { distance_nm: r_nm });
    }
    let r_hat = d / r_nm;
    let r = r_nm * NM;
    let m = &tip.moment;
    Ok((r_hat * (3.0 * m.dot(&r_hat)) - m) * (CONSTANTS.mu0_over_4pi / (r * r * r)))
}

/// ∇|B| in T/m by central differences.
fn grad_field_magnitude(tip: &TipModel, at: &Vec3) -> Result<Vec3> {
    let mut g = Vec3::zeros();
    for k in 0..3 {
        let mut step = Vec3::zeros();
        step[k] = FD_STEP_NM;
        let plus = tip_field(tip, &(at + step))?.norm();
        let minus = tip_field(tip, &(at - step))?.norm();
        g[k] = (plus - minus) / (2.0 * FD_STEP_NM * NM);
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientReport {
    pub setting: GradientSetting,
    /// ∇|B| at the sample center, T/m.
    pub gradient: Vec3,
    /// max over cube corners of |∇|B|(corner) − ∇|B|(center)| / |∇|B|(center)|
    pub curvature: f64,
    pub non_uniform: bool,
}

pub fn gradient_at_sample(
    tip: &TipModel,
    sample_center: &Vec3,
    sample_extent: f64,
) -> Result<GradientReport> {
    let dist = (tip.position - sample_center).norm();
    if !(dist >= FAR_FIELD_MIN_NM) {
        return Err(Error::FarFieldGuard {
            distance_nm: dist,
            min_nm: FAR_FIELD_MIN_NM,
        });
    }
    let g0 = grad_field_magnitude(tip, sample_center)?;
    let g0_norm = g0.norm();
    if !(g0_norm > 0.0) {
        return Err(Error::invalid("vanishing field gradient at the sample"));
    }
    let half = sample_extent / 2.0;
    let mut curvature: f64 = 0.0;
    for corner in 0..8 {
        let sign = |bit: usize| if corner >> bit & 1 == 1 { half } else { -half };
        let p = sample_center + Vec3::new(sign(0), sign(1), sign(2));
        let g = grad_field_magnitude(tip, &p)?;
        curvature = curvature.max((g - g0).norm() / g0_norm);
    }
    Ok(GradientReport {
        setting: GradientSetting::from_vector(&g0, g0_norm)?,
        gradient: g0,
        curvature,
        non_uniform: curvature > NON_UNIFORM_THRESHOLD,
    })
}

/// On-axis dipole moment (A·m²) producing `target_g_per_nm` at `standoff` nm,
/// inverting |∇B| = 6 (μ0/4π) m / d⁴.
pub fn moment_for_gradient(target_g_per_nm: f64, standoff: f64) -> Result<f64> {
    if !(target_g_per_nm > 0.0 && standoff > 0.0) {
        return Err(Error::invalid("target gradient and standoff must be > 0"));
    }
    let d = standoff * NM;
    Ok(target_g_per_nm * GAUSS_PER_NM * d.powi(4) / (6.0 * CONSTANTS.mu0_over_4pi))
}
