//! Inversion of the plane-integral projections.
//!
//! A plane-integral (3D Radon) projection needs a second-derivative filter
//! rather than the first-order ramp used for line integrals: in Fourier space
//! the column is multiplied by k². The filtered columns are then smeared back
//! along their planes and averaged over orientations.

mod backproject;
mod metrics;
mod rotation;

pub use backproject::{backproject, BackprojectMode, ImageArray, Interpolation};
pub use metrics::{correlation, pearson, toroid_contrast, ToroidRegions};
pub use rotation::{rotation_for, xy_rotation, y_rotation, RotationOp};

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use std::str::FromStr;

use crate::encoder::SignalArray;
use crate::error::{Error, Result};

/// Minimum number of r bins accepted by [`quadratic_filter`].
pub const MIN_FILTER_BINS: usize = 4;
/// Fraction of the passband, below the cutoff, covered by the cosine taper.
pub const ROLLOFF_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterKind {
    #[default]
    QuadraticRamp,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FilterWindow {
    Rectangular,
    #[default]
    CosineRolloff,
}

impl FromStr for FilterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "quadratic_ramp" => Ok(FilterKind::QuadraticRamp),
            "none" => Ok(FilterKind::None),
            other => Err(Error::UnknownMode {
                kind: "filter",
                name: other.to_string(),
            }),
        }
    }
}

impl FromStr for FilterWindow {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "rectangular" => Ok(FilterWindow::Rectangular),
            "cosine_rolloff" => Ok(FilterWindow::CosineRolloff),
            other => Err(Error::UnknownMode {
                kind: "filter_window",
                name: other.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FilterKind::QuadraticRamp => "quadratic_ramp",
            FilterKind::None => "none",
        })
    }
}

impl std::fmt::Display for FilterWindow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FilterWindow::Rectangular => "rectangular",
            FilterWindow::CosineRolloff => "cosine_rolloff",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Cutoff as a fraction of the Nyquist wavenumber, in (0, 1].
    pub cutoff_fraction: f64,
    pub window: FilterWindow,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec {
            kind: FilterKind::QuadraticRamp,
            cutoff_fraction: 1.0,
            window: FilterWindow::CosineRolloff,
        }
    }
}

impl FilterSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff_fraction > 0.0 && self.cutoff_fraction <= 1.0) {
            return Err(Error::invalid(format!(
                "cutoff_fraction must lie in (0, 1], got {}",
                self.cutoff_fraction
            )));
        }
        Ok(())
    }

    /// Frequency response at angular wavenumber `k` (rad/nm) for a cutoff `kc`.
    pub fn response(&self, k: f64, kc: f64) -> f64 {
        let k = k.abs();
        if k > kc {
            return 0.0;
        }
        let taper = match self.window {
            FilterWindow::Rectangular => 1.0,
            FilterWindow::CosineRolloff => {
                let start = (1.0 - ROLLOFF_FRACTION) * kc;
                if k <= start {
                    1.0
                } else {
                    0.5 * (1.0 + (PI * (k - start) / (kc - start)).cos())
                }
            }
        };
        k * k * taper
    }
}

/// Applies the k² filter to every projection column.
///
/// Columns are padded with their edge values to twice the next power of two.
/// The filter annihilates constants, so each column is first shifted by its
/// first sample; a constant column therefore comes out as exact zeros. The
/// output keeps the sign of −d²/dr², which is positive at density maxima.
pub fn quadratic_filter(signal: &SignalArray, spec: &FilterSpec) -> Result<SignalArray> {
    spec.validate()?;
    signal.validate()?;
    let n_r = signal.n_r();
    if n_r < MIN_FILTER_BINS {
        return Err(Error::invalid(format!(
            "filter needs at least {MIN_FILTER_BINS} r bins, got {n_r}"
        )));
    }
    if spec.kind == FilterKind::None {
        return Ok(signal.clone());
    }

    let len = 2 * n_r.next_power_of_two();
    let dr = signal.dr();
    let kc = spec.cutoff_fraction * PI / dr;
    let response: Vec<f64> = (0..len)
        .map(|j| {
            if j == 0 {
                return 0.0;
            }
            let m = if j <= len / 2 { j as f64 } else { j as f64 - len as f64 };
            spec.response(2.0 * PI * m / (len as f64 * dr), kc)
        })
        .collect();

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);
    let scale = 1.0 / len as f64;

    let mut out = signal.clone();
    out.values
        .par_chunks_mut(n_r)
        .zip(signal.values.par_chunks(n_r))
        .for_each(|(dst, src)| {
            let base = src[0];
            let last = src[n_r - 1] - base;
            let mut buf: Vec<Complex<f64>> = (0..len)
                .map(|i| Complex::new(if i < n_r { src[i] - base } else { last }, 0.0))
                .collect();
            forward.process(&mut buf);
            for (c, h) in buf.iter_mut().zip(&response) {
                *c *= *h;
            }
            inverse.process(&mut buf);
            for (d, c) in dst.iter_mut().zip(&buf) {
                *d = c.re * scale;
            }
        });
    Ok(out)
}

/// Quadrature weight attached to each orientation before back-projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrientationWeighting {
    /// Every projection counts once.
    Uniform,
    /// Solid angle of each orientation's θ band. The equiangular grid repeats
    /// the pole once per φ and crowds directions near it; these weights
    /// restore the surface measure of the sphere.
    #[default]
    SolidAngle,
}

impl FromStr for OrientationWeighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(OrientationWeighting::Uniform),
            "solid_angle" => Ok(OrientationWeighting::SolidAngle),
            other => Err(Error::UnknownMode {
                kind: "weighting",
                name: other.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for OrientationWeighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OrientationWeighting::Uniform => "uniform",
            OrientationWeighting::SolidAngle => "solid_angle",
        })
    }
}

/// Per-θ weights for an equiangular grid θ_k = kπ/n, normalized to mean 1.
///
/// Band k covers [θ_k − d/2, θ_k + d/2] with d = π/n. The θ = 0 entry also
/// stands for the cap around θ = π (its reversed direction), so it gets both caps.
pub fn theta_weights(thetas: &[f64], weighting: OrientationWeighting) -> Vec<f64> {
    let n = thetas.len();
    if weighting == OrientationWeighting::Uniform || n == 0 {
        return vec![1.0; n];
    }
    let d = PI / n as f64;
    let raw: Vec<f64> = thetas
        .iter()
        .map(|&t| {
            if t == 0.0 {
                2.0 * (1.0 - (d / 2.0).cos())
            } else {
                (t - d / 2.0).max(0.0).cos() - (t + d / 2.0).min(PI).cos()
            }
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / n as f64;
    raw.iter().map(|w| w / mean).collect()
}

/// Scales every projection column by its orientation weight.
pub fn weight_projections(signal: &SignalArray, weighting: OrientationWeighting) -> SignalArray {
    if weighting == OrientationWeighting::Uniform {
        return signal.clone();
    }
    let w = theta_weights(&signal.thetas, weighting);
    let n_r = signal.n_r().max(1);
    let n_theta = signal.thetas.len();
    let mut out = signal.clone();
    for (p, col) in out.values.chunks_mut(n_r).enumerate() {
        let wp = w[p % n_theta];
        col.iter_mut().for_each(|v| *v *= wp);
    }
    out
}

/// Optional point-spread-function correction applied after back-projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsfMode {
    #[default]
    Identity,
}

impl FromStr for PsfMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "identity" => Ok(PsfMode::Identity),
            other => Err(Error::UnknownMode {
                kind: "psf",
                name: other.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for PsfMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("identity")
    }
}

pub fn psf_rescale(img: ImageArray, mode: PsfMode) -> ImageArray {
    match mode {
        PsfMode::Identity => img,
    }
}
