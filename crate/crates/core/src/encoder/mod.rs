//! Gradient encoding of a molecule into spin-noise spectra.
//!
//! Under a uniform gradient along u, every proton on the plane u·x = r
//! precesses at the same offset frequency γ/2π·|∇B|·r. Each spectral bin of
//! width Δf therefore collects one isomagnetic slice of thickness
//! Δr = Δf / (γ/2π·|∇B|), and its amplitude is the field fluctuation those
//! protons produce at the NV.
//!
//! Bins sit on a lattice anchored at r = 0 (bin k is centered at k·Δr), so
//! spectra from different orientations share one r-axis without resampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::phantom::Molecule;
use crate::physics::{dipolar_variance, hz_per_nm, GradientSetting, NvGeometry};
use crate::Vec3;

/// How per-spin contributions inside one slice are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SliceCombine {
    /// Root of the summed variances (uncorrelated spin noise).
    #[default]
    Quadrature,
    /// Plain sum of per-spin r.m.s. amplitudes.
    Linear,
}

impl FromStr for SliceCombine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "quadrature" => Ok(SliceCombine::Quadrature),
            "linear" => Ok(SliceCombine::Linear),
            other => Err(Error::UnknownMode {
                kind: "slice_combine",
                name: other.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for SliceCombine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SliceCombine::Quadrature => "quadrature",
            SliceCombine::Linear => "linear",
        })
    }
}

/// Equispaced orientations over one hemisphere: θ_k = kπ/n_θ, φ_l = lπ/n_φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectionGrid {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl ProjectionGrid {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::invalid("projection grid needs n_theta, n_phi >= 1"));
        }
        Ok(ProjectionGrid { n_theta, n_phi })
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|k| k as f64 * PI / self.n_theta as f64)
            .collect()
    }

    pub fn phis(&self) -> Vec<f64> {
        (0..self.n_phi)
            .map(|l| l as f64 * PI / self.n_phi as f64)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Orientations in projection-index order `p = i_theta + n_theta * i_phi`.
    pub fn orientations(&self) -> Vec<(f64, f64)> {
        let thetas = self.thetas();
        let phis = self.phis();
        phis.iter()
            .flat_map(|&phi| thetas.iter().map(move |&theta| (theta, phi)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinNoiseSpectrum {
    /// Bin-center offsets from the unshifted Larmor frequency, Hz.
    pub freq_offsets: Vec<f64>,
    /// Field fluctuation per bin, T.
    pub brms: Vec<f64>,
    /// Bin width, Hz.
    pub delta_f: f64,
    pub gradient: GradientSetting,
}

impl SpinNoiseSpectrum {
    pub fn len(&self) -> usize {
        self.brms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.brms.is_empty()
    }

    /// Lattice index of the first bin (bin k is centered at k·Δf).
    pub fn first_bin(&self) -> i64 {
        (self.freq_offsets[0] / self.delta_f).round() as i64
    }

    pub fn slice_width(&self) -> f64 {
        self.delta_f / self.gradient.hz_per_nm()
    }

    /// Bin centers converted to positions along the gradient, nm.
    pub fn r_centers(&self) -> Vec<f64> {
        let slope = self.gradient.hz_per_nm();
        self.freq_offsets.iter().map(|f| f / slope).collect()
    }

    /// Width of the band spanned by occupied bins: (last − first + 1)·Δf.
    pub fn occupied_spread_hz(&self) -> f64 {
        let occupied: Vec<usize> = (0..self.len()).filter(|&i| self.brms[i] > 0.0).collect();
        match (occupied.first(), occupied.last()) {
            (Some(&a), Some(&b)) => (b - a + 1) as f64 * self.delta_f,
            _ => 0.0,
        }
    }

    /// Σ brms², the total field variance seen by the sensor.
    pub fn total_variance(&self) -> f64 {
        self.brms.iter().map(|b| b * b).sum()
    }
}

/// r_i = u·x_i for every atom, in atom order.
pub fn project_coordinates(m: &Molecule, g: &GradientSetting) -> Vec<f64> {
    let u = g.direction();
    m.atoms.iter().map(|a| a.position.dot(&u)).collect()
}

/// Slice thickness Δr = Δf / (γ/2π·|∇B|), nm.
pub fn slice_width(delta_f: f64, gradient_t_per_m: f64) -> f64 {
    delta_f / hz_per_nm(gradient_t_per_m)
}

pub fn encode_projection(
    m: &Molecule,
    g: &GradientSetting,
    delta_f: f64,
    nv: &NvGeometry,
) -> Result<SpinNoiseSpectrum> {
    encode_projection_with(m, g, delta_f, nv, SliceCombine::Quadrature)
}

pub fn encode_projection_with(
    m: &Molecule,
    g: &GradientSetting,
    delta_f: f64,
    nv: &NvGeometry,
    combine: SliceCombine,
) -> Result<SpinNoiseSpectrum> {
    if !(delta_f > 0.0 && delta_f.is_finite()) {
        return Err(Error::invalid(format!("delta_f must be > 0, got {delta_f}")));
    }
    if m.is_empty() {
        return Err(Error::EmptyMolecule);
    }
    let dr = slice_width(delta_f, g.magnitude);
    let bins: Vec<i64> = project_coordinates(m, g)
        .iter()
        .map(|r| (r / dr).round() as i64)
        .collect();
    let lo = bins.iter().copied().min().unwrap_or(0) - 1;
    let hi = bins.iter().copied().max().unwrap_or(0) + 1;
    let len = (hi - lo + 1) as usize;

    let mut acc = vec![0.0; len];
    for (atom, &k) in m.atoms.iter().zip(&bins) {
        let var = dipolar_variance(&atom.position, &nv.position, &nv.axis)?;
        let slot = &mut acc[(k - lo) as usize];
        match combine {
            SliceCombine::Quadrature => *slot += var,
            SliceCombine::Linear => *slot += var.sqrt(),
        }
    }
    if combine == SliceCombine::Quadrature {
        acc.iter_mut().for_each(|v| *v = v.sqrt());
    }

    Ok(SpinNoiseSpectrum {
        freq_offsets: (lo..=hi).map(|k| k as f64 * delta_f).collect(),
        brms: acc,
        delta_f,
        gradient: *g,
    })
}

/// Spectra for every orientation of `grid`, in projection-index order.
pub fn encode_spectra(
    m: &Molecule,
    grid: &ProjectionGrid,
    gradient_t_per_m: f64,
    delta_f: f64,
    nv: &NvGeometry,
    combine: SliceCombine,
) -> Result<Vec<SpinNoiseSpectrum>> {
    let settings = grid
        .orientations()
        .into_iter()
        .map(|(theta, phi)| GradientSetting::new(theta, phi, gradient_t_per_m))
        .collect::<Result<Vec<_>>>()?;
    settings
        .par_iter()
        .map(|g| encode_projection_with(m, g, delta_f, nv, combine))
        .collect()
}

/// The multiplexed dataset s(r, θ, φ). Values are stored r-fastest:
/// `values[ir + n_r * (i_theta + n_theta * i_phi)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalArray {
    /// Bin centers, nm.
    pub r_values: Vec<f64>,
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    pub values: Vec<f64>,
    /// Spectral bin width, Hz.
    pub delta_f: f64,
    /// |∇B|, T/m.
    pub gradient: f64,
}

impl SignalArray {
    pub fn zeros(r_values: Vec<f64>, thetas: Vec<f64>, phis: Vec<f64>, delta_f: f64, gradient: f64) -> Self {
        let n = r_values.len() * thetas.len() * phis.len();
        SignalArray {
            r_values,
            thetas,
            phis,
            values: vec![0.0; n],
            delta_f,
            gradient,
        }
    }

    /// Symmetric lattice axis `k·dr` for k in −half..=half.
    pub fn symmetric_axis(half: i64, dr: f64) -> Vec<f64> {
        (-half..=half).map(|k| k as f64 * dr).collect()
    }

    pub fn n_r(&self) -> usize {
        self.r_values.len()
    }

    pub fn n_projections(&self) -> usize {
        self.thetas.len() * self.phis.len()
    }

    pub fn dr(&self) -> f64 {
        slice_width(self.delta_f, self.gradient)
    }

    pub fn r0(&self) -> f64 {
        self.r_values.first().copied().unwrap_or(0.0)
    }

    pub fn column(&self, i_theta: usize, i_phi: usize) -> &[f64] {
        let n_r = self.n_r();
        let start = n_r * (i_theta + self.thetas.len() * i_phi);
        &self.values[start..start + n_r]
    }

    pub fn column_mut(&mut self, i_theta: usize, i_phi: usize) -> &mut [f64] {
        let n_r = self.n_r();
        let start = n_r * (i_theta + self.thetas.len() * i_phi);
        &mut self.values[start..start + n_r]
    }

    /// Projection columns with their unit gradient directions, in projection-index order.
    pub fn columns(&self) -> impl Iterator<Item = (Vec3, &[f64])> + '_ {
        let n_r = self.n_r();
        let n_theta = self.thetas.len();
        self.values.chunks(n_r.max(1)).enumerate().map(move |(p, col)| {
            let theta = self.thetas[p % n_theta];
            let phi = self.phis[p / n_theta];
            let (st, ct) = theta.sin_cos();
            let (sp, cp) = phi.sin_cos();
            (Vec3::new(st * cp, st * sp, ct), col)
        })
    }

    /// Checks internal consistency: dimensions, uniform spacing, hemisphere.
    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.n_r() * self.n_projections() {
            return Err(Error::DimensionMismatch(format!(
                "payload of {} values for {}x{}x{}",
                self.values.len(),
                self.n_r(),
                self.thetas.len(),
                self.phis.len()
            )));
        }
        if self.n_r() == 0 || self.thetas.is_empty() || self.phis.is_empty() {
            return Err(Error::DimensionMismatch("empty signal axis".into()));
        }
        if !(self.delta_f > 0.0 && self.gradient > 0.0) {
            return Err(Error::invalid("signal provenance needs delta_f > 0 and gradient > 0"));
        }
        let dr = self.dr();
        for w in self.r_values.windows(2) {
            if ((w[1] - w[0]) - dr).abs() > 1e-9 * dr.max(1.0) {
                return Err(Error::DimensionMismatch("non-uniform r spacing".into()));
            }
        }
        let in_range = |a: &f64| (0.0..PI).contains(a);
        if !self.thetas.iter().all(in_range) || !self.phis.iter().all(in_range) {
            return Err(Error::invalid("orientation outside the encoded hemisphere"));
        }
        Ok(())
    }

    /// Rebins spectra from `grid` onto a common symmetric r-axis spanning the
    /// largest projected extent (guard bins included).
    pub fn from_spectra(spectra: &[SpinNoiseSpectrum], grid: &ProjectionGrid) -> Result<Self> {
        if spectra.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} spectra for a {}x{} grid",
                spectra.len(),
                grid.n_theta,
                grid.n_phi
            )));
        }
        let first = spectra.first().ok_or(Error::EmptyMolecule)?;
        let (delta_f, gradient) = (first.delta_f, first.gradient.magnitude);
        if spectra
            .iter()
            .any(|s| s.delta_f != delta_f || s.gradient.magnitude != gradient)
        {
            return Err(Error::invalid("spectra disagree on delta_f or gradient magnitude"));
        }
        let half = spectra
            .iter()
            .map(|s| s.first_bin().abs().max((s.first_bin() + s.len() as i64 - 1).abs()))
            .max()
            .unwrap_or(0);
        let dr = slice_width(delta_f, gradient);
        let mut out = SignalArray::zeros(
            Self::symmetric_axis(half, dr),
            grid.thetas(),
            grid.phis(),
            delta_f,
            gradient,
        );
        let n_r = out.n_r();
        for (p, s) in spectra.iter().enumerate() {
            let offset = (s.first_bin() + half) as usize;
            let col = &mut out.values[p * n_r..(p + 1) * n_r];
            col[offset..offset + s.len()].copy_from_slice(&s.brms);
        }
        Ok(out)
    }
}

/// Encodes every orientation and assembles the shared-axis signal array.
pub fn encode_all(
    m: &Molecule,
    grid: &ProjectionGrid,
    gradient_t_per_m: f64,
    delta_f: f64,
    nv: &NvGeometry,
    combine: SliceCombine,
) -> Result<SignalArray> {
    let spectra = encode_spectra(m, grid, gradient_t_per_m, delta_f, nv, combine)?;
    SignalArray::from_spectra(&spectra, grid)
}

/// Converts frequency offsets (Hz) to positions along the gradient (nm): r = f / (γ/2π·|∇B|).
pub fn rescale_to_spatial(freq_offsets: &[f64], gradient_t_per_m: f64) -> Result<Vec<f64>> {
    if !(gradient_t_per_m.abs() > 0.0 && gradient_t_per_m.is_finite()) {
        return Err(Error::invalid("cannot rescale with a zero gradient"));
    }
    let slope = hz_per_nm(gradient_t_per_m);
    Ok(freq_offsets.iter().map(|f| f / slope).collect())
}

/// Inverse of [`rescale_to_spatial`].
pub fn spatial_to_frequency(r_values: &[f64], gradient_t_per_m: f64) -> Vec<f64> {
    let slope = hz_per_nm(gradient_t_per_m);
    r_values.iter().map(|r| r * slope).collect()
}

/// Adds independent N(0, σ²) noise to every bin, clamping at zero.
pub fn add_measurement_noise(
    spectrum: &SpinNoiseSpectrum,
    sigma: f64,
    seed: u64,
) -> Result<SpinNoiseSpectrum> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("noise sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(spectrum.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = spectrum.clone();
    for b in out.brms.iter_mut() {
        *b = (*b + normal.sample(&mut rng)).max(0.0);
    }
    Ok(out)
}
