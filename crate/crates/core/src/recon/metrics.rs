use super::ImageArray;
use crate::error::{Error, Result};
use crate::phantom::DensityGrid;
use crate::Vec3;

/// Pearson correlation of two equally long samples.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "correlating {} values against {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::ZeroVariance("empty sample"));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 {
        return Err(Error::ZeroVariance("first sample is constant"));
    }
    if sbb == 0.0 {
        return Err(Error::ZeroVariance("second sample is constant"));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson ρ between the image and the truth resampled onto the image lattice.
pub fn correlation(img: &ImageArray, truth: &DensityGrid) -> Result<f64> {
    let resampled = truth.resample(img.spec());
    pearson(img.values(), &resampled.values)
}

/// Cylindrical regions for the ring-versus-hole contrast, all in nm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToroidRegions {
    /// Point on the ring axis (the axis is parallel to z).
    pub center: Vec3,
    pub core_radius: f64,
    pub annulus: (f64, f64),
    pub slab_half_height: f64,
}

impl ToroidRegions {
    pub fn new(center: Vec3, core_radius: f64, annulus: (f64, f64), slab_half_height: f64) -> Self {
        ToroidRegions {
            center,
            core_radius,
            annulus,
            slab_half_height,
        }
    }
}

/// Mean annulus value over mean core value, with negative voxels clamped to 0.
pub fn toroid_contrast(img: &ImageArray, regions: &ToroidRegions) -> Result<f64> {
    let (a_in, a_out) = regions.annulus;
    if !(regions.core_radius > 0.0 && a_in >= 0.0 && a_out > a_in && regions.slab_half_height > 0.0) {
        return Err(Error::invalid("toroid regions need 0 < core, annulus lo < hi, slab > 0"));
    }
    let spec = img.spec();
    let (mut core_sum, mut core_n) = (0.0, 0usize);
    let (mut ring_sum, mut ring_n) = (0.0, 0usize);
    for iz in 0..spec.n {
        for iy in 0..spec.n {
            for ix in 0..spec.n {
                let d = spec.voxel_center(ix, iy, iz) - regions.center;
                if d.z.abs() > regions.slab_half_height {
                    continue;
                }
                let rho = d.x.hypot(d.y);
                let v = img.grid.get(ix, iy, iz).max(0.0);
                if rho <= regions.core_radius {
                    core_sum += v;
                    core_n += 1;
                } else if rho >= a_in && rho <= a_out {
                    ring_sum += v;
                    ring_n += 1;
                }
            }
        }
    }
    if core_n == 0 {
        return Err(Error::EmptyRegion("core"));
    }
    if ring_n == 0 {
        return Err(Error::EmptyRegion("annulus"));
    }
    let core = core_sum / core_n as f64;
    let ring = ring_sum / ring_n as f64;
    if core > 0.0 {
        Ok(ring / core)
    } else if ring > 0.0 {
        Ok(f64::INFINITY)
    } else {
        Err(Error::ZeroVariance("both toroid regions are empty of signal"))
    }
}
