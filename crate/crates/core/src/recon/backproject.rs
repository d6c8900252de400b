use rayon::prelude::*;
use std::str::FromStr;

use super::rotation::rotation_for;
use crate::encoder::SignalArray;
use crate::error::{Error, Result};
use crate::phantom::{DensityGrid, GridSpec};
use crate::Vec3;

/// Number of contiguous projection groups accumulated independently in
/// paper mode. Fixed so the merge order does not depend on the thread count.
const PAPER_CHUNKS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackprojectMode {
    /// Replicate each value over its plane, rotate the plane into place and splat.
    Paper,
    /// For each voxel, look up every projection at r = u·x.
    #[default]
    Gather,
}

impl FromStr for BackprojectMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper" => Ok(BackprojectMode::Paper),
            "gather" => Ok(BackprojectMode::Gather),
            other => Err(Error::UnknownMode {
                kind: "backproject",
                name: other.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for BackprojectMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BackprojectMode::Paper => "paper",
            BackprojectMode::Gather => "gather",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    #[default]
    Linear,
    /// Debugging aid.
    Nearest,
}

impl FromStr for Interpolation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" | "trilinear" => Ok(Interpolation::Linear),
            "nearest" => Ok(Interpolation::Nearest),
            other => Err(Error::UnknownMode {
                kind: "interpolation",
                name: other.to_string(),
            }),
        }
    }
}

impl std::fmt::Display for Interpolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Interpolation::Linear => "linear",
            Interpolation::Nearest => "nearest",
        })
    }
}

/// Reconstructed density on an n³ lattice centered at the origin with voxel
/// size equal to the r-bin width.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageArray {
    pub grid: DensityGrid,
    pub mode: BackprojectMode,
}

impl ImageArray {
    pub fn spec(&self) -> &GridSpec {
        &self.grid.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.grid.values
    }

    /// Voxel-center position of the largest value.
    pub fn argmax_position(&self) -> Vec3 {
        let (ix, iy, iz, _) = self.grid.argmax();
        self.grid.spec.voxel_center(ix, iy, iz)
    }
}

#[inline]
fn lookup(col: &[f64], t: f64, interp: Interpolation) -> f64 {
    let last = (col.len() - 1) as f64;
    if !(t >= 0.0 && t <= last) {
        return 0.0;
    }
    match interp {
        Interpolation::Nearest => col[t.round() as usize],
        Interpolation::Linear => {
            let i = (t.floor() as usize).min(col.len() - 2);
            let f = t - i as f64;
            (1.0 - f) * col[i] + f * col[i + 1]
        }
    }
}

fn splat_nearest(grid: &mut DensityGrid, p: &Vec3, weight: f64) {
    let v = grid.spec.to_voxel(p);
    let max = (grid.spec.n - 1) as f64;
    if v.iter().all(|c| (-0.5..max + 0.5).contains(c)) {
        let ix = (v.x.round() as usize).min(grid.spec.n - 1);
        let iy = (v.y.round() as usize).min(grid.spec.n - 1);
        let iz = (v.z.round() as usize).min(grid.spec.n - 1);
        let idx = grid.spec.index(ix, iy, iz);
        grid.values[idx] += weight;
    }
}

/// Back-projects filtered columns onto an `n`³ image and averages over the
/// projection count.
pub fn backproject(
    filtered: &SignalArray,
    n: usize,
    mode: BackprojectMode,
    interp: Interpolation,
) -> Result<ImageArray> {
    filtered.validate()?;
    if n < filtered.n_r() {
        return Err(Error::DimensionMismatch(format!(
            "image of {n}^3 voxels cannot hold an r-axis of {} bins",
            filtered.n_r()
        )));
    }
    let spec = GridSpec::centered_at(n, filtered.dr(), Vec3::zeros())?;
    let grid = match mode {
        BackprojectMode::Gather => gather(filtered, spec, interp),
        BackprojectMode::Paper => paper(filtered, spec, interp),
    };
    if grid.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("back-projection produced non-finite voxels"));
    }
    Ok(ImageArray { grid, mode })
}

fn gather(signal: &SignalArray, spec: GridSpec, interp: Interpolation) -> DensityGrid {
    let (r0, dr) = (signal.r0(), signal.dr());
    let columns: Vec<(Vec3, &[f64])> = signal.columns().collect();
    let count = columns.len() as f64;
    let n = spec.n;
    let mut grid = DensityGrid::zeros(spec);
    grid.values
        .par_chunks_mut(n * n)
        .enumerate()
        .for_each(|(iz, slab)| {
            for iy in 0..n {
                for ix in 0..n {
                    let x = spec.voxel_center(ix, iy, iz);
                    let acc: f64 = columns
                        .iter()
                        .map(|(u, col)| lookup(col, (u.dot(&x) - r0) / dr, interp))
                        .sum();
                    slab[ix + n * iy] = acc / count;
                }
            }
        });
    grid
}

fn paper(signal: &SignalArray, spec: GridSpec, interp: Interpolation) -> DensityGrid {
    let h = spec.voxel_size;
    let center = spec.center();
    // The rotated plane must cover the whole cube, so it spans the circumscribed sphere.
    let reach = ((spec.n as f64 - 1.0) / 2.0 * 3f64.sqrt()).ceil() as i64 + 1;
    let n_theta = signal.thetas.len();
    let n_r = signal.n_r();
    let projections: Vec<usize> = (0..signal.n_projections()).collect();
    let chunk = projections.len().div_ceil(PAPER_CHUNKS).max(1);

    let partials: Vec<DensityGrid> = projections
        .par_chunks(chunk)
        .map(|group| {
            let mut acc = DensityGrid::zeros(spec);
            for &p in group {
                let rot = rotation_for(signal.thetas[p % n_theta], signal.phis[p / n_theta]);
                let m = rot.linear();
                let normal = m.column(2).into_owned();
                let col = &signal.values[p * n_r..(p + 1) * n_r];
                let plane: Vec<Vec3> = (-reach..=reach)
                    .flat_map(|a| (-reach..=reach).map(move |b| (a, b)))
                    .filter(|&(a, b)| a * a + b * b <= reach * reach)
                    .map(|(a, b)| center + m * Vec3::new(a as f64 * h, b as f64 * h, 0.0))
                    .collect();
                for (ir, &s) in col.iter().enumerate() {
                    if s == 0.0 {
                        continue;
                    }
                    let offset = normal * signal.r_values[ir];
                    for q in &plane {
                        let x = q + offset;
                        match interp {
                            Interpolation::Linear => {
                                acc.splat(&x, s);
                            }
                            Interpolation::Nearest => splat_nearest(&mut acc, &x, s),
                        }
                    }
                }
            }
            acc
        })
        .collect();

    let mut grid = DensityGrid::zeros(spec);
    for part in &partials {
        for (g, v) in grid.values.iter_mut().zip(&part.values) {
            *g += v;
        }
    }
    let count = signal.n_projections() as f64;
    grid.values.iter_mut().for_each(|v| *v /= count);
    grid
}
