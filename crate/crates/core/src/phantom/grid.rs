use super::Molecule;
use crate::error::{Error, Result};
use crate::Vec3;

/// Cubic voxel lattice. `origin` is the center of voxel `[0, 0, 0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub voxel_size: f64,
    pub origin: Vec3,
}

impl GridSpec {
    pub fn new(n: usize, voxel_size: f64, origin: Vec3) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("grid needs n >= 2, got {n}")));
        }
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(Error::invalid(format!("voxel size must be > 0, got {voxel_size}")));
        }
        if !origin.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("grid origin must be finite"));
        }
        Ok(GridSpec {
            n,
            voxel_size,
            origin,
        })
    }

    /// Grid whose center coincides with `center`.
    pub fn centered_at(n: usize, voxel_size: f64, center: Vec3) -> Result<Self> {
        let half = (n as f64 - 1.0) / 2.0 * voxel_size;
        Self::new(n, voxel_size, center - Vec3::repeat(half))
    }

    /// Grid of `n` voxels whose outermost voxel centers sit at `±half_width`.
    pub fn spanning(n: usize, half_width: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("grid needs n >= 2, got {n}")));
        }
        Self::centered_at(n, 2.0 * half_width / (n as f64 - 1.0), Vec3::zeros())
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Flat index, x fastest and z slowest.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.n * (iy + self.n * iz)
    }

    #[inline]
    pub fn voxel_center(&self, ix: usize, iy: usize, iz: usize) -> Vec3 {
        self.origin + Vec3::new(ix as f64, iy as f64, iz as f64) * self.voxel_size
    }

    /// Continuous voxel coordinates of a point.
    #[inline]
    pub fn to_voxel(&self, p: &Vec3) -> Vec3 {
        (p - self.origin) / self.voxel_size
    }

    pub fn center(&self) -> Vec3 {
        self.origin + Vec3::repeat((self.n as f64 - 1.0) / 2.0 * self.voxel_size)
    }
}

/// Trilinear stencil: base voxel and fractional offsets, if all eight corners are inside.
#[inline]
pub(crate) fn trilinear_stencil(spec: &GridSpec, p: &Vec3) -> Option<([usize; 3], [f64; 3])> {
    let f = spec.to_voxel(p);
    let max = (spec.n - 1) as f64;
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for k in 0..3 {
        let c = f[k];
        if !(c >= 0.0 && c <= max) {
            return None;
        }
        // Points on the upper face use the last cell with weight 1 on its far corner.
        let b = (c.floor() as usize).min(spec.n - 2);
        base[k] = b;
        frac[k] = c - b as f64;
    }
    Some((base, frac))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub spec: GridSpec,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn zeros(spec: GridSpec) -> Self {
        DensityGrid {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {}^3 grid",
                values.len(),
                spec.n
            )));
        }
        Ok(DensityGrid { spec, values })
    }

    pub fn get(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.values[self.spec.index(ix, iy, iz)]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Trilinear interpolation; zero outside the lattice.
    pub fn sample(&self, p: &Vec3) -> f64 {
        let Some((b, f)) = trilinear_stencil(&self.spec, p) else {
            return 0.0;
        };
        let mut acc = 0.0;
        for dz in 0..2 {
            let wz = if dz == 0 { 1.0 - f[2] } else { f[2] };
            for dy in 0..2 {
                let wy = if dy == 0 { 1.0 - f[1] } else { f[1] };
                for dx in 0..2 {
                    let wx = if dx == 0 { 1.0 - f[0] } else { f[0] };
                    acc += wx * wy * wz * self.get(b[0] + dx, b[1] + dy, b[2] + dz);
                }
            }
        }
        acc
    }

    /// Adds `weight` at `p` with trilinear weights. Returns false (and adds
    /// nothing) when any corner would fall outside.
    pub fn splat(&mut self, p: &Vec3, weight: f64) -> bool {
        let Some((b, f)) = trilinear_stencil(&self.spec, p) else {
            return false;
        };
        for dz in 0..2 {
            let wz = if dz == 0 { 1.0 - f[2] } else { f[2] };
            for dy in 0..2 {
                let wy = if dy == 0 { 1.0 - f[1] } else { f[1] };
                for dx in 0..2 {
                    let wx = if dx == 0 { 1.0 - f[0] } else { f[0] };
                    let idx = self.spec.index(b[0] + dx, b[1] + dy, b[2] + dz);
                    self.values[idx] += weight * wx * wy * wz;
                }
            }
        }
        true
    }

    /// Resamples onto another lattice by trilinear interpolation.
    pub fn resample(&self, spec: &GridSpec) -> DensityGrid {
        if *spec == self.spec {
            return self.clone();
        }
        let mut out = DensityGrid::zeros(*spec);
        for iz in 0..spec.n {
            for iy in 0..spec.n {
                for ix in 0..spec.n {
                    let v = self.sample(&spec.voxel_center(ix, iy, iz));
                    out.values[spec.index(ix, iy, iz)] = v;
                }
            }
        }
        out
    }

    /// Location and value of the largest voxel (first one on ties).
    pub fn argmax(&self) -> (usize, usize, usize, f64) {
        let (idx, v) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
        let n = self.spec.n;
        (idx % n, (idx / n) % n, idx / (n * n), v)
    }
}

/// Deposits every atom with weight 1 by trilinear splatting. Atoms whose
/// stencil leaves the grid are dropped; the count of dropped atoms is returned.
pub fn voxelize_counted(m: &Molecule, spec: &GridSpec) -> (DensityGrid, usize) {
    let mut grid = DensityGrid::zeros(*spec);
    let dropped = m
        .atoms
        .iter()
        .filter(|a| !grid.splat(&a.position, 1.0))
        .count();
    (grid, dropped)
}

pub fn voxelize(m: &Molecule, spec: &GridSpec) -> DensityGrid {
    let (grid, dropped) = voxelize_counted(m, spec);
    if dropped > 0 {
        log::warn!(
            "voxelize: {dropped} of {} atoms outside the grid were dropped",
            m.len()
        );
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::Atom;
    use proptest::prelude::*;

    fn spec4() -> GridSpec {
        GridSpec::new(4, 1.0, Vec3::zeros()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(1, 1.0, Vec3::zeros()).is_err());
        assert!(GridSpec::new(4, 0.0, Vec3::zeros()).is_err());
        let s = GridSpec::spanning(64, 2.0).unwrap();
        assert!((s.origin.x + 2.0).abs() < 1e-12);
        assert!((s.voxel_center(63, 63, 63).x - 2.0).abs() < 1e-12);
        assert!(s.center().norm() < 1e-12);
    }

    #[test]
    fn atom_at_voxel_center() {
        let m = Molecule::new("a", vec![Atom::hydrogen(Vec3::new(1.0, 2.0, 1.0))]);
        let g = voxelize(&m, &spec4());
        assert_eq!(g.get(1, 2, 1), 1.0);
        assert_eq!(g.sum(), 1.0);
        assert_eq!(g.values.iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn atom_between_two_centers() {
        let m = Molecule::new("a", vec![Atom::hydrogen(Vec3::new(1.5, 2.0, 1.0))]);
        let g = voxelize(&m, &spec4());
        assert_eq!(g.get(1, 2, 1), 0.5);
        assert_eq!(g.get(2, 2, 1), 0.5);
    }

    #[test]
    fn out_of_bounds_dropped() {
        let m = Molecule::new(
            "a",
            vec![
                Atom::hydrogen(Vec3::new(1.0, 1.0, 1.0)),
                Atom::hydrogen(Vec3::new(3.5, 1.0, 1.0)),
                Atom::hydrogen(Vec3::new(3.0, 3.0, 3.0)),
            ],
        );
        let (g, dropped) = voxelize_counted(&m, &spec4());
        assert_eq!(dropped, 1);
        assert_eq!(g.sum(), 2.0);
        assert_eq!(g.get(3, 3, 3), 1.0);
    }

    #[test]
    fn sample_and_resample() {
        let mut g = DensityGrid::zeros(spec4());
        g.values[g.spec.index(1, 1, 1)] = 8.0;
        assert_eq!(g.sample(&Vec3::new(1.5, 1.5, 1.5)), 1.0);
        assert_eq!(g.sample(&Vec3::new(-1.0, 0.0, 0.0)), 0.0);
        assert_eq!(g.resample(&g.spec), g);
        let fine = GridSpec::new(7, 0.5, Vec3::zeros()).unwrap();
        let r = g.resample(&fine);
        assert_eq!(r.get(2, 2, 2), 8.0);
        assert_eq!(r.get(3, 2, 2), 4.0);
        assert_eq!(g.argmax(), (1, 1, 1, 8.0));
    }

    proptest! {
        #[test]
        fn mass_is_conserved(pts in prop::collection::vec((0.0f64..3.0, 0.0f64..3.0, 0.0f64..3.0), 1..50)) {
            let atoms = pts.iter().map(|&(x, y, z)| Atom::hydrogen(Vec3::new(x, y, z))).collect();
            let m = Molecule::new("p", atoms);
            let (g, dropped) = voxelize_counted(&m, &spec4());
            prop_assert_eq!(dropped, 0);
            let n = m.len() as f64;
            prop_assert!((g.sum() - n).abs() <= 1e-9 * n);
            prop_assert!(g.values.iter().all(|&v| v >= 0.0));
        }
    }
}
