//! Molecular phantoms: coordinate ingestion, hydrogen extraction, placement
//! above the NV sensor, procedural stand-ins, and ground-truth voxelization.
//!
//! All lengths are nanometres. File readers convert from angstroms at the boundary.

mod elements;
mod grid;
mod pdb;
mod xyz;

pub use elements::canonical_symbol;
pub use grid::{voxelize, voxelize_counted, DensityGrid, GridSpec};
pub use pdb::parse_pdb_atoms;
pub use xyz::{parse_xyz, write_xyz};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::physics::NvGeometry;
use crate::Vec3;

pub(crate) const ANGSTROM_TO_NM: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub element: String,
    /// Position in nm.
    pub position: Vec3,
}

impl Atom {
    /// Builds an atom after validating the symbol and coordinates.
    pub fn new(element: &str, position: Vec3) -> Result<Self> {
        let element = canonical_symbol(element)
            .ok_or_else(|| Error::invalid(format!("unrecognized element symbol '{element}'")))?;
        if !position.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("non-finite atom position"));
        }
        Ok(Atom {
            element: element.to_string(),
            position,
        })
    }

    pub fn hydrogen(position: Vec3) -> Self {
        Atom {
            element: "H".to_string(),
            position,
        }
    }

    pub fn is_hydrogen(&self) -> bool {
        self.element == "H"
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Molecule {
    pub name: String,
    pub atoms: Vec<Atom>,
}

impl Molecule {
    pub fn new(name: impl Into<String>, atoms: Vec<Atom>) -> Self {
        Molecule {
            name: name.into(),
            atoms,
        }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.atoms.iter().map(|a| a.position).collect()
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.atoms.is_empty() {
            return None;
        }
        let sum = self
            .atoms
            .iter()
            .fold(Vec3::zeros(), |acc, a| acc + a.position);
        Some(sum / self.atoms.len() as f64)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        let first = self.atoms.first()?.position;
        Some(self.atoms.iter().fold((first, first), |(lo, hi), a| {
            (lo.inf(&a.position), hi.sup(&a.position))
        }))
    }

    /// Largest distance of any atom from the origin.
    pub fn max_radius(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.position.norm())
            .fold(0.0, f64::max)
    }

    pub fn translated(&self, t: &Vec3) -> Molecule {
        Molecule {
            name: self.name.clone(),
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    element: a.element.clone(),
                    position: a.position + t,
                })
                .collect(),
        }
    }

    /// Count of atoms per element, sorted by symbol.
    pub fn composition(&self) -> Vec<(String, usize)> {
        let mut counts = std::collections::BTreeMap::<&str, usize>::new();
        for a in &self.atoms {
            *counts.entry(a.element.as_str()).or_default() += 1;
        }
        counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Keeps only hydrogen atoms, preserving order.
pub fn extract_hydrogens(m: &Molecule) -> Molecule {
    Molecule {
        name: m.name.clone(),
        atoms: m.atoms.iter().filter(|a| a.is_hydrogen()).cloned().collect(),
    }
}

/// A molecule resting on the diamond surface together with the sensor beneath it.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub molecule: Molecule,
    pub nv: NvGeometry,
}

/// Centers the molecule laterally on the z-axis with its lowest atom on the
/// surface plane z = 0, and puts the NV at `(0, 0, -nv_depth)`.
pub fn center_and_place(m: &Molecule, nv_depth: f64, nv_axis: Vec3) -> Result<Placement> {
    if !(nv_depth > 0.0 && nv_depth.is_finite()) {
        return Err(Error::invalid(format!("nv_depth must be positive, got {nv_depth}")));
    }
    let centroid = m.centroid().ok_or(Error::EmptyMolecule)?;
    let (lo, _) = m.bounds().ok_or(Error::EmptyMolecule)?;
    let shift = Vec3::new(-centroid.x, -centroid.y, -lo.z);
    Ok(Placement {
        molecule: m.translated(&shift),
        nv: NvGeometry::new(Vec3::new(0.0, 0.0, -nv_depth), nv_axis)?,
    })
}

/// Samples `n_points` hydrogens uniformly (by area) on a torus whose symmetry
/// axis is z, centered at the origin.
pub fn generate_toroid(
    n_points: usize,
    major_radius: f64,
    tube_radius: f64,
    seed: u64,
) -> Result<Molecule> {
    if !(tube_radius > 0.0 && major_radius > tube_radius && major_radius.is_finite()) {
        return Err(Error::invalid(format!(
            "toroid radii must satisfy major > tube > 0, got R={major_radius}, r={tube_radius}"
        )));
    }
    if n_points == 0 {
        return Err(Error::invalid("toroid needs at least one point"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut atoms = Vec::with_capacity(n_points);
    // Rejection on the tube angle: the area element scales with R + r cos(v).
    while atoms.len() < n_points {
        let u = rng.random::<f64>() * TAU;
        let v = rng.random::<f64>() * TAU;
        let w = rng.random::<f64>();
        let ring = major_radius + tube_radius * v.cos();
        if w * (major_radius + tube_radius) > ring {
            continue;
        }
        atoms.push(Atom::hydrogen(Vec3::new(
            ring * u.cos(),
            ring * u.sin(),
            tube_radius * v.sin(),
        )));
    }
    Ok(Molecule::new(
        format!("toroid(R={major_radius},r={tube_radius},seed={seed})"),
        atoms,
    ))
}

/// Appends a flat sheet of adsorbed hydrogens (water / contaminant layer) in
/// the square `[-extent/2, extent/2]^2` at height `z_level`.
pub fn add_surface_layer(
    m: &Molecule,
    areal_density: f64,
    extent: f64,
    z_level: f64,
    seed: u64,
) -> Result<Molecule> {
    if !(areal_density >= 0.0 && areal_density.is_finite()) {
        return Err(Error::invalid("areal density must be >= 0"));
    }
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::invalid("layer extent must be > 0"));
    }
    let count = (areal_density * extent * extent).round() as usize;
    let mut out = m.clone();
    if count == 0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = extent / 2.0;
    out.atoms.extend((0..count).map(|_| {
        let x = rng.random_range(-half..half);
        let y = rng.random_range(-half..half);
        Atom::hydrogen(Vec3::new(x, y, z_level))
    }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(x: f64, y: f64, z: f64) -> Atom {
        Atom::hydrogen(Vec3::new(x, y, z))
    }

    fn z_axis() -> Vec3 {
        Vec3::z()
    }

    #[test]
    fn extract_keeps_hydrogens_in_order() {
        let m = Molecule::new(
            "m",
            vec![
                h(1.0, 0.0, 0.0),
                Atom::new("C", Vec3::zeros()).unwrap(),
                h(2.0, 0.0, 0.0),
            ],
        );
        let hs = extract_hydrogens(&m);
        assert_eq!(hs.len(), 2);
        assert_eq!(hs.atoms[0].position.x, 1.0);
        assert_eq!(hs.atoms[1].position.x, 2.0);
        assert_eq!(extract_hydrogens(&hs), hs);
    }

    #[test]
    fn extract_from_all_carbon_is_empty() {
        let c = Atom::new("C", Vec3::zeros()).unwrap();
        let m = Molecule::new("c2", vec![c.clone(), c]);
        assert!(extract_hydrogens(&m).is_empty());
    }

    #[test]
    fn atom_rejects_unknown_element_and_nan() {
        assert!(Atom::new("Qq", Vec3::zeros()).is_err());
        assert!(Atom::new("H", Vec3::new(f64::NAN, 0.0, 0.0)).is_err());
    }

    #[test]
    fn place_single_atom() {
        let m = Molecule::new("one", vec![h(3.0, 3.0, 3.0)]);
        let p = center_and_place(&m, 5.0, z_axis()).unwrap();
        assert_eq!(p.molecule.atoms[0].position, Vec3::zeros());
        assert_eq!(p.nv.position, Vec3::new(0.0, 0.0, -5.0));
    }

    #[test]
    fn place_puts_lowest_atom_on_surface() {
        let m = Molecule::new("two", vec![h(0.0, 0.0, 0.0), h(0.0, 0.0, 1.0)]);
        let p = center_and_place(&m, 5.0, z_axis()).unwrap();
        let (lo, hi) = p.molecule.bounds().unwrap();
        assert_eq!(lo.z, 0.0);
        assert_eq!(hi.z, 1.0);
        assert_eq!(p.nv.position, Vec3::new(0.0, 0.0, -5.0));
    }

    #[test]
    fn place_rejects_empty_and_bad_depth() {
        assert!(matches!(
            center_and_place(&Molecule::default(), 5.0, z_axis()),
            Err(Error::EmptyMolecule)
        ));
        let m = Molecule::new("one", vec![h(0.0, 0.0, 0.0)]);
        assert!(center_and_place(&m, 0.0, z_axis()).is_err());
    }

    #[test]
    fn toroid_single_point_on_surface() {
        let m = generate_toroid(1, 0.525, 0.225, 9).unwrap();
        assert_eq!(m.len(), 1);
        let p = m.atoms[0].position;
        let rho = p.x.hypot(p.y);
        assert!(rho >= 0.525 - 0.225 - 1e-12 && rho <= 0.525 + 0.225 + 1e-12);
    }

    #[test]
    fn toroid_points_satisfy_torus_equation() {
        let (big, small) = (0.525, 0.225);
        let m = generate_toroid(70, big, small, 42).unwrap();
        assert_eq!(m.len(), 70);
        for a in &m.atoms {
            let p = a.position;
            let lhs = (p.x.hypot(p.y) - big).powi(2) + p.z * p.z;
            assert!((lhs.sqrt() - small).abs() < 1e-9);
        }
    }

    #[test]
    fn toroid_is_deterministic_and_validates() {
        let a = generate_toroid(70, 0.525, 0.225, 42).unwrap();
        let b = generate_toroid(70, 0.525, 0.225, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_toroid(70, 0.525, 0.225, 43).unwrap());
        assert!(generate_toroid(10, 0.2, 0.3, 1).is_err());
        assert!(generate_toroid(10, 0.5, 0.0, 1).is_err());
        assert!(generate_toroid(0, 0.5, 0.2, 1).is_err());
    }

    #[test]
    fn surface_layer_counts() {
        let m = Molecule::new("one", vec![h(0.0, 0.0, 0.5)]);
        assert_eq!(add_surface_layer(&m, 0.0, 4.0, 0.0, 1).unwrap(), m);
        let layered = add_surface_layer(&m, 1.0, 4.0, -0.1, 1).unwrap();
        assert_eq!(layered.len(), 17);
        assert!(layered.atoms[1..].iter().all(|a| a.position.z == -0.1
            && a.position.x.abs() <= 2.0
            && a.position.y.abs() <= 2.0));
        assert_eq!(layered, add_surface_layer(&m, 1.0, 4.0, -0.1, 1).unwrap());
        assert!(add_surface_layer(&m, -1.0, 4.0, 0.0, 1).is_err());
        assert!(add_surface_layer(&m, 1.0, 0.0, 0.0, 1).is_err());
    }

    // Dyadic coordinates keep every sum exact, so centering must be bit-exact
    // under translation.
    fn dyadic() -> impl Strategy<Value = f64> {
        (-4096i32..4096).prop_map(|k| k as f64 / 1024.0)
    }

    proptest! {
        #[test]
        fn centering_is_translation_invariant(
            pts in prop::collection::vec((dyadic(), dyadic(), dyadic()), 1..16),
            t in (dyadic(), dyadic(), dyadic()),
        ) {
            // Power-of-two atom counts make the centroid division exact as well.
            let n = pts.len().next_power_of_two();
            let mut atoms: Vec<Atom> = pts.iter().map(|&(x, y, z)| h(x, y, z)).collect();
            while atoms.len() < n {
                atoms.push(atoms[0].clone());
            }
            let m = Molecule::new("p", atoms);
            let moved = m.translated(&Vec3::new(t.0, t.1, t.2));
            let a = center_and_place(&m, 5.0, z_axis()).unwrap();
            let b = center_and_place(&moved, 5.0, z_axis()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn extract_is_idempotent(flags in prop::collection::vec(any::<bool>(), 0..30)) {
            let atoms = flags
                .iter()
                .enumerate()
                .map(|(i, &is_h)| Atom::new(if is_h { "H" } else { "O" }, Vec3::new(i as f64, 0.0, 0.0)).unwrap())
                .collect();
            let m = Molecule::new("m", atoms);
            let once = extract_hydrogens(&m);
            prop_assert_eq!(extract_hydrogens(&once), once.clone());
            prop_assert_eq!(once.len(), flags.iter().filter(|&&f| f).count());
        }
    }
}
