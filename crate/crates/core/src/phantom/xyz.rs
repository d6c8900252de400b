//! XYZ coordinate files: a count line, a comment line, then `element x y z`
//! per atom with coordinates in angstroms.

use std::fmt::Write;

use super::{Atom, Molecule, ANGSTROM_TO_NM};
use crate::error::{Error, Result};
use crate::Vec3;

pub fn parse_xyz(text: &str) -> Result<Molecule> {
    let mut lines = text.lines().enumerate();
    let (_, count_line) = lines
        .next()
        .ok_or_else(|| Error::parse(1, "missing atom count line"))?;
    let count: usize = count_line
        .trim()
        .parse()
        .map_err(|_| Error::parse(1, format!("malformed atom count '{}'", count_line.trim())))?;
    let name = lines
        .next()
        .map(|(_, l)| l.trim().to_string())
        .unwrap_or_default();

    let mut atoms = Vec::with_capacity(count);
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 4 {
            return Err(Error::parse(lineno, format!("expected 'element x y z', got '{line}'")));
        }
        let mut xyz = [0.0; 3];
        for (k, slot) in xyz.iter_mut().enumerate() {
            *slot = fields[k + 1].parse().map_err(|_| {
                Error::parse(lineno, format!("non-numeric coordinate '{}'", fields[k + 1]))
            })?;
        }
        let position = Vec3::from(xyz) * ANGSTROM_TO_NM;
        let atom = Atom::new(fields[0], position).map_err(|e| Error::parse(lineno, e.to_string()))?;
        atoms.push(atom);
    }

    if atoms.len() != count {
        return Err(Error::parse(
            1,
            format!("header declares {count} atoms but {} were read", atoms.len()),
        ));
    }
    Ok(Molecule::new(name, atoms))
}

/// Writes a molecule as XYZ text (angstroms, full round-trip precision).
pub fn write_xyz(m: &Molecule) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", m.atoms.len());
    let _ = writeln!(out, "{}", m.name.replace('\n', " "));
    for a in &m.atoms {
        let p = a.position / ANGSTROM_TO_NM;
        let _ = writeln!(out, "{} {:e} {:e} {:e}", a.element, p.x, p.y, p.z);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_hydrogen() {
        let m = parse_xyz("1\n\nH 0.0 0.0 0.0").unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.atoms[0].element, "H");
        assert_eq!(m.atoms[0].position, Vec3::zeros());
    }

    #[test]
    fn converts_angstrom_to_nm() {
        let m = parse_xyz("2\nmol\nH 10.0 0 0\nO 0 0 0").unwrap();
        assert_eq!(m.name, "mol");
        assert_eq!(m.len(), 2);
        assert!((m.atoms[0].position.x - 1.0).abs() < 1e-15);
        assert_eq!(m.atoms[1].element, "O");
    }

    #[test]
    fn errors_name_the_line() {
        match parse_xyz("x\n\nH 0 0 0") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_xyz("2\n\nH 0 0 0\nH 0 zero 0") {
            Err(Error::Parse { line: 4, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_xyz("3\n\nH 0 0 0\nH 1 0 0") {
            Err(Error::Parse { line: 1, message }) => assert!(message.contains("3")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_xyz("1\n\nH 0 0"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_xyz(""), Err(Error::Parse { line: 1, .. })));
    }

    proptest! {
        #[test]
        fn writer_round_trips(pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0), 1..20)) {
            let atoms = pts.iter().map(|&(x, y, z)| Atom::hydrogen(Vec3::new(x, y, z) * 0.1)).collect();
            let m = Molecule::new("rt", atoms);
            let back = parse_xyz(&write_xyz(&m)).unwrap();
            prop_assert_eq!(back.len(), m.len());
            for (a, b) in m.atoms.iter().zip(&back.atoms) {
                prop_assert!((a.position - b.position).norm() < 1e-6);
            }
        }
    }
}
