//! Minimal PDB reader: ATOM/HETATM fixed-column records only.

use super::{canonical_symbol, Atom, Molecule, ANGSTROM_TO_NM};
use crate::error::{Error, Result};
use crate::Vec3;

/// 1-based inclusive column slice, tolerant of short lines.
fn columns(line: &str, first: usize, last: usize) -> &str {
    let start = (first - 1).min(line.len());
    let end = last.min(line.len());
    line.get(start..end).unwrap_or("")
}

/// Element from an atom name when columns 77-78 are blank. Hydrogen names
/// start with H or with a digit followed by H ("1HB", "2HG1").
fn element_from_name(name: &str) -> Option<&'static str> {
    let name = name.trim();
    let mut chars = name.chars();
    match (chars.next(), chars.next()) {
        (Some('H'), _) | (Some('h'), _) => return Some("H"),
        (Some(d), Some('H')) if d.is_ascii_digit() => return Some("H"),
        _ => {}
    }
    let letters: String = name
        .chars()
        .skip_while(|c| c.is_ascii_digit())
        .take_while(|c| c.is_ascii_alphabetic())
        .collect();
    letters.get(..1).and_then(canonical_symbol)
}

pub fn parse_pdb_atoms(text: &str) -> Result<Molecule> {
    let mut atoms = Vec::new();
    let mut name = String::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let record = columns(line, 1, 6);
        if name.is_empty() && (record.starts_with("HEADER") || record.starts_with("TITLE")) {
            name = columns(line, 11, 80).trim().to_string();
        }
        if record != "ATOM  " && record != "HETATM" && record.trim_end() != "ATOM" {
            continue;
        }
        let mut xyz = [0.0; 3];
        for (k, (a, b)) in [(31, 38), (39, 46), (47, 54)].into_iter().enumerate() {
            let field = columns(line, a, b).trim();
            xyz[k] = field.parse().map_err(|_| {
                Error::parse(lineno, format!("unparseable coordinate field '{field}' (columns {a}-{b})"))
            })?;
        }
        let atom_name = columns(line, 13, 16);
        let element = canonical_symbol(columns(line, 77, 78))
            .or_else(|| element_from_name(atom_name))
            .ok_or_else(|| Error::parse(lineno, format!("cannot infer element for atom '{}'", atom_name.trim())))?;
        let atom = Atom::new(element, Vec3::from(xyz) * ANGSTROM_TO_NM)
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
        atoms.push(atom);
    }
    if atoms.is_empty() {
        return Err(Error::EmptyMolecule);
    }
    Ok(Molecule::new(name, atoms))
}

#[cfg(test)]
mod tests {
    use super::*;

    const H_LINE: &str =
        "HETATM    1  H1  LIG A   1       5.000   0.000   0.000  1.00  0.00           H";

    #[test]
    fn no_atom_records_is_an_error() {
        assert!(matches!(
            parse_pdb_atoms("HEADER    NOTHING\nEND\n"),
            Err(Error::EmptyMolecule)
        ));
    }

    #[test]
    fn single_hetatm_hydrogen() {
        let m = parse_pdb_atoms(H_LINE).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.atoms[0].element, "H");
        assert!((m.atoms[0].position - Vec3::new(0.5, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ignores_other_records_and_uses_name_heuristic() {
        let text = "\
REMARK  stuff
ATOM      1  CA  ALA A   1       1.000   2.000   3.000  1.00  0.00
ATOM      2 1HB  ALA A   1       1.000   2.000   4.000  1.00  0.00
ATOM      3  HA  ALA A   1       1.000   2.000   5.000  1.00  0.00
CONECT    1    2
";
        let m = parse_pdb_atoms(text).unwrap();
        let els: Vec<&str> = m.atoms.iter().map(|a| a.element.as_str()).collect();
        assert_eq!(els, ["C", "H", "H"]);
        assert!((m.atoms[2].position.z - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bad_coordinate_names_line() {
        let text = format!("REMARK\n{}", H_LINE.replace("5.000", "5.0x0"));
        assert!(matches!(parse_pdb_atoms(&text), Err(Error::Parse { line: 2, .. })));
    }
}
