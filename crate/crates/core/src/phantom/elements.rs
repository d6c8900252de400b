const SYMBOLS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

/// Normalizes a chemical symbol to canonical case ("CL" -> "Cl") if it names a known element.
/// Deuterium and tritium labels map to hydrogen.
pub fn canonical_symbol(raw: &str) -> Option<&'static str> {
    let raw = raw.trim();
    if raw.is_empty() || raw.len() > 3 {
        return None;
    }
    if raw.eq_ignore_ascii_case("D") || raw.eq_ignore_ascii_case("T") {
        return Some("H");
    }
    SYMBOLS.iter().copied().find(|s| s.eq_ignore_ascii_case(raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_insensitive_lookup() {
        assert_eq!(canonical_symbol("h"), Some("H"));
        assert_eq!(canonical_symbol("CL"), Some("Cl"));
        assert_eq!(canonical_symbol(" Fe "), Some("Fe"));
        assert_eq!(canonical_symbol("D"), Some("H"));
        assert_eq!(canonical_symbol("Xx"), None);
        assert_eq!(canonical_symbol(""), None);
    }
}
