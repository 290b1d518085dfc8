//! Built-in algebras, shipped as definition documents under `data/`.

use crate::algebra::SuperAlgebra;
use crate::codim::Target;
use crate::definition::{build_structured_algebra, parse_definition, AlgebraDefinition, Expected};
use crate::error::{Error, Result};

const SOURCES: &[(&str, &str)] = &[
    ("A_1", include_str!("../data/a1.toml")),
    ("A_2", include_str!("../data/a2.toml")),
    ("A_3", include_str!("../data/a3.toml")),
    ("A_4", include_str!("../data/a4.toml")),
    ("A_5", include_str!("../data/a5.toml")),
    ("A_6", include_str!("../data/a6.toml")),
    ("A_7", include_str!("../data/a7.toml")),
    ("A_8", include_str!("../data/a8.toml")),
    ("A_9", include_str!("../data/a9.toml")),
    ("A_6^1", include_str!("../data/a6_1.toml")),
    ("A_6^2", include_str!("../data/a6_2.toml")),
    ("A_6^3", include_str!("../data/a6_3.toml")),
    ("A_7^1", include_str!("../data/a7_1.toml")),
    ("A_7^2", include_str!("../data/a7_2.toml")),
    ("A_7^3", include_str!("../data/a7_3.toml")),
    ("C_1", include_str!("../data/c1.toml")),
    ("C_2", include_str!("../data/c2.toml")),
    ("D", include_str!("../data/d.toml")),
    ("D_0", include_str!("../data/d0.toml")),
    ("UT_2", include_str!("../data/ut2.toml")),
    ("G", include_str!("../data/g.toml")),
    ("F", include_str!("../data/f.toml")),
];

/// The nine algebras of small proper central exponent above two.
pub const MINIMAL: [&str; 9] = ["A_1", "A_2", "A_3", "A_4", "A_5", "A_6", "A_7", "A_8", "A_9"];

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub definition: AlgebraDefinition,
    /// The object of interest is `G(B)` for the stored superalgebra `B`.
    pub envelope: bool,
    pub expected: Expected,
    /// The TOML document the entry was built from.
    pub source: &'static str,
}

impl CatalogEntry {
    /// The stored algebra wrapped for computations on the object of interest.
    pub fn target(&self, algebra: SuperAlgebra) -> Target {
        Target::new(algebra, self.envelope)
    }
}

pub fn catalog_names() -> Vec<&'static str> {
    SOURCES.iter().map(|(n, _)| *n).collect()
}

/// Normalizes spellings such as `a3`, `A3`, `A_6^1` or `a6_1`.
fn canonical(name: &str) -> Option<&'static str> {
    let key = |s: &str| s.to_ascii_lowercase().replace(['_', '^', ' '], "");
    let k = key(name);
    SOURCES.iter().map(|(n, _)| *n).find(|n| key(n) == k)
}

pub fn catalog_algebra(name: &str) -> Result<(SuperAlgebra, CatalogEntry)> {
    let Some(canon) = canonical(name) else {
        return Err(Error::UnknownAlgebra { name: name.to_string(), available: catalog_names().join(", ") });
    };
    let (_, src) = SOURCES.iter().find(|(n, _)| *n == canon).expect("canonical name");
    let def = parse_definition(src)?;
    let alg = build_structured_algebra(&def)?;
    let entry = CatalogEntry {
        name: canon.to_string(),
        envelope: def.envelope,
        expected: def.expected.clone().unwrap_or_default(),
        definition: def,
        source: src,
    };
    Ok((alg, entry))
}

/// The catalog algebra as a computation target.
pub fn catalog_target(name: &str) -> Result<(Target, CatalogEntry)> {
    let (a, e) = catalog_algebra(name)?;
    Ok((e.target(a), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds_with_verified_wedderburn_data() {
        for name in catalog_names() {
            let (a, e) = catalog_algebra(name).unwrap_or_else(|err| panic!("{name}: {err}"));
            assert_eq!(e.name, name);
            assert_eq!(a.name(), name);
            let w = a.wedderburn().unwrap_or_else(|| panic!("{name} lacks Wedderburn data"));
            let rep = a.verify_wedderburn(w);
            assert!(rep.passed(), "{name}: {:?}", rep.failure);
        }
    }

    #[test]
    fn dimensions_and_parities() {
        let count = |n: &str| {
            let (a, e) = catalog_algebra(n).unwrap();
            let odd = a.parities().iter().filter(|&&p| p == 1).count();
            (a.dim(), odd, e.envelope)
        };
        assert_eq!(count("A_3"), (9, 0, false));
        assert_eq!(count("A_4"), (13, 0, false));
        assert_eq!(count("A_5"), (9, 4, true));
        assert_eq!(count("A_6"), (12, 4, true));
        assert_eq!(count("A_7"), (12, 4, true));
        assert_eq!(count("A_8"), (8, 3, true));
        assert_eq!(count("C_1"), (4, 2, true));
        assert_eq!(count("C_2"), (4, 2, true));
        assert_eq!(count("D"), (5, 0, false));
        assert_eq!(count("D_0"), (8, 0, false));
    }

    #[test]
    fn spelling_variants_resolve() {
        assert_eq!(catalog_algebra("a3").unwrap().1.name, "A_3");
        assert_eq!(catalog_algebra("A6^1").unwrap().1.name, "A_6^1");
        assert_eq!(catalog_algebra("d_0").unwrap().1.name, "D_0");
    }

    #[test]
    fn unknown_names_list_the_catalog() {
        match catalog_algebra("A_10") {
            Err(Error::UnknownAlgebra { available, .. }) => assert!(available.contains("A_9")),
            other => panic!("{other:?}"),
        }
    }
}
