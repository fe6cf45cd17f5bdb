//! Built-in groups, addressable by name from scenarios.

use kleinflow_core::groups::{coxeter_gram, dilation_group, picard_group, schottky_group, KleinianGroup, SchottkyPair};
use kleinflow_core::{Result, Vector};

pub struct CatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub build: fn() -> Result<KleinianGroup>,
}

fn coxeter_534() -> Result<KleinianGroup> {
    KleinianGroup::coxeter("534", &coxeter_gram(&[5, 3, 4]), true)
}

fn coxeter_534_even() -> Result<KleinianGroup> {
    coxeter_534()?.rotation_subgroup()
}

fn coxeter_353() -> Result<KleinianGroup> {
    KleinianGroup::coxeter("353", &coxeter_gram(&[3, 5, 3]), true)
}

fn schottky() -> Result<KleinianGroup> {
    let e = |x: f64, y: f64| Vector::from_column_slice(&[x, y]);
    schottky_group(&[
        SchottkyPair { center_a: e(-3.0, 0.0), radius_a: 1.0, center_b: e(3.0, 0.0), radius_b: 1.0 },
        SchottkyPair { center_a: e(0.0, -3.0), radius_a: 1.0, center_b: e(0.0, 3.0), radius_b: 1.0 },
    ])
}

fn dilation() -> Result<KleinianGroup> {
    dilation_group(2, 2.0)
}

pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "534",
        description: "reflection group of the [5,3,4] Coxeter simplex, cocompact in H³",
        build: coxeter_534,
    },
    CatalogEntry {
        name: "534+",
        description: "orientation-preserving subgroup of 534 (products of reflection pairs)",
        build: coxeter_534_even,
    },
    CatalogEntry {
        name: "353",
        description: "reflection group of the [3,5,3] Coxeter simplex, cocompact in H³",
        build: coxeter_353,
    },
    CatalogEntry {
        name: "picard",
        description: "PSL(2,Z[i]) acting on R² ∪ ∞, finite covolume, not cocompact",
        build: picard_group,
    },
    CatalogEntry {
        name: "schottky",
        description: "classical Schottky group on four unit circles at distance 3",
        build: schottky,
    },
    CatalogEntry { name: "dilation2", description: "cyclic group generated by x ↦ 2x on R²", build: dilation },
];

pub fn lookup(name: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_builds() {
        for e in ENTRIES {
            let g = (e.build)().unwrap_or_else(|err| panic!("{}: {err}", e.name));
            assert!(!g.generators().is_empty());
        }
        assert!(lookup("534").is_some() && lookup("nope").is_none());
    }
}
