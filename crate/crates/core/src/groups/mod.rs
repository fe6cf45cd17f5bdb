//! Finitely generated Kleinian groups given by generator matrices.

mod builders;
mod commensurability;
mod enumerate;
mod search;

use alloc::string::String;
use alloc::vec::Vec;

use crate::conformal::MoebiusMap;
use crate::{Error, Result};

pub use builders::{
    coxeter_gram, coxeter_gram_from_orders, dilation_group, moebius_from_sl2c, picard_group, schottky_group,
    SchottkyPair,
};
pub use commensurability::{commensurability_test, Commensurability};
pub use enumerate::{enumerate_elements, ElementStream, EnumerationOptions, GroupElementRecord};
pub use search::{
    canonical_triple, normalize_by_group, pole_density_search, witness_for, Normalization, PoleSearchOptions,
    PoleSearchWitness,
};

/// Generators with an inverse table; the generator list is inverse-closed.
#[derive(Clone, Debug)]
pub struct KleinianGroup {
    label: String,
    generators: Vec<MoebiusMap>,
    inverse_of: Vec<usize>,
    cocompact_hint: bool,
}

impl KleinianGroup {
    /// Adds missing inverses (matched within `1e-9` relative) after the given
    /// generators.
    pub fn new(label: &str, generators: Vec<MoebiusMap>, cocompact_hint: bool) -> Result<Self> {
        let first = generators.first().ok_or(Error::InvalidInput("no generators".into()))?;
        let size = first.matrix().nrows();
        if let Some(g) = generators.iter().find(|g| g.matrix().nrows() != size) {
            return Err(Error::DimensionMismatch { expected: size, found: g.matrix().nrows() });
        }
        let mut gens = generators;
        let mut inverse_of = alloc::vec![usize::MAX; gens.len()];
        let original = gens.len();
        for i in 0..original {
            if inverse_of[i] != usize::MAX {
                continue;
            }
            let inv = gens[i].inverse();
            let found = (0..gens.len()).find(|&j| same_map(&gens[j], &inv));
            match found {
                Some(j) => {
                    inverse_of[i] = j;
                    inverse_of[j] = i;
                }
                None => {
                    gens.push(inv);
                    inverse_of.push(i);
                    inverse_of[i] = gens.len() - 1;
                }
            }
        }
        Ok(Self { label: label.into(), generators: gens, inverse_of, cocompact_hint })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn generators(&self) -> &[MoebiusMap] {
        &self.generators
    }

    pub fn inverse_index(&self, i: usize) -> usize {
        self.inverse_of[i]
    }

    pub fn cocompact_hint(&self) -> bool {
        self.cocompact_hint
    }

    /// Boundary dimension `n`.
    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    /// Hyperbolic dimension `N`.
    pub fn hyperbolic_dim(&self) -> usize {
        self.generators[0].hyperbolic_dim()
    }

    /// Product of generators along `word`, leftmost letter applied last.
    pub fn word_map(&self, word: &[usize]) -> Result<MoebiusMap> {
        let mut m = MoebiusMap::identity(self.dim());
        for &i in word {
            let g = self.generators.get(i).ok_or(Error::InvalidInput("letter out of range".into()))?;
            m = m.compose(g)?;
        }
        Ok(m)
    }

    /// Formal inverse of a word.
    pub fn inverse_word(&self, word: &[usize]) -> Vec<usize> {
        word.iter().rev().map(|&i| self.inverse_of[i]).collect()
    }
}

pub(crate) fn same_map(a: &MoebiusMap, b: &MoebiusMap) -> bool {
    let scale = crate::linalg::max_abs(a.matrix()).max(1.0);
    a.distance(b) <= 1e-9 * scale
}
