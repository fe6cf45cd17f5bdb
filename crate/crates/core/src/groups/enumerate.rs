use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use super::KleinianGroup;
use crate::conformal::{classify, Classification, MoebiusMap};
use crate::linalg::max_abs;
use crate::tolerances;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct GroupElementRecord {
    pub word: Vec<usize>,
    pub map: MoebiusMap,
    pub classification: Result<Classification>,
}

impl GroupElementRecord {
    pub fn is_even(&self) -> bool {
        self.map.is_orientation_preserving()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnumerationOptions {
    pub max_word_length: usize,
    pub even_only: bool,
    /// Cap on the number of distinct elements visited.
    pub max_elements: usize,
    /// Skip classification (records then carry `Err(InvalidInput)`).
    pub classify: bool,
}

impl EnumerationOptions {
    pub fn new(max_word_length: usize) -> Self {
        Self { max_word_length, even_only: false, max_elements: 500_000, classify: true }
    }

    pub fn even(mut self) -> Self {
        self.even_only = true;
        self
    }
}

/// Tolerant set of matrices: entries agree within `FINGERPRINT` relative to
/// the larger entry scale. A coarse scalar hash selects buckets and the
/// neighbouring buckets are probed so rounding edges cannot split duplicates.
#[derive(Default)]
struct Fingerprints {
    buckets: BTreeMap<i64, Vec<MoebiusMap>>,
}

impl Fingerprints {
    fn key(m: &MoebiusMap) -> f64 {
        let mut h = 0.0;
        for (k, v) in m.matrix().iter().enumerate() {
            h += v * (1.0 + 0.618_033_988_7 * k as f64);
        }
        h
    }

    fn bucket_width(m: &MoebiusMap) -> f64 {
        let size = m.matrix().len() as f64;
        // The key of two equal-within-tolerance maps differs by at most this.
        4.0 * tolerances::FINGERPRINT * max_abs(m.matrix()).max(1.0) * size * size
    }

    /// Inserts unless an equal map is present; returns whether it was new.
    fn insert(&mut self, m: &MoebiusMap) -> bool {
        let scale = max_abs(m.matrix()).max(1.0);
        let w = Self::bucket_width(m);
        let key = Self::key(m);
        let b = (key / w).floor() as i64;
        // Bucket width depends on scale; probe the range the key could fall in.
        let lo = ((key - w) / w).floor() as i64;
        let hi = ((key + w) / w).floor() as i64;
        for k in lo.min(b - 1)..=hi.max(b + 1) {
            if let Some(list) = self.buckets.get(&k) {
                if list.iter().any(|o| o.distance(m) <= tolerances::FINGERPRINT * scale) {
                    return false;
                }
            }
        }
        self.buckets.entry(b).or_default().push(m.clone());
        true
    }
}

struct Pending {
    word: Vec<usize>,
    map: MoebiusMap,
    cursor: usize,
}

/// Breadth-first stream over reduced words, deduplicated by matrix. Words are
/// only extended from the first word reaching an element, so each element is
/// reported once with a shortlex-minimal word.
pub struct ElementStream<'a> {
    group: &'a KleinianGroup,
    options: EnumerationOptions,
    seen: Fingerprints,
    visited: usize,
    frontier: VecDeque<Pending>,
    started: bool,
    failed: bool,
}

impl<'a> ElementStream<'a> {
    pub fn new(group: &'a KleinianGroup, options: EnumerationOptions) -> Self {
        Self {
            group,
            options,
            seen: Fingerprints::default(),
            visited: 0,
            frontier: VecDeque::new(),
            started: false,
            failed: false,
        }
    }

    fn record(&self, word: Vec<usize>, map: MoebiusMap) -> GroupElementRecord {
        let classification = if self.options.classify {
            classify(&map)
        } else {
            Err(Error::InvalidInput("classification skipped".into()))
        };
        GroupElementRecord { word, map, classification }
    }

    /// Next unseen child of the front entry, or `None` once it is exhausted.
    fn next_child(&mut self) -> Option<Result<(Vec<usize>, MoebiusMap)>> {
        let gens = self.group.generators();
        let front = self.frontier.front_mut()?;
        let forbidden = front.word.last().map(|&l| self.group.inverse_index(l));
        while front.cursor < gens.len() {
            let j = front.cursor;
            front.cursor += 1;
            if Some(j) == forbidden {
                continue;
            }
            let m = match front.map.compose(&gens[j]) {
                Ok(m) => m,
                Err(e) => return Some(Err(e)),
            };
            if self.seen.insert(&m) {
                self.visited += 1;
                if self.visited > self.options.max_elements {
                    return Some(Err(Error::BudgetExceeded { limit: self.options.max_elements }));
                }
                let mut w = front.word.clone();
                w.push(j);
                return Some(Ok((w, m)));
            }
        }
        None
    }
}

impl Iterator for ElementStream<'_> {
    type Item = Result<GroupElementRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        if !self.started {
            self.started = true;
            let id = MoebiusMap::identity(self.group.dim());
            self.seen.insert(&id);
            self.visited = 1;
            if self.options.max_word_length > 0 {
                self.frontier.push_back(Pending { word: Vec::new(), map: id.clone(), cursor: 0 });
            }
            return Some(Ok(self.record(Vec::new(), id)));
        }
        loop {
            self.frontier.front()?;
            match self.next_child() {
                Some(Ok((w, m))) => {
                    if w.len() < self.options.max_word_length {
                        self.frontier.push_back(Pending { word: w.clone(), map: m.clone(), cursor: 0 });
                    }
                    if !self.options.even_only || m.is_orientation_preserving() {
                        return Some(Ok(self.record(w, m)));
                    }
                }
                Some(Err(e)) => {
                    self.failed = true;
                    return Some(Err(e));
                }
                None => {
                    self.frontier.pop_front();
                }
            }
        }
    }
}

/// Collects the stream; fails on the first error.
pub fn enumerate_elements(group: &KleinianGroup, options: EnumerationOptions) -> Result<Vec<GroupElementRecord>> {
    ElementStream::new(group, options).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{coxeter_gram, schottky_group, SchottkyPair};
    use crate::linalg::Vector;

    fn schottky() -> KleinianGroup {
        let e = |x: f64, y: f64| Vector::from_column_slice(&[x, y]);
        schottky_group(&[
            SchottkyPair { center_a: e(-3.0, 0.0), radius_a: 1.0, center_b: e(3.0, 0.0), radius_b: 1.0 },
            SchottkyPair { center_a: e(0.0, -3.0), radius_a: 1.0, center_b: e(0.0, 3.0), radius_b: 1.0 },
        ])
        .unwrap()
    }

    fn counts_by_length(records: &[GroupElementRecord]) -> Vec<usize> {
        let max = records.iter().map(|r| r.word.len()).max().unwrap_or(0);
        let mut c = alloc::vec![0; max + 1];
        for r in records {
            c[r.word.len()] += 1;
        }
        c
    }

    #[test]
    fn free_group_word_counts() {
        let g = schottky();
        let recs = enumerate_elements(&g, EnumerationOptions::new(3)).unwrap();
        assert_eq!(counts_by_length(&recs), alloc::vec![1, 4, 12, 36]);
    }

    #[test]
    fn length_zero_is_identity_only() {
        let recs = enumerate_elements(&schottky(), EnumerationOptions::new(0)).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(recs[0].word.is_empty());
        assert_eq!(recs[0].classification, Ok(Classification::Identity));
    }

    #[test]
    fn coxeter_relations_collapse_words() {
        let g = KleinianGroup::coxeter("534", &coxeter_gram(&[5, 3, 4]), true).unwrap();
        let recs = enumerate_elements(&g, EnumerationOptions::new(4)).unwrap();
        // Free product of four Z/2: 1 + 4 + 12 + 36 + 108.
        assert!(recs.len() < 161, "{}", recs.len());
        for r in &recs {
            let m = g.word_map(&r.word).unwrap();
            assert!(m.distance(&r.map) <= 1e-9);
        }
    }

    #[test]
    fn even_only_filters_orientation() {
        let g = KleinianGroup::coxeter("534", &coxeter_gram(&[5, 3, 4]), true).unwrap();
        let opts = EnumerationOptions { classify: false, ..EnumerationOptions::new(4).even() };
        let recs = enumerate_elements(&g, opts).unwrap();
        assert!(recs.iter().all(|r| r.word.len() % 2 == 0 && r.is_even()));
    }

    #[test]
    fn budget_exceeded() {
        let opts = EnumerationOptions { max_elements: 10, ..EnumerationOptions::new(3) };
        assert!(matches!(enumerate_elements(&schottky(), opts), Err(Error::BudgetExceeded { limit: 10 })));
    }
}
