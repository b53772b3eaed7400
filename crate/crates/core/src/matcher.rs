//! Label similarity measures and the alignment step that turns two
//! ontologies into a scored, injective mapping set.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::ontology::{Concept, Ontology};

fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

/// `1 - d(a, b) / max(|a|, |b|)` over case-folded characters, where `d` is
/// the Levenshtein distance.
pub fn levenshtein_sim(a: &str, b: &str) -> f64 {
    let a: Vec<char> = fold(a).chars().collect();
    let b: Vec<char> = fold(b).chars().collect();
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - edit_distance(&a, &b) as f64 / longest as f64
}

/// Two-row Levenshtein distance.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Character trigrams of the case-folded string padded with two leading
/// spaces and one trailing space. The empty string has no trigrams.
pub fn trigrams(s: &str) -> BTreeSet<[char; 3]> {
    let folded = fold(s);
    if folded.is_empty() {
        return BTreeSet::new();
    }
    let padded: Vec<char> = "  "
        .chars()
        .chain(folded.chars())
        .chain(" ".chars())
        .collect();
    padded.windows(3).map(|w| [w[0], w[1], w[2]]).collect()
}

/// Dice coefficient over padded trigram sets.
pub fn trigram_sim(a: &str, b: &str) -> f64 {
    let (ta, tb) = (trigrams(a), trigrams(b));
    if ta.is_empty() && tb.is_empty() {
        return 1.0;
    }
    let shared = ta.intersection(&tb).count();
    2.0 * shared as f64 / (ta.len() + tb.len()) as f64
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: expected `termA<TAB>termB`")]
    Malformed { line: usize },
    #[error("line {line}: empty term")]
    EmptyTerm { line: usize },
}

/// Declared synonym pairs closed under symmetry and transitivity.
///
/// Terms are compared case-folded and trimmed.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    // folded term -> least folded term of its synonym class
    class_of: HashMap<String, String>,
    pairs: Vec<(String, String)>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<A: AsRef<str>, B: AsRef<str>>(
        pairs: impl IntoIterator<Item = (A, B)>,
    ) -> Self {
        let mut lex = Self::new();
        for (a, b) in pairs {
            lex.add(a.as_ref(), b.as_ref());
        }
        lex
    }

    pub fn add(&mut self, a: &str, b: &str) {
        self.pairs.push((a.to_string(), b.to_string()));
        let (fa, fb) = (fold(a), fold(b));
        let ca = self
            .class_of
            .get(&fa)
            .cloned()
            .unwrap_or_else(|| fa.clone());
        let cb = self
            .class_of
            .get(&fb)
            .cloned()
            .unwrap_or_else(|| fb.clone());
        let (keep, drop) = if ca <= cb { (ca, cb) } else { (cb, ca) };
        for v in self.class_of.values_mut() {
            if *v == drop {
                *v = keep.clone();
            }
        }
        self.class_of.insert(fa, keep.clone());
        self.class_of.insert(fb, keep);
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The pairs as declared, before closure.
    pub fn declared_pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn synonyms(&self, a: &str, b: &str) -> bool {
        let (fa, fb) = (fold(a), fold(b));
        if fa == fb {
            return true;
        }
        match (self.class_of.get(&fa), self.class_of.get(&fb)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }
}

/// Parses the tab-separated lexicon format: one `termA<TAB>termB` pair per
/// line, `#` comments, blank lines ignored.
pub fn parse_lexicon(text: &str) -> Result<Lexicon, LexiconError> {
    let mut lex = Lexicon::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split('\t').collect();
        if fields.len() != 2 {
            return Err(LexiconError::Malformed { line });
        }
        let (a, b) = (fields[0].trim(), fields[1].trim());
        if a.is_empty() || b.is_empty() {
            return Err(LexiconError::EmptyTerm { line });
        }
        lex.add(a, b);
    }
    Ok(lex)
}

pub fn synonym_sim(a: &str, b: &str, lex: &Lexicon) -> f64 {
    if lex.synonyms(a, b) {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Combiner {
    Max,
    WeightedAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Weights {
    pub edit: f64,
    pub trigram: f64,
    pub synonym: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            edit: 1.0,
            trigram: 1.0,
            synonym: 1.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("threshold {0} must lie in (0, 1]")]
    Threshold(f64),
    #[error("weight {0} must lie in [0, 1]")]
    Weight(f64),
    #[error("at least one similarity weight must be positive")]
    NoMeasure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SimilarityConfig {
    pub threshold: f64,
    pub weights: Weights,
    pub combiner: Combiner,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            threshold: 0.8,
            weights: Weights::default(),
            combiner: Combiner::Max,
        }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(ConfigError::Threshold(self.threshold));
        }
        let w = [
            self.weights.edit,
            self.weights.trigram,
            self.weights.synonym,
        ];
        if let Some(&bad) = w.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(ConfigError::Weight(bad));
        }
        if w.iter().all(|&x| x == 0.0) {
            return Err(ConfigError::NoMeasure);
        }
        Ok(())
    }
}

/// Combined label similarity of two concepts. Attributes and properties
/// are not scored.
pub fn combined_sim(a: &Concept, b: &Concept, cfg: &SimilarityConfig, lex: &Lexicon) -> f64 {
    label_sim(&a.label, &b.label, cfg, lex)
}

pub fn label_sim(a: &str, b: &str, cfg: &SimilarityConfig, lex: &Lexicon) -> f64 {
    profile_sim(&Profile::new(a, lex), &Profile::new(b, lex), cfg)
}

/// Per-label data shared by every comparison the label takes part in.
struct Profile<'l> {
    folded: String,
    chars: Vec<char>,
    trigrams: BTreeSet<[char; 3]>,
    synonym_class: Option<&'l str>,
}

impl<'l> Profile<'l> {
    fn new(label: &str, lex: &'l Lexicon) -> Self {
        let folded = fold(label);
        Self {
            chars: folded.chars().collect(),
            trigrams: trigrams(label),
            synonym_class: lex.class_of.get(&folded).map(String::as_str),
            folded,
        }
    }
}

fn profile_sim(a: &Profile, b: &Profile, cfg: &SimilarityConfig) -> f64 {
    let w = cfg.weights;
    let mut scored: Vec<(f64, f64)> = Vec::with_capacity(3);
    if w.edit > 0.0 {
        let longest = a.chars.len().max(b.chars.len());
        let s = if longest == 0 {
            1.0
        } else {
            1.0 - edit_distance(&a.chars, &b.chars) as f64 / longest as f64
        };
        scored.push((w.edit, s));
    }
    if w.trigram > 0.0 {
        let s = if a.trigrams.is_empty() && b.trigrams.is_empty() {
            1.0
        } else {
            let shared = a.trigrams.intersection(&b.trigrams).count();
            2.0 * shared as f64 / (a.trigrams.len() + b.trigrams.len()) as f64
        };
        scored.push((w.trigram, s));
    }
    if w.synonym > 0.0 {
        let same = a.folded == b.folded
            || (a.synonym_class.is_some() && a.synonym_class == b.synonym_class);
        scored.push((w.synonym, if same { 1.0 } else { 0.0 }));
    }
    match cfg.combiner {
        Combiner::Max => scored.iter().map(|&(w, s)| w * s).fold(0.0, f64::max),
        Combiner::WeightedAverage => {
            let total: f64 = scored.iter().map(|&(w, _)| w).sum();
            if total == 0.0 {
                0.0
            } else {
                scored.iter().map(|&(w, s)| w * s).sum::<f64>() / total
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MappingRelation {
    Equivalence,
    IsA,
}

/// A scored correspondence between a concept of the left ontology and a
/// concept of the right one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mapping {
    pub left: String,
    pub right: String,
    pub score: f64,
    pub relation: MappingRelation,
}

impl Mapping {
    pub fn new(left: impl Into<String>, right: impl Into<String>, score: f64) -> Self {
        Self {
            left: left.into(),
            right: right.into(),
            score,
            relation: MappingRelation::Equivalence,
        }
    }

    pub fn key(&self) -> (&str, &str) {
        (&self.left, &self.right)
    }

    /// Descending score, then left label, then right label.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then_with(|| self.left.cmp(&other.left))
            .then_with(|| self.right.cmp(&other.right))
    }
}

/// The alignment between two ontologies, kept in canonical mapping order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MappingSet {
    pub left_ontology: String,
    pub right_ontology: String,
    mappings: Vec<Mapping>,
}

impl MappingSet {
    /// Sorts `mappings` into canonical order. Exact duplicates (same left
    /// and right) keep only the first in that order. Injectivity is not
    /// enforced here; see [`MappingSet::is_injective`].
    pub fn new(
        left: impl Into<String>,
        right: impl Into<String>,
        mut mappings: Vec<Mapping>,
    ) -> Self {
        mappings.sort_by(Mapping::canonical_cmp);
        let mut seen = HashSet::new();
        mappings.retain(|m| seen.insert((m.left.clone(), m.right.clone())));
        Self {
            left_ontology: left.into(),
            right_ontology: right.into(),
            mappings,
        }
    }

    pub fn empty(left: impl Into<String>, right: impl Into<String>) -> Self {
        Self::new(left, right, Vec::new())
    }

    /// Greedy selection in canonical order keeping a mapping only if
    /// neither of its concepts is already used.
    pub fn select_injective(
        left: impl Into<String>,
        right: impl Into<String>,
        candidates: Vec<Mapping>,
    ) -> Self {
        let all = Self::new(left, right, candidates);
        let mut used_left = HashSet::new();
        let mut used_right = HashSet::new();
        let mappings = all
            .mappings
            .into_iter()
            .filter(|m| {
                if used_left.contains(&m.left) || used_right.contains(&m.right) {
                    return false;
                }
                used_left.insert(m.left.clone());
                used_right.insert(m.right.clone());
                true
            })
            .collect();
        Self {
            left_ontology: all.left_ontology,
            right_ontology: all.right_ontology,
            mappings,
        }
    }

    pub fn mappings(&self) -> &[Mapping] {
        &self.mappings
    }

    pub fn len(&self) -> usize {
        self.mappings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mappings.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Mapping> {
        self.mappings.iter()
    }

    pub fn position(&self, left: &str, right: &str) -> Option<usize> {
        self.mappings
            .iter()
            .position(|m| m.left == left && m.right == right)
    }

    pub fn get(&self, left: &str, right: &str) -> Option<&Mapping> {
        self.position(left, right).map(|i| &self.mappings[i])
    }

    pub fn contains(&self, left: &str, right: &str) -> bool {
        self.position(left, right).is_some()
    }

    pub fn is_injective(&self) -> bool {
        let mut l = HashSet::new();
        let mut r = HashSet::new();
        self.mappings
            .iter()
            .all(|m| l.insert(m.left.as_str()) && r.insert(m.right.as_str()))
    }

    /// Copy without the mapping `(left, right)`.
    pub fn without(&self, left: &str, right: &str) -> Self {
        let mut out = self.clone();
        out.mappings
            .retain(|m| !(m.left == left && m.right == right));
        out
    }

    pub fn right_of(&self, left: &str) -> Option<&str> {
        self.mappings
            .iter()
            .find(|m| m.left == left)
            .map(|m| m.right.as_str())
    }
}

impl<'a> IntoIterator for &'a MappingSet {
    type Item = &'a Mapping;
    type IntoIter = std::slice::Iter<'a, Mapping>;

    fn into_iter(self) -> Self::IntoIter {
        self.mappings.iter()
    }
}

/// Every concept pair whose combined similarity exceeds the threshold.
pub fn candidates(
    o1: &Ontology,
    o2: &Ontology,
    cfg: &SimilarityConfig,
    lex: &Lexicon,
) -> Vec<Mapping> {
    candidates_with(o1, o2, cfg, lex, Exec::default())
}

pub fn candidates_with(
    o1: &Ontology,
    o2: &Ontology,
    cfg: &SimilarityConfig,
    lex: &Lexicon,
    exec: Exec,
) -> Vec<Mapping> {
    let right: Vec<Profile> = o2
        .concepts()
        .iter()
        .map(|c| Profile::new(&c.label, lex))
        .collect();
    let rows = exec.map(o1.concepts(), |a| {
        let pa = Profile::new(&a.label, lex);
        o2.concepts()
            .iter()
            .zip(&right)
            .filter_map(|(b, pb)| {
                let s = profile_sim(&pa, pb, cfg);
                (s > cfg.threshold).then(|| Mapping::new(a.label.clone(), b.label.clone(), s))
            })
            .collect::<Vec<_>>()
    });
    rows.into_iter().flatten().collect()
}

pub fn match_ontologies(
    o1: &Ontology,
    o2: &Ontology,
    cfg: &SimilarityConfig,
    lex: &Lexicon,
) -> MappingSet {
    match_ontologies_with(o1, o2, cfg, lex, Exec::default())
}

pub fn match_ontologies_with(
    o1: &Ontology,
    o2: &Ontology,
    cfg: &SimilarityConfig,
    lex: &Lexicon,
    exec: Exec,
) -> MappingSet {
    MappingSet::select_injective(o1.id(), o2.id(), candidates_with(o1, o2, cfg, lex, exec))
}
