//! Rule-based validation of a mapping set against its two ontologies.
//!
//! Rules:
//! * `Cycle`: mappings `(A, M)` and `(B, O)` with `A ⊂ B` in the left
//!   ontology and `O ⊂ M` in the right one would put a cycle in the merged
//!   class hierarchy. Longer cycles through three or more unified pairs are
//!   reported under the same rule.
//! * `RedundantSubsumption`: mappings `(A, M)` and `(B, N)` with `B ⊂ A`
//!   directly on one side and `N ⊂ M` only indirectly on the other.
//! * `MultipleCorrespondence`: two mappings share a concept.
//!
//! `⊂` is "is a (possibly indirect) subclass of", following `Inheritance`
//! edges from child to parent.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::RelationKind;
use crate::graph::Digraph;
use crate::matcher::{Mapping, MappingSet};
use crate::ontology::Ontology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RuleId {
    Cycle,
    RedundantSubsumption,
    MultipleCorrespondence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Severity {
    Reject,
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRule {
    pub id: RuleId,
    pub severity: Severity,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("unknown concept {0:?}")]
    UnknownConcept(String),
    #[error("rule {0:?} appears more than once")]
    DuplicateRule(RuleId),
}

/// Active rules, at most one per id, kept sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    rules: Vec<ValidationRule>,
}

impl RuleSet {
    pub fn new(mut rules: Vec<ValidationRule>) -> Result<Self, ValidationError> {
        rules.sort_by_key(|r| r.id);
        if let Some(w) = rules.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(ValidationError::DuplicateRule(w[0].id));
        }
        Ok(Self { rules })
    }

    /// Redundant subsumption is rejected instead of only reported.
    pub fn strict() -> Self {
        Self::default().with_severity(RuleId::RedundantSubsumption, Severity::Reject)
    }

    pub fn with_severity(mut self, id: RuleId, severity: Severity) -> Self {
        match self.rules.iter_mut().find(|r| r.id == id) {
            Some(r) => r.severity = severity,
            None => {
                self.rules.push(ValidationRule { id, severity });
                self.rules.sort_by_key(|r| r.id);
            }
        }
        self
    }

    pub fn without(mut self, id: RuleId) -> Self {
        self.rules.retain(|r| r.id != id);
        self
    }

    pub fn rules(&self) -> &[ValidationRule] {
        &self.rules
    }

    pub fn severity(&self, id: RuleId) -> Option<Severity> {
        self.rules.iter().find(|r| r.id == id).map(|r| r.severity)
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        Self {
            rules: vec![
                ValidationRule {
                    id: RuleId::Cycle,
                    severity: Severity::Reject,
                },
                ValidationRule {
                    id: RuleId::RedundantSubsumption,
                    severity: Severity::Warn,
                },
                ValidationRule {
                    id: RuleId::MultipleCorrespondence,
                    severity: Severity::Reject,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind", content = "mapping")]
pub enum Resolution {
    DroppedMapping(Mapping),
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub rule: RuleId,
    pub severity: Severity,
    pub involved: Vec<Mapping>,
    pub explanation: String,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidatedMappings {
    pub accepted: MappingSet,
    pub violations: Vec<Violation>,
}

impl ValidatedMappings {
    /// Wraps a mapping set that needs no validation.
    pub fn unchecked(accepted: MappingSet) -> Self {
        Self {
            accepted,
            violations: Vec::new(),
        }
    }

    pub fn dropped(&self) -> impl Iterator<Item = &Mapping> {
        self.violations.iter().filter_map(|v| match &v.resolution {
            Resolution::DroppedMapping(m) => Some(m),
            Resolution::None => None,
        })
    }
}

/// Transitive closure of an ontology's inheritance edges.
struct Hierarchy<'a> {
    ontology: &'a Ontology,
    ancestors: HashMap<&'a str, BTreeSet<&'a str>>,
}

impl<'a> Hierarchy<'a> {
    fn new(o: &'a Ontology) -> Self {
        let mut g = Digraph::new();
        for c in o.concepts() {
            g.add_node(c.label.as_str());
        }
        for r in o
            .relationships()
            .iter()
            .filter(|r| r.rel_type == RelationKind::Inheritance)
        {
            g.add_edge(r.source.as_str(), r.target.as_str());
        }
        let ancestors = o
            .concepts()
            .iter()
            .map(|c| (c.label.as_str(), g.reachable_from(&c.label.as_str())))
            .collect();
        Self {
            ontology: o,
            ancestors,
        }
    }

    fn below(&self, x: &str, y: &str) -> bool {
        x != y && self.ancestors.get(x).is_some_and(|a| a.contains(y))
    }

    fn direct(&self, x: &str, y: &str) -> bool {
        self.ontology.has_edge(x, y, RelationKind::Inheritance)
    }
}

/// True iff a directed path of `Inheritance` edges leads from `x` to `y`.
pub fn subsumes(o: &Ontology, x: &str, y: &str) -> Result<bool, ValidationError> {
    for l in [x, y] {
        if !o.contains(l) {
            return Err(ValidationError::UnknownConcept(l.to_string()));
        }
    }
    if x == y {
        return Ok(false);
    }
    let mut g = Digraph::new();
    for r in o
        .relationships()
        .iter()
        .filter(|r| r.rel_type == RelationKind::Inheritance)
    {
        g.add_edge(r.source.as_str(), r.target.as_str());
    }
    Ok(g.has_path(&x, &y))
}

struct Context<'a> {
    h1: Hierarchy<'a>,
    h2: Hierarchy<'a>,
}

impl<'a> Context<'a> {
    fn new(o1: &'a Ontology, o2: &'a Ontology) -> Self {
        Self {
            h1: Hierarchy::new(o1),
            h2: Hierarchy::new(o2),
        }
    }

    fn cycles(&self, m: &MappingSet, severity: Severity) -> Vec<Violation> {
        let ms = m.mappings();
        let mut out = Vec::new();
        let mut explained: BTreeSet<(usize, usize)> = BTreeSet::new();
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                let (p, q) = (&ms[i], &ms[j]);
                let hit = if self.h1.below(&p.left, &q.left) && self.h2.below(&q.right, &p.right) {
                    Some((p, q))
                } else if self.h1.below(&q.left, &p.left) && self.h2.below(&p.right, &q.right) {
                    Some((q, p))
                } else {
                    None
                };
                if let Some((a, b)) = hit {
                    explained.insert((i, j));
                    out.push(Violation {
                        rule: RuleId::Cycle,
                        severity,
                        involved: vec![p.clone(), q.clone()],
                        explanation: format!(
                            "{:?} is below {:?} on the left but {:?} is below {:?} on the right; \
                             mapping both pairs creates a cycle in the class hierarchy",
                            a.left, b.left, b.right, a.right
                        ),
                        resolution: Resolution::None,
                    });
                }
            }
        }

        // Cycles that alternate between the two hierarchies through three or
        // more unified pairs are not caught pairwise.
        for comp in merged_cycle_components(m, &self.h1, &self.h2) {
            let has_pair = comp.iter().enumerate().any(|(a, &i)| {
                comp[a + 1..]
                    .iter()
                    .any(|&j| explained.contains(&(i.min(j), i.max(j))))
            });
            if has_pair || comp.len() < 2 {
                continue;
            }
            let involved: Vec<Mapping> = comp.iter().map(|&i| ms[i].clone()).collect();
            let names: Vec<String> = involved
                .iter()
                .map(|x| format!("({}, {})", x.left, x.right))
                .collect();
            out.push(Violation {
                rule: RuleId::Cycle,
                severity,
                involved,
                explanation: format!(
                    "mappings {} together close a cycle in the merged class hierarchy",
                    names.join(", ")
                ),
                resolution: Resolution::None,
            });
        }
        out
    }

    fn redundant(&self, m: &MappingSet, severity: Severity) -> Vec<Violation> {
        let ms = m.mappings();
        let mut out = Vec::new();
        for (i, p) in ms.iter().enumerate() {
            for (j, q) in ms.iter().enumerate() {
                if i == j {
                    continue;
                }
                // p = (A, M), q = (B, N)
                let left_direct = self.h1.direct(&q.left, &p.left)
                    && self.h2.below(&q.right, &p.right)
                    && !self.h2.direct(&q.right, &p.right);
                let right_direct = self.h2.direct(&q.right, &p.right)
                    && self.h1.below(&q.left, &p.left)
                    && !self.h1.direct(&q.left, &p.left);
                if !(left_direct || right_direct) {
                    continue;
                }
                let (direct_side, indirect_side) = if left_direct {
                    ("left", "right")
                } else {
                    ("right", "left")
                };
                let involved = if i < j {
                    vec![p.clone(), q.clone()]
                } else {
                    vec![q.clone(), p.clone()]
                };
                out.push(Violation {
                    rule: RuleId::RedundantSubsumption,
                    severity,
                    involved,
                    explanation: format!(
                        "({}, {}) is a direct subclass of ({}, {}) on the {direct_side} but only an \
                         indirect one on the {indirect_side}; the merged hierarchy gets a redundant subsumption",
                        q.left, q.right, p.left, p.right
                    ),
                    resolution: Resolution::None,
                });
            }
        }
        out
    }
}

/// Strongly connected components of the merged inheritance digraph that
/// contain at least two unified pairs, as sorted mapping indices.
fn merged_cycle_components(
    m: &MappingSet,
    h1: &Hierarchy<'_>,
    h2: &Hierarchy<'_>,
) -> Vec<Vec<usize>> {
    #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
    enum Node<'s> {
        Left(&'s str),
        Right(&'s str),
    }
    // Union-find over side-tagged labels so non-injective sets still merge.
    let mut parent: BTreeMap<Node<'_>, Node<'_>> = BTreeMap::new();
    fn find<'s>(parent: &mut BTreeMap<Node<'s>, Node<'s>>, n: Node<'s>) -> Node<'s> {
        let p = parent.get(&n).cloned().unwrap_or_else(|| n.clone());
        if p == n {
            return n;
        }
        let root = find(parent, p);
        parent.insert(n, root.clone());
        root
    }
    for x in m.iter() {
        let a = find(&mut parent, Node::Left(&x.left));
        let b = find(&mut parent, Node::Right(&x.right));
        if a != b {
            let (keep, drop) = if a < b { (a, b) } else { (b, a) };
            parent.insert(drop, keep);
        }
    }
    let mut g: Digraph<Node<'_>> = Digraph::new();
    for (h, left) in [(h1, true), (h2, false)] {
        for r in h
            .ontology
            .relationships()
            .iter()
            .filter(|r| r.rel_type == RelationKind::Inheritance)
        {
            let tag = |s| if left { Node::Left(s) } else { Node::Right(s) };
            let a = find(&mut parent, tag(r.source.as_str()));
            let b = find(&mut parent, tag(r.target.as_str()));
            g.add_edge(a, b);
        }
    }
    let mut out = Vec::new();
    for comp in g.strongly_connected_components() {
        if comp.len() < 2 {
            continue;
        }
        let members: BTreeSet<Node<'_>> = comp.into_iter().collect();
        let idx: Vec<usize> = m
            .iter()
            .enumerate()
            .filter(|(_, x)| members.contains(&find(&mut parent, Node::Left(&x.left))))
            .map(|(i, _)| i)
            .collect();
        if idx.len() >= 2 {
            out.push(idx);
        }
    }
    out
}

fn multiple(m: &MappingSet, severity: Severity) -> Vec<Violation> {
    let ms = m.mappings();
    let mut out = Vec::new();
    for i in 0..ms.len() {
        for j in i + 1..ms.len() {
            let (p, q) = (&ms[i], &ms[j]);
            let shared = if p.left == q.left {
                format!("left concept {:?}", p.left)
            } else if p.right == q.right {
                format!("right concept {:?}", p.right)
            } else {
                continue;
            };
            out.push(Violation {
                rule: RuleId::MultipleCorrespondence,
                severity,
                involved: vec![p.clone(), q.clone()],
                explanation: format!("{shared} takes part in more than one mapping"),
                resolution: Resolution::None,
            });
        }
    }
    out
}

pub fn detect_cycles(m: &MappingSet, o1: &Ontology, o2: &Ontology) -> Vec<Violation> {
    Context::new(o1, o2).cycles(m, Severity::Reject)
}

pub fn detect_redundant_subsumption(
    m: &MappingSet,
    o1: &Ontology,
    o2: &Ontology,
) -> Vec<Violation> {
    Context::new(o1, o2).redundant(m, Severity::Warn)
}

pub fn detect_multiple_correspondences(m: &MappingSet) -> Vec<Violation> {
    multiple(m, Severity::Reject)
}

/// The member of `involved` to drop: lowest score, ties broken toward the
/// later left label, then the later right label.
fn victim(involved: &[Mapping]) -> &Mapping {
    involved
        .iter()
        .min_by(|a, b| {
            a.score
                .total_cmp(&b.score)
                .then_with(|| b.left.cmp(&a.left))
                .then_with(|| b.right.cmp(&a.right))
        })
        .expect("violations involve at least one mapping")
}

/// Applies `Reject` rules until none fires, dropping one mapping per firing,
/// then reports `Warn` rules on the surviving set.
pub fn validate(
    m: &MappingSet,
    o1: &Ontology,
    o2: &Ontology,
    rules: &RuleSet,
) -> ValidatedMappings {
    let ctx = Context::new(o1, o2);
    let detect = |set: &MappingSet, rule: ValidationRule| -> Vec<Violation> {
        match rule.id {
            RuleId::Cycle => ctx.cycles(set, rule.severity),
            RuleId::RedundantSubsumption => ctx.redundant(set, rule.severity),
            RuleId::MultipleCorrespondence => multiple(set, rule.severity),
        }
    };

    let mut current = m.clone();
    let mut violations = Vec::new();
    loop {
        let mut found: Vec<Violation> = rules
            .rules()
            .iter()
            .filter(|r| r.severity == Severity::Reject)
            .flat_map(|&r| detect(&current, r))
            .collect();
        if found.is_empty() {
            break;
        }
        let order = |v: &Violation| -> (RuleId, Vec<usize>) {
            (
                v.rule,
                v.involved
                    .iter()
                    .filter_map(|x| current.position(&x.left, &x.right))
                    .collect(),
            )
        };
        found.sort_by_key(|v| order(v));
        let mut first = found.swap_remove(0);
        let drop = victim(&first.involved).clone();
        current = current.without(&drop.left, &drop.right);
        first.resolution = Resolution::DroppedMapping(drop);
        violations.push(first);
    }
    for &r in rules
        .rules()
        .iter()
        .filter(|r| r.severity == Severity::Warn)
    {
        violations.extend(detect(&current, r));
    }
    ValidatedMappings {
        accepted: current,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::RelationKind::*;

    fn set(ms: &[(&str, &str, f64)]) -> MappingSet {
        MappingSet::new(
            "l",
            "r",
            ms.iter().map(|&(a, b, s)| Mapping::new(a, b, s)).collect(),
        )
    }

    #[test]
    fn subsumption() {
        let o = Ontology::from_parts(
            "o",
            &["A", "B", "C", "D", "E"],
            &[
                ("B", "A", Inheritance),
                ("C", "B", Inheritance),
                ("D", "A", Inheritance),
                ("E", "A", Composition),
            ],
        )
        .unwrap();
        assert!(subsumes(&o, "B", "A").unwrap());
        assert!(!subsumes(&o, "A", "B").unwrap());
        assert!(subsumes(&o, "C", "A").unwrap());
        assert!(!subsumes(&o, "B", "D").unwrap());
        assert!(!subsumes(&o, "D", "B").unwrap());
        assert!(!subsumes(&o, "A", "A").unwrap());
        assert!(!subsumes(&o, "E", "A").unwrap());
        assert_eq!(
            subsumes(&o, "Z", "A"),
            Err(ValidationError::UnknownConcept("Z".into()))
        );
    }

    fn inverted_pair() -> (Ontology, Ontology) {
        let o1 = Ontology::from_parts("l", &["A", "B"], &[("A", "B", Inheritance)]).unwrap();
        let o2 = Ontology::from_parts("r", &["M", "O"], &[("O", "M", Inheritance)]).unwrap();
        (o1, o2)
    }

    #[test]
    fn cycle_instance() {
        let (o1, o2) = inverted_pair();
        let m = set(&[("A", "M", 0.9), ("B", "O", 0.85)]);
        let v = detect_cycles(&m, &o1, &o2);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, RuleId::Cycle);
        assert_eq!(v[0].involved.len(), 2);

        let out = validate(&m, &o1, &o2, &RuleSet::default());
        assert_eq!(out.accepted.len(), 1);
        assert!(out.accepted.contains("A", "M"));
        assert_eq!(out.violations.len(), 1);
        assert_eq!(
            out.violations[0].resolution,
            Resolution::DroppedMapping(Mapping::new("B", "O", 0.85))
        );
    }

    #[test]
    fn tie_drops_later_left_label() {
        let (o1, o2) = inverted_pair();
        let m = set(&[("A", "M", 0.9), ("B", "O", 0.9)]);
        let out = validate(&m, &o1, &o2, &RuleSet::default());
        assert!(out.accepted.contains("A", "M"));
    }

    #[test]
    fn no_inheritance_no_violations() {
        let o1 = Ontology::from_parts("l", &["A", "B"], &[("A", "B", Composition)]).unwrap();
        let o2 = Ontology::from_parts("r", &["M", "O"], &[("O", "M", Composition)]).unwrap();
        let m = set(&[("A", "M", 0.9), ("B", "O", 0.85)]);
        assert!(detect_cycles(&m, &o1, &o2).is_empty());
        assert!(detect_redundant_subsumption(&m, &o1, &o2).is_empty());
    }

    #[test]
    fn redundant_subsumption_instance() {
        let o1 = Ontology::from_parts("l", &["A", "B"], &[("B", "A", Inheritance)]).unwrap();
        let o2 = Ontology::from_parts(
            "r",
            &["M", "N", "X"],
            &[("N", "X", Inheritance), ("X", "M", Inheritance)],
        )
        .unwrap();
        let m = set(&[("A", "M", 0.9), ("B", "N", 0.9)]);
        let v = detect_redundant_subsumption(&m, &o1, &o2);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, RuleId::RedundantSubsumption);
        assert_eq!(v[0].severity, Severity::Warn);

        let lenient = validate(&m, &o1, &o2, &RuleSet::default());
        assert_eq!(lenient.accepted.len(), 2);
        assert_eq!(lenient.violations.len(), 1);
        assert_eq!(lenient.violations[0].resolution, Resolution::None);

        let strict = validate(&m, &o1, &o2, &RuleSet::strict());
        assert_eq!(strict.accepted.len(), 1);

        // mirrored: direct on the right, indirect on the left
        let v = detect_redundant_subsumption(
            &MappingSet::new(
                "r",
                "l",
                vec![Mapping::new("M", "A", 0.9), Mapping::new("N", "B", 0.9)],
            ),
            &o2,
            &o1,
        );
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn both_direct_is_fine() {
        let o1 = Ontology::from_parts("l", &["A", "B"], &[("B", "A", Inheritance)]).unwrap();
        let o2 = Ontology::from_parts("r", &["M", "N"], &[("N", "M", Inheritance)]).unwrap();
        let m = set(&[("A", "M", 0.9), ("B", "N", 0.9)]);
        assert!(detect_redundant_subsumption(&m, &o1, &o2).is_empty());
        assert!(detect_cycles(&m, &o1, &o2).is_empty());
    }

    #[test]
    fn alternating_four_cycle() {
        // a1<a2, a3<a4 on the left; b2<b3, b4<b1 on the right
        let o1 = Ontology::from_parts(
            "l",
            &["a1", "a2", "a3", "a4"],
            &[("a1", "a2", Inheritance), ("a3", "a4", Inheritance)],
        )
        .unwrap();
        let o2 = Ontology::from_parts(
            "r",
            &["b1", "b2", "b3", "b4"],
            &[("b2", "b3", Inheritance), ("b4", "b1", Inheritance)],
        )
        .unwrap();
        let m = set(&[
            ("a1", "b1", 0.9),
            ("a2", "b2", 0.8),
            ("a3", "b3", 0.95),
            ("a4", "b4", 0.99),
        ]);
        let v = detect_cycles(&m, &o1, &o2);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].involved.len(), 4);
        let out = validate(&m, &o1, &o2, &RuleSet::default());
        assert_eq!(out.accepted.len(), 3);
        assert!(!out.accepted.contains("a2", "b2"));
    }

    #[test]
    fn multiple_correspondence_repair() {
        let o1 = Ontology::from_parts("l", &["a", "b"], &[]).unwrap();
        let o2 = Ontology::from_parts("r", &["x", "y"], &[]).unwrap();
        let m = set(&[("a", "x", 0.9), ("a", "y", 0.95), ("b", "y", 0.85)]);
        assert!(!m.is_injective());
        let out = validate(&m, &o1, &o2, &RuleSet::default());
        assert!(out.accepted.is_injective());
        assert_eq!(out.accepted.len(), 1);
        assert!(out.accepted.contains("a", "y"));
        assert_eq!(out.dropped().count(), 2);
    }

    #[test]
    fn empty_and_idempotent() {
        let (o1, o2) = inverted_pair();
        let out = validate(&MappingSet::empty("l", "r"), &o1, &o2, &RuleSet::default());
        assert!(out.accepted.is_empty() && out.violations.is_empty());
        let m = set(&[("A", "M", 0.9), ("B", "O", 0.85)]);
        let once = validate(&m, &o1, &o2, &RuleSet::default());
        let twice = validate(&once.accepted, &o1, &o2, &RuleSet::default());
        assert_eq!(twice.accepted, once.accepted);
        assert!(twice.violations.is_empty());
    }

    #[test]
    fn rule_set_rejects_duplicates() {
        let r = RuleSet::new(vec![
            ValidationRule {
                id: RuleId::Cycle,
                severity: Severity::Reject,
            },
            ValidationRule {
                id: RuleId::Cycle,
                severity: Severity::Warn,
            },
        ]);
        assert_eq!(r, Err(ValidationError::DuplicateRule(RuleId::Cycle)));
        assert_eq!(
            RuleSet::strict().severity(RuleId::RedundantSubsumption),
            Some(Severity::Reject)
        );
        assert_eq!(
            RuleSet::default()
                .without(RuleId::Cycle)
                .severity(RuleId::Cycle),
            None
        );
    }
}
