//! Exhaustive reference for maximal isomorphic subgraph pairs.
//!
//! Every subset of the mapping set is tried; a subset yields a subgraph
//! pair when its correspondence is a bijection and its matched edges
//! connect it. This is exponential in the number of mappings and refuses to
//! run past a cap rather than returning partial results.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::exec::Exec;
use crate::matcher::{Mapping, MappingSet};
use crate::ontology::{ConceptRelationship, Ontology};
use crate::segment::{GraphMode, SubOntology, SubgraphPair};

pub const DEFAULT_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{size} mappings exceed the enumeration cap of {cap}")]
    CapExceeded { size: usize, cap: usize },
}

/// Isomorphic subgraph pairs ordered by componentwise inclusion.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IsoPairSet {
    pub pairs: BTreeSet<SubgraphPair>,
}

impl IsoPairSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn matched_edges(
    members: &[&Mapping],
    o1: &Ontology,
    o2: &Ontology,
    mode: GraphMode,
) -> (BTreeSet<ConceptRelationship>, BTreeSet<ConceptRelationship>) {
    let mut left = BTreeSet::new();
    let mut right = BTreeSet::new();
    for p in members {
        for q in members {
            for e in o1.relationships() {
                if e.source != p.left || e.target != q.left {
                    continue;
                }
                match mode {
                    GraphMode::Typed => {
                        if let Some(f) = o2.relationships().iter().find(|f| {
                            f.source == p.right && f.target == q.right && f.rel_type == e.rel_type
                        }) {
                            left.insert(e.clone());
                            right.insert(f.clone());
                        }
                    }
                    GraphMode::Plain => {
                        let partners: Vec<&ConceptRelationship> = o2
                            .relationships()
                            .iter()
                            .filter(|f| f.joins(&p.right, &q.right))
                            .collect();
                        if !partners.is_empty() {
                            left.insert(e.clone());
                            right.extend(partners.into_iter().cloned());
                        }
                    }
                }
            }
        }
    }
    (left, right)
}

fn connected(n: usize, links: &[(usize, usize)]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for &(a, b) in links {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        parent[ra] = rb;
    }
    let r0 = root(&mut parent, 0);
    (1..n).all(|i| root(&mut parent, i) == r0)
}

fn pair_of_subset(
    bits: u64,
    ms: &[Mapping],
    o1: &Ontology,
    o2: &Ontology,
    mode: GraphMode,
) -> Option<SubgraphPair> {
    let members: Vec<&Mapping> = (0..ms.len())
        .filter(|i| bits >> i & 1 == 1)
        .map(|i| &ms[i])
        .collect();
    let correspondence: BTreeMap<String, String> = members
        .iter()
        .map(|m| (m.left.clone(), m.right.clone()))
        .collect();
    let image: BTreeSet<&String> = correspondence.values().collect();
    if correspondence.len() != members.len() || image.len() != members.len() {
        return None;
    }
    let (left_edges, right_edges) = matched_edges(&members, o1, o2, mode);

    let pos: BTreeMap<&str, usize> = members
        .iter()
        .enumerate()
        .map(|(i, m)| (m.left.as_str(), i))
        .collect();
    let links: Vec<(usize, usize)> = left_edges
        .iter()
        .filter(|e| e.source != e.target)
        .map(|e| (pos[e.source.as_str()], pos[e.target.as_str()]))
        .collect();
    if !connected(members.len(), &links) {
        return None;
    }
    let pair = SubgraphPair {
        left: SubOntology {
            concepts: correspondence.keys().cloned().collect(),
            edges: left_edges,
        },
        right: SubOntology {
            concepts: correspondence.values().cloned().collect(),
            edges: right_edges,
        },
        correspondence,
    };
    pair.is_isomorphic(mode).then_some(pair)
}

/// All connected isomorphic subgraph pairs compatible with `m`, including
/// the empty pair.
pub fn enumerate_iso_pairs(
    o1: &Ontology,
    o2: &Ontology,
    m: &MappingSet,
) -> Result<IsoPairSet, OracleError> {
    enumerate_iso_pairs_with(o1, o2, m, GraphMode::Typed, DEFAULT_CAP, Exec::default())
}

pub fn enumerate_iso_pairs_with(
    o1: &Ontology,
    o2: &Ontology,
    m: &MappingSet,
    mode: GraphMode,
    cap: usize,
    exec: Exec,
) -> Result<IsoPairSet, OracleError> {
    let size = m.len();
    if size > cap || size >= 64 {
        return Err(OracleError::CapExceeded { size, cap });
    }
    let ms = m.mappings();
    let found = exec.filter_map_range(1u64 << size, |bits| pair_of_subset(bits, ms, o1, o2, mode));
    Ok(IsoPairSet {
        pairs: found.into_iter().collect(),
    })
}

/// Pairs with no strict superset in `s`.
pub fn maximal_elements(s: &IsoPairSet) -> Vec<SubgraphPair> {
    s.pairs
        .iter()
        .filter(|p| !s.pairs.iter().any(|q| q != *p && p.is_included_in(q)))
        .cloned()
        .collect()
}

/// Maximal elements of the enumeration, without the degenerate empty pair
/// (which is maximal only when the mapping set is empty).
pub fn max_iso_pairs(
    o1: &Ontology,
    o2: &Ontology,
    m: &MappingSet,
    mode: GraphMode,
    cap: usize,
    exec: Exec,
) -> Result<BTreeSet<SubgraphPair>, OracleError> {
    let all = enumerate_iso_pairs_with(o1, o2, m, mode, cap, exec)?;
    Ok(maximal_elements(&all)
        .into_iter()
        .filter(|p| !p.is_empty())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::RelationKind::*;

    fn single(l: &str, r: &str) -> SubgraphPair {
        SubgraphPair {
            left: SubOntology {
                concepts: [l.to_string()].into(),
                edges: BTreeSet::new(),
            },
            right: SubOntology {
                concepts: [r.to_string()].into(),
                edges: BTreeSet::new(),
            },
            correspondence: [(l.to_string(), r.to_string())].into(),
        }
    }

    #[test]
    fn empty_and_single() {
        let o1 = Ontology::from_parts("l", &["a"], &[]).unwrap();
        let o2 = Ontology::from_parts("r", &["x"], &[]).unwrap();
        let none = enumerate_iso_pairs(&o1, &o2, &MappingSet::empty("l", "r")).unwrap();
        assert_eq!(none.pairs, [SubgraphPair::default()].into());
        assert_eq!(maximal_elements(&none), vec![SubgraphPair::default()]);

        let one = MappingSet::new("l", "r", vec![Mapping::new("a", "x", 1.0)]);
        let s = enumerate_iso_pairs(&o1, &o2, &one).unwrap();
        assert_eq!(s.pairs, [SubgraphPair::default(), single("a", "x")].into());
        assert_eq!(maximal_elements(&s), vec![single("a", "x")]);
    }

    #[test]
    fn chain_and_antichain() {
        let small = single("a", "x");
        let mut big = single("a", "x");
        big.left.concepts.insert("b".into());
        big.right.concepts.insert("y".into());
        big.correspondence.insert("b".into(), "y".into());
        let s = IsoPairSet {
            pairs: [small.clone(), big.clone()].into(),
        };
        assert_eq!(maximal_elements(&s), vec![big]);
        let anti = IsoPairSet {
            pairs: [single("a", "x"), single("b", "y"), single("c", "z")].into(),
        };
        assert_eq!(maximal_elements(&anti).len(), 3);
    }

    #[test]
    fn connected_subsets_only() {
        let o1 = Ontology::from_parts("l", &["a", "b", "c"], &[("a", "b", Composition)]).unwrap();
        let o2 = Ontology::from_parts("r", &["x", "y", "z"], &[("x", "y", Composition)]).unwrap();
        let m = MappingSet::new(
            "l",
            "r",
            vec![
                Mapping::new("a", "x", 1.0),
                Mapping::new("b", "y", 1.0),
                Mapping::new("c", "z", 1.0),
            ],
        );
        let s = enumerate_iso_pairs(&o1, &o2, &m).unwrap();
        // empty, three singletons, {a,b}
        assert_eq!(s.len(), 5);
        let max = max_iso_pairs(
            &o1,
            &o2,
            &m,
            GraphMode::Typed,
            DEFAULT_CAP,
            Exec::Sequential,
        )
        .unwrap();
        assert_eq!(max.len(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let labels: Vec<String> = (0..5).map(|i| format!("c{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let o = Ontology::from_parts("o", &refs, &[]).unwrap();
        let m = MappingSet::new(
            "o",
            "o",
            refs.iter().map(|l| Mapping::new(*l, *l, 1.0)).collect(),
        );
        assert_eq!(
            enumerate_iso_pairs_with(&o, &o, &m, GraphMode::Typed, 4, Exec::Sequential)
                .unwrap_err(),
            OracleError::CapExceeded { size: 5, cap: 4 }
        );
    }
}
