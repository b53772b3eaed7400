//! Segments, mapping segments and the bonding-by-segment relation.
//!
//! A segment is a walk in one ontology: consecutive concepts are joined by
//! an edge in either orientation. A mapping segment is a walk through the
//! mapping set whose left and right projections are isomorphic segments.
//! Two mappings are bonded when some mapping segment has them as its ends.
//!
//! Because segments may revisit concepts, bonding is connectivity in the
//! mapping-adjacency graph, so the equivalence class function is computed
//! as breadth-first layers `A0 = {seed}`, `An = adj(An-1) \ (A0 ∪ … ∪ An-1)`.
//! The number of non-empty layers is the rank of the seed.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matcher::{Mapping, MappingSet};
use crate::ontology::{ConceptRelationship, Ontology};

/// How edges are compared when testing adjacency and isomorphism.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum GraphMode {
    /// Same relation type and same orientation on both sides.
    #[default]
    Typed,
    /// Type-blind and orientation-blind (simple undirected graphs).
    Plain,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SegmentError {
    #[error("unknown concept {0:?}")]
    UnknownConcept(String),
    #[error("mapping ({0:?}, {1:?}) is not in the mapping set")]
    NotInMappingSet(String, String),
    #[error("concepts {0:?} and {1:?} are not adjacent")]
    NotAdjacent(String, String),
    #[error("mappings ({0:?}, {1:?}) and ({2:?}, {3:?}) are not adjacent")]
    MappingsNotAdjacent(String, String, String, String),
    #[error("a segment needs at least one element")]
    Empty,
}

/// A walk in one ontology with the edge realizing each step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    concepts: Vec<String>,
    edges: Vec<ConceptRelationship>,
}

impl Segment {
    pub fn new<S: AsRef<str>>(concepts: &[S], o: &Ontology) -> Result<Self, SegmentError> {
        if concepts.is_empty() {
            return Err(SegmentError::Empty);
        }
        for c in concepts {
            if !o.contains(c.as_ref()) {
                return Err(SegmentError::UnknownConcept(c.as_ref().to_string()));
            }
        }
        let mut edges = Vec::with_capacity(concepts.len() - 1);
        for pair in concepts.windows(2) {
            let (a, b) = (pair[0].as_ref(), pair[1].as_ref());
            let edge = o
                .edges_between(a, b)
                .next()
                .ok_or_else(|| SegmentError::NotAdjacent(a.to_string(), b.to_string()))?;
            edges.push(edge.clone());
        }
        Ok(Self {
            concepts: concepts.iter().map(|c| c.as_ref().to_string()).collect(),
            edges,
        })
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn edges(&self) -> &[ConceptRelationship] {
        &self.edges
    }
}

/// True iff every consecutive pair of `seq` is adjacent in `o`.
/// A single concept is a segment; an empty sequence is not.
pub fn is_segment<S: AsRef<str>>(seq: &[S], o: &Ontology) -> Result<bool, SegmentError> {
    match Segment::new(seq, o) {
        Ok(_) => Ok(true),
        Err(SegmentError::NotAdjacent(..)) | Err(SegmentError::Empty) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Whether one step of a mapping walk from `(l1, r1)` to `(l2, r2)` is
/// realized by isomorphic edges on both sides.
fn step_matches(
    o1: &Ontology,
    o2: &Ontology,
    l1: &str,
    r1: &str,
    l2: &str,
    r2: &str,
    mode: GraphMode,
) -> bool {
    match mode {
        GraphMode::Typed => o1.edges_between(l1, l2).any(|e| {
            if e.source == l1 && e.target == l2 && o2.has_edge(r1, r2, e.rel_type) {
                return true;
            }
            e.source == l2 && e.target == l1 && o2.has_edge(r2, r1, e.rel_type)
        }),
        GraphMode::Plain => o1.adjacent(l1, l2) && o2.adjacent(r1, r2),
    }
}

/// Length-two mapping-segment test in typed mode.
pub fn mappings_adjacent(m1: &Mapping, m2: &Mapping, o1: &Ontology, o2: &Ontology) -> bool {
    mappings_adjacent_in(m1, m2, o1, o2, GraphMode::Typed)
}

pub fn mappings_adjacent_in(
    m1: &Mapping,
    m2: &Mapping,
    o1: &Ontology,
    o2: &Ontology,
    mode: GraphMode,
) -> bool {
    if m1.key() == m2.key() {
        return false;
    }
    step_matches(o1, o2, &m1.left, &m1.right, &m2.left, &m2.right, mode)
}

/// A walk through the mapping set whose projections are isomorphic segments.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingSegment {
    steps: Vec<Mapping>,
}

impl MappingSegment {
    pub fn new(
        steps: Vec<Mapping>,
        m: &MappingSet,
        o1: &Ontology,
        o2: &Ontology,
        mode: GraphMode,
    ) -> Result<Self, SegmentError> {
        if steps.is_empty() {
            return Err(SegmentError::Empty);
        }
        for s in &steps {
            if !m.contains(&s.left, &s.right) {
                return Err(SegmentError::NotInMappingSet(
                    s.left.clone(),
                    s.right.clone(),
                ));
            }
        }
        for pair in steps.windows(2) {
            if !mappings_adjacent_in(&pair[0], &pair[1], o1, o2, mode) {
                return Err(SegmentError::MappingsNotAdjacent(
                    pair[0].left.clone(),
                    pair[0].right.clone(),
                    pair[1].left.clone(),
                    pair[1].right.clone(),
                ));
            }
        }
        Ok(Self { steps })
    }

    pub fn steps(&self) -> &[Mapping] {
        &self.steps
    }

    pub fn ends(&self) -> (&Mapping, &Mapping) {
        (&self.steps[0], self.steps.last().expect("non-empty"))
    }

    pub fn left_segment(&self, o1: &Ontology) -> Segment {
        let labels: Vec<&str> = self.steps.iter().map(|s| s.left.as_str()).collect();
        Segment::new(&labels, o1).expect("validated at construction")
    }

    pub fn right_segment(&self, o2: &Ontology) -> Segment {
        let labels: Vec<&str> = self.steps.iter().map(|s| s.right.as_str()).collect();
        Segment::new(&labels, o2).expect("validated at construction")
    }
}

/// One bonding class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceClass {
    /// Sorted by (left, right).
    pub members: Vec<Mapping>,
    /// Rank of the representative.
    pub rank: usize,
}

impl EquivalenceClass {
    /// The member with the least (left, right) key.
    pub fn representative(&self) -> &Mapping {
        &self.members[0]
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, left: &str, right: &str) -> bool {
        self.members
            .iter()
            .any(|m| m.left == left && m.right == right)
    }

    pub fn keys(&self) -> BTreeSet<(String, String)> {
        self.members
            .iter()
            .map(|m| (m.left.clone(), m.right.clone()))
            .collect()
    }
}

/// The set of bonding classes of a mapping set, ordered by representative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPartition {
    pub classes: Vec<EquivalenceClass>,
}

impl ClassPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EquivalenceClass> {
        self.classes.iter()
    }

    pub fn class_of(&self, left: &str, right: &str) -> Option<&EquivalenceClass> {
        self.classes.iter().find(|c| c.contains(left, right))
    }

    /// Membership as a set of sets of (left, right) keys.
    pub fn key_sets(&self) -> BTreeSet<BTreeSet<(String, String)>> {
        self.classes.iter().map(EquivalenceClass::keys).collect()
    }

    /// Disjoint classes whose union is exactly `m`.
    pub fn is_partition_of(&self, m: &MappingSet) -> bool {
        let mut seen = BTreeSet::new();
        for c in &self.classes {
            if c.is_empty() {
                return false;
            }
            for k in c.keys() {
                if !seen.insert(k) {
                    return false;
                }
            }
        }
        let all: BTreeSet<(String, String)> = m
            .iter()
            .map(|x| (x.left.clone(), x.right.clone()))
            .collect();
        seen == all
    }
}

/// The layered expansion of one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    /// `layers[n]` is `An`; only non-empty layers are kept.
    pub layers: Vec<Vec<Mapping>>,
}

impl Expansion {
    /// Index of the first empty layer.
    pub fn rank(&self) -> usize {
        self.layers.len()
    }

    pub fn union(&self) -> Vec<Mapping> {
        let mut all: Vec<Mapping> = self.layers.iter().flatten().cloned().collect();
        all.sort_by(|a, b| a.key().cmp(&b.key()));
        all
    }
}

/// The mapping-adjacency graph of one mapping set over two ontologies.
#[derive(Debug, Clone)]
pub struct BondingGraph<'a> {
    mappings: &'a MappingSet,
    o1: &'a Ontology,
    o2: &'a Ontology,
    mode: GraphMode,
    adj: Vec<BTreeSet<usize>>,
}

impl<'a> BondingGraph<'a> {
    pub fn new(
        mappings: &'a MappingSet,
        o1: &'a Ontology,
        o2: &'a Ontology,
        mode: GraphMode,
    ) -> Self {
        let mut by_left: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, m) in mappings.iter().enumerate() {
            by_left.entry(m.left.as_str()).or_default().push(i);
        }
        let ms = mappings.mappings();
        let mut adj = vec![BTreeSet::new(); ms.len()];
        // Walk the left edges once; each edge between two mapped concepts is
        // checked against the right ontology.
        for e in o1.relationships() {
            let (Some(src), Some(tgt)) = (
                by_left.get(e.source.as_str()),
                by_left.get(e.target.as_str()),
            ) else {
                continue;
            };
            for &i in src {
                for &j in tgt {
                    if i == j {
                        continue;
                    }
                    let ok = match mode {
                        GraphMode::Typed => o2.has_edge(&ms[i].right, &ms[j].right, e.rel_type),
                        GraphMode::Plain => o2.adjacent(&ms[i].right, &ms[j].right),
                    };
                    if ok {
                        adj[i].insert(j);
                        adj[j].insert(i);
                    }
                }
            }
        }
        Self {
            mappings,
            o1,
            o2,
            mode,
            adj,
        }
    }

    pub fn mode(&self) -> GraphMode {
        self.mode
    }

    pub fn mapping_set(&self) -> &MappingSet {
        self.mappings
    }

    fn index_of(&self, m: &Mapping) -> Result<usize, SegmentError> {
        self.mappings
            .position(&m.left, &m.right)
            .ok_or_else(|| SegmentError::NotInMappingSet(m.left.clone(), m.right.clone()))
    }

    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i].iter().copied()
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(&j)
    }

    fn shortest_walk(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        let mut queue = VecDeque::from([from]);
        parent.insert(from, from);
        while let Some(v) = queue.pop_front() {
            if v == to {
                let mut path = vec![to];
                let mut cur = to;
                while cur != from {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for w in self.neighbours(v) {
                if let std::collections::btree_map::Entry::Vacant(slot) = parent.entry(w) {
                    slot.insert(v);
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// A mapping segment with ends `m1` and `m2`, if one exists.
    pub fn witness(
        &self,
        m1: &Mapping,
        m2: &Mapping,
    ) -> Result<Option<MappingSegment>, SegmentError> {
        let (i, j) = (self.index_of(m1)?, self.index_of(m2)?);
        let Some(path) = self.shortest_walk(i, j) else {
            return Ok(None);
        };
        let steps = path
            .into_iter()
            .map(|k| self.mappings.mappings()[k].clone())
            .collect();
        MappingSegment::new(steps, self.mappings, self.o1, self.o2, self.mode).map(Some)
    }

    pub fn bonded(&self, m1: &Mapping, m2: &Mapping) -> Result<bool, SegmentError> {
        let (i, j) = (self.index_of(m1)?, self.index_of(m2)?);
        Ok(self.shortest_walk(i, j).is_some())
    }

    /// Breadth-first layers from `seed`.
    pub fn expand(&self, seed: &Mapping) -> Result<Expansion, SegmentError> {
        let start = self.index_of(seed)?;
        let ms = self.mappings.mappings();
        let mut visited = vec![false; ms.len()];
        visited[start] = true;
        let mut frontier = vec![start];
        let mut layers = Vec::new();
        while !frontier.is_empty() {
            layers.push(frontier.iter().map(|&i| ms[i].clone()).collect());
            let mut next = BTreeSet::new();
            for &v in &frontier {
                for w in self.neighbours(v) {
                    if !visited[w] {
                        next.insert(w);
                    }
                }
            }
            for &w in &next {
                visited[w] = true;
            }
            frontier = next.into_iter().collect();
        }
        Ok(Expansion { layers })
    }

    /// The class of `seed` and the seed's rank.
    pub fn ecf(&self, seed: &Mapping) -> Result<(EquivalenceClass, usize), SegmentError> {
        let exp = self.expand(seed)?;
        let rank = exp.rank();
        let members = exp.union();
        let rep_rank = if members[0].key() == seed.key() {
            rank
        } else {
            self.expand(&members[0])?.rank()
        };
        Ok((
            EquivalenceClass {
                members,
                rank: rep_rank,
            },
            rank,
        ))
    }

    /// Repeated expansion over unvisited seeds in mapping-set order.
    pub fn classes(&self) -> ClassPartition {
        let ms = self.mappings.mappings();
        let mut assigned = vec![false; ms.len()];
        let mut classes = Vec::new();
        for (i, seed) in ms.iter().enumerate() {
            if assigned[i] {
                continue;
            }
            let (class, _) = self.ecf(seed).expect("seed drawn from the set");
            for m in &class.members {
                let k = self
                    .mappings
                    .position(&m.left, &m.right)
                    .expect("member of set");
                assigned[k] = true;
            }
            classes.push(class);
        }
        classes.sort_by(|a, b| a.representative().key().cmp(&b.representative().key()));
        ClassPartition { classes }
    }
}

pub fn bonded_by_segment(
    m1: &Mapping,
    m2: &Mapping,
    m: &MappingSet,
    o1: &Ontology,
    o2: &Ontology,
) -> Result<bool, SegmentError> {
    BondingGraph::new(m, o1, o2, GraphMode::Typed).bonded(m1, m2)
}

pub fn ecf(
    seed: &Mapping,
    m: &MappingSet,
    o1: &Ontology,
    o2: &Ontology,
) -> Result<(EquivalenceClass, usize), SegmentError> {
    BondingGraph::new(m, o1, o2, GraphMode::Typed).ecf(seed)
}

pub fn equivalence_classes(m: &MappingSet, o1: &Ontology, o2: &Ontology) -> ClassPartition {
    equivalence_classes_in(m, o1, o2, GraphMode::Typed)
}

pub fn equivalence_classes_in(
    m: &MappingSet,
    o1: &Ontology,
    o2: &Ontology,
    mode: GraphMode,
) -> ClassPartition {
    BondingGraph::new(m, o1, o2, mode).classes()
}

/// A subgraph of one ontology: a concept set and an edge set over it.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubOntology {
    pub concepts: BTreeSet<String>,
    pub edges: BTreeSet<ConceptRelationship>,
}

impl SubOntology {
    pub fn is_subgraph_of(&self, other: &SubOntology) -> bool {
        self.concepts.is_subset(&other.concepts) && self.edges.is_subset(&other.edges)
    }
}

/// Two isomorphic subgraphs and the vertex bijection between them.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubgraphPair {
    pub left: SubOntology,
    pub right: SubOntology,
    /// left concept -> right concept
    pub correspondence: BTreeMap<String, String>,
}

impl SubgraphPair {
    pub fn is_empty(&self) -> bool {
        self.left.concepts.is_empty() && self.right.concepts.is_empty()
    }

    /// Componentwise inclusion.
    pub fn is_included_in(&self, other: &SubgraphPair) -> bool {
        self.left.is_subgraph_of(&other.left) && self.right.is_subgraph_of(&other.right)
    }

    /// Checks that the correspondence is a bijection between the concept
    /// sets that carries edges onto edges in both directions.
    pub fn is_isomorphic(&self, mode: GraphMode) -> bool {
        let image: BTreeSet<&String> = self.correspondence.values().collect();
        let domain: BTreeSet<&String> = self.correspondence.keys().collect();
        if image.len() != self.correspondence.len()
            || domain != self.left.concepts.iter().collect()
            || image != self.right.concepts.iter().collect()
        {
            return false;
        }
        let inverse: BTreeMap<&String, &String> =
            self.correspondence.iter().map(|(a, b)| (b, a)).collect();
        match mode {
            GraphMode::Typed => {
                let forward: BTreeSet<ConceptRelationship> = self
                    .left
                    .edges
                    .iter()
                    .map(|e| {
                        ConceptRelationship::new(
                            self.correspondence[&e.source].clone(),
                            self.correspondence[&e.target].clone(),
                            e.rel_type,
                        )
                    })
                    .collect();
                let endpoints_ok =
                    self.right.edges.iter().all(|e| {
                        inverse.contains_key(&e.source) && inverse.contains_key(&e.target)
                    });
                endpoints_ok && forward == self.right.edges
            }
            GraphMode::Plain => {
                let undirected =
                    |edges: &BTreeSet<ConceptRelationship>,
                     f: &dyn Fn(&String) -> Option<String>| {
                        edges
                            .iter()
                            .map(|e| {
                                let (a, b) = (f(&e.source), f(&e.target));
                                if a <= b {
                                    (a, b)
                                } else {
                                    (b, a)
                                }
                            })
                            .collect::<BTreeSet<_>>()
                    };
                let l = undirected(&self.left.edges, &|s| self.correspondence.get(s).cloned());
                let r = undirected(&self.right.edges, &|s| {
                    Some(s.clone()).filter(|s| inverse.contains_key(s))
                });
                !l.iter().any(|(a, b)| a.is_none() || b.is_none()) && l == r
            }
        }
    }
}

/// Builds the subgraph pair of one set of mappings: its projections with
/// exactly the matched edge pairs.
pub fn subgraph_pair_of<'m>(
    members: impl IntoIterator<Item = &'m Mapping>,
    o1: &Ontology,
    o2: &Ontology,
    mode: GraphMode,
) -> SubgraphPair {
    let correspondence: BTreeMap<String, String> = members
        .into_iter()
        .map(|m| (m.left.clone(), m.right.clone()))
        .collect();
    let inverse: BTreeMap<&str, &str> = correspondence
        .iter()
        .map(|(a, b)| (b.as_str(), a.as_str()))
        .collect();
    let mut left = SubOntology {
        concepts: correspondence.keys().cloned().collect(),
        edges: BTreeSet::new(),
    };
    let mut right = SubOntology {
        concepts: correspondence.values().cloned().collect(),
        edges: BTreeSet::new(),
    };
    for e in o1.relationships() {
        let (Some(s), Some(t)) = (correspondence.get(&e.source), correspondence.get(&e.target))
        else {
            continue;
        };
        match mode {
            GraphMode::Typed => {
                if o2.has_edge(s, t, e.rel_type) {
                    left.edges.insert(e.clone());
                    right
                        .edges
                        .insert(ConceptRelationship::new(s.clone(), t.clone(), e.rel_type));
                }
            }
            GraphMode::Plain => {
                if o2.adjacent(s, t) {
                    left.edges.insert(e.clone());
                }
            }
        }
    }
    if mode == GraphMode::Plain {
        for e in o2.relationships() {
            let (Some(s), Some(t)) = (
                inverse.get(e.source.as_str()),
                inverse.get(e.target.as_str()),
            ) else {
                continue;
            };
            if o1.adjacent(s, t) {
                right.edges.insert(e.clone());
            }
        }
    }
    SubgraphPair {
        left,
        right,
        correspondence,
    }
}

/// One maximal isomorphic subgraph pair per class, in class order.
pub fn to_max_subgraphs(p: &ClassPartition, o1: &Ontology, o2: &Ontology) -> Vec<SubgraphPair> {
    to_max_subgraphs_in(p, o1, o2, GraphMode::Typed)
}

pub fn to_max_subgraphs_in(
    p: &ClassPartition,
    o1: &Ontology,
    o2: &Ontology,
    mode: GraphMode,
) -> Vec<SubgraphPair> {
    p.iter()
        .map(|c| subgraph_pair_of(&c.members, o1, o2, mode))
        .collect()
}
