//! Class diagrams viewed as ontologies: concepts, typed relationships and
//! the set of relationship types.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Attribute, ClassDiagram, RelationKind};
use crate::exec::Exec;

/// Relationship types share the UML relation kinds.
pub type RelationType = RelationKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub label: String,
    pub attributes: Vec<Attribute>,
    /// Carried over from UML operations.
    pub properties: Vec<String>,
}

impl Concept {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            attributes: Vec::new(),
            properties: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConceptRelationship {
    pub source: String,
    pub target: String,
    pub rel_type: RelationType,
}

impl ConceptRelationship {
    pub fn new(
        source: impl Into<String>,
        target: impl Into<String>,
        rel_type: RelationType,
    ) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            rel_type,
        }
    }

    /// True if this edge joins `a` and `b` in either orientation.
    pub fn joins(&self, a: &str, b: &str) -> bool {
        (self.source == a && self.target == b) || (self.source == b && self.target == a)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OntologyError {
    #[error("duplicate concept label {0:?}")]
    DuplicateConcept(String),
    #[error("concept label must not be empty")]
    EmptyLabel,
    #[error("relationship references unknown concept {0:?}")]
    UnknownConcept(String),
    #[error("duplicate relationship {0:?}")]
    DuplicateRelationship(ConceptRelationship),
    #[error("duplicate diagram name {0:?}")]
    DuplicateDiagram(String),
}

/// An ontology `(C, R, T)`: a typed directed graph over concept labels.
///
/// `T` is always the full relation-type enumeration; [`Ontology::used_types`]
/// gives the types that actually occur in `R`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    id: String,
    concepts: Vec<Concept>,
    relationships: Vec<ConceptRelationship>,
    index: HashMap<String, usize>,
    edge_set: HashSet<ConceptRelationship>,
}

impl Ontology {
    pub fn new(
        id: impl Into<String>,
        concepts: Vec<Concept>,
        relationships: Vec<ConceptRelationship>,
    ) -> Result<Self, OntologyError> {
        let mut index = HashMap::with_capacity(concepts.len());
        for (i, c) in concepts.iter().enumerate() {
            if c.label.is_empty() {
                return Err(OntologyError::EmptyLabel);
            }
            if index.insert(c.label.clone(), i).is_some() {
                return Err(OntologyError::DuplicateConcept(c.label.clone()));
            }
        }
        let mut edge_set = HashSet::with_capacity(relationships.len());
        for r in &relationships {
            for end in [&r.source, &r.target] {
                if !index.contains_key(end) {
                    return Err(OntologyError::UnknownConcept(end.clone()));
                }
            }
            if !edge_set.insert(r.clone()) {
                return Err(OntologyError::DuplicateRelationship(r.clone()));
            }
        }
        Ok(Self {
            id: id.into(),
            concepts,
            relationships,
            index,
            edge_set,
        })
    }

    /// Convenience constructor from bare labels and `(source, target, type)`
    /// triples.
    pub fn from_parts(
        id: impl Into<String>,
        labels: &[&str],
        edges: &[(&str, &str, RelationType)],
    ) -> Result<Self, OntologyError> {
        Self::new(
            id,
            labels.iter().map(|l| Concept::new(*l)).collect(),
            edges
                .iter()
                .map(|&(s, t, k)| ConceptRelationship::new(s, t, k))
                .collect(),
        )
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn relationships(&self) -> &[ConceptRelationship] {
        &self.relationships
    }

    pub fn types(&self) -> &'static [RelationType] {
        &RelationKind::ALL
    }

    pub fn used_types(&self) -> BTreeSet<RelationType> {
        self.relationships.iter().map(|r| r.rel_type).collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    pub fn concept(&self, label: &str) -> Option<&Concept> {
        self.index.get(label).map(|&i| &self.concepts[i])
    }

    pub fn has_edge(&self, source: &str, target: &str, rel_type: RelationType) -> bool {
        // Avoids allocating a key for labels that are not concepts at all.
        self.contains(source)
            && self.contains(target)
            && self
                .edge_set
                .contains(&ConceptRelationship::new(source, target, rel_type))
    }

    /// Edges joining `a` and `b` in either orientation.
    pub fn edges_between<'a>(
        &'a self,
        a: &'a str,
        b: &'a str,
    ) -> impl Iterator<Item = &'a ConceptRelationship> {
        self.relationships.iter().filter(move |r| r.joins(a, b))
    }

    pub fn adjacent(&self, a: &str, b: &str) -> bool {
        RelationKind::ALL
            .iter()
            .any(|&t| self.has_edge(a, b, t) || self.has_edge(b, a, t))
    }
}

/// One concept per class and one relationship per UML relationship, with
/// orientation and type kept.
pub fn transform_diagram(d: &ClassDiagram) -> Ontology {
    let concepts = d
        .classes()
        .iter()
        .map(|c| Concept {
            label: c.name.clone(),
            attributes: c.attributes.clone(),
            properties: c.operations.clone(),
        })
        .collect();
    let relationships = d
        .relationships()
        .iter()
        .map(|r| ConceptRelationship::new(r.source.clone(), r.target.clone(), r.kind))
        .collect();
    Ontology::new(d.name(), concepts, relationships)
        .expect("a valid class diagram always yields a valid ontology")
}

/// Transforms every diagram; results are ordered by diagram name.
pub fn transform_all(ds: &[ClassDiagram]) -> Result<Vec<Ontology>, OntologyError> {
    transform_all_with(ds, Exec::default())
}

pub fn transform_all_with(ds: &[ClassDiagram], exec: Exec) -> Result<Vec<Ontology>, OntologyError> {
    let mut names = HashSet::new();
    for d in ds {
        if !names.insert(d.name()) {
            return Err(OntologyError::DuplicateDiagram(d.name().to_string()));
        }
    }
    let mut out = exec.map(ds, transform_diagram);
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_diagram;

    #[test]
    fn single_inheritance() {
        let d =
            parse_diagram("diagram \"T\"\nclass \"A\"\nclass \"B\"\ninherit \"B\" \"A\"").unwrap();
        let o = transform_diagram(&d);
        assert_eq!(
            o.relationships(),
            &[ConceptRelationship::new(
                "B",
                "A",
                RelationKind::Inheritance
            )]
        );
        assert_eq!(o.concepts().len(), 2);
        assert!(o.has_edge("B", "A", RelationKind::Inheritance));
        assert!(!o.has_edge("A", "B", RelationKind::Inheritance));
        assert!(o.adjacent("A", "B"));
    }

    #[test]
    fn empty_diagram() {
        let o = transform_diagram(&ClassDiagram::empty("E"));
        assert!(o.concepts().is_empty());
        assert!(o.relationships().is_empty());
        assert_eq!(o.types().len(), 4);
        assert!(o.used_types().is_empty());
    }

    #[test]
    fn transform_all_orders_and_rejects_duplicates() {
        let a = ClassDiagram::empty("b");
        let b = ClassDiagram::empty("a");
        let out = transform_all(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(out.iter().map(Ontology::id).collect::<Vec<_>>(), ["a", "b"]);
        assert!(transform_all(&[]).unwrap().is_empty());
        assert_eq!(
            transform_all(&[a.clone(), a]).unwrap_err(),
            OntologyError::DuplicateDiagram("b".into())
        );
    }

    #[test]
    fn constructor_invariants() {
        assert!(matches!(
            Ontology::from_parts("o", &["A"], &[("A", "B", RelationKind::Association)]),
            Err(OntologyError::UnknownConcept(_))
        ));
        assert!(matches!(
            Ontology::from_parts("o", &["A", "A"], &[]),
            Err(OntologyError::DuplicateConcept(_))
        ));
    }
}
