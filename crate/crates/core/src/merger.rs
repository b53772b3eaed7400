//! Integration of two class diagrams through a validated mapping set, and
//! the left fold that extends it to any number of diagrams.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{Attribute, ClassDiagram, DiagramError, UmlClass, UmlRelationship};
use crate::validator::ValidatedMappings;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum HomonymPolicy {
    /// Rename to `<diagram>.<label>`.
    #[default]
    QualifyWithDiagramName,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SynonymPolicy {
    #[default]
    KeepLeftLabel,
    KeepRightLabel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AttributeMerge {
    /// Union by attribute name; the left type wins on a clash.
    #[default]
    UnionByName,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConflictCatalog {
    pub homonym_policy: HomonymPolicy,
    pub synonym_policy: SynonymPolicy,
    pub attribute_merge: AttributeMerge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Origin {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ActionKind {
    UnifiedSynonyms,
    RenamedHomonym,
    CopiedUnmapped,
    /// Attribute declared with different types on the two sides.
    AttributeTypeClash,
    /// Two relationships of different kinds now join the same classes.
    RelationKindConflict,
}

impl ActionKind {
    /// Actions that flag something for a human to look at.
    pub fn is_warning(self) -> bool {
        matches!(
            self,
            ActionKind::AttributeTypeClash | ActionKind::RelationKindConflict
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolutionAction {
    pub kind: ActionKind,
    pub subjects: Vec<String>,
    pub result: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegratedModel {
    pub diagram: ClassDiagram,
    /// Origin of every output class, keyed by class name.
    pub provenance: BTreeMap<String, BTreeSet<Origin>>,
    pub actions: Vec<ResolutionAction>,
}

impl IntegratedModel {
    pub fn warnings(&self) -> impl Iterator<Item = &ResolutionAction> {
        self.actions.iter().filter(|a| a.kind.is_warning())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MergeError {
    #[error("mapping references unknown {side} class {label:?}")]
    UnknownClass { side: &'static str, label: String },
    #[error("mapping set is not injective at {0:?}")]
    NotInjective(String),
    #[error("expected {expected} mapping sets for {diagrams} diagrams, got {got}")]
    StepCount {
        expected: usize,
        diagrams: usize,
        got: usize,
    },
    #[error("nothing to integrate")]
    NoDiagrams,
    #[error(transparent)]
    Diagram(#[from] DiagramError),
}

fn merge_attributes(
    left: &UmlClass,
    right: &UmlClass,
    result: &str,
    actions: &mut Vec<ResolutionAction>,
) -> Vec<Attribute> {
    let mut out = left.attributes.clone();
    for attr in &right.attributes {
        match out.iter().find(|a| a.name == attr.name) {
            Some(existing) if existing.type_name != attr.type_name => {
                actions.push(ResolutionAction {
                    kind: ActionKind::AttributeTypeClash,
                    subjects: vec![left.name.clone(), right.name.clone()],
                    result: result.to_string(),
                    note: Some(format!(
                        "attribute {:?}: kept {:?} over {:?}",
                        attr.name, existing.type_name, attr.type_name
                    )),
                })
            }
            Some(_) => {}
            None => out.push(attr.clone()),
        }
    }
    out
}

fn union_ops(left: &[String], right: &[String]) -> Vec<String> {
    let mut out = left.to_vec();
    for op in right {
        if !out.contains(op) {
            out.push(op.clone());
        }
    }
    out
}

/// Merges `bc1` and `bc2`: mapped pairs become one class, unmapped classes
/// are copied, relationships are unioned through the renaming.
pub fn integrate(
    bc1: &ClassDiagram,
    bc2: &ClassDiagram,
    cov: &ValidatedMappings,
    cat: &ConflictCatalog,
) -> Result<IntegratedModel, MergeError> {
    let accepted = &cov.accepted;
    let mut right_of: HashMap<&str, &str> = HashMap::new();
    let mut left_of: HashMap<&str, &str> = HashMap::new();
    for m in accepted {
        if bc1.class(&m.left).is_none() {
            return Err(MergeError::UnknownClass {
                side: "left",
                label: m.left.clone(),
            });
        }
        if bc2.class(&m.right).is_none() {
            return Err(MergeError::UnknownClass {
                side: "right",
                label: m.right.clone(),
            });
        }
        if right_of.insert(&m.left, &m.right).is_some() {
            return Err(MergeError::NotInjective(m.left.clone()));
        }
        if left_of.insert(&m.right, &m.left).is_some() {
            return Err(MergeError::NotInjective(m.right.clone()));
        }
    }

    let mut actions = Vec::new();
    // (origin-side class name) -> output name
    let mut left_name: HashMap<&str, String> = HashMap::new();
    let mut right_name: HashMap<&str, String> = HashMap::new();
    let mut classes: Vec<UmlClass> = Vec::new();
    let mut provenance: BTreeMap<String, BTreeSet<Origin>> = BTreeMap::new();

    // Unified classes keep their labels; collect them first so homonym
    // detection sees every reserved name.
    let mut unified: Vec<(UmlClass, &UmlClass, &UmlClass)> = Vec::new();
    for lc in bc1.classes() {
        let Some(&r) = right_of.get(lc.name.as_str()) else {
            continue;
        };
        let rc = bc2.class(r).expect("checked above");
        let label = match cat.synonym_policy {
            SynonymPolicy::KeepLeftLabel => lc.name.clone(),
            SynonymPolicy::KeepRightLabel => rc.name.clone(),
        };
        let merged = UmlClass {
            name: label.clone(),
            attributes: merge_attributes(lc, rc, &label, &mut actions),
            operations: union_ops(&lc.operations, &rc.operations),
        };
        unified.push((merged, lc, rc));
    }
    let reserved: HashSet<String> = unified.iter().map(|(c, _, _)| c.name.clone()).collect();

    let unmapped_left: Vec<&UmlClass> = bc1
        .classes()
        .iter()
        .filter(|c| !right_of.contains_key(c.name.as_str()))
        .collect();
    let unmapped_right: Vec<&UmlClass> = bc2
        .classes()
        .iter()
        .filter(|c| !left_of.contains_key(c.name.as_str()))
        .collect();
    let mut label_count: HashMap<&str, usize> = HashMap::new();
    for c in unmapped_left.iter().chain(&unmapped_right) {
        *label_count.entry(c.name.as_str()).or_default() += 1;
    }

    let mut taken: HashSet<String> = reserved.clone();
    for c in unmapped_left.iter().chain(&unmapped_right) {
        if !(reserved.contains(&c.name) || label_count[c.name.as_str()] > 1) {
            taken.insert(c.name.clone());
        }
    }

    for (merged, lc, rc) in unified {
        actions.push(ResolutionAction {
            kind: ActionKind::UnifiedSynonyms,
            subjects: vec![lc.name.clone(), rc.name.clone()],
            result: merged.name.clone(),
            note: (lc.name != rc.name).then(|| {
                let alias = if merged.name == lc.name {
                    &rc.name
                } else {
                    &lc.name
                };
                format!("alias {alias:?}")
            }),
        });
        left_name.insert(&lc.name, merged.name.clone());
        right_name.insert(&rc.name, merged.name.clone());
        provenance.insert(merged.name.clone(), [Origin::Left, Origin::Right].into());
        classes.push(merged);
    }

    for (origin, diagram, list) in [
        (Origin::Left, bc1, &unmapped_left),
        (Origin::Right, bc2, &unmapped_right),
    ] {
        for c in list.iter() {
            let collides = reserved.contains(&c.name) || label_count[c.name.as_str()] > 1;
            let name = if collides {
                let base = match cat.homonym_policy {
                    HomonymPolicy::QualifyWithDiagramName => {
                        format!("{}.{}", diagram.name(), c.name)
                    }
                };
                let mut candidate = base.clone();
                let mut n = 2;
                while taken.contains(&candidate) {
                    candidate = format!("{base}#{n}");
                    n += 1;
                }
                taken.insert(candidate.clone());
                actions.push(ResolutionAction {
                    kind: ActionKind::RenamedHomonym,
                    subjects: vec![c.name.clone()],
                    result: candidate.clone(),
                    note: Some(format!("from {:?}", diagram.name())),
                });
                candidate
            } else {
                actions.push(ResolutionAction {
                    kind: ActionKind::CopiedUnmapped,
                    subjects: vec![c.name.clone()],
                    result: c.name.clone(),
                    note: Some(format!("from {:?}", diagram.name())),
                });
                c.name.clone()
            };
            match origin {
                Origin::Left => left_name.insert(&c.name, name.clone()),
                Origin::Right => right_name.insert(&c.name, name.clone()),
            };
            provenance.insert(name.clone(), [origin].into());
            classes.push(UmlClass {
                name,
                attributes: c.attributes.clone(),
                operations: c.operations.clone(),
            });
        }
    }

    let mut relationships: Vec<UmlRelationship> = Vec::new();
    let mut seen: HashSet<UmlRelationship> = HashSet::new();
    for (diagram, names) in [(bc1, &left_name), (bc2, &right_name)] {
        for r in diagram.relationships() {
            let rewritten = UmlRelationship::new(
                names[r.source.as_str()].clone(),
                names[r.target.as_str()].clone(),
                r.kind,
            );
            if seen.insert(rewritten.clone()) {
                relationships.push(rewritten);
            }
        }
    }

    let mut kinds: BTreeMap<(String, String), BTreeSet<_>> = BTreeMap::new();
    for r in &relationships {
        let key = if r.source <= r.target {
            (r.source.clone(), r.target.clone())
        } else {
            (r.target.clone(), r.source.clone())
        };
        kinds.entry(key).or_default().insert(r.kind);
    }
    for ((a, b), ks) in kinds {
        if ks.len() > 1 {
            let listed: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
            actions.push(ResolutionAction {
                kind: ActionKind::RelationKindConflict,
                subjects: vec![a.clone(), b.clone()],
                result: a,
                note: Some(format!("kept all of {}", listed.join(", "))),
            });
        }
    }

    let name = format!("{}+{}", bc1.name(), bc2.name());
    let diagram = ClassDiagram::new(name, classes, relationships)?;
    Ok(IntegratedModel {
        diagram,
        provenance,
        actions,
    })
}

/// Left fold of [`integrate`]: step `k` merges the running result with
/// `bcs[k + 1]` using `covs[k]`.
pub fn integrate_n(
    bcs: &[ClassDiagram],
    covs: &[ValidatedMappings],
    cat: &ConflictCatalog,
) -> Result<IntegratedModel, MergeError> {
    let Some(first) = bcs.first() else {
        return Err(MergeError::NoDiagrams);
    };
    if covs.len() + 1 != bcs.len() {
        return Err(MergeError::StepCount {
            expected: bcs.len() - 1,
            diagrams: bcs.len(),
            got: covs.len(),
        });
    }
    let mut model = IntegratedModel {
        diagram: first.clone(),
        provenance: first
            .classes()
            .iter()
            .map(|c| (c.name.clone(), [Origin::Left].into()))
            .collect(),
        actions: Vec::new(),
    };
    for (next, cov) in bcs[1..].iter().zip(covs) {
        let step = integrate(&model.diagram, next, cov, cat)?;
        model.actions.extend(step.actions);
        model.diagram = step.diagram;
        model.provenance = step.provenance;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{parse_diagram, serialize_diagram};
    use crate::matcher::{Mapping, MappingSet};

    fn cov(pairs: &[(&str, &str)]) -> ValidatedMappings {
        ValidatedMappings::unchecked(MappingSet::new(
            "l",
            "r",
            pairs
                .iter()
                .map(|&(a, b)| Mapping::new(a, b, 1.0))
                .collect(),
        ))
    }

    #[test]
    fn disjoint_union() {
        let a =
            parse_diagram("diagram \"a\"\nclass \"X\"\nclass \"Y\"\nassoc \"X\" \"Y\"").unwrap();
        let b = parse_diagram("diagram \"b\"\nclass \"Z\"").unwrap();
        let out = integrate(&a, &b, &cov(&[]), &ConflictCatalog::default()).unwrap();
        assert_eq!(out.diagram.classes().len(), 3);
        assert_eq!(out.diagram.relationships().len(), 1);
        assert!(out
            .actions
            .iter()
            .all(|a| a.kind == ActionKind::CopiedUnmapped));
        assert_eq!(out.provenance["Z"], [Origin::Right].into());
    }

    #[test]
    fn synonyms_unify_and_homonyms_are_qualified() {
        let a = parse_diagram(
            "diagram \"en\"\nclass \"Monitor\"\n  attr \"size\" : \"int\"\nclass \"Cache\"\nclass \"PC\"\ncompose \"PC\" \"Monitor\"",
        )
        .unwrap();
        let b = parse_diagram(
            "diagram \"fr\"\nclass \"Ecran\"\n  attr \"size\" : \"float\"\n  attr \"dpi\" : \"int\"\nclass \"Cache\"\nclass \"Portable\"\ncompose \"Portable\" \"Ecran\"",
        )
        .unwrap();
        let out = integrate(
            &a,
            &b,
            &cov(&[("Monitor", "Ecran")]),
            &ConflictCatalog::default(),
        )
        .unwrap();
        let d = &out.diagram;
        assert_eq!(d.classes().len(), 3 + 3 - 1);
        let monitor = d.class("Monitor").unwrap();
        assert_eq!(
            monitor.attributes,
            vec![Attribute::new("size", "int"), Attribute::new("dpi", "int")]
        );
        assert!(d.class("en.Cache").is_some());
        assert!(d.class("fr.Cache").is_some());
        assert!(d.class("Cache").is_none());
        assert_eq!(
            out.provenance["Monitor"],
            [Origin::Left, Origin::Right].into()
        );
        assert!(out
            .actions
            .iter()
            .any(|a| a.kind == ActionKind::AttributeTypeClash));
        assert_eq!(out.warnings().count(), 1);
        assert_eq!(d.relationships().len(), 2);
        assert_eq!(parse_diagram(&serialize_diagram(d)).unwrap(), *d);

        let right = ConflictCatalog {
            synonym_policy: SynonymPolicy::KeepRightLabel,
            ..ConflictCatalog::default()
        };
        let out = integrate(&a, &b, &cov(&[("Monitor", "Ecran")]), &right).unwrap();
        assert!(out.diagram.class("Ecran").is_some());
    }

    #[test]
    fn unmapped_label_colliding_with_unified_label() {
        let a = parse_diagram("diagram \"a\"\nclass \"Disk\"").unwrap();
        let b = parse_diagram("diagram \"b\"\nclass \"Disque\"\nclass \"Disk\"").unwrap();
        let out = integrate(
            &a,
            &b,
            &cov(&[("Disk", "Disque")]),
            &ConflictCatalog::default(),
        )
        .unwrap();
        assert!(out.diagram.class("Disk").is_some());
        assert!(out.diagram.class("b.Disk").is_some());
    }

    #[test]
    fn self_merge_is_identity() {
        let a = parse_diagram(
            "diagram \"a\"\nclass \"X\"\nclass \"Y\"\ninherit \"X\" \"Y\"\ncompose \"Y\" \"X\"",
        )
        .unwrap();
        let out = integrate(
            &a,
            &a,
            &cov(&[("X", "X"), ("Y", "Y")]),
            &ConflictCatalog::default(),
        )
        .unwrap();
        assert_eq!(out.diagram.clone().with_name("a"), a);
    }

    #[test]
    fn relation_kind_conflict_is_reported() {
        let a =
            parse_diagram("diagram \"a\"\nclass \"X\"\nclass \"Y\"\ncompose \"X\" \"Y\"").unwrap();
        let b = parse_diagram("diagram \"b\"\nclass \"X\"\nclass \"Y\"\naggregate \"X\" \"Y\"")
            .unwrap();
        let out = integrate(
            &a,
            &b,
            &cov(&[("X", "X"), ("Y", "Y")]),
            &ConflictCatalog::default(),
        )
        .unwrap();
        assert_eq!(out.diagram.relationships().len(), 2);
        assert!(out
            .actions
            .iter()
            .any(|a| a.kind == ActionKind::RelationKindConflict));
    }

    #[test]
    fn unknown_class_is_an_error() {
        let a = parse_diagram("diagram \"a\"\nclass \"X\"").unwrap();
        let b = parse_diagram("diagram \"b\"\nclass \"Y\"").unwrap();
        let err = integrate(&a, &b, &cov(&[("Q", "Y")]), &ConflictCatalog::default()).unwrap_err();
        assert!(matches!(err, MergeError::UnknownClass { side: "left", .. }));
    }

    #[test]
    fn fold() {
        let a = parse_diagram("diagram \"a\"\nclass \"X\"").unwrap();
        let b = parse_diagram("diagram \"b\"\nclass \"Y\"").unwrap();
        let c = parse_diagram("diagram \"c\"\nclass \"Z\"").unwrap();
        let single =
            integrate_n(std::slice::from_ref(&a), &[], &ConflictCatalog::default()).unwrap();
        assert_eq!(single.diagram, a);
        assert!(single.actions.is_empty());
        let all = integrate_n(
            &[a.clone(), b, c],
            &[cov(&[]), cov(&[])],
            &ConflictCatalog::default(),
        )
        .unwrap();
        assert_eq!(all.diagram.classes().len(), 3);
        assert!(matches!(
            integrate_n(&[a], &[cov(&[])], &ConflictCatalog::default()),
            Err(MergeError::StepCount { .. })
        ));
        assert_eq!(
            integrate_n(&[], &[], &ConflictCatalog::default()).unwrap_err(),
            MergeError::NoDiagrams
        );
    }
}
