#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segmerge::diagram::{ClassDiagram, RelationKind, UmlClass, UmlRelationship};
use segmerge::graph::Digraph;
use segmerge::matcher::{Mapping, MappingSet};
use segmerge::ontology::{transform_diagram, Ontology};

pub const SEED: u64 = 0x5e6_4e26;

/// A random pair of diagrams with acyclic inheritance and a random
/// injective mapping set between them.
pub struct Instance {
    pub seed: u64,
    pub d1: ClassDiagram,
    pub d2: ClassDiagram,
    pub o1: Ontology,
    pub o2: Ontology,
    pub m: MappingSet,
}

const POOL: [&str; 10] = ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"];

fn pick_kind(rng: &mut ChaCha8Rng) -> RelationKind {
    *RelationKind::ALL.choose(rng).unwrap()
}

/// Adds `edge` unless it duplicates an existing one or closes an
/// inheritance cycle.
fn push_edge(edges: &mut Vec<UmlRelationship>, inh: &mut Digraph<String>, edge: UmlRelationship) {
    if edges.contains(&edge) {
        return;
    }
    if edge.kind == RelationKind::Inheritance {
        if edge.source == edge.target || inh.has_path(&edge.target, &edge.source) {
            return;
        }
        inh.add_edge(edge.source.clone(), edge.target.clone());
    }
    edges.push(edge);
}

fn random_edges(
    labels: &[String],
    density: f64,
    rng: &mut ChaCha8Rng,
    edges: &mut Vec<UmlRelationship>,
    inh: &mut Digraph<String>,
) {
    for s in labels {
        for t in labels {
            let p = if s == t { density / 4.0 } else { density };
            if rng.gen_bool(p) {
                let kind = pick_kind(rng);
                push_edge(edges, inh, UmlRelationship::new(s.clone(), t.clone(), kind));
            }
        }
    }
}

fn diagram(name: &str, labels: &[String], edges: Vec<UmlRelationship>) -> ClassDiagram {
    ClassDiagram::new(
        name,
        labels.iter().map(|l| UmlClass::new(l.clone())).collect(),
        edges,
    )
    .unwrap()
}

fn labels(rng: &mut ChaCha8Rng, n: usize, prefix: &str) -> Vec<String> {
    // Left and right draw from overlapping pools so homonyms occur.
    let mut pool: Vec<&str> = POOL.to_vec();
    pool.shuffle(rng);
    pool.into_iter()
        .take(n)
        .map(|p| format!("{prefix}{p}"))
        .collect()
}

pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n1 = rng.gen_range(1..=8);
    let n2 = rng.gen_range(1..=8);
    let density = rng.gen_range(0.1..=0.5);
    let shared = rng.gen_bool(0.5);
    let l1 = labels(&mut rng, n1, "");
    let l2 = labels(&mut rng, n2, if shared { "" } else { "r" });

    let mut e1 = Vec::new();
    let mut inh1 = Digraph::new();
    random_edges(&l1, density, &mut rng, &mut e1, &mut inh1);

    // Plant a noisy copy of part of the left structure on the right so that
    // random mappings often line up with matching edges.
    let mut planted: Vec<(String, String)> = Vec::new();
    let mut e2 = Vec::new();
    let mut inh2 = Digraph::new();
    if rng.gen_bool(0.7) {
        let mut targets = l2.clone();
        targets.shuffle(&mut rng);
        planted = l1.iter().cloned().zip(targets).collect();
        for e in &e1 {
            let (Some(s), Some(t)) = (
                planted
                    .iter()
                    .find(|p| p.0 == e.source)
                    .map(|p| p.1.clone()),
                planted
                    .iter()
                    .find(|p| p.0 == e.target)
                    .map(|p| p.1.clone()),
            ) else {
                continue;
            };
            if rng.gen_bool(0.8) {
                let kind = if rng.gen_bool(0.9) {
                    e.kind
                } else {
                    pick_kind(&mut rng)
                };
                let (s, t) = if rng.gen_bool(0.9) { (s, t) } else { (t, s) };
                push_edge(&mut e2, &mut inh2, UmlRelationship::new(s, t, kind));
            }
        }
    }
    random_edges(&l2, density / 2.0, &mut rng, &mut e2, &mut inh2);

    let d1 = diagram("L", &l1, e1);
    let d2 = diagram("R", &l2, e2);

    let mut free_right = l2.clone();
    free_right.shuffle(&mut rng);
    let mut mappings = Vec::new();
    for left in &l1 {
        if !rng.gen_bool(0.75) {
            continue;
        }
        let planted_right = planted.iter().find(|p| &p.0 == left).map(|p| p.1.clone());
        let right = match planted_right {
            Some(r) if rng.gen_bool(0.8) && free_right.contains(&r) => r,
            _ => match free_right.last() {
                Some(r) => r.clone(),
                None => break,
            },
        };
        free_right.retain(|r| r != &right);
        let score = rng.gen_range(81..=100) as f64 / 100.0;
        mappings.push(Mapping::new(left.clone(), right, score));
    }
    let m = MappingSet::new("L", "R", mappings);
    let o1 = transform_diagram(&d1);
    let o2 = transform_diagram(&d2);
    Instance {
        seed,
        d1,
        d2,
        o1,
        o2,
        m,
    }
}

pub fn instances(count: usize) -> impl Iterator<Item = Instance> {
    (0..count as u64).map(|i| instance(SEED.wrapping_add(i)))
}

/// Random string over a small alphabet, including multi-byte characters.
pub fn random_string(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: [char; 10] = ['a', 'b', 'c', 'A', 'B', ' ', 'é', 'É', 'x', 'ü'];
    let len = rng.gen_range(0..=10);
    (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
