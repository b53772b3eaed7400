use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use segmerge::diagram::{ClassDiagram, RelationKind, UmlClass, UmlRelationship};
use segmerge::matcher::{candidates_with, Lexicon, Mapping, MappingSet, SimilarityConfig};
use segmerge::ontology::{transform_diagram, Ontology};
use segmerge::oracle::enumerate_iso_pairs_with;
use segmerge::segment::GraphMode;
use segmerge::Exec;

fn strategies() -> Vec<(&'static str, Exec)> {
    #[cfg_attr(not(feature = "parallel"), allow(unused_mut))]
    let mut v = vec![("sequential", Exec::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Exec::Parallel));
    v
}

/// A layered tree of `n` classes with names that share prefixes.
fn tree(name: &str, n: usize, prefix: &str) -> ClassDiagram {
    let labels: Vec<String> = (0..n).map(|i| format!("{prefix}Component{i:04}")).collect();
    let rels = (1..n)
        .map(|i| {
            let kind = RelationKind::ALL[i % 4];
            UmlRelationship::new(labels[i].clone(), labels[(i - 1) / 3].clone(), kind)
        })
        .collect();
    ClassDiagram::new(
        name,
        labels.iter().map(|l| UmlClass::new(l.clone())).collect(),
        rels,
    )
    .unwrap()
}

fn bench_scoring(c: &mut Criterion) {
    let mut group = c.benchmark_group("candidate_scoring");
    let lex = Lexicon::from_pairs([("Component0001", "Part0001")]);
    let cfg = SimilarityConfig::default();
    for n in [100, 400] {
        let o1 = transform_diagram(&tree("L", n, "Left"));
        let o2 = transform_diagram(&tree("R", n, "Right"));
        for (name, exec) in strategies() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| candidates_with(black_box(&o1), black_box(&o2), &cfg, &lex, exec))
            });
        }
    }
    group.finish();
}

fn identity(o: &Ontology, k: usize) -> MappingSet {
    let ms = o
        .concepts()
        .iter()
        .take(k)
        .map(|c| Mapping::new(c.label.clone(), c.label.clone(), 1.0))
        .collect();
    MappingSet::new(o.id(), o.id(), ms)
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_enumeration");
    group.sample_size(10);
    let o = transform_diagram(&tree("T", 16, ""));
    for k in [10, 14] {
        let m = identity(&o, k);
        for (name, exec) in strategies() {
            group.bench_with_input(BenchmarkId::new(name, k), &k, |b, _| {
                b.iter(|| {
                    enumerate_iso_pairs_with(&o, &o, black_box(&m), GraphMode::Typed, 16, exec)
                        .unwrap()
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_scoring, bench_oracle);
criterion_main!(benches);
