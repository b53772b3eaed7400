//! Semantic integration of UML class diagrams.
//!
//! Diagrams are transformed into typed ontologies, matched by label
//! similarity, validated against consistency rules, partitioned into
//! bonding classes, and merged into a single diagram.

pub mod diagram;
pub mod exec;
pub mod graph;
pub mod matcher;
pub mod merger;
pub mod ontology;
pub mod oracle;
pub mod pipeline;
pub mod segment;
pub mod validator;

pub use diagram::{parse_diagram, serialize_diagram, ClassDiagram, RelationKind};
pub use exec::Exec;
pub use matcher::{match_ontologies, Lexicon, Mapping, MappingSet, SimilarityConfig};
pub use merger::{integrate, integrate_n, ConflictCatalog, IntegratedModel};
pub use ontology::{transform_diagram, Ontology, RelationType};
pub use pipeline::{run_pipeline, PipelineConfig, Report};
pub use segment::{ecf, equivalence_classes, to_max_subgraphs, GraphMode, SubgraphPair};
pub use validator::{validate, RuleSet, ValidatedMappings};
