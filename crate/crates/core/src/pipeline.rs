//! End-to-end orchestration: transform, match, validate, partition into
//! bonding classes, extract subgraph pairs, integrate, and report.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::diagram::{
    inheritance_is_acyclic, parse_diagram_bytes, serialize_diagram, ClassDiagram, ParseError,
};
use crate::matcher::{
    match_ontologies, parse_lexicon, ConfigError, Lexicon, LexiconError, Mapping, MappingRelation,
    MappingSet, SimilarityConfig,
};
use crate::merger::{
    integrate, ConflictCatalog, IntegratedModel, MergeError, Origin, ResolutionAction,
};
use crate::ontology::transform_diagram;
use crate::oracle::{max_iso_pairs, OracleError};
use crate::segment::{
    equivalence_classes_in, to_max_subgraphs_in, GraphMode, SubOntology, SubgraphPair,
};
use crate::validator::{
    validate, Resolution, RuleId, RuleSet, Severity, ValidatedMappings, Violation,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub similarity: SimilarityConfig,
    pub rules: RuleSet,
    pub catalog: ConflictCatalog,
    pub out: PathBuf,
    pub report: PathBuf,
    pub strict: bool,
    pub graph_mode: GraphMode,
    /// Report whose accepted step-1 mappings replace matching for step 1.
    pub mappings: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(inputs: Vec<PathBuf>, out: impl Into<PathBuf>, report: impl Into<PathBuf>) -> Self {
        Self {
            inputs,
            lexicon: None,
            similarity: SimilarityConfig::default(),
            rules: RuleSet::default(),
            catalog: ConflictCatalog::default(),
            out: out.into(),
            report: report.into(),
            strict: false,
            graph_mode: GraphMode::Typed,
            mappings: None,
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.inputs.len() < 2 {
            return Err(PipelineError::TooFewInputs(self.inputs.len()));
        }
        self.similarity.validate()?;
        Ok(())
    }

    /// Rules with strict mode applied.
    pub fn effective_rules(&self) -> RuleSet {
        if self.strict {
            self.rules
                .clone()
                .with_severity(RuleId::RedundantSubsumption, Severity::Reject)
        } else {
            self.rules.clone()
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("at least two input diagrams are required, got {0}")]
    TooFewInputs(usize),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Lexicon { path: PathBuf, source: LexiconError },
    #[error("{path}: {msg}")]
    MappingImport { path: PathBuf, msg: String },
    #[error("duplicate diagram name {0:?}")]
    DuplicateDiagram(String),
    #[error("diagram {0:?} has a cyclic inheritance hierarchy")]
    CyclicInput(String),
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl PipelineError {
    /// 2 for unreadable or malformed input, 1 for input that cannot be
    /// integrated consistently.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::CyclicInput(_) | PipelineError::Merge(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum MappingStatus {
    Accepted,
    Dropped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MappingEntry {
    pub step: usize,
    pub left: String,
    pub right: String,
    pub score: f64,
    pub relation: MappingRelation,
    pub status: MappingStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViolationEntry {
    pub step: usize,
    #[serde(flatten)]
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassEntry {
    pub step: usize,
    pub representative: (String, String),
    pub rank: usize,
    pub members: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SubgraphEntry {
    pub step: usize,
    pub left: SubOntology,
    pub right: SubOntology,
    pub correspondence: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ActionEntry {
    pub step: usize,
    #[serde(flatten)]
    pub action: ResolutionAction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigEcho {
    pub inputs: Vec<String>,
    pub lexicon: Option<String>,
    pub mappings: Option<String>,
    pub similarity: SimilarityConfig,
    pub rules: RuleSet,
    pub catalog: ConflictCatalog,
    pub strict: bool,
    pub graph_mode: GraphMode,
}

impl From<&PipelineConfig> for ConfigEcho {
    fn from(c: &PipelineConfig) -> Self {
        let show = |p: &Path| p.display().to_string();
        Self {
            inputs: c.inputs.iter().map(|p| show(p)).collect(),
            lexicon: c.lexicon.as_deref().map(show),
            mappings: c.mappings.as_deref().map(show),
            similarity: c.similarity,
            rules: c.effective_rules(),
            catalog: c.catalog,
            strict: c.strict,
            graph_mode: c.graph_mode,
        }
    }
}

/// The machine-readable run report. Field order is the JSON key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub mappings: Vec<MappingEntry>,
    pub violations: Vec<ViolationEntry>,
    pub classes: Vec<ClassEntry>,
    pub max_subgraphs: Vec<SubgraphEntry>,
    pub actions: Vec<ActionEntry>,
    pub config: ConfigEcho,
    /// Wall-clock milliseconds per stage; not reproducible across runs.
    pub timings: BTreeMap<String, f64>,
    pub errors: Vec<String>,
}

impl Report {
    pub fn new(config: ConfigEcho) -> Self {
        Self {
            mappings: Vec::new(),
            violations: Vec::new(),
            classes: Vec::new(),
            max_subgraphs: Vec::new(),
            actions: Vec::new(),
            config,
            timings: BTreeMap::new(),
            errors: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Accepted mappings of one step.
    pub fn accepted(&self, step: usize) -> impl Iterator<Item = &MappingEntry> {
        self.mappings
            .iter()
            .filter(move |m| m.step == step && m.status == MappingStatus::Accepted)
    }
}

/// Everything computed for one binary integration step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub matched: MappingSet,
    pub validated: ValidatedMappings,
    pub classes: crate::segment::ClassPartition,
    pub subgraphs: Vec<SubgraphPair>,
    pub model: IntegratedModel,
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, key: String, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *timings.entry(key).or_default() += start.elapsed().as_secs_f64() * 1e3;
    out
}

/// Transform both diagrams, match them and validate the mappings.
pub fn preintegration(
    bc1: &ClassDiagram,
    bc2: &ClassDiagram,
    lex: &Lexicon,
    cfg: &PipelineConfig,
) -> Result<ValidatedMappings, PipelineError> {
    cfg.similarity.validate()?;
    let (o1, o2) = (transform_diagram(bc1), transform_diagram(bc2));
    let m = match_ontologies(&o1, &o2, &cfg.similarity, lex);
    Ok(validate(&m, &o1, &o2, &cfg.effective_rules()))
}

/// One binary step. `imported` replaces matching when given.
pub fn run_step(
    bc1: &ClassDiagram,
    bc2: &ClassDiagram,
    lex: &Lexicon,
    cfg: &PipelineConfig,
    imported: Option<MappingSet>,
    timings: &mut BTreeMap<String, f64>,
    step: usize,
) -> Result<StepResult, PipelineError> {
    let key = |stage: &str| format!("step{step}.{stage}");
    let (o1, o2) = timed(timings, key("transform"), || {
        (transform_diagram(bc1), transform_diagram(bc2))
    });
    let matched = match imported {
        Some(m) => m,
        None => timed(timings, key("match"), || {
            match_ontologies(&o1, &o2, &cfg.similarity, lex)
        }),
    };
    let validated = timed(timings, key("validate"), || {
        validate(&matched, &o1, &o2, &cfg.effective_rules())
    });
    let classes = timed(timings, key("classes"), || {
        equivalence_classes_in(&validated.accepted, &o1, &o2, cfg.graph_mode)
    });
    let subgraphs = timed(timings, key("subgraphs"), || {
        to_max_subgraphs_in(&classes, &o1, &o2, cfg.graph_mode)
    });
    let model = timed(timings, key("integrate"), || {
        integrate(bc1, bc2, &validated, &cfg.catalog)
    })?;
    Ok(StepResult {
        matched,
        validated,
        classes,
        subgraphs,
        model,
    })
}

fn record_step(report: &mut Report, step: usize, r: &StepResult) {
    for m in r.matched.iter() {
        let status = if r.validated.accepted.contains(&m.left, &m.right) {
            MappingStatus::Accepted
        } else {
            MappingStatus::Dropped
        };
        report.mappings.push(MappingEntry {
            step,
            left: m.left.clone(),
            right: m.right.clone(),
            score: m.score,
            relation: m.relation,
            status,
        });
    }
    for v in &r.validated.violations {
        report.violations.push(ViolationEntry {
            step,
            violation: v.clone(),
        });
    }
    for c in r.classes.iter() {
        let rep = c.representative();
        report.classes.push(ClassEntry {
            step,
            representative: (rep.left.clone(), rep.right.clone()),
            rank: c.rank,
            members: c
                .members
                .iter()
                .map(|m| (m.left.clone(), m.right.clone()))
                .collect(),
        });
    }
    for s in &r.subgraphs {
        report.max_subgraphs.push(SubgraphEntry {
            step,
            left: s.left.clone(),
            right: s.right.clone(),
            correspondence: s.correspondence.clone(),
        });
    }
    for a in &r.model.actions {
        report.actions.push(ActionEntry {
            step,
            action: a.clone(),
        });
    }
}

/// Folds binary integration over `diagrams` in order, filling `report`.
pub fn integrate_diagrams(
    diagrams: &[ClassDiagram],
    lex: &Lexicon,
    cfg: &PipelineConfig,
    imported: Option<MappingSet>,
    report: &mut Report,
) -> Result<IntegratedModel, PipelineError> {
    let mut names = std::collections::HashSet::new();
    for d in diagrams {
        if !names.insert(d.name()) {
            return Err(PipelineError::DuplicateDiagram(d.name().to_string()));
        }
        if !inheritance_is_acyclic(d) {
            return Err(PipelineError::CyclicInput(d.name().to_string()));
        }
    }
    let Some(first) = diagrams.first() else {
        return Err(MergeError::NoDiagrams.into());
    };
    let mut model = IntegratedModel {
        diagram: first.clone(),
        provenance: first
            .classes()
            .iter()
            .map(|c| (c.name.clone(), [Origin::Left].into()))
            .collect(),
        actions: Vec::new(),
    };
    let mut imported = imported;
    for (i, next) in diagrams[1..].iter().enumerate() {
        let step = i + 1;
        let result = run_step(
            &model.diagram,
            next,
            lex,
            cfg,
            imported.take(),
            &mut report.timings,
            step,
        )?;
        record_step(report, step, &result);
        model.actions.extend(result.model.actions);
        model.diagram = result.model.diagram;
        model.provenance = result.model.provenance;
    }
    Ok(model)
}

fn read(path: &Path) -> Result<Vec<u8>, PipelineError> {
    fs::read(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_diagram(path: &Path) -> Result<ClassDiagram, PipelineError> {
    parse_diagram_bytes(&read(path)?).map_err(|source| PipelineError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon, PipelineError> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| PipelineError::MappingImport {
        path: path.to_path_buf(),
        msg: "lexicon is not valid UTF-8".into(),
    })?;
    parse_lexicon(&text).map_err(|source| PipelineError::Lexicon {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads the accepted step-1 mappings from a previously written report.
pub fn load_mappings(path: &Path, left: &str, right: &str) -> Result<MappingSet, PipelineError> {
    let bad = |msg: String| PipelineError::MappingImport {
        path: path.to_path_buf(),
        msg,
    };
    let value: Value = serde_json::from_slice(&read(path)?).map_err(|e| bad(e.to_string()))?;
    let entries = value
        .get("mappings")
        .cloned()
        .ok_or_else(|| bad("missing `mappings` section".into()))?;
    let entries: Vec<MappingEntry> =
        serde_json::from_value(entries).map_err(|e| bad(e.to_string()))?;
    let mappings = entries
        .into_iter()
        .filter(|e| e.step == 1 && e.status == MappingStatus::Accepted)
        .map(|e| Mapping {
            left: e.left,
            right: e.right,
            score: e.score,
            relation: e.relation,
        })
        .collect();
    Ok(MappingSet::new(left, right, mappings))
}

/// Result of [`run_pipeline`].
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: Report,
    pub merged: Option<IntegratedModel>,
    pub error: Option<PipelineError>,
    /// Set when the report itself could not be written.
    pub report_write_error: Option<std::io::Error>,
}

fn load_inputs(
    cfg: &PipelineConfig,
) -> Result<(Vec<ClassDiagram>, Lexicon, Option<MappingSet>), PipelineError> {
    cfg.validate()?;
    let diagrams = cfg
        .inputs
        .iter()
        .map(|p| load_diagram(p))
        .collect::<Result<Vec<_>, _>>()?;
    let lex = match &cfg.lexicon {
        Some(p) => load_lexicon(p)?,
        None => Lexicon::new(),
    };
    let imported = match &cfg.mappings {
        Some(p) => Some(load_mappings(p, diagrams[0].name(), diagrams[1].name())?),
        None => None,
    };
    Ok((diagrams, lex, imported))
}

/// Runs every stage, writes the merged diagram to `cfg.out` and the report
/// to `cfg.report`.
///
/// Exit codes: 0 success; 1 when the inputs cannot be integrated
/// consistently (or, in strict mode, when any warning remains); 2 on I/O,
/// parse or configuration errors.
pub fn run_pipeline(cfg: &PipelineConfig) -> RunOutcome {
    let mut report = Report::new(ConfigEcho::from(cfg));
    let result = load_inputs(cfg).and_then(|(diagrams, lex, imported)| {
        integrate_diagrams(&diagrams, &lex, cfg, imported, &mut report)
    });

    let (mut exit_code, merged, error) = match result {
        Ok(model) => (0, Some(model), None),
        Err(e) => {
            report.errors.push(e.to_string());
            (e.exit_code(), None, Some(e))
        }
    };

    if let Some(model) = &merged {
        if cfg.strict {
            let warn_violations = report
                .violations
                .iter()
                .filter(|v| {
                    v.violation.severity == Severity::Warn
                        && v.violation.resolution == Resolution::None
                })
                .count();
            let warn_actions = model.warnings().count();
            if warn_violations + warn_actions > 0 {
                report.errors.push(format!(
                    "strict mode: {warn_violations} warning violation(s) and {warn_actions} warning action(s)"
                ));
                exit_code = 1;
            }
        }
        if exit_code == 0 {
            if let Err(e) = fs::write(&cfg.out, serialize_diagram(&model.diagram)) {
                report.errors.push(format!("{}: {e}", cfg.out.display()));
                exit_code = 2;
            }
        }
    }

    let report_write_error = fs::write(&cfg.report, report.to_json()).err();
    if report_write_error.is_some() && exit_code == 0 {
        exit_code = 2;
    }
    RunOutcome {
        exit_code,
        report,
        merged,
        error,
        report_write_error,
    }
}

/// Engine and brute-force results for one pair of diagrams.
#[derive(Debug, Clone)]
pub struct Verification {
    pub accepted: MappingSet,
    pub engine: Vec<SubgraphPair>,
    pub oracle: Vec<SubgraphPair>,
}

impl Verification {
    pub fn agree(&self) -> bool {
        let a: std::collections::BTreeSet<_> = self.engine.iter().collect();
        let b: std::collections::BTreeSet<_> = self.oracle.iter().collect();
        a == b && self.engine.len() == a.len()
    }
}

/// Cross-checks the bonding classes of the validated mappings against the
/// exhaustive enumeration of maximal isomorphic subgraph pairs.
pub fn verify(
    bc1: &ClassDiagram,
    bc2: &ClassDiagram,
    lex: &Lexicon,
    cfg: &PipelineConfig,
    cap: usize,
) -> Result<Verification, PipelineError> {
    let cov = preintegration(bc1, bc2, lex, cfg)?;
    let (o1, o2) = (transform_diagram(bc1), transform_diagram(bc2));
    let classes = equivalence_classes_in(&cov.accepted, &o1, &o2, cfg.graph_mode);
    let engine = to_max_subgraphs_in(&classes, &o1, &o2, cfg.graph_mode);
    let oracle = max_iso_pairs(
        &o1,
        &o2,
        &cov.accepted,
        cfg.graph_mode,
        cap,
        crate::exec::Exec::default(),
    )?
    .into_iter()
    .collect();
    Ok(Verification {
        accepted: cov.accepted,
        engine,
        oracle,
    })
}

pub fn load_pair(
    cfg: &PipelineConfig,
) -> Result<(ClassDiagram, ClassDiagram, Lexicon), PipelineError> {
    let (mut diagrams, lex, _) = load_inputs(cfg)?;
    let right = diagrams.swap_remove(1);
    let left = diagrams.swap_remove(0);
    Ok((left, right, lex))
}
