mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use segmerge::oracle::DEFAULT_CAP;
use segmerge::pipeline::{load_pair, run_pipeline, verify, PipelineConfig};
use segmerge::GraphMode;

use crate::config::FileConfig;

#[derive(Parser)]
#[command(name = "segmerge", version, about = "Integrate UML class diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Match, validate and merge two or more diagrams.
    Integrate(IntegrateArgs),
    /// Check bonding classes against exhaustive subgraph enumeration.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    /// Synonym lexicon, one tab-separated pair per line.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Minimum similarity (exclusive) for a candidate mapping.
    #[arg(long)]
    threshold: Option<f64>,
    /// Ignore relation types and directions when comparing edges.
    #[arg(long)]
    plain_graph: bool,
    /// TOML file with default settings.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    common: Common,
    /// Further diagrams, folded in order after the first two.
    #[arg(long = "more")]
    more: Vec<PathBuf>,
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value = "merged.ucd")]
    out: PathBuf,
    #[arg(long, default_value = "report.json")]
    report: PathBuf,
    /// Reuse the accepted first-step mappings of an earlier report.
    #[arg(long)]
    mappings: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Largest mapping set the enumeration accepts.
    #[arg(long)]
    cap: Option<usize>,
}

fn build_config(common: &Common, file: &FileConfig, inputs: Vec<PathBuf>) -> PipelineConfig {
    let mut cfg = PipelineConfig::new(inputs, PathBuf::new(), PathBuf::new());
    cfg.lexicon = common.lexicon.clone().or_else(|| file.lexicon.clone());
    if let Some(t) = common.threshold.or(file.threshold) {
        cfg.similarity.threshold = t;
    }
    if let Some(c) = file.combiner {
        cfg.similarity.combiner = c;
    }
    if let Some(w) = file.weights {
        cfg.similarity.weights = w;
    }
    if let Some(c) = file.catalog {
        cfg.catalog = c;
    }
    if common.plain_graph || file.plain_graph.unwrap_or(false) {
        cfg.graph_mode = GraphMode::Plain;
    }
    cfg
}

fn load_file_config(common: &Common) -> Result<FileConfig> {
    match &common.config {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::default()),
    }
}

fn integrate(args: IntegrateArgs) -> Result<u8> {
    let file = load_file_config(&args.common)?;
    let mut inputs = vec![args.common.left.clone(), args.common.right.clone()];
    inputs.extend(args.more.iter().cloned());
    let mut cfg = build_config(&args.common, &file, inputs);
    cfg.out = args.out;
    cfg.report = args.report;
    cfg.strict = args.strict || file.strict.unwrap_or(false);
    cfg.mappings = args.mappings;

    let outcome = run_pipeline(&cfg);
    for e in &outcome.report.errors {
        eprintln!("error: {e}");
    }
    if let Some(e) = &outcome.report_write_error {
        eprintln!("error: {}: {e}", cfg.report.display());
    }
    if let Some(model) = &outcome.merged {
        let accepted = outcome
            .report
            .mappings
            .iter()
            .filter(|m| m.status == segmerge::pipeline::MappingStatus::Accepted);
        eprintln!(
            "{} mapping(s) accepted, {} class(es) in merged diagram {:?}",
            accepted.count(),
            model.diagram.classes().len(),
            model.diagram.name()
        );
    }
    Ok(outcome.exit_code as u8)
}

fn verify_cmd(args: VerifyArgs) -> Result<u8> {
    let file = load_file_config(&args.common)?;
    let inputs = vec![args.common.left.clone(), args.common.right.clone()];
    let cfg = build_config(&args.common, &file, inputs);
    let cap = args.cap.or(file.cap).unwrap_or(DEFAULT_CAP);
    let result = load_pair(&cfg).and_then(|(l, r, lex)| verify(&l, &r, &lex, &cfg, cap));
    match result {
        Ok(v) => {
            println!(
                "mappings={} engine={} oracle={} {}",
                v.accepted.len(),
                v.engine.len(),
                v.oracle.len(),
                if v.agree() { "agree" } else { "DISAGREE" }
            );
            Ok(if v.agree() { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Integrate(a) => integrate(a),
        Command::Verify(a) => verify_cmd(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
