use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use segmerge::matcher::{Combiner, Weights};
use segmerge::merger::ConflictCatalog;
use serde::Deserialize;

/// Optional settings read from a TOML file. Command-line flags override
/// every field set here.
#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub lexicon: Option<PathBuf>,
    pub threshold: Option<f64>,
    pub combiner: Option<Combiner>,
    pub weights: Option<Weights>,
    pub strict: Option<bool>,
    pub plain_graph: Option<bool>,
    pub catalog: Option<ConflictCatalog>,
    pub cap: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Self =
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        // Relative lexicon paths resolve against the config file.
        if let (Some(lex), Some(dir)) = (&cfg.lexicon, path.parent()) {
            if lex.is_relative() {
                cfg.lexicon = Some(dir.join(lex));
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_fields() {
        let cfg: FileConfig = toml::from_str(
            r#"
threshold = 0.7
combiner = "weightedAverage"
strict = true
plain-graph = false
cap = 12

[weights]
edit = 1.0
trigram = 0.5
synonym = 1.0
"#,
        )
        .unwrap();
        assert_eq!(cfg.threshold, Some(0.7));
        assert_eq!(cfg.combiner, Some(Combiner::WeightedAverage));
        assert_eq!(cfg.weights.unwrap().trigram, 0.5);
        assert_eq!(cfg.cap, Some(12));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(toml::from_str::<FileConfig>("treshold = 0.7").is_err());
    }
}
