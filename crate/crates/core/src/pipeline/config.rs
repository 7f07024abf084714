use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus_stats::DEFAULT_PERCENTILE;
use crate::nlsat::GenerationConfig;
use crate::probe::TaskKind;
use crate::regression::FactorSpec;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommonsenseSection {
    /// WikiText dump or JSONL `{title, body}` file.
    pub corpus: PathBuf,
    #[serde(default = "default_num_terms")]
    pub num_terms: usize,
    #[serde(default = "default_percentile")]
    pub percentile: f64,
    #[serde(default = "default_cs_template")]
    pub template: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationalSection {
    #[serde(default)]
    pub base: GenerationConfig,
    /// Instances per (facts, rules, arguments) cell.
    #[serde(default = "default_per_cell")]
    pub per_cell: usize,
    #[serde(default = "default_facts")]
    pub num_facts: Vec<usize>,
    #[serde(default = "default_rules")]
    pub num_rules: Vec<usize>,
    #[serde(default = "default_args")]
    pub num_arguments: Vec<usize>,
    #[serde(default = "default_fewshot")]
    pub fewshot_n: Vec<usize>,
    #[serde(default = "default_pool")]
    pub pool_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CnliSection {
    pub chains: PathBuf,
    /// Statement pairs after human verification.
    pub pairs: PathBuf,
    #[serde(default)]
    pub scores: Option<PathBuf>,
    #[serde(default)]
    pub scorer_url: Option<String>,
    pub scorer_model_tag: String,
    #[serde(default = "default_cnli_template")]
    pub template: String,
    #[serde(default = "yes")]
    pub include_baseline: bool,
    #[serde(default = "default_min_tokens")]
    pub min_tokens: usize,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: TaskKind,
    pub models: Vec<String>,
    #[serde(default)]
    pub provider: ProviderKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Quantile bins per factor in the rate summary.
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default)]
    pub fresh: bool,
    #[serde(default)]
    pub max_tokens: Option<u32>,
    #[serde(default)]
    pub commonsense: Option<CommonsenseSection>,
    #[serde(default)]
    pub relational: Option<RelationalSection>,
    #[serde(default)]
    pub cnli: Option<CnliSection>,
    /// Human verdicts (`annotations.jsonl`), required for commonsense and
    /// cnli runs.
    #[serde(default)]
    pub annotations: Option<PathBuf>,
    #[serde(default)]
    pub factor_spec: Option<FactorSpec>,
}

fn default_num_terms() -> usize {
    200
}
fn default_percentile() -> f64 {
    DEFAULT_PERCENTILE
}
fn default_cs_template() -> String {
    "explain".into()
}
fn default_per_cell() -> usize {
    10
}
fn default_facts() -> Vec<usize> {
    vec![2, 4, 6]
}
fn default_rules() -> Vec<usize> {
    vec![2, 4, 6]
}
fn default_args() -> Vec<usize> {
    vec![2, 3, 4]
}
fn default_fewshot() -> Vec<usize> {
    vec![0, 2, 4]
}
fn default_pool() -> usize {
    32
}
fn default_cnli_template() -> String {
    "assume".into()
}
fn yes() -> bool {
    true
}
fn default_min_tokens() -> usize {
    5
}
fn default_max_tokens() -> usize {
    25
}
fn default_output() -> PathBuf {
    PathBuf::from("run")
}
fn default_parallelism() -> usize {
    4
}
fn default_bins() -> usize {
    4
}

impl RunConfig {
    /// Parses `path` and resolves relative paths against its directory.
    /// Returns the config and the hex SHA-256 of the file as written.
    pub fn load(path: &Path) -> Result<(Self, String), Box<dyn std::error::Error + Send + Sync>> {
        let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_slice(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        Ok((cfg, hex::encode(Sha256::digest(&bytes))))
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        if let Some(a) = &mut self.annotations {
            fix(a);
        }
        if let Some(c) = &mut self.commonsense {
            fix(&mut c.corpus);
        }
        if let Some(c) = &mut self.cnli {
            fix(&mut c.chains);
            fix(&mut c.pairs);
            if let Some(s) = &mut c.scores {
                fix(s);
            }
        }
    }

    /// Digest of the config as serialized, for configs built in code.
    pub fn digest(&self) -> String {
        let v = serde_json::to_value(self).expect("config serializes");
        hex::encode(Sha256::digest(serde_json::to_vec(&v).expect("value serializes")))
    }
}
