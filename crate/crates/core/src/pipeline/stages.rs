use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BoxError, PipelineError, ProviderKind, RunConfig, Stage};
use crate::annotation::{
    aggregate_set, extract_answer, ingest_annotations, percent_agreement, read_labels, relational_label, write_labels,
    AnswerExtraction, AnswerPattern, HallucinationLabel, VerdictSet,
};
use crate::cnli::{build_cnli_prompt, build_instances, read_chains, FileScores, HttpScorer, LengthWindow, PllScorer, StatementPair};
use crate::corpus_stats::{
    build_term_index, complexity_metrics, count_frequencies, load_corpus, render_commonsense_batch, sample_low_frequency_terms,
    PromptTemplate, TermMatcher,
};
use crate::jsonl;
use crate::llm_gateway::{latest_entries, read_response_log, Gateway, GatewayOptions, HttpChatProvider, MockProvider, Provider};
use crate::nlsat::{assemble_fewshot_prompt, generate_batch, transcribe_chain, verify_reasoning_chain, GenerationConfig, TheoryInstance};
use crate::probe::{read_factors_csv, write_factors_csv, FactorVector, ProbeInstance, TaskKind};
use crate::regression::{build_design_matrix, fit_logistic, FactorColumn, FactorRole, FactorSpec, Transform};
use crate::report::{coefficient_table, file_digest, rate_summary, Provenance, ReportBundle};
use crate::RegressionResult;

const INSTANCES: &str = "instances.jsonl";
const FACTORS: &str = "factors.csv";
const THEORIES: &str = "theories.jsonl";
const CNLI_INSTANCES: &str = "cnli_instances.jsonl";
const RESPONSES: &str = "responses.jsonl";
const LABELS: &str = "labels.jsonl";
const REVIEW: &str = "review.jsonl";
const FITS: &str = "fits.json";
const REPORT_DIR: &str = "report";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model_id: String,
    pub result: RegressionResult,
}

/// A response whose answer could not be extracted; left for a human.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewItem {
    pub instance_id: String,
    pub model_id: String,
    pub reason: String,
}

/// Digest of the texts a run was fitted on. Timestamps and latencies are
/// left out so a replay from cache yields the same value.
fn response_content_digest(path: &Path) -> Result<String, BoxError> {
    let mut h = Sha256::new();
    for e in latest_entries(&read_response_log(path)?) {
        let text = e.response.as_ref().map(|r| r.raw_text.as_str());
        let row = serde_json::json!([e.instance_id, e.model_id, e.request_digest, text, e.error]);
        h.update(serde_json::to_vec(&row)?);
        h.update(b"\n");
    }
    Ok(hex::encode(h.finalize()))
}

pub fn default_factor_spec(task: TaskKind) -> FactorSpec {
    let columns = match task {
        TaskKind::CommonsenseQa => vec![
            FactorColumn::risk("frequency", Transform::Log10p1),
            FactorColumn::risk("article_len", Transform::Log10p1),
        ],
        TaskKind::Relational => vec![
            FactorColumn::risk("num_theory", Transform::Identity),
            FactorColumn::risk("num_facts", Transform::Identity),
            FactorColumn::risk("num_arguments", Transform::Identity),
            FactorColumn::confounder("fewshot_n", Transform::Identity),
        ],
        TaskKind::Cnli => vec![
            FactorColumn::risk("likelihood_diff", Transform::Identity),
            FactorColumn::confounder("premise_len", Transform::Identity),
        ],
    };
    FactorSpec { columns }
}

pub struct Pipeline {
    config: RunConfig,
    config_digest: String,
    provider: Option<Arc<dyn Provider>>,
}

fn need(path: &Path, what: &str) -> Result<(), BoxError> {
    if path.exists() {
        Ok(())
    } else {
        Err(format!("{what} `{}` not found", path.display()).into())
    }
}

impl Pipeline {
    pub fn new(config: RunConfig, config_digest: String) -> Self {
        Pipeline { config, config_digest, provider: None }
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let (cfg, digest) = RunConfig::load(path).map_err(|e| PipelineError::new(Stage::Prepare, e))?;
        Ok(Self::new(cfg, digest))
    }

    /// Replaces the provider named in the config.
    pub fn with_provider(mut self, provider: Arc<dyn Provider>) -> Self {
        self.provider = Some(provider);
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn config_mut(&mut self) -> &mut RunConfig {
        &mut self.config
    }

    fn out(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    pub fn run(&mut self) -> Result<ReportBundle, PipelineError> {
        self.run_from(Stage::Prepare)
    }

    /// Runs `from` and every later stage.
    pub fn run_from(&mut self, from: Stage) -> Result<ReportBundle, PipelineError> {
        let mut bundle = None;
        for stage in Stage::ALL.into_iter().filter(|s| *s >= from) {
            bundle = self.run_stage(stage)?;
        }
        Ok(bundle.expect("report stage returns a bundle"))
    }

    /// Runs one stage against the artifacts already in the output
    /// directory. Only the report stage returns a bundle.
    pub fn run_stage(&mut self, stage: Stage) -> Result<Option<ReportBundle>, PipelineError> {
        log::info!("stage {stage}");
        let wrap = |e: BoxError| PipelineError::new(stage, e);
        std::fs::create_dir_all(&self.config.output_dir).map_err(|e| wrap(e.into()))?;
        match stage {
            Stage::Prepare => self.prepare().map(|_| None),
            Stage::Query => self.query().map(|_| None),
            Stage::Annotate => self.annotate().map(|_| None),
            Stage::Fit => self.fit().map(|_| None),
            Stage::Report => self.report().map(Some),
        }
        .map_err(wrap)
    }

    fn prepare(&self) -> Result<(), BoxError> {
        let instances = match self.config.task {
            TaskKind::CommonsenseQa => self.prepare_commonsense()?,
            TaskKind::Relational => self.prepare_relational()?,
            TaskKind::Cnli => self.prepare_cnli()?,
        };
        jsonl::write(&self.out(INSTANCES), &instances)?;
        let rows: Vec<FactorVector> = instances.iter().map(ProbeInstance::factor_vector).collect();
        write_factors_csv(&self.out(FACTORS), &rows)?;
        log::info!("prepared {} instances", instances.len());
        Ok(())
    }

    fn prepare_commonsense(&self) -> Result<Vec<ProbeInstance>, BoxError> {
        let sec = self.config.commonsense.as_ref().ok_or("config has no `commonsense` section")?;
        need(&sec.corpus, "corpus")?;
        let articles = load_corpus(&sec.corpus)?;
        let index = build_term_index(articles.iter().cloned())?;
        let records = count_frequencies(&index, &articles);
        let sample = sample_low_frequency_terms(&records, sec.percentile, sec.num_terms, self.config.seed)?;
        let matcher = TermMatcher::new(&index);
        let template =
            PromptTemplate::builtin(&sec.template).ok_or_else(|| format!("unknown prompt template `{}`", sec.template))?;
        let mut items = Vec::with_capacity(sample.len());
        for r in &sample {
            let entry = index.get(&r.term).ok_or_else(|| format!("sampled term `{}` missing from index", r.term))?;
            let c = complexity_metrics(&r.term, &index, &matcher)?;
            let factors = BTreeMap::from([
                ("frequency".to_string(), r.count as f64),
                ("article_len".to_string(), c.article_len as f64),
                ("linked_term_count".to_string(), c.linked_term_count as f64),
                ("linked_len_sum".to_string(), c.linked_len_sum as f64),
            ]);
            items.push((entry.raw_title.clone(), entry.body_text.clone(), factors));
        }
        Ok(render_commonsense_batch(&items, &template)?)
    }

    fn prepare_relational(&self) -> Result<Vec<ProbeInstance>, BoxError> {
        let sec = self.config.relational.as_ref().ok_or("config has no `relational` section")?;
        let seed = self.config.seed;
        let mut theories: Vec<TheoryInstance> = Vec::new();
        let mut cell = 0u64;
        for &f in &sec.num_facts {
            for &r in &sec.num_rules {
                for &a in &sec.num_arguments {
                    let cfg = GenerationConfig {
                        num_facts: f,
                        num_rules: r,
                        num_arguments: a,
                        seed: seed.wrapping_mul(0x9E37_79B9).wrapping_add(cell),
                        ..sec.base.clone()
                    };
                    theories.extend(generate_batch(&format!("rel-f{f}-r{r}-a{a}"), &cfg, sec.per_cell)?);
                    cell += 1;
                }
            }
        }
        let pool_cfg = GenerationConfig { seed: seed.wrapping_add(0x5EED), ..sec.base.clone() };
        let pool = generate_batch("pool", &pool_cfg, sec.pool_size)?;
        jsonl::write(&self.out(THEORIES), &theories)?;
        let mut out = Vec::new();
        for (i, t) in theories.iter().enumerate() {
            for &k in &sec.fewshot_n {
                let mut p = assemble_fewshot_prompt(t, &pool, k, seed.wrapping_add(i as u64))?;
                p.id = format!("{}-k{k}", t.id);
                out.push(p);
            }
        }
        Ok(out)
    }

    fn prepare_cnli(&self) -> Result<Vec<ProbeInstance>, BoxError> {
        let sec = self.config.cnli.as_ref().ok_or("config has no `cnli` section")?;
        need(&sec.chains, "chains file")?;
        need(&sec.pairs, "verified pairs file")?;
        let chains = read_chains(&sec.chains)?;
        let pairs: Vec<StatementPair> = jsonl::read(&sec.pairs)?;
        let live = match &sec.scorer_url {
            Some(url) => {
                let live = HttpScorer::new(url.clone(), sec.scorer_model_tag.clone())?;
                let h = live.ensure_ready()?;
                log::info!("scorer ready: {} (tokenizer {})", h.model_tag, h.tokenizer_version);
                Some(live)
            }
            None => None,
        };
        let scorer: Box<dyn PllScorer> = match (&sec.scores, live) {
            (Some(path), live) => {
                need(path, "scores file")?;
                let file = FileScores::load(path, sec.scorer_model_tag.clone())?;
                match live {
                    Some(l) => Box::new(file.with_fallback(Box::new(l))),
                    None => Box::new(file),
                }
            }
            (None, Some(l)) => Box::new(l),
            (None, None) => return Err("cnli needs `scores` or `scorer_url`".into()),
        };
        let window = LengthWindow { min_tokens: sec.min_tokens, max_tokens: sec.max_tokens };
        let (instances, report) = build_instances(&chains, &pairs, scorer.as_ref(), window)?;
        for (chain, reason) in &report.skipped {
            log::warn!("chain `{chain}` skipped: {reason}");
        }
        jsonl::write(&self.out(CNLI_INSTANCES), &instances)?;
        instances
            .iter()
            .filter(|i| sec.include_baseline || !i.is_baseline)
            .map(|i| build_cnli_prompt(i, &sec.template).map_err(Into::into))
            .collect()
    }

    fn gateway(&mut self) -> Result<Gateway, BoxError> {
        let provider: Arc<dyn Provider> = match &self.provider {
            Some(p) => p.clone(),
            None => match self.config.provider {
                ProviderKind::Mock => Arc::new(MockProvider::deterministic()),
                ProviderKind::Http => Arc::new(HttpChatProvider::from_env()?),
            },
        };
        let mut opts = GatewayOptions { fresh: self.config.fresh, ..Default::default() };
        if let Some(m) = self.config.max_tokens {
            opts.max_tokens = m;
        }
        Ok(Gateway::new(Box::new(provider), self.out("cache"), opts))
    }

    fn query(&mut self) -> Result<(), BoxError> {
        let path = self.out(INSTANCES);
        need(&path, "instances file")?;
        let instances: Vec<ProbeInstance> = jsonl::read(&path)?;
        let gateway = self.gateway()?;
        for model in &self.config.models {
            let entries = gateway.batch_run(&instances, model, self.config.parallelism, &self.out(RESPONSES))?;
            let failed = entries.iter().filter(|e| e.error.is_some()).count();
            if failed > 0 {
                log::warn!("{model}: {failed} of {} requests failed; see {RESPONSES}", entries.len());
            }
        }
        Ok(())
    }

    fn verdicts(&self) -> Result<Option<VerdictSet>, BoxError> {
        let Some(path) = &self.config.annotations else { return Ok(None) };
        need(path, "annotations file")?;
        let mut set = ingest_annotations(path)?;
        if let [only] = self.config.models.as_slice() {
            if set.iter().any(|v| v.model_id.is_empty()) {
                let filled: Result<VerdictSet, _> = set
                    .iter()
                    .cloned()
                    .map(|mut v| {
                        if v.model_id.is_empty() {
                            v.model_id = only.clone();
                        }
                        v
                    })
                    .collect();
                set = filled?;
            }
        }
        Ok(Some(set))
    }

    fn annotate(&self) -> Result<(), BoxError> {
        let path = self.out(INSTANCES);
        need(&path, "instances file")?;
        let ids: BTreeSet<String> = jsonl::read::<ProbeInstance>(&path)?.into_iter().map(|p| p.id).collect();
        let models: BTreeSet<&String> = self.config.models.iter().collect();
        let (labels, review) = match self.config.task {
            TaskKind::Relational => self.relational_labels(&ids)?,
            _ => {
                let set = self.verdicts()?.ok_or("this task needs an `annotations` file")?;
                let labels: Vec<HallucinationLabel> = aggregate_set(&set)?
                    .into_iter()
                    .filter(|l| ids.contains(&l.instance_id) && models.contains(&l.model_id))
                    .collect();
                (labels, Vec::new())
            }
        };
        if labels.is_empty() {
            return Err("no labels for the instances and models of this run".into());
        }
        write_labels(&self.out(LABELS), &labels)?;
        jsonl::write(&self.out(REVIEW), &review)?;
        if !review.is_empty() {
            log::warn!("{} responses need manual review; see {REVIEW}", review.len());
        }
        Ok(())
    }

    fn relational_labels(&self, ids: &BTreeSet<String>) -> Result<(Vec<HallucinationLabel>, Vec<ReviewItem>), BoxError> {
        need(&self.out(THEORIES), "theories file")?;
        need(&self.out(RESPONSES), "response log")?;
        let theories: HashMap<String, TheoryInstance> =
            jsonl::read::<TheoryInstance>(&self.out(THEORIES))?.into_iter().map(|t| (t.id.clone(), t)).collect();
        let pattern = AnswerPattern::default();
        let mut labels = Vec::new();
        let mut review = Vec::new();
        for e in latest_entries(&read_response_log(&self.out(RESPONSES))?) {
            if !ids.contains(&e.instance_id) || !self.config.models.contains(&e.model_id) {
                continue;
            }
            let item = |reason: &str| ReviewItem {
                instance_id: e.instance_id.clone(),
                model_id: e.model_id.clone(),
                reason: reason.to_string(),
            };
            let Some(resp) = &e.response else {
                review.push(item("no response recorded"));
                continue;
            };
            let theory_id = e.instance_id.rsplit_once("-k").map_or(e.instance_id.as_str(), |x| x.0);
            let t = theories.get(theory_id).ok_or_else(|| format!("no theory for `{}`", e.instance_id))?;
            let AnswerExtraction::Answer(claimed) = extract_answer(&resp.raw_text, &pattern) else {
                review.push(item("no True/False answer found"));
                continue;
            };
            let chain = transcribe_chain(&resp.raw_text, &t.theory);
            let verdict = verify_reasoning_chain(&t.theory, &chain, &t.question, claimed);
            labels.push(relational_label(&e.instance_id, &e.model_id, claimed == t.gold_label, Some(&verdict))?);
        }
        Ok((labels, review))
    }

    fn spec(&self) -> FactorSpec {
        self.config.factor_spec.clone().unwrap_or_else(|| default_factor_spec(self.config.task))
    }

    fn fit(&self) -> Result<(), BoxError> {
        let labels_path = self.out(LABELS);
        if !labels_path.exists() {
            return Err(format!(
                "labels file `{}` is missing; rerun the annotate stage to rebuild it",
                labels_path.display()
            )
            .into());
        }
        need(&self.out(FACTORS), "factors file")?;
        let labels = read_labels(&labels_path)?;
        let factors = read_factors_csv(&self.out(FACTORS))?;
        let spec = self.spec();
        let mut fits = Vec::new();
        for model in &self.config.models {
            let ys: BTreeMap<String, u8> =
                labels.iter().filter(|l| &l.model_id == model).map(|l| (l.instance_id.clone(), l.label)).collect();
            if ys.is_empty() {
                log::warn!("no labels for model `{model}`, skipped");
                continue;
            }
            let (x, y) = build_design_matrix::<f64>(&factors, &ys, &spec)?;
            let result = fit_logistic(&x, &y, &Default::default()).map_err(|e| format!("model `{model}`: {e}"))?;
            fits.push(ModelFit { model_id: model.clone(), result });
        }
        if fits.is_empty() {
            return Err("no model had labels to fit".into());
        }
        let mut json = serde_json::to_string_pretty(&fits)?;
        json.push('\n');
        std::fs::write(self.out(FITS), json)?;
        Ok(())
    }

    fn report(&self) -> Result<ReportBundle, BoxError> {
        for (name, what) in [(FITS, "fit results"), (LABELS, "labels file"), (FACTORS, "factors file")] {
            need(&self.out(name), what)?;
        }
        let fits: Vec<ModelFit> = serde_json::from_slice(&std::fs::read(self.out(FITS))?)?;
        let labels = read_labels(&self.out(LABELS))?;
        let factors = read_factors_csv(&self.out(FACTORS))?;
        let rows: Vec<(String, &RegressionResult)> = fits.iter().map(|f| (f.model_id.clone(), &f.result)).collect();
        let table = coefficient_table(self.config.task.as_str(), &rows)?;
        let risk: Vec<String> =
            self.spec().columns.iter().filter(|c| c.role == FactorRole::RiskFactor).map(|c| c.name.clone()).collect();
        let rates = rate_summary(&labels, &factors, &risk, self.config.bins);

        let mut inputs = BTreeMap::new();
        if self.out(RESPONSES).exists() {
            inputs.insert("responses:content".into(), response_content_digest(&self.out(RESPONSES))?);
        }
        let mut add = |key: String, path: &Path| -> Result<(), BoxError> {
            if path.exists() {
                inputs.insert(key, file_digest(path)?);
            }
            Ok(())
        };
        for name in [INSTANCES, FACTORS, THEORIES, CNLI_INSTANCES, LABELS, FITS] {
            add(format!("artifact:{name}"), &self.out(name))?;
        }
        if let Some(a) = &self.config.annotations {
            add("input:annotations".into(), a)?;
        }
        if let Some(c) = &self.config.commonsense {
            add("input:corpus".into(), &c.corpus)?;
        }
        if let Some(c) = &self.config.cnli {
            add("input:chains".into(), &c.chains)?;
            add("input:pairs".into(), &c.pairs)?;
            if let Some(s) = &c.scores {
                add("input:scores".into(), s)?;
            }
        }
        let agreement = match self.config.task {
            TaskKind::Relational => None,
            _ => self.verdicts()?.as_ref().and_then(percent_agreement),
        };
        let bundle = ReportBundle {
            task: self.config.task.as_str().to_string(),
            tables: vec![table],
            rates,
            annotator_agreement: agreement,
            provenance: Provenance {
                config_digest: self.config_digest.clone(),
                inputs,
                software_version: env!("CARGO_PKG_VERSION").to_string(),
                seed: self.config.seed,
            },
        };
        bundle.write(&self.out(REPORT_DIR))?;
        Ok(bundle)
    }
}
