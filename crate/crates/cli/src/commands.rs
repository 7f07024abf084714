use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use riskprobe::annotation::{aggregate_set, ingest_annotations, percent_agreement, write_labels, read_labels};
use riskprobe::cnli::{
    build_cnli_prompt, build_instances, ingest_verification, propose_for_chains, read_chains, CnliInstance, FileScores,
    HttpScorer, LengthWindow, PllScorer, StatementPair, VerificationVerdict,
};
use riskprobe::corpus_stats::{
    build_term_index, complexity_metrics, count_frequencies, load_corpus, render_commonsense_batch,
    sample_low_frequency_terms, PromptTemplate, TermMatcher,
};
use riskprobe::jsonl;
use riskprobe::llm_gateway::{Gateway, GatewayOptions, HttpChatProvider, MockProvider, Provider};
use riskprobe::nlsat::{assemble_fewshot_prompt, generate_batch, ruletaker, GenerationConfig, TheoryInstance};
use riskprobe::pipeline::{default_factor_spec, ModelFit, Pipeline, Stage};
use riskprobe::probe::{read_factors_csv, write_factors_csv};
use riskprobe::regression::{build_design_matrix, fit_logistic, FactorRole, FactorSpec};
use riskprobe::report::{coefficient_table, rate_summary, file_digest, Provenance, ReportBundle};
use riskprobe::{FactorVector, ProbeInstance, TaskKind};

use crate::{Cli, Command};

#[derive(Clone, Copy, ValueEnum)]
pub enum CorpusAction {
    Index,
    Count,
    Complexity,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum CnliAction {
    Propose,
    IngestVerdicts,
    Score,
    Render,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ProviderArg {
    Mock,
    Http,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum StageArg {
    Prepare,
    Query,
    Annotate,
    Fit,
    Report,
}

impl From<StageArg> for Stage {
    fn from(s: StageArg) -> Self {
        match s {
            StageArg::Prepare => Stage::Prepare,
            StageArg::Query => Stage::Query,
            StageArg::Annotate => Stage::Annotate,
            StageArg::Fit => Stage::Fit,
            StageArg::Report => Stage::Report,
        }
    }
}

struct Ctx {
    seed: Option<u64>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
}

impl Ctx {
    fn out(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn path(&self, given: &Option<PathBuf>, default_name: &str) -> PathBuf {
        given.clone().unwrap_or_else(|| self.out().join(default_name))
    }

    fn pipeline(&self, fresh: bool) -> Result<Option<Pipeline>> {
        let Some(path) = &self.config else { return Ok(None) };
        let mut p = Pipeline::from_file(path)?;
        let cfg = p.config_mut();
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        cfg.fresh |= fresh;
        Ok(Some(p))
    }
}

fn provider(kind: ProviderArg) -> Result<Arc<dyn Provider>> {
    Ok(match kind {
        ProviderArg::Mock => Arc::new(MockProvider::deterministic()),
        ProviderArg::Http => Arc::new(HttpChatProvider::from_env()?),
    })
}

fn task(s: &Option<String>) -> Result<TaskKind> {
    s.as_deref().ok_or_else(|| anyhow!("--task is required without --config"))?.parse().map_err(|e: String| anyhow!(e))
}

fn write_fits(path: &Path, fits: &[ModelFit]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut s = serde_json::to_string_pretty(fits)?;
    s.push('\n');
    std::fs::write(path, s).with_context(|| path.display().to_string())
}

fn done(what: &str, path: &Path) {
    println!("{what} -> {}", path.display());
}

pub fn dispatch(cli: Cli) -> Result<()> {
    let ctx = Ctx { seed: cli.seed, out: cli.out, config: cli.config };
    match cli.command {
        Command::CorpusStats(a) => corpus_stats(&ctx, a),
        Command::SampleTerms(a) => sample_terms(&ctx, a),
        Command::GenNlsat(a) => gen_nlsat(&ctx, a),
        Command::BuildCnli(a) => build_cnli(&ctx, a),
        Command::Query(a) => query(&ctx, a),
        Command::IngestAnnotations(a) => ingest(&ctx, a),
        Command::Factors(a) => factors(&ctx, a),
        Command::Fit(a) => fit(&ctx, a),
        Command::Report(a) => report(&ctx, a),
        Command::Run(a) => run(&ctx, a),
    }
}

fn corpus_stats(ctx: &Ctx, a: crate::CorpusStatsArgs) -> Result<()> {
    let articles = load_corpus(&a.corpus)?;
    let index = build_term_index(articles.iter().cloned())?;
    let out = ctx.out();
    match a.action {
        CorpusAction::Index => {
            let rows: Vec<_> = index
                .entries
                .iter()
                .map(|(k, e)| serde_json::json!({"term": k, "title": e.raw_title, "article_len": e.body.len()}))
                .collect();
            let path = out.join("terms.jsonl");
            jsonl::write(&path, &rows)?;
            done(&format!("{} terms", rows.len()), &path);
        }
        CorpusAction::Count => {
            let recs = count_frequencies(&index, &articles);
            let path = out.join("frequencies.jsonl");
            jsonl::write(&path, &recs)?;
            done(&format!("{} counts", recs.len()), &path);
        }
        CorpusAction::Complexity => {
            let matcher = TermMatcher::new(&index);
            let terms: Vec<String> =
                if a.terms.is_empty() { index.entries.keys().cloned().collect() } else { a.terms.clone() };
            let recs = terms.iter().map(|t| complexity_metrics(t, &index, &matcher)).collect::<Result<Vec<_>, _>>()?;
            let path = out.join("complexity.jsonl");
            jsonl::write(&path, &recs)?;
            done(&format!("{} records", recs.len()), &path);
        }
    }
    Ok(())
}

fn sample_terms(ctx: &Ctx, a: crate::SampleTermsArgs) -> Result<()> {
    let articles = load_corpus(&a.corpus)?;
    let index = build_term_index(articles.iter().cloned())?;
    let recs = count_frequencies(&index, &articles);
    let sample = sample_low_frequency_terms(&recs, a.percentile, a.n, ctx.seed())?;
    let matcher = TermMatcher::new(&index);
    let template = PromptTemplate::builtin(&a.template).ok_or_else(|| anyhow!("unknown template `{}`", a.template))?;
    let mut items = Vec::new();
    for r in &sample {
        let e = index.get(&r.term).expect("sampled from index");
        let c = complexity_metrics(&r.term, &index, &matcher)?;
        let f = BTreeMap::from([
            ("frequency".to_string(), r.count as f64),
            ("article_len".to_string(), c.article_len as f64),
            ("linked_term_count".to_string(), c.linked_term_count as f64),
            ("linked_len_sum".to_string(), c.linked_len_sum as f64),
        ]);
        items.push((e.raw_title.clone(), e.body_text.clone(), f));
    }
    let instances = render_commonsense_batch(&items, &template)?;
    let out = ctx.out();
    jsonl::write(&out.join("sampled_terms.jsonl"), &sample)?;
    write_instances(&out, &instances)
}

fn write_instances(out: &Path, instances: &[ProbeInstance]) -> Result<()> {
    let path = out.join("instances.jsonl");
    jsonl::write(&path, instances)?;
    let rows: Vec<FactorVector> = instances.iter().map(ProbeInstance::factor_vector).collect();
    write_factors_csv(&out.join("factors.csv"), &rows)?;
    done(&format!("{} instances", instances.len()), &path);
    Ok(())
}

fn gen_nlsat(ctx: &Ctx, a: crate::GenNlsatArgs) -> Result<()> {
    let out = ctx.out();
    let theories: Vec<TheoryInstance> = match &a.ruletaker {
        Some(path) => {
            let records: Vec<serde_json::Value> = jsonl::read(path)?;
            let mut all = Vec::new();
            let mut issues = Vec::new();
            for r in &records {
                let (inst, iss) = ruletaker::import_record(r);
                all.extend(inst);
                issues.extend(iss.into_iter().map(|i| serde_json::json!({"id": i.id, "message": i.message})));
            }
            jsonl::write(&out.join("import_issues.jsonl"), &issues)?;
            println!("imported {} questions from {} records, {} issues", all.len(), records.len(), issues.len());
            all
        }
        None => {
            let cfg = GenerationConfig {
                num_arguments: a.num_args,
                num_predicates: a.num_preds,
                num_facts: a.num_facts,
                num_rules: a.num_rules,
                max_depth: a.max_depth,
                seed: ctx.seed(),
                ..Default::default()
            };
            generate_batch("nlsat", &cfg, a.count)?
        }
    };
    let path = out.join("theories.jsonl");
    jsonl::write(&path, &theories)?;
    done(&format!("{} theories", theories.len()), &path);
    if !a.fewshot_n.is_empty() {
        let pool_cfg = GenerationConfig { seed: ctx.seed().wrapping_add(0x5EED), ..Default::default() };
        let pool = generate_batch("pool", &pool_cfg, a.pool_size)?;
        let mut prompts = Vec::new();
        for (i, t) in theories.iter().enumerate() {
            for &k in &a.fewshot_n {
                let mut p = assemble_fewshot_prompt(t, &pool, k, ctx.seed().wrapping_add(i as u64))?;
                p.id = format!("{}-k{k}", t.id);
                prompts.push(p);
            }
        }
        write_instances(&out, &prompts)?;
    }
    Ok(())
}

fn scorer(a: &crate::BuildCnliArgs) -> Result<Box<dyn PllScorer>> {
    let live = a.scorer_url.as_ref().map(|u| HttpScorer::new(u.clone(), a.model_tag.clone())).transpose()?;
    Ok(match (&a.scores, live) {
        (Some(p), Some(l)) => Box::new(FileScores::load(p, a.model_tag.clone())?.with_fallback(Box::new(l))),
        (Some(p), None) => Box::new(FileScores::load(p, a.model_tag.clone())?),
        (None, Some(l)) => Box::new(l),
        (None, None) => bail!("--scores or --scorer-url is required"),
    })
}

fn build_cnli(ctx: &Ctx, a: crate::BuildCnliArgs) -> Result<()> {
    let out = ctx.out();
    let need = |p: &Option<PathBuf>, flag: &str| p.clone().ok_or_else(|| anyhow!("--{flag} is required"));
    match a.action {
        CnliAction::Propose => {
            let chains = read_chains(&need(&a.chains, "chains")?)?;
            let model = a.model.clone().ok_or_else(|| anyhow!("--model is required"))?;
            let gw = Gateway::new(Box::new(provider(a.provider)?), out.join("cache"), GatewayOptions::default());
            let (pairs, failures) = propose_for_chains(&chains, &gw, &model);
            for (id, e) in &failures {
                log::warn!("{id}: {e}");
            }
            let path = out.join("pairs.jsonl");
            jsonl::write(&path, &pairs)?;
            done(&format!("{} pairs awaiting review, {} failed", pairs.len(), failures.len()), &path);
        }
        CnliAction::IngestVerdicts => {
            let pairs: Vec<StatementPair> = jsonl::read(&need(&a.pairs, "pairs")?)?;
            let verdicts: Vec<VerificationVerdict> = jsonl::read(&need(&a.verdicts, "verdicts")?)?;
            let kept = ingest_verification(pairs, &verdicts)?;
            let path = out.join("pairs.verified.jsonl");
            jsonl::write(&path, &kept)?;
            done(&format!("{} verified", kept.iter().filter(|p| p.verified).count()), &path);
        }
        CnliAction::Score => {
            let chains = read_chains(&need(&a.chains, "chains")?)?;
            let pairs: Vec<StatementPair> = jsonl::read(&need(&a.pairs, "pairs")?)?;
            let window = LengthWindow { min_tokens: a.min_tokens, max_tokens: a.max_tokens };
            let (instances, report) = build_instances(&chains, &pairs, scorer(&a)?.as_ref(), window)?;
            for (c, r) in &report.skipped {
                log::warn!("chain `{c}` skipped: {r}");
            }
            let path = out.join("cnli_instances.jsonl");
            jsonl::write(&path, &instances)?;
            done(&format!("{} instances", instances.len()), &path);
        }
        CnliAction::Render => {
            let path = a.instances.clone().unwrap_or_else(|| out.join("cnli_instances.jsonl"));
            let instances: Vec<CnliInstance> = jsonl::read(&path)?;
            let prompts =
                instances.iter().map(|i| build_cnli_prompt(i, &a.template)).collect::<Result<Vec<_>, _>>()?;
            write_instances(&out, &prompts)?;
        }
    }
    Ok(())
}

fn query(ctx: &Ctx, a: crate::QueryArgs) -> Result<()> {
    if let Some(mut p) = ctx.pipeline(a.fresh)? {
        if !a.models.is_empty() {
            p.config_mut().models = a.models.clone();
        }
        p.run_stage(Stage::Query)?;
        return Ok(());
    }
    if a.models.is_empty() {
        bail!("at least one --model is required");
    }
    let out = ctx.out();
    let instances: Vec<ProbeInstance> = jsonl::read(&ctx.path(&a.instances, "instances.jsonl"))?;
    let opts = GatewayOptions { fresh: a.fresh, ..Default::default() };
    let gw = Gateway::new(Box::new(provider(a.provider)?), out.join("cache"), opts);
    let log_path = out.join("responses.jsonl");
    for m in &a.models {
        let entries = gw.batch_run(&instances, m, a.parallelism, &log_path)?;
        let failed = entries.iter().filter(|e| e.error.is_some()).count();
        println!("{m}: {} responses, {failed} errors", entries.len());
    }
    done(&format!("{} provider calls", gw.provider_calls()), &log_path);
    Ok(())
}

fn ingest(ctx: &Ctx, a: crate::IngestArgs) -> Result<()> {
    if let Some(mut p) = ctx.pipeline(false)? {
        p.run_stage(Stage::Annotate)?;
        return Ok(());
    }
    let task = task(&a.task)?;
    if task == TaskKind::Relational {
        bail!("relational labels need --config (theories and responses come from the run directory)");
    }
    let set = ingest_annotations(&ctx.path(&a.annotations, "annotations.jsonl"))?;
    let labels = aggregate_set(&set)?;
    let path = ctx.out().join("labels.jsonl");
    write_labels(&path, &labels)?;
    if let Some(agree) = percent_agreement(&set) {
        println!("annotator agreement {:.1}%", agree * 100.0);
    }
    done(&format!("{} labels", labels.len()), &path);
    Ok(())
}

fn factors(ctx: &Ctx, a: crate::FactorsArgs) -> Result<()> {
    let instances: Vec<ProbeInstance> = jsonl::read(&ctx.path(&a.instances, "instances.jsonl"))?;
    let rows: Vec<FactorVector> = instances.iter().map(ProbeInstance::factor_vector).collect();
    let path = ctx.out().join("factors.csv");
    write_factors_csv(&path, &rows)?;
    done(&format!("{} rows", rows.len()), &path);
    Ok(())
}

fn spec_for(spec: &Option<PathBuf>, task: &Option<String>) -> Result<FactorSpec> {
    match spec {
        Some(p) => Ok(serde_json::from_slice(&std::fs::read(p)?)?),
        None => Ok(default_factor_spec(self::task(task)?)),
    }
}

fn fit(ctx: &Ctx, a: crate::FitArgs) -> Result<()> {
    if let Some(mut p) = ctx.pipeline(false)? {
        p.run_stage(Stage::Fit)?;
        return Ok(());
    }
    let labels = read_labels(&ctx.path(&a.labels, "labels.jsonl"))?;
    let factors = read_factors_csv(&ctx.path(&a.factors, "factors.csv"))?;
    let spec = spec_for(&a.spec, &a.task)?;
    let mut models: Vec<&str> = labels.iter().map(|l| l.model_id.as_str()).collect();
    models.sort();
    models.dedup();
    let mut fits = Vec::new();
    for m in models {
        let ys: BTreeMap<String, u8> =
            labels.iter().filter(|l| l.model_id == m).map(|l| (l.instance_id.clone(), l.label)).collect();
        let (x, y) = build_design_matrix::<f64>(&factors, &ys, &spec)?;
        let result = fit_logistic(&x, &y, &Default::default()).with_context(|| format!("model `{m}`"))?;
        fits.push(ModelFit { model_id: m.to_string(), result });
    }
    let rows: Vec<_> = fits.iter().map(|f| (f.model_id.clone(), &f.result)).collect();
    print!("{}", coefficient_table("coefficients", &rows)?.render(6));
    let path = ctx.out().join("fits.json");
    write_fits(&path, &fits)?;
    done("fits", &path);
    Ok(())
}

fn report(ctx: &Ctx, a: crate::ReportArgs) -> Result<()> {
    if let Some(mut p) = ctx.pipeline(false)? {
        let bundle = p.run_stage(Stage::Report)?.expect("report stage returns a bundle");
        summarize(&bundle);
        return Ok(());
    }
    let task = task(&a.task)?;
    let fits_path = ctx.path(&a.fits, "fits.json");
    let labels_path = ctx.path(&a.labels, "labels.jsonl");
    let factors_path = ctx.path(&a.factors, "factors.csv");
    let fits: Vec<ModelFit> = serde_json::from_slice(&std::fs::read(&fits_path)?)?;
    let labels = read_labels(&labels_path)?;
    let factors = read_factors_csv(&factors_path)?;
    let rows: Vec<_> = fits.iter().map(|f| (f.model_id.clone(), &f.result)).collect();
    let risk: Vec<String> = default_factor_spec(task)
        .columns
        .into_iter()
        .filter(|c| c.role == FactorRole::RiskFactor)
        .map(|c| c.name)
        .collect();
    let mut inputs = BTreeMap::new();
    for (k, p) in [("fits", &fits_path), ("labels", &labels_path), ("factors", &factors_path)] {
        inputs.insert(format!("artifact:{k}"), file_digest(p)?);
    }
    let bundle = ReportBundle {
        task: task.as_str().to_string(),
        tables: vec![coefficient_table(task.as_str(), &rows)?],
        rates: rate_summary(&labels, &factors, &risk, a.bins),
        annotator_agreement: None,
        provenance: Provenance {
            config_digest: String::new(),
            inputs,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: ctx.seed(),
        },
    };
    let dir = ctx.out().join("report");
    bundle.write(&dir)?;
    summarize(&bundle);
    done("report", &dir);
    Ok(())
}

fn summarize(bundle: &ReportBundle) {
    for t in &bundle.tables {
        print!("{}", t.render(6));
    }
    for r in bundle.rates.rows.iter().filter(|r| r.factor == "overall") {
        println!(
            "{}: hallucination rate {:.1}% ({}/{}), 95% CI [{:.1}%, {:.1}%]",
            r.model_id,
            r.rate * 100.0,
            r.k,
            r.n,
            r.ci_lower * 100.0,
            r.ci_upper * 100.0
        );
    }
}

fn run(ctx: &Ctx, a: crate::RunArgs) -> Result<()> {
    let mut p = ctx.pipeline(a.fresh)?.ok_or_else(|| anyhow!("`run` needs --config"))?;
    let bundle = p.run_from(a.from.map_or(Stage::Prepare, Stage::from))?;
    summarize(&bundle);
    done("report", &p.config().output_dir.join("report"));
    Ok(())
}
