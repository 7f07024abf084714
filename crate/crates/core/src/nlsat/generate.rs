use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    forward_chain, label_question, Atom, ConfigEcho, GroundLiteral, Literal, NlsatError, Rule, Term, Theory, TheoryInstance,
    Vocabulary, ENTITY_NAMES, PREDICATE_NAMES,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub num_arguments: usize,
    pub num_predicates: usize,
    pub num_facts: usize,
    pub num_rules: usize,
    pub max_depth: usize,
    pub target_label: bool,
    pub seed: u64,
    /// Largest rule body; each rule draws its size from `1..=body_size`.
    pub body_size: usize,
    pub negation_prob: f64,
    pub ground_rule_prob: f64,
    pub max_retries: usize,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            num_arguments: 3,
            num_predicates: 5,
            num_facts: 4,
            num_rules: 4,
            max_depth: 3,
            target_label: true,
            seed: 0,
            body_size: 2,
            negation_prob: 0.2,
            ground_rule_prob: 0.15,
            max_retries: 2000,
        }
    }
}

impl GenerationConfig {
    fn validate(&self) -> Result<(), NlsatError> {
        let bad = |m: String| Err(NlsatError::InvalidConfig(m));
        if self.num_arguments == 0 || self.num_predicates == 0 || self.num_facts == 0 {
            return bad("argument, predicate and fact counts must be at least 1".into());
        }
        if self.num_arguments > ENTITY_NAMES.len() || self.num_predicates > PREDICATE_NAMES.len() {
            return bad(format!("at most {} arguments and {} predicates", ENTITY_NAMES.len(), PREDICATE_NAMES.len()));
        }
        if self.num_facts > self.num_arguments * self.num_predicates {
            return bad(format!("{} facts exceed the {} distinct ground atoms", self.num_facts, self.num_arguments * self.num_predicates));
        }
        if !(1..=3).contains(&self.body_size) {
            return bad("body_size must be 1..=3".into());
        }
        if self.num_rules > 0 && self.num_predicates < 2 {
            return bad("rules need at least two predicates".into());
        }
        Ok(())
    }

    /// Deepest target depth a planted chain can reach under this config.
    fn reachable_depth(&self) -> usize {
        let free_atoms = self.num_arguments * self.num_predicates - self.num_facts;
        self.max_depth.min(self.num_rules).min(self.num_predicates.saturating_sub(1)).min(free_atoms)
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            num_facts: self.num_facts,
            num_rules: self.num_rules,
            num_arguments: self.num_arguments,
            num_predicates: self.num_predicates,
            max_depth: self.max_depth,
            seed: self.seed,
        }
    }
}

fn random_rule(cfg: &GenerationConfig, rng: &mut ChaCha8Rng) -> Rule {
    let ground = rng.gen_bool(cfg.ground_rule_prob);
    let len = rng.gen_range(1..=cfg.body_size);
    let preds = index::sample(rng, cfg.num_predicates, (len + 1).min(cfg.num_predicates)).into_vec();
    let arg = |rng: &mut ChaCha8Rng| if ground { Term::Const(rng.gen_range(0..cfg.num_arguments)) } else { Term::Var };
    let body = (0..len)
        .map(|i| Literal { predicate: preds[i % preds.len()], argument: arg(rng), negated: rng.gen_bool(cfg.negation_prob) })
        .collect();
    let head = Literal { predicate: *preds.last().unwrap(), argument: arg(rng), negated: false };
    Rule { body, head }
}

fn attempt(cfg: &GenerationConfig, vocab: &Vocabulary, target_depth: usize, rng: &mut ChaCha8Rng) -> Option<(Theory, GroundLiteral)> {
    let (na, np) = (cfg.num_arguments, cfg.num_predicates);
    let mut facts = Vec::with_capacity(cfg.num_facts);
    let mut rules = Vec::with_capacity(cfg.num_rules);
    let mut reserved = Vec::new();

    if cfg.target_label && target_depth > 0 {
        // plant a chain p0(e) -> p1 -> ... -> p_d so the target depth is reachable
        let chain = index::sample(rng, np, target_depth + 1).into_vec();
        let entity = rng.gen_range(0..na);
        facts.push(Atom { predicate: chain[0], argument: entity });
        reserved.extend(chain[1..].iter().map(|&p| Atom { predicate: p, argument: entity }));
        for w in chain.windows(2) {
            let var = |p| Literal { predicate: p, argument: Term::Var, negated: false };
            rules.push(Rule { body: vec![var(w[0])], head: var(w[1]) });
        }
    }
    let mut guard = 0;
    while rules.len() < cfg.num_rules {
        guard += 1;
        if guard > 100 * (cfg.num_rules + 1) {
            return None;
        }
        let r = random_rule(cfg, rng);
        if r.body.contains(&r.head) || rules.contains(&r) {
            continue;
        }
        rules.push(r);
        // drop rules that would put a negation on a cycle
        if Theory::new(vocab.clone(), Vec::new(), rules.clone()).is_err() {
            rules.pop();
        }
    }
    let mut pool: Vec<Atom> =
        (0..np).flat_map(|p| (0..na).map(move |a| Atom { predicate: p, argument: a })).filter(|a| !facts.contains(a) && !reserved.contains(a)).collect();
    pool.shuffle(rng);
    facts.extend(pool.into_iter().take(cfg.num_facts - facts.len()));
    facts.shuffle(rng);
    rules.shuffle(rng);

    let theory = Theory::new(vocab.clone(), facts, rules).ok()?;
    let closure = forward_chain(&theory);
    let question = if cfg.target_label {
        let candidates: Vec<Atom> = closure.depth.iter().filter(|(_, &d)| d == target_depth).map(|(a, _)| *a).collect();
        GroundLiteral { atom: *candidates.choose(rng)?, negated: false }
    } else if rng.gen_bool(0.5) {
        let candidates: Vec<Atom> = (0..np)
            .flat_map(|p| (0..na).map(move |a| Atom { predicate: p, argument: a }))
            .filter(|a| !closure.contains(a))
            .collect();
        GroundLiteral { atom: *candidates.choose(rng)?, negated: false }
    } else {
        let candidates: Vec<Atom> = closure.depth.iter().filter(|(_, &d)| d <= cfg.max_depth).map(|(a, _)| *a).collect();
        GroundLiteral { atom: *candidates.choose(rng)?, negated: true }
    };
    Some((theory, question))
}

/// Generates one instance by rejection sampling. With `target_label` set
/// the question is a positive atom whose depth equals a target drawn
/// uniformly from `0..=min(max_depth, num_rules, num_predicates - 1)`, further
/// capped by the number of ground atoms that are not facts;
/// otherwise it is either an underivable atom or the negation of a
/// derivable one.
pub fn generate_theory(id: impl Into<String>, cfg: &GenerationConfig) -> Result<TheoryInstance, NlsatError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut names: Vec<String> =
        index::sample(&mut rng, ENTITY_NAMES.len(), cfg.num_arguments).into_iter().map(|i| ENTITY_NAMES[i].to_string()).collect();
    names.sort_by_key(|n| ENTITY_NAMES.iter().position(|e| e == n));
    let mut preds: Vec<String> = index::sample(&mut rng, PREDICATE_NAMES.len(), cfg.num_predicates)
        .into_iter()
        .map(|i| PREDICATE_NAMES[i].to_string())
        .collect();
    preds.sort_by_key(|n| PREDICATE_NAMES.iter().position(|e| e == n));
    let vocab = Vocabulary { arguments: names, predicates: preds };
    let target_depth = rng.gen_range(0..=cfg.reachable_depth());

    for _ in 0..cfg.max_retries {
        let Some((theory, question)) = attempt(cfg, &vocab, target_depth, &mut rng) else { continue };
        let closure = forward_chain(&theory);
        let label = label_question(&theory, &closure, &question)?;
        debug_assert_eq!(label.label, cfg.target_label);
        if label.depth > cfg.max_depth {
            continue;
        }
        return Ok(TheoryInstance {
            id: id.into(),
            theory,
            question,
            gold_label: label.label,
            gold_depth: label.depth,
            gold_proof: label.proof,
            config_echo: cfg.echo(),
        });
    }
    Err(NlsatError::GenerationExhausted(cfg.max_retries))
}

/// Generates `count` instances with per-instance seeds derived from
/// `base.seed`, alternating the target label (even indices true).
pub fn generate_batch(prefix: &str, base: &GenerationConfig, count: usize) -> Result<Vec<TheoryInstance>, NlsatError> {
    let mut seeds = ChaCha8Rng::seed_from_u64(base.seed);
    (0..count)
        .map(|i| {
            let cfg = GenerationConfig { seed: seeds.gen(), target_label: i % 2 == 0, ..base.clone() };
            generate_theory(format!("{prefix}-{i:04}"), &cfg)
        })
        .collect()
}
