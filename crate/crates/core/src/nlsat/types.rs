use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::NlsatError;

pub const ENTITY_NAMES: [&str; 24] = [
    "Anne", "Bob", "Charlie", "Dave", "Erin", "Fiona", "Gary", "Harry", "Ivy", "Jack", "Kate", "Liam", "Mona", "Nick",
    "Olga", "Paul", "Quinn", "Rosa", "Sam", "Tina", "Umar", "Vera", "Walt", "Xena",
];

pub const PREDICATE_NAMES: [&str; 24] = [
    "red", "kind", "green", "big", "blue", "cold", "nice", "young", "round", "rough", "smart", "white", "quiet",
    "furry", "tall", "old", "calm", "rich", "loud", "soft", "bright", "wise", "shy", "brave",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub arguments: Vec<String>,
    pub predicates: Vec<String>,
}

impl Vocabulary {
    pub fn validate(&self) -> Result<(), NlsatError> {
        for (kind, names) in [("argument", &self.arguments), ("predicate", &self.predicates)] {
            let mut seen = HashSet::new();
            for n in names {
                if n.trim().is_empty() {
                    return Err(NlsatError::Malformed(format!("empty {kind} name")));
                }
                if !seen.insert(n.to_lowercase()) {
                    return Err(NlsatError::Malformed(format!("duplicate {kind} `{n}`")));
                }
            }
        }
        Ok(())
    }

    pub fn argument_index(&self, name: &str) -> Option<usize> {
        self.arguments.iter().position(|a| a.eq_ignore_ascii_case(name))
    }

    pub fn predicate_index(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.eq_ignore_ascii_case(name))
    }
}

/// Ground atom `predicate(argument)` over vocabulary indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: usize,
    pub argument: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    /// The rule's single shared variable.
    Var,
    Const(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub predicate: usize,
    pub argument: Term,
    #[serde(default)]
    pub negated: bool,
}

impl Literal {
    pub fn ground(&self, binding: Option<usize>) -> Option<Atom> {
        let argument = match self.argument {
            Term::Const(c) => c,
            Term::Var => binding?,
        };
        Some(Atom { predicate: self.predicate, argument })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundLiteral {
    pub atom: Atom,
    #[serde(default)]
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub body: Vec<Literal>,
    pub head: Literal,
}

impl Rule {
    pub fn has_var(&self) -> bool {
        self.head.argument == Term::Var || self.body.iter().any(|l| l.argument == Term::Var)
    }

    /// Candidate bindings: every argument for variable rules, a single
    /// empty binding for ground rules.
    pub fn bindings(&self, num_arguments: usize) -> Vec<Option<usize>> {
        if self.has_var() {
            (0..num_arguments).map(Some).collect()
        } else {
            vec![None]
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TheoryData {
    vocabulary: Vocabulary,
    facts: Vec<Atom>,
    rules: Vec<Rule>,
}

/// A validated theory: symbols in range, positive non-duplicated facts,
/// positive rule heads with variables bound by the body, and no recursion
/// through negation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TheoryData")]
pub struct Theory {
    pub vocabulary: Vocabulary,
    pub facts: Vec<Atom>,
    pub rules: Vec<Rule>,
    #[serde(skip)]
    strata: Vec<usize>,
}

impl TryFrom<TheoryData> for Theory {
    type Error = NlsatError;

    fn try_from(d: TheoryData) -> Result<Self, Self::Error> {
        Theory::new(d.vocabulary, d.facts, d.rules)
    }
}

impl Theory {
    pub fn new(vocabulary: Vocabulary, facts: Vec<Atom>, rules: Vec<Rule>) -> Result<Self, NlsatError> {
        vocabulary.validate()?;
        let (na, np) = (vocabulary.arguments.len(), vocabulary.predicates.len());
        let atom_ok = |a: &Atom| a.argument < na && a.predicate < np;
        let mut seen = HashSet::new();
        for f in &facts {
            if !atom_ok(f) {
                return Err(NlsatError::VocabularyError(format!("fact {f:?}")));
            }
            if !seen.insert(*f) {
                return Err(NlsatError::Malformed(format!("duplicate fact {f:?}")));
            }
        }
        for (i, r) in rules.iter().enumerate() {
            let lit_ok = |l: &Literal| {
                l.predicate < np
                    && match l.argument {
                        Term::Var => true,
                        Term::Const(c) => c < na,
                    }
            };
            if r.body.is_empty() {
                return Err(NlsatError::Malformed(format!("rule {i} has an empty body")));
            }
            if !lit_ok(&r.head) || !r.body.iter().all(lit_ok) {
                return Err(NlsatError::VocabularyError(format!("rule {i}")));
            }
            if r.head.negated {
                return Err(NlsatError::Malformed(format!("rule {i} has a negated head")));
            }
            if r.body.contains(&r.head) {
                return Err(NlsatError::Malformed(format!("rule {i} head repeats a body literal")));
            }
            if r.head.argument == Term::Var && !r.body.iter().any(|l| l.argument == Term::Var) {
                return Err(NlsatError::Malformed(format!("rule {i} head variable does not occur in the body")));
            }
        }
        let strata = stratify(&vocabulary, &rules)?;
        Ok(Theory { vocabulary, facts, rules, strata })
    }

    /// Stratum of each predicate; negated body predicates sit strictly
    /// below the rule head's stratum.
    pub fn strata(&self) -> &[usize] {
        &self.strata
    }

    pub fn num_strata(&self) -> usize {
        self.strata.iter().max().map_or(1, |m| m + 1)
    }

    pub fn check_atom(&self, a: &Atom) -> Result<(), NlsatError> {
        if a.argument < self.vocabulary.arguments.len() && a.predicate < self.vocabulary.predicates.len() {
            Ok(())
        } else {
            Err(NlsatError::VocabularyError(format!("atom {a:?}")))
        }
    }
}

fn stratify(vocab: &Vocabulary, rules: &[Rule]) -> Result<Vec<usize>, NlsatError> {
    let np = vocab.predicates.len();
    let mut strata = vec![0usize; np];
    loop {
        let mut changed = false;
        for r in rules {
            let h = r.head.predicate;
            for l in &r.body {
                let need = strata[l.predicate] + usize::from(l.negated);
                if strata[h] < need {
                    strata[h] = need;
                    changed = true;
                    if need >= np {
                        return Err(NlsatError::Unstratifiable(vocab.predicates[h].clone()));
                    }
                }
            }
        }
        if !changed {
            return Ok(strata);
        }
    }
}

/// One rule application (or, with `rule` absent, a citation of a fact).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProofStep {
    pub rule: Option<usize>,
    #[serde(default)]
    pub binding: Option<usize>,
    pub derived: Atom,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTrace {
    pub steps: Vec<ProofStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub num_facts: usize,
    pub num_rules: usize,
    pub num_arguments: usize,
    pub num_predicates: usize,
    pub max_depth: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryInstance {
    pub id: String,
    pub theory: Theory,
    pub question: GroundLiteral,
    pub gold_label: bool,
    pub gold_depth: usize,
    /// Absent exactly when the label rests on closed-world failure.
    pub gold_proof: Option<ProofTrace>,
    pub config_echo: ConfigEcho,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> Vocabulary {
        Vocabulary { arguments: vec!["Anne".into(), "Bob".into()], predicates: vec!["red".into(), "kind".into(), "big".into()] }
    }

    fn lit(p: usize, neg: bool) -> Literal {
        Literal { predicate: p, argument: Term::Var, negated: neg }
    }

    #[test]
    fn rejects_malformed() {
        let v = vocab();
        let f = Atom { predicate: 0, argument: 0 };
        assert!(Theory::new(v.clone(), vec![f, f], vec![]).is_err());
        assert!(Theory::new(v.clone(), vec![Atom { predicate: 9, argument: 0 }], vec![]).is_err());
        let same = Rule { body: vec![lit(0, false)], head: lit(0, false) };
        assert!(Theory::new(v.clone(), vec![], vec![same]).is_err());
        let unbound = Rule { body: vec![Literal { predicate: 0, argument: Term::Const(0), negated: false }], head: lit(1, false) };
        assert!(Theory::new(v.clone(), vec![], vec![unbound]).is_err());
        let neg_head = Rule { body: vec![lit(0, false)], head: lit(1, true) };
        assert!(Theory::new(v, vec![], vec![neg_head]).is_err());
    }

    #[test]
    fn negation_cycle_is_unstratifiable() {
        let rules = vec![Rule { body: vec![lit(0, true)], head: lit(1, false) }, Rule { body: vec![lit(1, false)], head: lit(0, false) }];
        assert!(matches!(Theory::new(vocab(), vec![], rules), Err(NlsatError::Unstratifiable(_))));
        let ok = vec![Rule { body: vec![lit(0, true)], head: lit(1, false) }, Rule { body: vec![lit(1, false)], head: lit(2, false) }];
        let t = Theory::new(vocab(), vec![], ok).unwrap();
        assert_eq!(t.strata(), &[0, 1, 1]);
    }

    #[test]
    fn serde_revalidates() {
        let t = Theory::new(vocab(), vec![Atom { predicate: 0, argument: 1 }], vec![Rule { body: vec![lit(0, true)], head: lit(1, false) }]).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        let back: Theory = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.strata(), t.strata());
        let bad = json.replace("\"predicate\":0,\"argument\":1", "\"predicate\":7,\"argument\":1");
        assert!(serde_json::from_str::<Theory>(&bad).is_err());
    }
}
