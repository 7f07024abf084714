//! Goal-directed prover: an atom is provable within depth `d` if it is a
//! fact, or some rule instance concludes it with every positive premise
//! provable within `d - 1` and every negated premise unprovable at any
//! depth. Written without reference to the forward reasoner.

use std::collections::HashMap;

use riskprobe::nlsat::{Atom, GroundLiteral, Term, Theory};

pub struct Backward<'a> {
    theory: &'a Theory,
    memo: HashMap<(Atom, usize), bool>,
    bound: usize,
}

impl<'a> Backward<'a> {
    pub fn new(theory: &'a Theory) -> Self {
        // no minimal derivation is longer than the number of ground atoms
        let bound = theory.vocabulary.arguments.len() * theory.vocabulary.predicates.len() + 1;
        Backward { theory, memo: HashMap::new(), bound }
    }

    pub fn provable_within(&mut self, atom: Atom, d: usize) -> bool {
        if self.theory.facts.contains(&atom) {
            return true;
        }
        if d == 0 {
            return false;
        }
        if let Some(&v) = self.memo.get(&(atom, d)) {
            return v;
        }
        // provisional false blocks positive cycles
        self.memo.insert((atom, d), false);
        let na = self.theory.vocabulary.arguments.len();
        let mut ok = false;
        'rules: for rule in &self.theory.rules {
            let bindings: Vec<Option<usize>> = if uses_var(rule) { (0..na).map(Some).collect() } else { vec![None] };
            for b in bindings {
                if ground(rule.head.argument, rule.head.predicate, b) != Some(atom) {
                    continue;
                }
                let mut all = true;
                for lit in &rule.body {
                    let a = ground(lit.argument, lit.predicate, b).expect("binding covers variable");
                    let holds = if lit.negated { !self.provable(a) } else { self.provable_within(a, d - 1) };
                    if !holds {
                        all = false;
                        break;
                    }
                }
                if all {
                    ok = true;
                    break 'rules;
                }
            }
        }
        self.memo.insert((atom, d), ok);
        ok
    }

    pub fn provable(&mut self, atom: Atom) -> bool {
        self.provable_within(atom, self.bound)
    }

    /// Smallest depth at which `atom` is provable.
    pub fn min_depth(&mut self, atom: Atom) -> Option<usize> {
        (0..=self.bound).find(|&d| self.provable_within(atom, d))
    }

    /// Closed-world truth value of a literal.
    pub fn holds(&mut self, lit: &GroundLiteral) -> bool {
        self.provable(lit.atom) != lit.negated
    }

    pub fn all_atoms(&self) -> Vec<Atom> {
        let v = &self.theory.vocabulary;
        (0..v.predicates.len())
            .flat_map(|p| (0..v.arguments.len()).map(move |a| Atom { predicate: p, argument: a }))
            .collect()
    }
}

fn uses_var(rule: &riskprobe::nlsat::Rule) -> bool {
    rule.head.argument == Term::Var || rule.body.iter().any(|l| l.argument == Term::Var)
}

fn ground(t: Term, predicate: usize, b: Option<usize>) -> Option<Atom> {
    match t {
        Term::Const(c) => Some(Atom { predicate, argument: c }),
        Term::Var => b.map(|argument| Atom { predicate, argument }),
    }
}

/// Random stratified theory over at most `max_args` arguments and
/// `max_rules` rules. Candidates that fail validation are redrawn.
pub fn random_theory(seed: u64, max_args: usize, max_rules: usize, negation: bool) -> Theory {
    use rand::{Rng, SeedableRng};
    use riskprobe::nlsat::{Literal, Rule, Vocabulary, ENTITY_NAMES, PREDICATE_NAMES};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    loop {
        let na = rng.gen_range(1..=max_args);
        let np = rng.gen_range(2..=7);
        let vocab = Vocabulary {
            arguments: ENTITY_NAMES[..na].iter().map(|s| s.to_string()).collect(),
            predicates: PREDICATE_NAMES[..np].iter().map(|s| s.to_string()).collect(),
        };
        let mut facts = Vec::new();
        for p in 0..np {
            for a in 0..na {
                if rng.gen_bool(0.2) {
                    facts.push(Atom { predicate: p, argument: a });
                }
            }
        }
        let mut rules = Vec::new();
        for _ in 0..rng.gen_range(0..=max_rules) {
            let ground = rng.gen_bool(0.2);
            let term = |rng: &mut rand_chacha::ChaCha8Rng| {
                if ground || rng.gen_bool(0.2) { Term::Const(rng.gen_range(0..na)) } else { Term::Var }
            };
            let body: Vec<Literal> = (0..rng.gen_range(1..=3))
                .map(|_| Literal { predicate: rng.gen_range(0..np), argument: term(&mut rng), negated: negation && rng.gen_bool(0.25) })
                .collect();
            let head_arg = if body.iter().any(|l| l.argument == Term::Var) && rng.gen_bool(0.8) { Term::Var } else { Term::Const(rng.gen_range(0..na)) };
            rules.push(Rule { body, head: Literal { predicate: rng.gen_range(0..np), argument: head_arg, negated: false } });
        }
        if let Ok(t) = Theory::new(vocab, facts, rules) {
            return t;
        }
    }
}
