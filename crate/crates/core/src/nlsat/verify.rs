use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{forward_chain, parse_question, Atom, GroundLiteral, ProofStep, ProofTrace, Term, Theory};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    UnknownRule,
    UnknownSymbol,
    /// A variable rule cited without a binding.
    UnboundVariable,
    /// The step's literal is not the rule head under the binding.
    HeadMismatch,
    /// A positive body atom was neither a fact nor derived earlier.
    BodyNotEstablished { atom: Atom },
    /// A negated body atom is derivable, so the negation fails.
    NegationViolated { atom: Atom },
    /// A fact citation names something that is not a fact.
    NotAFact,
    /// The chain does not establish the claimed answer.
    WrongConclusion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum ProcessVerdict {
    Valid,
    /// `step` is the offending step index, or the chain length when the
    /// conclusion itself is wrong.
    Invalid { step: usize, reason: InvalidReason },
}

impl ProcessVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, ProcessVerdict::Valid)
    }
}

/// Checks a transcribed reasoning chain that claims `question` is
/// `claimed`. Every step must be a sound rule application over facts and
/// earlier steps (negated body literals are checked against the closure).
/// A claim that needs the question atom to hold must end by deriving it,
/// unless the chain is empty and the atom is a fact; a claim resting on
/// the closed world needs the atom to be underivable.
pub fn verify_reasoning_chain(theory: &Theory, chain: &ProofTrace, question: &GroundLiteral, claimed: bool) -> ProcessVerdict {
    let closure = forward_chain(theory);
    let facts: HashSet<Atom> = theory.facts.iter().copied().collect();
    let mut established = facts.clone();
    let na = theory.vocabulary.arguments.len();
    let invalid = |step, reason| ProcessVerdict::Invalid { step, reason };

    for (i, step) in chain.steps.iter().enumerate() {
        if theory.check_atom(&step.derived).is_err() {
            return invalid(i, InvalidReason::UnknownSymbol);
        }
        match step.rule {
            None => {
                if !facts.contains(&step.derived) {
                    return invalid(i, InvalidReason::NotAFact);
                }
            }
            Some(ri) => {
                let Some(rule) = theory.rules.get(ri) else {
                    return invalid(i, InvalidReason::UnknownRule);
                };
                if let Some(b) = step.binding {
                    if b >= na {
                        return invalid(i, InvalidReason::UnknownSymbol);
                    }
                }
                let needs_var = rule.head.argument == Term::Var || rule.body.iter().any(|l| l.argument == Term::Var);
                if needs_var && step.binding.is_none() {
                    return invalid(i, InvalidReason::UnboundVariable);
                }
                if rule.head.ground(step.binding) != Some(step.derived) {
                    return invalid(i, InvalidReason::HeadMismatch);
                }
                for lit in &rule.body {
                    let atom = lit.ground(step.binding).expect("binding checked above");
                    if lit.negated {
                        if closure.contains(&atom) {
                            return invalid(i, InvalidReason::NegationViolated { atom });
                        }
                    } else if !established.contains(&atom) {
                        return invalid(i, InvalidReason::BodyNotEstablished { atom });
                    }
                }
            }
        }
        established.insert(step.derived);
    }

    let end = chain.steps.len();
    if theory.check_atom(&question.atom).is_err() {
        return invalid(end, InvalidReason::UnknownSymbol);
    }
    let needs_atom = claimed != question.negated;
    let ok = if needs_atom {
        match chain.steps.last() {
            Some(last) => last.derived == question.atom,
            None => facts.contains(&question.atom),
        }
    } else {
        !closure.contains(&question.atom)
    };
    if ok {
        ProcessVerdict::Valid
    } else {
        invalid(end, InvalidReason::WrongConclusion)
    }
}

const CONNECTIVES: [&str; 8] = ["so ", "therefore ", "thus ", "hence ", "and ", "because ", "since ", "then "];

/// Reads a free-text reasoning chain into proof steps for
/// [`verify_reasoning_chain`]. Every clause of the form `<Name> is <attr>`
/// becomes a step; other text is skipped. Each step cites the first rule
/// whose head matches and whose positive body is already established,
/// falling back to the first rule with a matching head, or to a fact
/// citation when no rule concludes the atom.
pub fn transcribe_chain(text: &str, theory: &Theory) -> ProofTrace {
    let facts: HashSet<Atom> = theory.facts.iter().copied().collect();
    let mut established = facts.clone();
    let mut steps = Vec::new();
    let na = theory.vocabulary.arguments.len();
    for clause in text.split(['.', '\n', ',', ';']) {
        let mut c = clause.trim();
        while let Some(rest) = CONNECTIVES.iter().find_map(|p| {
            (c.len() >= p.len() && c.is_char_boundary(p.len()) && c[..p.len()].eq_ignore_ascii_case(p)).then(|| c[p.len()..].trim_start())
        }) {
            c = rest;
        }
        let Ok(g) = parse_question(c, &theory.vocabulary) else { continue };
        if g.negated {
            continue;
        }
        let atom = g.atom;
        let mut candidates = Vec::new();
        for (ri, rule) in theory.rules.iter().enumerate() {
            for b in rule.bindings(na) {
                if rule.head.ground(b) == Some(atom) {
                    candidates.push((ri, b));
                }
            }
        }
        let sound = candidates.iter().find(|(ri, b)| {
            theory.rules[*ri].body.iter().filter(|l| !l.negated).all(|l| l.ground(*b).is_some_and(|a| established.contains(&a)))
        });
        let step = if facts.contains(&atom) && sound.is_none() {
            ProofStep { rule: None, binding: None, derived: atom }
        } else if let Some(&(ri, b)) = sound.or(candidates.first()) {
            ProofStep { rule: Some(ri), binding: b, derived: atom }
        } else {
            ProofStep { rule: None, binding: None, derived: atom }
        };
        established.insert(atom);
        steps.push(step);
    }
    ProofTrace { steps }
}

#[cfg(test)]
mod tests {
    use super::super::{Literal, ProofStep, Rule, Vocabulary};
    use super::*;

    fn theory() -> Theory {
        let v = Vocabulary { arguments: vec!["Anne".into(), "Bob".into()], predicates: vec!["red".into(), "kind".into(), "big".into(), "tall".into()] };
        let var = |p| Literal { predicate: p, argument: Term::Var, negated: false };
        let rules = vec![
            Rule { body: vec![var(0)], head: var(1) },
            Rule { body: vec![var(1), Literal { predicate: 2, argument: Term::Var, negated: true }], head: var(3) },
            Rule { body: vec![var(0)], head: var(2) },
        ];
        Theory::new(v, vec![Atom { predicate: 0, argument: 0 }], rules).unwrap()
    }

    fn q(p: usize, a: usize, negated: bool) -> GroundLiteral {
        GroundLiteral { atom: Atom { predicate: p, argument: a }, negated }
    }

    #[test]
    fn empty_chain_for_fact() {
        assert!(verify_reasoning_chain(&theory(), &ProofTrace::default(), &q(0, 0, false), true).is_valid());
    }

    #[test]
    fn unknown_rule() {
        let chain = ProofTrace { steps: vec![ProofStep { rule: Some(7), binding: Some(0), derived: Atom { predicate: 1, argument: 0 } }] };
        assert_eq!(
            verify_reasoning_chain(&theory(), &chain, &q(1, 0, false), true),
            ProcessVerdict::Invalid { step: 0, reason: InvalidReason::UnknownRule }
        );
    }

    #[test]
    fn sound_chain_and_failures() {
        let t = theory();
        let step = ProofStep { rule: Some(0), binding: Some(0), derived: Atom { predicate: 1, argument: 0 } };
        assert!(verify_reasoning_chain(&t, &ProofTrace { steps: vec![step] }, &q(1, 0, false), true).is_valid());
        // claims kind(Anne) is false
        assert!(!verify_reasoning_chain(&t, &ProofTrace { steps: vec![step] }, &q(1, 0, false), false).is_valid());
        // skips the first step
        let skip = ProofStep { rule: Some(1), binding: Some(1), derived: Atom { predicate: 3, argument: 1 } };
        assert!(matches!(
            verify_reasoning_chain(&t, &ProofTrace { steps: vec![skip] }, &q(3, 1, false), true),
            ProcessVerdict::Invalid { step: 0, reason: InvalidReason::BodyNotEstablished { .. } }
        ));
        // wrong binding for the head
        let wrong = ProofStep { rule: Some(0), binding: Some(1), derived: Atom { predicate: 1, argument: 0 } };
        assert!(matches!(
            verify_reasoning_chain(&t, &ProofTrace { steps: vec![wrong] }, &q(1, 0, false), true),
            ProcessVerdict::Invalid { reason: InvalidReason::HeadMismatch, .. }
        ));
        // closed-world claims
        assert!(verify_reasoning_chain(&t, &ProofTrace::default(), &q(1, 1, false), false).is_valid());
        assert!(verify_reasoning_chain(&t, &ProofTrace::default(), &q(1, 1, true), true).is_valid());
        assert!(!verify_reasoning_chain(&t, &ProofTrace::default(), &q(1, 0, true), true).is_valid());
    }

    #[test]
    fn negated_body_checked_against_closure() {
        let t = theory();
        let steps = vec![
            ProofStep { rule: Some(0), binding: Some(0), derived: Atom { predicate: 1, argument: 0 } },
            ProofStep { rule: Some(1), binding: Some(0), derived: Atom { predicate: 3, argument: 0 } },
        ];
        // big(Anne) is derivable, so "not big(Anne)" fails and tall(Anne) does not follow
        assert!(matches!(
            verify_reasoning_chain(&t, &ProofTrace { steps }, &q(3, 0, false), true),
            ProcessVerdict::Invalid { step: 1, reason: InvalidReason::NegationViolated { .. } }
        ));
    }

    #[test]
    fn transcribed_chains() {
        let t = theory();
        let good = transcribe_chain("Anne is red. So Anne is kind, and Anne is big. Answer: True", &t);
        assert_eq!(good.steps.len(), 3);
        assert_eq!(good.steps[0].rule, None);
        assert_eq!(good.steps[1].rule, Some(0));
        assert!(verify_reasoning_chain(&t, &good, &q(2, 0, false), true).is_valid());
        // Anne is big, so rule 1 does not fire
        let bad = transcribe_chain("Anne is kind. Anne is tall.", &t);
        assert!(matches!(
            verify_reasoning_chain(&t, &bad, &q(3, 0, false), true),
            ProcessVerdict::Invalid { step: 1, reason: InvalidReason::NegationViolated { .. } }
        ));
        let skipped = transcribe_chain("Let me think about Bob is kind", &t);
        assert!(skipped.steps.is_empty());
    }
}
