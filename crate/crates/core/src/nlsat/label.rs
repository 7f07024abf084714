use serde::{Deserialize, Serialize};

use super::{Closure, GroundLiteral, NlsatError, ProofTrace, Theory};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionLabel {
    pub label: bool,
    pub depth: usize,
    pub proof: Option<ProofTrace>,
}

/// Truth of `question` under the closed-world assumption. When the label
/// depends on the atom being derivable (a true positive question, or a
/// false negated one) the atom's proof is attached; otherwise the label
/// rests on derivation failure, the depth is 0 and no proof exists.
pub fn label_question(theory: &Theory, closure: &Closure, question: &GroundLiteral) -> Result<QuestionLabel, NlsatError> {
    theory.check_atom(&question.atom)?;
    if closure.contains(&question.atom) {
        Ok(QuestionLabel {
            label: !question.negated,
            depth: closure.depth[&question.atom],
            proof: closure.proof(theory, question.atom),
        })
    } else {
        Ok(QuestionLabel { label: question.negated, depth: 0, proof: None })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{forward_chain, Atom, Vocabulary};
    use super::*;

    fn theory() -> Theory {
        let v = Vocabulary { arguments: vec!["Anne".into()], predicates: vec!["red".into(), "kind".into()] };
        Theory::new(v, vec![Atom { predicate: 0, argument: 0 }], vec![]).unwrap()
    }

    #[test]
    fn fact_question() {
        let t = theory();
        let c = forward_chain(&t);
        let q = GroundLiteral { atom: Atom { predicate: 0, argument: 0 }, negated: false };
        let l = label_question(&t, &c, &q).unwrap();
        assert!(l.label);
        assert_eq!(l.depth, 0);
        assert_eq!(l.proof.unwrap().steps.len(), 1);
    }

    #[test]
    fn closed_world() {
        let t = theory();
        let c = forward_chain(&t);
        let atom = Atom { predicate: 1, argument: 0 };
        let l = label_question(&t, &c, &GroundLiteral { atom, negated: false }).unwrap();
        assert_eq!((l.label, l.proof), (false, None));
        let l = label_question(&t, &c, &GroundLiteral { atom, negated: true }).unwrap();
        assert_eq!((l.label, l.proof), (true, None));
    }

    #[test]
    fn unknown_symbol() {
        let t = theory();
        let c = forward_chain(&t);
        let q = GroundLiteral { atom: Atom { predicate: 5, argument: 0 }, negated: false };
        assert!(matches!(label_question(&t, &c, &q), Err(NlsatError::VocabularyError(_))));
    }
}
