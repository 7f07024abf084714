use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{verbalize, verbalize_question, Atom, NlsatError, TheoryInstance};
use crate::probe::{ProbeInstance, TaskKind};

pub const FEWSHOT_INSTRUCTION: &str = "Each problem gives facts and rules. Assume the facts and rules are true and that \
anything that cannot be derived from them is false. Decide whether the statement is True or False. Explain your \
reasoning step by step, then give the final answer as True or False.";

fn answer(label: bool) -> &'static str {
    if label {
        "True"
    } else {
        "False"
    }
}

fn problem(inst: &TheoryInstance) -> String {
    format!(
        "Facts and rules: {}\nStatement: {}",
        verbalize(&inst.theory),
        verbalize_question(&inst.theory.vocabulary, &inst.question)
    )
}

fn atom_text(inst: &TheoryInstance, a: &Atom) -> String {
    let v = &inst.theory.vocabulary;
    format!("{} is {}", v.arguments[a.argument], v.predicates[a.predicate])
}

/// Gold answer plus the oracle proof in words, for annotators.
fn reference(inst: &TheoryInstance) -> String {
    let mut out = format!("Answer: {} (depth {})", answer(inst.gold_label), inst.gold_depth);
    match &inst.gold_proof {
        Some(p) => {
            for s in &p.steps {
                let how = s.rule.map_or("fact".to_string(), |r| format!("rule {r}"));
                out.push_str(&format!("\n- {} ({how})", atom_text(inst, &s.derived)));
            }
        }
        None => out.push_str("\n- not derivable; false under the closed world"),
    }
    out
}

/// Risk factors of a relational instance, with the number of in-context
/// examples as a confounder.
pub fn relational_factors(inst: &TheoryInstance, fewshot_n: usize) -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("num_theory".to_string(), inst.theory.rules.len() as f64),
        ("num_facts".to_string(), inst.theory.facts.len() as f64),
        ("num_arguments".to_string(), inst.theory.vocabulary.arguments.len() as f64),
        ("fewshot_n".to_string(), fewshot_n as f64),
        ("gold_depth".to_string(), inst.gold_depth as f64),
    ])
}

/// Prompt with `n` solved exemplars drawn from `pool` followed by the target.
pub fn assemble_fewshot_prompt(
    instance: &TheoryInstance,
    pool: &[TheoryInstance],
    n: usize,
    seed: u64,
) -> Result<ProbeInstance, NlsatError> {
    if pool.iter().any(|p| p.id == instance.id || (p.theory == instance.theory && p.question == instance.question)) {
        return Err(NlsatError::TargetInPool(instance.id.clone()));
    }
    if n > pool.len() {
        return Err(NlsatError::InsufficientExemplars { requested: n, available: pool.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exemplars: Vec<&TheoryInstance> = pool.choose_multiple(&mut rng, n).collect();
    let mut prompt = String::from(FEWSHOT_INSTRUCTION);
    for (i, ex) in exemplars.iter().enumerate() {
        prompt.push_str(&format!("\n\nExample {}:\n{}\nAnswer: {}", i + 1, problem(ex), answer(ex.gold_label)));
    }
    prompt.push_str(&format!("\n\nProblem:\n{}\nAnswer:", problem(instance)));
    Ok(ProbeInstance {
        id: instance.id.clone(),
        task: TaskKind::Relational,
        context: verbalize(&instance.theory),
        instruction: FEWSHOT_INSTRUCTION.to_string(),
        prompt,
        reference: reference(instance),
        factors: relational_factors(instance, n),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{generate_batch, GenerationConfig};
    use super::*;

    fn data() -> (Vec<TheoryInstance>, TheoryInstance) {
        let pool = generate_batch("train", &GenerationConfig { seed: 3, ..Default::default() }, 8).unwrap();
        let target = generate_batch("test", &GenerationConfig { seed: 4, ..Default::default() }, 1).unwrap().remove(0);
        (pool, target)
    }

    #[test]
    fn exemplar_count_and_determinism() {
        let (pool, target) = data();
        let p = assemble_fewshot_prompt(&target, &pool, 3, 10).unwrap();
        assert_eq!(p.prompt.matches("\nExample ").count(), 3);
        assert_eq!(p.prompt.matches("\nAnswer: ").count(), 3);
        assert!(p.prompt.ends_with("Answer:"));
        assert_eq!(p.factors["fewshot_n"], 3.0);
        assert_eq!(p, assemble_fewshot_prompt(&target, &pool, 3, 10).unwrap());
    }

    #[test]
    fn zero_shot() {
        let (pool, target) = data();
        let p = assemble_fewshot_prompt(&target, &pool, 0, 1).unwrap();
        assert!(!p.prompt.contains("Example"));
        assert!(p.prompt.contains(&verbalize(&target.theory)));
    }

    #[test]
    fn pool_errors() {
        let (pool, target) = data();
        assert!(matches!(assemble_fewshot_prompt(&target, &pool, 9, 1), Err(NlsatError::InsufficientExemplars { .. })));
        assert!(matches!(assemble_fewshot_prompt(&pool[0], &pool, 1, 1), Err(NlsatError::TargetInPool(_))));
    }
}
