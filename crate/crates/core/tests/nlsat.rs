mod support;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use riskprobe::nlsat::*;
use support::backward::{random_theory, Backward};

fn assert_matches_oracle(t: &Theory) {
    let closure = forward_chain(t);
    let mut oracle = Backward::new(t);
    for atom in oracle.all_atoms() {
        assert_eq!(closure.contains(&atom), oracle.provable(atom), "{atom:?} in {}", verbalize(t));
        if closure.contains(&atom) {
            assert_eq!(Some(closure.depth[&atom]), oracle.min_depth(atom), "depth of {atom:?} in {}", verbalize(t));
        }
        for negated in [false, true] {
            let q = GroundLiteral { atom, negated };
            let label = label_question(t, &closure, &q).unwrap();
            assert_eq!(label.label, oracle.holds(&q));
        }
    }
}

#[test]
fn forward_matches_backward_on_generated_theories() {
    let mut seeds = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..200u64 {
        let cfg = GenerationConfig {
            num_arguments: 1 + (i % 6) as usize,
            num_predicates: 3 + (i % 4) as usize,
            num_facts: 1 + (i % 3) as usize,
            num_rules: (i % 9) as usize,
            max_depth: 3,
            target_label: i % 2 == 0,
            seed: rand::Rng::gen(&mut seeds),
            ..Default::default()
        };
        let inst = generate_theory(format!("g{i}"), &cfg).unwrap();
        assert_matches_oracle(&inst.theory);
        let mut oracle = Backward::new(&inst.theory);
        assert_eq!(oracle.holds(&inst.question), inst.gold_label);
    }
}

#[test]
fn generator_honours_config() {
    let base = GenerationConfig { num_arguments: 4, num_predicates: 6, num_facts: 5, num_rules: 5, max_depth: 3, seed: 17, ..Default::default() };
    for inst in generate_batch("c", &base, 300).unwrap() {
        let t = &inst.theory;
        assert_eq!(t.facts.len(), 5);
        assert_eq!(t.rules.len(), 5);
        assert_eq!(t.vocabulary.arguments.len(), 4);
        assert_eq!(t.vocabulary.predicates.len(), 6);
        assert!(inst.gold_depth <= 3);
        assert_eq!(inst.config_echo.num_rules, 5);
        assert_eq!(parse_theory(&verbalize(t), &t.vocabulary).unwrap(), *t);
        let q = verbalize_question(&t.vocabulary, &inst.question);
        assert_eq!(parse_question(&q, &t.vocabulary).unwrap(), inst.question);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn random_theories_match_oracle(seed in any::<u64>()) {
        assert_matches_oracle(&random_theory(seed, 6, 8, true));
    }

    #[test]
    fn naive_and_semi_naive_agree(seed in any::<u64>()) {
        let t = random_theory(seed, 6, 8, true);
        let (a, b) = (forward_chain(&t), forward_chain_naive(&t));
        prop_assert_eq!(&a.atoms, &b.atoms);
        prop_assert_eq!(&a.depth, &b.depth);
    }

    #[test]
    fn order_of_facts_and_rules_is_irrelevant(seed in any::<u64>(), shuffle in any::<u64>()) {
        let t = random_theory(seed, 6, 8, true);
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle);
        let (mut facts, mut rules) = (t.facts.clone(), t.rules.clone());
        facts.shuffle(&mut rng);
        rules.shuffle(&mut rng);
        let u = Theory::new(t.vocabulary.clone(), facts, rules).unwrap();
        let (a, b) = (forward_chain(&t), forward_chain(&u));
        prop_assert_eq!(a.atoms, b.atoms);
        prop_assert_eq!(a.depth, b.depth);
    }

    #[test]
    fn adding_facts_is_monotone_without_negation(seed in any::<u64>(), p in 0usize..7, a in 0usize..6) {
        let t = random_theory(seed, 6, 8, false);
        let extra = Atom { predicate: p % t.vocabulary.predicates.len(), argument: a % t.vocabulary.arguments.len() };
        prop_assume!(!t.facts.contains(&extra));
        let mut facts = t.facts.clone();
        facts.push(extra);
        let u = Theory::new(t.vocabulary.clone(), facts, t.rules.clone()).unwrap();
        let (small, big) = (forward_chain(&t), forward_chain(&u));
        prop_assert!(small.atoms.is_subset(&big.atoms));
        for (atom, d) in &small.depth {
            prop_assert!(big.depth[atom] <= *d);
        }
    }

    #[test]
    fn gold_proofs_replay(seed in any::<u64>(), target in any::<bool>(), rules in 0usize..=8, args in 1usize..=6) {
        let cfg = GenerationConfig { num_arguments: args, num_predicates: 5, num_facts: 3, num_rules: rules, max_depth: 3, target_label: target, seed, ..Default::default() };
        let inst = generate_theory("p", &cfg).unwrap();
        prop_assert_eq!(inst.gold_label, target);
        prop_assert_eq!(inst.gold_proof.is_none(), inst.gold_depth == 0 && !forward_chain(&inst.theory).contains(&inst.question.atom));
        let proof = inst.gold_proof.clone().unwrap_or_default();
        prop_assert!(verify_reasoning_chain(&inst.theory, &proof, &inst.question, inst.gold_label).is_valid());
        prop_assert!(!verify_reasoning_chain(&inst.theory, &proof, &inst.question, !inst.gold_label).is_valid());
    }

    #[test]
    fn verbalization_round_trips(seed in any::<u64>()) {
        let t = random_theory(seed, 6, 8, true);
        prop_assert_eq!(parse_theory(&verbalize(&t), &t.vocabulary).unwrap(), t);
    }
}
