use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Atom, ProofStep, ProofTrace, Rule, Theory};

/// The rule application recorded as an atom's first derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Derivation {
    pub rule: usize,
    pub binding: Option<usize>,
}

/// Least model of a theory under stratified closed-world semantics.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Closure {
    pub atoms: BTreeSet<Atom>,
    /// Facts have depth 0; a derived atom has one more than the deepest
    /// positive body atom of its shallowest derivation.
    pub depth: BTreeMap<Atom, usize>,
    pub derivations: BTreeMap<Atom, Derivation>,
}

impl Closure {
    pub fn contains(&self, a: &Atom) -> bool {
        self.atoms.contains(a)
    }

    /// Rule applications deriving `atom`, dependencies first. A fact yields
    /// a single citation step; an atom outside the closure yields `None`.
    pub fn proof(&self, theory: &Theory, atom: Atom) -> Option<ProofTrace> {
        if !self.contains(&atom) {
            return None;
        }
        if !self.derivations.contains_key(&atom) {
            return Some(ProofTrace { steps: vec![ProofStep { rule: None, binding: None, derived: atom }] });
        }
        let mut steps = Vec::new();
        let mut done = BTreeSet::new();
        self.collect(theory, atom, &mut steps, &mut done);
        Some(ProofTrace { steps })
    }

    fn collect(&self, theory: &Theory, atom: Atom, steps: &mut Vec<ProofStep>, done: &mut BTreeSet<Atom>) {
        let Some(d) = self.derivations.get(&atom) else { return };
        if !done.insert(atom) {
            return;
        }
        for lit in theory.rules[d.rule].body.iter().filter(|l| !l.negated) {
            let dep = lit.ground(d.binding).expect("recorded binding grounds the body");
            self.collect(theory, dep, steps, done);
        }
        steps.push(ProofStep { rule: Some(d.rule), binding: d.binding, derived: atom });
    }
}

fn body_holds(rule: &Rule, binding: Option<usize>, known: &BTreeSet<Atom>) -> bool {
    rule.body.iter().all(|l| {
        let a = l.ground(binding).expect("binding covers the variable");
        known.contains(&a) != l.negated
    })
}

fn rules_by_stratum(theory: &Theory) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); theory.num_strata()];
    for (i, r) in theory.rules.iter().enumerate() {
        out[theory.strata()[r.head.predicate]].push(i);
    }
    out
}

/// Semi-naive evaluation, stratum by stratum, then depth assignment.
pub fn forward_chain(theory: &Theory) -> Closure {
    let na = theory.vocabulary.arguments.len();
    let mut known: BTreeSet<Atom> = theory.facts.iter().copied().collect();
    for stratum in rules_by_stratum(theory) {
        let mut delta = known.clone();
        let mut first = true;
        loop {
            let mut fresh = BTreeSet::new();
            for &ri in &stratum {
                let rule = &theory.rules[ri];
                for binding in rule.bindings(na) {
                    if !first {
                        // only instantiations touching last round's atoms can be new
                        let touches = rule
                            .body
                            .iter()
                            .filter(|l| !l.negated)
                            .any(|l| delta.contains(&l.ground(binding).expect("bound")));
                        if !touches {
                            continue;
                        }
                    }
                    if body_holds(rule, binding, &known) {
                        let head = rule.head.ground(binding).expect("head variable bound by body");
                        if !known.contains(&head) {
                            fresh.insert(head);
                        }
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            known.extend(fresh.iter().copied());
            delta = fresh;
            first = false;
        }
    }
    with_depths(theory, known)
}

/// Naive evaluation: rescans every rule until nothing changes.
pub fn forward_chain_naive(theory: &Theory) -> Closure {
    let na = theory.vocabulary.arguments.len();
    let mut known: BTreeSet<Atom> = theory.facts.iter().copied().collect();
    for stratum in rules_by_stratum(theory) {
        loop {
            let mut changed = false;
            for &ri in &stratum {
                let rule = &theory.rules[ri];
                for binding in rule.bindings(na) {
                    if body_holds(rule, binding, &known) && known.insert(rule.head.ground(binding).expect("bound")) {
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
    with_depths(theory, known)
}

/// Shallowest derivation of every atom in the closure. Ties on depth go to
/// the smallest `(rule index, binding)`.
fn with_depths(theory: &Theory, atoms: BTreeSet<Atom>) -> Closure {
    let na = theory.vocabulary.arguments.len();
    let mut depth: BTreeMap<Atom, usize> = theory.facts.iter().map(|f| (*f, 0)).collect();
    let mut derivations: BTreeMap<Atom, Derivation> = BTreeMap::new();
    loop {
        let mut changed = false;
        for (ri, rule) in theory.rules.iter().enumerate() {
            for binding in rule.bindings(na) {
                if !body_holds(rule, binding, &atoms) {
                    continue;
                }
                let mut d = 0;
                let mut ready = true;
                for l in rule.body.iter().filter(|l| !l.negated) {
                    match depth.get(&l.ground(binding).expect("bound")) {
                        Some(&x) => d = d.max(x),
                        None => {
                            ready = false;
                            break;
                        }
                    }
                }
                if !ready {
                    continue;
                }
                let d = d + 1;
                let head = rule.head.ground(binding).expect("bound");
                let cand = Derivation { rule: ri, binding };
                let better = match (depth.get(&head), derivations.get(&head)) {
                    (Some(_), None) => false, // a fact
                    (Some(&cur), Some(prev)) => (d, cand) < (cur, *prev),
                    (None, _) => true,
                };
                if better {
                    depth.insert(head, d);
                    derivations.insert(head, cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    debug_assert_eq!(depth.len(), atoms.len());
    Closure { atoms, depth, derivations }
}
