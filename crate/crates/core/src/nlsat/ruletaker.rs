//! Import adapter for published rule-reasoning datasets in the
//! RuleTaker JSONL layout.
//!
//! Each line holds a theory with `triples` and `rules` maps whose entries
//! carry an S-expression `representation`, e.g.
//! `("Anne" "is" "red" "+")` and
//! `((("someone" "is" "red" "+")) -> ("someone" "is" "kind" "+"))`, plus
//! `questions` either as a map (`question`, `answer`, `QDep`,
//! `representation`) or as a list (`text`, `label`, `meta.QDep`). Only
//! attribute theories (`is` relations over unary predicates, positive facts
//! and heads) are supported; anything else is reported as an issue.

use serde_json::Value;

use super::{forward_chain, label_question, Atom, ConfigEcho, GroundLiteral, Literal, Rule, Term, Theory, TheoryInstance, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportIssue {
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Sym(String),
    List(Vec<Sexp>),
}

fn parse_sexp(s: &str) -> Result<Sexp, String> {
    let chars: Vec<char> = s.chars().collect();
    let mut pos = 0;
    let out = parse_at(&chars, &mut pos)?;
    skip_ws(&chars, &mut pos);
    if pos != chars.len() {
        return Err(format!("trailing input at {pos}"));
    }
    Ok(out)
}

fn skip_ws(c: &[char], pos: &mut usize) {
    while *pos < c.len() && c[*pos].is_whitespace() {
        *pos += 1;
    }
}

fn parse_at(c: &[char], pos: &mut usize) -> Result<Sexp, String> {
    skip_ws(c, pos);
    match c.get(*pos) {
        None => Err("unexpected end".into()),
        Some('(') => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(c, pos);
                match c.get(*pos) {
                    Some(')') => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    None => return Err("unclosed list".into()),
                    _ => items.push(parse_at(c, pos)?),
                }
            }
        }
        Some('"') => {
            *pos += 1;
            let start = *pos;
            while *pos < c.len() && c[*pos] != '"' {
                *pos += 1;
            }
            if *pos == c.len() {
                return Err("unclosed string".into());
            }
            let s: String = c[start..*pos].iter().collect();
            *pos += 1;
            Ok(Sexp::Sym(s))
        }
        Some(_) => {
            let start = *pos;
            while *pos < c.len() && !c[*pos].is_whitespace() && c[*pos] != '(' && c[*pos] != ')' {
                *pos += 1;
            }
            Ok(Sexp::Sym(c[start..*pos].iter().collect()))
        }
    }
}

struct Builder {
    vocab: Vocabulary,
}

const VARIABLES: [&str; 4] = ["someone", "something", "it", "they"];

impl Builder {
    fn arg(&mut self, name: &str) -> Term {
        if VARIABLES.contains(&name.to_lowercase().as_str()) {
            return Term::Var;
        }
        Term::Const(match self.vocab.argument_index(name) {
            Some(i) => i,
            None => {
                self.vocab.arguments.push(name.to_string());
                self.vocab.arguments.len() - 1
            }
        })
    }

    fn pred(&mut self, name: &str) -> usize {
        let name = name.to_lowercase();
        match self.vocab.predicate_index(&name) {
            Some(i) => i,
            None => {
                self.vocab.predicates.push(name);
                self.vocab.predicates.len() - 1
            }
        }
    }

    fn literal(&mut self, e: &Sexp) -> Result<Literal, String> {
        let Sexp::List(items) = e else { return Err("literal must be a list".into()) };
        let syms: Vec<&str> = items
            .iter()
            .map(|i| match i {
                Sexp::Sym(s) => Ok(s.as_str()),
                Sexp::List(_) => Err("nested literal".to_string()),
            })
            .collect::<Result<_, _>>()?;
        let [subject, relation, object, polarity] = syms[..] else {
            return Err(format!("expected 4 fields, got {}", syms.len()));
        };
        if relation != "is" {
            return Err(format!("relation `{relation}` is not supported"));
        }
        let negated = match polarity {
            "+" => false,
            "-" => true,
            p => return Err(format!("bad polarity `{p}`")),
        };
        let argument = self.arg(subject);
        let predicate = self.pred(object);
        Ok(Literal { predicate, argument, negated })
    }

    fn rule(&mut self, e: &Sexp) -> Result<Rule, String> {
        let Sexp::List(items) = e else { return Err("rule must be a list".into()) };
        match &items[..] {
            [Sexp::List(body), Sexp::Sym(arrow), head] if arrow == "->" => {
                let body = body.iter().map(|l| self.literal(l)).collect::<Result<Vec<_>, _>>()?;
                let head = self.literal(head)?;
                if head.negated {
                    return Err("negated rule heads are not supported".into());
                }
                Ok(Rule { body, head })
            }
            _ => Err("expected ((body...) -> head)".into()),
        }
    }
}

fn representations(v: Option<&Value>) -> Vec<String> {
    let mut out: Vec<(String, String)> = match v {
        Some(Value::Object(m)) => m
            .iter()
            .filter_map(|(k, e)| e.get("representation").and_then(Value::as_str).map(|r| (k.clone(), r.to_string())))
            .collect(),
        _ => Vec::new(),
    };
    // triple2 before triple10
    out.sort_by_key(|(k, _)| {
        let digits: String = k.chars().filter(|c| c.is_ascii_digit()).collect();
        (digits.parse::<u64>().unwrap_or(u64::MAX), k.clone())
    });
    out.into_iter().map(|(_, r)| r).collect()
}

struct RawQuestion {
    id: String,
    representation: Option<String>,
    label: Option<bool>,
    depth: Option<usize>,
}

fn questions(v: Option<&Value>) -> Vec<RawQuestion> {
    let depth_of = |q: &Value| {
        q.get("QDep").or_else(|| q.get("meta").and_then(|m| m.get("QDep"))).and_then(Value::as_u64).map(|d| d as usize)
    };
    let rep_of = |q: &Value| {
        q.get("representation")
            .or_else(|| q.get("meta").and_then(|m| m.get("Qrep")))
            .and_then(Value::as_str)
            .map(str::to_string)
    };
    let label_of = |q: &Value| q.get("answer").or_else(|| q.get("label")).and_then(Value::as_bool);
    match v {
        Some(Value::Object(m)) => m
            .iter()
            .map(|(k, q)| RawQuestion { id: k.clone(), representation: rep_of(q), label: label_of(q), depth: depth_of(q) })
            .collect(),
        Some(Value::Array(a)) => a
            .iter()
            .enumerate()
            .map(|(i, q)| RawQuestion {
                id: q.get("id").and_then(Value::as_str).map_or(format!("Q{}", i + 1), str::to_string),
                representation: rep_of(q),
                label: label_of(q),
                depth: depth_of(q),
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Converts one dataset record into instances, one per question. Questions
/// whose recomputed label disagrees with the dataset are reported, not kept.
pub fn import_record(record: &Value) -> (Vec<TheoryInstance>, Vec<ImportIssue>) {
    let id = record.get("id").and_then(Value::as_str).unwrap_or("unknown").to_string();
    let issue = |m: String| ImportIssue { id: id.clone(), message: m };
    let mut b = Builder { vocab: Vocabulary { arguments: Vec::new(), predicates: Vec::new() } };

    let mut facts = Vec::new();
    for rep in representations(record.get("triples")) {
        let lit = match parse_sexp(&rep).and_then(|e| b.literal(&e)) {
            Ok(l) => l,
            Err(m) => return (Vec::new(), vec![issue(format!("triple {rep}: {m}"))]),
        };
        match (lit.argument, lit.negated) {
            (Term::Const(a), false) => facts.push(Atom { predicate: lit.predicate, argument: a }),
            _ => return (Vec::new(), vec![issue(format!("triple {rep}: only positive ground facts are supported"))]),
        }
    }
    let mut rules = Vec::new();
    for rep in representations(record.get("rules")) {
        match parse_sexp(&rep).and_then(|e| b.rule(&e)) {
            Ok(r) => rules.push(r),
            Err(m) => return (Vec::new(), vec![issue(format!("rule {rep}: {m}"))]),
        }
    }
    let raw_questions = questions(record.get("questions"));
    let mut parsed = Vec::new();
    let mut issues = Vec::new();
    for q in raw_questions {
        let Some(rep) = q.representation.as_deref() else {
            issues.push(issue(format!("{}: no representation", q.id)));
            continue;
        };
        match parse_sexp(rep).and_then(|e| b.literal(&e)) {
            Ok(Literal { predicate, argument: Term::Const(a), negated }) => {
                parsed.push((q, GroundLiteral { atom: Atom { predicate, argument: a }, negated }))
            }
            Ok(_) => issues.push(issue(format!("{}: question is not ground", q.id))),
            Err(m) => issues.push(issue(format!("{}: {m}", q.id))),
        }
    }
    facts.sort();
    facts.dedup();
    let theory = match Theory::new(b.vocab, facts, rules) {
        Ok(t) => t,
        Err(e) => {
            issues.push(issue(e.to_string()));
            return (Vec::new(), issues);
        }
    };
    let closure = forward_chain(&theory);
    let mut out = Vec::new();
    for (q, question) in parsed {
        let Ok(label) = label_question(&theory, &closure, &question) else { continue };
        if q.label.is_some_and(|l| l != label.label) {
            issues.push(issue(format!("{}: dataset label disagrees with the closed-world oracle", q.id)));
            continue;
        }
        out.push(TheoryInstance {
            id: format!("{id}-{}", q.id),
            config_echo: ConfigEcho {
                num_facts: theory.facts.len(),
                num_rules: theory.rules.len(),
                num_arguments: theory.vocabulary.arguments.len(),
                num_predicates: theory.vocabulary.predicates.len(),
                max_depth: q.depth.unwrap_or(label.depth),
                seed: 0,
            },
            theory: theory.clone(),
            question,
            gold_label: label.label,
            gold_depth: label.depth,
            gold_proof: label.proof,
        });
    }
    (out, issues)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RECORD: &str = r#"{"id": "AttNeg-D3-7",
      "context": "Anne is red. Bob is kind. If someone is red then they are big. If someone is big and not kind then they are cold.",
      "triples": {"triple1": {"text": "Anne is red.", "representation": "(\"Anne\" \"is\" \"red\" \"+\")"},
                  "triple2": {"text": "Bob is kind.", "representation": "(\"Bob\" \"is\" \"kind\" \"+\")"}},
      "rules": {"rule1": {"text": "If someone is red then they are big.", "representation": "(((\"someone\" \"is\" \"red\" \"+\")) -> (\"someone\" \"is\" \"big\" \"+\"))"},
                "rule2": {"text": "", "representation": "(((\"someone\" \"is\" \"big\" \"+\") (\"someone\" \"is\" \"kind\" \"-\")) -> (\"someone\" \"is\" \"cold\" \"+\"))"}},
      "questions": {"Q1": {"question": "Anne is cold.", "answer": true, "QDep": 2, "representation": "(\"Anne\" \"is\" \"cold\" \"+\")"},
                    "Q2": {"question": "Bob is not big.", "answer": true, "QDep": 0, "representation": "(\"Bob\" \"is\" \"big\" \"-\")"},
                    "Q3": {"question": "Bob is cold.", "answer": true, "QDep": 0, "representation": "(\"Bob\" \"is\" \"cold\" \"+\")"}}}"#;

    #[test]
    fn imports_attribute_theory() {
        let v: Value = serde_json::from_str(RECORD).unwrap();
        let (insts, issues) = import_record(&v);
        assert_eq!(insts.len(), 2);
        assert_eq!(issues.len(), 1, "Q3 carries a wrong label");
        let q1 = &insts[0];
        assert!(q1.gold_label);
        assert_eq!(q1.gold_depth, 2);
        assert_eq!(q1.theory.vocabulary.arguments, ["Anne", "Bob"]);
        assert!(q1.theory.rules[1].body[1].negated);
        assert!(insts[1].gold_proof.is_none());
    }

    #[test]
    fn relations_are_reported() {
        let rec = serde_json::json!({"id": "Rel-1", "triples": {"triple1": {"representation": "(\"the cat\" \"chases\" \"the dog\" \"+\")"}}});
        let (insts, issues) = import_record(&rec);
        assert!(insts.is_empty());
        assert!(issues[0].message.contains("chases"));
    }
}
