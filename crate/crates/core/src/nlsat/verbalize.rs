use super::{Atom, GroundLiteral, Literal, NlsatError, Rule, Term, Theory, Vocabulary};

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn not(negated: bool) -> &'static str {
    if negated {
        "not "
    } else {
        ""
    }
}

fn fact_text(v: &Vocabulary, a: &Atom) -> String {
    format!("{} is {}.", capitalize(&v.arguments[a.argument]), v.predicates[a.predicate])
}

fn rule_text(v: &Vocabulary, r: &Rule) -> String {
    let mut parts = Vec::with_capacity(r.body.len());
    let mut prev_var = false;
    let mut var_seen = false;
    for l in &r.body {
        let pred = &v.predicates[l.predicate];
        let neg = not(l.negated);
        parts.push(match l.argument {
            Term::Var if prev_var => format!("{neg}{pred}"),
            Term::Var if var_seen => format!("they are {neg}{pred}"),
            Term::Var => format!("someone is {neg}{pred}"),
            Term::Const(c) => format!("{} is {neg}{pred}", v.arguments[c]),
        });
        prev_var = l.argument == Term::Var;
        var_seen |= prev_var;
    }
    let head = match r.head.argument {
        Term::Var => format!("they are {}", v.predicates[r.head.predicate]),
        Term::Const(c) => format!("{} is {}", v.arguments[c], v.predicates[r.head.predicate]),
    };
    format!("If {} then {head}.", parts.join(" and "))
}

/// Renders facts then rules, one sentence each, space separated.
pub fn verbalize(theory: &Theory) -> String {
    let v = &theory.vocabulary;
    theory
        .facts
        .iter()
        .map(|f| fact_text(v, f))
        .chain(theory.rules.iter().map(|r| rule_text(v, r)))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn verbalize_question(v: &Vocabulary, q: &GroundLiteral) -> String {
    format!(
        "{} is {}{}.",
        capitalize(&v.arguments[q.atom.argument]),
        not(q.negated),
        v.predicates[q.atom.predicate]
    )
}

fn parse_err(sentence: &str, reason: impl Into<String>) -> NlsatError {
    NlsatError::Parse { sentence: sentence.to_string(), reason: reason.into() }
}

fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    if s.len() >= prefix.len() && s.is_char_boundary(prefix.len()) && s[..prefix.len()].eq_ignore_ascii_case(prefix) {
        Some(&s[prefix.len()..])
    } else {
        None
    }
}

enum Subject {
    Var,
    Const(usize),
    Elided,
}

fn split_subject<'a>(v: &Vocabulary, clause: &'a str) -> (Subject, &'a str) {
    for p in ["someone is ", "something is ", "they are ", "it is "] {
        if let Some(rest) = strip_prefix_ci(clause, p) {
            return (Subject::Var, rest);
        }
    }
    // longest name first so "the bald eagle" beats "the bald"
    let mut names: Vec<(usize, &String)> = v.arguments.iter().enumerate().collect();
    names.sort_by_key(|(_, n)| std::cmp::Reverse(n.len()));
    for (i, name) in names {
        if let Some(rest) = strip_prefix_ci(clause, &format!("{name} is ")) {
            return (Subject::Const(i), rest);
        }
    }
    (Subject::Elided, clause)
}

fn parse_predicate(v: &Vocabulary, sentence: &str, s: &str) -> Result<(usize, bool), NlsatError> {
    let (negated, name) = match strip_prefix_ci(s, "not ") {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let p = v.predicate_index(name.trim()).ok_or_else(|| parse_err(sentence, format!("unknown predicate `{}`", name.trim())))?;
    Ok((p, negated))
}

fn parse_rule(v: &Vocabulary, sentence: &str, body: &str, head: &str) -> Result<Rule, NlsatError> {
    let mut lits = Vec::new();
    let mut prev_var = false;
    for clause in body.split(" and ") {
        let (subject, rest) = split_subject(v, clause.trim());
        let argument = match subject {
            Subject::Var => Term::Var,
            Subject::Const(c) => Term::Const(c),
            Subject::Elided if prev_var => Term::Var,
            Subject::Elided => return Err(parse_err(sentence, format!("no subject in `{clause}`"))),
        };
        let (predicate, negated) = parse_predicate(v, sentence, rest)?;
        prev_var = argument == Term::Var;
        lits.push(Literal { predicate, argument, negated });
    }
    let (subject, rest) = split_subject(v, head.trim());
    let argument = match subject {
        Subject::Var => Term::Var,
        Subject::Const(c) => Term::Const(c),
        Subject::Elided => return Err(parse_err(sentence, "rule head has no subject")),
    };
    let (predicate, negated) = parse_predicate(v, sentence, rest)?;
    Ok(Rule { body: lits, head: Literal { predicate, argument, negated } })
}

fn parse_ground(v: &Vocabulary, sentence: &str) -> Result<GroundLiteral, NlsatError> {
    match split_subject(v, sentence) {
        (Subject::Const(c), rest) => {
            let (predicate, negated) = parse_predicate(v, sentence, rest)?;
            Ok(GroundLiteral { atom: Atom { predicate, argument: c }, negated })
        }
        _ => Err(parse_err(sentence, "expected `<name> is [not] <attribute>`")),
    }
}

fn sentences(text: &str) -> impl Iterator<Item = &str> {
    text.split('.').map(str::trim).filter(|s| !s.is_empty())
}

/// Parses text produced by [`verbalize`] back into a theory over `vocabulary`.
pub fn parse_theory(text: &str, vocabulary: &Vocabulary) -> Result<Theory, NlsatError> {
    let mut facts = Vec::new();
    let mut rules = Vec::new();
    for s in sentences(text) {
        if let Some(rest) = strip_prefix_ci(s, "if ") {
            let (body, head) = rest.split_once(" then ").ok_or_else(|| parse_err(s, "rule without `then`"))?;
            rules.push(parse_rule(vocabulary, s, body, head)?);
        } else {
            let g = parse_ground(vocabulary, s)?;
            if g.negated {
                return Err(parse_err(s, "facts must be positive"));
            }
            facts.push(g.atom);
        }
    }
    Theory::new(vocabulary.clone(), facts, rules)
}

pub fn parse_question(text: &str, vocabulary: &Vocabulary) -> Result<GroundLiteral, NlsatError> {
    let s = sentences(text).next().ok_or_else(|| parse_err(text, "empty question"))?;
    parse_ground(vocabulary, s)
}
