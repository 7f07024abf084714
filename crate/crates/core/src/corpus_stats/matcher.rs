use std::collections::HashMap;

use super::TermIndex;

/// Token trie over the index's title token sequences. Term ids are
/// positions in the index's sorted key order.
#[derive(Debug, Clone)]
pub struct TermMatcher {
    vocab: HashMap<String, u32>,
    nodes: Vec<HashMap<u32, usize>>,
    terminal: Vec<Option<usize>>,
    terms: Vec<String>,
}

impl TermMatcher {
    pub fn new(index: &TermIndex) -> Self {
        let mut m = TermMatcher {
            vocab: HashMap::new(),
            nodes: vec![HashMap::new()],
            terminal: vec![None],
            terms: Vec::with_capacity(index.len()),
        };
        for (id, (term, entry)) in index.entries.iter().enumerate() {
            m.terms.push(term.clone());
            if entry.title_tokens.is_empty() {
                continue;
            }
            let mut node = 0;
            for tok in &entry.title_tokens {
                let next_id = m.vocab.len() as u32;
                let t = *m.vocab.entry(tok.clone()).or_insert(next_id);
                node = match m.nodes[node].get(&t) {
                    Some(&n) => n,
                    None => {
                        m.nodes.push(HashMap::new());
                        m.terminal.push(None);
                        let n = m.nodes.len() - 1;
                        m.nodes[node].insert(t, n);
                        n
                    }
                };
            }
            // Two titles can share a token sequence ("U.S." / "U S"); the first id wins.
            if m.terminal[node].is_none() {
                m.terminal[node] = Some(id);
            }
        }
        m
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Calls `f(term_id, start, end)` for every occurrence of every term in
    /// `tokens`, including overlapping ones.
    pub fn for_each_match<F: FnMut(usize, usize, usize)>(&self, tokens: &[String], mut f: F) {
        let ids: Vec<Option<u32>> = tokens.iter().map(|t| self.vocab.get(t).copied()).collect();
        for start in 0..ids.len() {
            let mut node = 0;
            for (end, id) in ids.iter().enumerate().skip(start) {
                let Some(id) = id else { break };
                match self.nodes[node].get(id) {
                    Some(&n) => node = n,
                    None => break,
                }
                if let Some(term) = self.terminal[node] {
                    f(term, start, end + 1);
                }
            }
        }
    }

    /// Per-term occurrence counts in one token sequence, where occurrences of
    /// the same term that overlap an already counted one are skipped.
    pub fn count_in(&self, tokens: &[String], exclude: Option<usize>, counts: &mut HashMap<usize, u64>) {
        let mut last_end: HashMap<usize, usize> = HashMap::new();
        self.for_each_match(tokens, |term, start, end| {
            if Some(term) == exclude {
                return;
            }
            let free = last_end.get(&term).is_none_or(|&e| start >= e);
            if free {
                last_end.insert(term, end);
                *counts.entry(term).or_insert(0) += 1;
            }
        });
    }
}
