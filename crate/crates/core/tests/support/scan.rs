//! Brute-force term counting: for every term, walk each token sequence
//! left to right and count non-overlapping exact matches.

use std::collections::HashMap;

use riskprobe::corpus_stats::Article;
use riskprobe::text::{normalize, tokenize};

/// Terms are the normalized article titles; returns a count for every term.
pub fn brute_force_counts(articles: &[Article]) -> HashMap<String, u64> {
    let mut keys: Vec<String> = articles.iter().map(|a| normalize(&a.title)).filter(|k| !k.is_empty()).collect();
    keys.sort();
    keys.dedup();
    // two keys with the same token sequence: only the smaller key is counted
    let mut owner: HashMap<Vec<String>, String> = HashMap::new();
    for k in &keys {
        owner.entry(tokenize(k)).or_insert_with(|| k.clone());
    }
    let terms: HashMap<String, Vec<String>> =
        owner.into_iter().filter(|(t, _)| !t.is_empty()).map(|(t, k)| (k, t)).collect();
    // bucket by first token so the scan only compares plausible starts
    let mut by_first: HashMap<&str, Vec<(&str, &[String])>> = HashMap::new();
    for (k, toks) in &terms {
        by_first.entry(toks[0].as_str()).or_default().push((k.as_str(), toks.as_slice()));
    }
    let mut counts: HashMap<String, u64> = keys.iter().map(|k| (k.clone(), 0)).collect();
    let scan = |tokens: &[String], skip: Option<&str>, counts: &mut HashMap<String, u64>| {
        let mut next_free: HashMap<&str, usize> = HashMap::new();
        for i in 0..tokens.len() {
            let Some(cands) = by_first.get(tokens[i].as_str()) else { continue };
            for &(key, pat) in cands {
                if Some(key) == skip || i + pat.len() > tokens.len() {
                    continue;
                }
                if &tokens[i..i + pat.len()] == pat && next_free.get(key).is_none_or(|&f| i >= f) {
                    next_free.insert(key, i + pat.len());
                    *counts.get_mut(key).unwrap() += 1;
                }
            }
        }
    };
    for a in articles {
        let own = normalize(&a.title);
        scan(&tokenize(&a.title), Some(own.as_str()), &mut counts);
        scan(&tokenize(&a.body), None, &mut counts);
    }
    counts
}
