//! Deterministic WikiText-layout corpora for fixtures and smoke runs.
//!
//! Titles are invented syllable words, so they never collide with the filler
//! vocabulary. Each term is mentioned a log-uniform number of times in
//! `[0, MAX_MENTIONS)` across the corpus, which spreads the frequency
//! distribution enough for percentile sampling to have a non-trivial tail.

use std::collections::HashSet;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ONSETS: [&str; 14] = ["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"];
const VOWELS: [&str; 5] = ["a", "e", "i", "o", "u"];
const FILLER: [&str; 16] = [
    "the", "of", "and", "a", "in", "is", "was", "to", "with", "for", "as", "by", "on", "known", "called", "which",
];
const MAX_MENTIONS: f64 = 20.0;

fn word(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.gen_range(2..=4);
    (0..syllables)
        .map(|_| format!("{}{}", ONSETS.choose(rng).unwrap(), VOWELS.choose(rng).unwrap()))
        .collect()
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Generates `n_terms` distinct article titles (one or two words).
pub fn synthetic_titles(n_terms: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut titles = Vec::with_capacity(n_terms);
    while titles.len() < n_terms {
        let t = if rng.gen_bool(0.25) { format!("{} {}", word(&mut rng), word(&mut rng)) } else { word(&mut rng) };
        if seen.insert(t.clone()) {
            titles.push(t);
        }
    }
    titles
}

/// Renders a synthetic corpus with `n_terms` articles.
pub fn synthetic_wikitext(n_terms: usize, seed: u64) -> String {
    let titles = synthetic_titles(n_terms, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut mentions: Vec<usize> = Vec::new();
    for i in 0..n_terms {
        let m = (rng.gen::<f64>() * MAX_MENTIONS.ln()).exp().floor() as usize - 1;
        mentions.extend(std::iter::repeat_n(i, m));
    }
    mentions.shuffle(&mut rng);

    let per_article = mentions.len().div_ceil(n_terms.max(1));
    let mut chunks = mentions.chunks(per_article.max(1));
    let mut out = String::new();
    for title in &titles {
        let display: Vec<String> = title.split(' ').map(capitalize).collect();
        let _ = writeln!(out, " = {} = \n", display.join(" "));
        let mut body: Vec<String> = vec![display.join(" "), "is".into()];
        for &m in chunks.next().unwrap_or(&[]) {
            let fillers = rng.gen_range(1..=2);
            for _ in 0..fillers {
                body.push(FILLER.choose(&mut rng).unwrap().to_string());
            }
            body.push(titles[m].clone());
        }
        let _ = writeln!(out, " {} . \n", body.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_parseable() {
        let a = synthetic_wikitext(50, 3);
        assert_eq!(a, synthetic_wikitext(50, 3));
        let arts = super::super::read_wikitext(&a);
        assert_eq!(arts.len(), 50);
    }
}
