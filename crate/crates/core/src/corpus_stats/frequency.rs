use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Article, TermIndex, TermMatcher};
use crate::text::{normalize, tokenize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyRecord {
    pub term: String,
    pub count: u64,
    pub percentile_rank: f64,
}

const SHARD: usize = 256;

/// Counts whole-token occurrences of every indexed term across article
/// bodies and the title lines of other articles. Shards are merged by
/// addition, so the result does not depend on scheduling.
pub fn count_frequencies(index: &TermIndex, corpus: &[Article]) -> Vec<FrequencyRecord> {
    let matcher = TermMatcher::new(index);
    let term_ids: HashMap<&str, usize> =
        index.entries.keys().enumerate().map(|(i, k)| (k.as_str(), i)).collect();

    let merged = corpus
        .par_chunks(SHARD)
        .map(|shard| {
            let mut counts: HashMap<usize, u64> = HashMap::new();
            for article in shard {
                let key = normalize(&article.title);
                let own = term_ids.get(key.as_str()).copied();
                matcher.count_in(&tokenize(&article.title), own, &mut counts);
                matcher.count_in(&tokenize(&article.body), None, &mut counts);
            }
            counts
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });

    let counts: Vec<u64> = (0..matcher.term_count()).map(|i| merged.get(&i).copied().unwrap_or(0)).collect();
    let ranks = percentile_ranks(&counts);
    index
        .entries
        .keys()
        .zip(counts.iter().zip(ranks))
        .map(|(term, (&count, percentile_rank))| FrequencyRecord { term: term.clone(), count, percentile_rank })
        .collect()
}

/// Mid-rank percentile: fraction strictly below plus half the fraction equal.
pub fn percentile_ranks(counts: &[u64]) -> Vec<f64> {
    let n = counts.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    counts
        .iter()
        .map(|c| {
            let below = sorted.partition_point(|x| x < c);
            let upto = sorted.partition_point(|x| x <= c);
            (below as f64 + 0.5 * (upto - below) as f64) / n as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::build_term_index;
    use super::*;

    fn art(t: &str, b: &str) -> Article {
        Article { title: t.into(), body: b.into(), byte_span: None }
    }

    #[test]
    fn absent_terms_count_zero() {
        let idx = build_term_index(vec![art("Zeta", "nothing here")]).unwrap();
        let recs = count_frequencies(&idx, &[art("Other", "still nothing")]);
        assert_eq!(recs[0].count, 0);
        let recs = count_frequencies(&idx, &[]);
        assert_eq!(recs[0].count, 0);
    }

    #[test]
    fn multi_token_term_counted_as_whole_tokens() {
        let corpus = vec![
            art("Alpha Beta", "the alpha beta test and alphabet beta"),
            art("Gamma", "Alpha, beta! is here; alpha gamma beta"),
            art("Delta", "no match"),
        ];
        let idx = build_term_index(corpus.clone()).unwrap();
        let recs = count_frequencies(&idx, &corpus);
        let get = |t: &str| recs.iter().find(|r| r.term == t).unwrap().count;
        assert_eq!(get("alpha beta"), 2);
        assert_eq!(get("gamma"), 1);
        assert_eq!(get("delta"), 0);
    }

    #[test]
    fn own_title_excluded_but_other_titles_count() {
        let corpus = vec![art("Paris", "paris is big"), art("Paris Commune", "an uprising")];
        let idx = build_term_index(corpus.clone()).unwrap();
        let recs = count_frequencies(&idx, &corpus);
        assert_eq!(recs.iter().find(|r| r.term == "paris").unwrap().count, 2);
        assert_eq!(recs.iter().find(|r| r.term == "paris commune").unwrap().count, 0);
    }

    #[test]
    fn overlapping_self_matches_do_not_double_count() {
        let corpus = vec![art("Ha Ha", "ha ha ha"), art("X", "ha ha ha ha")];
        let idx = build_term_index(corpus.clone()).unwrap();
        let recs = count_frequencies(&idx, &corpus);
        // title "ha ha" excluded for itself; bodies: 1 + 2
        assert_eq!(recs.iter().find(|r| r.term == "ha ha").unwrap().count, 3);
    }

    #[test]
    fn mid_rank_percentiles() {
        let r = percentile_ranks(&[0, 0, 5, 10]);
        assert_eq!(r, vec![0.25, 0.25, 0.625, 0.875]);
        assert!(r.iter().all(|&p| p > 0.0 && p < 1.0));
    }
}
