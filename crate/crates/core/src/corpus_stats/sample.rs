use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, FrequencyRecord};

/// Sampling threshold used by default: the lowest 30% of the frequency
/// distribution.
pub const DEFAULT_PERCENTILE: f64 = 0.30;

/// Uniform sample without replacement from records whose percentile rank is
/// at most `percentile`, returned sorted by `(count, term)`.
pub fn sample_low_frequency_terms(
    records: &[FrequencyRecord],
    percentile: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<FrequencyRecord>, CorpusError> {
    if !(percentile > 0.0 && percentile <= 1.0) {
        return Err(CorpusError::InvalidPercentile(percentile));
    }
    let mut eligible: Vec<&FrequencyRecord> = records.iter().filter(|r| r.percentile_rank <= percentile).collect();
    if n > eligible.len() {
        return Err(CorpusError::InsufficientTerms { requested: n, available: eligible.len() });
    }
    // canonical order so the draw depends only on content and seed
    eligible.sort_by(|a, b| a.term.cmp(&b.term));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<FrequencyRecord> = eligible.choose_multiple(&mut rng, n).map(|r| (*r).clone()).collect();
    picked.sort_by(|a, b| a.count.cmp(&b.count).then_with(|| a.term.cmp(&b.term)));
    Ok(picked)
}
