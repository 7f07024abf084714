//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

pub mod backward;
pub mod scan;

/// Nearest-rank `q` quantile: `sorted[ceil(q * n) - 1]`.
pub fn nearest_rank(values: &[u64], q: f64) -> u64 {
    let mut s = values.to_vec();
    s.sort_unstable();
    let k = ((q * s.len() as f64).ceil() as usize).max(1);
    s[k - 1]
}
