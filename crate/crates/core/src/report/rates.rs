use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::annotation::HallucinationLabel;
use crate::probe::FactorVector;
use crate::Scalar;

/// Two-sided 95% standard normal quantile.
pub const WILSON_Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate<T> {
    pub n: usize,
    pub k: usize,
    pub rate: T,
    pub lower: T,
    pub upper: T,
}

/// Wilson score interval for `k` successes in `n` trials. `None` for n = 0.
pub fn wilson_interval<T: Scalar>(k: usize, n: usize, z: T) -> Option<RateEstimate<T>> {
    if n == 0 || k > n {
        return None;
    }
    let nf = T::from_usize(n)?;
    let p = T::from_usize(k)? / nf;
    let two = T::lit(2.0);
    let z2 = z * z;
    let denom = T::one() + z2 / nf;
    let center = (p + z2 / (two * nf)) / denom;
    let half = z * (p * (T::one() - p) / nf + z2 / (T::lit(4.0) * nf * nf)).sqrt() / denom;
    let lower = if k == 0 { T::zero() } else { (center - half).max(T::zero()) };
    let upper = if k == n { T::one() } else { (center + half).min(T::one()) };
    Some(RateEstimate { n, k, rate: p, lower, upper })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub model_id: String,
    /// `overall` for the unbinned row.
    pub factor: String,
    pub bin: usize,
    pub lower_edge: Option<f64>,
    pub upper_edge: Option<f64>,
    pub n: usize,
    pub k: usize,
    pub rate: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub rows: Vec<RateRow>,
}

/// Assigns each value to one of `bins` quantile bins. Edges are
/// nearest-rank quantiles of the values, so equal values share a bin and
/// some bins may stay empty.
pub fn quantile_bins(values: &[f64], bins: usize) -> Vec<usize> {
    if values.is_empty() || bins <= 1 {
        return vec![0; values.len()];
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let edges: Vec<f64> = (1..bins).map(|j| sorted[((j * n).div_ceil(bins)).max(1) - 1]).collect();
    values.iter().map(|v| edges.iter().filter(|e| v > e).count()).collect()
}

fn row(model: &str, factor: &str, bin: usize, edges: Option<(f64, f64)>, labels: &[u8]) -> Option<RateRow> {
    let k = labels.iter().filter(|&&l| l == 1).count();
    let est: RateEstimate<f64> = wilson_interval(k, labels.len(), WILSON_Z95)?;
    Some(RateRow {
        model_id: model.to_string(),
        factor: factor.to_string(),
        bin,
        lower_edge: edges.map(|e| e.0),
        upper_edge: edges.map(|e| e.1),
        n: est.n,
        k: est.k,
        rate: est.rate,
        ci_lower: est.lower,
        ci_upper: est.upper,
    })
}

/// Per-model overall rates, plus per-bin rates for each named factor.
/// Empty groups are omitted with a warning.
pub fn rate_summary(labels: &[HallucinationLabel], factors: &[FactorVector], factor_names: &[String], bins: usize) -> RateSummary {
    let by_id: BTreeMap<&str, &FactorVector> = factors.iter().map(|f| (f.instance_id.as_str(), f)).collect();
    let mut per_model: BTreeMap<&str, Vec<&HallucinationLabel>> = BTreeMap::new();
    for l in labels {
        per_model.entry(&l.model_id).or_default().push(l);
    }
    let mut rows = Vec::new();
    for (model, ls) in &per_model {
        let all: Vec<u8> = ls.iter().map(|l| l.label).collect();
        rows.extend(row(model, "overall", 0, None, &all));
        for name in factor_names {
            let present: Vec<(f64, u8)> = ls
                .iter()
                .filter_map(|l| by_id.get(l.instance_id.as_str()).and_then(|f| f.values.get(name)).map(|v| (*v, l.label)))
                .collect();
            if present.len() < ls.len() {
                log::warn!("{} of {} labels for {model} lack factor `{name}`", ls.len() - present.len(), ls.len());
            }
            let assignment = quantile_bins(&present.iter().map(|p| p.0).collect::<Vec<_>>(), bins);
            for b in 0..bins.max(1) {
                let members: Vec<(f64, u8)> =
                    present.iter().zip(&assignment).filter(|(_, &a)| a == b).map(|(p, _)| *p).collect();
                if members.is_empty() {
                    log::warn!("{model}: bin {b} of `{name}` is empty, omitted");
                    continue;
                }
                let lo = members.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
                let hi = members.iter().map(|m| m.0).fold(f64::NEG_INFINITY, f64::max);
                let ys: Vec<u8> = members.iter().map(|m| m.1).collect();
                rows.extend(row(model, name, b, Some((lo, hi)), &ys));
            }
        }
    }
    RateSummary { rows }
}

impl RateSummary {
    pub fn overall(&self, model: &str) -> Option<&RateRow> {
        self.rows.iter().find(|r| r.model_id == model && r.factor == "overall")
    }

    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self, ReportError> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        Ok(RateSummary { rows: rd.deserialize().collect::<Result<_, _>>()? })
    }
}
