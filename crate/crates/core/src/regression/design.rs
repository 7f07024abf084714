use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::RegressionError;
use crate::probe::FactorVector;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorRole {
    RiskFactor,
    Confounder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    Identity,
    Log10,
    /// `log10(1 + x)`, for counts that may be zero.
    Log10p1,
    /// Standardized with the sample mean and standard deviation of the
    /// assembled rows.
    Zscore,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorColumn {
    pub name: String,
    pub role: FactorRole,
    #[serde(default)]
    pub transform: Transform,
}

impl FactorColumn {
    pub fn risk(name: &str, transform: Transform) -> Self {
        FactorColumn { name: name.to_string(), role: FactorRole::RiskFactor, transform }
    }

    pub fn confounder(name: &str, transform: Transform) -> Self {
        FactorColumn { name: name.to_string(), role: FactorRole::Confounder, transform }
    }
}

/// Ordered regression columns. The intercept is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSpec {
    pub columns: Vec<FactorColumn>,
}

impl FactorSpec {
    pub fn new(columns: Vec<FactorColumn>) -> Result<Self, RegressionError> {
        let spec = FactorSpec { columns };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), RegressionError> {
        let mut names = HashSet::new();
        for c in &self.columns {
            if c.name == INTERCEPT {
                return Err(RegressionError::InvalidSpec(format!("`{INTERCEPT}` is reserved")));
            }
            if !names.insert(c.name.as_str()) {
                return Err(RegressionError::InvalidSpec(format!("duplicate column `{}`", c.name)));
            }
        }
        if !self.columns.iter().any(|c| c.role == FactorRole::RiskFactor) {
            return Err(RegressionError::InvalidSpec("at least one risk factor is required".into()));
        }
        Ok(())
    }
}

pub(crate) const INTERCEPT: &str = "(intercept)";

/// Row-major `n × (p + 1)` matrix whose first column is all ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignMatrix<T> {
    pub instance_ids: Vec<String>,
    pub column_names: Vec<String>,
    pub data: Vec<T>,
    pub n_rows: usize,
    pub n_cols: usize,
}

impl<T: Scalar> DesignMatrix<T> {
    /// Builds a matrix from raw rows, prepending the intercept column.
    pub fn from_rows(column_names: &[&str], rows: &[Vec<T>]) -> Self {
        let n_cols = column_names.len() + 1;
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            assert_eq!(r.len() + 1, n_cols, "row width must match column names");
            data.push(T::one());
            data.extend_from_slice(r);
        }
        let mut names = vec![INTERCEPT.to_string()];
        names.extend(column_names.iter().map(|s| s.to_string()));
        DesignMatrix {
            instance_ids: (0..rows.len()).map(|i| i.to_string()).collect(),
            column_names: names,
            data,
            n_rows: rows.len(),
            n_cols,
        }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.n_rows).map(|i| self.data[i * self.n_cols + j]).collect()
    }

    /// Copy with column `j` multiplied by `c`.
    pub fn scale_column(&self, j: usize, c: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.n_rows {
            out.data[i * self.n_cols + j] *= c;
        }
        out
    }
}

/// Assembles the design matrix and outcome vector for every labeled
/// instance, ordered by instance id.
pub fn build_design_matrix<T: Scalar>(
    factor_rows: &[FactorVector],
    labels: &BTreeMap<String, u8>,
    spec: &FactorSpec,
) -> Result<(DesignMatrix<T>, Vec<T>), RegressionError> {
    spec.validate()?;
    let by_id: HashMap<&str, &FactorVector> = factor_rows.iter().map(|r| (r.instance_id.as_str(), r)).collect();

    let ids: Vec<&String> = labels.keys().collect();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(spec.columns.len());
    for col in &spec.columns {
        let mut values = Vec::with_capacity(ids.len());
        for id in &ids {
            let raw = by_id
                .get(id.as_str())
                .and_then(|r| r.values.get(&col.name))
                .copied()
                .ok_or_else(|| RegressionError::MissingFactor { instance: (*id).clone(), column: col.name.clone() })?;
            let v = match col.transform {
                Transform::Identity | Transform::Zscore => raw,
                Transform::Log10 => {
                    if !(raw > 0.0) {
                        return Err(RegressionError::TransformDomainError {
                            instance: (*id).clone(),
                            column: col.name.clone(),
                            value: raw,
                        });
                    }
                    raw.log10()
                }
                Transform::Log10p1 => {
                    if !(raw > -1.0) {
                        return Err(RegressionError::TransformDomainError {
                            instance: (*id).clone(),
                            column: col.name.clone(),
                            value: raw,
                        });
                    }
                    raw.ln_1p() / std::f64::consts::LN_10
                }
            };
            if !v.is_finite() {
                return Err(RegressionError::NonFinite(col.name.clone()));
            }
            values.push(v);
        }
        if col.transform == Transform::Zscore {
            zscore(&mut values).ok_or_else(|| {
                RegressionError::InvalidSpec(format!("column `{}` has zero variance and cannot be standardized", col.name))
            })?;
        }
        columns.push(values);
    }

    let n_cols = spec.columns.len() + 1;
    let mut data = Vec::with_capacity(ids.len() * n_cols);
    for i in 0..ids.len() {
        data.push(T::one());
        for c in &columns {
            data.push(T::lit(c[i]));
        }
    }
    let y = labels
        .values()
        .map(|&l| match l {
            0 => Ok(T::zero()),
            1 => Ok(T::one()),
            _ => Err(RegressionError::InvalidOutcome),
        })
        .collect::<Result<Vec<T>, _>>()?;
    let mut column_names = vec![INTERCEPT.to_string()];
    column_names.extend(spec.columns.iter().map(|c| c.name.clone()));
    Ok((
        DesignMatrix { instance_ids: ids.into_iter().cloned().collect(), column_names, data, n_rows: labels.len(), n_cols },
        y,
    ))
}

fn zscore(values: &mut [f64]) -> Option<()> {
    let n = values.len() as f64;
    if values.len() < 2 {
        return None;
    }
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if !(sd > 0.0) {
        return None;
    }
    for v in values.iter_mut() {
        *v = (*v - mean) / sd;
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> (Vec<FactorVector>, BTreeMap<String, u8>) {
        let mut f = Vec::new();
        let mut labels = BTreeMap::new();
        for (i, (freq, len)) in [(1000.0, 3.0), (10.0, 8.0), (100.0, 1.0), (1.0, 4.0)].iter().enumerate() {
            let id = format!("i{i}");
            f.push(FactorVector { instance_id: id.clone(), values: [("freq".into(), *freq), ("len".into(), *len)].into() });
            labels.insert(id, (i % 2) as u8);
        }
        (f, labels)
    }

    #[test]
    fn intercept_log10_and_zscore() {
        let (f, labels) = rows();
        let spec =
            FactorSpec::new(vec![FactorColumn::risk("freq", Transform::Log10), FactorColumn::confounder("len", Transform::Zscore)])
                .unwrap();
        let (x, y) = build_design_matrix::<f64>(&f, &labels, &spec).unwrap();
        assert_eq!(x.column(0), vec![1.0; 4]);
        assert_eq!(x.column(1)[0], 3.0);
        let z = x.column(2);
        let mean = z.iter().sum::<f64>() / 4.0;
        let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
        assert!(mean.abs() < 1e-12);
        assert!((sd - 1.0).abs() < 1e-12);
        assert_eq!(y, vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(x.column_names, ["(intercept)", "freq", "len"]);
    }

    #[test]
    fn missing_value_and_domain_errors() {
        let (mut f, labels) = rows();
        f[2].values.remove("len");
        let spec = FactorSpec::new(vec![FactorColumn::risk("len", Transform::Identity)]).unwrap();
        assert_eq!(
            build_design_matrix::<f64>(&f, &labels, &spec).unwrap_err(),
            RegressionError::MissingFactor { instance: "i2".into(), column: "len".into() }
        );
        let (mut f, labels) = rows();
        f[1].values.insert("freq".into(), 0.0);
        let spec = FactorSpec::new(vec![FactorColumn::risk("freq", Transform::Log10)]).unwrap();
        assert!(matches!(build_design_matrix::<f64>(&f, &labels, &spec), Err(RegressionError::TransformDomainError { .. })));
        let spec = FactorSpec::new(vec![FactorColumn::risk("freq", Transform::Log10p1)]).unwrap();
        let (x, _) = build_design_matrix::<f64>(&f, &labels, &spec).unwrap();
        assert_eq!(x.column(1)[1], 0.0);
    }

    #[test]
    fn spec_validation() {
        assert!(FactorSpec::new(vec![FactorColumn::confounder("a", Transform::Identity)]).is_err());
        assert!(FactorSpec::new(vec![
            FactorColumn::risk("a", Transform::Identity),
            FactorColumn::confounder("a", Transform::Identity)
        ])
        .is_err());
    }
}
