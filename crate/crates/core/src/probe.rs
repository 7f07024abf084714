//! Probe instances and per-instance factor vectors.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    CommonsenseQa,
    Relational,
    Cnli,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::CommonsenseQa => "commonsense_qa",
            TaskKind::Relational => "relational",
            TaskKind::Cnli => "cnli",
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "commonsense_qa" | "commonsense" => Ok(TaskKind::CommonsenseQa),
            "relational" | "nlsat" => Ok(TaskKind::Relational),
            "cnli" => Ok(TaskKind::Cnli),
            other => Err(format!("unknown task kind `{other}`")),
        }
    }
}

/// One probe: what the model is given (context, instruction, full prompt)
/// and the reference the annotators compare against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeInstance {
    pub id: String,
    pub task: TaskKind,
    #[serde(default)]
    pub context: String,
    pub instruction: String,
    pub prompt: String,
    #[serde(default)]
    pub reference: String,
    /// Risk-factor and confounder values on their raw scale.
    #[serde(default)]
    pub factors: BTreeMap<String, f64>,
}

impl ProbeInstance {
    pub fn factor_vector(&self) -> FactorVector {
        FactorVector { instance_id: self.id.clone(), values: self.factors.clone() }
    }
}

/// Named factor values for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorVector {
    pub instance_id: String,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum FactorCsvError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("factors csv has no `instance_id` column")]
    MissingIdColumn,
    #[error("line {line}: column `{column}`: `{value}` is not a number")]
    BadValue { line: u64, column: String, value: String },
}

/// Writes `factors.csv`: `instance_id` followed by the union of factor names
/// in sorted order. Missing values are left empty.
pub fn write_factors_csv(path: &Path, rows: &[FactorVector]) -> Result<(), FactorCsvError> {
    let mut columns: Vec<&str> = rows.iter().flat_map(|r| r.values.keys().map(String::as_str)).collect();
    columns.sort_unstable();
    columns.dedup();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["instance_id"];
    header.extend(columns.iter().copied());
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.instance_id.clone()];
        for c in &columns {
            record.push(row.values.get(*c).map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_factors_csv(path: &Path) -> Result<Vec<FactorVector>, FactorCsvError> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let id_col = headers.iter().position(|h| h == "instance_id").ok_or(FactorCsvError::MissingIdColumn)?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let mut values = BTreeMap::new();
        for (i, field) in record.iter().enumerate() {
            if i == id_col || field.is_empty() {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| FactorCsvError::BadValue {
                line,
                column: headers[i].to_string(),
                value: field.to_string(),
            })?;
            values.insert(headers[i].to_string(), v);
        }
        rows.push(FactorVector { instance_id: record[id_col].to_string(), values });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factors_csv_round_trips_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("factors.csv");
        let rows = vec![
            FactorVector { instance_id: "a".into(), values: [("x".to_string(), 0.1 + 0.2), ("y".to_string(), -1e-300)].into() },
            FactorVector { instance_id: "b".into(), values: [("x".to_string(), 3.0)].into() },
        ];
        write_factors_csv(&path, &rows).unwrap();
        assert_eq!(read_factors_csv(&path).unwrap(), rows);
    }
}
