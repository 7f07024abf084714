use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::regression::{round_to, RegressionResult};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub beta: f64,
    pub se: f64,
    pub z: f64,
    pub p: f64,
    pub odds_ratio: f64,
    pub stars: String,
}

/// Rows are models, columns are coefficients. A missing cell means the
/// model's fit did not include that coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub title: String,
    pub models: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Vec<Option<TableCell>>>,
}

/// Two decimals with a true minus sign, e.g. `−0.53`.
pub fn format_beta(beta: f64) -> String {
    let s = format!("{:.2}", beta.abs());
    if beta < 0.0 && s != "0.00" {
        format!("\u{2212}{s}")
    } else {
        s
    }
}

pub fn coefficient_table<T: Scalar>(
    title: &str,
    results: &[(String, &RegressionResult<T>)],
) -> Result<CoefficientTable, ReportError> {
    if results.is_empty() {
        return Err(ReportError::EmptyReport);
    }
    let mut columns: Vec<String> = Vec::new();
    for (_, r) in results {
        for c in &r.coefficients {
            if !columns.contains(&c.name) {
                columns.push(c.name.clone());
            }
        }
    }
    let cells = results
        .iter()
        .map(|(_, r)| {
            columns
                .iter()
                .map(|name| {
                    r.coefficient(name).map(|c| TableCell {
                        beta: c.beta.as_f64(),
                        se: c.se.as_f64(),
                        z: c.z.as_f64(),
                        p: c.p.as_f64(),
                        odds_ratio: c.odds_ratio.as_f64(),
                        stars: c.stars.clone(),
                    })
                })
                .collect()
        })
        .collect();
    Ok(CoefficientTable { title: title.to_string(), models: results.iter().map(|(m, _)| m.clone()).collect(), columns, cells })
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    table: String,
    model: String,
    coefficient: String,
    beta: f64,
    se: f64,
    z: f64,
    p: f64,
    odds_ratio: f64,
    stars: String,
}

impl CoefficientTable {
    /// `width` characters on each side of the zero axis.
    /// Lengths follow the displayed two-decimal values.
    fn bar(&self, col: usize, beta: f64, width: usize) -> String {
        let beta = round_to(beta, 2);
        let max = self
            .cells
            .iter()
            .filter_map(|row| row[col].as_ref())
            .map(|c| round_to(c.beta, 2).abs())
            .fold(0.0, f64::max);
        let len = if max > 0.0 { ((beta.abs() / max) * width as f64).round() as usize } else { 0 };
        let fill = "\u{2588}".repeat(len);
        if beta < 0.0 {
            format!("{}{fill}|{}", " ".repeat(width - len), " ".repeat(width))
        } else {
            format!("{}|{fill}{}", " ".repeat(width), " ".repeat(width - len))
        }
    }

    pub fn cell_text(cell: &TableCell) -> String {
        if cell.stars.is_empty() {
            format_beta(cell.beta)
        } else {
            format!("{} {}", format_beta(cell.beta), cell.stars)
        }
    }

    /// Plain-text rendering with bars anchored on a shared zero axis per
    /// column.
    pub fn render(&self, bar_width: usize) -> String {
        let mut grid: Vec<Vec<String>> = vec![std::iter::once("model".to_string()).chain(self.columns.iter().cloned()).collect()];
        for (r, model) in self.models.iter().enumerate() {
            let mut row = vec![model.clone()];
            for (c, cell) in self.cells[r].iter().enumerate() {
                row.push(match cell {
                    Some(cell) => format!("{} {}", self.bar(c, cell.beta, bar_width), Self::cell_text(cell)),
                    None => "-".into(),
                });
            }
            grid.push(row);
        }
        let ncol = grid[0].len();
        let widths: Vec<usize> = (0..ncol).map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "{}", self.title);
        }
        for (i, row) in grid.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
            if i == 0 {
                let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
            }
        }
        out
    }

    /// Long-format CSV, one row per present cell. Floats are written in
    /// shortest round-trip form.
    pub fn to_csv(&self) -> Result<String, ReportError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (r, model) in self.models.iter().enumerate() {
            for (c, name) in self.columns.iter().enumerate() {
                if let Some(cell) = &self.cells[r][c] {
                    w.serialize(CsvRow {
                        table: self.title.clone(),
                        model: model.clone(),
                        coefficient: name.clone(),
                        beta: cell.beta,
                        se: cell.se,
                        z: cell.z,
                        p: cell.p,
                        odds_ratio: cell.odds_ratio,
                        stars: cell.stars.clone(),
                    })?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn from_csv(text: &str) -> Result<Self, ReportError> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<CsvRow> = rd.deserialize().collect::<Result<_, _>>()?;
        let first = rows.first().ok_or(ReportError::EmptyReport)?;
        let title = first.table.clone();
        let mut models: Vec<String> = Vec::new();
        let mut columns: Vec<String> = Vec::new();
        for row in &rows {
            if !models.contains(&row.model) {
                models.push(row.model.clone());
            }
            if !columns.contains(&row.coefficient) {
                columns.push(row.coefficient.clone());
            }
        }
        let mut cells = vec![vec![None; columns.len()]; models.len()];
        for row in rows {
            let r = models.iter().position(|m| *m == row.model).expect("model indexed");
            let c = columns.iter().position(|m| *m == row.coefficient).expect("column indexed");
            cells[r][c] = Some(TableCell {
                beta: row.beta,
                se: row.se,
                z: row.z,
                p: row.p,
                odds_ratio: row.odds_ratio,
                stars: row.stars,
            });
        }
        Ok(CoefficientTable { title, models, columns, cells })
    }
}
