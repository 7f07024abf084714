use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{render_rates_svg, CoefficientTable, RateSummary, ReportError};

/// Where every number in a bundle came from. Holds no timestamps so
/// reruns on unchanged inputs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_digest: String,
    /// Artifact name to hex SHA-256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub software_version: String,
    pub seed: u64,
}

pub fn file_digest(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub task: String,
    pub tables: Vec<CoefficientTable>,
    pub rates: RateSummary,
    /// Raw percent agreement between annotators, when two were present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotator_agreement: Option<f64>,
    pub provenance: Provenance,
}

impl ReportBundle {
    /// Writes `report.json`, `coefficients.csv`, `coefficients.txt`,
    /// `rates.csv` and `rates.svg` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), ReportError> {
        fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(self).expect("bundle serializes");
        json.push('\n');
        fs::write(dir.join("report.json"), json)?;
        let mut csv_out = String::new();
        let mut text = String::new();
        for (i, t) in self.tables.iter().enumerate() {
            let c = t.to_csv()?;
            // keep one header line across tables
            csv_out.push_str(if i == 0 { &c } else { c.split_once('\n').map_or("", |x| x.1) });
            text.push_str(&t.render(6));
            text.push('\n');
        }
        fs::write(dir.join("coefficients.csv"), csv_out)?;
        fs::write(dir.join("coefficients.txt"), text)?;
        fs::write(dir.join("rates.csv"), self.rates.to_csv()?)?;
        fs::write(dir.join("rates.svg"), render_rates_svg(&self.rates, &format!("Hallucination rate, {}", self.task)))?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self, ReportError> {
        let bytes = fs::read(dir.join("report.json"))?;
        serde_json::from_slice(&bytes).map_err(|e| ReportError::Csv(format!("report.json: {e}")))
    }
}
