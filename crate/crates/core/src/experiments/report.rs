use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::Mode;
use crate::error::{Error, Result};
use crate::hyperbola::AsymptoticModel;
use crate::local::DensityReport;

pub const CSV_HEADER: &str = "scale,exact,prediction,ratio,residual";

/// One grid point. Absent fields are "not applicable".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub scale: f64,
    /// Exact count as a decimal string, since it may exceed 64 bits.
    pub exact: Option<String>,
    pub prediction: Option<f64>,
    pub ratio: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub mode: Mode,
    pub version: String,
    /// Canonical echo of the configuration.
    pub config: String,
    /// Leading constant with the operational normalization of the real density.
    pub constant: Option<f64>,
    /// The same constant with the printed normalization `2^k Σ_η I⁺(ηc)`.
    pub constant_printed: Option<f64>,
    pub expected_constant: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub rows: Vec<Row>,
    pub density: Option<DensityReport>,
    pub model: Option<AsymptoticModel>,
    /// Wall-clock seconds per stage. Kept out of the serialized report so
    /// that reruns stay byte-identical.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

fn field(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => x.to_string(),
        _ => "NA".into(),
    }
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.scale,
                r.exact.as_deref().unwrap_or("NA"),
                field(r.prediction),
                field(r.ratio),
                field(r.residual)
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Consistency(format!("report serialization: {e}")))
    }
}

/// `exact / prediction`, or `None` when the prediction vanishes.
pub(crate) fn ratio(exact: f64, prediction: f64) -> Option<f64> {
    (prediction != 0.0 && prediction.is_finite()).then(|| exact / prediction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_marks_missing_fields() {
        let r = Report {
            meta: Meta {
                mode: Mode::Count,
                version: "0".into(),
                config: String::new(),
                constant: None,
                constant_printed: None,
                expected_constant: None,
                notes: vec![],
            },
            rows: vec![Row {
                scale: 100.0,
                exact: Some("1536".into()),
                prediction: None,
                ratio: None,
                residual: Some(f64::NAN),
            }],
            density: None,
            model: None,
            timings: vec![("count".into(), 1.0)],
        };
        assert_eq!(r.to_csv(), format!("{CSV_HEADER}\n100,1536,NA,NA,NA\n"));
        let json = r.to_json().unwrap();
        assert!(json.contains("\"rows\"") && json.contains("\"meta\""));
        assert!(!json.contains("timings"));
    }
}
