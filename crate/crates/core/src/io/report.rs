//! JSON run reports and CSV iteration histories.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::solver::{IterationReport, KktResiduals, StopReason};

/// Serializes non-finite PSNR values as the strings `"inf"` / `"-inf"` / `"nan"`.
pub mod psnr_value {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            None => s.serialize_none(),
            Some(v) if v.is_finite() => s.serialize_f64(*v),
            Some(v) if v.is_nan() => s.serialize_str("nan"),
            Some(v) if *v > 0.0 => s.serialize_str("inf"),
            Some(_) => s.serialize_str("-inf"),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Ok(match Option::<Raw>::deserialize(d)? {
            None => None,
            Some(Raw::Num(v)) => Some(v),
            Some(Raw::Text(t)) => Some(match t.as_str() {
                "inf" => f64::INFINITY,
                "-inf" => f64::NEG_INFINITY,
                "nan" => f64::NAN,
                other => return Err(serde::de::Error::custom(format!("bad psnr value {other:?}"))),
            }),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    #[serde(with = "psnr_value", default)]
    pub psnr_db: Option<f64>,
    #[serde(default)]
    pub ssim: Option<f64>,
    pub elapsed_ms: f64,
    pub iterations: usize,
    pub sr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<KktResiduals>,
}

impl MetricReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Header `k,relcha,feas_y_1..feas_y_N,feas_t,lagrangian,beta,elapsed_ms`.
pub fn history_csv(history: &[IterationReport]) -> String {
    let modes = history.first().map_or(0, |r| r.feas_y.len());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["k".to_string(), "relcha".to_string()];
    header.extend((1..=modes).map(|i| format!("feas_y_{i}")));
    header.extend(["feas_t", "lagrangian", "beta", "elapsed_ms"].map(String::from));
    w.write_record(&header).expect("in-memory write");
    for r in history {
        let mut row = vec![r.k.to_string(), r.relcha.to_string()];
        row.extend(r.feas_y.iter().map(f64::to_string));
        row.extend([r.feas_t, r.lagrangian, r.beta, r.elapsed_ms].map(|v| v.to_string()));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
}

pub fn save_history_csv(history: &[IterationReport], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, history_csv(history)).map_err(|e| Error::io(path, e))
}
