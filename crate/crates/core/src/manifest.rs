//! JSON run manifest written next to completion outputs.
//!
//! Field order is fixed by the struct layout, so serialization is
//! deterministic. Non-finite metrics (PSNR of identical images) are written as
//! the strings `"inf"` / `"-inf"` / `"nan"` so the manifest round-trips.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::completion::{SolveReport, SolverConfig};
use crate::error::Result;
use crate::mask::MaskSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskSource {
    File(String),
    Spec(MaskSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub image: String,
    pub report: Option<String>,
    pub trace: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(with = "extended_f64")]
    pub psnr: f64,
    #[serde(with = "extended_f64")]
    pub ssim: f64,
    #[serde(with = "extended_f64")]
    pub rmse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub input: String,
    pub mask: MaskSource,
    pub missing_ratio: f64,
    pub config: SolverConfig,
    pub outputs: OutputPaths,
    /// Output against the input image (observed pixels are the only ground
    /// truth the tool has unless a reference is supplied).
    pub metrics: Option<Metrics>,
    pub solve: SolveReport,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }
}

mod extended_f64 {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(de::Error::custom(format!("expected a number, got {other:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunManifest {
        let config = SolverConfig::new(85);
        RunManifest {
            tool: "quatcomp".into(),
            version: "0.1.0".into(),
            input: "in.ppm".into(),
            mask: MaskSource::Spec(MaskSpec::Random { mr: 0.7, seed: 3 }),
            missing_ratio: 0.7,
            config,
            outputs: OutputPaths {
                image: "out.ppm".into(),
                report: Some("run.json".into()),
                trace: None,
            },
            metrics: Some(Metrics {
                psnr: f64::INFINITY,
                ssim: 1.0,
                rmse: 0.0,
            }),
            solve: SolveReport {
                iterations: 2,
                converged: true,
                rel_change: 0.0,
                lowrank_residual: 1.5,
                sparse_residual: 0.25,
                wall_time_secs: 0.125,
                config,
            },
        }
    }

    #[test]
    fn round_trip_with_infinite_psnr() {
        let m = sample();
        let text = m.to_json().unwrap();
        assert!(text.contains("\"psnr\": \"inf\""));
        assert_eq!(RunManifest::from_json(&text).unwrap(), m);
    }

    #[test]
    fn stable_key_order() {
        let text = sample().to_json().unwrap();
        assert_eq!(text, sample().to_json().unwrap());
        let keys = ["\"tool\"", "\"version\"", "\"input\"", "\"mask\"", "\"config\"", "\"outputs\"", "\"metrics\"", "\"solve\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn mask_file_variant() {
        let mut m = sample();
        m.mask = MaskSource::File("mask.pgm".into());
        m.metrics = None;
        let text = m.to_json().unwrap();
        assert_eq!(RunManifest::from_json(&text).unwrap(), m);
        assert!(RunManifest::from_json("{\"tool\": 1}").is_err());
    }
}
