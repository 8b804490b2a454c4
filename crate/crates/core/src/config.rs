//! Run configuration: one JSON file, sections per stage, dotted overrides.
//!
//! ```json
//! { "synth": { "seed": 3 }, "eval": { "k_folds": 6, "positive_class": "nonalpha" } }
//! ```
//!
//! Missing fields take their defaults; unknown fields are rejected. On the
//! command line `--eval.k_folds=6` overrides a single field, with the value
//! parsed as JSON and falling back to a plain string.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::dataset::{builtin_setup, builtin_setups, SetUp};
use crate::error::{Error, Result};
use crate::eval::{ComfortRanking, EvalConfig, PipelineConfig};
use crate::features::FeatureConfig;
use crate::model::TrainConfig;
use crate::synthgen::{SynthConfig, DEFAULT_N_RECORDINGS};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub data_dir: PathBuf,
    pub model_dir: PathBuf,
    pub report_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            data_dir: "data".into(),
            model_dir: "models".into(),
            report_dir: "reports".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub synth: SynthConfig,
    pub n_recordings: usize,
    pub features: FeatureConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub setups: Vec<String>,
    pub comfort: ComfortRanking,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            synth: SynthConfig::default(),
            n_recordings: DEFAULT_N_RECORDINGS,
            features: FeatureConfig::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
            setups: builtin_setups().into_iter().map(|s| s.name).collect(),
            comfort: ComfortRanking::default(),
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    /// Parses a config document; errors carry the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
        Ok(cfg)
    }

    /// Loads `path` (or the defaults), applies `overrides` in order and
    /// validates the result.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let base = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                RunConfig::from_json(&text)
                    .map_err(|e| Error::Parse(format!("{}: {}", p.display(), e.to_string().trim_start_matches("parse error: "))))?
            }
            None => RunConfig::default(),
        };
        let cfg = base.with_overrides(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut value = serde_json::to_value(self).map_err(|e| Error::Parse(e.to_string()))?;
        for (key, raw) in overrides {
            set_path(&mut value, key, parse_value(raw))?;
        }
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("config override: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        self.features.validate()?;
        self.train.validate()?;
        self.eval.validate()?;
        if self.n_recordings == 0 {
            return Err(Error::invariant("n_recordings must be positive"));
        }
        if self.setups.is_empty() {
            return Err(Error::invariant("setups must name at least one set-up"));
        }
        self.resolve_setups()?;
        Ok(())
    }

    pub fn resolve_setups(&self) -> Result<Vec<SetUp>> {
        self.setups.iter().map(|n| builtin_setup(n)).collect()
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            features: self.features.clone(),
            train: self.train.clone(),
            eval: self.eval.clone(),
        }
    }

    /// Applies one seed to generation, training and fold assignment.
    pub fn set_seed(&mut self, seed: u64) {
        self.synth.seed = seed;
        self.train.seed = seed;
        self.eval.seed = seed;
    }

    /// Hex SHA-256 of the canonical JSON form, excluding output paths.
    pub fn hash(&self) -> String {
        let mut v = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(m) = &mut v {
            m.remove("paths");
        }
        sha256_hex(v.to_string().as_bytes())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `--a.b=v` / `a.b=v` to `("a.b", "v")`.
pub fn parse_override(arg: &str) -> Result<(String, String)> {
    let body = arg.trim_start_matches("--");
    let (key, value) = body
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("override {arg:?} must look like --section.field=value")))?;
    if key.is_empty() {
        return Err(Error::Parse(format!("override {arg:?} has an empty key")));
    }
    Ok((key.to_string(), value.to_string()))
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(root: &mut Value, key: &str, new: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Parse(format!("override {key}: {} is not a section", parts[..i].join("."))))?;
        let known = obj.contains_key(*part);
        if i + 1 == parts.len() {
            if !known && !obj.is_empty() {
                return Err(Error::Parse(format!("override {key}: unknown field {part}")));
            }
            obj.insert(part.to_string(), new);
            return Ok(());
        }
        cur = obj
            .get_mut(*part)
            .ok_or_else(|| Error::Parse(format!("override {key}: unknown field {part}")))?;
    }
    unreachable!("split yields at least one part")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;
    use crate::eval::ThresholdRule;

    fn ov(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.setups.len(), 6);
        assert_eq!(c.eval.k_folds, 6);
        assert_eq!(c.n_recordings, 9);
    }

    #[test]
    fn partial_file_fills_defaults() {
        let c = RunConfig::from_json(r#"{"eval": {"k_folds": 3}}"#).unwrap();
        assert_eq!(c.eval.k_folds, 3);
        assert_eq!(c.synth, SynthConfig::default());
    }

    #[test]
    fn parse_error_has_line_number() {
        let err = RunConfig::from_json("{\n  \"eval\": {\n    \"k_folds\": 6,\n  }\n}").unwrap_err();
        assert!(err.to_string().contains("line 4"), "{err}");
        let err = RunConfig::from_json("{\n \"bogus\": 1\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn dotted_overrides() {
        let c = RunConfig::default()
            .with_overrides(&ov(&[
                ("eval.k_folds", "4"),
                ("eval.positive_class", "nonalpha"),
                ("synth.spatial_gain.Oz", "0.9"),
                ("eval.threshold", r#"{"kind":"oracle_best_f"}"#),
                ("paths.data_dir", "/tmp/x"),
            ]))
            .unwrap();
        assert_eq!(c.eval.k_folds, 4);
        assert_eq!(c.eval.positive_class, Label::NonAlpha);
        assert_eq!(c.synth.spatial_gain[&crate::ElectrodeName::Oz], 0.9);
        assert_eq!(c.eval.threshold, ThresholdRule::OracleBestF);
        assert_eq!(c.paths.data_dir, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn bad_overrides() {
        let d = RunConfig::default();
        assert!(d.with_overrides(&ov(&[("eval.nope", "1")])).is_err());
        assert!(d.with_overrides(&ov(&[("eval.k_folds.x", "1")])).is_err());
        assert!(d.with_overrides(&ov(&[("eval.k_folds", "six")])).is_err());
        assert!(parse_override("--eval.k_folds").is_err());
        assert_eq!(parse_override("--eval.k_folds=6").unwrap(), ("eval.k_folds".into(), "6".into()));
    }

    #[test]
    fn unknown_setup_rejected() {
        let c = RunConfig { setups: vec!["CzOz".into(), "nape".into()], ..Default::default() };
        assert!(matches!(c.validate(), Err(Error::UnknownSetUp(_))));
    }

    #[test]
    fn hash_tracks_content_not_paths() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.paths.report_dir = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.set_seed(5);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let back = RunConfig::from_json(&a.to_json()).unwrap();
        assert_eq!(back.hash(), a.hash());
    }
}
