//! Experiment configuration: a JSON file, then `--set` overrides, then
//! `--seed`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

pub const DEFAULT_SEED: u64 = 0;

pub struct RunContext {
    pub command: &'static str,
    pub config: Value,
    pub config_dir: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
}

impl RunContext {
    pub fn load(
        command: &'static str,
        path: &Path,
        out: &Path,
        seed: Option<u64>,
        overrides: &[String],
    ) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut config: Value =
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        if !config.is_object() {
            bail!("config {} must be a JSON object", path.display());
        }
        for o in overrides {
            apply_override(&mut config, o)?;
        }
        let seed = match seed {
            Some(s) => s,
            None => match config.get("seed") {
                None | Some(Value::Null) => DEFAULT_SEED,
                Some(v) => v.as_u64().context("config seed must be a nonnegative integer")?,
            },
        };
        config
            .as_object_mut()
            .expect("checked above")
            .insert("seed".into(), Value::from(seed));
        fs::create_dir_all(out).with_context(|| format!("creating output directory {}", out.display()))?;
        Ok(RunContext {
            command,
            config,
            config_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            out: out.to_path_buf(),
            seed,
        })
    }

    /// The configuration, less the seed, as a typed record.
    pub fn parse<T: DeserializeOwned>(&self) -> Result<T> {
        let mut v = self.config.clone();
        v.as_object_mut().expect("object").remove("seed");
        serde_json::from_value(v).with_context(|| format!("invalid {} config", self.command))
    }

    /// Paths in a config are relative to the config file.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.config_dir.join(p)
        }
    }
}

/// Sets `a.b.c=value`, creating intermediate objects.
pub fn apply_override(config: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .with_context(|| format!("override {spec:?} must have the form key=value"))?;
    if key.is_empty() {
        bail!("override {spec:?} has an empty key");
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = config;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = match node {
            Value::Object(m) => m,
            _ => bail!("override {spec:?}: {} is not an object", parts[..i].join(".")),
        };
        if i + 1 == parts.len() {
            obj.insert((*part).to_string(), value);
            return Ok(());
        }
        node = obj
            .entry((*part).to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("split yields at least one part")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_nest_and_parse_json() {
        let mut v = json!({"relation": {"kind": "cmc", "h0": 1.0}});
        apply_override(&mut v, "relation.h0=0.5").unwrap();
        apply_override(&mut v, "newton.max_iter=7").unwrap();
        apply_override(&mut v, "label=abc").unwrap();
        assert_eq!(v["relation"]["h0"], json!(0.5));
        assert_eq!(v["newton"]["max_iter"], json!(7));
        assert_eq!(v["label"], json!("abc"));
        assert!(apply_override(&mut v, "novalue").is_err());
        assert!(apply_override(&mut v, "label.x=1").is_err());
    }
}
