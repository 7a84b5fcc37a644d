//! Result files: JSON summaries and CSV tables.

use std::fs;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunContext;

/// One numerical check, with the formula it instantiates.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub formula: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Check {
    /// `|value - expected| <= tolerance`.
    pub fn close(name: &str, formula: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            formula: formula.into(),
            value,
            expected: Some(expected),
            tolerance: Some(tolerance),
            passed: (value - expected).abs() <= tolerance,
        }
    }

    /// A computed quantity with a pass/fail judgement made by the caller.
    pub fn holds(name: &str, formula: &str, value: f64, passed: bool) -> Self {
        Check {
            name: name.into(),
            formula: formula.into(),
            value,
            expected: None,
            tolerance: None,
            passed,
        }
    }
}

/// Writes `<command>.json` with the command name, seed and config echo,
/// and prints it to stdout.
pub fn write_summary(ctx: &RunContext, body: Value) -> Result<()> {
    let mut doc = json!({
        "command": ctx.command,
        "seed": ctx.seed,
        "config": ctx.config,
    });
    if let (Some(d), Value::Object(b)) = (doc.as_object_mut(), body) {
        d.extend(b);
    }
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    let path = ctx.out.join(format!("{}.json", ctx.command));
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    print!("{text}");
    Ok(())
}

pub fn write_file(ctx: &RunContext, name: &str, contents: &str) -> Result<()> {
    let path = ctx.out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}
