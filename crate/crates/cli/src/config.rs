//! `--config file.json`: every key becomes a flag placed before the
//! command-line flags, so explicit flags win.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;

/// Flags read from a JSON object. A run manifest is accepted too; its
/// `config` member is used.
pub fn flags_from_file(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))?;
    let obj = match value.get("config") {
        Some(Value::Object(o)) if value.get("command").is_some() => o.clone(),
        _ => match value {
            Value::Object(o) => o,
            _ => bail!("config {} must be a JSON object", path.display()),
        },
    };
    let mut out = Vec::new();
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Null => {}
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) => {}
            Value::Number(n) => out.extend([flag, n.to_string()]),
            Value::String(s) => out.extend([flag, s]),
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|i| match i {
                        Value::Number(n) => Ok(n.to_string()),
                        Value::String(s) => Ok(s.clone()),
                        _ => bail!("config key '{key}': only arrays of numbers or strings are supported"),
                    })
                    .collect::<Result<_>>()?;
                out.extend([flag, parts.join(",")]);
            }
            Value::Object(_) => bail!("config key '{key}': nested objects are not supported"),
        }
    }
    Ok(out)
}

/// Splices flags from `--config` right after the subcommand name.
pub fn expand_args(args: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            config = Some(it.next().context("--config requires a path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let flags = flags_from_file(Path::new(&path))?;
    // rest[0] is the program, rest[1] the subcommand.
    let at = rest.len().min(2);
    rest.splice(at..at, flags);
    Ok(rest)
}
