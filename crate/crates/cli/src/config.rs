use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// Reads a JSON config whose `kind` must equal `kind`. Top-level fields it omits
/// keep their values from `defaults`; without a path `defaults` is returned.
pub fn load<T: DeserializeOwned + Serialize>(path: Option<&Path>, kind: &str, defaults: T) -> Result<T> {
    let Some(path) = path else {
        return Ok(defaults);
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text, kind, &defaults).with_context(|| format!("in config {}", path.display()))
}

pub fn parse<T: DeserializeOwned + Serialize>(text: &str, kind: &str, defaults: &T) -> Result<T> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| anyhow!("malformed JSON: {e}"))?;
    let map = doc.as_object_mut().ok_or_else(|| anyhow!("config must be a JSON object"))?;
    match map.remove("kind") {
        Some(Value::String(k)) if k == kind => {}
        Some(Value::String(k)) => bail!("config kind `{k}` does not match subcommand `{kind}`"),
        Some(other) => bail!("field `kind` must be a string, found {other}"),
        None => bail!("missing field `kind` (expected \"{kind}\")"),
    }
    let mut merged = serde_json::to_value(defaults)?;
    if let (Some(base), Value::Object(user)) = (merged.as_object_mut(), doc) {
        base.extend(user);
    }
    serde_path_to_error::deserialize(merged).map_err(|e| {
        let path = e.path().to_string();
        anyhow!("field `{path}`: {}", e.into_inner())
    })
}
