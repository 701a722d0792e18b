//! `--config FILE` support: a JSON object of flag values is spliced into the
//! argument list ahead of the explicit flags, which then override it.

use std::ffi::OsString;
use std::fs;

use serde_json::Value;

fn config_path(args: &[OsString]) -> Option<Result<String, String>> {
    let mut iter = args.iter().skip(2);
    while let Some(arg) = iter.next() {
        let arg = arg.to_string_lossy();
        if arg == "--config" {
            return Some(
                iter.next()
                    .map(|v| v.to_string_lossy().into_owned())
                    .ok_or_else(|| "--config needs a file".to_string()),
            );
        }
        if let Some(path) = arg.strip_prefix("--config=") {
            return Some(Ok(path.to_string()));
        }
    }
    None
}

fn flag_tokens(key: &str, value: &Value) -> Result<Vec<String>, String> {
    if key == "config" {
        return Err("a config file cannot name another config file".into());
    }
    let flag = format!("--{}", key.replace('_', "-"));
    let scalar = |v: &Value| match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(format!("config key {key:?}: unsupported value {other}")),
    };
    Ok(match value {
        Value::Null | Value::Bool(false) => Vec::new(),
        Value::Bool(true) => vec![flag],
        Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
            vec![flag, parts.join(",")]
        }
        other => vec![flag, scalar(other)?],
    })
}

/// Returns `args` with the config file's flags inserted after the subcommand.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let path = match config_path(&args) {
        None => return Ok(args),
        Some(p) => p?,
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let object = match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => map,
        Ok(_) => return Err(format!("{path}: config must be a JSON object")),
        Err(e) => return Err(format!("{path}: {e}")),
    };
    let mut injected = Vec::new();
    for (key, value) in &object {
        injected.extend(flag_tokens(key, value)?);
    }
    let mut out = args;
    let at = 2.min(out.len());
    out.splice(at..at, injected.into_iter().map(OsString::from));
    Ok(out)
}
