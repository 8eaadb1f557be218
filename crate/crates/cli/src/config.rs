//! Flat `key=value` config files and the effective-config echo.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use serde::Serialize;

use crate::error::CliError;

/// `key = value` per line; blank lines and `#` comments are skipped.
/// Underscores in keys are read as dashes so `pi_thr` and `pi-thr` agree.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", lineno + 1)));
        }
        entries.push((key, value.trim().to_string()));
    }
    Ok(entries)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn flag_given(args: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let with_eq = format!("--{key}=");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == long.as_str() || s.starts_with(&with_eq)
    })
}

/// Append the config file's entries as `--key=value` for every key not
/// already given on the command line.
pub fn merge_config_file(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut merged = args.clone();
    for (key, value) in parse_config(&text)? {
        if key == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        if !flag_given(&args, &key) {
            merged.push(format!("--{key}={value}").into());
        }
    }
    Ok(merged)
}

/// The serialised command options flattened to `key -> value` strings;
/// lists are comma-joined.
pub fn effective_config<T: Serialize>(command: &str, args: &T) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    out.insert("command".to_string(), command.to_string());
    if let Ok(serde_json::Value::Object(map)) = serde_json::to_value(args) {
        for (k, v) in map {
            out.insert(k, scalar(&v));
        }
    }
    out
}

fn scalar(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

/// `# key=value` lines placed above a CSV header.
pub fn csv_preamble(config: &BTreeMap<String, String>) -> String {
    config.iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_underscores() {
        let entries = parse_config("# run\nscenario = example3\n\npi_thr=0.6\n").unwrap();
        assert_eq!(
            entries,
            vec![("scenario".into(), "example3".into()), ("pi-thr".into(), "0.6".into())]
        );
        assert!(parse_config("novalue\n").is_err());
    }

    #[test]
    fn command_line_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "seed=3\nreplicates=4\n").unwrap();
        let args: Vec<OsString> = ["strands", "simulate", "--seed", "9", "--config"]
            .iter()
            .map(OsString::from)
            .chain(std::iter::once(path.clone().into_os_string()))
            .collect();
        let merged = merge_config_file(args).unwrap();
        let tail: Vec<String> = merged[6..].iter().map(|s| s.to_string_lossy().into_owned()).collect();
        assert_eq!(tail, vec!["--replicates=4"]);
    }
}
