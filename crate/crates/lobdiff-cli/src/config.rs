//! Config-file handling. A config file is either a JSON object or
//! key=value lines; its entries override the command-line flags, and the
//! resolved values are embedded in every report for provenance.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use crate::CliError;

pub type Overrides = BTreeMap<String, String>;

pub fn load(path: &str) -> Result<Overrides, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {path}: {e}")))?;
    parse(&text).map_err(|e| CliError::Data(format!("config {path}: {e}")))
}

fn parse(text: &str) -> Result<Overrides, String> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
        let obj = value.as_object().ok_or("top level must be an object")?;
        let mut out = Overrides::new();
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.insert(k.clone(), s);
        }
        return Ok(out);
    }
    let mut out = Overrides::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", lineno + 1))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Override a typed field when the key is present.
pub fn set<T: FromStr>(ov: &Overrides, key: &str, target: &mut T) -> Result<(), CliError>
where
    T::Err: Display,
{
    if let Some(raw) = ov.get(key) {
        *target = raw
            .parse::<T>()
            .map_err(|e| CliError::Data(format!("config key {key}={raw}: {e}")))?;
    }
    Ok(())
}

/// Override an optional string field.
pub fn set_opt(ov: &Overrides, key: &str, target: &mut Option<String>) {
    if let Some(raw) = ov.get(key) {
        *target = Some(raw.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_lines() {
        let ov = parse("tick_size = 0.05\n# comment\nstates=4\n").unwrap();
        assert_eq!(ov["tick_size"], "0.05");
        assert_eq!(ov["states"], "4");
    }

    #[test]
    fn parses_json_object() {
        let ov = parse("{\"tick_size\": 0.05, \"symbol\": \"MSFT\"}").unwrap();
        assert_eq!(ov["tick_size"], "0.05");
        assert_eq!(ov["symbol"], "MSFT");
    }

    #[test]
    fn override_wins_over_flag() {
        let ov = parse("states=6\n").unwrap();
        let mut states = 2usize;
        set(&ov, "states", &mut states).unwrap();
        assert_eq!(states, 6);
    }
}
