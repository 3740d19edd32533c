//! Flat `key = value` configuration with flag override precedence.
//!
//! Every run writes a manifest in the same format, so re-running a command
//! from its manifest (`--config out/manifest.txt`) reproduces the outputs.

use crate::CliError;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    /// Parse command-line flags (`--key value` or `--key=value`), loading
    /// `--config FILE` first so explicit flags override file entries.
    pub fn from_args(args: &[String]) -> Result<Config, CliError> {
        let mut flags = BTreeMap::new();
        let mut config_path: Option<String> = None;
        let mut it = args.iter().peekable();
        while let Some(arg) = it.next() {
            let Some(stripped) = arg.strip_prefix("--") else {
                return Err(CliError::Validation(format!(
                    "unexpected positional argument '{arg}'"
                )));
            };
            let (key, value) = match stripped.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let value = it
                        .next()
                        .ok_or_else(|| {
                            CliError::Validation(format!("flag --{stripped} needs a value"))
                        })?
                        .clone();
                    (stripped.to_string(), value)
                }
            };
            if key.is_empty() {
                return Err(CliError::Validation(format!("malformed flag '{arg}'")));
            }
            if key == "config" {
                config_path = Some(value);
            } else {
                flags.insert(key, value);
            }
        }
        let mut values = BTreeMap::new();
        if let Some(path) = config_path {
            values = parse_file(Path::new(&path))?;
        }
        values.extend(flags);
        Ok(Config { values })
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Config {
        Config {
            values: pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(v)
                .ok_or_else(|| CliError::Validation(format!("--{key}: bad number '{v}'"))),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Validation(format!("--{key}: bad integer '{v}'"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CliError::Validation(format!("--{key}: bad integer '{v}'"))),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.values.get(key).map(|s| s.as_str()).unwrap_or(default)
    }

    /// Comma-separated numbers; supports the `2^-9` power notation.
    pub fn f64_list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|tok| {
                    parse_f64(tok.trim()).ok_or_else(|| {
                        CliError::Validation(format!("--{key}: bad number '{tok}'"))
                    })
                })
                .collect(),
        }
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|tok| {
                    tok.trim().parse().map_err(|_| {
                        CliError::Validation(format!("--{key}: bad integer '{tok}'"))
                    })
                })
                .collect(),
        }
    }

    /// Record an effective value so it lands in the manifest.
    pub fn record(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    /// Manifest body: sorted `key = value` lines plus the command and the
    /// library version.
    pub fn manifest(&self, command: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command = {command}");
        let _ = writeln!(out, "version = {}", env!("CARGO_PKG_VERSION"));
        for (k, v) in &self.values {
            if k != "command" && k != "version" {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }
}

fn parse_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read config {path:?}: {e}")))?;
    let mut values = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Validation(format!(
                "{path:?}:{}: expected 'key = value'",
                lineno + 1
            )));
        };
        values.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(values)
}

/// Accepts plain floats plus the `2^-9` convenience notation.
pub fn parse_f64(tok: &str) -> Option<f64> {
    if let Some(exp) = tok.strip_prefix("2^") {
        let e: i32 = exp.parse().ok()?;
        return Some(2f64.powi(e));
    }
    tok.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn flags_parse_in_both_forms() {
        let cfg = Config::from_args(&args(&["--alpha", "0.5", "--out=run1"])).unwrap();
        assert_eq!(cfg.get("alpha"), Some("0.5"));
        assert_eq!(cfg.get("out"), Some("run1"));
    }

    #[test]
    fn power_notation_accepted() {
        assert_eq!(parse_f64("2^-5"), Some(0.03125));
        assert_eq!(parse_f64("0.25"), Some(0.25));
        assert_eq!(parse_f64("x"), None);
    }

    #[test]
    fn missing_value_is_a_validation_error() {
        assert!(matches!(
            Config::from_args(&args(&["--alpha"])),
            Err(CliError::Validation(_))
        ));
    }

    #[test]
    fn flags_override_config_file() {
        let dir = std::env::temp_dir().join(format!("flmm_cfg_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "alpha = 0.3\ntau = 0.01\n").unwrap();
        let cfg = Config::from_args(&args(&[
            "--config",
            path.to_str().unwrap(),
            "--alpha",
            "0.7",
        ]))
        .unwrap();
        assert_eq!(cfg.f64_or("alpha", 0.0).unwrap(), 0.7);
        assert_eq!(cfg.f64_or("tau", 0.0).unwrap(), 0.01);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn manifest_round_trips_through_the_parser() {
        let mut cfg = Config::from_pairs(&[("alpha", "0.5"), ("Q", "256")]);
        cfg.record("seed", 42u64);
        let dir = std::env::temp_dir().join(format!("flmm_mani_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("manifest.txt");
        std::fs::write(&path, cfg.manifest("weights")).unwrap();
        let reread = Config::from_args(&args(&["--config", path.to_str().unwrap()])).unwrap();
        assert_eq!(reread.get("alpha"), Some("0.5"));
        assert_eq!(reread.get("Q"), Some("256"));
        assert_eq!(reread.get("seed"), Some("42"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
