//! Flat key-value run configuration.
//!
//! Files hold `key = value` lines with `#` comments; `--set KEY=VALUE`
//! flags override file entries. Every key must be consumed by the command
//! that runs, so typos fail loudly instead of silently using defaults.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Default)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

fn parse_line(line: &str, origin: &str) -> Result<Option<(String, String)>, CliError> {
    let stripped = match line.find('#') {
        Some(idx) => &line[..idx],
        None => line,
    }
    .trim();
    if stripped.is_empty() {
        return Ok(None);
    }
    let (key, value) = stripped.split_once('=').ok_or_else(|| {
        CliError::Config(format!("{origin}: expected `key = value`, got `{stripped}`"))
    })?;
    let key = key.trim().to_string();
    let value = value.trim().to_string();
    if key.is_empty() || value.is_empty() {
        return Err(CliError::Config(format!("{origin}: empty key or value in `{stripped}`")));
    }
    Ok(Some((key, value)))
}

impl Config {
    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
            for (number, line) in text.lines().enumerate() {
                let origin = format!("{}:{}", path.display(), number + 1);
                if let Some((key, value)) = parse_line(line, &origin)? {
                    if entries.insert(key.clone(), value).is_some() {
                        return Err(CliError::Config(format!("{origin}: duplicate key `{key}`")));
                    }
                }
            }
        }
        for set in sets {
            let (key, value) = parse_line(set, "--set")?
                .ok_or_else(|| CliError::Config(format!("--set `{set}` is empty")))?;
            entries.insert(key, value);
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn get_f64(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                CliError::Config(format!("key `{key}`: `{raw}` is not a number"))
            }),
        }
    }

    /// Angle given in units of pi.
    pub fn get_angle_pi(&mut self, key: &str, default_pi: f64) -> Result<f64, CliError> {
        let value_pi = self.get_f64(key, default_pi)?;
        if !value_pi.is_finite() {
            return Err(CliError::Config(format!("key `{key}`: angle must be finite")));
        }
        Ok(value_pi * std::f64::consts::PI)
    }

    pub fn get_u32(&mut self, key: &str, default: u32) -> Result<u32, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                CliError::Config(format!("key `{key}`: `{raw}` is not a non-negative integer"))
            }),
        }
    }

    pub fn get_usize(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                CliError::Config(format!("key `{key}`: `{raw}` is not a non-negative integer"))
            }),
        }
    }

    pub fn get_bool(&mut self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(raw) => match raw.as_str() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(CliError::Config(format!(
                    "key `{key}`: `{other}` is not `true` or `false`"
                ))),
            },
        }
    }

    pub fn get_string(&mut self, key: &str, default: &str) -> String {
        self.take(key).unwrap_or_else(|| default.to_string())
    }

    pub fn get_list_u32(&mut self, key: &str, default: &[u32]) -> Result<Vec<u32>, CliError> {
        match self.take(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|part| {
                    part.trim().parse().map_err(|_| {
                        CliError::Config(format!("key `{key}`: `{part}` is not an integer"))
                    })
                })
                .collect(),
        }
    }

    pub fn get_list_i64(&mut self, key: &str, default: &[i64]) -> Result<Vec<i64>, CliError> {
        match self.take(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|part| {
                    part.trim().parse().map_err(|_| {
                        CliError::Config(format!("key `{key}`: `{part}` is not an integer"))
                    })
                })
                .collect(),
        }
    }

    pub fn get_list_string(&mut self, key: &str, default: &[&str]) -> Vec<String> {
        match self.take(key) {
            None => default.iter().map(|s| s.to_string()).collect(),
            Some(raw) => raw.split(',').map(|part| part.trim().to_string()).collect(),
        }
    }

    /// Reject keys nobody consumed.
    pub fn finish(self) -> Result<(), CliError> {
        if let Some(key) = self.entries.keys().next() {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        Ok(())
    }
}
