//! Flat `key = value` configuration merged with command-line flags.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Flags override file values.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

pub const KNOWN_KEYS: &[&str] = &[
    "d",
    "d1",
    "d2",
    "n",
    "walks",
    "seed",
    "checkpoints",
    "rho",
    "band_constant",
    "out_dir",
    "kmin",
    "kmax",
    "dump",
    "tau_kmin",
    "tau_kmax",
    "joint_walks",
    "dmax",
    "export",
    "threads",
];

/// Alternative spellings and the key they stand for.
const ALIASES: &[(&str, &str)] = &[("samples", "walks")];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Source {
    File,
    Flag,
}

#[derive(Clone, Debug, Default)]
pub struct Params {
    values: BTreeMap<String, (String, Source)>,
}

fn canonical(key: &str) -> &str {
    ALIASES
        .iter()
        .find(|(alias, _)| *alias == key)
        .map_or(key, |(_, k)| k)
}

/// Parses the file format; the key is canonicalized, so an alias and its
/// target given with different values conflict.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out: BTreeMap<String, (String, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("line {}: expected `key = value`", i + 1))
        })?;
        let (written, value) = (key.trim(), value.trim().to_string());
        let key = canonical(written);
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key `{written}`", i + 1)));
        }
        if value.is_empty() {
            return Err(CliError::Config(format!("line {}: empty value for `{written}`", i + 1)));
        }
        if let Some((prev_name, prev)) = out.get(key) {
            if *prev != value {
                return Err(CliError::Conflict(format!(
                    "`{prev_name} = {prev}` and `{written} = {value}`"
                )));
            }
        }
        out.insert(key.to_string(), (written.to_string(), value));
    }
    Ok(out.into_iter().map(|(k, (_, v))| (k, v)).collect())
}

impl Params {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut p = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            for (k, v) in parse_config(&text)? {
                p.values.insert(k, (v, Source::File));
            }
        }
        Ok(p)
    }

    /// Overrides `key` when the flag was given.
    pub fn flag<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), (v.to_string(), Source::Flag));
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    fn parse_err(&self, key: &str, value: &str) -> CliError {
        let msg = format!("invalid value `{value}` for `{key}`");
        match self.values.get(key).map(|(_, s)| *s) {
            Some(Source::Flag) => CliError::Usage(msg),
            _ => CliError::Config(msg),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| v.parse().map_err(|_| self.parse_err(key, v)))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.get(key)?
            .ok_or_else(|| CliError::Usage(format!("missing required parameter `{key}`")))
    }

    /// Comma-separated list.
    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse().map_err(|_| self.parse_err(key, v)))
                    .collect()
            })
            .transpose()
    }

    /// Sets `key` unless present, so the manifest records the value used.
    pub fn default_value<T: ToString>(&mut self, key: &str, value: T) {
        self.values
            .entry(key.to_string())
            .or_insert_with(|| (value.to_string(), Source::Flag));
    }

    pub fn as_map(&self) -> BTreeMap<String, String> {
        self.values
            .iter()
            .map(|(k, (v, _))| (k.clone(), v.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blank_lines() {
        let m = parse_config("# experiment\n d = 4\n\nd1=2 # fresh\nsamples = 10\n").unwrap();
        assert_eq!(m["d"], "4");
        assert_eq!(m["d1"], "2");
        assert_eq!(m["walks"], "10");
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(parse_config("d 4"), Err(CliError::Config(_))));
        assert!(matches!(parse_config("colour = red"), Err(CliError::Config(_))));
        assert!(matches!(parse_config("d ="), Err(CliError::Config(_))));
        assert!(matches!(parse_config("d = 4\nd = 5"), Err(CliError::Conflict(_))));
        assert!(matches!(parse_config("walks = 4\nsamples = 5"), Err(CliError::Conflict(_))));
        assert!(parse_config("d = 4\nd = 4").is_ok());
    }

    #[test]
    fn flags_override_and_typed_access() {
        let mut p = Params::default();
        p.values.insert("n".into(), ("10".into(), Source::File));
        p.values.insert("rho".into(), ("x".into(), Source::File));
        p.flag("n", Some(20u64));
        assert_eq!(p.get::<u64>("n").unwrap(), Some(20));
        assert!(matches!(p.get::<f64>("rho"), Err(CliError::Config(_))));
        p.flag("checkpoints", Some("1, 2,3"));
        assert_eq!(p.get_list::<u64>("checkpoints").unwrap(), Some(vec![1, 2, 3]));
        assert!(matches!(p.require::<u64>("d"), Err(CliError::Usage(_))));
    }
}
