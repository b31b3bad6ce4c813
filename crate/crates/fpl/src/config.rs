//! Flat `key = value` experiment configuration.
//!
//! Resolution order, later wins: schema defaults, the selected preset, the
//! config file, command-line overrides. Every resolved value is kept, so the
//! manifest records the complete configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, Copy)]
pub struct KeySpec {
    pub key: &'static str,
    pub default: &'static str,
    pub doc: &'static str,
}

/// Named bundle of default overrides.
#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub doc: &'static str,
    pub values: &'static [(&'static str, &'static str)],
}

#[derive(Debug, Clone, Copy)]
pub struct Schema {
    pub experiment: &'static str,
    pub summary: &'static str,
    pub keys: &'static [KeySpec],
    /// The first preset is the default.
    pub presets: &'static [Preset],
}

impl Schema {
    pub fn spec(&self, key: &str) -> Option<&KeySpec> {
        self.keys.iter().find(|k| k.key == key)
    }

    pub fn preset(&self, name: &str) -> Result<&Preset> {
        self.presets.iter().find(|p| p.name == name).ok_or_else(|| {
            let known: Vec<&str> = self.presets.iter().map(|p| p.name).collect();
            anyhow!(
                "unknown preset '{name}' for {} (expected one of: {})",
                self.experiment,
                known.join(", ")
            )
        })
    }

    /// Human-readable key listing for `--help`-style output.
    pub fn describe(&self) -> String {
        let mut s = format!("{}: {}\n\nkeys:\n", self.experiment, self.summary);
        let width = self.keys.iter().map(|k| k.key.len()).max().unwrap_or(0);
        for k in self.keys {
            s.push_str(&format!("  {:width$}  {} [default: {}]\n", k.key, k.doc, k.default));
        }
        s.push_str("\npresets:\n");
        for p in self.presets {
            s.push_str(&format!("  {}  {}\n", p.name, p.doc));
        }
        s
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected 'key = value', got '{}'", no + 1, raw.trim()))?;
        let (k, v) = (k.trim(), unquote(v.trim()));
        if k.is_empty() {
            bail!("line {}: empty key", no + 1);
        }
        if out.iter().any(|(e, _)| e == k) {
            bail!("line {}: key '{k}' given twice", no + 1);
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn unquote(v: &str) -> &str {
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        &v[1..v.len() - 1]
    } else {
        v
    }
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config_text(&text).with_context(|| format!("in config {}", path.display()))
}

/// Fully resolved configuration of one experiment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    experiment: &'static str,
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn resolve(schema: &Schema, file: &[(String, String)], overrides: &[(String, String)]) -> Result<Self> {
        for (k, _) in file.iter().chain(overrides) {
            if schema.spec(k).is_none() {
                bail!("unknown config key '{k}' for experiment {}", schema.experiment);
            }
        }
        let pick = |key: &str| {
            overrides
                .iter()
                .rev()
                .chain(file.iter().rev())
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
        };
        let preset_name = pick("preset").unwrap_or_else(|| schema.presets[0].name.to_string());
        let preset = schema.preset(&preset_name)?;

        let mut values: BTreeMap<String, String> =
            schema.keys.iter().map(|k| (k.key.to_string(), k.default.to_string())).collect();
        for (k, v) in preset.values {
            debug_assert!(schema.spec(k).is_some(), "preset key {k} not in schema");
            values.insert(k.to_string(), v.to_string());
        }
        for (k, v) in file.iter().chain(overrides) {
            values.insert(k.clone(), v.clone());
        }
        values.insert("preset".into(), preset.name.to_string());
        Ok(Self {
            experiment: schema.experiment,
            values,
        })
    }

    /// Defaults of the named preset with extra overrides.
    pub fn preset(schema: &Schema, preset: &str, overrides: &[(&str, &str)]) -> Result<Self> {
        let mut o: Vec<(String, String)> = vec![("preset".into(), preset.into())];
        o.extend(overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())));
        Self::resolve(schema, &[], &o)
    }

    pub fn experiment(&self) -> &'static str {
        self.experiment
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| anyhow!("config key '{key}' is not defined for {}", self.experiment))
    }

    pub fn parse<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let raw = self.str(key)?;
        raw.parse::<T>()
            .map_err(|e| anyhow!("config key '{key}': cannot parse '{raw}': {e}"))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.parse(key)
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        // allow 1e5-style counts
        let raw = self.str(key)?;
        if let Ok(v) = raw.parse::<usize>() {
            return Ok(v);
        }
        match raw.parse::<f64>() {
            Ok(f) if f >= 0.0 && f.fract() == 0.0 && f < 1e15 => Ok(f as usize),
            _ => bail!("config key '{key}': '{raw}' is not a non-negative integer"),
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.parse(key)
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.str(key)? {
            "true" | "yes" | "1" | "on" => Ok(true),
            "false" | "no" | "0" | "off" => Ok(false),
            other => bail!("config key '{key}': '{other}' is not a boolean"),
        }
    }

    /// Comma-separated list; empty string is an empty list.
    pub fn list<T>(&self, key: &str) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: fmt::Display,
    {
        let raw = self.str(key)?.trim();
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<T>()
                    .map_err(|e| anyhow!("config key '{key}': bad list entry '{t}': {e}"))
            })
            .collect()
    }

    /// Layer widths written `1-200-1`.
    pub fn widths(&self, key: &str) -> Result<Vec<usize>> {
        let raw = self.str(key)?;
        let w: Vec<usize> = raw
            .split(['-', ','])
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| anyhow!("config key '{key}': bad widths '{raw}': {e}"))?;
        if w.len() < 2 || w.contains(&0) {
            bail!("config key '{key}': need at least two positive widths, got '{raw}'");
        }
        Ok(w)
    }

    /// `fpl <experiment> key=value ...` that reproduces this configuration.
    pub fn command_line(&self) -> String {
        let mut s = format!("fpl {}", self.experiment);
        for (k, v) in &self.values {
            if v.contains(char::is_whitespace) || v.is_empty() {
                s.push_str(&format!(" '{k}={v}'"));
            } else {
                s.push_str(&format!(" {k}={v}"));
            }
        }
        s
    }
}

/// Splits command-line leftovers into key/value pairs: `key=value`,
/// `--key=value` and `--key value` are accepted.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let a = args[i].as_str();
        let body = a.strip_prefix("--").unwrap_or(a);
        if let Some((k, v)) = body.split_once('=') {
            out.push((k.replace('-', "_"), v.to_string()));
            i += 1;
        } else if a.starts_with("--") && i + 1 < args.len() {
            out.push((body.replace('-', "_"), args[i + 1].clone()));
            i += 2;
        } else {
            bail!("cannot parse argument '{a}' (expected key=value or --key value)");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: &[KeySpec] = &[
        KeySpec { key: "preset", default: "desk", doc: "" },
        KeySpec { key: "learning_rate", default: "0.1", doc: "" },
        KeySpec { key: "epochs", default: "10", doc: "" },
        KeySpec { key: "widths", default: "1-4-1", doc: "" },
    ];
    const PRESETS: &[Preset] = &[
        Preset { name: "desk", doc: "", values: &[] },
        Preset { name: "paper", doc: "", values: &[("epochs", "1000"), ("widths", "1-80-1")] },
    ];
    const SCHEMA: Schema = Schema { experiment: "demo", summary: "", keys: KEYS, presets: PRESETS };

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn parses_text() {
        let p = parse_config_text("# c\nepochs = 5  # trailing\n\nwidths=\"1-2-1\"\n").unwrap();
        assert_eq!(p, pairs(&[("epochs", "5"), ("widths", "1-2-1")]));
        assert!(parse_config_text("epochs 5").is_err());
        assert!(parse_config_text("a=1\na=2").is_err());
    }

    #[test]
    fn layering() {
        let c = Config::resolve(&SCHEMA, &pairs(&[("preset", "paper"), ("epochs", "7")]), &pairs(&[("epochs", "9")])).unwrap();
        assert_eq!(c.usize("epochs").unwrap(), 9);
        assert_eq!(c.widths("widths").unwrap(), vec![1, 80, 1]);
        assert_eq!(c.str("preset").unwrap(), "paper");
        let d = Config::resolve(&SCHEMA, &[], &[]).unwrap();
        assert_eq!(d.usize("epochs").unwrap(), 10);
    }

    #[test]
    fn unknown_key_names_the_key() {
        let e = Config::resolve(&SCHEMA, &[], &pairs(&[("learning_rte", "1")])).unwrap_err();
        assert!(e.to_string().contains("learning_rte"));
        assert!(Config::preset(&SCHEMA, "nope", &[]).is_err());
    }

    #[test]
    fn typed_getters() {
        let c = Config::preset(&SCHEMA, "desk", &[("epochs", "1e3"), ("learning_rate", "x")]).unwrap();
        assert_eq!(c.usize("epochs").unwrap(), 1000);
        assert!(c.f64("learning_rate").unwrap_err().to_string().contains("learning_rate"));
        assert!(c.command_line().starts_with("fpl demo "));
    }

    #[test]
    fn override_forms() {
        let a: Vec<String> = ["--delta", "0.25", "epochs=3", "--learning-rate=0.5"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            parse_overrides(&a).unwrap(),
            pairs(&[("delta", "0.25"), ("epochs", "3"), ("learning_rate", "0.5")])
        );
        assert!(parse_overrides(&["oops".to_string()]).is_err());
    }
}
