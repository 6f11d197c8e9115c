//! Parameter resolution: command-line flag, then config file, then default.
//!
//! The config file is `key = value` lines under `[section]` headers. Keys
//! spell like the long flags (`cancel-rate` or `cancel_rate`). Seed, out and
//! threads may appear before any header or under `[common]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use ini::Ini;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Flag,
    File,
    Default,
}

impl Source {
    fn label(self) -> &'static str {
        match self {
            Source::Flag => "flag",
            Source::File => "file",
            Source::Default => "default",
        }
    }
}

pub struct Settings {
    /// `(section, key) -> value`, section `""` for common keys.
    file: BTreeMap<(String, String), String>,
    used: BTreeSet<(String, String)>,
    resolved: Vec<(String, String, Source)>,
}

const COMMON: &str = "";

fn norm(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('_', "-")
}

impl Settings {
    pub fn empty() -> Self {
        Settings { file: BTreeMap::new(), used: BTreeSet::new(), resolved: Vec::new() }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        let ini = Ini::load_from_str(&text)
            .map_err(|e| anyhow!("config file {}: {e}", path.display()))?;
        let mut file = BTreeMap::new();
        for (section, props) in ini.iter() {
            let section = match section.map(norm) {
                None => COMMON.to_string(),
                Some(s) if s == "common" => COMMON.to_string(),
                Some(s) => s,
            };
            for (k, v) in props.iter() {
                file.insert((section.clone(), norm(k)), v.trim().to_string());
            }
        }
        Ok(Settings { file, used: BTreeSet::new(), resolved: Vec::new() })
    }

    fn lookup(&mut self, section: &str, key: &str) -> Option<String> {
        let id = (section.to_string(), key.to_string());
        let v = self.file.get(&id).cloned();
        if v.is_some() {
            self.used.insert(id);
        }
        v
    }

    fn record(&mut self, key: &str, value: String, source: Source) {
        self.resolved.push((key.to_string(), value, source));
    }

    /// Resolves `key` from the flag, the file section, or `default`.
    pub fn get<T>(&mut self, section: &str, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let file = self.lookup(section, key);
        let (value, source) = match flag {
            Some(v) => (v, Source::Flag),
            None => match file {
                Some(raw) => (
                    raw.parse::<T>()
                        .map_err(|e| anyhow!("config [{section}] {key} = {raw}: {e}"))?,
                    Source::File,
                ),
                None => (default, Source::Default),
            },
        };
        self.record(key, value.to_string(), source);
        Ok(value)
    }

    /// Like [`Settings::get`] for values without a default.
    pub fn get_opt<T>(&mut self, section: &str, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let file = self.lookup(section, key);
        let (value, source) = match flag {
            Some(v) => (Some(v), Source::Flag),
            None => match file {
                Some(raw) if raw.is_empty() || raw == "auto" => (None, Source::File),
                Some(raw) => (
                    Some(raw.parse::<T>().map_err(|e| anyhow!("config [{section}] {key} = {raw}: {e}"))?),
                    Source::File,
                ),
                None => (None, Source::Default),
            },
        };
        let shown = value.as_ref().map_or("auto".to_string(), |v| v.to_string());
        self.record(key, shown, source);
        Ok(value)
    }

    /// Comma-separated list.
    pub fn get_list<T>(&mut self, section: &str, key: &str, flag: Option<Vec<T>>, default: Vec<T>) -> Result<Vec<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let file = self.lookup(section, key);
        let (value, source) = match flag {
            Some(v) => (v, Source::Flag),
            None => match file {
                Some(raw) => (
                    raw.split(',')
                        .map(|p| p.trim().parse::<T>().map_err(|e| anyhow!("config [{section}] {key}: `{p}`: {e}")))
                        .collect::<Result<Vec<T>>>()?,
                    Source::File,
                ),
                None => (default, Source::Default),
            },
        };
        let shown = value.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        self.record(key, shown, source);
        Ok(value)
    }

    pub fn get_flag(&mut self, section: &str, key: &str, flag: bool) -> Result<bool> {
        self.get(section, key, flag.then_some(true), false)
    }

    pub fn common<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.get(COMMON, key, flag, default)
    }

    /// Fails on file keys in `section` or the common part that nothing read.
    pub fn check_unused(&self, section: &str) -> Result<()> {
        let stray: Vec<String> = self
            .file
            .keys()
            .filter(|id| (id.0 == section || id.0 == COMMON) && !self.used.contains(*id))
            .map(|(s, k)| if s.is_empty() { k.clone() } else { format!("[{s}] {k}") })
            .collect();
        if !stray.is_empty() {
            bail!("unknown config keys: {}", stray.join(", "));
        }
        Ok(())
    }

    /// `key=value` lines for output headers. Output directory and thread
    /// count do not affect results and are left out, so outputs compare
    /// byte for byte across locations.
    pub fn comment_lines(&self) -> Vec<String> {
        self.resolved
            .iter()
            .filter(|(k, _, _)| k != "out" && k != "threads")
            .map(|(k, v, _)| format!("{k}={v}"))
            .collect()
    }

    /// Startup report: every parameter with where it came from.
    pub fn report(&self) -> String {
        let mut out = String::from("effective configuration (flags > file > defaults):\n");
        for (k, v, s) in &self.resolved {
            out.push_str(&format!("  {k} = {v} ({})\n", s.label()));
        }
        out
    }
}
