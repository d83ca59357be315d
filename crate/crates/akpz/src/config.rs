//! Flat `key = value` configuration files with `#` comments.
//!
//! Every CLI option can also be given here under its long flag name
//! (`replicas = 500`, `chain = seq`); dashes and underscores are
//! interchangeable. Flags win over the file, the file wins over the
//! `AKPZ_SEED` environment variable, and built-in defaults come last.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::error::Error;
use crate::Result;

pub const SEED_ENV: &str = "AKPZ_SEED";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

fn norm_key(k: &str) -> String {
    k.trim().replace('_', "-")
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Usage(format!("config line {}: expected key = value", i + 1)));
            };
            let k = norm_key(k);
            if k.is_empty() {
                return Err(Error::Usage(format!("config line {}: empty key", i + 1)));
            }
            values.insert(k, v.trim().to_string());
        }
        Ok(Config { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(&norm_key(key)).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Usage(format!("config key {key}: cannot parse {v:?}"))),
        }
    }

    /// Flag value, else the file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    /// Like [`pick`](Self::pick) for options without a default.
    pub fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<T> {
        match flag {
            Some(v) => Ok(v),
            None => self
                .get(key)?
                .ok_or_else(|| Error::Usage(format!("missing required option --{}", norm_key(key)))),
        }
    }

    /// Seed precedence: flag, file, environment, 0.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag {
            return Ok(s);
        }
        if let Some(s) = self.get("seed")? {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Usage(format!("{SEED_ENV}: cannot parse {v:?}"))),
            Err(_) => Ok(0),
        }
    }
}
