//! Line-oriented `key = value` configuration files.

use crate::error::{Error, Result};
use crate::forcing::{parse_sigma, Sigma};
use std::collections::BTreeMap;
use std::str::FromStr;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Blank lines and lines starting with `#` are ignored; later keys win.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("line {}: expected key = value", i + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(Error::InvalidSpec(format!("line {}: empty key", i + 1)));
            }
            entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(ConfigMap { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::InvalidSpec(format!("{key}: cannot parse {v:?}"))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn sigma_or(&self, key: &str, default: Sigma) -> Result<Sigma> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(v) => parse_sigma(v),
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines() {
        let c = ConfigMap::parse("# sweep\nexperiment = Fig3\n\n eps=0.15 \nsigma1 = 1/4\neps = 0.2\n").unwrap();
        assert_eq!(c.get_str("experiment"), Some("Fig3"));
        assert_eq!(c.get::<f64>("eps").unwrap(), Some(0.2));
        assert_eq!(c.sigma_or("sigma1", Sigma::new(1, 3)).unwrap(), Sigma::new(1, 4));
        assert_eq!(c.sigma_or("sigma2", Sigma::new(1, 3)).unwrap(), Sigma::new(1, 3));
        assert_eq!(c.get_or("points", 40usize).unwrap(), 40);
    }

    #[test]
    fn rejects_garbage() {
        assert!(ConfigMap::parse("just text").is_err());
        assert!(ConfigMap::parse("= 3").is_err());
        let c = ConfigMap::parse("eps = abc").unwrap();
        assert!(c.get::<f64>("eps").is_err());
    }
}
