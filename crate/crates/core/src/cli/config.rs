use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;

use crate::{Error, Result};

/// Parameter lookup: command-line flag, then the command's section of the
/// config file, then the file's general section, then the default.
///
/// Every value that is used ends up in `resolved`, which goes into the run
/// manifest.
#[derive(Debug)]
pub struct Params {
    section: String,
    ini: Option<Ini>,
    pub resolved: BTreeMap<String, String>,
}

impl Params {
    pub fn new(section: &str, config: Option<&Path>) -> Result<Self> {
        let ini = match config {
            Some(p) => Some(Ini::load_from_file(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?),
            None => None,
        };
        Ok(Self { section: section.into(), ini, resolved: BTreeMap::new() })
    }

    fn from_file(&self, key: &str) -> Option<String> {
        let ini = self.ini.as_ref()?;
        ini.get_from(Some(self.section.as_str()), key)
            .or_else(|| ini.get_from(None::<String>, key))
            .map(|v| v.trim().to_string())
    }

    fn parse<T: FromStr>(key: &str, raw: &str) -> Result<T> {
        raw.parse().map_err(|_| Error::Config(format!("parameter `{key}`: cannot parse '{raw}'")))
    }

    pub fn get<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        let v = match flag {
            Some(v) => Some(v),
            None => self.from_file(key).map(|raw| Self::parse(key, &raw)).transpose()?,
        };
        if let Some(v) = &v {
            self.resolved.insert(key.into(), v.to_string());
        }
        Ok(v)
    }

    pub fn require<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>) -> Result<T> {
        self.get(key, flag)?.ok_or_else(|| Error::Config(format!("missing required parameter `{key}`")))
    }

    pub fn or<T: FromStr + Display>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T> {
        match self.get(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.resolved.insert(key.into(), default.to_string());
                Ok(default)
            }
        }
    }

    /// Comma-separated list.
    pub fn list(&mut self, key: &str, flag: Option<Vec<f64>>, default: &[f64]) -> Result<Vec<f64>> {
        let v = match flag {
            Some(v) => v,
            None => match self.from_file(key) {
                Some(raw) => raw
                    .split(',')
                    .filter(|x| !x.trim().is_empty())
                    .map(|x| Self::parse(key, x.trim()))
                    .collect::<Result<_>>()?,
                None => default.to_vec(),
            },
        };
        if v.is_empty() {
            return Err(Error::Config(format!("parameter `{key}`: list is empty")));
        }
        self.resolved.insert(key.into(), v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
        Ok(v)
    }

    /// Boolean switch: a set flag wins, otherwise `key = true|false` in the file.
    pub fn switch(&mut self, key: &str, flag: bool) -> Result<bool> {
        let v = if flag {
            true
        } else {
            match self.from_file(key) {
                Some(raw) => Self::parse(key, &raw)?,
                None => false,
            }
        };
        self.resolved.insert(key.into(), v.to_string());
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flag_beats_section_beats_general() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "gamma = 3\neps = 0.4\n[bands]\neps = 0.2\nn-bands = 2").unwrap();
        let mut p = Params::new("bands", Some(f.path())).unwrap();
        assert_eq!(p.require::<f64>("eps", None).unwrap(), 0.2);
        assert_eq!(p.require::<f64>("gamma", None).unwrap(), 3.0);
        assert_eq!(p.require::<f64>("eps", Some(0.1)).unwrap(), 0.1);
        assert_eq!(p.or::<usize>("n-bands", None, 4).unwrap(), 2);
        assert_eq!(p.resolved["eps"], "0.1");
    }

    #[test]
    fn missing_and_malformed() {
        let mut p = Params::new("bands", None).unwrap();
        let e = p.require::<f64>("eps", None).unwrap_err();
        assert!(e.is_config_error() && e.to_string().contains("`eps`"));
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "[thin]\neps = 0.1,x").unwrap();
        let mut p = Params::new("thin", Some(f.path())).unwrap();
        assert!(p.list("eps", None, &[0.1]).unwrap_err().is_config_error());
    }
}
