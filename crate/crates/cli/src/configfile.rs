//! The `windtree-config v1` text format.
//!
//! ```text
//! windtree-config v1
//! # free-form comments
//! s = 1
//! kind = ringed
//! param.n = 2
//! center = 1 0
//! basis = 1 0 0 1
//! base = 0 0
//! delete = 0 3 -2
//! ```
//!
//! `s` and the geometry keys (`center`, `basis`, `base`, `delete`) fully
//! determine the configuration. `kind`, `seed` and `param.*` record how it
//! was generated and are carried along untouched. Numbers are written in
//! shortest round-trip decimal form, so reading a file back gives the same
//! bits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use windtree_core::config::LatticeSite;
use windtree_core::{Configuration, PaperPoint, PeriodicSpec};

use crate::error::CliError;

pub const HEADER: &str = "windtree-config v1";

/// A configuration together with its generator record.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub config: Configuration,
    pub kind: String,
    pub seed: Option<u64>,
    pub params: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn new(config: Configuration, kind: &str) -> Self {
        ConfigFile {
            config,
            kind: kind.to_string(),
            seed: None,
            params: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn render(&self) -> String {
        let g = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "# digest {:016x}", g.digest());
        let _ = writeln!(out, "s = {}", g.s());
        let _ = writeln!(out, "kind = {}", self.kind);
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed = {seed}");
        }
        for (k, v) in &self.params {
            let _ = writeln!(out, "param.{k} = {v}");
        }
        for c in g.core() {
            let _ = writeln!(out, "center = {} {}", c.x, c.y);
        }
        if let Some(ext) = g.extension() {
            let [b1, b2] = ext.basis();
            let _ = writeln!(out, "basis = {} {} {} {}", b1.x, b1.y, b2.x, b2.y);
            for b in ext.base_centers() {
                let _ = writeln!(out, "base = {} {}", b.x, b.y);
            }
            for d in ext.deletions() {
                let _ = writeln!(out, "delete = {} {} {}", d.base, d.i, d.j);
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<ConfigFile, CliError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim() == HEADER => {}
            _ => return Err(CliError::input(format!("missing header line `{HEADER}`"))),
        }
        let mut s = None;
        let mut kind = String::from("explicit");
        let mut seed = None;
        let mut params = BTreeMap::new();
        let mut core = Vec::new();
        let mut basis = None;
        let mut base = Vec::new();
        let mut deletes = Vec::new();
        for (no, raw) in lines {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let at = |msg: &str| CliError::input(format!("line {}: {msg}", no + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| at("expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "s" => s = Some(parse_f64(value).map_err(|e| at(&e))?),
                "kind" => kind = value.to_string(),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| at("bad seed"))?),
                "center" => {
                    let v = floats(value, 2).map_err(|e| at(&e))?;
                    core.push(PaperPoint::new(v[0], v[1]));
                }
                "basis" => {
                    let v = floats(value, 4).map_err(|e| at(&e))?;
                    basis = Some([PaperPoint::new(v[0], v[1]), PaperPoint::new(v[2], v[3])]);
                }
                "base" => {
                    let v = floats(value, 2).map_err(|e| at(&e))?;
                    base.push(PaperPoint::new(v[0], v[1]));
                }
                "delete" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(at("delete takes `base i j`"));
                    }
                    let b = parts[0].parse::<u32>().map_err(|_| at("bad base index"))?;
                    let i = parts[1].parse::<i64>().map_err(|_| at("bad lattice index"))?;
                    let j = parts[2].parse::<i64>().map_err(|_| at("bad lattice index"))?;
                    deletes.push(LatticeSite { base: b, i, j });
                }
                k if k.starts_with("param.") => {
                    params.insert(k["param.".len()..].to_string(), value.to_string());
                }
                other => return Err(at(&format!("unknown key `{other}`"))),
            }
        }
        let s = s.ok_or_else(|| CliError::input("missing `s`"))?;
        let extension = match basis {
            Some(b) => {
                if base.is_empty() {
                    base.push(PaperPoint::ORIGIN);
                }
                let mut spec = PeriodicSpec::new(b, base)?;
                for d in deletes {
                    spec.delete_site(d);
                }
                Some(spec)
            }
            None if !base.is_empty() || !deletes.is_empty() => {
                return Err(CliError::input("`base` and `delete` need a `basis`"));
            }
            None => None,
        };
        let config = Configuration::new_unchecked(s, core, extension)?;
        config.validate().map_err(|r| CliError::input(r.to_string()))?;
        Ok(ConfigFile { config, kind, seed, params })
    }

    pub fn read(path: &std::path::Path) -> Result<ConfigFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        ConfigFile::parse(&text).map_err(|e| e.context(&path.display().to_string()))
    }
}

/// Locale-independent decimal parse that rejects non-finite values.
pub fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v = s.split_whitespace().map(parse_f64).collect::<Result<Vec<_>, _>>()?;
    if v.len() == n {
        Ok(v)
    } else {
        Err(format!("expected {n} numbers, got {}", v.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut spec = PeriodicSpec::square(1.0).unwrap();
        spec.delete_at(PaperPoint::new(3.0, -2.0)).unwrap();
        let g = Configuration::new_unchecked(1.0, vec![PaperPoint::new(0.1 + 0.2, 1.0 / 3.0)], None).unwrap();
        let mut f = ConfigFile::new(g, "explicit").param("note", "x");
        f.seed = Some(7);
        let back = ConfigFile::parse(&f.render()).unwrap();
        assert_eq!(back, f);
        let lat = ConfigFile::new(Configuration::lattice(spec, 1.0).unwrap(), "lattice");
        let back = ConfigFile::parse(&lat.render()).unwrap();
        assert_eq!(back.config.digest(), lat.config.digest());
        assert_eq!(back, lat);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ConfigFile::parse("s = 1\n").is_err());
        assert!(ConfigFile::parse("windtree-config v1\ns = 1\ncenter = 0 0\ncenter = 0.5 0\n").is_err());
        assert!(ConfigFile::parse("windtree-config v1\ns = nan\n").is_err());
        assert!(ConfigFile::parse("windtree-config v1\ns = 1\nfoo = 2\n").is_err());
        assert!(ConfigFile::parse("windtree-config v1\ns = 1\ncenter = 1\n").is_err());
    }
}
