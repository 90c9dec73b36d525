//! TOML run configuration. Every key is optional; flags given on the command
//! line take precedence over the file.

use std::path::{Path, PathBuf};

use rendezvous_core::Placement;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub n: Option<usize>,
    pub d: Option<f64>,
    pub r: Option<f64>,
    pub positions: Option<Vec<f64>>,
    pub placement: Option<String>,
    pub seed: Option<u64>,
    pub script: Option<PathBuf>,
    pub max_rounds: Option<u32>,
    pub epsilon: Option<f64>,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        if let Some(p) = &cfg.placement {
            p.parse::<Placement>()?;
        }
        if cfg.seed.is_some() && cfg.script.is_some() {
            return Err(CliError::Usage(
                "config: give either seed or script, not both".into(),
            ));
        }
        Ok(cfg)
    }

    /// Reads a file; relative `script`, `json` and `csv` paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.script, &mut cfg.json, &mut cfg.csv]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file_parses() {
        let cfg = RunConfigFile::parse(
            r#"
            positions = [0.0, 0.5, 1.0]
            r = 1.28
            seed = 4
            max_rounds = 20
            json = "out.json"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.positions.as_deref(), Some(&[0.0, 0.5, 1.0][..]));
        assert_eq!(cfg.seed, Some(4));
        assert_eq!(cfg.max_rounds, Some(20));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfigFile::parse("n = 3\nspeed = 2.0\n").is_err());
    }

    #[test]
    fn bad_placement_is_rejected() {
        assert!(RunConfigFile::parse("placement = \"grid\"").is_err());
    }

    #[test]
    fn seed_and_script_conflict() {
        assert!(RunConfigFile::parse("seed = 1\nscript = \"s.txt\"").is_err());
    }
}
