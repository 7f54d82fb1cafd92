use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceBlock {
    pub family: String,
    pub k: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierBlock {
    pub alpha: f64,
    #[serde(default)]
    pub beta_re: f64,
    #[serde(default)]
    pub beta_im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsBlock {
    pub lambda_max: f64,
    pub t_max: f64,
    pub tol: f64,
    pub eps: f64,
}

impl Default for NumericsBlock {
    fn default() -> Self {
        NumericsBlock { lambda_max: 200.0, t_max: 30.0, tol: 1e-8, eps: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupBlock {
    /// cyclic, schottky or freefuchsian.
    pub kind: String,
    /// Named generator set: "schottky-example" or "gamma2".
    pub preset: Option<String>,
    /// Translation length of the cyclic generator.
    pub translation: Option<f64>,
    /// Matrices as [a, b, c, d] (real) or [a_re, a_im, b_re, b_im, c_re, c_im, d_re, d_im].
    pub generators: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_dim")]
    pub dim: u32,
    #[serde(rename = "L")]
    pub max_len: u32,
    pub ct: Option<bool>,
}

fn default_dim() -> u32 {
    3
}

/// Task-specific inputs; each command fills in its own defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    pub function: Option<String>,
    pub support: Option<f64>,
    pub t_start: Option<f64>,
    pub t_stop: Option<f64>,
    pub t_step: Option<f64>,
    pub sigma: Option<f64>,
    pub sigmas: Option<Vec<f64>>,
    pub p: Option<f64>,
    pub eta_ratio: Option<f64>,
    pub j_max: Option<usize>,
    pub delta_lt_2rho: Option<bool>,
    pub ct: Option<bool>,
    pub s: Option<Vec<f64>>,
    pub x: Option<[f64; 3]>,
    pub y: Option<[f64; 3]>,
    pub random_points: Option<usize>,
    pub max_rel_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Option<String>,
    pub output: Option<PathBuf>,
    pub space: Option<SpaceBlock>,
    pub multiplier: Option<MultiplierBlock>,
    #[serde(default)]
    pub numerics: NumericsBlock,
    pub group: Option<GroupBlock>,
    #[serde(default)]
    pub params: ParamsBlock,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
            CliError::Usage(format!("{origin}:{line}: {}", e.message()))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn space(&self) -> Result<&SpaceBlock, CliError> {
        self.space.as_ref().ok_or_else(|| CliError::Usage("missing [space] block".into()))
    }

    pub fn multiplier(&self) -> Result<MultiplierBlock, CliError> {
        self.multiplier.ok_or_else(|| CliError::Usage("missing [multiplier] block".into()))
    }

    pub fn group(&self) -> Result<&GroupBlock, CliError> {
        self.group.as_ref().ok_or_else(|| CliError::Usage("missing [group] block".into()))
    }

    /// Canonical text of the resolved config; the manifest hash is taken over it.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical text without the output directory, which
    /// does not affect any result.
    pub fn hash(&self) -> String {
        let c = RunConfig { output: None, ..self.clone() };
        let d = Sha256::digest(c.canonical().as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_blocks_and_defaults() {
        let c = RunConfig::parse(
            "task = \"kernel\"\n[space]\nfamily = \"RealHyp\"\nk = 3\n[multiplier]\nalpha = 0.5\nbeta_re = 1.0\n",
            "t",
        )
        .unwrap();
        assert_eq!(c.space().unwrap().k, Some(3));
        assert_eq!(c.multiplier().unwrap().beta_im, 0.0);
        assert_eq!(c.numerics, NumericsBlock::default());
        assert!(c.group().is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = RunConfig::parse("[space]\nfamily = \"RealHyp\"\nk = \"three\"\n", "cfg.toml").unwrap_err();
        assert!(e.to_string().contains("cfg.toml:3:"), "{e}");
        let e = RunConfig::parse("[space]\nfamily = \"RealHyp\"\n\n[numerics]\nlamda_max = 3\n", "c").unwrap_err();
        assert!(e.to_string().contains("c:5:"), "{e}");
    }

    #[test]
    fn hash_tracks_resolved_values() {
        let a = RunConfig::parse("[space]\nfamily = \"RealHyp\"\nk = 3\n", "a").unwrap();
        let b = RunConfig::parse("[space]\nfamily = \"RealHyp\"\nk = 3\n[numerics]\ntol = 1e-8\n", "b").unwrap();
        let c = RunConfig::parse("[space]\nfamily = \"RealHyp\"\nk = 2\n", "c").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        let moved = RunConfig { output: Some("elsewhere".into()), ..a.clone() };
        assert_eq!(moved.hash(), a.hash());
    }
}
