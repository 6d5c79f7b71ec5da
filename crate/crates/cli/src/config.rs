//! Run configuration: JSON with a schema field, complex numbers as
//! [re, im] pairs, unknown keys rejected.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use kleinian_core::group::{GroupSpec, SqrtBranch};
use kleinian_core::moebius::{Complex64, MoebiusMap};
use kleinian_core::tolerances::{DEFAULT_DEPTH, GAP_EPS, MAX_DEPTH, PRUNE_EPS};

use crate::CliError;

pub const CONFIG_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub group: GroupConfig,
    /// Word length for limit sampling and the bump fixed-point harvest.
    #[serde(default = "default_depth")]
    pub depth: u32,
    #[serde(default = "default_prune_eps")]
    pub prune_eps: f64,
    /// Chart resolution for component detection.
    #[serde(default = "default_raster_resolution")]
    pub raster_resolution: usize,
    /// Word length for the per-component stabilizer search.
    #[serde(default = "default_stabilizer_depth")]
    pub stabilizer_depth: u32,
    /// Word length for orbit identification of core boundary geodesics.
    #[serde(default = "default_orbit_depth")]
    pub orbit_depth: u32,
    /// Word length for curve matching across components of a bump.
    #[serde(default = "default_match_depth")]
    pub match_depth: u32,
    /// Density threshold on the model circle, radians.
    #[serde(default = "default_gap_eps")]
    pub gap_eps: f64,
    #[serde(default)]
    pub render: RenderConfig,
    #[serde(default)]
    pub uniform: UniformConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub generators: Vec<GeneratorConfig>,
    /// Use the generators themselves as the component-stabilizer model;
    /// requires real matrices.
    #[serde(default)]
    pub self_model: bool,
    /// Explicit real model matrices per label, for groups whose generators
    /// are not real.
    #[serde(default)]
    pub model: Vec<GeneratorConfig>,
    /// Square roots to adjoin, in order.
    #[serde(default)]
    pub adjoin_sqrt: Vec<AdjoinConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub label: String,
    /// Row-major a, b, c, d as [re, im].
    pub matrix: [[f64; 2]; 4],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdjoinConfig {
    pub label: String,
    pub branch: BranchConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BranchConfig {
    Principal,
    Rotated,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenderConfig {
    pub resolution: usize,
    /// Square viewport center in the plane.
    pub center: [f64; 2],
    /// Half the viewport side.
    pub half: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            resolution: 1024,
            center: [0.0, 0.0],
            half: 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformConfig {
    pub resolution: usize,
    pub pairs: usize,
    pub seed: u64,
}

impl Default for UniformConfig {
    fn default() -> Self {
        UniformConfig {
            resolution: 128,
            pairs: 200,
            seed: 7,
        }
    }
}

fn default_depth() -> u32 {
    DEFAULT_DEPTH
}
fn default_prune_eps() -> f64 {
    PRUNE_EPS
}
fn default_raster_resolution() -> usize {
    128
}
fn default_stabilizer_depth() -> u32 {
    6
}
fn default_orbit_depth() -> u32 {
    6
}
fn default_match_depth() -> u32 {
    6
}
fn default_gap_eps() -> f64 {
    GAP_EPS
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Validation(msg));
        if self.schema != CONFIG_SCHEMA {
            return fail(format!(
                "config schema {} is not supported (expected {CONFIG_SCHEMA})",
                self.schema
            ));
        }
        if self.group.generators.is_empty() {
            return fail("group needs at least one generator".into());
        }
        for (i, g) in self.group.generators.iter().enumerate() {
            if g.label.is_empty() {
                return fail(format!("generator {i} has an empty label"));
            }
            if self.group.generators[..i].iter().any(|h| h.label == g.label) {
                return fail(format!("duplicate generator label {:?}", g.label));
            }
        }
        if self.group.self_model && !self.group.model.is_empty() {
            return fail("self_model and an explicit model are mutually exclusive".into());
        }
        for depth in [
            self.depth,
            self.stabilizer_depth,
            self.orbit_depth,
            self.match_depth,
        ] {
            if !(1..=MAX_DEPTH).contains(&depth) {
                return fail(format!("depths must lie in 1..={MAX_DEPTH}, got {depth}"));
            }
        }
        for (name, value) in [("prune_eps", self.prune_eps), ("gap_eps", self.gap_eps)] {
            if value <= 0.0 || !value.is_finite() {
                return fail(format!("{name} must be positive, got {value}"));
            }
        }
        if self.raster_resolution < 64 || self.raster_resolution > 4096 {
            return fail(format!(
                "raster_resolution must lie in 64..=4096, got {}",
                self.raster_resolution
            ));
        }
        if self.render.resolution < 16 || self.render.resolution > 8192 {
            return fail(format!(
                "render resolution must lie in 16..=8192, got {}",
                self.render.resolution
            ));
        }
        if self.render.half <= 0.0 || !self.render.half.is_finite() {
            return fail("render half-width must be positive".into());
        }
        if self.uniform.resolution < 16 || self.uniform.resolution > 2048 {
            return fail(format!(
                "uniform resolution must lie in 16..=2048, got {}",
                self.uniform.resolution
            ));
        }
        if self.uniform.pairs == 0 {
            return fail("uniform pair count must be positive".into());
        }
        Ok(())
    }

    /// Builds the working group: generators, then the model, then the
    /// adjunctions in config order.
    pub fn build_spec(&self) -> Result<GroupSpec, CliError> {
        let maps: Vec<(String, MoebiusMap)> = self
            .group
            .generators
            .iter()
            .map(|g| Ok((g.label.clone(), parse_matrix(&g.matrix)?)))
            .collect::<Result<_, CliError>>()?;
        let labeled: Vec<(&str, MoebiusMap)> =
            maps.iter().map(|(l, m)| (l.as_str(), *m)).collect();
        let mut spec = GroupSpec::from_maps(&labeled).map_err(CliError::Core)?;
        if self.group.self_model {
            spec = spec.with_self_model().map_err(CliError::Core)?;
        } else if !self.group.model.is_empty() {
            let model_maps: Vec<(String, MoebiusMap)> = self
                .group
                .model
                .iter()
                .map(|g| Ok((g.label.clone(), parse_matrix(&g.matrix)?)))
                .collect::<Result<_, CliError>>()?;
            let labeled: Vec<(&str, MoebiusMap)> = model_maps
                .iter()
                .map(|(l, m)| (l.as_str(), *m))
                .collect();
            spec = spec.with_fuchsian_model(&labeled).map_err(CliError::Core)?;
        }
        for adj in &self.group.adjoin_sqrt {
            let branch = match adj.branch {
                BranchConfig::Principal => SqrtBranch::Principal,
                BranchConfig::Rotated => SqrtBranch::Rotated,
            };
            spec = spec.adjoin_sqrt(&adj.label, branch).map_err(CliError::Core)?;
        }
        Ok(spec)
    }

    /// Hash of the canonical serialization of the group section; names the
    /// group in every report independent of config formatting.
    pub fn group_hash(&self) -> String {
        let canonical =
            serde_json::to_vec(&self.group).expect("group config serialization cannot fail");
        let digest = Sha256::digest(&canonical);
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

fn parse_matrix(m: &[[f64; 2]; 4]) -> Result<MoebiusMap, CliError> {
    for row in m {
        for v in row {
            if !v.is_finite() {
                return Err(CliError::Validation(
                    "matrix entries must be finite".into(),
                ));
            }
        }
    }
    MoebiusMap::new(
        Complex64::new(m[0][0], m[0][1]),
        Complex64::new(m[1][0], m[1][1]),
        Complex64::new(m[2][0], m[2][1]),
        Complex64::new(m[3][0], m[3][1]),
    )
    .map_err(CliError::Core)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline_json() -> String {
        r#"{
            "schema": 1,
            "group": {
                "generators": [
                    {"label": "a", "matrix": [[1,0],[1,0],[1,0],[2,0]]},
                    {"label": "b", "matrix": [[1,0],[-1,0],[-1,0],[2,0]]}
                ],
                "self_model": true
            }
        }"#
        .to_string()
    }

    #[test]
    fn baseline_config_parses_and_builds() {
        let config: RunConfig = serde_json::from_str(&baseline_json()).unwrap();
        config.validate().unwrap();
        assert_eq!(config.depth, DEFAULT_DEPTH);
        let spec = config.build_spec().unwrap();
        assert_eq!(spec.rank(), 2);
        assert!(spec.fuchsian_model().is_some());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = baseline_json().replace("\"schema\": 1,", "\"schema\": 1, \"extra\": 3,");
        assert!(serde_json::from_str::<RunConfig>(&text).is_err());
    }

    #[test]
    fn depth_cap_and_tolerance_signs_are_enforced() {
        let mut config: RunConfig = serde_json::from_str(&baseline_json()).unwrap();
        config.depth = 21;
        assert!(config.validate().is_err());
        config.depth = 12;
        config.prune_eps = 0.0;
        assert!(config.validate().is_err());
        config.prune_eps = -1.0;
        assert!(config.validate().is_err());
    }

    #[test]
    fn group_hash_ignores_formatting_but_not_content() {
        let a: RunConfig = serde_json::from_str(&baseline_json()).unwrap();
        let b: RunConfig =
            serde_json::from_str(&baseline_json().replace("\n", " ")).unwrap();
        assert_eq!(a.group_hash(), b.group_hash());
        let c: RunConfig = serde_json::from_str(
            &baseline_json().replace("[[1,0],[1,0],[1,0],[2,0]]", "[[1,0],[2,0],[1,0],[3,0]]"),
        )
        .unwrap();
        assert_ne!(a.group_hash(), c.group_hash());
    }

    #[test]
    fn adjunction_directives_apply_in_order() {
        let text = r#"{
            "schema": 1,
            "group": {
                "generators": [
                    {"label": "a", "matrix": [[2,0],[0,0],[0,0],[0.5,0]]},
                    {"label": "b", "matrix": [[1,0],[1,0],[1,0],[2,0]]}
                ],
                "self_model": true,
                "adjoin_sqrt": [{"label": "a", "branch": "rotated"}]
            }
        }"#;
        let config: RunConfig = serde_json::from_str(text).unwrap();
        let spec = config.build_spec().unwrap();
        // The rotated root of z -> 4z is z -> -2z.
        let g = spec.generators()[0].map;
        let img = g.apply(kleinian_core::moebius::SpherePoint::Finite(Complex64::new(
            1.0, 0.0,
        )));
        match img {
            kleinian_core::moebius::SpherePoint::Finite(z) => {
                assert!((z.re + 2.0).abs() < 1e-9 && z.im.abs() < 1e-9);
            }
            _ => panic!("finite image expected"),
        }
    }
}
