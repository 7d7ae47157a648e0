//! Run configuration: a single JSON document selecting the metric family,
//! the sequence spec, hypothesis constants, resolutions, and output layout.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use warplab_core::doubly::HypothesisBounds;
use warplab_core::generate::SequenceSpec;
use warplab_core::grid::AnalysisConstants;
use warplab_core::singly::{default_slabs, BarrierParams, DEFAULT_LEVEL_COUNT};

/// Which verification pipeline to drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Doubly,
    Singly,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Doubly => "doubly",
            Case::Singly => "singly",
        })
    }
}

/// Which check groups to run. `NoLattice` skips the shortest-path stage;
/// diameter columns become empty and diameter checks go vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChecksMode {
    #[default]
    Full,
    NoLattice,
}

/// Sampling and lattice resolutions. Sampling grids must be powers of
/// two; the distance lattice must be a multiple of four and at least 16
/// (its refinement error probe halves it, and the half must stay even).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Resolution {
    pub grid_1d: usize,
    pub grid_2d: [usize; 2],
    pub lattice: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { grid_1d: 128, grid_2d: [64, 64], lattice: 32 }
    }
}

/// The whole run configuration. Unknown fields are rejected so typos
/// surface as parse errors instead of silently applied defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: Case,
    pub spec: SequenceSpec,
    #[serde(default)]
    pub hypotheses: HypothesisBounds,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub checks: ChecksMode,
    /// Worker threads for the shortest-path sweeps; absent = machine
    /// parallelism.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub constants: AnalysisConstants,
    /// Level-set thresholds for the singly warped pipeline.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Barrier slabs for the singly warped pipeline; absent = the
    /// built-in eight-slab cover.
    #[serde(default)]
    pub slabs: Option<Vec<BarrierParams>>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_levels() -> usize {
    DEFAULT_LEVEL_COUNT
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    /// Parses and validates a config file. Parse failures carry the
    /// line/column reported by the JSON parser.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| {
            ConfigError(format!(
                "{}:{}:{}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError(msg));
        if !self.resolution.grid_1d.is_power_of_two() {
            return bad(format!("resolution.grid_1d = {} must be a power of two", self.resolution.grid_1d));
        }
        for n in self.resolution.grid_2d {
            if !n.is_power_of_two() {
                return bad(format!("resolution.grid_2d component {n} must be a power of two"));
            }
        }
        // The diameter error estimate compares against the half lattice,
        // so the full lattice must be at least 16 and divisible by 4.
        if self.resolution.lattice % 4 != 0 || self.resolution.lattice < 16 {
            return bad(format!(
                "resolution.lattice = {} must be a multiple of 4, at least 16",
                self.resolution.lattice
            ));
        }
        if self.levels < 2 {
            return bad("levels must be at least 2".into());
        }
        if let Some(w) = self.workers {
            if w == 0 {
                return bad("workers must be positive when given".into());
            }
        }
        let doubly_kind = self.spec.kind.is_doubly();
        match self.case {
            Case::Doubly if !doubly_kind => {
                bad(format!("case is doubly but spec.kind is {:?}", self.spec.kind))
            }
            Case::Singly if doubly_kind => {
                bad(format!("case is singly but spec.kind is {:?}", self.spec.kind))
            }
            _ => Ok(()),
        }
    }

    pub fn slabs_or_default(&self) -> Vec<BarrierParams> {
        self.slabs.clone().unwrap_or_else(default_slabs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use warplab_core::generate::{AmplitudeLaw, FamilyKind};

    const MINIMAL: &str = r#"{
        "case": "doubly",
        "spec": { "kind": "doubly-sin", "base_amplitude": 0.01, "j_schedule": [10, 100] }
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg: RunConfig = serde_json::from_str(MINIMAL).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.case, Case::Doubly);
        assert_eq!(cfg.spec.kind, FamilyKind::DoublySin);
        assert_eq!(cfg.spec.amplitude_law, AmplitudeLaw::Bisect);
        assert_eq!(cfg.resolution.grid_1d, 128);
        assert_eq!(cfg.resolution.lattice, 32);
        assert_eq!(cfg.hypotheses.a0, 30.0);
        assert_eq!(cfg.checks, ChecksMode::Full);
        assert_eq!(cfg.levels, DEFAULT_LEVEL_COUNT);
        assert!(cfg.workers.is_none());
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn unknown_fields_and_mismatches_are_rejected() {
        let typo = MINIMAL.replace("\"case\"", "\"kase\"");
        assert!(serde_json::from_str::<RunConfig>(&typo).is_err());

        let mut cfg: RunConfig = serde_json::from_str(MINIMAL).unwrap();
        cfg.case = Case::Singly;
        assert!(cfg.validate().is_err(), "family mismatch must fail");

        let mut cfg: RunConfig = serde_json::from_str(MINIMAL).unwrap();
        cfg.resolution.grid_1d = 100;
        assert!(cfg.validate().is_err(), "non power of two grid must fail");

        let mut cfg: RunConfig = serde_json::from_str(MINIMAL).unwrap();
        cfg.resolution.lattice = 30;
        assert!(cfg.validate().is_err(), "lattice must be a multiple of 4");
    }
}
