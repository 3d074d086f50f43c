//! Run configuration shared by every command. Unknown keys are rejected at
//! every level.

use std::path::{Path, PathBuf};

use scnet_core::dataset::DatasetConfig;
use scnet_core::net::{NetConfig, TrainConfig};
use scnet_core::planner::{tabletop_robot, PolicyConfig, ScenarioConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::formats::sha256_hex;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV: &str = "SCNET_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub data: DataConfig,
    pub net: NetConfig,
    pub train: TrainConfig,
    pub eval: EvalConfig,
    pub policy: PolicyConfig,
    pub rollout: RolloutConfig,
    pub paths: PathsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            data: DataConfig::default(),
            net: NetConfig::default(),
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
            policy: PolicyConfig::default(),
            rollout: RolloutConfig::default(),
            paths: PathsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub dataset: DatasetConfig,
    pub train_scenes: u64,
    pub eval_scenes: u64,
    /// Scenes of gripper queries; zero skips the grasp sets.
    pub grasp_scenes: u64,
    pub grasp_offsets: Vec<f64>,
    pub grasps_per_object: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            dataset: DatasetConfig::default(),
            train_scenes: 200,
            eval_scenes: 20,
            grasp_scenes: 0,
            grasp_offsets: vec![0.0, 0.05],
            grasps_per_object: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Probability at or above which a query counts as colliding.
    pub threshold: f32,
    pub sphere_radius: f64,
    pub occupancy_pitch: f64,
    /// Extra radii and pitches reported alongside the defaults.
    pub sphere_sweep: Vec<f64>,
    pub occupancy_sweep: Vec<f64>,
    /// Share of stored labels re-checked against the oracle by `eval`.
    pub audit_fraction: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            threshold: 0.5,
            sphere_radius: 0.01,
            occupancy_pitch: 0.02,
            sphere_sweep: vec![0.005, 0.02],
            occupancy_sweep: vec![0.01, 0.04],
            audit_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RolloutConfig {
    pub episodes: u32,
    pub scenario: ScenarioConfig,
    pub threshold: f32,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        RolloutConfig { episodes: 1, scenario: ScenarioConfig::default(), threshold: 0.5 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub train_data: Option<PathBuf>,
    pub eval_data: Option<PathBuf>,
    /// Trained models; the learned predictors pick theirs by model kind.
    pub checkpoints: Vec<PathBuf>,
    /// Continue training from this checkpoint.
    pub resume: Option<PathBuf>,
    /// Fixed scenario file used by `rollout` instead of generated ones.
    pub scenario: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        let cfg = |r: scnet_core::Result<()>, what: &str| r.map_err(|e| CliError::Config(format!("{what}: {e}")));
        cfg(self.data.dataset.validate(), "data.dataset")?;
        cfg(self.net.validate(), "net")?;
        cfg(self.train.validate(), "train")?;
        cfg(self.policy.reach.mppi.validate(tabletop_robot().dof()), "policy.reach.mppi")?;
        cfg(self.rollout.scenario.zone.validate(), "rollout.scenario.zone")?;
        cfg(self.rollout.scenario.source.validate(), "rollout.scenario.source")?;
        cfg(self.rollout.scenario.scene.validate(), "rollout.scenario.scene")?;
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(f64::from(self.eval.threshold)) || !unit(f64::from(self.rollout.threshold)) {
            return Err(CliError::Config("thresholds must lie in [0, 1]".into()));
        }
        if !unit(self.eval.audit_fraction) {
            return Err(CliError::Config("eval.audit_fraction must lie in [0, 1]".into()));
        }
        let positive = |v: &f64| *v > 0.0 && v.is_finite();
        let radii = std::iter::once(&self.eval.sphere_radius).chain(&self.eval.sphere_sweep);
        let pitches = std::iter::once(&self.eval.occupancy_pitch).chain(&self.eval.occupancy_sweep);
        if !radii.chain(pitches).all(positive) {
            return Err(CliError::Config("sphere radii and occupancy pitches must be positive".into()));
        }
        if self.data.grasp_offsets.iter().any(|d| !d.is_finite()) {
            return Err(CliError::Config("data.grasp_offsets must be finite".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }
}

/// Worker threads: the environment override, else the available parallelism.
pub fn thread_count() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_validate() {
        let c = RunConfig::default();
        let text = serde_json::to_string_pretty(&c).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), c);
        assert_eq!(RunConfig::from_json("{}").unwrap(), c);
    }

    #[test]
    fn unknown_keys_are_named() {
        for bad in [r#"{"sead": 1}"#, r#"{"data": {"train_scenez": 2}}"#, r#"{"policy": {"reach": {"mppi": {"T": 3}}}}"#] {
            match RunConfig::from_json(bad) {
                Err(CliError::Config(m)) => assert!(m.contains("unknown field"), "{m}"),
                other => panic!("{bad}: {other:?}"),
            }
        }
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let mut c = RunConfig::default();
        c.data.dataset.queries = 100;
        c.data.dataset.trajectories = 64;
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        let mut c = RunConfig::default();
        c.eval.threshold = 1.5;
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}
