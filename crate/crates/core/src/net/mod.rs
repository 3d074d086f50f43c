//! SceneCollisionNet: a voxelized scene encoder, a set-abstraction object
//! encoder and a per-query classifier, plus the Pointnet-Grid ablation that
//! shares the encoders but replaces convolution with eight overlapping grids.

mod encode;
mod grid;
mod head;
mod links;
mod object;
mod train;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use encode::{ObjectEncoding, SceneEncoding};
pub use grid::{encode_query, voxelize, GridSpec, QueryCode, Voxelized};
pub use head::Classified;
pub use links::LinkEncodings;
pub use object::{farthest_point_sample, group_object, ObjectEncoderConfig, ObjectGroups, MIN_OBJECT_POINTS};
pub use train::{record_for_step, select_queries, Selection, StepStats, TrainConfig, Trainer};

use crate::autodiff::{he_uniform, ParamStore, Scalar, Tensor};
use crate::error::{Error, Result};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    SceneCollisionNet,
    PointnetGrid,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SceneCollisionNet => "scene-collision-net",
            ModelKind::PointnetGrid => "pointnet-grid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetConfig {
    pub kind: ModelKind,
    pub grid: GridSpec,
    /// Widths of the shared per-point MLP; the last is the voxel feature width.
    pub point_mlp: Vec<usize>,
    /// Convolutions after voxel pooling (unused by Pointnet-Grid).
    pub conv_layers: usize,
    pub conv_kernel: usize,
    pub object: ObjectEncoderConfig,
    /// Hidden widths of the query classifier.
    pub classifier: Vec<usize>,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            kind: ModelKind::SceneCollisionNet,
            grid: GridSpec::default(),
            point_mlp: vec![32, 64],
            conv_layers: 3,
            conv_kernel: 3,
            object: ObjectEncoderConfig::default(),
            classifier: vec![256, 64],
        }
    }
}

/// Floats describing one query transform.
pub const QUERY_WIDTH: usize = 12;

impl NetConfig {
    pub fn pointnet_grid() -> Self {
        NetConfig { kind: ModelKind::PointnetGrid, ..NetConfig::default() }
    }

    /// Tiny model for gradient checks and tests.
    pub fn micro() -> Self {
        NetConfig {
            kind: ModelKind::SceneCollisionNet,
            grid: GridSpec { origin: [-0.15, -0.15, -0.1], pitch: 0.1, dims: [3, 3, 2] },
            point_mlp: vec![8, 8],
            conv_layers: 2,
            conv_kernel: 3,
            object: ObjectEncoderConfig {
                sample_points: 24,
                sa1_centers: 8,
                sa1_radius: 0.05,
                sa1_mlp: vec![8],
                sa2_centers: 4,
                sa2_radius: 0.1,
                sa2_mlp: vec![8],
                global_mlp: vec![8],
            },
            classifier: vec![8, 8],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.object.validate()?;
        if self.point_mlp.is_empty() || self.point_mlp.contains(&0) || self.classifier.contains(&0) {
            return Err(Error::invalid("layer widths must be positive and the point MLP non-empty"));
        }
        if self.uses_conv() && self.conv_kernel % 2 == 0 {
            return Err(Error::invalid(alloc::format!("conv kernel must be odd, got {}", self.conv_kernel)));
        }
        Ok(())
    }

    pub fn uses_conv(&self) -> bool {
        self.kind == ModelKind::SceneCollisionNet && self.conv_layers > 0
    }

    pub fn voxel_width(&self) -> usize {
        *self.point_mlp.last().unwrap_or(&0)
    }

    pub fn object_width(&self) -> usize {
        self.object.output_width()
    }

    pub fn head_input(&self) -> usize {
        self.voxel_width() + self.object_width() + QUERY_WIDTH
    }

    /// Grids a query is looked up in: the workspace grid alone, or its eight
    /// half-pitch shifts.
    pub fn grids(&self) -> Vec<GridSpec> {
        match self.kind {
            ModelKind::SceneCollisionNet => vec![self.grid],
            ModelKind::PointnetGrid => (0..8).map(|m| self.grid.shifted(m)).collect(),
        }
    }
}

/// Parameter slots of a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Dense {
    pub w: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct Layout {
    pub point: Vec<Dense>,
    pub conv: Vec<Dense>,
    pub sa1: Vec<Dense>,
    pub sa2: Vec<Dense>,
    pub global: Vec<Dense>,
    pub head: Vec<Dense>,
}

/// Names, shapes and fan-ins of every parameter, in storage order.
fn parameter_shapes(cfg: &NetConfig) -> Vec<(String, Vec<usize>, usize)> {
    let mut out = Vec::new();
    let dense = |out: &mut Vec<(String, Vec<usize>, usize)>, prefix: &str, input: usize, widths: &[usize]| {
        let mut i = input;
        for (l, &w) in widths.iter().enumerate() {
            out.push((alloc::format!("{prefix}.{l}.w"), vec![i, w], i));
            out.push((alloc::format!("{prefix}.{l}.b"), vec![w], i));
            i = w;
        }
    };
    dense(&mut out, "scene.point", 3, &cfg.point_mlp);
    if cfg.uses_conv() {
        let f = cfg.voxel_width();
        let k3 = cfg.conv_kernel.pow(3);
        for l in 0..cfg.conv_layers {
            out.push((alloc::format!("scene.conv.{l}.w"), vec![k3, f, f], k3 * f));
            out.push((alloc::format!("scene.conv.{l}.b"), vec![f], k3 * f));
        }
    }
    let o = &cfg.object;
    dense(&mut out, "object.sa1", 3, &o.sa1_mlp);
    dense(&mut out, "object.sa2", 3 + o.sa1_mlp.last().copied().unwrap_or(0), &o.sa2_mlp);
    dense(&mut out, "object.global", 3 + o.sa2_mlp.last().copied().unwrap_or(0), &o.global_mlp);
    let mut head = cfg.classifier.clone();
    head.push(1);
    dense(&mut out, "head", cfg.head_input(), &head);
    out
}

fn layout(cfg: &NetConfig) -> Layout {
    let shapes = parameter_shapes(cfg);
    let mut l = Layout::default();
    for (i, (name, _, _)) in shapes.iter().enumerate() {
        if !name.ends_with(".w") {
            continue;
        }
        let d = Dense { w: i, b: i + 1 };
        let group = if name.starts_with("scene.point") {
            &mut l.point
        } else if name.starts_with("scene.conv") {
            &mut l.conv
        } else if name.starts_with("object.sa1") {
            &mut l.sa1
        } else if name.starts_with("object.sa2") {
            &mut l.sa2
        } else if name.starts_with("object.global") {
            &mut l.global
        } else {
            &mut l.head
        };
        group.push(d);
    }
    l
}

/// A configured network and its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionModel<T: Scalar = f32> {
    config: NetConfig,
    params: ParamStore<T>,
    layout: Layout,
}

impl<T: Scalar> CollisionModel<T> {
    /// Fresh weights: He-uniform matrices, zero biases.
    pub fn new(config: NetConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = substream(seed, "init", 0);
        let mut params = ParamStore::new();
        for (name, shape, fan_in) in parameter_shapes(&config) {
            let t = if name.ends_with(".b") { Tensor::zeros(shape) } else { he_uniform(shape, fan_in, &mut rng) };
            params.insert(name, t)?;
        }
        let layout = layout(&config);
        Ok(CollisionModel { config, params, layout })
    }

    /// Wraps loaded weights, checking names and shapes against `config`.
    pub fn from_params(config: NetConfig, params: ParamStore<T>) -> Result<Self> {
        config.validate()?;
        let want = parameter_shapes(&config);
        if want.len() != params.len() {
            return Err(Error::invalid(alloc::format!(
                "checkpoint has {} tensors, the configuration needs {}",
                params.len(),
                want.len()
            )));
        }
        for ((name, shape, _), (got_name, t)) in want.iter().zip(params.iter()) {
            if name != got_name || shape.as_slice() != t.shape() {
                return Err(Error::invalid(alloc::format!(
                    "checkpoint tensor {got_name} {:?} does not match expected {name} {shape:?}",
                    t.shape()
                )));
            }
        }
        let layout = layout(&config);
        Ok(CollisionModel { config, params, layout })
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn kind(&self) -> ModelKind {
        self.config.kind
    }

    pub fn params(&self) -> &ParamStore<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.params
    }

    pub fn cast<U: Scalar>(&self) -> CollisionModel<U> {
        CollisionModel { config: self.config.clone(), params: self.params.cast(), layout: self.layout.clone() }
    }
}

#[cfg(test)]
mod tests;
