use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::stable::stable_poses;
use crate::error::{Error, Result};
use crate::geometry::{primitives, RigidTransform, TriangleMesh};
use crate::math::Vec3;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Box,
    Cylinder,
    /// Box open at the top ("bowl").
    OpenBox,
    LBlock,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] = [ShapeKind::Box, ShapeKind::Cylinder, ShapeKind::OpenBox, ShapeKind::LBlock];
}

/// Family of shapes to draw from: kind plus the range every principal
/// dimension is drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub min_dim: f64,
    pub max_dim: f64,
    /// Segments around curved surfaces.
    pub resolution: u32,
}

pub const MIN_DIM: f64 = 0.02;
pub const MAX_DIM: f64 = 0.25;

impl ShapeSpec {
    pub fn new(kind: ShapeKind, min_dim: f64, max_dim: f64) -> Self {
        ShapeSpec { kind, min_dim, max_dim, resolution: 16 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_dim >= MIN_DIM - 1e-12 && self.max_dim <= MAX_DIM + 1e-12 && self.min_dim <= self.max_dim) {
            return Err(Error::invalid(format!(
                "shape dimensions [{}, {}] must lie within [{MIN_DIM}, {MAX_DIM}]",
                self.min_dim, self.max_dim
            )));
        }
        if self.resolution < 8 {
            return Err(Error::invalid(format!("shape resolution {} below 8", self.resolution)));
        }
        Ok(())
    }
}

/// A concrete drawn shape. `dims` meaning per kind: box (x, y, z); cylinder
/// (diameter, diameter, height); open box (x, y, z); L-block (leg x, leg y,
/// height).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeInstance {
    pub kind: ShapeKind,
    pub dims: [f64; 3],
    pub resolution: u32,
}

impl ShapeInstance {
    /// Watertight mesh with its volume centroid at the origin.
    pub fn mesh(&self) -> TriangleMesh {
        let [a, b, c] = self.dims;
        let m = match self.kind {
            ShapeKind::Box => primitives::cuboid(Vec3::new(a, b, c)),
            ShapeKind::Cylinder => primitives::cylinder(0.5 * a, c, self.resolution as usize),
            ShapeKind::OpenBox => primitives::open_box(Vec3::new(a, b, c), wall_thickness(a, b, c)),
            ShapeKind::LBlock => primitives::l_block(a, b, leg_thickness(a, b), c),
        };
        let centroid = m.volume_centroid();
        m.translated(-centroid)
    }
}

fn wall_thickness(a: f64, b: f64, c: f64) -> f64 {
    (0.12 * a.min(b).min(c)).max(0.003)
}

fn leg_thickness(a: f64, b: f64) -> f64 {
    0.4 * a.min(b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedShape {
    pub instance: ShapeInstance,
    pub mesh: TriangleMesh,
    pub stable_poses: Vec<RigidTransform>,
}

impl GeneratedShape {
    pub fn from_instance(instance: ShapeInstance) -> Self {
        let mesh = instance.mesh();
        let stable_poses = stable_poses(&mesh);
        GeneratedShape { instance, mesh, stable_poses }
    }
}

fn draw(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Draws dimensions for `spec` and builds the mesh and its resting poses.
pub fn generate_shape(spec: &ShapeSpec, rng: &mut Rng) -> Result<GeneratedShape> {
    spec.validate()?;
    let (lo, hi) = (spec.min_dim, spec.max_dim);
    let dims = match spec.kind {
        ShapeKind::Cylinder => {
            let d = draw(rng, lo, hi);
            [d, d, draw(rng, lo, hi)]
        }
        _ => [draw(rng, lo, hi), draw(rng, lo, hi), draw(rng, lo, hi)],
    };
    Ok(GeneratedShape::from_instance(ShapeInstance { kind: spec.kind, dims, resolution: spec.resolution }))
}
