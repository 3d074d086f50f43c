//! Labeled collision-query records: scene cloud, query-object cloud, relative
//! object transforms and exact mesh labels.

mod grasp;

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use grasp::{generate_grasp_queries, GraspQuerySet};

use crate::collision::{CollisionMesh, PosedBody};
use crate::error::{Error, Result};
use crate::geometry::{interpolate_pose, Aabb, PointCloud, RigidTransform};
use crate::math::{Mat3, Quat, Vec3};
use crate::rng::{derive_seed, substream, Rng};
use crate::scene::{
    generate_shape, render_object, sample_scene, GeneratedShape, SceneBodies, SceneConfig, SceneState, ShapeInstance,
    ShapeSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub scene: SceneConfig,
    /// Trajectories per record.
    pub trajectories: u32,
    /// Queries per record; must be a multiple of `trajectories`.
    pub queries: u32,
    pub scene_points: u32,
    pub object_points: u32,
    /// Margin added around the scene bounds when drawing trajectory endpoints.
    pub endpoint_margin: f64,
    /// Draw endpoint rotations from all of SO(3) instead of resting poses.
    pub full_rotations: bool,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            scene: SceneConfig::default(),
            trajectories: 64,
            queries: 2048,
            scene_points: 4096,
            object_points: 1024,
            endpoint_margin: 0.1,
            full_rotations: false,
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        check_division(self.trajectories, self.queries)?;
        if self.scene_points == 0 || self.object_points == 0 {
            return Err(Error::invalid("point counts must be positive"));
        }
        Ok(())
    }
}

fn check_division(t: u32, q: u32) -> Result<()> {
    if t == 0 || q % t != 0 {
        return Err(Error::invalid(format!("query count {q} is not divisible by trajectory count {t}")));
    }
    Ok(())
}

/// Query object: mesh, resting pose it was rendered in, and its cloud.
#[derive(Debug, Clone)]
pub struct QueryObject {
    pub shape: ShapeInstance,
    pub body: Arc<CollisionMesh>,
    pub canonical: RigidTransform,
    pub stable_poses: Vec<RigidTransform>,
}

impl QueryObject {
    pub fn new(generated: GeneratedShape, canonical: RigidTransform) -> Result<Self> {
        Ok(QueryObject {
            shape: generated.instance,
            body: Arc::new(CollisionMesh::new(generated.mesh)?),
            canonical,
            stable_poses: generated.stable_poses,
        })
    }

    /// Body placed by a query transform (relative to the canonical pose).
    pub fn posed(&self, query: &RigidTransform) -> PosedBody {
        PosedBody::new(self.body.clone(), query.compose(&self.canonical))
    }
}

/// One stored record.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryBatch {
    pub scene_cloud: PointCloud,
    pub object_cloud: PointCloud,
    /// Object transforms relative to the canonical (rendered) object pose.
    pub transforms: Vec<RigidTransform>,
    /// 1 = collision.
    pub labels: Vec<u8>,
    /// Absent for records not drawn from the scene generator.
    pub meta: Option<RecordMeta>,
}

/// What is needed to rebuild the record's geometry for audits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMeta {
    pub index: u64,
    pub scene_seed: u64,
    pub object: ShapeInstance,
    pub canonical: RigidTransform,
}

impl QueryBatch {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }
}

/// Rounds through `f32` so stored values equal what was labeled.
pub fn round_f32(v: f64) -> f64 {
    v as f32 as f64
}

fn round_vec(v: Vec3) -> Vec3 {
    Vec3::new(round_f32(v.x), round_f32(v.y), round_f32(v.z))
}

pub fn round_transform(t: &RigidTransform) -> RigidTransform {
    let mut v = t.to_12();
    for x in &mut v {
        *x = round_f32(*x);
    }
    RigidTransform::from_12(&v)
}

pub fn round_cloud(c: &PointCloud) -> PointCloud {
    let pts = c.points().iter().map(|p| round_vec(*p)).collect();
    match c.labels() {
        Some(l) => PointCloud::with_labels(pts, l.to_vec()),
        None => PointCloud::new(pts),
    }
    .expect("rounding keeps points finite")
}

/// `n` evenly spaced poses from `start` to `end`, both included.
pub fn trajectory_waypoints(start: &RigidTransform, end: &RigidTransform, n: usize) -> Vec<RigidTransform> {
    (0..n)
        .map(|i| {
            let s = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
            interpolate_pose(start, end, s).expect("fraction in range")
        })
        .collect()
}

/// Oracle labels of an object at each query transform against every scene body.
pub fn label_queries(bodies: &SceneBodies, object: &QueryObject, queries: &[RigidTransform]) -> Vec<u8> {
    queries.iter().map(|q| u8::from(bodies.collides(&object.posed(q)))).collect()
}

/// Bounds of the table top and all objects.
pub fn scene_bounds(scene: &SceneState, bodies: &SceneBodies) -> Aabb {
    let [hx, hy] = [0.5 * scene.table_size[0], 0.5 * scene.table_size[1]];
    let mut b = Aabb::from_points(&[Vec3::new(-hx, -hy, 0.0), Vec3::new(hx, hy, 0.0)]);
    for (_, o) in &bodies.objects {
        b = b.union(o.world_aabb());
    }
    b
}

fn uniform_rotation(rng: &mut Rng) -> Mat3 {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    Quat { w: g(), x: g(), y: g(), z: g() }.normalized().to_mat3()
}

fn endpoint(object: &QueryObject, bounds: &Aabb, full_rotations: bool, rng: &mut Rng) -> RigidTransform {
    let rotation = if full_rotations {
        uniform_rotation(rng)
    } else {
        let rest = object.stable_poses[rng.random_range(0..object.stable_poses.len())];
        Mat3::rot_z(core::f64::consts::TAU * rng.random::<f64>()) * rest.rotation
    };
    let e = bounds.extent();
    let u = Vec3::new(rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>());
    let centroid = bounds.min + Vec3::new(e.x * u.x, e.y * u.y, e.z * u.z);
    // object world pose; the mesh is centered on its centroid
    RigidTransform::new(rotation, centroid)
}

/// `t` random straight-line object trajectories through the scene with
/// `q / t` waypoints each. Returns query transforms (relative to the canonical
/// object pose, rounded to `f32`) and their oracle labels.
#[allow(clippy::too_many_arguments)]
pub fn generate_trajectory_queries(
    scene: &SceneState,
    bodies: &SceneBodies,
    object: &QueryObject,
    t: u32,
    q: u32,
    margin: f64,
    full_rotations: bool,
    rng: &mut Rng,
) -> Result<(Vec<RigidTransform>, Vec<u8>)> {
    check_division(t, q)?;
    let bounds = scene_bounds(scene, bodies).inflate(margin);
    let per = (q / t) as usize;
    let to_relative = object.canonical.inverse();
    let mut transforms = Vec::with_capacity(q as usize);
    for _ in 0..t {
        let a = endpoint(object, &bounds, full_rotations, rng);
        let b = endpoint(object, &bounds, full_rotations, rng);
        for w in trajectory_waypoints(&a, &b, per) {
            transforms.push(round_transform(&w.compose(&to_relative)));
        }
    }
    let labels = label_queries(bodies, object, &transforms);
    Ok((transforms, labels))
}

/// Draws a query object for record `index` and renders it with `scene`'s camera.
pub fn draw_query_object(config: &DatasetConfig, scene: &SceneState, rng: &mut Rng) -> Result<(QueryObject, PointCloud)> {
    let kinds = &config.scene.kinds;
    let spec = ShapeSpec {
        kind: kinds[rng.random_range(0..kinds.len())],
        min_dim: config.scene.min_dim,
        max_dim: config.scene.max_dim,
        resolution: config.scene.resolution,
    };
    let shape = generate_shape(&spec, rng)?;
    let canonical = shape.stable_poses[rng.random_range(0..shape.stable_poses.len())];
    let cloud = render_object(&shape.mesh, &canonical, &scene.camera);
    Ok((QueryObject::new(shape, canonical)?, cloud))
}

/// Seed of the scene behind record `index`.
pub fn record_scene_seed(root: u64, index: u64) -> u64 {
    derive_seed(root, "record-scene", index)
}

/// Record `index` of the dataset rooted at `seed`.
pub fn generate_record(config: &DatasetConfig, seed: u64, index: u64) -> Result<QueryBatch> {
    config.validate()?;
    let scene_seed = record_scene_seed(seed, index);
    let scene = sample_scene(&config.scene, scene_seed)?;
    let bodies = scene.bodies()?;
    let mut rng = substream(seed, "record", index);
    let (object, object_cloud) = draw_query_object(config, &scene, &mut rng)?;
    let (transforms, labels) = generate_trajectory_queries(
        &scene,
        &bodies,
        &object,
        config.trajectories,
        config.queries,
        config.endpoint_margin,
        config.full_rotations,
        &mut rng,
    )?;
    let scene_cloud = round_cloud(&scene.render().resampled(config.scene_points as usize, &mut rng));
    let object_cloud = round_cloud(&object_cloud.resampled(config.object_points as usize, &mut rng));
    Ok(QueryBatch {
        scene_cloud,
        object_cloud,
        transforms,
        labels,
        meta: Some(RecordMeta { index, scene_seed, object: object.shape, canonical: object.canonical }),
    })
}

/// Relabels stored transforms against geometry rebuilt from the record's
/// metadata; returns the indices whose stored label disagrees.
pub fn audit_record(config: &DatasetConfig, batch: &QueryBatch, indices: &[usize]) -> Result<Vec<usize>> {
    let meta = batch.meta.as_ref().ok_or_else(|| Error::invalid("record has no generation metadata"))?;
    let scene = sample_scene(&config.scene, meta.scene_seed)?;
    let bodies = scene.bodies()?;
    let object = QueryObject::new(GeneratedShape::from_instance(meta.object.clone()), meta.canonical)?;
    Ok(indices
        .iter()
        .copied()
        .filter(|&i| u8::from(bodies.collides(&object.posed(&batch.transforms[i]))) != batch.labels[i])
        .collect())
}

/// Fraction of positive (colliding) labels.
pub fn label_balance(batches: &[QueryBatch]) -> f64 {
    let total: usize = batches.iter().map(|b| b.len()).sum();
    let pos: usize = batches.iter().map(|b| b.positives()).sum();
    if total == 0 {
        0.0
    } else {
        pos as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collision::in_collision_brute_force;
    use crate::scene::{CameraConfig, ShapeKind};
    use rand::SeedableRng;

    fn tiny() -> DatasetConfig {
        DatasetConfig {
            scene: SceneConfig { min_objects: 3, max_objects: 5, ..SceneConfig::default() },
            trajectories: 4,
            queries: 64,
            scene_points: 512,
            object_points: 128,
            ..DatasetConfig::default()
        }
    }

    #[test]
    fn waypoints_form_lerp_grid() {
        let a = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.5));
        let b = RigidTransform::from_translation(Vec3::new(1.0, 0.0, 0.5));
        let xs: Vec<f64> = trajectory_waypoints(&a, &b, 5).iter().map(|w| w.translation.x).collect();
        assert_eq!(xs, [0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn indivisible_query_count_rejected() {
        assert!(DatasetConfig { queries: 65, ..tiny() }.validate().is_err());
        assert!(generate_record(&DatasetConfig { queries: 10, trajectories: 3, ..tiny() }, 0, 0).is_err());
    }

    #[test]
    fn free_space_waypoint_is_free() {
        let cam = CameraConfig::default().nominal().unwrap();
        let scene = SceneState::empty([1.0, 1.0], 0.02, cam);
        let bodies = scene.bodies().unwrap();
        let mut rng = Rng::seed_from_u64(0);
        let g = generate_shape(&ShapeSpec::new(ShapeKind::Box, 0.05, 0.1), &mut rng).unwrap();
        let canonical = g.stable_poses[0];
        let object = QueryObject::new(g, canonical).unwrap();
        let up = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 2.0));
        assert_eq!(label_queries(&bodies, &object, &[up, RigidTransform::IDENTITY]), [0, 1]);
    }

    #[test]
    fn records_are_deterministic_and_labels_audit_clean() {
        let cfg = tiny();
        let r = generate_record(&cfg, 42, 3).unwrap();
        assert_eq!(r.len(), 64);
        assert_eq!(r.scene_cloud.len(), 512);
        assert_eq!(r.object_cloud.len(), 128);
        assert_eq!(r, generate_record(&cfg, 42, 3).unwrap());
        let all: Vec<usize> = (0..r.len()).collect();
        assert!(audit_record(&cfg, &r, &all).unwrap().is_empty());
        for t in &r.transforms {
            assert!(t.is_valid(1e-6));
        }
    }

    #[test]
    fn bvh_labels_match_all_pairs() {
        let cfg = tiny();
        let r = generate_record(&cfg, 7, 0).unwrap();
        let meta = r.meta.clone().unwrap();
        let scene = sample_scene(&cfg.scene, meta.scene_seed).unwrap();
        let bodies = scene.bodies().unwrap();
        let object = QueryObject::new(GeneratedShape::from_instance(meta.object), meta.canonical).unwrap();
        for (t, &l) in r.transforms.iter().zip(&r.labels) {
            let q = object.posed(t);
            let brute = bodies.all().any(|b| in_collision_brute_force(&q, b));
            assert_eq!(u8::from(brute), l);
        }
    }
}
