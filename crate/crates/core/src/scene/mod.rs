//! Procedural tabletop scenes, camera sampling and synthetic depth rendering.

mod shapes;
mod stable;

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use shapes::{generate_shape, GeneratedShape, ShapeInstance, ShapeKind, ShapeSpec, MAX_DIM, MIN_DIM};
pub use stable::{hull_faces, stable_poses, HullFace, FAMILY_ANGLE_DEG};

use crate::collision::{in_collision, CollisionMesh, PosedBody};
use crate::error::{Error, Result};
use crate::geometry::{primitives, raycast, PinholeCamera, PointCloud, RigidTransform, SceneBody, TriangleMesh};
use crate::math::{Mat3, Vec3};
use crate::rng::{substream, Rng};

/// Label carried by rendered table points. Objects use their id (from 1).
pub const TABLE_LABEL: u32 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraJitter {
    /// Relative distance jitter: distance ~ U(d·(1 − f), d·(1 + f)).
    pub distance_frac: f64,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

impl Default for CameraJitter {
    fn default() -> Self {
        CameraJitter { distance_frac: 0.1, azimuth_deg: 15.0, elevation_deg: 5.0 }
    }
}

impl CameraJitter {
    pub const NONE: CameraJitter = CameraJitter { distance_frac: 0.0, azimuth_deg: 0.0, elevation_deg: 0.0 };

    pub fn is_zero(&self) -> bool {
        self.distance_frac == 0.0 && self.azimuth_deg == 0.0 && self.elevation_deg == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraConfig {
    pub width: u32,
    pub height: u32,
    /// Focal length in pixels (square pixels).
    pub focal: f64,
    pub distance: f64,
    pub elevation_deg: f64,
    /// Azimuth of the camera position about world z; 0 puts it on +x.
    pub azimuth_deg: f64,
    pub jitter: CameraJitter,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            width: 128,
            height: 128,
            focal: 110.0,
            distance: 1.0,
            elevation_deg: 45.0,
            azimuth_deg: 0.0,
            jitter: CameraJitter::default(),
        }
    }
}

fn spherical_eye(distance: f64, azimuth: f64, elevation: f64) -> Vec3 {
    let (se, ce) = elevation.sin_cos();
    let (sa, ca) = azimuth.sin_cos();
    Vec3::new(distance * ce * ca, distance * ce * sa, distance * se)
}

impl CameraConfig {
    pub fn nominal(&self) -> Result<PinholeCamera> {
        let eye = spherical_eye(self.distance, self.azimuth_deg.to_radians(), self.elevation_deg.to_radians());
        PinholeCamera::new(
            self.focal,
            self.focal,
            0.5 * self.width as f64,
            0.5 * self.height as f64,
            self.width,
            self.height,
            PinholeCamera::look_at(eye, Vec3::ZERO),
        )
    }
}

/// Camera aimed at the origin with distance, azimuth and elevation drawn
/// uniformly around those of `nominal`.
pub fn sample_camera(nominal: &PinholeCamera, jitter: &CameraJitter, rng: &mut Rng) -> PinholeCamera {
    if jitter.is_zero() {
        return nominal.clone();
    }
    let p = nominal.position();
    let d = p.norm();
    let az = p.y.atan2(p.x);
    let el = (p.z / d).clamp(-1.0, 1.0).asin();
    let mut around = |c: f64, w: f64| c + w * (2.0 * rng.random::<f64>() - 1.0);
    let dist = around(d, d * jitter.distance_frac);
    let az = around(az, jitter.azimuth_deg.to_radians());
    let el = around(el, jitter.elevation_deg.to_radians());
    PinholeCamera { extrinsic: PinholeCamera::look_at(spherical_eye(dist, az, el), Vec3::ZERO), ..nominal.clone() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub min_objects: u32,
    pub max_objects: u32,
    /// Table top size (x, y) in meters; the top surface is z = 0.
    pub table_size: [f64; 2],
    pub table_thickness: f64,
    pub kinds: Vec<ShapeKind>,
    pub min_dim: f64,
    pub max_dim: f64,
    pub resolution: u32,
    /// Consecutive placement failures after which the scene is declared full.
    pub max_rejections: u32,
    pub camera: CameraConfig,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            min_objects: 10,
            max_objects: 20,
            table_size: [1.0, 1.0],
            table_thickness: 0.02,
            kinds: ShapeKind::ALL.to_vec(),
            min_dim: 0.03,
            max_dim: 0.15,
            resolution: 16,
            max_rejections: 1000,
            camera: CameraConfig::default(),
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_objects > self.max_objects {
            return Err(Error::invalid(format!(
                "min_objects {} exceeds max_objects {}",
                self.min_objects, self.max_objects
            )));
        }
        if self.kinds.is_empty() {
            return Err(Error::invalid("no shape kinds configured"));
        }
        if !(self.table_size[0] > 0.0 && self.table_size[1] > 0.0 && self.table_thickness > 0.0) {
            return Err(Error::invalid("table dimensions must be positive"));
        }
        ShapeSpec { kind: ShapeKind::Box, min_dim: self.min_dim, max_dim: self.max_dim, resolution: self.resolution }
            .validate()?;
        self.camera.nominal()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    pub id: u32,
    pub shape: ShapeInstance,
    /// Resting pose at the origin; the object cloud is rendered in this pose.
    pub canonical: RigidTransform,
    /// World pose of the mesh.
    pub pose: RigidTransform,
}

impl SceneObject {
    /// World pose relative to the canonical rendering pose.
    pub fn relative_pose(&self) -> RigidTransform {
        self.pose.compose(&self.canonical.inverse())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneState {
    pub table_size: [f64; 2],
    pub table_thickness: f64,
    pub objects: Vec<SceneObject>,
    pub camera: PinholeCamera,
    /// Set when placement gave up before reaching the drawn object count.
    pub full: bool,
}

/// Oracle bodies of a scene, built once and shared.
#[derive(Debug, Clone)]
pub struct SceneBodies {
    pub table: PosedBody,
    pub objects: Vec<(u32, PosedBody)>,
}

impl SceneBodies {
    pub fn all(&self) -> impl Iterator<Item = &PosedBody> {
        core::iter::once(&self.table).chain(self.objects.iter().map(|(_, b)| b))
    }

    pub fn object(&self, id: u32) -> Option<&PosedBody> {
        self.objects.iter().find(|(i, _)| *i == id).map(|(_, b)| b)
    }

    /// Everything except the object `id`.
    pub fn others(&self, id: u32) -> impl Iterator<Item = &PosedBody> {
        core::iter::once(&self.table).chain(self.objects.iter().filter(move |(i, _)| *i != id).map(|(_, b)| b))
    }

    pub fn collides(&self, query: &PosedBody) -> bool {
        self.all().any(|b| in_collision(query, b))
    }
}

impl SceneState {
    pub fn empty(table_size: [f64; 2], table_thickness: f64, camera: PinholeCamera) -> Self {
        SceneState { table_size, table_thickness, objects: Vec::new(), camera, full: false }
    }

    pub fn table_mesh(&self) -> TriangleMesh {
        let [sx, sy] = self.table_size;
        primitives::cuboid_between(
            Vec3::new(-0.5 * sx, -0.5 * sy, -self.table_thickness),
            Vec3::new(0.5 * sx, 0.5 * sy, 0.0),
        )
    }

    pub fn object(&self, id: u32) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn bodies(&self) -> Result<SceneBodies> {
        let table = PosedBody::from_mesh(self.table_mesh(), RigidTransform::IDENTITY)?;
        let objects = self
            .objects
            .iter()
            .map(|o| Ok((o.id, PosedBody::from_mesh(o.shape.mesh(), o.pose)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SceneBodies { table, objects })
    }

    /// Labeled world-frame cloud seen by the scene camera, table included.
    pub fn render(&self) -> PointCloud {
        let table = self.table_mesh();
        let meshes: Vec<TriangleMesh> = self.objects.iter().map(|o| o.shape.mesh()).collect();
        self.render_with(&table, &meshes)
    }

    fn render_with(&self, table: &TriangleMesh, meshes: &[TriangleMesh]) -> PointCloud {
        let mut bodies = alloc::vec![SceneBody { mesh: table, pose: RigidTransform::IDENTITY, label: TABLE_LABEL }];
        for (o, m) in self.objects.iter().zip(meshes) {
            bodies.push(SceneBody { mesh: m, pose: o.pose, label: o.id });
        }
        raycast(&bodies, &self.camera)
    }
}

/// Renders the scene point cloud (table points labeled [`TABLE_LABEL`]).
pub fn render_scene(scene: &SceneState) -> PointCloud {
    scene.render()
}

/// Cloud of a single mesh posed at `pose` with no table, as seen by `camera`.
pub fn render_object(mesh: &TriangleMesh, pose: &RigidTransform, camera: &PinholeCamera) -> PointCloud {
    let cloud = raycast(&[SceneBody { mesh, pose: *pose, label: 1 }], camera);
    PointCloud::new(cloud.points().to_vec()).expect("rendered points are finite")
}

/// Pose resting on the table at `(x, y)` after yawing the canonical pose by
/// `yaw` about world z.
pub fn place_on_table(canonical: &RigidTransform, yaw: f64, x: f64, y: f64) -> RigidTransform {
    RigidTransform::new(Mat3::rot_z(yaw), Vec3::new(x, y, 0.0)).compose(canonical)
}

/// Random tabletop scene: an object count drawn uniformly from the configured
/// range, each object in a random resting pose and yaw, positions drawn
/// uniformly over the table top until collision-free against the objects
/// already placed.
pub fn sample_scene(config: &SceneConfig, seed: u64) -> Result<SceneState> {
    config.validate()?;
    let mut rng = substream(seed, "scene", 0);
    let n = rng.random_range(config.min_objects..=config.max_objects);
    let mut cam_rng = substream(seed, "camera", 0);
    let camera = sample_camera(&config.camera.nominal()?, &config.camera.jitter, &mut cam_rng);
    let mut scene = SceneState::empty(config.table_size, config.table_thickness, camera);
    let mut placed: Vec<PosedBody> = Vec::new();
    let [hx, hy] = [0.5 * config.table_size[0], 0.5 * config.table_size[1]];
    'objects: for id in 1..=n {
        let kind = config.kinds[rng.random_range(0..config.kinds.len())];
        let spec = ShapeSpec { kind, min_dim: config.min_dim, max_dim: config.max_dim, resolution: config.resolution };
        let shape = generate_shape(&spec, &mut rng)?;
        let body_shape = Arc::new(CollisionMesh::new(shape.mesh.clone())?);
        let mut rejections = 0u32;
        loop {
            let canonical = shape.stable_poses[rng.random_range(0..shape.stable_poses.len())];
            let yaw = core::f64::consts::TAU * rng.random::<f64>();
            let x = -hx + 2.0 * hx * rng.random::<f64>();
            let y = -hy + 2.0 * hy * rng.random::<f64>();
            let pose = place_on_table(&canonical, yaw, x, y);
            let body = PosedBody::new(body_shape.clone(), pose);
            let bb = body.world_aabb();
            let on_table = bb.min.x >= -hx && bb.max.x <= hx && bb.min.y >= -hy && bb.max.y <= hy;
            if on_table && !placed.iter().any(|b| in_collision(&body, b)) {
                placed.push(body);
                scene.objects.push(SceneObject { id, shape: shape.instance.clone(), canonical, pose });
                break;
            }
            rejections += 1;
            if rejections >= config.max_rejections {
                scene.full = true;
                break 'objects;
            }
        }
    }
    Ok(scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn small_config(n: u32) -> SceneConfig {
        SceneConfig { min_objects: n, max_objects: n, ..SceneConfig::default() }
    }

    #[test]
    fn single_object_scene() {
        let s = sample_scene(&small_config(1), 11).unwrap();
        assert_eq!(s.objects.len(), 1);
        assert!(!s.full);
        let o = &s.objects[0];
        let bodies = s.bodies().unwrap();
        let min_z = o.shape.mesh().vertices().iter().map(|v| o.pose.apply(*v).z).fold(f64::INFINITY, f64::min);
        assert!(min_z.abs() < 1e-9);
        assert!(in_collision(&bodies.objects[0].1, &bodies.table), "resting objects touch the table");
    }

    #[test]
    fn scenes_are_collision_free_and_reproducible() {
        let cfg = SceneConfig::default();
        for seed in 0..3 {
            let s = sample_scene(&cfg, seed).unwrap();
            assert!(s.objects.len() >= 10 || s.full);
            let b = s.bodies().unwrap();
            for i in 0..b.objects.len() {
                for j in i + 1..b.objects.len() {
                    assert!(!in_collision(&b.objects[i].1, &b.objects[j].1));
                }
            }
            assert_eq!(s, sample_scene(&cfg, seed).unwrap());
        }
    }

    #[test]
    fn crowded_table_is_declared_full() {
        let cfg = SceneConfig {
            min_objects: 20,
            max_objects: 20,
            table_size: [0.3, 0.3],
            min_dim: 0.1,
            max_dim: 0.15,
            max_rejections: 50,
            ..SceneConfig::default()
        };
        let s = sample_scene(&cfg, 5).unwrap();
        assert!(s.full);
        assert!(s.objects.len() < 20);
    }

    #[test]
    fn camera_sampling_contract() {
        let nominal = CameraConfig::default().nominal().unwrap();
        let mut rng = Rng::seed_from_u64(1);
        assert_eq!(sample_camera(&nominal, &CameraJitter::NONE, &mut rng), nominal);
        let jitter = CameraJitter { distance_frac: 0.1, azimuth_deg: 20.0, elevation_deg: 10.0 };
        for _ in 0..200 {
            let c = sample_camera(&nominal, &jitter, &mut rng);
            let d = c.position().norm();
            assert!((0.9 - 1e-12..=1.1 + 1e-12).contains(&d));
            // distance from the origin to the optical axis line
            let miss = c.position().cross(c.optical_axis()).norm();
            assert!(miss < 1e-6);
        }
    }

    #[test]
    fn rendered_box_points_lie_on_box() {
        let mut s = sample_scene(&small_config(0), 2).unwrap();
        let inst = ShapeInstance { kind: ShapeKind::Box, dims: [0.1, 0.1, 0.1], resolution: 16 };
        let canonical = stable_poses(&inst.mesh())[0];
        let pose = place_on_table(&canonical, 0.3, 0.0, 0.0);
        s.objects.push(SceneObject { id: 1, shape: inst.clone(), canonical, pose });
        let cloud = render_scene(&s);
        let body = PosedBody::from_mesh(inst.mesh(), pose).unwrap();
        let mut object_points = 0;
        for (p, l) in cloud.points().iter().zip(cloud.labels().unwrap()) {
            if *l == 1 {
                object_points += 1;
                let d = crate::collision::point_signed_distance(&body, *p).unwrap();
                assert!(d.abs() < 1e-6);
            } else {
                assert!(p.z <= 1e-9 && p.z >= -0.02 - 1e-9);
            }
        }
        assert!(object_points > 50);
        let empty = sample_scene(&small_config(0), 2).unwrap();
        let table_only = render_scene(&empty);
        assert!(!table_only.is_empty());
        assert!(table_only.labels().unwrap().iter().all(|&l| l == TABLE_LABEL));
    }

    #[test]
    fn occluded_object_renders_nothing() {
        let cam = CameraConfig::default().nominal().unwrap();
        let mut s = SceneState::empty([1.0, 1.0], 0.02, cam.clone());
        // a small cube directly behind a tall wall as seen from the camera on +x
        let small = ShapeInstance { kind: ShapeKind::Box, dims: [0.03, 0.03, 0.03], resolution: 16 };
        let wall = ShapeInstance { kind: ShapeKind::Box, dims: [0.02, 0.25, 0.25], resolution: 16 };
        for (id, inst, x) in [(1, &small, -0.1), (2, &wall, 0.0)] {
            let canonical = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.5 * inst.dims[2]));
            s.objects.push(SceneObject { id, shape: inst.clone(), canonical, pose: place_on_table(&canonical, 0.0, x, 0.0) });
        }
        let cloud = render_scene(&s);
        assert!(cloud.labels().unwrap().iter().all(|&l| l != 1));
        assert!(cloud.labels().unwrap().iter().any(|&l| l == 2));
    }

    #[test]
    fn object_render_has_no_table() {
        let inst = ShapeInstance { kind: ShapeKind::Cylinder, dims: [0.06, 0.06, 0.1], resolution: 16 };
        let mesh = inst.mesh();
        let pose = stable_poses(&mesh)[0];
        let cam = CameraConfig::default().nominal().unwrap();
        let cloud = render_object(&mesh, &pose, &cam);
        assert!(cloud.len() > 50);
        let body = PosedBody::from_mesh(mesh, pose).unwrap();
        for p in cloud.points() {
            assert!(crate::collision::point_signed_distance(&body, *p).unwrap().abs() < 1e-6);
            assert!(p.z >= -1e-9);
        }
    }

    #[test]
    fn relative_poses_are_rigid() {
        let s = sample_scene(&small_config(3), 9).unwrap();
        assert_eq!(s.objects.len(), 3);
        for o in &s.objects {
            assert!(o.relative_pose().is_valid(1e-9));
        }
    }
}
