use alloc::vec::Vec;

use super::{Aabb, PinholeCamera, PointCloud, RigidTransform, TriangleMesh};
use crate::collision::BvhTree;
use crate::math::Vec3;

/// Hits closer than this along the ray are ignored.
const T_MIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }

    /// Entry parameter of the ray into `b` if it enters before `t_max`.
    pub fn enter_aabb(&self, b: &Aabb, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for axis in 0..3 {
            let o = self.origin.component(axis);
            let d = self.direction.component(axis);
            let (lo, hi) = (b.min.component(axis) - 1e-9, b.max.component(axis) + 1e-9);
            if d == 0.0 {
                if o < lo || o > hi {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / d;
            let (mut ta, mut tb) = ((lo - o) * inv, (hi - o) * inv);
            if ta > tb {
                core::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }

    pub fn hits_aabb(&self, b: &Aabb, t_max: f64) -> bool {
        self.enter_aabb(b, t_max).is_some()
    }
}

/// Möller–Trumbore intersection parameter. A ray lying in the triangle's
/// plane is a miss; hits on edges and vertices count.
pub fn ray_triangle(ray: &Ray, tri: &[Vec3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = ray.direction.cross(e2);
    let det = e1.dot(p);
    let scale = e1.norm() * e2.norm() * ray.direction.norm();
    if det.abs() <= 1e-12 * scale {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - tri[0];
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.direction.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv;
    (t > T_MIN).then_some(t)
}

/// A mesh placed in the world with an integer label for its rendered points.
#[derive(Debug, Clone, Copy)]
pub struct SceneBody<'a> {
    pub mesh: &'a TriangleMesh,
    pub pose: RigidTransform,
    pub label: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub t: f64,
    /// Index into the concatenated world triangle list.
    pub triangle: u32,
    pub label: u32,
}

struct WorldTriangles {
    tris: Vec<[Vec3; 3]>,
    labels: Vec<u32>,
}

impl WorldTriangles {
    fn new(bodies: &[SceneBody<'_>]) -> Self {
        let mut tris = Vec::new();
        let mut labels = Vec::new();
        for b in bodies {
            for i in 0..b.mesh.len() {
                tris.push(b.mesh.triangle(i).map(|v| b.pose.apply(v)));
                labels.push(b.label);
            }
        }
        WorldTriangles { tris, labels }
    }
}

fn nearest_brute(world: &WorldTriangles, ray: &Ray) -> Option<RayHit> {
    let mut best: Option<RayHit> = None;
    for (i, tri) in world.tris.iter().enumerate() {
        if let Some(t) = ray_triangle(ray, tri) {
            if best.is_none_or(|b| t < b.t) {
                best = Some(RayHit { t, triangle: i as u32, label: world.labels[i] });
            }
        }
    }
    best
}

fn to_cloud(camera: &PinholeCamera, mut hit_of: impl FnMut(&Ray) -> Option<RayHit>) -> PointCloud {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for v in 0..camera.height {
        for u in 0..camera.width {
            let ray = camera.pixel_ray(u, v);
            if let Some(hit) = hit_of(&ray) {
                points.push(ray.at(hit.t));
                labels.push(hit.label);
            }
        }
    }
    PointCloud::with_labels(points, labels).expect("aligned labels")
}

/// Renders the nearest surface along every pixel ray as a labeled world-frame
/// point cloud; pixels that miss every body are omitted.
pub fn raycast(bodies: &[SceneBody<'_>], camera: &PinholeCamera) -> PointCloud {
    let world = WorldTriangles::new(bodies);
    if world.tris.is_empty() {
        return PointCloud::default();
    }
    let boxes: Vec<Aabb> = world.tris.iter().map(|t| Aabb::from_points(t)).collect();
    let bvh = BvhTree::from_boxes(&boxes);
    to_cloud(camera, |ray| {
        bvh.nearest(
            |b| ray.enter_aabb(b, f64::INFINITY).unwrap_or(f64::INFINITY),
            |i| ray_triangle(ray, &world.tris[i as usize]),
        )
        .map(|(i, t)| RayHit { t, triangle: i, label: world.labels[i as usize] })
    })
}

/// Reference renderer testing every triangle for every pixel.
pub fn raycast_brute_force(bodies: &[SceneBody<'_>], camera: &PinholeCamera) -> PointCloud {
    let world = WorldTriangles::new(bodies);
    to_cloud(camera, |ray| nearest_brute(&world, ray))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;
    use crate::math::Mat3;
    use rand::{Rng, SeedableRng};

    fn down_camera(height: f64) -> PinholeCamera {
        // optical axis -z, image x along world x
        let pose = RigidTransform::new(
            Mat3::from_rows([[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]),
            Vec3::new(0.5, 0.5, height),
        );
        PinholeCamera::new(40.0, 40.0, 16.0, 16.0, 32, 32, pose).unwrap()
    }

    #[test]
    fn planar_target_depths() {
        let sq = primitives::unit_square();
        let cam = down_camera(1.3);
        let cloud = raycast(&[SceneBody { mesh: &sq, pose: RigidTransform::IDENTITY, label: 4 }], &cam);
        assert!(!cloud.is_empty());
        for p in cloud.points() {
            assert!((cam.depth_of(*p) - 1.3).abs() < 1e-6);
            assert!(p.z.abs() < 1e-12);
        }
        assert!(cloud.labels().unwrap().iter().all(|&l| l == 4));
    }

    #[test]
    fn empty_scene_renders_nothing() {
        assert!(raycast(&[], &down_camera(1.0)).is_empty());
    }

    #[test]
    fn occluded_sphere_gets_no_points() {
        // A 0.2 m box at height 0.5 fully covers a 5 cm sphere 0.4 m below it:
        // every ray from the camera at height 2 toward the sphere passes the box
        // top face (the occlusion cone of the box contains the sphere).
        let cam = down_camera(2.0);
        let boxm = primitives::cuboid(Vec3::splat(0.2));
        let sph = primitives::sphere(0.05, 16);
        let bodies = [
            SceneBody { mesh: &boxm, pose: RigidTransform::from_translation(Vec3::new(0.5, 0.5, 0.5)), label: 1 },
            SceneBody { mesh: &sph, pose: RigidTransform::from_translation(Vec3::new(0.5, 0.5, 0.1)), label: 2 },
        ];
        let cloud = raycast(&bodies, &cam);
        assert!(cloud.labels().unwrap().iter().all(|&l| l != 2));
        assert!(cloud.labels().unwrap().contains(&1));
        // without the occluder the sphere is visible
        let alone = raycast(&bodies[1..], &cam);
        assert!(!alone.is_empty());
    }

    #[test]
    fn tangent_ray_misses() {
        let tri = [Vec3::ZERO, Vec3::X, Vec3::Y];
        let ray = Ray { origin: Vec3::new(-1.0, 0.2, 0.0), direction: Vec3::X };
        assert_eq!(ray_triangle(&ray, &tri), None);
    }

    #[test]
    fn bvh_render_matches_brute_force() {
        let mut rng = crate::rng::Rng::seed_from_u64(1);
        let meshes = [primitives::cylinder(0.06, 0.15, 12), primitives::cuboid(Vec3::new(0.1, 0.2, 0.05))];
        for _ in 0..5 {
            let bodies: Vec<SceneBody> = (0..4)
                .map(|k| SceneBody {
                    mesh: &meshes[k % 2],
                    pose: RigidTransform::new(
                        Mat3::from_rpy(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0)),
                        Vec3::new(rng.random_range(0.2..0.8), rng.random_range(0.2..0.8), rng.random_range(0.0..0.3)),
                    ),
                    label: k as u32,
                })
                .collect();
            let cam = down_camera(1.0);
            let a = raycast(&bodies, &cam);
            let b = raycast_brute_force(&bodies, &cam);
            assert_eq!(a.labels(), b.labels());
            for (p, q) in a.points().iter().zip(b.points()) {
                assert!(p.distance(*q) <= 1e-9);
            }
        }
    }
}
