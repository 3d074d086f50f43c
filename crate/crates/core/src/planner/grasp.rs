use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::robot::Gripper;
use crate::collision::{first_hit, PosedBody};
use crate::geometry::{point_on_triangle, AreaSampler, Ray, RigidTransform};
use crate::math::{Mat3, Vec3};
use crate::rng::Rng;

/// Contact normals must oppose each other by more than this angle.
pub const ANTIPODAL_DEG: f64 = 150.0;
/// Pregrasp retreat along the approach axis.
pub const PREGRASP_OFFSET: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grasp {
    /// Tool pose: z approaches the object, y is the closing axis, origin
    /// midway between the contacts.
    pub pose: RigidTransform,
    pub pregrasp: RigidTransform,
    pub width: f64,
    pub contacts: [Vec3; 2],
}

impl Grasp {
    pub fn approach(&self) -> Vec3 {
        self.pose.rotation.col(2)
    }

    /// Tool pose moved `d` back along the approach axis.
    pub fn retreated(&self, d: f64) -> RigidTransform {
        self.pose.compose(&RigidTransform::from_translation(Vec3::new(0.0, 0.0, -d)))
    }
}

/// Tool frame for a closing axis `y`: approach is `hint` with its component
/// along `y` removed, falling back to world +x when that is too short.
pub fn grasp_frame(center: Vec3, y: Vec3, hint: Vec3) -> RigidTransform {
    let mut z = hint - y * hint.dot(y);
    if z.norm() < 0.5 {
        z = Vec3::X - y * y.x;
        if z.norm() < 1e-6 {
            z = y.any_orthogonal();
        }
    }
    let z = z.normalized();
    let x = y.cross(z);
    RigidTransform::new(Mat3::from_cols(x, y, z), center)
}

/// Antipodal parallel-jaw grasps on `body`: surface points are drawn by area,
/// a ray is cast inward along the negated face normal, and the pair is kept
/// when the exit normal opposes the entry normal by more than
/// [`ANTIPODAL_DEG`] and the width fits the gripper. Approach is top-down where
/// the closing axis allows.
pub fn scripted_grasps(body: &PosedBody, gripper: &Gripper, samples: usize, max_grasps: usize, seed: u64) -> Vec<Grasp> {
    let mesh = &body.shape.mesh;
    if mesh.is_empty() {
        return Vec::new();
    }
    let mut rng = Rng::seed_from_u64(seed);
    let sampler = AreaSampler::new(mesh);
    let cos_limit = ANTIPODAL_DEG.to_radians().cos();
    let mut grasps: Vec<Grasp> = Vec::new();
    for _ in 0..samples {
        if grasps.len() >= max_grasps {
            break;
        }
        let tri = sampler.pick(&mut rng);
        let p = point_on_triangle(mesh, tri, &mut rng);
        let n = mesh.triangle_normal(tri);
        let ray = Ray { origin: p - n * 1e-7, direction: -n };
        let Some((hit, t)) = first_hit(&body.shape, &ray) else {
            continue;
        };
        if mesh.triangle_normal(hit as usize).dot(n) > cos_limit {
            continue;
        }
        let q = ray.at(t);
        let width = (q - p).norm();
        if width > gripper.max_width() || width < 1e-3 {
            continue;
        }
        let (pw, qw) = (body.pose.apply(p), body.pose.apply(q));
        let y = (qw - pw).normalized();
        let center = (pw + qw) * 0.5;
        let duplicate = grasps.iter().any(|g| (g.pose.translation - center).norm() < 0.005 && g.pose.rotation.col(1).dot(y).abs() > 0.99);
        if duplicate {
            continue;
        }
        let pose = grasp_frame(center, y, -Vec3::Z);
        let pregrasp = pose.compose(&RigidTransform::from_translation(Vec3::new(0.0, 0.0, -PREGRASP_OFFSET)));
        grasps.push(Grasp { pose, pregrasp, width, contacts: [pw, qw] });
    }
    grasps
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;

    fn body(mesh: crate::TriangleMesh) -> PosedBody {
        PosedBody::from_mesh(mesh, RigidTransform::new(Mat3::rot_z(0.4), Vec3::new(0.1, 0.2, 0.02))).unwrap()
    }

    #[test]
    fn cube_grasps_cover_all_axes() {
        let b = body(primitives::cuboid(Vec3::splat(0.04)));
        let grasps = scripted_grasps(&b, &Gripper::default(), 600, 200, 1);
        let mut axes = [false; 3];
        for g in &grasps {
            let local = b.pose.rotation.transpose().mul_vec(g.pose.rotation.col(1));
            for (k, hit) in axes.iter_mut().enumerate() {
                if local[k].abs() > 0.999 {
                    *hit = true;
                }
            }
            assert!((g.width - 0.04).abs() < 1e-6);
            assert!(g.pose.is_valid(1e-9));
            assert!((g.pregrasp.translation - g.pose.translation + g.approach() * PREGRASP_OFFSET).norm() < 1e-12);
        }
        assert_eq!(axes, [true; 3]);
    }

    #[test]
    fn wide_sphere_has_no_grasps() {
        let b = body(primitives::sphere(0.06, 24));
        assert!(scripted_grasps(&b, &Gripper::default(), 500, 100, 2).is_empty());
    }

    #[test]
    fn contacts_reproject_onto_surface() {
        let b = body(primitives::cylinder(0.025, 0.1, 16));
        let grasps = scripted_grasps(&b, &Gripper::default(), 400, 100, 3);
        assert!(!grasps.is_empty());
        let local = b.pose.inverse();
        for g in &grasps {
            let y = g.pose.rotation.col(1);
            for dir in [y, -y] {
                // cast from outside back toward the tool point
                let origin = local.apply(g.pose.translation + dir * 0.2);
                let ray = Ray { origin, direction: local.apply_vector(-dir) };
                let (_, t) = first_hit(&b.shape, &ray).unwrap();
                assert!(((0.2 - t) - 0.5 * g.width).abs() < 0.002);
            }
        }
    }
}
