use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::collision::CollisionMesh;
use crate::error::{Error, Result};
use crate::geometry::{primitives, RigidTransform, TriangleMesh};
use crate::math::{Mat3, Vec3};

/// Revolute joint. `origin` places the joint frame in its parent frame at
/// q = 0; the joint rotates about `axis` of its own frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub origin: RigidTransform,
    pub axis: Vec3,
    pub lower: f64,
    pub upper: f64,
}

/// Segment `a`–`b` swept by a sphere of `radius`, in a link frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Capsule {
    pub a: Vec3,
    pub b: Vec3,
    pub radius: f64,
}

impl Capsule {
    pub fn transformed(&self, t: &RigidTransform) -> Capsule {
        Capsule { a: t.apply(self.a), b: t.apply(self.b), radius: self.radius }
    }

    pub fn intersects(&self, o: &Capsule) -> bool {
        segment_distance(self.a, self.b, o.a, o.b) <= self.radius + o.radius
    }
}

/// Closest distance between segments `p1q1` and `p2q2`.
pub fn segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    let eps = 1e-18;
    let (s, t);
    if a <= eps && e <= eps {
        return r.norm();
    }
    if a <= eps {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= eps {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > eps { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// A rigid body moving with one joint frame.
#[derive(Debug, Clone)]
pub struct Link {
    pub name: &'static str,
    /// Frame index: 0 is the base, `i` the frame after joint `i`.
    pub frame: usize,
    /// Mesh and capsules are expressed in this offset from the frame.
    pub offset: RigidTransform,
    pub mesh: Arc<CollisionMesh>,
    pub capsules: Vec<Capsule>,
}

/// Parallel-jaw gripper held open at `opening`, expressed in the tool frame
/// (z = approach, y = closing axis, origin between the fingertips).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gripper {
    pub opening: f64,
    pub finger_length: f64,
    pub finger_thickness: f64,
    pub finger_width: f64,
    /// Fingertips extend this far past the tool point.
    pub tip_overshoot: f64,
    pub palm: Vec3,
    /// Clearance required between the object width and the opening.
    pub margin: f64,
}

impl Default for Gripper {
    fn default() -> Self {
        Gripper {
            opening: 0.08,
            finger_length: 0.05,
            finger_thickness: 0.01,
            finger_width: 0.02,
            tip_overshoot: 0.005,
            palm: Vec3::new(0.05, 0.2, 0.05),
            margin: 0.005,
        }
    }
}

impl Gripper {
    /// Palm plus two open fingers, tool frame.
    pub fn mesh(&self) -> TriangleMesh {
        let tip = self.tip_overshoot;
        let base = tip - self.finger_length;
        let half_open = 0.5 * self.opening;
        let fw = 0.5 * self.finger_width;
        let left = primitives::cuboid_between(
            Vec3::new(-fw, half_open, base),
            Vec3::new(fw, half_open + self.finger_thickness, tip),
        );
        let right = primitives::cuboid_between(
            Vec3::new(-fw, -half_open - self.finger_thickness, base),
            Vec3::new(fw, -half_open, tip),
        );
        let p = self.palm * 0.5;
        let palm = primitives::cuboid_between(Vec3::new(-p.x, -p.y, base - self.palm.z), Vec3::new(p.x, p.y, base));
        palm.merged(&left).merged(&right)
    }

    /// Distance from the tool point back to the palm face.
    pub fn depth(&self) -> f64 {
        self.finger_length - self.tip_overshoot
    }

    pub fn max_width(&self) -> f64 {
        self.opening - self.margin
    }
}

#[derive(Debug, Clone)]
pub struct RobotModel {
    pub base: RigidTransform,
    pub joints: Vec<Joint>,
    /// Tool point in the last joint frame.
    pub tool: RigidTransform,
    pub links: Vec<Link>,
    /// Link index pairs checked for self-collision.
    pub self_pairs: Vec<(usize, usize)>,
    pub gripper: Option<Gripper>,
    pub home: Vec<f64>,
}

/// Poses of every joint frame (index 0 = base) and of the tool.
#[derive(Debug, Clone, PartialEq)]
pub struct Kinematics {
    pub frames: Vec<RigidTransform>,
    pub tool: RigidTransform,
}

fn rpy(x: f64, y: f64, z: f64, r: f64) -> RigidTransform {
    RigidTransform::new(Mat3::from_rpy(r, 0.0, 0.0), Vec3::new(x, y, z))
}

fn capsule_link(name: &'static str, frame: usize, capsules: Vec<Capsule>) -> Link {
    let mut mesh = TriangleMesh::empty();
    for c in &capsules {
        mesh = mesh.merged(&primitives::capsule(c.a, c.b, c.radius, 12));
    }
    Link {
        name,
        frame,
        offset: RigidTransform::IDENTITY,
        mesh: Arc::new(CollisionMesh::new(mesh).expect("capsules are non-empty")),
        capsules,
    }
}

fn cap(a: [f64; 3], b: [f64; 3], radius: f64) -> Capsule {
    Capsule { a: Vec3::from_array(a), b: Vec3::from_array(b), radius }
}

impl RobotModel {
    /// Seven-joint arm with Panda-style kinematics and limits, mounted at
    /// `base`, with a capsule body per link and an open parallel gripper.
    pub fn panda(base: RigidTransform) -> RobotModel {
        let j = |origin: RigidTransform, lower: f64, upper: f64| Joint { origin, axis: Vec3::Z, lower, upper };
        let joints = alloc::vec![
            j(rpy(0.0, 0.0, 0.333, 0.0), -2.8973, 2.8973),
            j(rpy(0.0, 0.0, 0.0, -FRAC_PI_2), -1.7628, 1.7628),
            j(rpy(0.0, -0.316, 0.0, FRAC_PI_2), -2.8973, 2.8973),
            j(rpy(0.0825, 0.0, 0.0, FRAC_PI_2), -3.0718, -0.0698),
            j(rpy(-0.0825, 0.384, 0.0, -FRAC_PI_2), -2.8973, 2.8973),
            j(rpy(0.0, 0.0, 0.0, FRAC_PI_2), -0.0175, 3.7525),
            j(rpy(0.088, 0.0, 0.0, FRAC_PI_2), -2.8973, 2.8973),
        ];
        let flange = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.107));
        let hand = RigidTransform::from_rotation(Mat3::rot_z(-FRAC_PI_4));
        let tool = flange.compose(&hand).compose(&RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.1034)));
        let gripper = Gripper::default();
        let mut links = alloc::vec![
            capsule_link("link1", 1, alloc::vec![cap([0.0, 0.0, -0.18], [0.0, 0.0, -0.03], 0.06)]),
            capsule_link("link2", 2, alloc::vec![cap([0.0, 0.0, 0.0], [0.0, -0.22, 0.0], 0.06)]),
            capsule_link("link3", 3, alloc::vec![cap([0.0, 0.0, -0.15], [0.0825, 0.0, -0.02], 0.055)]),
            capsule_link("link4", 4, alloc::vec![cap([0.0, 0.0, 0.0], [-0.0825, 0.12, 0.0], 0.055)]),
            capsule_link("link5", 5, alloc::vec![cap([0.0, 0.0, -0.22], [0.0, 0.06, -0.08], 0.05)]),
            capsule_link("link6", 6, alloc::vec![cap([0.0, 0.0, 0.0], [0.088, 0.0, 0.0], 0.05)]),
            capsule_link("link7", 7, alloc::vec![cap([0.0, 0.0, -0.02], [0.0, 0.0, 0.08], 0.045)]),
        ];
        let hw = 0.5 * gripper.palm.y;
        let palm_z = -gripper.depth() - 0.5 * gripper.palm.z;
        links.push(Link {
            name: "hand",
            frame: 7,
            offset: tool,
            mesh: Arc::new(CollisionMesh::new(gripper.mesh()).expect("gripper mesh is non-empty")),
            capsules: alloc::vec![cap([0.0, -hw + 0.02, palm_z], [0.0, hw - 0.02, palm_z], 0.035)],
        });
        let home = alloc::vec![0.0, -0.3, 0.0, -2.2, 0.0, 2.0, FRAC_PI_4];
        let mut robot = RobotModel { base, joints, tool, links, self_pairs: Vec::new(), gripper: Some(gripper), home };
        robot.self_pairs = robot.default_self_pairs();
        robot
    }

    /// Planar chain of two unit links rotating about z, for tests.
    pub fn planar_two_link() -> RobotModel {
        let joints = alloc::vec![
            Joint { origin: RigidTransform::IDENTITY, axis: Vec3::Z, lower: -core::f64::consts::PI, upper: core::f64::consts::PI },
            Joint {
                origin: RigidTransform::from_translation(Vec3::X),
                axis: Vec3::Z,
                lower: -core::f64::consts::PI,
                upper: core::f64::consts::PI,
            },
        ];
        let links = alloc::vec![
            capsule_link("link1", 1, alloc::vec![cap([0.0; 3], [1.0, 0.0, 0.0], 0.05)]),
            capsule_link("link2", 2, alloc::vec![cap([0.0; 3], [1.0, 0.0, 0.0], 0.05)]),
        ];
        RobotModel {
            base: RigidTransform::IDENTITY,
            joints,
            tool: RigidTransform::from_translation(Vec3::X),
            links,
            self_pairs: Vec::new(),
            gripper: None,
            home: alloc::vec![0.0, 0.0],
        }
    }

    /// Non-adjacent link pairs whose capsules are apart at the home pose.
    fn default_self_pairs(&self) -> Vec<(usize, usize)> {
        let caps = self.world_capsules(&self.fk(&self.home).expect("home within limits"));
        let mut pairs = Vec::new();
        for i in 0..self.links.len() {
            for j in i + 2..self.links.len() {
                let touching = caps[i].iter().any(|a| caps[j].iter().any(|b| a.intersects(b)));
                if !touching {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn lower(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.lower).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.joints.iter().map(|j| j.upper).collect()
    }

    pub fn within_limits(&self, q: &[f64], tol: f64) -> bool {
        q.len() == self.dof()
            && q.iter().zip(&self.joints).all(|(v, j)| *v >= j.lower - tol && *v <= j.upper + tol)
    }

    pub fn clamp(&self, q: &mut [f64]) {
        for (v, j) in q.iter_mut().zip(&self.joints) {
            *v = v.clamp(j.lower, j.upper);
        }
    }

    pub fn check(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::invalid(format!("expected {} joint values, got {}", self.dof(), q.len())));
        }
        if !self.within_limits(q, 1e-9) {
            return Err(Error::invalid(format!("configuration {q:?} outside joint limits")));
        }
        Ok(())
    }

    /// Frame poses without the limit check.
    pub fn fk_unchecked(&self, q: &[f64]) -> Kinematics {
        let mut frames = Vec::with_capacity(self.dof() + 1);
        let mut f = self.base;
        frames.push(f);
        for (joint, &v) in self.joints.iter().zip(q) {
            f = f.compose(&joint.origin).compose(&RigidTransform::from_rotation(Mat3::from_axis_angle(joint.axis, v)));
            frames.push(f);
        }
        let tool = f.compose(&self.tool);
        Kinematics { frames, tool }
    }

    pub fn fk(&self, q: &[f64]) -> Result<Kinematics> {
        self.check(q)?;
        Ok(self.fk_unchecked(q))
    }

    pub fn link_poses(&self, k: &Kinematics) -> Vec<RigidTransform> {
        self.links.iter().map(|l| k.frames[l.frame].compose(&l.offset)).collect()
    }

    pub fn world_capsules(&self, k: &Kinematics) -> Vec<Vec<Capsule>> {
        self.links
            .iter()
            .map(|l| {
                let pose = k.frames[l.frame].compose(&l.offset);
                l.capsules.iter().map(|c| c.transformed(&pose)).collect()
            })
            .collect()
    }

    pub fn self_collision(&self, q: &[f64]) -> bool {
        let caps = self.world_capsules(&self.fk_unchecked(q));
        self.self_pairs
            .iter()
            .any(|&(i, j)| caps[i].iter().any(|a| caps[j].iter().any(|b| a.intersects(b))))
    }

    /// 6×n geometric Jacobian of the tool point (rows: linear then angular
    /// velocity, world frame).
    pub fn jacobian(&self, q: &[f64]) -> Vec<[f64; 6]> {
        let k = self.fk_unchecked(q);
        let p = k.tool.translation;
        (0..self.dof())
            .map(|i| {
                let frame = &k.frames[i + 1];
                let z = frame.rotation.mul_vec(self.joints[i].axis);
                let v = z.cross(p - frame.translation);
                [v.x, v.y, v.z, z.x, z.y, z.z]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_chain_forward_kinematics() {
        let r = RobotModel::planar_two_link();
        let k = r.fk(&[0.0, 0.0]).unwrap();
        assert!((k.tool.translation - Vec3::new(2.0, 0.0, 0.0)).norm() < 1e-12);
        let k = r.fk(&[FRAC_PI_2, 0.0]).unwrap();
        assert!((k.tool.translation - Vec3::new(0.0, 2.0, 0.0)).norm() < 1e-9);
        assert!(r.fk(&[4.0, 0.0]).is_err());
        assert!(r.fk(&[0.0]).is_err());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let r = RobotModel::panda(RigidTransform::IDENTITY);
        let q = [0.3, -0.4, 0.2, -1.9, 0.1, 1.7, 0.5];
        let j = r.jacobian(&q);
        let h = 1e-6;
        for i in 0..7 {
            let mut qp = q;
            let mut qm = q;
            qp[i] += h;
            qm[i] -= h;
            let (tp, tm) = (r.fk_unchecked(&qp).tool, r.fk_unchecked(&qm).tool);
            let dv = (tp.translation - tm.translation) * (0.5 / h);
            let dw = tp.rotation.mul_mat(&tm.rotation.transpose()).log() * (0.5 / h);
            let num = [dv.x, dv.y, dv.z, dw.x, dw.y, dw.z];
            let scale = num.iter().map(|v| v.abs()).fold(1e-3, f64::max);
            for r in 0..6 {
                assert!((num[r] - j[i][r]).abs() / scale < 1e-5, "joint {i} row {r}: {} vs {}", num[r], j[i][r]);
            }
        }
    }

    #[test]
    fn panda_home_is_clear() {
        let r = RobotModel::panda(RigidTransform::from_translation(Vec3::new(-0.6, 0.0, 0.0)));
        assert!(r.within_limits(&r.home, 0.0));
        assert!(!r.self_collision(&r.home));
        assert!(r.self_pairs.len() > 10);
        let tool = r.fk(&r.home).unwrap().tool;
        // gripper points down in front of the base at home
        assert!(tool.rotation.col(2).z < -0.9);
        assert!(tool.translation.z > 0.2);
        for l in &r.links {
            assert!(l.mesh.watertight, "{}", l.name);
        }
    }

    #[test]
    fn segment_distances() {
        let d = segment_distance(Vec3::ZERO, Vec3::X, Vec3::new(0.5, 1.0, 0.0), Vec3::new(0.5, 2.0, 0.0));
        assert!((d - 1.0).abs() < 1e-12);
        let d = segment_distance(Vec3::ZERO, Vec3::X, Vec3::new(0.5, -1.0, 1.0), Vec3::new(0.5, 1.0, 1.0));
        assert!((d - 1.0).abs() < 1e-12);
        let d = segment_distance(Vec3::ZERO, Vec3::ZERO, Vec3::new(2.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0));
        assert!((d - 2.0).abs() < 1e-12);
    }
}
