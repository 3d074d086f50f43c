use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Mat3, Quat, Vec3};

/// Proper rigid motion `x -> rotation * x + translation` (meters).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        RigidTransform { rotation, translation }
    }

    pub fn from_translation(t: Vec3) -> Self {
        RigidTransform::new(Mat3::IDENTITY, t)
    }

    pub fn from_rotation(r: Mat3) -> Self {
        RigidTransform::new(r, Vec3::ZERO)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform { rotation: rt, translation: -(rt * self.translation) }
    }

    pub fn apply(&self, p: Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    pub fn apply_vector(&self, v: Vec3) -> Vec3 {
        self.rotation * v
    }

    /// Checks orthonormality and a +1 determinant to within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        if !self.rotation.is_finite() || !self.translation.is_finite() {
            return false;
        }
        let rrt = self.rotation * self.rotation.transpose();
        rrt.max_abs_diff(&Mat3::IDENTITY) <= tol && (self.rotation.determinant() - 1.0).abs() <= tol
    }

    /// Row-major rotation followed by translation, as stored in query files.
    pub fn to_12(&self) -> [f64; 12] {
        let r = &self.rotation.rows;
        let t = self.translation;
        [
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2], t.x, t.y,
            t.z,
        ]
    }

    pub fn from_12(v: &[f64; 12]) -> Self {
        RigidTransform::new(
            Mat3::from_rows([[v[0], v[1], v[2]], [v[3], v[4], v[5]], [v[6], v[7], v[8]]]),
            Vec3::new(v[9], v[10], v[11]),
        )
    }

    /// Largest elementwise difference of rotation and translation.
    pub fn max_abs_diff(&self, o: &RigidTransform) -> f64 {
        let d = (self.translation - o.translation).abs();
        self.rotation.max_abs_diff(&o.rotation).max(d.x.max(d.y).max(d.z))
    }
}

/// Pose at fraction `s` between `start` and `end`: translation is lerped and
/// rotation follows the shortest quaternion arc.
pub fn interpolate_pose(start: &RigidTransform, end: &RigidTransform, s: f64) -> Result<RigidTransform> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::invalid(alloc::format!("interpolation fraction {s} outside [0, 1]")));
    }
    if s == 0.0 {
        return Ok(*start);
    }
    if s == 1.0 {
        return Ok(*end);
    }
    let qa = Quat::from_mat3(&start.rotation);
    let qb = Quat::from_mat3(&end.rotation);
    Ok(RigidTransform {
        rotation: qa.slerp(qb, s).to_mat3(),
        translation: start.translation.lerp(end.translation, s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};
    use proptest::prelude::*;

    fn arb_transform() -> impl Strategy<Value = RigidTransform> {
        (
            -3.0..3.0f64,
            -1.5..1.5f64,
            -3.0..3.0f64,
            prop::array::uniform3(-2.0..2.0f64),
        )
            .prop_map(|(r, p, y, t)| {
                RigidTransform::new(Mat3::from_rpy(r, p, y), Vec3::from_array(t))
            })
    }

    #[test]
    fn identity_composition() {
        let t = RigidTransform::new(Mat3::from_rpy(0.1, 0.2, 0.3), Vec3::new(1.0, -2.0, 0.5));
        assert_eq!(RigidTransform::IDENTITY.compose(&t).max_abs_diff(&t), 0.0);
    }

    #[test]
    fn commuting_translations() {
        let a = RigidTransform::from_translation(Vec3::new(1.0, 0.0, 0.0));
        let b = RigidTransform::from_translation(Vec3::new(0.0, 2.0, 0.0));
        assert_eq!(a.compose(&b).translation, Vec3::new(1.0, 2.0, 0.0));
    }

    #[test]
    fn interpolation_endpoints_and_translation() {
        let a = RigidTransform::new(Mat3::rot_x(0.4), Vec3::new(0.1, 0.2, 0.3));
        let b = RigidTransform::new(Mat3::rot_y(-1.0), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(interpolate_pose(&a, &b, 0.0).unwrap(), a);
        assert_eq!(interpolate_pose(&a, &b, 1.0).unwrap(), b);
        let p0 = RigidTransform::IDENTITY;
        let p1 = RigidTransform::from_translation(Vec3::new(1.0, 0.0, 0.0));
        let mid = interpolate_pose(&p0, &p1, 0.25).unwrap();
        assert!(mid.max_abs_diff(&RigidTransform::from_translation(Vec3::new(0.25, 0.0, 0.0))) < 1e-12);
        assert!(interpolate_pose(&a, &b, 1.5).is_err());
        assert!(interpolate_pose(&a, &b, -0.1).is_err());
    }

    #[test]
    fn slerp_halfway_between_quarter_turns() {
        // Closed form: halfway between 0 and 90 degrees about z is 45 degrees.
        let a = RigidTransform::IDENTITY;
        let b = RigidTransform::from_rotation(Mat3::rot_z(FRAC_PI_2));
        let mid = interpolate_pose(&a, &b, 0.5).unwrap();
        assert!(mid.rotation.max_abs_diff(&Mat3::rot_z(FRAC_PI_4)) < 1e-9);
    }

    #[test]
    fn slerp_takes_short_arc() {
        let a = RigidTransform::from_rotation(Mat3::rot_z(3.0));
        let b = RigidTransform::from_rotation(Mat3::rot_z(-3.0));
        let mid = interpolate_pose(&a, &b, 0.5).unwrap();
        assert!(mid.rotation.max_abs_diff(&Mat3::rot_z(core::f64::consts::PI)) < 1e-9);
    }

    proptest! {
        #[test]
        fn group_laws(a in arb_transform(), b in arb_transform(), c in arb_transform()) {
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            prop_assert!(left.max_abs_diff(&right) < 1e-9);
            prop_assert!(a.compose(&a.inverse()).max_abs_diff(&RigidTransform::IDENTITY) < 1e-9);
            prop_assert!(a.is_valid(1e-6));
            prop_assert!(a.compose(&b).is_valid(1e-6));
        }

        #[test]
        fn interpolation_stays_rigid(a in arb_transform(), b in arb_transform(), s in 0.0..1.0f64) {
            let p = interpolate_pose(&a, &b, s).unwrap();
            prop_assert!(p.is_valid(1e-9));
        }
    }
}
