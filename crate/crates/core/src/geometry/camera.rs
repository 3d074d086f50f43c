use alloc::format;

use serde::{Deserialize, Serialize};

use super::{Ray, RigidTransform};
use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3};

/// Pinhole depth camera. Camera frame: x right, y down, z along the optical
/// axis. `extrinsic` maps camera coordinates to world coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinholeCamera {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub extrinsic: RigidTransform,
}

impl PinholeCamera {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        extrinsic: RigidTransform,
    ) -> Result<Self> {
        let cam = PinholeCamera { fx, fy, cx, cy, width, height, extrinsic };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::invalid(format!("focal lengths must be positive, got {} {}", self.fx, self.fy)));
        }
        if !(self.cx > 0.0 && self.cx < self.width as f64 && self.cy > 0.0 && self.cy < self.height as f64) {
            return Err(Error::invalid(format!(
                "principal point ({}, {}) outside {}x{} image",
                self.cx, self.cy, self.width, self.height
            )));
        }
        if !self.extrinsic.is_valid(1e-6) {
            return Err(Error::invalid("camera extrinsic is not a rigid transform"));
        }
        Ok(())
    }

    /// Camera-to-world pose looking from `eye` at `target`, image y toward
    /// world -z where possible.
    pub fn look_at(eye: Vec3, target: Vec3) -> RigidTransform {
        let z = (target - eye).normalized();
        let mut x = z.cross(Vec3::Z);
        if x.norm() < 1e-9 {
            x = z.cross(Vec3::Y);
        }
        let x = x.normalized();
        let y = z.cross(x);
        RigidTransform::new(Mat3::from_cols(x, y, z), eye)
    }

    pub fn position(&self) -> Vec3 {
        self.extrinsic.translation
    }

    pub fn optical_axis(&self) -> Vec3 {
        self.extrinsic.rotation.col(2)
    }

    /// World-frame ray through the center of pixel `(u, v)`.
    pub fn pixel_ray(&self, u: u32, v: u32) -> Ray {
        let d = Vec3::new(
            (u as f64 + 0.5 - self.cx) / self.fx,
            (v as f64 + 0.5 - self.cy) / self.fy,
            1.0,
        );
        Ray { origin: self.position(), direction: self.extrinsic.apply_vector(d) }
    }

    /// Depth (camera-frame z) of a world point.
    pub fn depth_of(&self, p: Vec3) -> f64 {
        self.extrinsic.inverse().apply(p).z
    }

    /// Same intrinsics, extrinsic moved by `t` (world-frame).
    pub fn moved(&self, t: &RigidTransform) -> PinholeCamera {
        PinholeCamera { extrinsic: t.compose(&self.extrinsic), ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn intrinsics_validated() {
        let e = RigidTransform::IDENTITY;
        assert!(PinholeCamera::new(100.0, 100.0, 64.0, 64.0, 128, 128, e).is_ok());
        assert!(PinholeCamera::new(0.0, 100.0, 64.0, 64.0, 128, 128, e).is_err());
        assert!(PinholeCamera::new(100.0, 100.0, 128.0, 64.0, 128, 128, e).is_err());
    }

    #[test]
    fn look_at_aims_and_is_rigid() {
        let eye = Vec3::new(0.7, 0.2, 0.7);
        let pose = PinholeCamera::look_at(eye, Vec3::ZERO);
        assert!(pose.is_valid(1e-12));
        let axis = pose.rotation.col(2);
        assert!(axis.cross(-eye.normalized()).norm() < 1e-12);
        // image "down" points toward world -z
        assert!(pose.rotation.col(1).z < 0.0);
        let down = PinholeCamera::look_at(Vec3::new(0.0, 0.0, 2.0), Vec3::ZERO);
        assert!(down.is_valid(1e-12));
    }
}
