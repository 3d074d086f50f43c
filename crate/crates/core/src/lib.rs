//! Point-cloud collision prediction and sampling-based rearrangement planning.
//!
//! Everything in this crate is pure computation over `alloc` collections: the
//! exact mesh collision oracle, procedural tabletop scenes and synthetic depth
//! rendering, a small reverse-mode autodiff engine, the voxel/point collision
//! network with its baselines, and the kinematic MPPI pick-and-place policy.
//! File formats, configuration and the command-line front end live in the
//! `scnet` companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod autodiff;
pub mod baselines;
pub mod collision;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod math;
pub mod metrics;
pub mod net;
pub mod planner;
pub mod rng;
pub mod scene;

pub use error::{Error, Result};
pub use geometry::{PinholeCamera, PointCloud, RigidTransform, TriangleMesh};
pub use math::{Mat3, Quat, Vec3};
