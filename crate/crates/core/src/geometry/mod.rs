//! Rigid transforms, triangle meshes, point clouds, surface sampling and
//! synthetic depth rendering.

mod camera;
mod cloud;
mod mesh;
pub mod primitives;
mod raycast;
mod sampling;
mod transform;

pub use camera::PinholeCamera;
pub use cloud::PointCloud;
pub use mesh::{Aabb, TriangleMesh, DEGENERATE_AREA};
pub use raycast::{ray_triangle, raycast, raycast_brute_force, Ray, RayHit, SceneBody};
pub use sampling::sample_surface;
pub(crate) use sampling::{point_on_triangle, AreaSampler};
pub use transform::{interpolate_pose, RigidTransform};
