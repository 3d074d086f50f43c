//! Exact mesh-mesh collision checking: the ground-truth labeler and auditor.

mod body;
mod bvh;
mod tritri;

pub use body::{
    contains_point, first_hit, in_collision, in_collision_any, in_collision_brute_force, in_collision_solid, point_distance_brute_force,
    point_signed_distance, CollisionMesh, PosedBody,
};
pub use bvh::{BvhNode, BvhTree, NodeKind, LEAF_SIZE};
pub use tritri::{triangles_intersect, CONTACT_EPS};
