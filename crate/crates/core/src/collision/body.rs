use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use super::bvh::{BvhTree, NodeKind};
use super::tritri::triangles_intersect;
use crate::error::{Error, Result};
use crate::geometry::{ray_triangle, Aabb, Ray, RigidTransform, TriangleMesh};
use crate::math::Vec3;

/// Slack on box overlap tests. Looser than the triangle contact tolerance so
/// pruning never hides a touching pair.
const BOX_SLACK: f64 = 1e-6;

/// A mesh with its hierarchy, shareable between many posed instances.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionMesh {
    pub mesh: TriangleMesh,
    pub bvh: BvhTree,
    pub watertight: bool,
}

impl CollisionMesh {
    pub fn new(mesh: TriangleMesh) -> Result<Self> {
        let bvh = BvhTree::build(&mesh)?;
        let watertight = mesh.is_watertight();
        Ok(CollisionMesh { mesh, bvh, watertight })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosedBody {
    pub shape: Arc<CollisionMesh>,
    pub pose: RigidTransform,
}

impl PosedBody {
    pub fn new(shape: Arc<CollisionMesh>, pose: RigidTransform) -> Self {
        PosedBody { shape, pose }
    }

    pub fn from_mesh(mesh: TriangleMesh, pose: RigidTransform) -> Result<Self> {
        Ok(PosedBody { shape: Arc::new(CollisionMesh::new(mesh)?), pose })
    }

    pub fn with_pose(&self, pose: RigidTransform) -> Self {
        PosedBody { shape: self.shape.clone(), pose }
    }

    pub fn world_aabb(&self) -> Aabb {
        self.shape.bvh.root_aabb().transformed(&self.pose)
    }

    fn world_vertices(&self) -> Vec<Vec3> {
        self.shape.mesh.vertices().iter().map(|v| self.pose.apply(*v)).collect()
    }

    fn world_triangle(&self, verts: &[Vec3], i: u32) -> [Vec3; 3] {
        self.shape.mesh.triangles()[i as usize].map(|k| verts[k as usize])
    }
}

/// True when any triangle of `a` touches or crosses any triangle of `b`.
pub fn in_collision(a: &PosedBody, b: &PosedBody) -> bool {
    if !a.world_aabb().overlaps(&b.world_aabb(), BOX_SLACK) {
        return false;
    }
    let (va, vb) = (a.world_vertices(), b.world_vertices());
    let (ta, tb) = (&a.shape.bvh, &b.shape.bvh);
    let mut stack: Vec<(u32, u32)> = alloc::vec![(0, 0)];
    while let Some((na, nb)) = stack.pop() {
        let (node_a, node_b) = (&ta.nodes()[na as usize], &tb.nodes()[nb as usize]);
        let (box_a, box_b) = (node_a.aabb.transformed(&a.pose), node_b.aabb.transformed(&b.pose));
        if !box_a.overlaps(&box_b, BOX_SLACK) {
            continue;
        }
        match (node_a.kind, node_b.kind) {
            (NodeKind::Leaf { .. }, NodeKind::Leaf { .. }) => {
                for &i in ta.leaf_items(node_a) {
                    let tri_a = a.world_triangle(&va, i);
                    for &j in tb.leaf_items(node_b) {
                        if triangles_intersect(&tri_a, &b.world_triangle(&vb, j)) {
                            return true;
                        }
                    }
                }
            }
            (NodeKind::Inner { left, right }, NodeKind::Leaf { .. }) => {
                stack.push((left, nb));
                stack.push((right, nb));
            }
            (NodeKind::Leaf { .. }, NodeKind::Inner { left, right }) => {
                stack.push((na, left));
                stack.push((na, right));
            }
            (NodeKind::Inner { left: la, right: ra }, NodeKind::Inner { left: lb, right: rb }) => {
                let ea = box_a.extent();
                let eb = box_b.extent();
                if ea.x + ea.y + ea.z >= eb.x + eb.y + eb.z {
                    stack.push((la, nb));
                    stack.push((ra, nb));
                } else {
                    stack.push((na, lb));
                    stack.push((na, rb));
                }
            }
        }
    }
    false
}

/// Reference all-pairs check, sharing the triangle predicate with the BVH path.
pub fn in_collision_brute_force(a: &PosedBody, b: &PosedBody) -> bool {
    let (va, vb) = (a.world_vertices(), b.world_vertices());
    (0..a.shape.mesh.len() as u32).any(|i| {
        let tri_a = a.world_triangle(&va, i);
        (0..b.shape.mesh.len() as u32).any(|j| triangles_intersect(&tri_a, &b.world_triangle(&vb, j)))
    })
}

pub fn in_collision_any<'a>(query: &PosedBody, scene: impl IntoIterator<Item = &'a PosedBody>) -> bool {
    scene.into_iter().any(|b| in_collision(query, b))
}

fn closest_point_on_triangle(p: Vec3, [a, b, c]: [Vec3; 3]) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

fn triangle_distance(mesh: &TriangleMesh, i: usize, p: Vec3) -> f64 {
    (closest_point_on_triangle(p, mesh.triangle(i)) - p).norm()
}

/// Oblique directions that avoid axis-aligned edges of procedural meshes.
const PARITY_DIRECTIONS: [Vec3; 3] = [
    Vec3::new(0.5377, 0.3943, 0.7452),
    Vec3::new(-0.6131, 0.7071, -0.3522),
    Vec3::new(0.2718, -0.8284, -0.4899),
];

fn crossings(shape: &CollisionMesh, ray: &Ray) -> usize {
    let mut count = 0;
    shape.bvh.any_leaf(
        |b| ray.hits_aabb(b, f64::INFINITY),
        |items| {
            count += items
                .iter()
                .filter(|&&i| ray_triangle(ray, &shape.mesh.triangle(i as usize)).is_some())
                .count();
            false
        },
    );
    count
}

/// Nearest triangle hit by `ray` (mesh frame) and its ray parameter.
pub fn first_hit(shape: &CollisionMesh, ray: &Ray) -> Option<(u32, f64)> {
    shape.bvh.nearest(
        |b| ray.enter_aabb(b, f64::INFINITY).unwrap_or(f64::INFINITY),
        |i| ray_triangle(ray, &shape.mesh.triangle(i as usize)),
    )
}

/// Distance from `p` to the body surface, negative inside. Inside/outside is
/// a majority vote of ray-crossing parities.
pub fn point_signed_distance(body: &PosedBody, p: Vec3) -> Result<f64> {
    if !body.shape.watertight {
        return Err(Error::NotWatertight);
    }
    let local = body.pose.inverse().apply(p);
    let mesh = &body.shape.mesh;
    let (_, dist) = body
        .shape
        .bvh
        .nearest(|b| b.distance_squared(local).sqrt(), |i| Some(triangle_distance(mesh, i as usize, local)))
        .expect("non-empty mesh");
    let inside_votes = PARITY_DIRECTIONS
        .iter()
        .filter(|d| crossings(&body.shape, &Ray { origin: local, direction: **d }) % 2 == 1)
        .count();
    Ok(if inside_votes >= 2 { -dist } else { dist })
}

/// Whether `p` lies inside the closed surface of `body` by ray-parity vote.
/// Open meshes contain nothing.
pub fn contains_point(body: &PosedBody, p: Vec3) -> bool {
    if !body.shape.watertight {
        return false;
    }
    let local = body.pose.inverse().apply(p);
    if !body.shape.bvh.nodes()[0].aabb.contains_point(local) {
        return false;
    }
    PARITY_DIRECTIONS
        .iter()
        .filter(|d| crossings(&body.shape, &Ray { origin: local, direction: **d }) % 2 == 1)
        .count()
        >= 2
}

/// Like [`in_collision`] but treating closed meshes as solids, so a body
/// entirely inside another also collides. Surfaces that do not cross leave
/// the bodies either nested or apart, so testing one vertex each way settles
/// which.
pub fn in_collision_solid(a: &PosedBody, b: &PosedBody) -> bool {
    if in_collision(a, b) {
        return true;
    }
    let (ba, bb) = (a.world_aabb(), b.world_aabb());
    let a_in_b = bb.contains(&ba) && contains_point(b, a.pose.apply(a.shape.mesh.vertices()[0]));
    a_in_b || (ba.contains(&bb) && contains_point(a, b.pose.apply(b.shape.mesh.vertices()[0])))
}

/// Reference unsigned distance: minimum over every triangle.
pub fn point_distance_brute_force(body: &PosedBody, p: Vec3) -> f64 {
    let local = body.pose.inverse().apply(p);
    let mesh = &body.shape.mesh;
    (0..mesh.len()).map(|i| triangle_distance(mesh, i, local)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;
    use crate::math::Mat3;
    use rand::{Rng, SeedableRng};

    fn cube_at(c: Vec3) -> PosedBody {
        PosedBody::from_mesh(primitives::cuboid(Vec3::splat(1.0)), RigidTransform::from_translation(c)).unwrap()
    }

    #[test]
    fn nested_bodies_collide_as_solids() {
        let big = PosedBody::from_mesh(primitives::cuboid(Vec3::splat(1.0)), RigidTransform::IDENTITY).unwrap();
        let small = PosedBody::from_mesh(primitives::cuboid(Vec3::splat(0.2)), RigidTransform::IDENTITY).unwrap();
        assert!(!in_collision(&small, &big));
        assert!(in_collision_solid(&small, &big) && in_collision_solid(&big, &small));
        let apart = small.with_pose(RigidTransform::from_translation(Vec3::new(2.0, 0.0, 0.0)));
        assert!(!in_collision_solid(&apart, &big));
        assert!(contains_point(&big, Vec3::splat(0.1)) && !contains_point(&big, Vec3::splat(0.6)));
    }

    #[test]
    fn cube_pairs() {
        let o = cube_at(Vec3::ZERO);
        assert!(!in_collision(&o, &cube_at(Vec3::new(3.0, 0.0, 0.0))));
        assert!(in_collision(&o, &cube_at(Vec3::new(0.5, 0.0, 0.0))));
        // shared face counts as contact
        assert!(in_collision(&o, &cube_at(Vec3::new(1.0, 0.0, 0.0))));
        assert!(!in_collision(&o, &cube_at(Vec3::new(1.0 + 1e-6, 0.0, 0.0))));
    }

    #[test]
    fn any_over_scene() {
        let scene: Vec<PosedBody> = (0..10).map(|i| cube_at(Vec3::new(3.0 * i as f64, 0.0, 0.0))).collect();
        let q = cube_at(Vec3::new(21.0, 0.4, 0.0));
        assert!(in_collision_any(&q, &scene));
        let hits: Vec<usize> = (0..10).filter(|&i| in_collision(&q, &scene[i])).collect();
        assert_eq!(hits, alloc::vec![7]);
        assert!(!in_collision_any(&q, &[]));
    }

    #[test]
    fn bvh_matches_brute_force_and_is_symmetric() {
        let mut rng = crate::rng::Rng::seed_from_u64(77);
        let shapes = [
            primitives::cylinder(0.05, 0.12, 16),
            primitives::open_box(Vec3::new(0.1, 0.08, 0.06), 0.01),
            primitives::l_block(0.1, 0.07, 0.03, 0.04),
        ];
        for k in 0..60 {
            let pose = |rng: &mut crate::rng::Rng| {
                RigidTransform::new(
                    Mat3::from_rpy(rng.random_range(-3.0..3.0), rng.random_range(-1.5..1.5), rng.random_range(-3.0..3.0)),
                    Vec3::new(rng.random_range(-0.08..0.08), rng.random_range(-0.08..0.08), rng.random_range(-0.08..0.08)),
                )
            };
            let a = PosedBody::from_mesh(shapes[k % 3].clone(), pose(&mut rng)).unwrap();
            let b = PosedBody::from_mesh(shapes[(k + 1) % 3].clone(), pose(&mut rng)).unwrap();
            let fast = in_collision(&a, &b);
            assert_eq!(fast, in_collision_brute_force(&a, &b));
            assert_eq!(fast, in_collision(&b, &a));
        }
    }

    #[test]
    fn signed_distance_of_cube() {
        let c = cube_at(Vec3::ZERO);
        assert!((point_signed_distance(&c, Vec3::ZERO).unwrap() + 0.5).abs() < 1e-12);
        assert!((point_signed_distance(&c, Vec3::new(2.0, 0.0, 0.0)).unwrap() - 1.5).abs() < 1e-12);
        let moved = cube_at(Vec3::new(1.0, 1.0, 1.0));
        assert!((point_signed_distance(&moved, Vec3::new(1.0, 1.0, 1.2)).unwrap() + 0.3).abs() < 1e-12);
    }

    #[test]
    fn signed_distance_matches_brute_force() {
        let body = PosedBody::from_mesh(
            primitives::open_box(Vec3::new(0.2, 0.15, 0.1), 0.02),
            RigidTransform::new(Mat3::from_rpy(0.2, -0.4, 1.0), Vec3::new(0.1, 0.0, 0.3)),
        )
        .unwrap();
        let mut rng = crate::rng::Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p = Vec3::new(rng.random_range(-0.1..0.3), rng.random_range(-0.2..0.2), rng.random_range(0.15..0.45));
            let d = point_signed_distance(&body, p).unwrap();
            assert!((d.abs() - point_distance_brute_force(&body, p)).abs() < 1e-9);
        }
    }

    #[test]
    fn open_mesh_has_no_sign() {
        let sq = PosedBody::from_mesh(primitives::unit_square(), RigidTransform::IDENTITY).unwrap();
        assert_eq!(point_signed_distance(&sq, Vec3::ZERO), Err(Error::NotWatertight));
    }
}
