use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::RigidTransform;
use crate::error::{Error, Result};
use crate::math::Vec3;

/// Triangles with area below this (m²) are dropped at construction.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Aabb {
        points.into_iter().fold(Aabb::EMPTY, |b, p| b.grow(*p))
    }

    pub fn grow(self, p: Vec3) -> Aabb {
        Aabb { min: self.min.min(p), max: self.max.max(p) }
    }

    pub fn union(self, o: Aabb) -> Aabb {
        Aabb { min: self.min.min(o.min), max: self.max.max(o.max) }
    }

    pub fn inflate(self, margin: f64) -> Aabb {
        Aabb { min: self.min - Vec3::splat(margin), max: self.max + Vec3::splat(margin) }
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y || self.min.z > self.max.z
    }

    /// Closed-interval overlap with slack `eps` toward overlapping.
    pub fn overlaps(&self, o: &Aabb, eps: f64) -> bool {
        self.min.x <= o.max.x + eps
            && o.min.x <= self.max.x + eps
            && self.min.y <= o.max.y + eps
            && o.min.y <= self.max.y + eps
            && self.min.z <= o.max.z + eps
            && o.min.z <= self.max.z + eps
    }

    pub fn contains(&self, o: &Aabb) -> bool {
        self.min.x <= o.min.x
            && self.min.y <= o.min.y
            && self.min.z <= o.min.z
            && self.max.x >= o.max.x
            && self.max.y >= o.max.y
            && self.max.z >= o.max.z
    }

    pub fn contains_point(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.x <= self.max.x
            && p.y >= self.min.y
            && p.y <= self.max.y
            && p.z >= self.min.z
            && p.z <= self.max.z
    }

    /// Box enclosing this box after a rigid transform.
    pub fn transformed(&self, t: &RigidTransform) -> Aabb {
        let c = t.apply(self.center());
        let h = self.extent() * 0.5;
        let r = &t.rotation.rows;
        let e = Vec3::new(
            r[0][0].abs() * h.x + r[0][1].abs() * h.y + r[0][2].abs() * h.z,
            r[1][0].abs() * h.x + r[1][1].abs() * h.y + r[1][2].abs() * h.z,
            r[2][0].abs() * h.x + r[2][1].abs() * h.y + r[2][2].abs() * h.z,
        );
        Aabb { min: c - e, max: c + e }
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn distance_squared(&self, p: Vec3) -> f64 {
        let d = (self.min - p).max(p - self.max).max(Vec3::ZERO);
        d.norm_squared()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Validates indices and drops degenerate triangles.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if let Some(v) = vertices.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite vertex {v:?}")));
        }
        let n = vertices.len() as u32;
        let mut kept = Vec::with_capacity(triangles.len());
        for t in triangles {
            if t.iter().any(|&i| i >= n) {
                return Err(Error::invalid(format!("triangle {t:?} indexes past {n} vertices")));
            }
            let [a, b, c] = t.map(|i| vertices[i as usize]);
            if 0.5 * (b - a).cross(c - a).norm() >= DEGENERATE_AREA {
                kept.push(t);
            }
        }
        Ok(TriangleMesh { vertices, triangles: kept })
    }

    pub fn empty() -> Self {
        TriangleMesh { vertices: Vec::new(), triangles: Vec::new() }
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn len(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        self.triangles[i].map(|v| self.vertices[v as usize])
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        0.5 * (b - a).cross(c - a).norm()
    }

    /// Outward unit normal of triangle `i` (counter-clockwise winding).
    pub fn triangle_normal(&self, i: usize) -> Vec3 {
        let [a, b, c] = self.triangle(i);
        (b - a).cross(c - a).normalized()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.len()).map(|i| self.triangle_area(i)).sum()
    }

    pub fn aabb(&self) -> Aabb {
        let used = self.triangles.iter().flat_map(|t| t.iter().map(|&i| &self.vertices[i as usize]));
        Aabb::from_points(used)
    }

    /// Enclosed volume (positive for outward winding).
    pub fn volume(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let [a, b, c] = self.triangle(i);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    /// Center of mass of the enclosed solid at uniform density.
    pub fn volume_centroid(&self) -> Vec3 {
        let mut acc = Vec3::ZERO;
        let mut vol = 0.0;
        for i in 0..self.len() {
            let [a, b, c] = self.triangle(i);
            let v = a.dot(b.cross(c)) / 6.0;
            vol += v;
            acc += (a + b + c) * (v / 4.0);
        }
        if vol.abs() < 1e-18 {
            return self.aabb().center();
        }
        acc * (1.0 / vol)
    }

    /// Every undirected edge is shared by exactly two triangles that traverse
    /// it in opposite directions.
    pub fn is_watertight(&self) -> bool {
        if self.triangles.is_empty() {
            return false;
        }
        // (forward uses, backward uses) per undirected edge
        let mut edges: BTreeMap<(u32, u32), (u32, u32)> = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
                if a < b {
                    e.0 += 1;
                } else {
                    e.1 += 1;
                }
            }
        }
        edges.values().all(|&uses| uses == (1, 1))
    }

    pub fn transformed(&self, t: &RigidTransform) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|v| t.apply(*v)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    pub fn translated(&self, d: Vec3) -> TriangleMesh {
        self.transformed(&RigidTransform::from_translation(d))
    }

    /// Disjoint union of two meshes.
    pub fn merged(&self, other: &TriangleMesh) -> TriangleMesh {
        let offset = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut triangles = self.triangles.clone();
        triangles.extend(other.triangles.iter().map(|t| t.map(|i| i + offset)));
        TriangleMesh { vertices, triangles }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;

    #[test]
    fn degenerate_triangles_dropped() {
        let v = alloc::vec![
            Vec3::ZERO,
            Vec3::X,
            Vec3::Y,
            Vec3::new(2.0, 0.0, 0.0),
        ];
        let m = TriangleMesh::new(v, alloc::vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn out_of_range_index_rejected() {
        assert!(TriangleMesh::new(alloc::vec![Vec3::ZERO], alloc::vec![[0, 1, 2]]).is_err());
    }

    #[test]
    fn cube_properties() {
        let c = primitives::cuboid(Vec3::new(1.0, 2.0, 3.0));
        assert!(c.is_watertight());
        assert!((c.volume() - 6.0).abs() < 1e-12);
        assert!(c.volume_centroid().norm() < 1e-12);
        assert!((c.surface_area() - 22.0).abs() < 1e-12);
    }

    #[test]
    fn open_surface_not_watertight() {
        let sq = primitives::unit_square();
        assert!(!sq.is_watertight());
    }

    #[test]
    fn transformed_box_contains_rotated_points() {
        let c = primitives::cuboid(Vec3::new(0.2, 0.4, 0.1));
        let t = RigidTransform::new(crate::Mat3::from_rpy(0.3, 0.7, -1.2), Vec3::new(1.0, 2.0, 3.0));
        let b = c.aabb().transformed(&t);
        for v in c.vertices() {
            assert!(b.inflate(1e-12).contains_point(t.apply(*v)));
        }
    }
}
