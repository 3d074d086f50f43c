//! Resting orientations from convex-hull support faces.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::geometry::{RigidTransform, TriangleMesh};
use crate::math::{Mat3, Vec3};

/// Hull faces whose normals differ by less than this are one resting family.
pub const FAMILY_ANGLE_DEG: f64 = 25.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HullFace {
    /// Outward unit normal.
    pub normal: Vec3,
    /// Signed plane offset: `normal · x = offset` on the face.
    pub offset: f64,
    /// Indices (into the deduplicated vertex list) lying on the plane.
    pub support: Vec<usize>,
}

fn dedup_vertices(mesh: &TriangleMesh) -> Vec<Vec3> {
    let mut out: Vec<Vec3> = Vec::new();
    for v in mesh.vertices() {
        if !out.iter().any(|u| (*u - *v).norm_squared() < 1e-24) {
            out.push(*v);
        }
    }
    out
}

/// Support planes of the convex hull of the mesh vertices, found by testing
/// every vertex triple. Coplanar triples collapse to one face.
pub fn hull_faces(mesh: &TriangleMesh) -> (Vec<Vec3>, Vec<HullFace>) {
    let pts = dedup_vertices(mesh);
    let scale = mesh.aabb().extent().norm().max(1e-9);
    let eps = 1e-9 * scale;
    let mut faces: Vec<HullFace> = Vec::new();
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let raw = (pts[j] - pts[i]).cross(pts[k] - pts[i]);
                if raw.norm() < 1e-12 * scale * scale {
                    continue;
                }
                let mut normal = raw.normalized();
                let mut offset = normal.dot(pts[i]);
                let mut above = false;
                let mut below = false;
                for p in &pts {
                    let d = normal.dot(*p) - offset;
                    above |= d > eps;
                    below |= d < -eps;
                    if above && below {
                        break;
                    }
                }
                if above && below {
                    continue;
                }
                if above {
                    normal = -normal;
                    offset = -offset;
                }
                if faces
                    .iter()
                    .any(|f| (f.normal - normal).norm() < 1e-9 && (f.offset - offset).abs() < eps)
                {
                    continue;
                }
                let support = (0..n).filter(|&m| (normal.dot(pts[m]) - offset).abs() <= eps).collect();
                faces.push(HullFace { normal, offset, support });
            }
        }
    }
    (pts, faces)
}

/// Strict containment of `p` in the convex hull of `poly` (all in the plane
/// with normal `n`), with margin `eps`.
fn inside_planar_hull(points: &[Vec3], n: Vec3, p: Vec3, eps: f64) -> bool {
    let u = n.any_orthogonal();
    let v = n.cross(u);
    let flat: Vec<(f64, f64)> = points.iter().map(|q| ((*q - p).dot(u), (*q - p).dot(v))).collect();
    let hull = convex_hull_2d(&flat);
    if hull.len() < 3 {
        return false;
    }
    // origin must lie strictly left of every counter-clockwise edge
    (0..hull.len()).all(|i| {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let cross = (b.0 - a.0) * (0.0 - a.1) - (b.1 - a.1) * (0.0 - a.0);
        cross > eps * len
    })
}

/// Counter-clockwise hull by monotone chain.
fn convex_hull_2d(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut p: Vec<(f64, f64)> = pts.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Rotation taking the outward normal `n` to -z.
fn rest_rotation(n: Vec3) -> Mat3 {
    Mat3::rotation_between(n, -Vec3::Z)
}

/// Resting poses of `mesh` on the plane z = 0, one per family of adjacent
/// stable hull faces. Each pose rotates the face flat and lifts the mesh so
/// its lowest vertex sits at z = 0; the center of mass stays on the z axis.
pub fn stable_poses(mesh: &TriangleMesh) -> Vec<RigidTransform> {
    let c = mesh.volume_centroid();
    let (pts, faces) = hull_faces(mesh);
    let scale = mesh.aabb().extent().norm().max(1e-9);
    let stable: Vec<&HullFace> = faces
        .iter()
        .filter(|f| {
            let foot = c - f.normal * (f.normal.dot(c) - f.offset);
            let support: Vec<Vec3> = f.support.iter().map(|&i| pts[i]).collect();
            inside_planar_hull(&support, f.normal, foot, 1e-6 * scale)
        })
        .collect();

    // union-find over faces closer than the family angle
    let mut parent: Vec<usize> = (0..stable.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let cos_limit = FAMILY_ANGLE_DEG.to_radians().cos();
    for i in 0..stable.len() {
        for j in i + 1..stable.len() {
            if stable[i].normal.dot(stable[j].normal) > cos_limit {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let height = |f: &HullFace| f.offset - f.normal.dot(c);
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..stable.len() {
        let root = find(&mut parent, i);
        match reps.iter().position(|&r| find(&mut parent, r) == root) {
            None => reps.push(i),
            Some(slot) => {
                if height(stable[i]) < height(stable[reps[slot]]) - 1e-12 {
                    reps[slot] = i;
                }
            }
        }
    }
    reps.iter()
        .map(|&i| {
            let r = rest_rotation(stable[i].normal);
            let rc = r.mul_vec(c);
            let min_z = mesh.vertices().iter().map(|v| r.mul_vec(*v).z).fold(f64::INFINITY, f64::min);
            RigidTransform::new(r, Vec3::new(-rc.x, -rc.y, -min_z))
        })
        .collect()
}
