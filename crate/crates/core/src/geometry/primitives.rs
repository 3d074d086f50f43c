//! Closed, outward-wound meshes for procedural shapes and robot links.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, TAU};

#[allow(unused_imports)]
use num_traits::Float as _;

use super::{RigidTransform, TriangleMesh};
use crate::math::{Mat3, Vec3};

fn build(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> TriangleMesh {
    TriangleMesh::new(vertices, triangles).expect("primitive indices are in range")
}

/// Axis-aligned box with the given full side lengths, centered at the origin.
pub fn cuboid(size: Vec3) -> TriangleMesh {
    let h = size * 0.5;
    let vertices = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            )
        })
        .collect();
    let triangles = alloc::vec![
        [0, 2, 3],
        [0, 3, 1],
        [4, 5, 7],
        [4, 7, 6],
        [0, 1, 5],
        [0, 5, 4],
        [2, 6, 7],
        [2, 7, 3],
        [0, 4, 6],
        [0, 6, 2],
        [1, 3, 7],
        [1, 7, 5],
    ];
    build(vertices, triangles)
}

/// Box spanning `[min, max]`.
pub fn cuboid_between(min: Vec3, max: Vec3) -> TriangleMesh {
    cuboid(max - min).translated((min + max) * 0.5)
}

/// Open unit square `[0,1]² × {0}` (two triangles, +z facing).
pub fn unit_square() -> TriangleMesh {
    build(
        alloc::vec![Vec3::ZERO, Vec3::X, Vec3::new(1.0, 1.0, 0.0), Vec3::Y],
        alloc::vec![[0, 1, 2], [0, 2, 3]],
    )
}

/// Closed surface of revolution about +z. `profile` lists `(radius, z)` from
/// the bottom pole to the top pole; both poles must have radius zero.
pub fn revolution(profile: &[(f64, f64)], segments: usize) -> TriangleMesh {
    assert!(profile.len() >= 3 && segments >= 3);
    let rings = profile.len() - 2;
    let mut vertices = Vec::with_capacity(rings * segments + 2);
    vertices.push(Vec3::new(0.0, 0.0, profile[0].1));
    for &(r, z) in &profile[1..profile.len() - 1] {
        for k in 0..segments {
            let (s, c) = (TAU * k as f64 / segments as f64).sin_cos();
            vertices.push(Vec3::new(r * c, r * s, z));
        }
    }
    let top = vertices.len() as u32;
    vertices.push(Vec3::new(0.0, 0.0, profile[profile.len() - 1].1));
    let v = |ring: usize, k: usize| (1 + ring * segments + k % segments) as u32;
    let mut triangles = Vec::new();
    for k in 0..segments {
        triangles.push([0, v(0, k + 1), v(0, k)]);
    }
    for j in 0..rings - 1 {
        for k in 0..segments {
            triangles.push([v(j, k), v(j, k + 1), v(j + 1, k + 1)]);
            triangles.push([v(j, k), v(j + 1, k + 1), v(j + 1, k)]);
        }
    }
    for k in 0..segments {
        triangles.push([top, v(rings - 1, k), v(rings - 1, k + 1)]);
    }
    build(vertices, triangles)
}

/// Cylinder along z, centered at the origin.
pub fn cylinder(radius: f64, height: f64, segments: usize) -> TriangleMesh {
    let h = height * 0.5;
    revolution(&[(0.0, -h), (radius, -h), (radius, h), (0.0, h)], segments)
}

pub fn sphere(radius: f64, segments: usize) -> TriangleMesh {
    let lat = (segments / 2).max(2);
    let profile: Vec<(f64, f64)> = (0..=lat)
        .map(|i| {
            let phi = -FRAC_PI_2 + core::f64::consts::PI * i as f64 / lat as f64;
            let (s, c) = phi.sin_cos();
            (if i == 0 || i == lat { 0.0 } else { radius * c }, radius * s)
        })
        .collect();
    revolution(&profile, segments)
}

/// Capsule with its segment running from `a` to `b`.
pub fn capsule(a: Vec3, b: Vec3, radius: f64, segments: usize) -> TriangleMesh {
    let len = (b - a).norm();
    let lat = (segments / 4).max(2);
    let mut profile = Vec::new();
    for i in 0..=lat {
        let phi = -FRAC_PI_2 + FRAC_PI_2 * i as f64 / lat as f64;
        let (s, c) = phi.sin_cos();
        profile.push((if i == 0 { 0.0 } else { radius * c }, radius * s));
    }
    let first = if len > 1e-9 { 0 } else { 1 };
    for i in first..=lat {
        let phi = FRAC_PI_2 * i as f64 / lat as f64;
        let (s, c) = phi.sin_cos();
        profile.push((if i == lat { 0.0 } else { radius * c }, len + radius * s));
    }
    let axis = if len > 1e-12 { (b - a) * (1.0 / len) } else { Vec3::Z };
    let pose = RigidTransform::new(Mat3::rotation_between(Vec3::Z, axis), a);
    revolution(&profile, segments).transformed(&pose)
}

/// Prism extruded along z from a counter-clockwise polygon, centered in z.
/// `cap` triangulates the polygon with counter-clockwise index triples.
pub fn prism(polygon: &[(f64, f64)], cap: &[[u32; 3]], height: f64) -> TriangleMesh {
    let n = polygon.len() as u32;
    let h = height * 0.5;
    let mut vertices: Vec<Vec3> = polygon.iter().map(|&(x, y)| Vec3::new(x, y, -h)).collect();
    vertices.extend(polygon.iter().map(|&(x, y)| Vec3::new(x, y, h)));
    let mut triangles = Vec::new();
    for t in cap {
        triangles.push([t[0], t[2], t[1]]);
        triangles.push([t[0] + n, t[1] + n, t[2] + n]);
    }
    for i in 0..n {
        let j = (i + 1) % n;
        triangles.push([i, j, j + n]);
        triangles.push([i, j + n, i + n]);
    }
    build(vertices, triangles)
}

/// L-shaped block: legs of length `a` (x) and `b` (y), thickness `t`, extruded
/// by `height`. Corner at the origin before any recentering.
pub fn l_block(a: f64, b: f64, t: f64, height: f64) -> TriangleMesh {
    let polygon = [(0.0, 0.0), (a, 0.0), (a, t), (t, t), (t, b), (0.0, b)];
    // fan from the reflex corner (t, t)
    let cap = [[3, 4, 5], [3, 5, 0], [3, 0, 1], [3, 1, 2]];
    prism(&polygon, &cap, height)
}

/// Box open at +z with walls of thickness `wall`, centered at the origin.
pub fn open_box(size: Vec3, wall: f64) -> TriangleMesh {
    let (hx, hy, hz) = (size.x * 0.5, size.y * 0.5, size.z * 0.5);
    let (ix, iy) = (hx - wall, hy - wall);
    let ring = |x: f64, y: f64, z: f64| {
        [Vec3::new(-x, -y, z), Vec3::new(x, -y, z), Vec3::new(x, y, z), Vec3::new(-x, y, z)]
    };
    let mut vertices = Vec::new();
    vertices.extend(ring(hx, hy, -hz)); // 0..4 outer bottom
    vertices.extend(ring(hx, hy, hz)); // 4..8 outer top
    vertices.extend(ring(ix, iy, hz)); // 8..12 inner top
    vertices.extend(ring(ix, iy, -hz + wall)); // 12..16 inner bottom
    let (ob, ot, it, ib) = (0u32, 4u32, 8u32, 12u32);
    let mut triangles = alloc::vec![[ob, ob + 2, ob + 1], [ob, ob + 3, ob + 2]];
    for i in 0..4u32 {
        let j = (i + 1) % 4;
        triangles.push([ob + i, ob + j, ot + j]);
        triangles.push([ob + i, ot + j, ot + i]);
        triangles.push([ot + i, ot + j, it + j]);
        triangles.push([ot + i, it + j, it + i]);
        triangles.push([ib + i, it + j, ib + j]);
        triangles.push([ib + i, it + i, it + j]);
    }
    triangles.push([ib, ib + 1, ib + 2]);
    triangles.push([ib, ib + 2, ib + 3]);
    build(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_closed(m: &TriangleMesh, expected_volume: f64, tol: f64) {
        assert!(m.is_watertight());
        assert!((m.volume() - expected_volume).abs() < tol, "volume {} vs {}", m.volume(), expected_volume);
    }

    #[test]
    fn primitives_are_closed_and_outward() {
        check_closed(&cuboid(Vec3::new(0.1, 0.2, 0.3)), 0.006, 1e-12);
        let cyl = cylinder(0.05, 0.2, 32);
        let poly_area = 0.5 * 32.0 * 0.05f64.powi(2) * (TAU / 32.0).sin();
        check_closed(&cyl, poly_area * 0.2, 1e-12);
        check_closed(&l_block(0.1, 0.08, 0.03, 0.05), (0.1 * 0.03 + 0.03 * 0.05) * 0.05, 1e-12);
        check_closed(&open_box(Vec3::new(0.1, 0.1, 0.1), 0.01), 0.001 - 0.08 * 0.08 * 0.09, 1e-12);
        let s = sphere(0.1, 32);
        assert!(s.is_watertight());
        assert!(s.volume() > 0.0 && s.volume() < 4.0 / 3.0 * core::f64::consts::PI * 1e-3);
        let c = capsule(Vec3::ZERO, Vec3::new(0.3, 0.0, 0.0), 0.05, 16);
        assert!(c.is_watertight());
        assert!(c.volume() > 0.0);
        let bb = c.aabb();
        assert!((bb.max.x - 0.35).abs() < 1e-9 && (bb.min.x + 0.05).abs() < 1e-9);
    }
}
