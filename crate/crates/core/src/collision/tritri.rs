#[allow(unused_imports)]
use num_traits::Float as _;

use crate::math::Vec3;

/// Projection gap (m) below which triangles count as touching.
pub const CONTACT_EPS: f64 = 1e-10;

fn separated_on(axis: Vec3, a: &[Vec3; 3], b: &[Vec3; 3]) -> bool {
    let len2 = axis.norm_squared();
    if len2 < 1e-30 {
        return false;
    }
    let slack = CONTACT_EPS * len2.sqrt();
    let pa = [axis.dot(a[0]), axis.dot(a[1]), axis.dot(a[2])];
    let pb = [axis.dot(b[0]), axis.dot(b[1]), axis.dot(b[2])];
    let (amin, amax) = (pa[0].min(pa[1]).min(pa[2]), pa[0].max(pa[1]).max(pa[2]));
    let (bmin, bmax) = (pb[0].min(pb[1]).min(pb[2]), pb[0].max(pb[1]).max(pb[2]));
    amax < bmin - slack || bmax < amin - slack
}

/// Separating-axis test on the two face normals, the nine edge-edge cross
/// products and the six in-plane edge normals. Touching counts as
/// intersecting.
pub fn triangles_intersect(a: &[Vec3; 3], b: &[Vec3; 3]) -> bool {
    let ea = [a[1] - a[0], a[2] - a[1], a[0] - a[2]];
    let eb = [b[1] - b[0], b[2] - b[1], b[0] - b[2]];
    let na = ea[0].cross(a[2] - a[0]);
    let nb = eb[0].cross(b[2] - b[0]);
    if separated_on(na, a, b) || separated_on(nb, a, b) {
        return false;
    }
    for e in &ea {
        for f in &eb {
            if separated_on(e.cross(*f), a, b) {
                return false;
            }
        }
    }
    for e in &ea {
        if separated_on(na.cross(*e), a, b) {
            return false;
        }
    }
    for f in &eb {
        if separated_on(nb.cross(*f), a, b) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> [Vec3; 3] {
        [Vec3::from_array(a), Vec3::from_array(b), Vec3::from_array(c)]
    }

    #[test]
    fn crossing_triangles() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.2, 0.2, -0.5], [0.2, 0.2, 0.5], [0.3, -0.5, 0.0]);
        assert!(triangles_intersect(&a, &b));
        assert!(triangles_intersect(&b, &a));
    }

    #[test]
    fn parallel_offset_triangles() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.0, 0.0, 1e-3], [1.0, 0.0, 1e-3], [0.0, 1.0, 1e-3]);
        assert!(!triangles_intersect(&a, &b));
    }

    #[test]
    fn coplanar_cases() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let overlapping = tri([0.2, 0.2, 0.0], [2.0, 0.2, 0.0], [0.2, 2.0, 0.0]);
        let apart = tri([1.0, 1.0, 0.0], [2.0, 1.0, 0.0], [1.0, 2.0, 0.0]);
        assert!(triangles_intersect(&a, &overlapping));
        assert!(!triangles_intersect(&a, &apart));
    }

    #[test]
    fn shared_vertex_touches() {
        let a = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let b = tri([0.0, 0.0, 0.0], [-1.0, 0.0, 0.3], [0.0, -1.0, 0.7]);
        assert!(triangles_intersect(&a, &b));
    }
}
