//! Analytic point-cloud collision checkers used as comparison baselines.
//! The learned Pointnet-Grid ablation lives in [`crate::net`] as
//! [`ModelKind::PointnetGrid`](crate::net::ModelKind).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, PointCloud, RigidTransform};
use crate::math::Vec3;

/// Scene cloud, object cloud and object poses in; one collision
/// probability per pose out. Analytic checkers emit 0 or 1.
pub trait CollisionChecker {
    fn name(&self) -> String;
    fn predict(&self, scene: &PointCloud, object: &PointCloud, queries: &[RigidTransform]) -> Result<Vec<f32>>;
}

/// Upper bound on index cells; coarser cells are used beyond it.
const MAX_CELLS: usize = 1 << 22;

/// Uniform-grid bucket index over a fixed point set.
#[derive(Debug, Clone)]
pub struct PointIndex {
    origin: Vec3,
    cell: f64,
    dims: [usize; 3],
    starts: Vec<u32>,
    points: Vec<Vec3>,
}

impl PointIndex {
    pub fn new(points: &[Vec3], cell: f64) -> Result<Self> {
        if !(cell > 0.0 && cell.is_finite()) {
            return Err(Error::invalid(alloc::format!("cell size must be positive, got {cell}")));
        }
        if points.is_empty() {
            return Ok(PointIndex { origin: Vec3::ZERO, cell, dims: [0; 3], starts: vec![0], points: Vec::new() });
        }
        let b = Aabb::from_points(points);
        let e = b.extent();
        let mut cell = cell;
        let dims = loop {
            let d = [e.x, e.y, e.z].map(|v| (v / cell).floor() as usize + 1);
            if d.iter().product::<usize>() <= MAX_CELLS {
                break d;
            }
            cell *= 2.0;
        };
        let mut index = PointIndex { origin: b.min, cell, dims, starts: Vec::new(), points: Vec::new() };
        let keys: Vec<usize> = points.iter().map(|p| index.flat(index.cell_of(*p))).collect();
        let mut counts = vec![0u32; index.cells() + 1];
        for &k in &keys {
            counts[k + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut fill = counts.clone();
        let mut sorted = vec![Vec3::ZERO; points.len()];
        for (p, &k) in points.iter().zip(&keys) {
            sorted[fill[k] as usize] = *p;
            fill[k] += 1;
        }
        index.starts = counts;
        index.points = sorted;
        Ok(index)
    }

    fn cells(&self) -> usize {
        self.dims.iter().product()
    }

    fn cell_of(&self, p: Vec3) -> [usize; 3] {
        let d = p - self.origin;
        let c = [d.x, d.y, d.z].map(|v| (v / self.cell).floor().max(0.0) as usize);
        [0, 1, 2].map(|a| c[a].min(self.dims[a] - 1))
    }

    fn flat(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    /// Whether any indexed point lies within `dist` of `p` (inclusive).
    pub fn any_within(&self, p: Vec3, dist: f64) -> bool {
        if self.points.is_empty() {
            return false;
        }
        let d2 = dist * dist;
        let lo = p - Vec3::splat(dist) - self.origin;
        let hi = p + Vec3::splat(dist) - self.origin;
        let mut range = [(0usize, 0usize); 3];
        for a in 0..3 {
            let l = (lo.component(a) / self.cell).floor();
            let h = (hi.component(a) / self.cell).floor();
            if h < 0.0 || l >= self.dims[a] as f64 {
                return false;
            }
            range[a] = (l.max(0.0) as usize, (h as usize).min(self.dims[a] - 1));
        }
        for i in range[0].0..=range[0].1 {
            for j in range[1].0..=range[1].1 {
                for k in range[2].0..=range[2].1 {
                    let c = self.flat([i, j, k]);
                    let pts = &self.points[self.starts[c] as usize..self.starts[c + 1] as usize];
                    if pts.iter().any(|q| (*q - p).norm_squared() <= d2) {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Every point is a sphere of `radius`; two clouds collide when any pair of
/// points is within `2·radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereChecker {
    pub radius: f64,
}

impl Default for SphereChecker {
    fn default() -> Self {
        SphereChecker { radius: 0.01 }
    }
}

impl SphereChecker {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid(alloc::format!("sphere radius must be positive, got {radius}")));
        }
        Ok(SphereChecker { radius })
    }

    pub fn prepare(&self, scene: &PointCloud) -> Result<PointIndex> {
        PointIndex::new(scene.points(), 2.0 * self.radius)
    }

    pub fn check(&self, index: &PointIndex, object: &PointCloud, query: &RigidTransform) -> bool {
        object.points().iter().any(|p| index.any_within(query.apply(*p), 2.0 * self.radius))
    }
}

impl CollisionChecker for SphereChecker {
    fn name(&self) -> String {
        alloc::format!("sphere-{:.1}cm", self.radius * 100.0)
    }

    fn predict(&self, scene: &PointCloud, object: &PointCloud, queries: &[RigidTransform]) -> Result<Vec<f32>> {
        let index = self.prepare(scene)?;
        Ok(queries.iter().map(|q| f32::from(u8::from(self.check(&index, object, q)))).collect())
    }
}

/// Voxels of side `pitch` (anchored at the world origin) holding at least one
/// scene point are occupied; an object collides when any of its points
/// falls in an occupied voxel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupancyChecker {
    pub pitch: f64,
}

impl Default for OccupancyChecker {
    fn default() -> Self {
        OccupancyChecker { pitch: 0.02 }
    }
}

/// Sorted occupied-cell set.
#[derive(Debug, Clone, PartialEq)]
pub struct Occupancy {
    pitch: f64,
    cells: Vec<[i64; 3]>,
}

impl Occupancy {
    pub fn cell(&self, p: Vec3) -> [i64; 3] {
        [p.x, p.y, p.z].map(|v| (v / self.pitch).floor() as i64)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        self.cells.binary_search(&self.cell(p)).is_ok()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

impl OccupancyChecker {
    pub fn new(pitch: f64) -> Result<Self> {
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(Error::invalid(alloc::format!("occupancy pitch must be positive, got {pitch}")));
        }
        Ok(OccupancyChecker { pitch })
    }

    pub fn prepare(&self, scene: &PointCloud) -> Occupancy {
        let mut occ = Occupancy { pitch: self.pitch, cells: Vec::new() };
        occ.cells = scene.points().iter().map(|p| occ.cell(*p)).collect();
        occ.cells.sort_unstable();
        occ.cells.dedup();
        occ
    }

    pub fn check(&self, occ: &Occupancy, object: &PointCloud, query: &RigidTransform) -> bool {
        object.points().iter().any(|p| occ.contains(query.apply(*p)))
    }
}

impl CollisionChecker for OccupancyChecker {
    fn name(&self) -> String {
        alloc::format!("occupancy-{:.1}cm", self.pitch * 100.0)
    }

    fn predict(&self, scene: &PointCloud, object: &PointCloud, queries: &[RigidTransform]) -> Result<Vec<f32>> {
        let occ = self.prepare(scene);
        Ok(queries.iter().map(|q| f32::from(u8::from(self.check(&occ, object, q)))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Mat3;
    use rand::{Rng as _, SeedableRng};

    use crate::rng::Rng;

    fn random_cloud(n: usize, scale: f64, rng: &mut Rng) -> PointCloud {
        PointCloud::new(
            (0..n)
                .map(|_| Vec3::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale), rng.random_range(0.0..scale)))
                .collect(),
        )
        .unwrap()
    }

    fn random_pose(rng: &mut Rng) -> RigidTransform {
        RigidTransform::new(
            Mat3::from_rpy(rng.random_range(-3.0..3.0), rng.random_range(-1.5..1.5), rng.random_range(-3.0..3.0)),
            Vec3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(-0.1..0.3)),
        )
    }

    #[test]
    fn identical_clouds_collide_and_distant_ones_do_not() {
        let mut rng = Rng::seed_from_u64(1);
        let c = random_cloud(50, 0.05, &mut rng);
        for r in [1e-4, 0.01, 0.2] {
            let s = SphereChecker::new(r).unwrap();
            assert_eq!(s.predict(&c, &c, &[RigidTransform::IDENTITY]).unwrap(), vec![1.0]);
        }
        let o = OccupancyChecker::new(0.02).unwrap();
        assert_eq!(o.predict(&c, &c, &[RigidTransform::IDENTITY]).unwrap(), vec![1.0]);
        let far = RigidTransform::from_translation(Vec3::new(1.0, 0.0, 0.0));
        let s = SphereChecker::new(0.01).unwrap();
        assert_eq!(s.predict(&c, &c, &[far]).unwrap(), vec![0.0]);
        assert_eq!(o.predict(&c, &c, &[far]).unwrap(), vec![0.0]);
    }

    #[test]
    fn sphere_matches_all_pairs() {
        let mut rng = Rng::seed_from_u64(2);
        let scene = random_cloud(400, 0.3, &mut rng);
        let object = random_cloud(30, 0.05, &mut rng);
        let s = SphereChecker::new(0.01).unwrap();
        let queries: Vec<RigidTransform> = (0..1000).map(|_| random_pose(&mut rng)).collect();
        let got = s.predict(&scene, &object, &queries).unwrap();
        let mut hits = 0;
        for (q, &g) in queries.iter().zip(&got) {
            let brute = object.points().iter().any(|p| {
                let w = q.apply(*p);
                scene.points().iter().any(|s| s.distance(w) <= 0.02)
            });
            assert_eq!(g, f32::from(u8::from(brute)));
            hits += usize::from(brute);
        }
        assert!(hits > 50 && hits < 950, "{hits}");
    }

    #[test]
    fn occupancy_matches_set_membership() {
        let mut rng = Rng::seed_from_u64(3);
        let scene = random_cloud(300, 0.3, &mut rng);
        let object = random_cloud(30, 0.05, &mut rng);
        let o = OccupancyChecker::new(0.03).unwrap();
        let queries: Vec<RigidTransform> = (0..1000).map(|_| random_pose(&mut rng)).collect();
        let got = o.predict(&scene, &object, &queries).unwrap();
        let cell = |p: Vec3| [p.x, p.y, p.z].map(|v| (v / 0.03).floor() as i64);
        let occupied: Vec<[i64; 3]> = scene.points().iter().map(|p| cell(*p)).collect();
        for (q, &g) in queries.iter().zip(&got) {
            let brute = object.points().iter().any(|p| occupied.contains(&cell(q.apply(*p))));
            assert_eq!(g, f32::from(u8::from(brute)));
        }
    }

    #[test]
    fn index_handles_huge_extents() {
        let pts = vec![Vec3::ZERO, Vec3::new(1000.0, 1000.0, 1000.0)];
        let idx = PointIndex::new(&pts, 1e-3).unwrap();
        assert!(idx.any_within(Vec3::new(999.9995, 1000.0, 1000.0), 1e-3));
        assert!(!idx.any_within(Vec3::new(500.0, 500.0, 500.0), 1.0));
    }

    #[test]
    fn order_invariant() {
        let mut rng = Rng::seed_from_u64(4);
        let scene = random_cloud(200, 0.3, &mut rng);
        let mut rev = scene.points().to_vec();
        rev.reverse();
        let rev = PointCloud::new(rev).unwrap();
        let object = random_cloud(20, 0.05, &mut rng);
        let queries: Vec<RigidTransform> = (0..200).map(|_| random_pose(&mut rng)).collect();
        let s = SphereChecker::default();
        assert_eq!(s.predict(&scene, &object, &queries).unwrap(), s.predict(&rev, &object, &queries).unwrap());
        let o = OccupancyChecker::default();
        assert_eq!(o.predict(&scene, &object, &queries).unwrap(), o.predict(&rev, &object, &queries).unwrap());
    }
}
