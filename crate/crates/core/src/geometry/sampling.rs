use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::{Rng, SeedableRng};

use super::{PointCloud, TriangleMesh};
use crate::error::{Error, Result};
use crate::rng::Rng as StdRng;

/// Triangle index chosen with probability proportional to area.
pub(crate) struct AreaSampler {
    cumulative: Vec<f64>,
}

impl AreaSampler {
    pub(crate) fn new(mesh: &TriangleMesh) -> Self {
        let mut acc = 0.0;
        let cumulative = (0..mesh.len())
            .map(|i| {
                acc += mesh.triangle_area(i);
                acc
            })
            .collect();
        AreaSampler { cumulative }
    }

    pub(crate) fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cumulative.last().expect("non-empty mesh");
        let x = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

/// Uniform barycentric point on triangle `tri`.
pub(crate) fn point_on_triangle<R: Rng + ?Sized>(mesh: &TriangleMesh, tri: usize, rng: &mut R) -> crate::Vec3 {
    let [a, b, c] = mesh.triangle(tri);
    let r1 = rng.random::<f64>().sqrt();
    let r2 = rng.random::<f64>();
    a * (1.0 - r1) + b * (r1 * (1.0 - r2)) + c * (r1 * r2)
}

/// `n` points distributed uniformly by area over the mesh surface.
pub fn sample_surface(mesh: &TriangleMesh, n: usize, seed: u64) -> Result<PointCloud> {
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let sampler = AreaSampler::new(mesh);
    let points = (0..n)
        .map(|_| {
            let t = sampler.pick(&mut rng);
            point_on_triangle(mesh, t, &mut rng)
        })
        .collect();
    PointCloud::new(points)
}
