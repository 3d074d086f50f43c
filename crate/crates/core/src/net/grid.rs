use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, RigidTransform};
use crate::math::Vec3;

/// Axis-aligned voxel lattice. Voxel `(i, j, k)` spans
/// `origin + pitch·[i, i+1) × [j, j+1) × [k, k+1)`; its flat index is
/// `(i·ny + j)·nz + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: [f64; 3],
    pub pitch: f64,
    pub dims: [usize; 3],
}

impl Default for GridSpec {
    /// 1.4 × 1.4 × 0.6 m around a 1 m table whose top is at z = 0.
    fn default() -> Self {
        GridSpec { origin: [-0.7, -0.7, -0.2], pitch: 0.1, dims: [14, 14, 6] }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.pitch > 0.0 && self.pitch.is_finite()) {
            return Err(Error::invalid(alloc::format!("grid pitch must be positive, got {}", self.pitch)));
        }
        if self.dims.iter().any(|&d| d == 0) || !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(alloc::format!("bad grid {:?} at {:?}", self.dims, self.origin)));
        }
        Ok(())
    }

    pub fn voxels(&self) -> usize {
        self.dims.iter().product()
    }

    /// Cell containing `p`, if inside the grid.
    pub fn cell(&self, p: Vec3) -> Option<[usize; 3]> {
        let mut out = [0; 3];
        for (a, o) in out.iter_mut().enumerate() {
            let f = ((p.component(a) - self.origin[a]) / self.pitch).floor();
            if !(f >= 0.0 && f < self.dims[a] as f64) {
                return None;
            }
            *o = f as usize;
        }
        Some(out)
    }

    pub fn flat(&self, c: [usize; 3]) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    pub fn center(&self, c: [usize; 3]) -> Vec3 {
        Vec3::new(
            self.origin[0] + (c[0] as f64 + 0.5) * self.pitch,
            self.origin[1] + (c[1] as f64 + 0.5) * self.pitch,
            self.origin[2] + (c[2] as f64 + 0.5) * self.pitch,
        )
    }

    /// The same lattice moved by half a pitch towards `-∞` on the axes whose
    /// bit is set in `mask`, with one more cell on those axes so that it
    /// still covers this grid.
    pub fn shifted(&self, mask: u8) -> GridSpec {
        let mut g = *self;
        for a in 0..3 {
            if mask & (1 << a) != 0 {
                g.origin[a] -= 0.5 * self.pitch;
                g.dims[a] += 1;
            }
        }
        g
    }
}

/// Points of a cloud bucketed into a grid: per kept point, the offset from
/// its voxel center in pitch units and its flat voxel index.
#[derive(Debug, Clone, PartialEq)]
pub struct Voxelized {
    pub local: Vec<[f64; 3]>,
    pub voxel: Vec<u32>,
}

/// Buckets `cloud` into `grid`, dropping points outside it. Fails when no
/// point survives.
pub fn voxelize(cloud: &PointCloud, grid: &GridSpec) -> Result<Voxelized> {
    let mut out = Voxelized { local: Vec::new(), voxel: Vec::new() };
    for &p in cloud.points() {
        if let Some(c) = grid.cell(p) {
            let d = (p - grid.center(c)) * (1.0 / grid.pitch);
            out.local.push([d.x, d.y, d.z]);
            out.voxel.push(grid.flat(c) as u32);
        }
    }
    if out.voxel.is_empty() {
        return Err(Error::invalid(alloc::format!(
            "none of the {} scene points lie inside the workspace grid",
            cloud.len()
        )));
    }
    Ok(out)
}

/// Classifier input for one query in one grid: the voxel the translation
/// falls in and 12 floats (row-major rotation, then the translation relative
/// to that voxel's center in pitch units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryCode {
    pub voxel: u32,
    pub features: [f64; 12],
}

pub fn encode_query(grid: &GridSpec, q: &RigidTransform) -> Option<QueryCode> {
    let c = grid.cell(q.translation)?;
    let d = (q.translation - grid.center(c)) * (1.0 / grid.pitch);
    let r = q.rotation.rows;
    Some(QueryCode {
        voxel: grid.flat(c) as u32,
        features: [
            r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2], d.x, d.y, d.z,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn voxel_center_arithmetic() {
        let g = GridSpec { origin: [0.0; 3], pitch: 0.1, dims: [4, 4, 4] };
        let cloud = PointCloud::new(alloc::vec![Vec3::new(0.05, 0.05, 0.05), Vec3::new(5.0, 0.0, 0.0)]).unwrap();
        let v = voxelize(&cloud, &g).unwrap();
        assert_eq!(v.voxel, alloc::vec![0]);
        assert!(v.local[0].iter().all(|c| c.abs() < 1e-12));
        let far = PointCloud::new(alloc::vec![Vec3::new(5.0, 0.0, 0.0)]).unwrap();
        assert!(voxelize(&far, &g).is_err());
    }

    #[test]
    fn shifted_grids_cover_base() {
        let g = GridSpec::default();
        for m in 0..8 {
            let s = g.shifted(m);
            for c in [[0, 0, 0], [13, 13, 5], [3, 7, 2]] {
                for corner in [0.01, 0.99] {
                    let p = g.center(c) + Vec3::splat((corner - 0.5) * g.pitch);
                    assert!(s.cell(p).is_some());
                }
            }
        }
    }

    proptest! {
        #[test]
        fn query_offsets_within_half_pitch(x in -0.7f64..0.7, y in -0.7f64..0.7, z in -0.2f64..0.4) {
            let g = GridSpec::default();
            let q = RigidTransform::from_translation(Vec3::new(x, y, z));
            if let Some(code) = encode_query(&g, &q) {
                prop_assert!(code.features[9..].iter().all(|d| d.abs() <= 0.5 + 1e-6));
                prop_assert!((code.voxel as usize) < g.voxels());
            }
        }
    }
}
