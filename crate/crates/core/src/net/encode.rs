use alloc::vec;
use alloc::vec::Vec;

use super::grid::voxelize;
use super::object::{group_object, ObjectGroups};
use super::{CollisionModel, Dense, GridSpec};
use crate::autodiff::{Conv3dShape, Graph, Scalar, Tensor, Var};
use crate::error::Result;
use crate::geometry::PointCloud;

/// Voxel features of one scene, rows stacked grid after grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneEncoding<T> {
    pub(crate) features: Tensor<T>,
    pub(crate) grids: Vec<GridSpec>,
    /// First feature row of each grid.
    pub(crate) offsets: Vec<usize>,
}

impl<T: Scalar> SceneEncoding<T> {
    pub fn features(&self) -> &Tensor<T> {
        &self.features
    }

    pub fn grids(&self) -> &[GridSpec] {
        &self.grids
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectEncoding<T> {
    pub(crate) features: Vec<T>,
}

impl<T: Scalar> ObjectEncoding<T> {
    pub fn features(&self) -> &[T] {
        &self.features
    }
}

fn rows<T: Scalar>(v: &[[f64; 3]]) -> Result<Tensor<T>> {
    Tensor::new(vec![v.len(), 3], v.iter().flatten().map(|&x| T::of(x)).collect())
}

impl<T: Scalar> CollisionModel<T> {
    /// Dense layers, each followed by a rectifier.
    pub(crate) fn mlp(&self, g: &mut Graph<T>, vars: &[Var], mut x: Var, layers: &[Dense]) -> Result<Var> {
        for d in layers {
            let y = g.linear(x, vars[d.w], Some(vars[d.b]))?;
            x = g.relu(y);
        }
        Ok(x)
    }

    pub(crate) fn scene_graph(&self, g: &mut Graph<T>, vars: &[Var], cloud: &PointCloud) -> Result<(Var, Vec<GridSpec>, Vec<usize>)> {
        let grids = self.config.grids();
        let mut local = Vec::new();
        let mut segment = Vec::new();
        let mut offsets = Vec::with_capacity(grids.len());
        let mut total = 0;
        for grid in &grids {
            let v = voxelize(cloud, grid)?;
            local.extend_from_slice(&v.local);
            segment.extend(v.voxel.iter().map(|&i| i + total as u32));
            offsets.push(total);
            total += grid.voxels();
        }
        let x = g.input(rows(&local)?);
        let h = self.mlp(g, vars, x, &self.layout.point)?;
        let mut v = g.segment_max(h, &segment, total)?;
        if self.config.uses_conv() {
            let shape = Conv3dShape {
                dims: self.config.grid.dims,
                kernel: self.config.conv_kernel,
                padding: self.config.conv_kernel / 2,
            };
            for d in &self.layout.conv {
                let y = g.conv3d(v, vars[d.w], vars[d.b], shape)?;
                v = g.relu(y);
            }
        }
        Ok((v, grids, offsets))
    }

    pub(crate) fn object_graph(&self, g: &mut Graph<T>, vars: &[Var], groups: &ObjectGroups) -> Result<Var> {
        let x1 = g.input(rows(&groups.sa1_local)?);
        let h1 = self.mlp(g, vars, x1, &self.layout.sa1)?;
        let f1 = g.segment_max(h1, &groups.sa1_segment, groups.sa1_count)?;
        let l2 = g.input(rows(&groups.sa2_local)?);
        let s2 = g.gather_rows(f1, &groups.sa2_source)?;
        let x2 = g.concat(&[l2, s2])?;
        let h2 = self.mlp(g, vars, x2, &self.layout.sa2)?;
        let f2 = g.segment_max(h2, &groups.sa2_segment, groups.sa2_count)?;
        let c = g.input(rows(&groups.sa2_centers)?);
        let x3 = g.concat(&[c, f2])?;
        let h3 = self.mlp(g, vars, x3, &self.layout.global)?;
        g.segment_max(h3, &vec![0; groups.sa2_count], 1)
    }

    pub fn group_object(&self, cloud: &PointCloud) -> Result<ObjectGroups> {
        group_object(cloud.points(), &self.config.object)
    }

    /// Voxel features of a scene cloud; points outside the workspace grid
    /// are ignored.
    pub fn encode_scene(&self, cloud: &PointCloud) -> Result<SceneEncoding<T>> {
        let mut g = Graph::new();
        let vars = self.params.bind_frozen(&mut g);
        let (v, grids, offsets) = self.scene_graph(&mut g, &vars, cloud)?;
        Ok(SceneEncoding { features: g.value(v).clone(), grids, offsets })
    }

    /// Fixed-width descriptor of an object cloud given in its own frame.
    pub fn encode_object(&self, cloud: &PointCloud) -> Result<ObjectEncoding<T>> {
        let groups = self.group_object(cloud)?;
        let mut g = Graph::new();
        let vars = self.params.bind_frozen(&mut g);
        let o = self.object_graph(&mut g, &vars, &groups)?;
        Ok(ObjectEncoding { features: g.value(o).data().to_vec() })
    }
}
