use alloc::vec;
use alloc::vec::Vec;

use super::grid::encode_query;
use super::{CollisionModel, GridSpec, ModelKind, ObjectEncoding, SceneEncoding, QUERY_WIDTH};
use crate::autodiff::kernels::{axpy, gemm_acc};
use crate::autodiff::{sigmoid, Graph, Scalar, Tensor, Var};
use crate::error::{Error, Result};
use crate::geometry::RigidTransform;

/// Rows processed together by the batched classifier.
const CHUNK: usize = 256;

/// Collision probabilities in query order. Queries whose translation falls
/// outside the workspace grid are flagged and reported as colliding.
#[derive(Debug, Clone, PartialEq)]
pub struct Classified<T> {
    pub probs: Vec<T>,
    pub outside: Vec<bool>,
}

/// One classifier row: scene feature row, object, and query features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct HeadRow<T> {
    pub voxel: u32,
    pub object: u32,
    pub features: [T; QUERY_WIDTH],
}

impl<T: Scalar> CollisionModel<T> {
    /// Classifier rows for `queries` (one per grid for each inside query)
    /// and the inside/outside flags.
    pub(crate) fn head_rows(
        &self,
        grids: &[GridSpec],
        offsets: &[usize],
        queries: impl IntoIterator<Item = (u32, RigidTransform)>,
    ) -> (Vec<HeadRow<T>>, Vec<bool>) {
        let mut rows = Vec::new();
        let mut outside = Vec::new();
        for (object, q) in queries {
            // every shifted grid covers the base grid
            let inside = self.config.grid.cell(q.translation).is_some();
            outside.push(!inside);
            if !inside {
                continue;
            }
            for (grid, &offset) in grids.iter().zip(offsets) {
                let code = encode_query(grid, &q).expect("shifted grids cover the workspace");
                rows.push(HeadRow {
                    voxel: offset as u32 + code.voxel,
                    object,
                    features: code.features.map(T::of),
                });
            }
        }
        (rows, outside)
    }

    /// Logits of classifier rows without building a graph. The first layer
    /// is split by input block: object and voxel contributions are
    /// projected once per object, and once per voxel for large batches.
    pub(crate) fn head_logits(&self, voxels: &Tensor<T>, objects: &[&[T]], rows: &[HeadRow<T>]) -> Vec<T> {
        let (f, o) = (self.config.voxel_width(), self.config.object_width());
        let head = &self.layout.head;
        let w1 = self.params.tensor(head[0].w).data();
        let b1 = self.params.tensor(head[0].b).data();
        let n1 = b1.len();
        let (wv, rest) = w1.split_at(f * n1);
        let (wo, wx) = rest.split_at(o * n1);

        let object_part: Vec<Vec<T>> = objects
            .iter()
            .map(|obj| {
                let mut acc = b1.to_vec();
                gemm_acc(obj, wo, &mut acc, 1, o, n1);
                acc
            })
            .collect();
        let table = (rows.len() > voxels.rows()).then(|| {
            let mut t = vec![T::zero(); voxels.rows() * n1];
            gemm_acc(voxels.data(), wv, &mut t, voxels.rows(), f, n1);
            t
        });

        let mut logits = Vec::with_capacity(rows.len());
        let mut x = Vec::with_capacity(CHUNK * QUERY_WIDTH);
        let mut gathered = Vec::new();
        let mut vpart = Vec::new();
        for chunk in rows.chunks(CHUNK) {
            let m = chunk.len();
            x.clear();
            x.extend(chunk.iter().flat_map(|r| r.features));
            let mut h = vec![T::zero(); m * n1];
            gemm_acc(&x, wx, &mut h, m, QUERY_WIDTH, n1);
            for (hr, r) in h.chunks_exact_mut(n1).zip(chunk) {
                axpy(T::one(), &object_part[r.object as usize], hr);
            }
            match &table {
                Some(t) => {
                    for (hr, r) in h.chunks_exact_mut(n1).zip(chunk) {
                        let v = r.voxel as usize;
                        axpy(T::one(), &t[v * n1..(v + 1) * n1], hr);
                    }
                }
                None => {
                    gathered.clear();
                    gathered.extend(chunk.iter().flat_map(|r| voxels.row(r.voxel as usize).iter().copied()));
                    vpart.clear();
                    vpart.resize(m * n1, T::zero());
                    gemm_acc(&gathered, wv, &mut vpart, m, f, n1);
                    axpy(T::one(), &vpart, &mut h);
                }
            }
            let mut width = n1;
            for d in head.iter().skip(1) {
                relu(&mut h);
                let b = self.params.tensor(d.b).data();
                let nw = b.len();
                let mut next = vec![T::zero(); m * nw];
                for r in next.chunks_exact_mut(nw) {
                    r.copy_from_slice(b);
                }
                gemm_acc(&h, self.params.tensor(d.w).data(), &mut next, m, width, nw);
                h = next;
                width = nw;
            }
            logits.extend_from_slice(&h);
        }
        logits
    }

    pub(crate) fn finish(&self, logits: &[T], outside: Vec<bool>) -> Classified<T> {
        let per = match self.config.kind {
            ModelKind::SceneCollisionNet => 1,
            ModelKind::PointnetGrid => 8,
        };
        let mut probs = Vec::with_capacity(outside.len());
        let mut it = logits.chunks_exact(per);
        for &out in &outside {
            if out {
                probs.push(T::one());
            } else {
                let group = it.next().expect("one logit group per inside query");
                let s: T = group.iter().map(|&z| sigmoid(z)).sum();
                probs.push(s / T::of(per as f64));
            }
        }
        Classified { probs, outside }
    }

    /// Collision probability of `object` at each query pose (object frame
    /// to world).
    pub fn classify(&self, scene: &SceneEncoding<T>, object: &ObjectEncoding<T>, queries: &[RigidTransform]) -> Classified<T> {
        let (rows, outside) = self.head_rows(&scene.grids, &scene.offsets, queries.iter().map(|q| (0, *q)));
        let logits = self.head_logits(&scene.features, &[&object.features], &rows);
        self.finish(&logits, outside)
    }

    /// Like [`classify`](Self::classify) for queries over several objects,
    /// given as `(object index, pose)`.
    pub fn classify_multi(
        &self,
        scene: &SceneEncoding<T>,
        objects: &[&ObjectEncoding<T>],
        queries: &[(usize, RigidTransform)],
    ) -> Result<Classified<T>> {
        if let Some((i, _)) = queries.iter().find(|(i, _)| *i >= objects.len()) {
            return Err(Error::invalid(alloc::format!("object index {i} out of range {}", objects.len())));
        }
        let (rows, outside) = self.head_rows(&scene.grids, &scene.offsets, queries.iter().map(|(i, q)| (*i as u32, *q)));
        let feats: Vec<&[T]> = objects.iter().map(|o| o.features.as_slice()).collect();
        let logits = self.head_logits(&scene.features, &feats, &rows);
        Ok(self.finish(&logits, outside))
    }

    /// Classifier logits as graph nodes (`[rows, 1]`) for a single object.
    pub(crate) fn head_graph(&self, g: &mut Graph<T>, vars: &[Var], scene: Var, object: Var, rows: &[HeadRow<T>]) -> Result<Var> {
        let voxel_idx: Vec<u32> = rows.iter().map(|r| r.voxel).collect();
        let v = g.gather_rows(scene, &voxel_idx)?;
        let o = g.gather_rows(object, &vec![0; rows.len()])?;
        let x = g.input(Tensor::new(vec![rows.len(), QUERY_WIDTH], rows.iter().flat_map(|r| r.features).collect())?);
        let mut h = g.concat(&[v, o, x])?;
        let last = self.layout.head.len() - 1;
        for (l, d) in self.layout.head.iter().enumerate() {
            h = g.linear(h, vars[d.w], Some(vars[d.b]))?;
            if l < last {
                h = g.relu(h);
            }
        }
        Ok(h)
    }

    /// Training loss of the rows of the given queries: mean cross-entropy of
    /// the logits, or of the grid-averaged probabilities for Pointnet-Grid.
    pub(crate) fn loss_graph(&self, g: &mut Graph<T>, logits: Var, targets: &[T]) -> Result<Var> {
        match self.config.kind {
            ModelKind::SceneCollisionNet => g.bce_with_logits(logits, targets),
            ModelKind::PointnetGrid => {
                let p = g.sigmoid(logits);
                let m = g.group_mean(p, 8)?;
                g.bce_prob(m, targets)
            }
        }
    }
}

fn relu<T: Scalar>(v: &mut [T]) {
    for x in v {
        if *x < T::zero() {
            *x = T::zero();
        }
    }
}
