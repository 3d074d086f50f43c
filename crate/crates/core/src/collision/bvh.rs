use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, TriangleMesh};

/// Maximum primitives per leaf.
pub const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    /// Primitives `order[start..start + count]`.
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvhNode {
    pub aabb: Aabb,
    pub kind: NodeKind,
}

/// Binary tree of axis-aligned boxes over primitive indices, median split on
/// the longest centroid axis. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvhTree {
    nodes: Vec<BvhNode>,
    order: Vec<u32>,
}

impl BvhTree {
    pub fn build(mesh: &TriangleMesh) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let boxes: Vec<Aabb> = (0..mesh.len())
            .map(|i| Aabb::from_points(&mesh.triangle(i)))
            .collect();
        Ok(Self::from_boxes(&boxes))
    }

    /// Builds over arbitrary primitive boxes; `boxes` must be non-empty.
    pub fn from_boxes(boxes: &[Aabb]) -> Self {
        assert!(!boxes.is_empty(), "BVH over zero primitives");
        let centers: Vec<_> = boxes.iter().map(Aabb::center).collect();
        let mut order: Vec<u32> = (0..boxes.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * boxes.len() / LEAF_SIZE + 1);
        Self::build_range(&mut nodes, &mut order, 0, boxes.len(), boxes, &centers);
        BvhTree { nodes, order }
    }

    fn build_range(
        nodes: &mut Vec<BvhNode>,
        order: &mut [u32],
        start: usize,
        end: usize,
        boxes: &[Aabb],
        centers: &[crate::Vec3],
    ) -> u32 {
        let items = &mut order[start..end];
        let aabb = items.iter().fold(Aabb::EMPTY, |b, &i| b.union(boxes[i as usize]));
        let id = nodes.len() as u32;
        nodes.push(BvhNode { aabb, kind: NodeKind::Leaf { start: start as u32, count: (end - start) as u32 } });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let cb = items.iter().fold(Aabb::EMPTY, |b, &i| b.grow(centers[i as usize]));
        let ext = cb.extent();
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let mid = (end - start) / 2;
        items.select_nth_unstable_by(mid, |&a, &b| {
            let (ca, cb) = (centers[a as usize].component(axis), centers[b as usize].component(axis));
            ca.total_cmp(&cb).then(a.cmp(&b))
        });
        let left = Self::build_range(nodes, order, start, start + mid, boxes, centers);
        let right = Self::build_range(nodes, order, start + mid, end, boxes, centers);
        nodes[id as usize].kind = NodeKind::Inner { left, right };
        id
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    pub fn root(&self) -> &BvhNode {
        &self.nodes[0]
    }

    pub fn root_aabb(&self) -> Aabb {
        self.nodes[0].aabb
    }

    /// Primitive indices referenced by a leaf.
    pub fn leaf_items(&self, node: &BvhNode) -> &[u32] {
        match node.kind {
            NodeKind::Leaf { start, count } => &self.order[start as usize..(start + count) as usize],
            NodeKind::Inner { .. } => &[],
        }
    }

    pub fn primitive_count(&self) -> usize {
        self.order.len()
    }

    pub fn depth(&self) -> usize {
        fn rec(t: &BvhTree, n: u32) -> usize {
            match t.nodes[n as usize].kind {
                NodeKind::Leaf { .. } => 1,
                NodeKind::Inner { left, right } => 1 + rec(t, left).max(rec(t, right)),
            }
        }
        rec(self, 0)
    }

    /// Visits leaves whose box passes `enter`; stops early when `visit`
    /// returns `true`, and reports whether it did.
    pub fn any_leaf(
        &self,
        mut enter: impl FnMut(&Aabb) -> bool,
        mut visit: impl FnMut(&[u32]) -> bool,
    ) -> bool {
        let mut stack: Vec<u32> = alloc::vec![0];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            if !enter(&node.aabb) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { .. } => {
                    if visit(self.leaf_items(node)) {
                        return true;
                    }
                }
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        false
    }

    /// Best-first search minimizing `prim_cost` with `box_bound` as an
    /// admissible lower bound. Ties resolve to the lowest primitive index.
    pub fn nearest(
        &self,
        box_bound: impl Fn(&Aabb) -> f64,
        mut prim_cost: impl FnMut(u32) -> Option<f64>,
    ) -> Option<(u32, f64)> {
        let mut best: Option<(u32, f64)> = None;
        let mut stack: Vec<(f64, u32)> = alloc::vec![(box_bound(&self.nodes[0].aabb), 0)];
        while let Some((bound, n)) = stack.pop() {
            if bound == f64::INFINITY {
                continue;
            }
            if let Some((_, b)) = best {
                if bound > b {
                    continue;
                }
            }
            let node = &self.nodes[n as usize];
            match node.kind {
                NodeKind::Leaf { .. } => {
                    for &p in self.leaf_items(node) {
                        if let Some(c) = prim_cost(p) {
                            let better = match best {
                                None => true,
                                Some((bp, bc)) => c < bc || (c == bc && p < bp),
                            };
                            if better {
                                best = Some((p, c));
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let (bl, br) = (box_bound(&self.nodes[left as usize].aabb), box_bound(&self.nodes[right as usize].aabb));
                    // pop the closer child first
                    if bl <= br {
                        stack.push((br, right));
                        stack.push((bl, left));
                    } else {
                        stack.push((bl, left));
                        stack.push((br, right));
                    }
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;
    use crate::math::Vec3;
    #[allow(unused_imports)]
    use num_traits::Float as _;

    fn check_invariants(t: &BvhTree, n: usize) {
        let mut seen = alloc::vec![0u32; n];
        for node in t.nodes() {
            match node.kind {
                NodeKind::Leaf { count, .. } => {
                    assert!(count as usize <= LEAF_SIZE);
                    for &i in t.leaf_items(node) {
                        seen[i as usize] += 1;
                    }
                }
                NodeKind::Inner { left, right } => {
                    assert!(node.aabb.contains(&t.nodes()[left as usize].aabb));
                    assert!(node.aabb.contains(&t.nodes()[right as usize].aabb));
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn single_triangle_leaf() {
        let m = TriangleMesh::new(
            alloc::vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.5), Vec3::new(0.0, 2.0, 0.0)],
            alloc::vec![[0, 1, 2]],
        )
        .unwrap();
        let t = BvhTree::build(&m).unwrap();
        assert_eq!(t.nodes().len(), 1);
        assert_eq!(t.root_aabb(), Aabb::from_points(&m.triangle(0)));
    }

    #[test]
    fn large_mesh_depth_and_coverage() {
        // 500 segments * 2 = 1000 side triangles plus caps
        let m = primitives::revolution(&[(0.0, 0.0), (0.1, 0.0), (0.1, 1.0), (0.0, 1.0)], 250);
        assert_eq!(m.len(), 1000);
        let t = BvhTree::build(&m).unwrap();
        check_invariants(&t, m.len());
        let bound = 2.0 * (1000f64).log2() + 4.0;
        assert!((t.depth() as f64) <= bound, "depth {}", t.depth());
        let bb = m.aabb();
        assert!(t.root_aabb().min.distance(bb.min) < 1e-12 && t.root_aabb().max.distance(bb.max) < 1e-12);
    }

    #[test]
    fn empty_mesh_rejected() {
        assert_eq!(BvhTree::build(&TriangleMesh::empty()), Err(Error::EmptyMesh));
    }
}
