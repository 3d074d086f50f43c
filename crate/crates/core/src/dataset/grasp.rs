use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{round_cloud, round_transform, QueryBatch};
use crate::collision::{CollisionMesh, PosedBody};
use crate::error::Result;
use crate::geometry::{sample_surface, PointCloud, RigidTransform};
use crate::planner::{scripted_grasps, Gripper};
use crate::rng::derive_seed;
use crate::scene::{SceneBodies, SceneState};

/// Gripper queries at each approach-axis offset. `batches[i]` holds the same
/// grasps as every other batch, retreated by `offsets[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspQuerySet {
    pub offsets: Vec<f64>,
    pub batches: Vec<QueryBatch>,
    /// No object in the scene admitted a grasp.
    pub no_graspable: bool,
}

/// Scripted antipodal grasps on every scene object, each replicated at every
/// offset back along its approach axis and labeled by the oracle (gripper
/// against table and all objects). The query "object" is the open gripper;
/// its cloud is sampled from the gripper mesh in the tool frame.
pub fn generate_grasp_queries(
    scene: &SceneState,
    bodies: &SceneBodies,
    gripper: &Gripper,
    offsets: &[f64],
    grasps_per_object: usize,
    cloud_points: usize,
    seed: u64,
) -> Result<GraspQuerySet> {
    let mesh = gripper.mesh();
    let gripper_cloud = round_cloud(&sample_surface(&mesh, cloud_points, derive_seed(seed, "gripper-cloud", 0))?);
    let shape = Arc::new(CollisionMesh::new(mesh)?);
    let mut grasps = Vec::new();
    for (id, body) in &bodies.objects {
        grasps.extend(scripted_grasps(body, gripper, 40 * grasps_per_object, grasps_per_object, derive_seed(seed, "grasps", u64::from(*id))));
    }
    let scene_cloud = round_cloud(&PointCloud::new(scene.render().points().to_vec())?);
    let batches = offsets
        .iter()
        .map(|&d| {
            let transforms: Vec<RigidTransform> = grasps.iter().map(|g| round_transform(&g.retreated(d))).collect();
            let labels = transforms
                .iter()
                .map(|t| u8::from(bodies.collides(&PosedBody::new(shape.clone(), *t))))
                .collect();
            QueryBatch { scene_cloud: scene_cloud.clone(), object_cloud: gripper_cloud.clone(), transforms, labels, meta: None }
        })
        .collect();
    Ok(GraspQuerySet { offsets: offsets.to_vec(), batches, no_graspable: grasps.is_empty() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use crate::scene::{sample_scene, SceneConfig};

    #[test]
    fn offsets_shift_along_approach() {
        let cfg = SceneConfig { min_objects: 4, max_objects: 4, max_dim: 0.07, ..SceneConfig::default() };
        let scene = sample_scene(&cfg, 1).unwrap();
        let bodies = scene.bodies().unwrap();
        let set = generate_grasp_queries(&scene, &bodies, &Gripper::default(), &[0.0, 0.05, 1.0], 8, 256, 3).unwrap();
        assert!(!set.no_graspable);
        let (a, b, far) = (&set.batches[0], &set.batches[1], &set.batches[2]);
        assert_eq!(a.len(), b.len());
        for (ta, tb) in a.transforms.iter().zip(&b.transforms) {
            let approach = ta.rotation.col(2);
            assert!((tb.translation - (ta.translation - approach * 0.05)).norm() < 1e-6);
            assert!(ta.rotation.max_abs_diff(&tb.rotation) == 0.0);
        }
        // retreating a metre along a mostly downward approach leaves free space
        for (t, &l) in far.transforms.iter().zip(&far.labels) {
            if t.rotation.col(2).dot(-Vec3::Z) > 0.9 {
                assert_eq!(l, 0);
            }
        }
    }

    #[test]
    fn empty_scene_is_flagged() {
        let cfg = SceneConfig { min_objects: 0, max_objects: 0, ..SceneConfig::default() };
        let scene = sample_scene(&cfg, 1).unwrap();
        let bodies = scene.bodies().unwrap();
        let set = generate_grasp_queries(&scene, &bodies, &Gripper::default(), &[0.0], 8, 64, 3).unwrap();
        assert!(set.no_graspable);
        assert!(set.batches[0].is_empty());
    }
}
