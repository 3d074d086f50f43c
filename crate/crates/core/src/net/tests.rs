use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;
use rand::{Rng as _, SeedableRng};

use super::*;
use crate::autodiff::{check_gradients, Tensor};
use crate::geometry::{PointCloud, RigidTransform};
use crate::math::{Mat3, Vec3};
use crate::rng::Rng;

fn cloud_in(lo: Vec3, hi: Vec3, n: usize, seed: u64) -> PointCloud {
    let mut rng = Rng::seed_from_u64(seed);
    let pts = (0..n)
        .map(|_| {
            Vec3::new(
                rng.random_range(lo.x..hi.x),
                rng.random_range(lo.y..hi.y),
                rng.random_range(lo.z..hi.z),
            )
        })
        .collect();
    PointCloud::new(pts).unwrap()
}

fn object_cloud(n: usize, seed: u64) -> PointCloud {
    cloud_in(Vec3::new(-0.04, -0.03, 0.0), Vec3::new(0.04, 0.03, 0.05), n, seed)
}

fn micro_scene(seed: u64) -> PointCloud {
    cloud_in(Vec3::new(-0.15, -0.15, -0.1), Vec3::new(0.15, 0.15, 0.1), 60, seed)
}

fn random_queries(n: usize, lo: Vec3, hi: Vec3, seed: u64) -> Vec<RigidTransform> {
    let mut rng = Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = Mat3::from_rpy(rng.random_range(-3.0..3.0), rng.random_range(-1.5..1.5), rng.random_range(-3.0..3.0));
            let t = Vec3::new(rng.random_range(lo.x..hi.x), rng.random_range(lo.y..hi.y), rng.random_range(lo.z..hi.z));
            RigidTransform::new(r, t)
        })
        .collect()
}

fn reversed(c: &PointCloud) -> PointCloud {
    let mut p = c.points().to_vec();
    p.reverse();
    PointCloud::new(p).unwrap()
}

#[test]
fn parameter_names_and_shapes() {
    let m = CollisionModel::<f32>::new(NetConfig::default(), 1).unwrap();
    let names: Vec<&str> = m.params().names().iter().map(|s| s.as_str()).collect();
    assert!(names.contains(&"scene.conv.2.w"));
    assert_eq!(m.params().get("scene.conv.0.w").unwrap().shape(), &[27, 64, 64]);
    assert_eq!(m.params().get("head.0.w").unwrap().shape(), &[64 + 128 + 12, 256]);
    assert_eq!(m.params().get("head.2.w").unwrap().shape(), &[64, 1]);
    let pg = CollisionModel::<f32>::new(NetConfig::pointnet_grid(), 1).unwrap();
    assert!(pg.params().get("scene.conv.0.w").is_none());
    // round trip through the checked constructor
    let again = CollisionModel::from_params(m.config().clone(), m.params().clone()).unwrap();
    assert_eq!(again, m);
    assert!(CollisionModel::from_params(NetConfig::micro(), m.params().clone()).is_err());
}

#[test]
fn scene_encoding_is_order_invariant() {
    let m = CollisionModel::<f32>::new(NetConfig::default(), 2).unwrap();
    let c = cloud_in(Vec3::new(-0.5, -0.5, 0.0), Vec3::new(0.5, 0.5, 0.2), 2000, 3);
    let a = m.encode_scene(&c).unwrap();
    let b = m.encode_scene(&reversed(&c)).unwrap();
    let diff = a.features().data().iter().zip(b.features().data()).map(|(x, y)| (x - y).abs()).fold(0.0, f32::max);
    assert!(diff <= 1e-6, "{diff}");
}

#[test]
fn object_encoding_is_order_and_duplicate_invariant() {
    let m = CollisionModel::<f32>::new(NetConfig::default(), 2).unwrap();
    let c = object_cloud(500, 4);
    let a = m.encode_object(&c).unwrap();
    assert_eq!(a.features().len(), 128);
    assert_eq!(a, m.encode_object(&reversed(&c)).unwrap());
    let mut dup = c.points().to_vec();
    dup.extend_from_slice(&c.points()[..200]);
    assert_eq!(a, m.encode_object(&PointCloud::new(dup).unwrap()).unwrap());
    assert!(m.encode_object(&object_cloud(20, 4)).is_err());
}

#[test]
fn translation_by_one_pitch_shifts_pooled_features() {
    let cfg = NetConfig {
        grid: GridSpec { origin: [0.0; 3], pitch: 0.125, dims: [6, 3, 3] },
        conv_layers: 0,
        ..NetConfig::default()
    };
    let m = CollisionModel::<f32>::new(cfg, 5).unwrap();
    let mut rng = Rng::seed_from_u64(6);
    let pts: Vec<Vec3> = (0..300)
        .map(|_| {
            let q = |rng: &mut Rng, hi: u32| f64::from(rng.random_range(0..hi)) / 1024.0;
            Vec3::new(q(&mut rng, 640), q(&mut rng, 384), q(&mut rng, 384))
        })
        .collect();
    let shifted: Vec<Vec3> = pts.iter().map(|p| *p + Vec3::new(0.125, 0.0, 0.0)).collect();
    let a = m.encode_scene(&PointCloud::new(pts).unwrap()).unwrap();
    let b = m.encode_scene(&PointCloud::new(shifted).unwrap()).unwrap();
    let f = m.config().voxel_width();
    let (fa, fb) = (a.features(), b.features());
    for i in 0..5 {
        for j in 0..3 {
            for k in 0..3 {
                let src = (i * 3 + j) * 3 + k;
                let dst = ((i + 1) * 3 + j) * 3 + k;
                assert_eq!(&fa.data()[src * f..(src + 1) * f], &fb.data()[dst * f..(dst + 1) * f]);
            }
        }
    }
    // the first x-slab of the shifted cloud is empty
    assert!(fb.data()[..9 * f].iter().all(|&v| v == 0.0));
}

#[test]
fn batched_classification_matches_sequential() {
    for cfg in [NetConfig::default(), NetConfig::pointnet_grid()] {
        let m = CollisionModel::<f32>::new(cfg, 7).unwrap();
        let scene = m.encode_scene(&cloud_in(Vec3::new(-0.5, -0.5, 0.0), Vec3::new(0.5, 0.5, 0.15), 3000, 8)).unwrap();
        let obj = m.encode_object(&object_cloud(300, 9)).unwrap();
        // more rows than voxels switches to the projected voxel table
        let qs = random_queries(1500, Vec3::new(-0.8, -0.8, -0.3), Vec3::new(0.8, 0.8, 0.5), 10);
        let batch = m.classify(&scene, &obj, &qs);
        let again = m.classify(&scene, &obj, &qs);
        assert_eq!(batch, again);
        assert!(batch.probs.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(batch.outside.iter().any(|&o| o) && batch.outside.iter().any(|&o| !o));
        for (i, q) in qs.iter().enumerate() {
            let one = m.classify(&scene, &obj, core::slice::from_ref(q));
            assert!((one.probs[0] - batch.probs[i]).abs() <= 1e-6);
            assert_eq!(one.outside[0], batch.outside[i]);
            if batch.outside[i] {
                assert_eq!(batch.probs[i], 1.0);
            }
        }
    }
}

#[test]
fn multi_object_batch_matches_per_object() {
    let m = CollisionModel::<f32>::new(NetConfig::default(), 11).unwrap();
    let scene = m.encode_scene(&cloud_in(Vec3::new(-0.5, -0.5, 0.0), Vec3::new(0.5, 0.5, 0.15), 2000, 12)).unwrap();
    let objs = [m.encode_object(&object_cloud(200, 13)).unwrap(), m.encode_object(&object_cloud(200, 14)).unwrap()];
    let qs = random_queries(40, Vec3::new(-0.5, -0.5, 0.0), Vec3::new(0.5, 0.5, 0.3), 15);
    let tagged: Vec<(usize, RigidTransform)> = qs.iter().enumerate().map(|(i, q)| (i % 2, *q)).collect();
    let multi = m.classify_multi(&scene, &[&objs[0], &objs[1]], &tagged).unwrap();
    for (i, q) in qs.iter().enumerate() {
        let one = m.classify(&scene, &objs[i % 2], core::slice::from_ref(q));
        assert!((one.probs[0] - multi.probs[i]).abs() <= 1e-6);
    }
    assert!(m.classify_multi(&scene, &[&objs[0]], &tagged).is_err());
}

#[test]
fn cached_encoding_matches_recomputation() {
    let m = CollisionModel::<f32>::new(NetConfig::default(), 16).unwrap();
    let cloud = cloud_in(Vec3::new(-0.5, -0.5, 0.0), Vec3::new(0.5, 0.5, 0.15), 1000, 17);
    let obj = m.encode_object(&object_cloud(200, 18)).unwrap();
    let cached = m.encode_scene(&cloud).unwrap();
    for s in 0..100 {
        let qs = random_queries(3, Vec3::new(-0.5, -0.5, 0.0), Vec3::new(0.5, 0.5, 0.3), 100 + s);
        if s % 10 == 0 {
            let fresh = m.encode_scene(&cloud).unwrap();
            assert_eq!(m.classify(&fresh, &obj, &qs), m.classify(&cached, &obj, &qs));
        } else {
            assert_eq!(m.classify(&cached, &obj, &qs), m.classify(&cached, &obj, &qs));
        }
    }
}

/// Smaller than the per-op step: with hundreds of rectified rows a 1e-3
/// step straddles some kink and the difference quotient stops measuring
/// the derivative.
const H_E2E: f64 = 1e-5;

fn end_to_end_check(kind: ModelKind, seed: u64) {
    let cfg = NetConfig { kind, ..NetConfig::micro() };
    let mut model = CollisionModel::<f64>::new(cfg, seed).unwrap();
    // zero biases put every center's own (zero-offset) row exactly on a
    // rectifier kink; move them off it
    let mut rng = Rng::seed_from_u64(seed);
    for i in 0..model.params().len() {
        if model.params().names()[i].ends_with(".b") {
            for v in model.params_mut().tensor_mut(i).data_mut() {
                *v = rng.random_range(-0.1..0.1);
            }
        }
    }
    let scene = micro_scene(seed + 1);
    let object = object_cloud(40, seed + 2);
    let queries = random_queries(4, Vec3::new(-0.14, -0.14, -0.09), Vec3::new(0.14, 0.14, 0.09), seed + 3);
    let labels = [1.0, 0.0, 1.0, 0.0];
    let inputs: Vec<Tensor<f64>> = model.params().iter().map(|(_, t)| t.clone()).collect();
    let errors = check_gradients(&inputs, H_E2E, |g, vars| model.loss_graph_for(g, vars, &scene, &object, &queries, &labels)).unwrap();
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    assert!(worst < 1e-3, "{kind:?}: worst relative error {worst} ({errors:?})");
}

#[test]
fn end_to_end_gradient_scene_collision_net() {
    end_to_end_check(ModelKind::SceneCollisionNet, 20);
}

#[test]
fn end_to_end_gradient_pointnet_grid() {
    end_to_end_check(ModelKind::PointnetGrid, 30);
}

#[test]
fn mining_counts_and_disjointness() {
    let cfg = TrainConfig::default();
    assert_eq!(cfg.mining_counts(2048), (204, 204));
    assert_eq!(cfg.mining_counts(512), (51, 51));
    let mut rng = Rng::seed_from_u64(1);
    let losses: Vec<f32> = (0..2048).map(|_| rng.random_range(0.0..1.0)).collect();
    let s = select_queries(&losses, 204, 204, &mut Rng::seed_from_u64(2));
    assert_eq!((s.hard.len(), s.random.len()), (204, 204));
    let mut all = s.all();
    all.sort_unstable();
    all.dedup();
    assert_eq!(all.len(), 408);
}

#[test]
fn outlier_is_always_hard() {
    for seed in 0..20 {
        let mut rng = Rng::seed_from_u64(seed);
        let mut losses: Vec<f32> = (0..100).map(|_| rng.random_range(0.0..0.7)).collect();
        let k = rng.random_range(0..100);
        losses[k] = 9.0;
        let s = select_queries(&losses, 10, 10, &mut rng);
        assert_eq!(s.hard[0], k);
    }
}

proptest! {
    #[test]
    fn hard_set_dominates_unselected(levels in prop::collection::vec(0u8..8, 1..200), seed in 0u64..1000) {
        let losses: Vec<f32> = levels.iter().map(|&l| f32::from(l)).collect();
        let q = losses.len();
        let (h, r) = TrainConfig::default().mining_counts(q);
        let s = select_queries(&losses, h, r, &mut Rng::seed_from_u64(seed));
        prop_assert_eq!(s.hard.len(), h);
        prop_assert_eq!(s.random.len(), r.min(q - h));
        let chosen: Vec<usize> = s.all();
        for i in 0..q {
            if chosen.contains(&i) { continue; }
            for &j in &s.hard {
                prop_assert!(losses[j] > losses[i] || (losses[j] == losses[i] && j < i));
            }
        }
        for &j in &s.random {
            prop_assert!(!s.hard.contains(&j));
        }
    }
}

#[test]
fn training_reduces_loss_on_a_fixed_record() {
    use crate::dataset::QueryBatch;
    let model = CollisionModel::<f32>::new(NetConfig::micro(), 40).unwrap();
    let queries = random_queries(64, Vec3::new(-0.14, -0.14, -0.09), Vec3::new(0.14, 0.14, 0.09), 41);
    let labels = queries.iter().map(|q| u8::from(q.translation.z < 0.0)).collect();
    let batch = QueryBatch {
        scene_cloud: micro_scene(42),
        object_cloud: object_cloud(40, 43),
        transforms: queries,
        labels,
        meta: None,
    };
    let cfg = TrainConfig { steps: 150, lr: 0.05, mining: false, ..TrainConfig::default() };
    let mut t = Trainer::new(model, cfg, 44).unwrap();
    let mut losses = Vec::new();
    t.fit(core::slice::from_ref(&batch), |s| losses.push(s.full_loss)).unwrap();
    assert_eq!(losses.len(), 150);
    let head: f64 = losses[..10].iter().sum::<f64>() / 10.0;
    let tail: f64 = losses[140..].iter().sum::<f64>() / 10.0;
    assert!(tail < 0.5 * head, "{head} -> {tail}");
}

#[test]
fn epochs_visit_every_record() {
    let mut seen: Vec<usize> = (0..7).map(|s| record_for_step(3, 7, s)).collect();
    seen.sort_unstable();
    assert_eq!(seen, (0..7).collect::<Vec<_>>());
    assert_eq!(record_for_step(3, 7, 9), record_for_step(3, 7, 9));
}

#[test]
fn link_encodings_are_cached_and_stable() {
    use crate::geometry::primitives::cuboid;
    let m = CollisionModel::<f32>::new(NetConfig::default(), 50).unwrap();
    let meshes = vec![cuboid(Vec3::new(0.1, 0.1, 0.3)), cuboid(Vec3::new(0.08, 0.08, 0.2))];
    let a = LinkEncodings::new(&m, &meshes, 256, 3).unwrap();
    let b = LinkEncodings::new(&m, &meshes, 256, 3).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.encodings.len(), 2);
}
