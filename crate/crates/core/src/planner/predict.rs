use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::robot::RobotModel;
use crate::baselines::CollisionChecker;
use crate::collision::{in_collision_solid, CollisionMesh, PosedBody};
use crate::error::Result;
use crate::geometry::{sample_surface, PointCloud, RigidTransform};
use crate::net::{CollisionModel, ObjectEncoding, SceneEncoding};
use crate::rng::derive_seed;

/// A rigid body the planner moves through the scene: a robot link or the
/// held object. `mesh` and `cloud` share one frame; query poses map that
/// frame to the world.
#[derive(Debug, Clone)]
pub struct Probe {
    /// Identifies the cloud for encoding caches; must change when the cloud
    /// does.
    pub key: u64,
    pub mesh: Arc<CollisionMesh>,
    pub cloud: PointCloud,
}

/// One probe per robot link, with `points` surface samples each.
pub fn robot_probes(robot: &RobotModel, points: usize, seed: u64) -> Result<Vec<Probe>> {
    robot
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let cloud = sample_surface(&l.mesh.mesh, points, derive_seed(seed, "link-cloud", i as u64))?;
            Ok(Probe { key: i as u64, mesh: l.mesh.clone(), cloud })
        })
        .collect()
}

/// What the planner currently knows about the world. Bodies feed the oracle;
/// the cloud feeds every learned or point-based predictor. Neither includes
/// the robot or the held object.
#[derive(Debug, Clone)]
pub struct ObservedScene {
    pub bodies: Vec<PosedBody>,
    pub cloud: PointCloud,
    /// Bumped whenever bodies or cloud change.
    pub version: u64,
}

/// Scene collision predictor used by trajectory selection and placement.
pub trait CollisionPredictor {
    fn name(&self) -> String;

    /// Called before every batch; implementations may cache per version.
    fn observe(&mut self, scene: &ObservedScene) -> Result<()>;

    /// Whether `probes[i]` posed at each `(i, pose)` collides with the scene.
    fn collides(&mut self, probes: &[&Probe], queries: &[(usize, RigidTransform)]) -> Result<Vec<bool>>;
}

/// Exact solid-body checks against the observed bodies.
#[derive(Debug, Clone, Default)]
pub struct OraclePredictor {
    bodies: Vec<PosedBody>,
}

impl OraclePredictor {
    pub fn new() -> Self {
        OraclePredictor::default()
    }
}

impl CollisionPredictor for OraclePredictor {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn observe(&mut self, scene: &ObservedScene) -> Result<()> {
        self.bodies.clone_from(&scene.bodies);
        Ok(())
    }

    fn collides(&mut self, probes: &[&Probe], queries: &[(usize, RigidTransform)]) -> Result<Vec<bool>> {
        Ok(queries
            .iter()
            .map(|(i, pose)| {
                let body = PosedBody::new(probes[*i].mesh.clone(), *pose);
                self.bodies.iter().any(|b| in_collision_solid(&body, b))
            })
            .collect())
    }
}

/// Thresholded collision network. Queries outside the scene grid count as
/// collisions, except those above its top face, where nothing was observed.
pub struct LearnedPredictor {
    model: CollisionModel<f32>,
    threshold: f32,
    scene: Option<(u64, SceneEncoding<f32>)>,
    objects: Vec<(u64, ObjectEncoding<f32>)>,
    top: f64,
}

impl LearnedPredictor {
    pub fn new(model: CollisionModel<f32>, threshold: f32) -> Self {
        let top = model
            .config()
            .grids()
            .iter()
            .map(|g| g.origin[2] + g.pitch * g.dims[2] as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        LearnedPredictor { model, threshold, scene: None, objects: Vec::new(), top }
    }

    pub fn model(&self) -> &CollisionModel<f32> {
        &self.model
    }

    fn encoding_index(&mut self, probe: &Probe) -> Result<usize> {
        if let Some(i) = self.objects.iter().position(|(k, _)| *k == probe.key) {
            return Ok(i);
        }
        let enc = self.model.encode_object(&probe.cloud)?;
        self.objects.push((probe.key, enc));
        Ok(self.objects.len() - 1)
    }
}

impl CollisionPredictor for LearnedPredictor {
    fn name(&self) -> String {
        self.model.kind().name().into()
    }

    fn observe(&mut self, scene: &ObservedScene) -> Result<()> {
        if self.scene.as_ref().is_none_or(|(v, _)| *v != scene.version) {
            self.scene = Some((scene.version, self.model.encode_scene(&scene.cloud)?));
        }
        Ok(())
    }

    fn collides(&mut self, probes: &[&Probe], queries: &[(usize, RigidTransform)]) -> Result<Vec<bool>> {
        let slots = probes.iter().map(|p| self.encoding_index(p)).collect::<Result<Vec<_>>>()?;
        let (_, scene) = self.scene.as_ref().ok_or_else(|| crate::Error::invalid("no scene observed"))?;
        let objects: Vec<&ObjectEncoding<f32>> = slots.iter().map(|&s| &self.objects[s].1).collect();
        let out = self.model.classify_multi(scene, &objects, queries)?;
        Ok(queries
            .iter()
            .zip(out.probs.iter().zip(&out.outside))
            .map(|((_, pose), (&p, &outside))| {
                if outside {
                    pose.translation.z <= self.top
                } else {
                    p >= self.threshold
                }
            })
            .collect())
    }
}

/// Any point-cloud checker, applied per probe to the observed cloud.
pub struct CheckerPredictor {
    checker: Box<dyn CollisionChecker + Send + Sync>,
    cloud: PointCloud,
    threshold: f32,
}

impl CheckerPredictor {
    pub fn new(checker: Box<dyn CollisionChecker + Send + Sync>) -> Self {
        CheckerPredictor { checker, cloud: PointCloud::default(), threshold: 0.5 }
    }
}

impl CollisionPredictor for CheckerPredictor {
    fn name(&self) -> String {
        self.checker.name()
    }

    fn observe(&mut self, scene: &ObservedScene) -> Result<()> {
        self.cloud.clone_from(&scene.cloud);
        Ok(())
    }

    fn collides(&mut self, probes: &[&Probe], queries: &[(usize, RigidTransform)]) -> Result<Vec<bool>> {
        let mut out = alloc::vec![false; queries.len()];
        for (p, probe) in probes.iter().enumerate() {
            let idx: Vec<usize> = (0..queries.len()).filter(|&k| queries[k].0 == p).collect();
            if idx.is_empty() {
                continue;
            }
            let poses: Vec<RigidTransform> = idx.iter().map(|&k| queries[k].1).collect();
            let scores = self.checker.predict(&self.cloud, &probe.cloud, &poses)?;
            for (&k, s) in idx.iter().zip(scores) {
                out[k] = s >= self.threshold;
            }
        }
        Ok(out)
    }
}
