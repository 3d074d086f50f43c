use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::ik::{inverse_kinematics, IkConfig};
use super::mppi::Body;
use super::placement::PlacementZone;
use super::policy::{barrier_wall, reach, ReachConfig, ReachOutcome, Scenario};
use super::predict::{robot_probes, CollisionPredictor, ObservedScene};
use super::robot::RobotModel;
use crate::collision::{in_collision_solid, PosedBody};
use crate::error::{Error, Result};
use crate::geometry::RigidTransform;
use crate::math::{Mat3, Vec3};
use crate::rng::{derive_seed, substream, Rng};
use crate::scene::{sample_scene, SceneConfig, SceneState};

/// Move the arm from `start` to `goal` without touching the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachTask {
    pub scene: SceneState,
    pub start: Vec<f64>,
    pub goal: Vec<f64>,
    /// Start and goal lie on opposite sides of a tall wall.
    pub barrier: bool,
}

/// Configurations of `path` that collide with `scene` under exact solid-body
/// checks (self-collision included), as indices into `path`.
pub fn audit_path(robot: &RobotModel, scene: &SceneState, path: &[Vec<f64>]) -> Result<Vec<usize>> {
    let bodies = scene.bodies()?;
    let mut bad = Vec::new();
    for (i, q) in path.iter().enumerate() {
        let k = robot.fk(q)?;
        let hit = robot.self_collision(q)
            || robot.links.iter().zip(robot.link_poses(&k)).any(|(l, pose)| {
                let b = PosedBody::new(l.mesh.clone(), pose);
                bodies.all().any(|o| in_collision_solid(&b, o))
            });
        if hit {
            bad.push(i);
        }
    }
    Ok(bad)
}

fn downward(yaw: f64, p: Vec3) -> RigidTransform {
    let flip = Mat3::from_cols(Vec3::X, -Vec3::Y, -Vec3::Z);
    RigidTransform::new(Mat3::rot_z(yaw).mul_mat(&flip), p)
}

/// IK solution for a top-down tool pose at `p` that is clear of the scene.
fn clear_config(robot: &RobotModel, scene: &SceneState, p: Vec3, yaw: f64, seeds: &[Vec<f64>], rng: &mut Rng) -> Result<Option<Vec<f64>>> {
    let Some(q) = inverse_kinematics(robot, &downward(yaw, p), seeds, &IkConfig::default(), rng) else {
        return Ok(None);
    };
    Ok(audit_path(robot, scene, core::slice::from_ref(&q))?.is_empty().then_some(q))
}

/// `count` reach tasks, the last `barriers` of them across a wall. Random
/// tasks start at home in a sampled scene and end at a clear top-down pose
/// over the reachable part of the table.
pub fn reach_tasks(robot: &RobotModel, scenes: &SceneConfig, count: usize, barriers: usize, seed: u64) -> Result<Vec<ReachTask>> {
    if barriers > count {
        return Err(Error::invalid("more barrier tasks than tasks"));
    }
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = substream(seed, "reach-task", i as u64);
        let barrier = i >= count - barriers;
        let task = if barrier {
            barrier_task(robot, scenes, &mut rng, derive_seed(seed, "reach-scene", i as u64))?
        } else {
            random_task(robot, scenes, &mut rng, derive_seed(seed, "reach-scene", i as u64))?
        };
        out.push(task.ok_or_else(|| Error::invalid(alloc::format!("no clear goal found for reach task {i}")))?);
    }
    Ok(out)
}

fn random_task(robot: &RobotModel, scenes: &SceneConfig, rng: &mut Rng, scene_seed: u64) -> Result<Option<ReachTask>> {
    let scene = sample_scene(scenes, scene_seed)?;
    let start = robot.home.clone();
    if !audit_path(robot, &scene, core::slice::from_ref(&start))?.is_empty() {
        return Ok(None);
    }
    for _ in 0..100 {
        let p = Vec3::new(rng.random_range(-0.35..0.15), rng.random_range(-0.35..0.35), rng.random_range(0.1..0.3));
        let yaw = rng.random_range(-1.5..1.5);
        if let Some(goal) = clear_config(robot, &scene, p, yaw, &[start.clone()], rng)? {
            return Ok(Some(ReachTask { scene, start, goal, barrier: false }));
        }
    }
    Ok(None)
}

/// Wall along `y = 0` in front of the arm with a few objects scattered around
/// it; start and goal hover low on opposite sides.
fn barrier_task(robot: &RobotModel, scenes: &SceneConfig, rng: &mut Rng, scene_seed: u64) -> Result<Option<ReachTask>> {
    let height = rng.random_range(0.2..0.3);
    let sparse = SceneConfig { min_objects: 0, max_objects: scenes.max_objects.min(4), ..scenes.clone() };
    let mut scene = sample_scene(&sparse, scene_seed)?;
    let wall = barrier_wall(BARRIER_ID, height, 0.6, -0.1);
    let wall_body = PosedBody::from_mesh(wall.shape.mesh(), wall.pose)?;
    let bodies = scene.bodies()?;
    scene.objects.retain(|o| bodies.object(o.id).is_some_and(|b| !in_collision_solid(b, &wall_body)));
    scene.objects.push(wall);
    for _ in 0..100 {
        let x = rng.random_range(-0.3..0.0);
        let z = rng.random_range(0.08..0.15);
        let a = Vec3::new(x, -rng.random_range(0.15..0.3), z);
        let b = Vec3::new(x, rng.random_range(0.15..0.3), z);
        let Some(start) = clear_config(robot, &scene, a, 0.0, &[robot.home.clone()], rng)? else {
            continue;
        };
        if let Some(goal) = clear_config(robot, &scene, b, 0.0, &[start.clone(), robot.home.clone()], rng)? {
            return Ok(Some(ReachTask { scene, start, goal, barrier: true }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReachReport {
    pub reached: bool,
    pub ticks: usize,
    /// Executed configurations at check resolution.
    pub checked: usize,
    pub audit_failures: usize,
    pub final_distance: f64,
}

/// Runs one task with `predictor` and audits every executed configuration.
pub fn run_reach_task(
    robot: &RobotModel,
    task: &ReachTask,
    predictor: &mut dyn CollisionPredictor,
    cfg: &ReachConfig,
    seed: u64,
    clock: &dyn Fn() -> f64,
) -> Result<(ReachReport, ReachOutcome)> {
    let bodies = task.scene.bodies()?;
    predictor.observe(&ObservedScene { bodies: bodies.all().cloned().collect(), cloud: task.scene.render(), version: 0 })?;
    let links = robot_probes(robot, 256, derive_seed(seed, "links", 0))?;
    let body = Body { robot, links: &links, held: None };
    let mut q = task.start.clone();
    let mut rng = substream(seed, "mppi", 0);
    let out = reach(&body, predictor, &mut q, core::slice::from_ref(&task.goal), cfg, &mut rng, clock, |_| {})?;
    let bad = audit_path(robot, &task.scene, &out.path)?;
    let report = ReachReport {
        reached: out.reached,
        ticks: out.ticks,
        checked: out.path.len(),
        audit_failures: bad.len(),
        final_distance: super::mppi::joint_distance(&q, &task.goal),
    };
    Ok((report, out))
}

/// Seeded pick-and-place scenarios: objects start inside `source` and are to
/// be moved into `zone`, optionally across a wall along `y = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scene: SceneConfig,
    /// Objects whose center falls outside this region are removed.
    pub source: PlacementZone,
    pub zone: PlacementZone,
    pub barrier_height: Option<f64>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            scene: SceneConfig { min_objects: 5, max_objects: 5, max_dim: 0.08, ..SceneConfig::default() },
            source: PlacementZone::rectangle([-0.5, -0.5], [0.5, -0.05], 1.0),
            zone: PlacementZone::rectangle([-0.35, 0.1], [0.0, 0.4], 0.15),
            barrier_height: None,
        }
    }
}

/// Id given to the barrier wall.
pub const BARRIER_ID: u32 = 1000;

pub fn generate_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    cfg.source.validate()?;
    cfg.zone.validate()?;
    let mut scene = sample_scene(&cfg.scene, derive_seed(seed, "scenario", 0))?;
    scene.objects.retain(|o| cfg.source.contains(o.pose.translation.x, o.pose.translation.y));
    let mut fixed = Vec::new();
    if let Some(h) = cfg.barrier_height {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::invalid(alloc::format!("barrier height must be positive, got {h}")));
        }
        let wall = barrier_wall(BARRIER_ID, h, 0.6, -0.1);
        let wall_body = PosedBody::from_mesh(wall.shape.mesh(), wall.pose)?;
        let bodies = scene.bodies()?;
        scene.objects.retain(|o| bodies.object(o.id).is_some_and(|b| !in_collision_solid(b, &wall_body)));
        scene.objects.push(wall);
        fixed.push(BARRIER_ID);
    }
    Ok(Scenario { scene, zone: cfg.zone.clone(), fixed })
}
