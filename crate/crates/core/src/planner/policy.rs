use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::grasp::{scripted_grasps, PREGRASP_OFFSET};
use super::ik::{inverse_kinematics, IkConfig};
use super::mppi::{evaluate_and_select, goal_cost, interpolate, joint_distance, sample_trajectories, Body, Held, MppiConfig};
use super::placement::{sample_placements, PlacementConfig, PlacementZone};
use super::predict::{robot_probes, CollisionPredictor, ObservedScene, Probe};
use super::robot::RobotModel;
use crate::collision::{in_collision_solid, CollisionMesh, PosedBody};
use crate::error::{Error, Result};
use crate::geometry::{sample_surface, PointCloud, RigidTransform};
use crate::math::Vec3;
use crate::net::MIN_OBJECT_POINTS;
use crate::rng::{derive_seed, substream, Rng};
use crate::scene::SceneState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    ReachPregrasp,
    Grasp,
    Lift,
    Place,
    Release,
}

impl Phase {
    pub const ALL: [Phase; 5] = [Phase::ReachPregrasp, Phase::Grasp, Phase::Lift, Phase::Place, Phase::Release];

    pub fn name(self) -> &'static str {
        match self {
            Phase::ReachPregrasp => "reach-pregrasp",
            Phase::Grasp => "grasp",
            Phase::Lift => "lift",
            Phase::Place => "place",
            Phase::Release => "release",
        }
    }
}

/// Controller settings for one MPPI-driven motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReachConfig {
    pub mppi: MppiConfig,
    pub max_ticks: usize,
    /// Consecutive stuck ticks before giving up.
    pub stuck_ticks: usize,
    /// Waypoints of the selected trajectory executed per tick.
    pub execute_steps: usize,
}

impl Default for ReachConfig {
    fn default() -> Self {
        ReachConfig { mppi: MppiConfig::default(), max_ticks: 200, stuck_ticks: 20, execute_steps: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PolicyConfig {
    pub reach: ReachConfig,
    pub placement: PlacementConfig,
    pub ik: IkConfig,
    pub lift_height: f64,
    pub attempts: u32,
    pub grasps_per_object: usize,
    /// Pregrasp configurations handed to MPPI as the goal set.
    pub grasp_goals: usize,
    pub link_points: usize,
    pub object_points: usize,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            reach: ReachConfig::default(),
            placement: PlacementConfig::default(),
            ik: IkConfig::default(),
            lift_height: 0.15,
            attempts: 2,
            grasps_per_object: 16,
            grasp_goals: 4,
            link_points: 512,
            object_points: 512,
        }
    }
}

/// Reach result: the dense executed path excludes the start.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachOutcome {
    pub reached: bool,
    pub ticks: usize,
    pub path: Vec<Vec<f64>>,
}

/// Per-tick record handed to observers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: usize,
    pub q: Vec<f64>,
    pub cost: f64,
    pub stuck: bool,
    pub checks: usize,
    pub predictor_seconds: f64,
}

/// Drives `q` toward the nearest goal with MPPI until within one step of a
/// goal, the tick budget runs out or the controller stays stuck too long.
/// Every executed configuration was checked at the check resolution.
#[allow(clippy::too_many_arguments)]
pub fn reach(
    body: &Body<'_>,
    predictor: &mut dyn CollisionPredictor,
    q: &mut Vec<f64>,
    goals: &[Vec<f64>],
    cfg: &ReachConfig,
    rng: &mut Rng,
    clock: &dyn Fn() -> f64,
    mut on_tick: impl FnMut(TickRecord),
) -> Result<ReachOutcome> {
    if goals.is_empty() {
        return Err(Error::invalid("empty goal set"));
    }
    let mut path = Vec::new();
    let mut stuck = 0usize;
    for tick in 0..cfg.max_ticks {
        if goal_cost(q, goals) <= cfg.mppi.max_step {
            return Ok(ReachOutcome { reached: true, ticks: tick, path });
        }
        let goal = goals
            .iter()
            .min_by(|a, b| joint_distance(q, a).total_cmp(&joint_distance(q, b)))
            .expect("goals are non-empty");
        let trajectories = sample_trajectories(body.robot, q, goal, &cfg.mppi, rng)?;
        let t0 = clock();
        let sel = evaluate_and_select(&trajectories, goals, body, predictor, cfg.mppi.resolution)?;
        let dt = clock() - t0;
        for w in sel.trajectory.waypoints.windows(2).take(cfg.execute_steps.max(1)) {
            path.extend(interpolate(&w[0], &w[1], cfg.mppi.resolution));
            q.clone_from(&w[1]);
        }
        on_tick(TickRecord { tick, q: q.clone(), cost: sel.cost, stuck: sel.stuck, checks: sel.checks, predictor_seconds: dt });
        stuck = if sel.stuck { stuck + 1 } else { 0 };
        if stuck > cfg.stuck_ticks {
            return Ok(ReachOutcome { reached: false, ticks: tick + 1, path });
        }
    }
    let reached = goal_cost(q, goals) <= cfg.mppi.max_step;
    Ok(ReachOutcome { reached, ticks: cfg.max_ticks, path })
}

/// Pick-and-place task: move every object into the zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub scene: SceneState,
    pub zone: PlacementZone,
    /// Objects that stay put, such as a barrier.
    #[serde(default)]
    pub fixed: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Placed,
    NoGrasp,
    ReachFailed,
    GraspBlocked,
    LiftFailed,
    NoPlacement,
    PlaceFailed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub target: u32,
    pub attempt: u32,
    pub outcome: Outcome,
    pub grasped: bool,
    pub ticks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTick {
    pub target: u32,
    pub attempt: u32,
    pub phase: Phase,
    #[serde(flatten)]
    pub record: TickRecord,
}

/// One executed configuration with what the robot carried and which object
/// it was allowed to touch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Executed {
    pub q: Vec<f64>,
    pub phase: Phase,
    /// Held object id and its pose in the tool frame.
    pub held: Option<(u32, RigidTransform)>,
    /// Object the gripper closes around or lets go of.
    pub ignore: Option<u32>,
    /// Index of the object-pose snapshot in effect.
    pub snapshot: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub predictor: String,
    pub targets: Vec<u32>,
    pub attempts: Vec<AttemptRecord>,
    pub ticks: Vec<EpisodeTick>,
    pub executed: Vec<Executed>,
    /// Object poses after each release; entry 0 is the initial scene.
    pub snapshots: Vec<Vec<(u32, RigidTransform)>>,
    pub phase_seconds: Vec<(Phase, f64)>,
    pub grasps: u32,
    pub placements: u32,
    pub seconds: f64,
}

impl EpisodeLog {
    /// Scene with the object poses of snapshot `i`.
    pub fn scene_at(&self, initial: &SceneState, i: usize) -> SceneState {
        let mut s = initial.clone();
        for (id, pose) in &self.snapshots[i] {
            if let Some(o) = s.objects.iter_mut().find(|o| o.id == *id) {
                o.pose = *pose;
            }
        }
        s
    }
}

/// Result of re-checking an episode with the exact oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub checked: usize,
    /// Indices into [`EpisodeLog::executed`].
    pub failures: Vec<usize>,
}

/// Re-checks every executed configuration against freshly built oracle
/// bodies: capsule self-collision, every link against the table and all
/// objects but the ignored and held ones, and the held object against the
/// same bodies.
pub fn audit_episode(robot: &RobotModel, initial: &SceneState, log: &EpisodeLog) -> Result<Audit> {
    let mut failures = Vec::new();
    let mut cache: Option<(usize, crate::scene::SceneBodies)> = None;
    for (n, e) in log.executed.iter().enumerate() {
        if cache.as_ref().is_none_or(|(s, _)| *s != e.snapshot) {
            cache = Some((e.snapshot, log.scene_at(initial, e.snapshot).bodies()?));
        }
        let bodies = &cache.as_ref().expect("filled above").1;
        let skip = |id: u32| e.ignore == Some(id) || e.held.is_some_and(|(h, _)| h == id);
        let obstacles: Vec<&PosedBody> = core::iter::once(&bodies.table)
            .chain(bodies.objects.iter().filter(|(id, _)| !skip(*id)).map(|(_, b)| b))
            .collect();
        let k = robot.fk(&e.q)?;
        let mut hit = robot.self_collision(&e.q);
        for (link, pose) in robot.links.iter().zip(robot.link_poses(&k)) {
            let b = PosedBody::new(link.mesh.clone(), pose);
            hit |= obstacles.iter().any(|o| in_collision_solid(&b, o));
        }
        if let Some((id, in_tool)) = e.held {
            let shape = bodies.object(id).ok_or_else(|| Error::invalid("held object missing"))?.shape.clone();
            let b = PosedBody::new(shape, k.tool.compose(&in_tool));
            hit |= obstacles.iter().any(|o| in_collision_solid(&b, o));
        }
        if hit {
            failures.push(n);
        }
    }
    Ok(Audit { checked: log.executed.len(), failures })
}

struct Episode<'a> {
    robot: &'a RobotModel,
    cfg: &'a PolicyConfig,
    zone: &'a PlacementZone,
    links: Vec<Probe>,
    predictor: &'a mut dyn CollisionPredictor,
    clock: &'a dyn Fn() -> f64,
    scene: SceneState,
    render: Option<(usize, PointCloud)>,
    q: Vec<f64>,
    rng: Rng,
    seed: u64,
    held_keys: u64,
    log: EpisodeLog,
    target: u32,
    attempt: u32,
    phase: Phase,
}

/// Holding state between grasp and release.
struct Grip {
    held: Held,
    id: u32,
}

impl Episode<'_> {
    fn snapshot(&self) -> usize {
        self.log.snapshots.len() - 1
    }

    /// Observed scene without `exclude`; robot points are never rendered.
    fn observe(&mut self, exclude: Option<u32>) -> Result<()> {
        let snap = self.snapshot();
        if self.render.as_ref().is_none_or(|(s, _)| *s != snap) {
            self.render = Some((snap, self.scene.render()));
        }
        let full = &self.render.as_ref().expect("rendered above").1;
        let cloud = match exclude {
            Some(id) => full.without_labels(&[id]),
            None => full.clone(),
        };
        let bodies = self.scene.bodies()?;
        let bodies: Vec<PosedBody> = bodies.others(exclude.unwrap_or(u32::MAX)).cloned().collect();
        let version = (snap as u64) << 32 | exclude.map_or(0, |id| u64::from(id) + 1);
        self.predictor.observe(&ObservedScene { bodies, cloud, version })
    }

    fn check(&mut self, held: Option<&Held>, configs: &[Vec<f64>]) -> Result<bool> {
        let refs: Vec<&[f64]> = configs.iter().map(Vec::as_slice).collect();
        let body = Body { robot: self.robot, links: &self.links, held };
        Ok(body.check(self.predictor, &refs)?.iter().any(|&c| c))
    }

    fn execute(&mut self, path: &[Vec<f64>], grip: Option<&Grip>, ignore: Option<u32>) {
        let snapshot = self.snapshot();
        for q in path {
            self.log.executed.push(Executed {
                q: q.clone(),
                phase: self.phase,
                held: grip.map(|g| (g.id, g.held.in_tool)),
                ignore,
                snapshot,
            });
        }
        if let Some(last) = path.last() {
            self.q.clone_from(last);
        }
    }

    fn timed<R>(&mut self, phase: Phase, f: impl FnOnce(&mut Self) -> R) -> R {
        self.phase = phase;
        let t0 = (self.clock)();
        let r = f(self);
        let dt = (self.clock)() - t0;
        if let Some(slot) = self.log.phase_seconds.iter_mut().find(|(p, _)| *p == phase) {
            slot.1 += dt;
        }
        r
    }

    fn ik(&self, target: &RigidTransform, seeds: &[Vec<f64>], label: &str, index: u64) -> Option<Vec<f64>> {
        let mut rng = substream(self.seed, label, index);
        inverse_kinematics(self.robot, target, seeds, &self.cfg.ik, &mut rng)
    }

    fn reach(&mut self, goals: &[Vec<f64>], grip: Option<&Grip>, exclude: Option<u32>) -> Result<(bool, usize)> {
        self.observe(exclude)?;
        let mut q = self.q.clone();
        let mut rng = self.rng.clone();
        let mut ticks = Vec::new();
        let body = Body { robot: self.robot, links: &self.links, held: grip.map(|g| &g.held) };
        let out = reach(&body, self.predictor, &mut q, goals, &self.cfg.reach, &mut rng, self.clock, |t| ticks.push(t))?;
        self.rng = rng;
        let (target, attempt, phase) = (self.target, self.attempt, self.phase);
        self.log.ticks.extend(ticks.into_iter().map(|record| EpisodeTick { target, attempt, phase, record }));
        self.execute(&out.path, grip, None);
        if !out.reached {
            return Ok((false, out.ticks));
        }
        // close the remaining gap to the nearest goal
        let goal = goals
            .iter()
            .min_by(|a, b| joint_distance(&self.q, a).total_cmp(&joint_distance(&self.q, b)))
            .expect("goals are non-empty")
            .clone();
        let snap = interpolate(&self.q, &goal, self.cfg.reach.mppi.resolution);
        if self.check(grip.map(|g| &g.held), &snap)? {
            return Ok((false, out.ticks));
        }
        self.execute(&snap, grip, None);
        Ok((true, out.ticks))
    }

    /// Straight joint-space move, checked first; `false` leaves `q` unchanged.
    fn scripted(&mut self, to: &[f64], grip: Option<&Grip>, ignore: Option<u32>) -> Result<bool> {
        let path = interpolate(&self.q, to, self.cfg.reach.mppi.resolution);
        self.observe(ignore.or(grip.map(|g| g.id)))?;
        if self.check(grip.map(|g| &g.held), &path)? {
            return Ok(false);
        }
        self.execute(&path, grip, ignore);
        Ok(true)
    }

    fn held_cloud(&mut self, id: u32, pose: &RigidTransform, mesh: &CollisionMesh) -> Result<PointCloud> {
        let snap = self.snapshot();
        if self.render.as_ref().is_none_or(|(s, _)| *s != snap) {
            self.render = Some((snap, self.scene.render()));
        }
        let full = &self.render.as_ref().expect("rendered above").1;
        let seen = full.filtered(|_, l| l == Some(id));
        if seen.len() >= MIN_OBJECT_POINTS {
            return Ok(PointCloud::new(seen.points().to_vec())?.transformed(&pose.inverse()));
        }
        sample_surface(&mesh.mesh, self.cfg.object_points, derive_seed(self.seed, "held-cloud", u64::from(id)))
    }

    /// Grasp candidates as (pregrasp, grasp) configurations.
    fn grasp_goals(&mut self) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        let gripper = self.robot.gripper.clone().ok_or_else(|| Error::invalid("robot has no gripper"))?;
        let bodies = self.scene.bodies()?;
        let body = bodies.object(self.target).ok_or_else(|| Error::invalid("target missing"))?;
        let n = self.cfg.grasps_per_object;
        let index = u64::from(self.target) << 8 | u64::from(self.attempt);
        let grasps = scripted_grasps(body, &gripper, 40 * n, n, derive_seed(self.seed, "grasps", index));
        let mut pairs = Vec::new();
        for (i, g) in grasps.iter().enumerate() {
            let sub = index << 16 | i as u64;
            let Some(pre) = self.ik(&g.pregrasp, &[self.q.clone(), self.robot.home.clone()], "ik-pregrasp", sub) else {
                continue;
            };
            let Some(at) = self.ik(&g.pose, &[pre.clone()], "ik-grasp", sub) else {
                continue;
            };
            pairs.push((pre, at));
        }
        // approach moves may touch only the target; pregrasps must be clear
        self.observe(Some(self.target))?;
        let mut ok = Vec::new();
        for (pre, at) in pairs {
            let path = interpolate(&pre, &at, self.cfg.reach.mppi.resolution);
            if !self.check(None, &path)? {
                ok.push((pre, at));
            }
        }
        self.observe(None)?;
        let mut out = Vec::new();
        for (pre, at) in ok {
            if out.len() >= self.cfg.grasp_goals {
                break;
            }
            if !self.check(None, core::slice::from_ref(&pre))? {
                out.push((pre, at));
            }
        }
        Ok(out)
    }

    /// Undoes the moves since the grasp, lets go where the object was picked
    /// up and backs off to the pregrasp.
    fn put_back(&mut self, grip: Grip, since_grasp: usize, grasp_path: &[Vec<f64>]) {
        self.phase = Phase::Release;
        let back: Vec<Vec<f64>> = self.log.executed[since_grasp..].iter().rev().skip(1).map(|e| e.q.clone()).collect();
        let start = self.log.executed[since_grasp - 1].q.clone();
        let mut path = back;
        path.push(start);
        self.execute(&path, Some(&grip), None);
        let back: Vec<Vec<f64>> = grasp_path.iter().rev().skip(1).cloned().collect();
        self.execute(&back, None, Some(grip.id));
    }

    fn attempt(&mut self) -> Result<(Outcome, bool)> {
        let pairs = self.timed(Phase::ReachPregrasp, |e| e.grasp_goals())?;
        if pairs.is_empty() {
            return Ok((Outcome::NoGrasp, false));
        }
        let goals: Vec<Vec<f64>> = pairs.iter().map(|(p, _)| p.clone()).collect();
        let (reached, _) = self.timed(Phase::ReachPregrasp, |e| e.reach(&goals, None, None))?;
        if !reached {
            return Ok((Outcome::ReachFailed, false));
        }
        let at = pairs.iter().find(|(p, _)| p == &self.q).map(|(_, a)| a.clone()).expect("reach ends on a goal");
        let pre_q = self.q.clone();
        let target = self.target;
        let moved = self.timed(Phase::Grasp, |e| e.scripted(&at, None, Some(target)))?;
        if !moved {
            return Ok((Outcome::GraspBlocked, false));
        }
        let mut grasp_path = interpolate(&pre_q, &at, self.cfg.reach.mppi.resolution);
        grasp_path.insert(0, pre_q);
        // attach
        let bodies = self.scene.bodies()?;
        let obj = bodies.object(target).expect("target exists");
        let tool = self.robot.fk(&self.q)?.tool;
        let cloud = self.held_cloud(target, &obj.pose, &obj.shape)?;
        self.held_keys += 1;
        let grip = Grip {
            held: Held {
                probe: Probe { key: 1 << 32 | self.held_keys, mesh: obj.shape.clone(), cloud },
                in_tool: tool.inverse().compose(&obj.pose),
            },
            id: target,
        };
        let since_grasp = self.log.executed.len();
        let lifted = RigidTransform::new(tool.rotation, tool.translation + Vec3::new(0.0, 0.0, self.cfg.lift_height));
        let sub = u64::from(target) << 8 | u64::from(self.attempt);
        let lift_ok = match self.ik(&lifted, &[self.q.clone()], "ik-lift", sub) {
            Some(up) => self.timed(Phase::Lift, |e| e.scripted(&up, Some(&grip), None))?,
            None => false,
        };
        if !lift_ok {
            let back: Vec<Vec<f64>> = grasp_path.iter().rev().skip(1).cloned().collect();
            self.phase = Phase::Release;
            self.execute(&back, None, Some(target));
            return Ok((Outcome::LiftFailed, false));
        }
        let placements = self.timed(Phase::Place, |e| -> Result<_> {
            e.observe(Some(target))?;
            let body = Body { robot: e.robot, links: &e.links, held: Some(&grip.held) };
            sample_placements(&body, e.predictor, &e.q, e.zone, &e.cfg.placement, &e.cfg.ik, derive_seed(e.seed, "place", sub))
        })?;
        if placements.goals.is_empty() {
            self.put_back(grip, since_grasp, &grasp_path);
            return Ok((Outcome::NoPlacement, true));
        }
        let goals: Vec<Vec<f64>> = placements.goals.iter().map(|g| g.q.clone()).collect();
        let (reached, _) = self.timed(Phase::Place, |e| e.reach(&goals, Some(&grip), Some(target)))?;
        if !reached {
            self.put_back(grip, since_grasp, &grasp_path);
            return Ok((Outcome::PlaceFailed, true));
        }
        // release and back off along the approach axis
        self.timed(Phase::Release, |e| -> Result<()> {
            let tool = e.robot.fk(&e.q)?.tool;
            let pose = tool.compose(&grip.held.in_tool);
            if let Some(o) = e.scene.objects.iter_mut().find(|o| o.id == target) {
                o.pose = pose;
            }
            let snap: Vec<(u32, RigidTransform)> = e.scene.objects.iter().map(|o| (o.id, o.pose)).collect();
            e.log.snapshots.push(snap);
            let retreat = tool.compose(&RigidTransform::from_translation(Vec3::new(0.0, 0.0, -PREGRASP_OFFSET)));
            if let Some(up) = e.ik(&retreat, &[e.q.clone()], "ik-retreat", sub) {
                e.scripted(&up, None, Some(target))?;
            }
            Ok(())
        })?;
        Ok((Outcome::Placed, true))
    }
}

/// Runs the pick-and-place state machine over every object in random order,
/// with up to `attempts` tries per object. Objects are attached kinematically
/// while held; a failed placement returns the object to where it was picked.
pub fn run_rearrangement(
    robot: &RobotModel,
    scenario: &Scenario,
    cfg: &PolicyConfig,
    predictor: &mut dyn CollisionPredictor,
    seed: u64,
    clock: &dyn Fn() -> f64,
) -> Result<EpisodeLog> {
    cfg.reach.mppi.validate(robot.dof())?;
    scenario.zone.validate()?;
    let mut targets: Vec<u32> =
        scenario.scene.objects.iter().map(|o| o.id).filter(|id| !scenario.fixed.contains(id)).collect();
    targets.shuffle(&mut substream(seed, "targets", 0));
    let snapshot: Vec<(u32, RigidTransform)> = scenario.scene.objects.iter().map(|o| (o.id, o.pose)).collect();
    let log = EpisodeLog {
        predictor: predictor.name(),
        targets: targets.clone(),
        attempts: Vec::new(),
        ticks: Vec::new(),
        executed: Vec::new(),
        snapshots: alloc::vec![snapshot],
        phase_seconds: Phase::ALL.iter().map(|&p| (p, 0.0)).collect(),
        grasps: 0,
        placements: 0,
        seconds: 0.0,
    };
    let t0 = clock();
    let mut ep = Episode {
        robot,
        cfg,
        zone: &scenario.zone,
        links: robot_probes(robot, cfg.link_points, derive_seed(seed, "links", 0))?,
        predictor,
        clock,
        scene: scenario.scene.clone(),
        render: None,
        q: robot.home.clone(),
        rng: substream(seed, "mppi", 0),
        seed,
        held_keys: 0,
        log,
        target: 0,
        attempt: 0,
        phase: Phase::ReachPregrasp,
    };
    for &target in &targets {
        for attempt in 0..cfg.attempts {
            ep.target = target;
            ep.attempt = attempt;
            let ticks_before = ep.log.ticks.len();
            let (outcome, grasped) = ep.attempt()?;
            let ticks = ep.log.ticks.len() - ticks_before;
            ep.log.grasps += u32::from(grasped);
            ep.log.placements += u32::from(outcome == Outcome::Placed);
            ep.log.attempts.push(AttemptRecord { target, attempt, outcome, grasped, ticks });
            if outcome == Outcome::Placed {
                break;
            }
        }
    }
    ep.log.seconds = clock() - t0;
    Ok(ep.log)
}

/// Tall box wall along the x axis at `y = 0`, centered at `x`, splitting the
/// table into two halves.
pub fn barrier_wall(id: u32, height: f64, length: f64, x: f64) -> crate::scene::SceneObject {
    use crate::scene::{ShapeInstance, ShapeKind};
    let shape = ShapeInstance { kind: ShapeKind::Box, dims: [length, 0.04, height], resolution: 8 };
    let canonical = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.5 * height));
    let pose = RigidTransform::from_translation(Vec3::new(x, 0.0, 0.5 * height));
    crate::scene::SceneObject { id, shape, canonical, pose }
}

/// Where the arm stands relative to the table center: just off the near
/// edge, base at table height.
pub const TABLE_ROBOT_BASE: [f64; 3] = [-0.6, 0.0, 0.0];

pub fn tabletop_robot() -> RobotModel {
    RobotModel::panda(RigidTransform::from_translation(Vec3::from_array(TABLE_ROBOT_BASE)))
}
