use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::predict::{CollisionPredictor, Probe};
use super::robot::RobotModel;
use crate::error::{Error, Result};
use crate::geometry::RigidTransform;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MppiConfig {
    /// Trajectories per tick (T).
    pub samples: usize,
    /// Steps per trajectory (H).
    pub horizon: usize,
    /// Diagonal of the direction-noise covariance; one value applies to
    /// every joint.
    pub sigma: Vec<f64>,
    /// Largest joint-space step between waypoints (rad).
    pub max_step: f64,
    /// Joint-space spacing of collision checks between waypoints (rad).
    pub resolution: f64,
}

impl Default for MppiConfig {
    fn default() -> Self {
        MppiConfig { samples: 32, horizon: 10, sigma: alloc::vec![0.3], max_step: 0.1, resolution: 0.05 }
    }
}

impl MppiConfig {
    pub fn validate(&self, dof: usize) -> Result<()> {
        if self.samples == 0 || self.horizon == 0 {
            return Err(Error::invalid("MPPI needs at least one sample and one step"));
        }
        if !(self.sigma.len() == 1 || self.sigma.len() == dof) {
            return Err(Error::invalid(alloc::format!("sigma needs 1 or {dof} entries, got {}", self.sigma.len())));
        }
        if self.sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::invalid("sigma entries must be finite and non-negative"));
        }
        if !(self.max_step > 0.0 && self.resolution > 0.0) {
            return Err(Error::invalid("max_step and resolution must be positive"));
        }
        Ok(())
    }

    fn sigma_at(&self, j: usize) -> f64 {
        if self.sigma.len() == 1 {
            self.sigma[0]
        } else {
            self.sigma[j]
        }
    }
}

/// Waypoints starting at the current configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTrajectory {
    pub waypoints: Vec<Vec<f64>>,
}

impl JointTrajectory {
    pub fn stationary(q: &[f64], len: usize) -> Self {
        JointTrajectory { waypoints: alloc::vec![q.to_vec(); len] }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn last(&self) -> &[f64] {
        self.waypoints.last().expect("trajectories hold the start configuration")
    }
}

pub fn joint_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) -> bool {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 && n.is_finite() {
        v.iter_mut().for_each(|x| *x /= n);
        true
    } else {
        false
    }
}

/// `samples` trajectories of `horizon` steps from `q` toward `goal`. Sample 0
/// follows the straight line; the others follow `normalize(d + ε)` with
/// `ε ~ N(0, diag(sigma))`. Every step is clipped to the joint limits.
pub fn sample_trajectories(robot: &RobotModel, q: &[f64], goal: &[f64], cfg: &MppiConfig, rng: &mut Rng) -> Result<Vec<JointTrajectory>> {
    cfg.validate(robot.dof())?;
    robot.check(q)?;
    if goal.len() != q.len() {
        return Err(Error::invalid("goal and start differ in length"));
    }
    let mut d: Vec<f64> = goal.iter().zip(q).map(|(g, s)| g - s).collect();
    let dist = joint_distance(goal, q);
    if !normalize(&mut d) {
        return Ok(alloc::vec![JointTrajectory::stationary(q, cfg.horizon + 1); cfg.samples]);
    }
    let step = (dist / cfg.horizon as f64).min(cfg.max_step);
    let mut out = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let mut dir = d.clone();
        if i > 0 {
            let mut perturbed = false;
            for (j, v) in dir.iter_mut().enumerate() {
                let e: f64 = rng.sample(StandardNormal);
                let dv = e * cfg.sigma_at(j).sqrt();
                perturbed |= dv != 0.0;
                *v += dv;
            }
            if perturbed && !normalize(&mut dir) {
                dir.clone_from(&d);
            }
        }
        let mut w = q.to_vec();
        let mut waypoints = Vec::with_capacity(cfg.horizon + 1);
        waypoints.push(w.clone());
        for _ in 0..cfg.horizon {
            for (v, dv) in w.iter_mut().zip(&dir) {
                *v += step * dv;
            }
            robot.clamp(&mut w);
            waypoints.push(w.clone());
        }
        out.push(JointTrajectory { waypoints });
    }
    Ok(out)
}

/// Configurations strictly between `a` and `b` at spacing at most `resolution`,
/// followed by `b`.
pub fn interpolate(a: &[f64], b: &[f64], resolution: f64) -> Vec<Vec<f64>> {
    let n = ((joint_distance(a, b) / resolution).ceil() as usize).max(1);
    (1..=n)
        .map(|k| {
            if k == n {
                return b.to_vec();
            }
            let s = k as f64 / n as f64;
            a.iter().zip(b).map(|(x, y)| x + (y - x) * s).collect()
        })
        .collect()
}

/// `C(q) = min over goals of ‖q − g‖₂`.
pub fn goal_cost(q: &[f64], goals: &[Vec<f64>]) -> f64 {
    goals.iter().map(|g| joint_distance(q, g)).fold(f64::INFINITY, f64::min)
}

/// The held object: its probe and its pose in the tool frame.
#[derive(Debug, Clone)]
pub struct Held {
    pub probe: Probe,
    pub in_tool: RigidTransform,
}

/// Everything that must stay clear of the scene along a path.
pub struct Body<'a> {
    pub robot: &'a RobotModel,
    pub links: &'a [Probe],
    pub held: Option<&'a Held>,
}

impl Body<'_> {
    /// Predicted collision state of each configuration: capsule self-collision,
    /// every link against the scene and, when holding, the object against the
    /// scene. All scene queries go to the predictor as one batch.
    pub fn check(&self, predictor: &mut dyn CollisionPredictor, configs: &[&[f64]]) -> Result<Vec<bool>> {
        let mut probes: Vec<&Probe> = self.links.iter().collect();
        let held_slot = self.held.map(|h| {
            probes.push(&h.probe);
            probes.len() - 1
        });
        let per = probes.len();
        let mut queries = Vec::with_capacity(configs.len() * per);
        let mut colliding = Vec::with_capacity(configs.len());
        for q in configs {
            let k = self.robot.fk_unchecked(q);
            for (i, pose) in self.robot.link_poses(&k).into_iter().enumerate() {
                queries.push((i, pose));
            }
            if let (Some(slot), Some(h)) = (held_slot, self.held) {
                queries.push((slot, k.tool.compose(&h.in_tool)));
            }
            colliding.push(self.robot.self_collision(q));
        }
        let hits = predictor.collides(&probes, &queries)?;
        for (c, chunk) in colliding.iter_mut().zip(hits.chunks(per.max(1))) {
            *c |= chunk.iter().any(|&h| h);
        }
        Ok(colliding)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Current configuration through the minimum-cost collision-free waypoint.
    pub trajectory: JointTrajectory,
    pub cost: f64,
    /// Sample the trajectory came from.
    pub index: usize,
    /// No progress possible: the best choice is to stay put away from every
    /// goal.
    pub stuck: bool,
    /// Configurations checked this tick.
    pub checks: usize,
}

/// Checks every waypoint and the interpolated configurations between them,
/// truncates each trajectory before its first collision, clips it to its
/// cheapest remaining waypoint and returns the cheapest clipped trajectory.
/// The start configuration is taken as collision-free. Ties go to the lower
/// sample index and then to the earlier waypoint.
pub fn evaluate_and_select(
    trajectories: &[JointTrajectory],
    goals: &[Vec<f64>],
    body: &Body<'_>,
    predictor: &mut dyn CollisionPredictor,
    resolution: f64,
) -> Result<Selection> {
    if goals.is_empty() {
        return Err(Error::invalid("empty goal set"));
    }
    if trajectories.iter().any(JointTrajectory::is_empty) || trajectories.is_empty() {
        return Err(Error::invalid("no trajectories"));
    }
    // (trajectory, waypoint) owning each checked configuration
    let mut owner: Vec<(usize, usize)> = Vec::new();
    let mut configs: Vec<Vec<f64>> = Vec::new();
    for (t, traj) in trajectories.iter().enumerate() {
        for (k, pair) in traj.waypoints.windows(2).enumerate() {
            for c in interpolate(&pair[0], &pair[1], resolution) {
                owner.push((t, k + 1));
                configs.push(c);
            }
        }
    }
    let refs: Vec<&[f64]> = configs.iter().map(Vec::as_slice).collect();
    let hits = body.check(predictor, &refs)?;
    // first colliding waypoint per trajectory
    let mut first_hit: Vec<usize> = trajectories.iter().map(JointTrajectory::len).collect();
    for (&(t, k), &h) in owner.iter().zip(&hits) {
        if h && k < first_hit[t] {
            first_hit[t] = k;
        }
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for (t, traj) in trajectories.iter().enumerate() {
        for (k, w) in traj.waypoints.iter().enumerate().take(first_hit[t]) {
            let c = goal_cost(w, goals);
            if best.is_none_or(|(bc, _, _)| c < bc) {
                best = Some((c, t, k));
            }
        }
    }
    let (cost, index, k) = best.expect("every trajectory keeps its start");
    let trajectory = JointTrajectory { waypoints: trajectories[index].waypoints[..=k].to_vec() };
    Ok(Selection { stuck: k == 0 && cost > 0.0, trajectory, cost, index, checks: configs.len() })
}
