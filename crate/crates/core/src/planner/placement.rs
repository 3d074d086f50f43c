use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::ik::{inverse_kinematics, IkConfig};
use super::mppi::{Body, Held};
use super::predict::CollisionPredictor;
use super::robot::RobotModel;
use crate::error::{Error, Result};
use crate::geometry::RigidTransform;
use crate::math::Vec3;
use crate::rng::{substream, Rng};

/// Region of the table top where objects may be released: a simple polygon in
/// world xy, swept from the table surface up to `height`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementZone {
    pub polygon: Vec<[f64; 2]>,
    pub height: f64,
}

impl PlacementZone {
    pub fn rectangle(min: [f64; 2], max: [f64; 2], height: f64) -> Self {
        PlacementZone { polygon: alloc::vec![min, [max[0], min[1]], max, [min[0], max[1]]], height }
    }

    pub fn validate(&self) -> Result<()> {
        if self.polygon.len() < 3 || self.area() <= 0.0 {
            return Err(Error::invalid("placement zone needs a polygon with positive area"));
        }
        if !(self.height > 0.0) {
            return Err(Error::invalid("placement zone height must be positive"));
        }
        Ok(())
    }

    fn area(&self) -> f64 {
        let n = self.polygon.len();
        0.5 * (0..n)
            .map(|i| {
                let (a, b) = (self.polygon[i], self.polygon[(i + 1) % n]);
                a[0] * b[1] - b[0] * a[1]
            })
            .sum::<f64>()
            .abs()
    }

    /// Even-odd rule.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let n = self.polygon.len();
        let mut inside = false;
        for i in 0..n {
            let (a, b) = (self.polygon[i], self.polygon[(i + n - 1) % n]);
            if (a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0] {
                inside = !inside;
            }
        }
        inside
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.polygon {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        (lo, hi)
    }

    /// `n` points uniform over the zone volume.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Vec<Vec3> {
        let (lo, hi) = self.bounds();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let x = rng.random_range(lo[0]..=hi[0]);
            let y = rng.random_range(lo[1]..=hi[1]);
            let z = self.height * rng.random::<f64>();
            if self.contains(x, y) {
                out.push(Vec3::new(x, y, z));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlacementConfig {
    /// Candidate points per call (K).
    pub samples: usize,
    /// Goals returned, lowest first.
    pub goals: usize,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        PlacementConfig { samples: 128, goals: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Where the bottom center of the object's world box would sit.
    pub point: Vec3,
    pub object_pose: RigidTransform,
    pub tool_pose: RigidTransform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementGoal {
    /// Index into [`Placements::candidates`].
    pub candidate: usize,
    pub q: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placements {
    /// Sorted by ascending height.
    pub candidates: Vec<Candidate>,
    /// Predicted object collision per candidate.
    pub colliding: Vec<bool>,
    pub goals: Vec<PlacementGoal>,
}

/// Object pose with the held orientation `rotation` whose world bounding box
/// has its bottom center at `point`.
fn pose_at(held: &Held, rotation: &crate::math::Mat3, point: Vec3) -> RigidTransform {
    let verts = held.probe.mesh.mesh.vertices();
    let mut lo = Vec3::splat(f64::INFINITY);
    let mut hi = Vec3::splat(f64::NEG_INFINITY);
    for v in verts {
        let r = rotation.mul_vec(*v);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    let anchor = Vec3::new(0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y), lo.z);
    RigidTransform::new(*rotation, point - anchor)
}

/// IK solution for a candidate, checked collision-free for the arm and the
/// object. Deterministic per `(seed, candidate index)`.
fn feasible(
    body: &Body<'_>,
    predictor: &mut dyn CollisionPredictor,
    ik: &IkConfig,
    q: &[f64],
    tool: &RigidTransform,
    seed: u64,
    index: usize,
) -> Result<Option<Vec<f64>>> {
    let mut rng = substream(seed, "place-ik", index as u64);
    let Some(sol) = inverse_kinematics(body.robot, tool, &[q.to_vec()], ik, &mut rng) else {
        return Ok(None);
    };
    let clear = !body.check(predictor, &[&sol])?[0];
    Ok(clear.then_some(sol))
}

fn candidates(robot: &RobotModel, q: &[f64], held: &Held, zone: &PlacementZone, cfg: &PlacementConfig, seed: u64) -> Vec<Candidate> {
    let mut rng = substream(seed, "place-points", 0);
    let mut points = zone.sample(cfg.samples, &mut rng);
    points.sort_by(|a, b| a.z.total_cmp(&b.z));
    let rotation = robot.fk_unchecked(q).tool.compose(&held.in_tool).rotation;
    let tool_in_object = held.in_tool.inverse();
    points
        .into_iter()
        .map(|point| {
            let object_pose = pose_at(held, &rotation, point);
            Candidate { point, object_pose, tool_pose: object_pose.compose(&tool_in_object) }
        })
        .collect()
}

/// Samples points in the zone, sorts them by height, asks the predictor
/// which object poses are free (keeping the current in-hand orientation) and
/// returns the lowest ones that also admit a collision-free arm
/// configuration.
pub fn sample_placements(
    body: &Body<'_>,
    predictor: &mut dyn CollisionPredictor,
    q: &[f64],
    zone: &PlacementZone,
    cfg: &PlacementConfig,
    ik: &IkConfig,
    seed: u64,
) -> Result<Placements> {
    zone.validate()?;
    let held = body.held.ok_or_else(|| Error::invalid("placement needs a held object"))?;
    let candidates = candidates(body.robot, q, held, zone, cfg, seed);
    let poses: Vec<(usize, RigidTransform)> = candidates.iter().map(|c| (0, c.object_pose)).collect();
    let colliding = predictor.collides(&[&held.probe], &poses)?;
    let mut goals = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        if goals.len() >= cfg.goals {
            break;
        }
        if colliding[i] {
            continue;
        }
        if let Some(sol) = feasible(body, predictor, ik, q, &c.tool_pose, seed, i)? {
            goals.push(PlacementGoal { candidate: i, q: sol });
        }
    }
    Ok(Placements { candidates, colliding, goals })
}

/// Re-evaluates every candidate from scratch and reports the indices of the
/// collision-free, IK-feasible ones in height order.
pub fn feasible_candidates(
    body: &Body<'_>,
    predictor: &mut dyn CollisionPredictor,
    q: &[f64],
    placements: &Placements,
    ik: &IkConfig,
    seed: u64,
) -> Result<Vec<usize>> {
    let held = body.held.ok_or_else(|| Error::invalid("placement needs a held object"))?;
    let mut out = Vec::new();
    for (i, c) in placements.candidates.iter().enumerate() {
        let free = !predictor.collides(&[&held.probe], &[(0, c.object_pose)])?[0];
        if free && feasible(body, predictor, ik, q, &c.tool_pose, seed, i)?.is_some() {
            out.push(i);
        }
    }
    Ok(out)
}
