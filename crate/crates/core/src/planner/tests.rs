use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::{Rng as _, SeedableRng};

use super::*;
use crate::collision::{in_collision_solid, PosedBody};
use crate::geometry::RigidTransform;
use crate::math::Vec3;
use crate::rng::Rng;
use crate::scene::{CameraConfig, SceneObject, SceneState, ShapeInstance, ShapeKind};

fn cuboid(id: u32, dims: [f64; 3], x: f64, y: f64) -> SceneObject {
    let shape = ShapeInstance { kind: ShapeKind::Box, dims, resolution: 8 };
    let canonical = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.5 * dims[2]));
    let pose = RigidTransform::from_translation(Vec3::new(x, y, 0.5 * dims[2]));
    SceneObject { id, shape, canonical, pose }
}

fn table_with(objects: Vec<SceneObject>) -> SceneState {
    let mut s = SceneState::empty([1.0, 1.0], 0.02, CameraConfig::default().nominal().unwrap());
    s.objects = objects;
    s
}

fn observed(scene: &SceneState) -> ObservedScene {
    let bodies = scene.bodies().unwrap();
    ObservedScene { bodies: bodies.all().cloned().collect(), cloud: scene.render(), version: 0 }
}

fn oracle_for(scene: &SceneState) -> OraclePredictor {
    let mut p = OraclePredictor::new();
    p.observe(&observed(scene)).unwrap();
    p
}

/// Independent per-configuration check with fresh bodies.
fn oracle_clear(robot: &RobotModel, scene: &SceneState, q: &[f64]) -> bool {
    let bodies = scene.bodies().unwrap();
    let k = robot.fk(q).unwrap();
    !robot.self_collision(q)
        && robot.links.iter().zip(robot.link_poses(&k)).all(|(l, pose)| {
            let b = PosedBody::new(l.mesh.clone(), pose);
            bodies.all().all(|o| !in_collision_solid(&b, o))
        })
}

fn no_noise() -> MppiConfig {
    MppiConfig { samples: 4, horizon: 10, sigma: alloc::vec![0.0], ..MppiConfig::default() }
}

#[test]
fn zero_noise_gives_identical_straight_lines() {
    let robot = tabletop_robot();
    let q = robot.home.clone();
    let goal: Vec<f64> = q.iter().map(|v| v + 0.05).collect();
    let trajs = sample_trajectories(&robot, &q, &goal, &no_noise(), &mut Rng::seed_from_u64(1)).unwrap();
    assert_eq!(trajs.len(), 4);
    for t in &trajs {
        assert_eq!(t, &trajs[0]);
        assert_eq!(t.len(), 11);
        assert!(joint_distance(t.last(), &goal) < 1e-12);
    }
}

#[test]
fn start_at_goal_is_stationary() {
    let robot = tabletop_robot();
    let q = robot.home.clone();
    let trajs = sample_trajectories(&robot, &q, &q, &MppiConfig::default(), &mut Rng::seed_from_u64(1)).unwrap();
    assert!(trajs.iter().all(|t| t.waypoints.iter().all(|w| w == &q)));
    assert_eq!(goal_cost(&q, &[q.clone()]), 0.0);
}

#[test]
fn waypoints_respect_limits_and_step() {
    let robot = tabletop_robot();
    let mut rng = Rng::seed_from_u64(2);
    let cfg = MppiConfig::default();
    let goal = robot.upper();
    let mut q = robot.upper();
    q[0] -= 0.3;
    q[3] = robot.lower()[3];
    let trajs = sample_trajectories(&robot, &q, &goal, &cfg, &mut rng).unwrap();
    for t in &trajs {
        for w in &t.waypoints {
            assert!(robot.within_limits(w, 0.0));
        }
        for pair in t.waypoints.windows(2) {
            assert!(joint_distance(&pair[0], &pair[1]) <= cfg.max_step + 1e-12);
        }
    }
}

#[test]
fn mean_direction_follows_goal() {
    let robot = tabletop_robot();
    let q = robot.home.clone();
    let goal: Vec<f64> = q.iter().enumerate().map(|(i, v)| v + if i % 2 == 0 { 0.4 } else { -0.3 }).collect();
    let cfg = MppiConfig { samples: 10_000, horizon: 1, max_step: 1e-3, ..MppiConfig::default() };
    let trajs = sample_trajectories(&robot, &q, &goal, &cfg, &mut Rng::seed_from_u64(3)).unwrap();
    let mut mean = alloc::vec![0.0; q.len()];
    for t in &trajs[1..] {
        for (m, (a, b)) in mean.iter_mut().zip(t.waypoints[1].iter().zip(&q)) {
            *m += a - b;
        }
    }
    let d: Vec<f64> = goal.iter().zip(&q).map(|(g, s)| g - s).collect();
    let dot: f64 = mean.iter().zip(&d).map(|(a, b)| a * b).sum();
    let cos = dot / (joint_distance(&mean, &alloc::vec![0.0; 7]) * joint_distance(&d, &alloc::vec![0.0; 7]));
    assert!(cos.min(1.0).acos().to_degrees() < 2.0);
}

#[test]
fn free_space_reaches_goal() {
    let robot = tabletop_robot();
    let scene = table_with(Vec::new());
    let mut oracle = oracle_for(&scene);
    let links = robot_probes(&robot, 64, 0).unwrap();
    let body = Body { robot: &robot, links: &links, held: None };
    let q = robot.home.clone();
    let goal: Vec<f64> = q.iter().zip([0.3, 0.2, -0.2, 0.3, 0.1, -0.2, 0.2]).map(|(a, b)| a + b).collect();
    let cfg = MppiConfig::default();
    let trajs = sample_trajectories(&robot, &q, &goal, &cfg, &mut Rng::seed_from_u64(4)).unwrap();
    let sel = evaluate_and_select(&trajs, &[goal.clone()], &body, &mut oracle, cfg.resolution).unwrap();
    assert!(!sel.stuck);
    assert!(joint_distance(sel.trajectory.last(), &goal) <= cfg.max_step);
}

/// A wall right in front of the arm and a goal behind it.
fn wall_scene() -> (SceneState, Vec<f64>, Vec<f64>) {
    let robot = tabletop_robot();
    let scene = table_with(alloc::vec![barrier_wall(1, 0.3, 0.6, -0.1)]);
    let mut rng = Rng::seed_from_u64(9);
    let cfg = IkConfig::default();
    let down = crate::math::Mat3::from_cols(Vec3::X, -Vec3::Y, -Vec3::Z);
    let pose = |y: f64| RigidTransform::new(down, Vec3::new(-0.15, y, 0.12));
    let a = inverse_kinematics(&robot, &pose(-0.2), &[robot.home.clone()], &cfg, &mut rng).unwrap();
    let b = inverse_kinematics(&robot, &pose(0.2), &[a.clone()], &cfg, &mut rng).unwrap();
    (scene, a, b)
}

#[test]
fn selected_waypoints_clear_a_wall() {
    let robot = tabletop_robot();
    let (scene, start, goal) = wall_scene();
    assert!(oracle_clear(&robot, &scene, &start) && oracle_clear(&robot, &scene, &goal));
    let mut oracle = oracle_for(&scene);
    let links = robot_probes(&robot, 64, 0).unwrap();
    let body = Body { robot: &robot, links: &links, held: None };
    let cfg = MppiConfig::default();
    let mut rng = Rng::seed_from_u64(5);
    let mut q = start.clone();
    for _ in 0..5 {
        let trajs = sample_trajectories(&robot, &q, &goal, &cfg, &mut rng).unwrap();
        let sel = evaluate_and_select(&trajs, &[goal.clone()], &body, &mut oracle, cfg.resolution).unwrap();
        for pair in sel.trajectory.waypoints.windows(2) {
            for c in interpolate(&pair[0], &pair[1], cfg.resolution) {
                assert!(oracle_clear(&robot, &scene, &c));
            }
        }
        // selection never does worse than the truncated straight line
        let straight = &trajs[0];
        let mut best_line = goal_cost(&q, &[goal.clone()]);
        'line: for pair in straight.waypoints.windows(2) {
            for c in interpolate(&pair[0], &pair[1], cfg.resolution) {
                if !oracle_clear(&robot, &scene, &c) {
                    break 'line;
                }
            }
            best_line = best_line.min(goal_cost(&pair[1], &[goal.clone()]));
        }
        assert!(sel.cost <= best_line + 1e-12);
        q = sel.trajectory.last().to_vec();
    }
}

struct Wall;

impl CollisionPredictor for Wall {
    fn name(&self) -> alloc::string::String {
        "wall".into()
    }
    fn observe(&mut self, _: &ObservedScene) -> crate::Result<()> {
        Ok(())
    }
    fn collides(&mut self, _: &[&Probe], queries: &[(usize, RigidTransform)]) -> crate::Result<Vec<bool>> {
        Ok(alloc::vec![true; queries.len()])
    }
}

#[test]
fn everything_blocked_is_stuck() {
    let robot = tabletop_robot();
    let links = robot_probes(&robot, 64, 0).unwrap();
    let body = Body { robot: &robot, links: &links, held: None };
    let q = robot.home.clone();
    let goal: Vec<f64> = q.iter().map(|v| v + 0.2).collect();
    let cfg = MppiConfig::default();
    let trajs = sample_trajectories(&robot, &q, &goal, &cfg, &mut Rng::seed_from_u64(1)).unwrap();
    let sel = evaluate_and_select(&trajs, &[goal], &body, &mut Wall, cfg.resolution).unwrap();
    assert!(sel.stuck);
    assert_eq!(sel.trajectory.waypoints, alloc::vec![q]);
}

fn holding(dims: [f64; 3]) -> Held {
    let obj = cuboid(99, dims, 0.0, 0.0);
    let body = PosedBody::from_mesh(obj.shape.mesh(), RigidTransform::IDENTITY).unwrap();
    // object hangs just below the tool point, axis-aligned in the tool frame
    let in_tool = RigidTransform::from_translation(Vec3::new(0.0, 0.0, 0.5 * dims[2]));
    let cloud = crate::geometry::sample_surface(&obj.shape.mesh(), 256, 1).unwrap();
    Held { probe: Probe { key: 1 << 40, mesh: body.shape, cloud }, in_tool }
}

fn grasp_pose_q(robot: &RobotModel) -> Vec<f64> {
    let down = crate::math::Mat3::from_cols(Vec3::X, -Vec3::Y, -Vec3::Z);
    let pose = RigidTransform::new(down, Vec3::new(-0.2, 0.2, 0.3));
    inverse_kinematics(robot, &pose, &[robot.home.clone()], &IkConfig::default(), &mut Rng::seed_from_u64(3)).unwrap()
}

#[test]
fn bare_table_placement_rests_on_table() {
    let robot = tabletop_robot();
    let q = grasp_pose_q(&robot);
    let dims = [0.04, 0.05, 0.06];
    let held = holding(dims);
    let scene = table_with(Vec::new());
    let mut oracle = oracle_for(&scene);
    let links = robot_probes(&robot, 64, 0).unwrap();
    let body = Body { robot: &robot, links: &links, held: Some(&held) };
    let zone = PlacementZone::rectangle([-0.25, 0.1], [-0.1, 0.3], 0.2);
    let cfg = PlacementConfig { samples: 200, goals: 1 };
    let out = sample_placements(&body, &mut oracle, &q, &zone, &cfg, &IkConfig::default(), 7).unwrap();
    assert_eq!(out.goals.len(), 1);
    let c = &out.candidates[out.goals[0].candidate];
    // the bottom of the object sits within one sample spacing of the table
    assert!(c.point.z > 0.0 && c.point.z < 0.01, "{}", c.point.z);
    let rotated_half = {
        let r = c.object_pose.rotation;
        let e = Vec3::new(dims[0], dims[1], dims[2]) * 0.5;
        r.row(2).x.abs() * e.x + r.row(2).y.abs() * e.y + r.row(2).z.abs() * e.z
    };
    assert!((c.object_pose.translation.z - (c.point.z + rotated_half)).abs() < 1e-9);
    let tool = robot.fk(&out.goals[0].q).unwrap().tool;
    assert!((tool.compose(&held.in_tool).translation - c.object_pose.translation).norm() < 2e-3);
}

#[test]
fn covered_zone_has_no_placement() {
    let robot = tabletop_robot();
    let q = grasp_pose_q(&robot);
    let held = holding([0.04, 0.04, 0.04]);
    let scene = table_with(alloc::vec![cuboid(1, [0.3, 0.3, 0.4], -0.15, 0.2)]);
    let mut oracle = oracle_for(&scene);
    let links = robot_probes(&robot, 64, 0).unwrap();
    let body = Body { robot: &robot, links: &links, held: Some(&held) };
    let zone = PlacementZone::rectangle([-0.25, 0.1], [-0.05, 0.3], 0.2);
    let out = sample_placements(&body, &mut oracle, &q, &zone, &PlacementConfig::default(), &IkConfig::default(), 7).unwrap();
    assert!(out.goals.is_empty());
    assert!(out.colliding.iter().all(|&c| c));
}

#[test]
fn placement_goal_is_lowest_feasible() {
    let robot = tabletop_robot();
    let q = grasp_pose_q(&robot);
    let held = holding([0.04, 0.04, 0.05]);
    let scene = table_with(alloc::vec![cuboid(1, [0.08, 0.1, 0.05], -0.2, 0.15), cuboid(2, [0.06, 0.06, 0.12], -0.1, 0.25)]);
    let mut oracle = oracle_for(&scene);
    let links = robot_probes(&robot, 64, 0).unwrap();
    let body = Body { robot: &robot, links: &links, held: Some(&held) };
    let zone = PlacementZone::rectangle([-0.25, 0.1], [-0.05, 0.3], 0.15);
    let cfg = PlacementConfig { samples: 48, goals: 1 };
    for seed in 0..3 {
        let out = sample_placements(&body, &mut oracle, &q, &zone, &cfg, &IkConfig::default(), seed).unwrap();
        let all = feasible_candidates(&body, &mut oracle, &q, &out, &IkConfig::default(), seed).unwrap();
        let got: Vec<usize> = out.goals.iter().map(|g| g.candidate).collect();
        assert_eq!(got, all.iter().copied().take(1).collect::<Vec<_>>());
        assert!(out.candidates.windows(2).all(|w| w[0].point.z <= w[1].point.z));
    }
}

#[test]
fn zone_polygon_membership() {
    let zone = PlacementZone { polygon: alloc::vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], height: 0.1 };
    assert!(zone.contains(0.2, 0.2));
    assert!(!zone.contains(0.8, 0.8));
    let mut rng = Rng::seed_from_u64(1);
    for p in zone.sample(200, &mut rng) {
        assert!(p.x + p.y <= 1.0 && p.z >= 0.0 && p.z <= 0.1);
    }
    assert!(PlacementZone { polygon: alloc::vec![[0.0, 0.0], [1.0, 0.0]], height: 0.1 }.validate().is_err());
}

fn no_clock() -> f64 {
    0.0
}

#[test]
fn single_box_is_picked_and_placed() {
    let robot = tabletop_robot();
    let scene = table_with(alloc::vec![cuboid(1, [0.04, 0.04, 0.06], -0.2, -0.2)]);
    let scenario = Scenario { scene: scene.clone(), zone: PlacementZone::rectangle([-0.3, 0.15], [-0.1, 0.3], 0.15), fixed: vec![] };
    let cfg = PolicyConfig { link_points: 64, ..PolicyConfig::default() };
    let log = run_rearrangement(&robot, &scenario, &cfg, &mut OraclePredictor::new(), 3, &no_clock).unwrap();
    assert_eq!((log.grasps, log.placements), (1, 1), "{:?}", log.attempts);
    let audit = audit_episode(&robot, &scene, &log).unwrap();
    assert!(audit.checked > 0 && audit.failures.is_empty());
    let last = log.scene_at(&scene, log.snapshots.len() - 1);
    let p = last.objects[0].pose.translation;
    assert!(scenario.zone.contains(p.x, p.y));
    // never grasp while holding, never carry through the grasp phase
    for e in &log.executed {
        match e.phase {
            Phase::ReachPregrasp | Phase::Grasp => assert!(e.held.is_none()),
            Phase::Lift | Phase::Place => assert!(e.held.is_some()),
            Phase::Release => {}
        }
    }
}

#[test]
fn random_ik_targets_mostly_solved() {
    let robot = tabletop_robot();
    let mut rng = Rng::seed_from_u64(11);
    let (lo, hi) = (robot.lower(), robot.upper());
    let cfg = IkConfig::default();
    let mut ok = 0;
    for _ in 0..500 {
        let q: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| rng.random_range(*l..*h)).collect();
        let target = robot.fk(&q).unwrap().tool;
        if inverse_kinematics(&robot, &target, &[robot.home.clone()], &cfg, &mut rng).is_some() {
            ok += 1;
        }
    }
    assert!(ok >= 475, "{ok}/500");
}
