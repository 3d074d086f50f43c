use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::robot::RobotModel;
use crate::geometry::RigidTransform;
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IkConfig {
    /// Total attempts, caller seeds first, then uniform random within limits.
    pub restarts: u32,
    pub iterations: u32,
    pub damping: f64,
    /// Largest joint step per iteration (rad).
    pub max_step: f64,
    pub position_tol: f64,
    pub rotation_tol_deg: f64,
}

impl Default for IkConfig {
    fn default() -> Self {
        IkConfig {
            restarts: 20,
            iterations: 200,
            damping: 0.03,
            max_step: 0.3,
            position_tol: 1e-3,
            rotation_tol_deg: 0.5,
        }
    }
}

/// Position and orientation error of the tool at `q` against `target`.
pub fn pose_error(robot: &RobotModel, q: &[f64], target: &RigidTransform) -> (f64, f64) {
    let tool = robot.fk_unchecked(q).tool;
    let dp = (target.translation - tool.translation).norm();
    let dr = target.rotation.mul_mat(&tool.rotation.transpose()).rotation_angle();
    (dp, dr)
}

/// Solves `a x = b` for small dense systems by Gaussian elimination with
/// partial pivoting. `a` is row-major `n × n`.
fn solve(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = alloc::vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row * n + k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row * n + row];
    }
    Some(x)
}

fn dls_from(robot: &RobotModel, target: &RigidTransform, mut q: Vec<f64>, cfg: &IkConfig) -> Option<Vec<f64>> {
    let n = robot.dof();
    let rot_tol = cfg.rotation_tol_deg.to_radians();
    let lambda2 = cfg.damping * cfg.damping;
    for _ in 0..cfg.iterations {
        let tool = robot.fk_unchecked(&q).tool;
        let dp = target.translation - tool.translation;
        let dw = target.rotation.mul_mat(&tool.rotation.transpose()).log();
        if dp.norm() < cfg.position_tol * 0.5 && dw.norm() < rot_tol * 0.5 {
            return Some(q);
        }
        let e = [dp.x, dp.y, dp.z, dw.x, dw.y, dw.z];
        let j = robot.jacobian(&q);
        // (J Jᵀ + λ² I) y = e, Δq = Jᵀ y
        let mut jjt = alloc::vec![0.0; 36];
        for r in 0..6 {
            for c in 0..6 {
                jjt[r * 6 + c] = (0..n).map(|k| j[k][r] * j[k][c]).sum::<f64>() + if r == c { lambda2 } else { 0.0 };
            }
        }
        let y = solve(jjt, e.to_vec(), 6)?;
        let mut dq: Vec<f64> = (0..n).map(|k| (0..6).map(|r| j[k][r] * y[r]).sum()).collect();
        let big = dq.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if big > cfg.max_step {
            for v in &mut dq {
                *v *= cfg.max_step / big;
            }
        }
        for (v, d) in q.iter_mut().zip(&dq) {
            *v += d;
        }
        robot.clamp(&mut q);
    }
    let (dp, dr) = pose_error(robot, &q, target);
    (dp < cfg.position_tol && dr < rot_tol).then_some(q)
}

/// Damped-least-squares IK. Tries each seed in `seeds`, then random
/// configurations, up to `cfg.restarts` attempts in total. A returned
/// solution is within limits with position error below `position_tol` and
/// orientation error below `rotation_tol_deg`.
pub fn inverse_kinematics(
    robot: &RobotModel,
    target: &RigidTransform,
    seeds: &[Vec<f64>],
    cfg: &IkConfig,
    rng: &mut Rng,
) -> Option<Vec<f64>> {
    let (lo, hi) = (robot.lower(), robot.upper());
    for attempt in 0..cfg.restarts as usize {
        let start = match seeds.get(attempt) {
            Some(s) => {
                let mut s = s.clone();
                robot.clamp(&mut s);
                s
            }
            None => lo.iter().zip(&hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect(),
        };
        if let Some(q) = dls_from(robot, target, start, cfg) {
            return Some(q);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Vec3;
    use rand::SeedableRng;

    #[test]
    fn round_trip_and_unreachable() {
        let robot = RobotModel::panda(RigidTransform::IDENTITY);
        let mut rng = Rng::seed_from_u64(5);
        let cfg = IkConfig::default();
        let q_star = [0.4, 0.3, -0.2, -1.8, 0.3, 2.0, 0.1];
        let target = robot.fk(&q_star).unwrap().tool;
        let q = inverse_kinematics(&robot, &target, &[robot.home.clone()], &cfg, &mut rng).unwrap();
        assert!(robot.within_limits(&q, 0.0));
        let (dp, dr) = pose_error(&robot, &q, &target);
        assert!(dp < 1e-3 && dr < 0.5f64.to_radians());
        let far = RigidTransform::from_translation(Vec3::new(10.0, 0.0, 0.0));
        assert!(inverse_kinematics(&robot, &far, &[], &IkConfig { restarts: 3, ..cfg }, &mut rng).is_none());
    }

    #[test]
    fn small_solver() {
        let x = solve(alloc::vec![2.0, 1.0, 1.0, 3.0], alloc::vec![3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
    }
}
