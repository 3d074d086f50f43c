//! Kinematic arm model, inverse kinematics, scripted grasps, MPPI trajectory
//! selection, placement sampling and the pick-and-place state machine.

mod grasp;
mod ik;
mod mppi;
mod placement;
mod policy;
mod predict;
mod robot;
mod suite;

pub use grasp::{grasp_frame, scripted_grasps, Grasp, ANTIPODAL_DEG, PREGRASP_OFFSET};
pub use ik::{inverse_kinematics, pose_error, IkConfig};
pub use robot::{segment_distance, Capsule, Gripper, Joint, Kinematics, Link, RobotModel};
pub use mppi::{
    evaluate_and_select, goal_cost, interpolate, joint_distance, sample_trajectories, Body, Held, JointTrajectory, MppiConfig,
    Selection,
};
pub use placement::{feasible_candidates, sample_placements, Candidate, PlacementConfig, PlacementGoal, PlacementZone, Placements};
pub use policy::{
    audit_episode, barrier_wall, reach, run_rearrangement, tabletop_robot, TABLE_ROBOT_BASE, Audit, AttemptRecord, EpisodeLog, EpisodeTick, Executed, Outcome, Phase,
    PolicyConfig, ReachConfig, ReachOutcome, Scenario, TickRecord,
};
pub use suite::{
    audit_path, generate_scenario, reach_tasks, run_reach_task, ReachReport, ReachTask, ScenarioConfig, BARRIER_ID,
};
pub use predict::{robot_probes, CheckerPredictor, CollisionPredictor, LearnedPredictor, ObservedScene, OraclePredictor, Probe};

#[cfg(test)]
mod tests;
