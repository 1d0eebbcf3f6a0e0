use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{RobotCommand, StrategyParams};
use crate::geometry::{normalize_deg, Point2, Pose2};

/// What the vision planner needs to know about the box and the robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisionGeometry {
    /// Distance from the box centre to each contacted face (the faces
    /// normal to the box y axis), mm.
    pub face_distance: f64,
    /// Dome centre ahead of the robot centre, mm.
    pub sensor_offset: f64,
    pub dome_radius: f64,
    /// The plan stops this far short of the final pose before the blind
    /// advance, mm.
    pub standoff: f64,
}

impl Default for VisionGeometry {
    fn default() -> Self {
        Self {
            face_distance: 15.0,
            sensor_offset: 150.0,
            dome_radius: 20.0,
            standoff: 50.0,
        }
    }
}

/// The robot pose that puts the dome on the centre of the estimated face
/// nearest `robot`, normal to it, at the target depth.
pub fn vision_target_pose(robot: &Pose2, object: &Pose2, geo: &VisionGeometry, params: &StrategyParams) -> Pose2 {
    let centre = object.position();
    let toward_robot = robot.position() - centre;
    let out_n = [Point2::new(0.0, -1.0), Point2::new(0.0, 1.0)]
        .into_iter()
        .map(|n| n.rotated(object.heading))
        .max_by(|a, b| a.dot(toward_robot).total_cmp(&b.dot(toward_robot)))
        .expect("two candidate faces");
    let heading = (-out_n).heading();
    let sensor = centre + out_n.scale(geo.face_distance + geo.dome_radius - params.depth_target);
    Pose2::from_position(sensor - Point2::from_heading(heading).scale(geo.sensor_offset), heading)
}

/// Open-loop plan from `robot` to the target pose: swing about the estimated
/// centre onto the face normal, translate to the standoff, then advance.
pub fn vision_adjust_plan(
    robot: &Pose2,
    object_estimate: &Pose2,
    geo: &VisionGeometry,
    params: &StrategyParams,
) -> Vec<RobotCommand> {
    let target = vision_target_pose(robot, object_estimate, geo, params);
    let dtheta = normalize_deg(target.heading - robot.heading);
    let swung = robot.rotated_about(object_estimate.position(), dtheta);
    let standoff = target.position() - target.axis().scale(geo.standoff);
    let v = swung.inverse_transform_point(standoff);
    vec![
        RobotCommand::RotateAboutPoint {
            centre: object_estimate.position(),
            dtheta,
        },
        RobotCommand::Translate { dx: v.x, dy: v.y },
        RobotCommand::forward(geo.standoff),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stage {
    Fresh,
    ToStandoff,
    Final,
}

/// Runs the vision plan one command per step. The robot re-plans once at
/// the standoff from its own pose (the object estimate is never refreshed),
/// then advances blind. Translations are split into `approach_speed` pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct VisionExecutor {
    estimate: Pose2,
    geo: VisionGeometry,
    params: StrategyParams,
    stage: Stage,
    queue: VecDeque<RobotCommand>,
}

impl VisionExecutor {
    pub fn new(object_estimate: Pose2, geo: &VisionGeometry, params: &StrategyParams) -> Self {
        Self {
            estimate: object_estimate,
            geo: *geo,
            params: *params,
            stage: Stage::Fresh,
            queue: VecDeque::new(),
        }
    }

    fn enqueue(&mut self, cmd: RobotCommand) {
        match cmd {
            RobotCommand::Translate { dx, dy } => {
                let len = dx.hypot(dy);
                let n = (len / self.params.approach_speed).ceil().max(1.0);
                for _ in 0..n as usize {
                    self.queue.push_back(RobotCommand::Translate { dx: dx / n, dy: dy / n });
                }
            }
            other => self.queue.push_back(other),
        }
    }

    /// Next command, or `None` when the plan is exhausted.
    pub fn step(&mut self, robot: &Pose2) -> Option<RobotCommand> {
        if self.queue.is_empty() {
            let plan = vision_adjust_plan(robot, &self.estimate, &self.geo, &self.params);
            match self.stage {
                Stage::Fresh => {
                    plan.into_iter().take(2).for_each(|c| self.enqueue(c));
                    self.stage = Stage::ToStandoff;
                }
                Stage::ToStandoff => {
                    plan.into_iter().for_each(|c| self.enqueue(c));
                    self.stage = Stage::Final;
                }
                Stage::Final => return None,
            }
        }
        self.queue.pop_front()
    }
}
