//! Pose-adjustment strategies, the depth servo, the vision planner and the
//! cooperative lift controller.
//!
//! The closed loops are written as small state machines that consume one
//! sensor reading and emit at most one command per step, so the same code
//! drives both a synchronous loop and a behavior-tree leaf ticked once per
//! world step.

mod lift;
mod loops;
#[cfg(test)]
pub(crate) mod testkit;
mod vision;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::tactile::ContactState;

pub use lift::{
    build_lift_tree, check_barrier_interleavings, BarrierCheck, LiftController, LiftEnv, LiftMode, Message,
    MessageKind,
};
pub use loops::{
    depth_servo, multi_contact_adjust, single_contact_adjust, AdjustOutcome, Approach, DepthServo, FnPlant,
    MultiContactAdjuster, Plant, ServoOutcome, Step,
};
pub use vision::{vision_adjust_plan, VisionExecutor, VisionGeometry};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyParams {
    /// Stop adjusting once the estimated contact angle is below this, degrees.
    pub angle_threshold: f64,
    /// Depth the servo holds before lifting, mm.
    pub depth_target: f64,
    pub proportional_gain: f64,
    pub max_contacts: usize,
    pub backoff_distance: f64,
    /// Forward travel per approach step, mm.
    pub approach_speed: f64,
    /// Half-width of the accepted depth band, mm.
    pub depth_band: f64,
    /// Dome compliance limit, mm.
    pub max_depth: f64,
    pub servo_max_moves: usize,
    /// Forward travel after which an approach gives up, mm.
    pub approach_budget: f64,
    /// Between contacts the rotation is repeated until the odometric
    /// remainder falls below this, degrees.
    pub rotation_resolution: f64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        Self {
            angle_threshold: 2.0,
            depth_target: 2.6,
            proportional_gain: 0.8,
            max_contacts: 8,
            backoff_distance: 30.0,
            approach_speed: 10.0,
            depth_band: 0.2,
            max_depth: 5.0,
            servo_max_moves: 20,
            approach_budget: 2000.0,
            rotation_resolution: 0.1,
        }
    }
}

impl StrategyParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            self.angle_threshold,
            self.depth_target,
            self.proportional_gain,
            self.backoff_distance,
            self.approach_speed,
            self.depth_band,
            self.max_depth,
            self.approach_budget,
            self.rotation_resolution,
        ];
        if pos.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || self.max_contacts == 0 || self.servo_max_moves == 0 {
            return Err(Error::InvalidArgument("strategy parameters must be positive".into()));
        }
        if self.angle_threshold >= 25.0 {
            return Err(Error::InvalidArgument("angle_threshold must be below 25 degrees".into()));
        }
        if !(1.0..=5.0).contains(&self.depth_target) {
            return Err(Error::InvalidArgument("depth_target must lie in [1, 5] mm".into()));
        }
        Ok(())
    }
}

/// Motion and platform commands. Translations are in the robot frame
/// (`dx` forward along the heading, `dy` to the left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RobotCommand {
    Translate { dx: f64, dy: f64 },
    Rotate { dtheta: f64 },
    RotateAboutPoint { centre: Point2, dtheta: f64 },
    Lift,
    Lower,
    Stop,
}

impl RobotCommand {
    pub fn forward(d: f64) -> Self {
        RobotCommand::Translate { dx: d, dy: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// One contact, then rotate about the robot centre.
    SelfRotation,
    /// One contact, then rotate about the object centre.
    ObjectRotation,
    /// Repeated contacts with rotation about the object centre in between.
    MultiContact,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::SelfRotation, Strategy::ObjectRotation, Strategy::MultiContact];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::SelfRotation => "self_rotation",
            Strategy::ObjectRotation => "object_rotation",
            Strategy::MultiContact => "multi_contact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }

    pub fn is_single_contact(self) -> bool {
        self != Strategy::MultiContact
    }
}

fn correction(estimate: &ContactState, params: &StrategyParams) -> Result<Option<f64>> {
    if !estimate.in_contact {
        return Err(Error::NoContact);
    }
    if estimate.angle.abs() < params.angle_threshold {
        Ok(None)
    } else {
        Ok(Some(-params.proportional_gain * estimate.angle))
    }
}

/// `Rotate(-gain * angle)` about the robot centre, or `Stop` once aligned.
pub fn self_rotation_step(estimate: &ContactState, params: &StrategyParams) -> Result<RobotCommand> {
    Ok(match correction(estimate, params)? {
        Some(dtheta) => RobotCommand::Rotate { dtheta },
        None => RobotCommand::Stop,
    })
}

/// `RotateAboutPoint(centre, -gain * angle)`, or `Stop` once aligned.
pub fn object_rotation_step(
    estimate: &ContactState,
    object_centre_hint: Point2,
    params: &StrategyParams,
) -> Result<RobotCommand> {
    if !object_centre_hint.is_finite() {
        return Err(Error::InvalidArgument("object centre hint is not finite".into()));
    }
    Ok(match correction(estimate, params)? {
        Some(dtheta) => RobotCommand::RotateAboutPoint {
            centre: object_centre_hint,
            dtheta,
        },
        None => RobotCommand::Stop,
    })
}
