//! Two-contact grasp feasibility and the quasi-static lift verdict.
//!
//! Contact forces are modelled as springs along the inward face normal,
//! `N = k_c · depth`. A lift succeeds when the grasp is force-closed (contacts
//! opposed, centre of mass inside both friction cones, net force and torque
//! near zero), the friction can carry the weight, and the grasp resists the
//! pitching moment of a raised centre of mass.

use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, Pose2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactSpec {
    /// World frame, mm.
    pub point: Point2,
    /// Unit vector pointing into the object.
    pub inward_normal: Point2,
    pub depth: f64,
    pub tangential_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoxObject {
    /// Extent along the box x axis, mm.
    pub length: f64,
    /// Extent along the box y axis, mm.
    pub width: f64,
    pub height: f64,
    pub mass: f64,
    /// Planar CoM offset from the geometric centre in the box frame, mm.
    pub com_offset: Point2,
    /// CoM height above the base, mm.
    pub com_height: f64,
    pub friction_mu: f64,
}

impl Default for BoxObject {
    fn default() -> Self {
        Self {
            length: 60.0,
            width: 30.0,
            height: 30.0,
            mass: 0.2,
            com_offset: Point2::new(0.0, 0.0),
            com_height: 15.0,
            friction_mu: 0.5,
        }
    }
}

impl BoxObject {
    pub fn com_world(&self, pose: &Pose2) -> Point2 {
        pose.transform_point(self.com_offset)
    }

    pub fn is_valid(&self) -> bool {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        pos(self.length)
            && pos(self.width)
            && pos(self.height)
            && pos(self.mass)
            && pos(self.friction_mu)
            && self.com_offset.x.abs() <= self.length / 2.0
            && self.com_offset.y.abs() <= self.width / 2.0
            && (0.0..=self.height).contains(&self.com_height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureCause {
    NotOppositeSides,
    ConeMissesCom,
    ForceImbalance,
    TorqueImbalance,
    InsufficientFriction,
    PitchInstability,
    /// A robot reached the lift step without touching the box.
    NoContact,
    /// A controller gave up, e.g. the object was never found.
    ControllerError,
    Timeout,
}

impl FailureCause {
    pub const ALL: [FailureCause; 9] = [
        FailureCause::NotOppositeSides,
        FailureCause::ConeMissesCom,
        FailureCause::ForceImbalance,
        FailureCause::TorqueImbalance,
        FailureCause::InsufficientFriction,
        FailureCause::PitchInstability,
        FailureCause::NoContact,
        FailureCause::ControllerError,
        FailureCause::Timeout,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FailureCause::NotOppositeSides => "not_opposite_sides",
            FailureCause::ConeMissesCom => "cone_misses_com",
            FailureCause::ForceImbalance => "force_imbalance",
            FailureCause::TorqueImbalance => "torque_imbalance",
            FailureCause::InsufficientFriction => "insufficient_friction",
            FailureCause::PitchInstability => "pitch_instability",
            FailureCause::NoContact => "no_contact",
            FailureCause::ControllerError => "controller_error",
            FailureCause::Timeout => "timeout",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftVerdict {
    pub success: bool,
    pub failure_cause: Option<FailureCause>,
}

impl LiftVerdict {
    pub const SUCCESS: LiftVerdict = LiftVerdict {
        success: true,
        failure_cause: None,
    };

    pub fn failed(cause: FailureCause) -> Self {
        Self {
            success: false,
            failure_cause: Some(cause),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraspPhysics {
    /// Contact stiffness, N/mm.
    pub k_c: f64,
    /// m/s²
    pub g: f64,
    /// Largest angle between `n1` and `-n2`, degrees.
    pub eps_normal_deg: f64,
    /// Largest net force, N.
    pub eps_force: f64,
    /// Largest net torque about the CoM, N·mm.
    pub eps_torque: f64,
    /// Effective lever of the grip against pitching, mm.
    pub pitch_lever: f64,
}

impl Default for GraspPhysics {
    fn default() -> Self {
        Self {
            k_c: 2.0,
            g: 9.81,
            eps_normal_deg: 10.0,
            eps_force: 1.0,
            eps_torque: 20.0,
            pitch_lever: 15.0,
        }
    }
}

/// Whether the ray from the contact to `point` lies within the friction cone
/// of half-angle `atan(mu)` about the inward normal. The apex itself counts
/// as inside.
pub fn friction_cone_contains(contact: &ContactSpec, mu: f64, point: Point2) -> bool {
    let v = point - contact.point;
    let len = v.norm();
    if len == 0.0 {
        return true;
    }
    let n = contact.inward_normal;
    let along = v.dot(n);
    let across = v.cross(n).abs();
    // Inside iff along > 0 and across / along <= mu; written without division.
    along > 0.0 && across <= mu * along
}

/// Per-check detail of [`fcg_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcgReport {
    pub normal_angle_deg: f64,
    pub com_in_cones: bool,
    pub net_force: f64,
    pub net_torque: f64,
    pub failure: Option<FailureCause>,
}

impl FcgReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn normal_force(c: &ContactSpec, physics: &GraspPhysics) -> f64 {
    physics.k_c * c.depth.max(0.0)
}

/// Checks opposition, CoM-in-cones, force balance and torque balance, in
/// that order. The first failing check names the cause.
pub fn fcg_check(
    c1: &ContactSpec,
    c2: &ContactSpec,
    object: &BoxObject,
    object_pose: &Pose2,
    physics: &GraspPhysics,
) -> FcgReport {
    let com = object.com_world(object_pose);
    let cos = c1.inward_normal.dot(-c2.inward_normal).clamp(-1.0, 1.0);
    let normal_angle_deg = cos.acos().to_degrees();
    let mu = object.friction_mu;
    let com_in_cones = friction_cone_contains(c1, mu, com) && friction_cone_contains(c2, mu, com);
    let (n1, n2) = (normal_force(c1, physics), normal_force(c2, physics));
    let f1 = c1.inward_normal.scale(n1);
    let f2 = c2.inward_normal.scale(n2);
    let net_force = (f1 + f2).norm();
    let net_torque = ((c1.point - com).cross(f1) + (c2.point - com).cross(f2)).abs();
    let failure = if normal_angle_deg > physics.eps_normal_deg {
        Some(FailureCause::NotOppositeSides)
    } else if !com_in_cones {
        Some(FailureCause::ConeMissesCom)
    } else if net_force > physics.eps_force {
        Some(FailureCause::ForceImbalance)
    } else if net_torque > physics.eps_torque {
        Some(FailureCause::TorqueImbalance)
    } else {
        None
    };
    FcgReport {
        normal_angle_deg,
        com_in_cones,
        net_force,
        net_torque,
        failure,
    }
}

/// Grip capacity `mu (N1 + N2)` in newtons.
pub fn friction_capacity(c1: &ContactSpec, c2: &ContactSpec, object: &BoxObject, physics: &GraspPhysics) -> f64 {
    object.friction_mu * (normal_force(c1, physics) + normal_force(c2, physics))
}

pub fn lift_outcome(
    c1: &ContactSpec,
    c2: &ContactSpec,
    object: &BoxObject,
    object_pose: &Pose2,
    physics: &GraspPhysics,
) -> LiftVerdict {
    // A contact without penetration carries no load.
    if c1.depth <= 0.0 || c2.depth <= 0.0 {
        return LiftVerdict::failed(FailureCause::InsufficientFriction);
    }
    if let Some(cause) = fcg_check(c1, c2, object, object_pose, physics).failure {
        return LiftVerdict::failed(cause);
    }
    let capacity = friction_capacity(c1, c2, object, physics);
    let weight = object.mass * physics.g;
    if capacity < weight {
        return LiftVerdict::failed(FailureCause::InsufficientFriction);
    }
    if weight * object.com_height > capacity * physics.pitch_lever {
        return LiftVerdict::failed(FailureCause::PitchInstability);
    }
    LiftVerdict::SUCCESS
}
