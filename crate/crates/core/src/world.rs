//! The deterministic two-robot world and single-trial runners.
//!
//! The world is quasi-static: every command is applied instantly, with
//! multiplicative Gaussian error drawn from the commanding robot's own
//! stream. Sensor domes are clipped at the compliance limit so a robot can
//! never push further into the box than `max_depth`.

use std::cell::RefCell;
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bt::Status;
use crate::geometry::{normalize_deg, LineSegment, Point2, Pose2};
use crate::grasp::{lift_outcome, BoxObject, ContactSpec, FailureCause, GraspPhysics, LiftVerdict};
use crate::regressor::{is_contact, predict, RegressorModel};
use crate::rng::{self, gaussian, streams, SimRng};
use crate::strategies::{
    depth_servo, single_contact_adjust, LiftController, LiftEnv, LiftMode, Message, MessageKind, RobotCommand,
    Strategy, StrategyParams, VisionExecutor, VisionGeometry,
};
use crate::tactile::{contact_geometry, sense_state, ContactState, DomeGeometry};
use rand::Rng;

#[derive(Debug, Clone)]
pub enum SensorMode {
    /// Exact contact state.
    Bumper,
    /// Noisy pin features passed through a trained regressor.
    Regressor { model: Arc<RegressorModel>, noise_std: f64 },
}

impl SensorMode {
    pub fn name(&self) -> &'static str {
        match self {
            SensorMode::Bumper => "bumper",
            SensorMode::Regressor { .. } => "regressor",
        }
    }
}

/// Execution error as a fraction of the commanded magnitude (one standard
/// deviation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KinematicNoise {
    pub k_trans: f64,
    pub k_rot: f64,
}

impl Default for KinematicNoise {
    fn default() -> Self {
        Self {
            k_trans: 0.02,
            k_rot: 0.02,
        }
    }
}

impl KinematicNoise {
    pub const NONE: KinematicNoise = KinematicNoise {
        k_trans: 0.0,
        k_rot: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VisionNoise {
    pub sigma_pos: f64,
    pub sigma_ang: f64,
    pub bias_pos: Point2,
    pub bias_ang: f64,
}

impl Default for VisionNoise {
    fn default() -> Self {
        Self {
            sigma_pos: 8.0,
            sigma_ang: 2.0,
            bias_pos: Point2::new(0.0, 0.0),
            bias_ang: 0.0,
        }
    }
}

impl VisionNoise {
    pub const NONE: VisionNoise = VisionNoise {
        sigma_pos: 0.0,
        sigma_ang: 0.0,
        bias_pos: Point2::new(0.0, 0.0),
        bias_ang: 0.0,
    };
}

/// True box pose plus bias plus one Gaussian draw per coordinate.
pub fn vision_pose_estimate<R: Rng + ?Sized>(truth: &Pose2, noise: &VisionNoise, rng: &mut R) -> Pose2 {
    let dx = gaussian(rng, noise.sigma_pos);
    let dy = gaussian(rng, noise.sigma_pos);
    let da = gaussian(rng, noise.sigma_ang);
    Pose2::new(
        truth.x + noise.bias_pos.x + dx,
        truth.y + noise.bias_pos.y + dy,
        truth.heading + noise.bias_ang + da,
    )
}

/// Everything about a world except the box and the sensing mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldParams {
    pub dome: DomeGeometry,
    /// Dome centre ahead of the robot centre, mm.
    pub sensor_offset: f64,
    /// Initial distance from each robot centre to the box centre, mm.
    pub start_distance: f64,
    pub kinematic: KinematicNoise,
    pub vision: VisionNoise,
    pub physics: GraspPhysics,
    pub strategy: StrategyParams,
    pub vision_standoff: f64,
    pub max_depth: f64,
    pub tick_budget: u64,
    /// Lift trials draw the box yaw uniformly from `[-yaw_range, yaw_range]`.
    pub yaw_range: f64,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            dome: DomeGeometry::default(),
            sensor_offset: 150.0,
            start_distance: 1100.0,
            kinematic: KinematicNoise::default(),
            vision: VisionNoise::default(),
            physics: GraspPhysics::default(),
            strategy: StrategyParams::default(),
            vision_standoff: 50.0,
            max_depth: 5.0,
            tick_budget: 10_000,
            yaw_range: 25.0,
        }
    }
}

impl WorldParams {
    pub fn vision_geometry(&self, object: &BoxObject) -> VisionGeometry {
        VisionGeometry {
            face_distance: object.width / 2.0,
            sensor_offset: self.sensor_offset,
            dome_radius: self.dome.radius(),
            standoff: self.vision_standoff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub tick: u64,
    pub robot: usize,
    pub kind: String,
    pub payload: String,
}

#[derive(Debug, Clone)]
struct Robot {
    pose: Pose2,
    /// Face index and slip accumulated since the current contact began.
    touching: Option<usize>,
    shear: f64,
    motion_rng: SimRng,
    sensor_rng: SimRng,
    vision_rng: SimRng,
    vision_estimate: Option<Pose2>,
}

#[derive(Debug, Clone)]
pub struct World {
    object: BoxObject,
    object_pose: Pose2,
    /// Counter-clockwise, so each right-hand normal points outward. Index 0
    /// is the face at box-frame `y = -width/2`, index 2 the one at `+width/2`.
    faces: [LineSegment; 4],
    params: WorldParams,
    sensing: SensorMode,
    robots: Vec<Robot>,
    mailboxes: Vec<VecDeque<Message>>,
    tick: u64,
    log: Vec<Event>,
    verdict: Option<LiftVerdict>,
}

fn box_faces(object: &BoxObject, pose: &Pose2) -> [LineSegment; 4] {
    let (hx, hy) = (object.length / 2.0, object.width / 2.0);
    let c = [
        Point2::new(-hx, -hy),
        Point2::new(hx, -hy),
        Point2::new(hx, hy),
        Point2::new(-hx, hy),
    ]
    .map(|p| pose.transform_point(p));
    std::array::from_fn(|i| LineSegment::new(c[i], c[(i + 1) % 4]).expect("box has positive extent"))
}

impl World {
    pub fn new(
        object: BoxObject,
        object_pose: Pose2,
        robot_poses: &[Pose2],
        params: WorldParams,
        sensing: SensorMode,
        seed: u64,
    ) -> Self {
        let robots = robot_poses
            .iter()
            .enumerate()
            .map(|(i, p)| Robot {
                pose: *p,
                touching: None,
                shear: 0.0,
                motion_rng: rng::stream(seed, streams::ROBOT_BASE + i as u64),
                sensor_rng: rng::stream(seed, streams::SENSOR_BASE + i as u64),
                vision_rng: rng::stream(seed, streams::VISION_BASE + i as u64),
                vision_estimate: None,
            })
            .collect::<Vec<_>>();
        let n = robots.len();
        Self {
            faces: box_faces(&object, &object_pose),
            object,
            object_pose,
            params,
            sensing,
            robots,
            mailboxes: vec![VecDeque::new(); n],
            tick: 0,
            log: Vec::new(),
            verdict: None,
        }
    }

    /// Robots `start_distance` from the box on opposite sides of world y,
    /// facing the box centre. Robot 0 is on the `-y` side.
    pub fn opposing_starts(distance: f64) -> [Pose2; 2] {
        [Pose2::new(0.0, -distance, 90.0), Pose2::new(0.0, distance, -90.0)]
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Advances the world clock; messages stamped before the new tick become
    /// receivable.
    pub fn advance(&mut self) {
        self.tick += 1;
    }

    pub fn object(&self) -> &BoxObject {
        &self.object
    }

    pub fn object_pose(&self) -> Pose2 {
        self.object_pose
    }

    pub fn faces(&self) -> &[LineSegment; 4] {
        &self.faces
    }

    pub fn params(&self) -> &WorldParams {
        &self.params
    }

    pub fn robot_pose(&self, robot: usize) -> Pose2 {
        self.robots[robot].pose
    }

    pub fn sensor_pose(&self, robot: usize) -> Pose2 {
        let p = self.robots[robot].pose;
        Pose2::from_position(p.transform_point(Point2::new(self.params.sensor_offset, 0.0)), p.heading)
    }

    pub fn log(&self) -> &[Event] {
        &self.log
    }

    pub fn verdict(&self) -> Option<LiftVerdict> {
        self.verdict
    }

    fn emit(&mut self, robot: usize, kind: &str, payload: String) {
        self.log.push(Event {
            tick: self.tick,
            robot,
            kind: kind.to_string(),
            payload,
        });
    }

    /// Tab-separated `tick robot kind payload`, one event per line.
    pub fn log_text(&self) -> String {
        let mut s = String::new();
        for e in &self.log {
            writeln!(s, "{}\t{}\t{}\t{}", e.tick, e.robot, e.kind, e.payload).unwrap();
        }
        s
    }

    fn raw_contact(&self, robot: usize) -> (Option<usize>, ContactState) {
        let sp = self.sensor_pose(robot);
        let mut best = (None, ContactState::none());
        for (i, f) in self.faces.iter().enumerate() {
            let c = contact_geometry(&sp, f, &self.params.dome);
            if c.in_contact && c.depth > best.1.depth {
                best = (Some(i), c);
            }
        }
        best
    }

    /// Ground-truth contact including accumulated shear.
    pub fn true_contact(&self, robot: usize) -> ContactState {
        let (_, c) = self.raw_contact(robot);
        c.with_shear(if c.in_contact { self.robots[robot].shear } else { 0.0 })
    }

    /// Geometric angle and tangential offset of the robot's dome against
    /// face `face`, whether or not it touches.
    pub fn face_alignment(&self, robot: usize, face: usize) -> (f64, f64) {
        let sp = self.sensor_pose(robot);
        let f = &self.faces[face];
        (
            normalize_deg(sp.heading - f.inward_normal().heading()),
            f.tangential_coordinate(sp.position()),
        )
    }

    /// The face each robot of [`World::opposing_starts`] is meant to grasp.
    pub fn front_face(robot: usize) -> usize {
        if robot == 0 {
            0
        } else {
            2
        }
    }

    pub fn apply_command(&mut self, robot: usize, cmd: RobotCommand) {
        let k = self.params.kinematic;
        let before = self.raw_contact(robot);
        let before_heading = self.robots[robot].pose.heading;
        let r = &mut self.robots[robot];
        match cmd {
            RobotCommand::Translate { dx, dy } => {
                let len = dx.hypot(dy);
                if len > 0.0 {
                    let scale = 1.0 + gaussian(&mut r.motion_rng, k.k_trans);
                    let v = Point2::new(dx, dy).scale(scale);
                    r.pose = Pose2::from_position(r.pose.transform_point(v), r.pose.heading);
                }
            }
            RobotCommand::Rotate { dtheta } => {
                let d = dtheta * (1.0 + gaussian(&mut r.motion_rng, k.k_rot));
                r.pose = Pose2::new(r.pose.x, r.pose.y, r.pose.heading + d);
            }
            RobotCommand::RotateAboutPoint { centre, dtheta } => {
                let arc = dtheta * (1.0 + gaussian(&mut r.motion_rng, k.k_trans));
                let turn = dtheta * (1.0 + gaussian(&mut r.motion_rng, k.k_rot));
                let p = r.pose.rotated_about(centre, arc);
                r.pose = Pose2::new(p.x, p.y, r.pose.heading + turn);
            }
            RobotCommand::Lift => {
                self.lift(robot);
                return;
            }
            RobotCommand::Lower => {
                self.emit(robot, "lower", String::new());
                return;
            }
            RobotCommand::Stop => return,
        }
        self.clip(robot);
        self.update_shear(robot, before, before_heading);
        let p = self.robots[robot].pose;
        self.emit(robot, "move", format!("{:.6} {:.6} {:.6}", p.x, p.y, p.heading));
    }

    fn clip(&mut self, robot: usize) {
        let max = self.params.max_depth;
        for _ in 0..4 {
            let (_, c) = self.raw_contact(robot);
            if c.depth <= max {
                return;
            }
            let back = (c.depth - max) / c.angle.to_radians().cos() + 1e-9;
            let r = &mut self.robots[robot];
            r.pose = Pose2::from_position(r.pose.transform_point(Point2::new(-back, 0.0)), r.pose.heading);
        }
    }

    fn update_shear(&mut self, robot: usize, before: (Option<usize>, ContactState), before_heading: f64) {
        let after = self.raw_contact(robot);
        let radius = self.params.dome.radius();
        let r = &mut self.robots[robot];
        match (before.0, after.0) {
            (Some(a), Some(b)) if a == b => {
                let slip = after.1.tangential_offset - before.1.tangential_offset;
                let twist = normalize_deg(r.pose.heading - before_heading).to_radians() * radius;
                r.shear += slip + twist;
            }
            _ => r.shear = 0.0,
        }
        r.touching = after.0;
    }

    fn lift(&mut self, robot: usize) {
        let contacts: Vec<(Option<usize>, ContactState)> = (0..self.robots.len()).map(|i| self.raw_contact(i)).collect();
        if contacts[robot].0.is_none() {
            self.emit(robot, "lift_failed", "no contact".into());
            self.verdict.get_or_insert(LiftVerdict::failed(FailureCause::NoContact));
            return;
        }
        let verdict = if contacts.len() < 2 || contacts.iter().any(|c| c.0.is_none()) {
            LiftVerdict::failed(FailureCause::NoContact)
        } else {
            let spec = |i: usize| {
                let (face, c) = contacts[i];
                let f = &self.faces[face.expect("checked")];
                ContactSpec {
                    point: f.midpoint() + f.tangent().scale(c.tangential_offset),
                    inward_normal: f.inward_normal(),
                    depth: c.depth,
                    tangential_offset: c.tangential_offset,
                }
            };
            lift_outcome(&spec(0), &spec(1), &self.object, &self.object_pose, &self.params.physics)
        };
        let v = *self.verdict.get_or_insert(verdict);
        let payload = match v.failure_cause {
            None => "success".to_string(),
            Some(c) => c.as_str().to_string(),
        };
        self.emit(robot, "lift", payload);
    }

    /// Sensor reading: exact in bumper mode, regressed from noisy features
    /// otherwise. The tangential offset is never observed.
    pub fn read_sensor(&mut self, robot: usize) -> ContactState {
        let truth = self.true_contact(robot);
        match &self.sensing {
            SensorMode::Bumper => {
                if truth.in_contact {
                    ContactState::touching(truth.depth, truth.angle)
                } else {
                    ContactState::none()
                }
            }
            SensorMode::Regressor { model, noise_std } => {
                let r = &mut self.robots[robot];
                let f = sense_state(&truth, &self.params.dome, *noise_std, &mut r.sensor_rng)
                    .expect("noise std validated by the caller");
                let p = predict(model, &f.flatten()).expect("model matches the dome");
                if is_contact(p.depth) {
                    ContactState::touching(p.depth, p.angle)
                } else {
                    ContactState::none()
                }
            }
        }
    }

    /// One vision draw per robot per trial; later calls return the same
    /// estimate.
    pub fn vision_estimate(&mut self, robot: usize) -> Pose2 {
        let truth = self.object_pose;
        let noise = self.params.vision;
        let r = &mut self.robots[robot];
        *r.vision_estimate
            .get_or_insert_with(|| vision_pose_estimate(&truth, &noise, &mut r.vision_rng))
    }

    pub fn send(&mut self, from: usize, kind: MessageKind) {
        let m = Message {
            from,
            kind,
            tick_stamp: self.tick,
        };
        let label = match kind {
            MessageKind::Ready => "READY",
            MessageKind::Done => "DONE",
        };
        self.emit(from, "send", label.to_string());
        for (i, q) in self.mailboxes.iter_mut().enumerate() {
            if i != from {
                q.push_back(m);
            }
        }
    }

    /// Messages stamped before the current tick, in send order.
    pub fn receive(&mut self, robot: usize) -> Vec<Message> {
        let q = &mut self.mailboxes[robot];
        let mut out = Vec::new();
        while q.front().is_some_and(|m| m.tick_stamp < self.tick) {
            out.push(q.pop_front().expect("non-empty"));
        }
        out
    }
}

struct RobotEnv<'a> {
    world: &'a mut World,
    robot: usize,
}

impl LiftEnv for RobotEnv<'_> {
    fn now(&self) -> u64 {
        self.world.tick
    }
    fn sense(&mut self) -> ContactState {
        self.world.read_sensor(self.robot)
    }
    fn pose(&self) -> Pose2 {
        self.world.robot_pose(self.robot)
    }
    fn vision_estimate(&mut self) -> Pose2 {
        self.world.vision_estimate(self.robot)
    }
    fn object_centre_hint(&self) -> Point2 {
        self.world.object_pose.position()
    }
    fn execute(&mut self, cmd: RobotCommand) {
        self.world.apply_command(self.robot, cmd)
    }
    fn send(&mut self, kind: MessageKind) {
        self.world.send(self.robot, kind)
    }
    fn receive(&mut self) -> Vec<Message> {
        self.world.receive(self.robot)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub success: bool,
    pub failure_cause: Option<FailureCause>,
    pub contacts_used: [usize; 2],
    /// Ground-truth angle of each dome against its designated face.
    pub final_angles: [f64; 2],
    pub final_depths: [f64; 2],
    pub tangential_offsets: [f64; 2],
    pub ticks: u64,
    pub box_yaw: f64,
    pub log: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftScenario {
    pub name: String,
    pub object: BoxObject,
}

/// Builds the world, runs both controllers to resolution or the tick
/// budget, and reports the lift verdict with the final contact geometry.
pub fn run_lift_trial(
    scenario: &LiftScenario,
    mode: LiftMode,
    sensing: &SensorMode,
    params: &WorldParams,
    seed: u64,
) -> TrialResult {
    let mut scene = rng::stream(seed, streams::SCENE);
    let yaw = if params.yaw_range > 0.0 {
        scene.random_range(-params.yaw_range..=params.yaw_range)
    } else {
        0.0
    };
    let mut world = World::new(
        scenario.object,
        Pose2::new(0.0, 0.0, yaw),
        &World::opposing_starts(params.start_distance),
        params.clone(),
        sensing.clone(),
        seed,
    );
    let geo = params.vision_geometry(&scenario.object);
    let mut ctrl = [
        LiftController::new(0, mode, &params.strategy, &geo),
        LiftController::new(1, mode, &params.strategy, &geo),
    ];
    let mut statuses = [Status::Running; 2];
    while world.tick < params.tick_budget && statuses.contains(&Status::Running) {
        world.advance();
        for (r, c) in ctrl.iter_mut().enumerate() {
            statuses[r] = c.tick(&mut RobotEnv { world: &mut world, robot: r });
        }
    }
    let (success, failure_cause) = if statuses.contains(&Status::Failure) {
        (false, Some(FailureCause::ControllerError))
    } else if statuses.contains(&Status::Running) {
        (false, Some(FailureCause::Timeout))
    } else {
        match world.verdict {
            Some(v) => (v.success, v.failure_cause),
            None => (false, Some(FailureCause::NoContact)),
        }
    };
    let mut contacts_used = [0; 2];
    let mut final_angles = [0.0; 2];
    let mut final_depths = [0.0; 2];
    let mut tangential_offsets = [0.0; 2];
    for r in 0..2 {
        contacts_used[r] = ctrl[r].blackboard().int("contacts_used").unwrap_or(0) as usize;
        let (a, d) = world.face_alignment(r, World::front_face(r));
        final_angles[r] = a;
        tangential_offsets[r] = d;
        final_depths[r] = world.true_contact(r).depth;
    }
    TrialResult {
        success,
        failure_cause,
        contacts_used,
        final_angles,
        final_depths,
        tangential_offsets,
        ticks: world.tick,
        box_yaw: yaw,
        log: world.log_text(),
    }
}

/// How a pose-adjustment trial senses the box.
#[derive(Debug, Clone)]
pub enum PoseMode {
    Tactile(SensorMode),
    Vision,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseTrialResult {
    pub final_angle_err: f64,
    pub distance_err: f64,
    pub contacts_used: usize,
    /// The controller gave up (object lost, servo oscillation).
    pub aborted: bool,
}

/// Single robot, box yawed so the first contact reads `initial_angle`.
/// Tactile modes run `strategy` followed by the depth servo; vision mode
/// runs the open-loop plan. Errors are measured geometrically against the
/// face the robot started in front of.
pub fn run_pose_trial(
    object: &BoxObject,
    initial_angle: f64,
    strategy: Strategy,
    mode: &PoseMode,
    params: &WorldParams,
    seed: u64,
) -> PoseTrialResult {
    let sensing = match mode {
        PoseMode::Tactile(s) => s.clone(),
        PoseMode::Vision => SensorMode::Bumper,
    };
    let start = World::opposing_starts(params.start_distance)[0];
    let world = RefCell::new(World::new(
        *object,
        Pose2::new(0.0, 0.0, -initial_angle),
        &[start],
        params.clone(),
        sensing,
        seed,
    ));
    let hint = world.borrow().object_pose.position();
    let sp = &params.strategy;
    let (contacts_used, aborted) = match mode {
        PoseMode::Tactile(_) => {
            let sense = || world.borrow_mut().read_sensor(0);
            let act = |c| world.borrow_mut().apply_command(0, c);
            match single_contact_adjust(strategy, sense, act, hint, sp) {
                Ok(out) => {
                    let servo = depth_servo(
                        || world.borrow_mut().read_sensor(0),
                        |c| world.borrow_mut().apply_command(0, c),
                        sp,
                    );
                    (out.contacts_used, servo.is_err())
                }
                Err(_) => (0, true),
            }
        }
        PoseMode::Vision => {
            let mut w = world.borrow_mut();
            let est = w.vision_estimate(0);
            let mut ex = VisionExecutor::new(est, &params.vision_geometry(object), sp);
            while let Some(cmd) = ex.step(&w.robot_pose(0)) {
                w.apply_command(0, cmd);
            }
            (0, false)
        }
    };
    let w = world.borrow();
    let (angle, offset) = w.face_alignment(0, World::front_face(0));
    PoseTrialResult {
        final_angle_err: angle.abs(),
        distance_err: offset.abs(),
        contacts_used,
        aborted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: KinematicNoise) -> WorldParams {
        WorldParams {
            kinematic: k,
            ..WorldParams::default()
        }
    }

    fn single(k: KinematicNoise, seed: u64) -> World {
        World::new(
            BoxObject::default(),
            Pose2::IDENTITY,
            &[Pose2::new(0.0, -1100.0, 90.0)],
            params(k),
            SensorMode::Bumper,
            seed,
        )
    }

    #[test]
    fn noiseless_translation_is_exact() {
        let mut w = single(KinematicNoise::NONE, 1);
        w.apply_command(0, RobotCommand::Translate { dx: 100.0, dy: 0.0 });
        let p = w.robot_pose(0);
        assert!(p.x.abs() < 1e-9 && (p.y + 1000.0).abs() < 1e-9);
    }

    #[test]
    fn translation_noise_is_multiplicative() {
        let mut moved = Vec::new();
        for seed in 0..4000 {
            let mut w = single(KinematicNoise { k_trans: 0.02, k_rot: 0.0 }, seed);
            w.apply_command(0, RobotCommand::forward(-1000.0));
            moved.push(-(w.robot_pose(0).y + 1100.0));
        }
        let n = moved.len() as f64;
        let mean = moved.iter().sum::<f64>() / n;
        let sd = (moved.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - 1000.0).abs() < 1.5, "{mean}");
        assert!((sd - 20.0).abs() < 1.0, "{sd}");
    }

    #[test]
    fn penetration_is_clipped() {
        let mut w = single(KinematicNoise::NONE, 1);
        // Dome apex reaches the face after 1100 - 150 - 20 - 15 = 915 mm.
        w.apply_command(0, RobotCommand::forward(930.0));
        let c = w.true_contact(0);
        assert!(c.in_contact);
        assert!(c.depth <= 5.0 + 1e-6 && c.depth > 4.99, "{c:?}");
    }

    #[test]
    fn bumper_reads_exact_state() {
        let mut w = World::new(
            BoxObject::default(),
            Pose2::new(0.0, 0.0, -10.0),
            &[Pose2::new(0.0, -1100.0, 90.0)],
            params(KinematicNoise::NONE),
            SensorMode::Bumper,
            3,
        );
        assert!(!w.read_sensor(0).in_contact);
        while !w.true_contact(0).in_contact {
            w.apply_command(0, RobotCommand::forward(1.0));
        }
        let truth = w.true_contact(0);
        let r = w.read_sensor(0);
        assert_eq!((r.depth, r.angle), (truth.depth, truth.angle));
        assert!((r.angle - 10.0).abs() < 1e-9);
        assert_eq!(r.tangential_offset, 0.0);
    }

    #[test]
    fn vision_estimate_examples() {
        let truth = Pose2::new(5.0, -3.0, 12.0);
        let mut r = rng::stream(1, 0);
        assert_eq!(vision_pose_estimate(&truth, &VisionNoise::NONE, &mut r), truth);
        let biased = VisionNoise {
            bias_ang: 3.0,
            ..VisionNoise::NONE
        };
        assert!((vision_pose_estimate(&truth, &biased, &mut r).heading - 15.0).abs() < 1e-12);
        let noisy = VisionNoise {
            sigma_pos: 10.0,
            ..VisionNoise::NONE
        };
        let xs: Vec<f64> = (0..10_000).map(|_| vision_pose_estimate(&truth, &noisy, &mut r).x).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt();
        assert!((sd - 10.0).abs() < 0.5, "{sd}");
    }

    #[test]
    fn mailbox_delivers_next_tick_in_order() {
        let mut w = World::new(
            BoxObject::default(),
            Pose2::IDENTITY,
            &World::opposing_starts(1100.0),
            WorldParams::default(),
            SensorMode::Bumper,
            1,
        );
        w.advance();
        w.send(0, MessageKind::Ready);
        w.send(0, MessageKind::Done);
        assert!(w.receive(1).is_empty());
        w.advance();
        let got: Vec<MessageKind> = w.receive(1).iter().map(|m| m.kind).collect();
        assert_eq!(got, vec![MessageKind::Ready, MessageKind::Done]);
        assert!(w.receive(1).is_empty());
        assert!(w.receive(0).is_empty());
    }

    fn empty_box() -> LiftScenario {
        LiftScenario {
            name: "empty".into(),
            object: BoxObject::default(),
        }
    }

    #[test]
    fn bumper_tactile_lift_succeeds() {
        for seed in 0..10 {
            let r = run_lift_trial(&empty_box(), LiftMode::Tactile, &SensorMode::Bumper, &WorldParams::default(), seed);
            assert!(r.success, "seed {seed}: {:?}", r.failure_cause);
            assert!(r.final_depths.iter().all(|d| (d - 2.6).abs() <= 0.2 + 0.01), "{:?}", r.final_depths);
        }
    }

    #[test]
    fn perfect_vision_lift_succeeds() {
        let p = WorldParams {
            kinematic: KinematicNoise::NONE,
            vision: VisionNoise::NONE,
            ..WorldParams::default()
        };
        for seed in 0..5 {
            let r = run_lift_trial(&empty_box(), LiftMode::Vision, &SensorMode::Bumper, &p, seed);
            assert!(r.success, "seed {seed}: {:?}", r.failure_cause);
        }
    }

    #[test]
    fn lifts_follow_both_readies_in_one_step() {
        let r = run_lift_trial(&empty_box(), LiftMode::Tactile, &SensorMode::Bumper, &WorldParams::default(), 4);
        let lines: Vec<Vec<&str>> = r.log.lines().map(|l| l.split('\t').collect()).collect();
        let readies: Vec<usize> = (0..lines.len()).filter(|&i| lines[i][2] == "send" && lines[i][3] == "READY").collect();
        let lifts: Vec<usize> = (0..lines.len()).filter(|&i| lines[i][2] == "lift").collect();
        assert_eq!((readies.len(), lifts.len()), (2, 2));
        assert!(lifts.iter().all(|l| readies.iter().all(|r| r < l)));
        assert_eq!(lines[lifts[0]][0], lines[lifts[1]][0]);
    }

    #[test]
    fn trials_are_deterministic() {
        let p = WorldParams::default();
        for mode in [LiftMode::Tactile, LiftMode::Vision] {
            let a = run_lift_trial(&empty_box(), mode, &SensorMode::Bumper, &p, 11);
            let b = run_lift_trial(&empty_box(), mode, &SensorMode::Bumper, &p, 11);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn depth_never_exceeds_limit() {
        let p = WorldParams::default();
        let mut w = World::new(
            BoxObject::default(),
            Pose2::new(0.0, 0.0, 17.0),
            &World::opposing_starts(1100.0),
            p.clone(),
            SensorMode::Bumper,
            8,
        );
        let mut r = rng::stream(8, 99);
        for _ in 0..3000 {
            let cmd = match r.random_range(0..3) {
                0 => RobotCommand::forward(r.random_range(-5.0..30.0)),
                1 => RobotCommand::Rotate { dtheta: r.random_range(-10.0..10.0) },
                _ => RobotCommand::RotateAboutPoint {
                    centre: Point2::new(0.0, 0.0),
                    dtheta: r.random_range(-10.0..10.0),
                },
            };
            let robot = r.random_range(0..2);
            w.apply_command(robot, cmd);
            assert!(w.true_contact(robot).depth <= 5.0 + 1e-6);
        }
    }

    #[test]
    fn multi_contact_pose_trial_is_exact_without_noise() {
        let p = params(KinematicNoise::NONE);
        for theta in [-25.0, -10.0, 0.0, 15.0, 25.0] {
            let r = run_pose_trial(
                &BoxObject::default(),
                theta,
                Strategy::MultiContact,
                &PoseMode::Tactile(SensorMode::Bumper),
                &p,
                1,
            );
            assert!(r.final_angle_err < 0.1 && r.distance_err < 1.0, "{theta}: {r:?}");
            assert!(!r.aborted);
        }
    }
}
