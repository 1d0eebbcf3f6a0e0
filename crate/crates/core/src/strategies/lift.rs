use serde::{Deserialize, Serialize};

use super::loops::{DepthServo, MultiContactAdjuster, Step};
use super::vision::{VisionExecutor, VisionGeometry};
use super::{RobotCommand, StrategyParams};
use crate::bt::{Blackboard, Leaves, Node, Status, Value};
use crate::error::Error;
use crate::geometry::{Point2, Pose2};
use crate::tactile::ContactState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MessageKind {
    Ready,
    Done,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub from: usize,
    pub kind: MessageKind,
    pub tick_stamp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftMode {
    Tactile,
    Vision,
}

impl LiftMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LiftMode::Tactile => "tactile",
            LiftMode::Vision => "vision",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tactile" => Some(LiftMode::Tactile),
            "vision" => Some(LiftMode::Vision),
            _ => None,
        }
    }
}

/// The world as seen by one lift controller.
pub trait LiftEnv {
    fn now(&self) -> u64;
    fn sense(&mut self) -> ContactState;
    /// The robot's own pose, used by the vision planner.
    fn pose(&self) -> Pose2;
    /// The vision system's estimate of the box pose.
    fn vision_estimate(&mut self) -> Pose2;
    fn object_centre_hint(&self) -> Point2;
    fn execute(&mut self, cmd: RobotCommand);
    fn send(&mut self, kind: MessageKind);
    /// Messages delivered since the last call, in send order.
    fn receive(&mut self) -> Vec<Message>;
}

pub mod leaf {
    pub const ADJUST: &str = "adjust";
    pub const DEPTH_SERVO: &str = "depth_servo";
    pub const VISION_PLAN: &str = "vision_plan";
    pub const SEND_READY: &str = "send_ready";
    pub const WAIT_PEER_READY: &str = "wait_peer_ready";
    pub const LIFT: &str = "lift";
    pub const SEND_DONE: &str = "send_done";
    pub const WAIT_PEER_DONE: &str = "wait_peer_done";
    pub const LOWER: &str = "lower";
}

/// `Sequence[adjust, depth_servo, send_ready, wait_peer_ready,
/// Parallel[lift], send_done, wait_peer_done, lower]`; the vision variant
/// replaces the first two leaves with the vision plan executor.
///
/// The two waits are actions that stay `Running` until the peer's message
/// arrives, so a late peer holds the barrier instead of failing the sequence.
pub fn build_lift_tree(role: usize, mode: LiftMode) -> Node {
    debug_assert!(role < 2);
    let mut children = match mode {
        LiftMode::Tactile => vec![Node::action(leaf::ADJUST), Node::action(leaf::DEPTH_SERVO)],
        LiftMode::Vision => vec![Node::action(leaf::VISION_PLAN)],
    };
    children.extend([
        Node::action(leaf::SEND_READY),
        Node::action(leaf::WAIT_PEER_READY),
        Node::parallel_all(vec![Node::action(leaf::LIFT)]).expect("one child"),
        Node::action(leaf::SEND_DONE),
        Node::action(leaf::WAIT_PEER_DONE),
        Node::action(leaf::LOWER),
    ]);
    Node::sequence(children).expect("non-empty")
}

#[derive(Debug, Clone, PartialEq)]
struct State {
    role: usize,
    params: StrategyParams,
    geometry: VisionGeometry,
    board: Blackboard,
    adjuster: Option<MultiContactAdjuster>,
    servo: Option<DepthServo>,
    vision: Option<VisionExecutor>,
    ready_at: Option<u64>,
    peer_ready_at: Option<u64>,
    peer_done: bool,
    error: Option<Error>,
}

impl State {
    fn drain(&mut self, env: &mut dyn LiftEnv) {
        for m in env.receive() {
            if m.from == self.role {
                continue;
            }
            match m.kind {
                MessageKind::Ready => self.peer_ready_at = Some(m.tick_stamp),
                MessageKind::Done => self.peer_done = true,
            }
        }
    }

    fn fail(&mut self, e: Error) -> Status {
        self.error = Some(e);
        Status::Failure
    }

    fn record(&mut self, key: &str, value: Value) {
        self.board.set(key, value).expect("blackboard keys keep one type");
    }
}

struct Bound<'a> {
    state: &'a mut State,
    env: &'a mut dyn LiftEnv,
}

impl Leaves for Bound<'_> {
    fn action(&mut self, name: &str) -> Status {
        let s = &mut *self.state;
        let env = &mut *self.env;
        match name {
            leaf::ADJUST => {
                let hint = env.object_centre_hint();
                let params = s.params;
                let adj = s.adjuster.get_or_insert_with(|| MultiContactAdjuster::new(hint, &params));
                let reading = env.sense();
                match adj.step(&reading) {
                    Ok(Step::Command(cmd)) => {
                        env.execute(cmd);
                        Status::Running
                    }
                    Ok(Step::Done(out)) => {
                        s.adjuster = None;
                        s.record("contacts_used", Value::Int(out.contacts_used as i64));
                        s.record("converged", Value::Bool(out.converged));
                        s.record("last_estimate", Value::Contact(reading));
                        Status::Success
                    }
                    Err(e) => s.fail(e),
                }
            }
            leaf::DEPTH_SERVO => {
                let params = s.params;
                let servo = s.servo.get_or_insert_with(|| DepthServo::new(&params));
                let reading = env.sense();
                match servo.step(&reading) {
                    Ok(Step::Command(cmd)) => {
                        env.execute(cmd);
                        Status::Running
                    }
                    Ok(Step::Done(out)) => {
                        s.servo = None;
                        s.record("final_depth_est", Value::Float(out.final_depth_est));
                        Status::Success
                    }
                    Err(e) => s.fail(e),
                }
            }
            leaf::VISION_PLAN => {
                if s.vision.is_none() {
                    let est = env.vision_estimate();
                    s.vision = Some(VisionExecutor::new(est, &s.geometry, &s.params));
                }
                let pose = env.pose();
                match s.vision.as_mut().expect("just set").step(&pose) {
                    Some(cmd) => {
                        env.execute(cmd);
                        Status::Running
                    }
                    None => {
                        s.vision = None;
                        Status::Success
                    }
                }
            }
            leaf::SEND_READY => {
                env.send(MessageKind::Ready);
                s.ready_at = Some(env.now());
                Status::Success
            }
            leaf::WAIT_PEER_READY => {
                s.drain(env);
                if s.peer_ready_at.is_some() {
                    Status::Success
                } else {
                    Status::Running
                }
            }
            leaf::LIFT => {
                // Both robots learn of the later READY on the same step, so
                // lifting one step after it keeps the two lifts simultaneous.
                let (Some(mine), Some(theirs)) = (s.ready_at, s.peer_ready_at) else {
                    return Status::Running;
                };
                if env.now() > mine.max(theirs) {
                    env.execute(RobotCommand::Lift);
                    Status::Success
                } else {
                    Status::Running
                }
            }
            leaf::SEND_DONE => {
                env.send(MessageKind::Done);
                Status::Success
            }
            leaf::WAIT_PEER_DONE => {
                s.drain(env);
                if s.peer_done {
                    Status::Success
                } else {
                    Status::Running
                }
            }
            leaf::LOWER => {
                env.execute(RobotCommand::Lower);
                Status::Success
            }
            other => s.fail(Error::MalformedTree(format!("unknown leaf `{other}`"))),
        }
    }

    fn condition(&mut self, name: &str) -> bool {
        self.action(name) == Status::Success
    }
}

/// One robot's lift behavior: a tree plus the state its leaves share.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftController {
    mode: LiftMode,
    tree: Node,
    state: State,
    status: Status,
}

impl LiftController {
    pub fn new(role: usize, mode: LiftMode, params: &StrategyParams, geometry: &VisionGeometry) -> Self {
        Self {
            mode,
            tree: build_lift_tree(role, mode),
            state: State {
                role,
                params: *params,
                geometry: *geometry,
                board: Blackboard::new(),
                adjuster: None,
                servo: None,
                vision: None,
                ready_at: None,
                peer_ready_at: None,
                peer_done: false,
                error: None,
            },
            status: Status::Running,
        }
    }

    pub fn role(&self) -> usize {
        self.state.role
    }

    pub fn mode(&self) -> LiftMode {
        self.mode
    }

    /// Ticks the tree once unless it has already resolved.
    pub fn tick(&mut self, env: &mut dyn LiftEnv) -> Status {
        if self.status == Status::Running {
            let mut leaves = Bound {
                state: &mut self.state,
                env,
            };
            self.status = self.tree.tick(&mut leaves);
        }
        self.status
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn error(&self) -> Option<&Error> {
        self.state.error.as_ref()
    }

    pub fn blackboard(&self) -> &Blackboard {
        &self.state.board
    }
}

/// Outcome of [`check_barrier_interleavings`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BarrierCheck {
    /// Complete schedules explored.
    pub schedules: u64,
    /// Schedules in which at least one robot lifted.
    pub schedules_with_lift: u64,
    /// Schedules in which a Lift came before both READY messages were sent.
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq)]
struct Shared {
    step: u64,
    sent: Vec<Message>,
    delivered: [usize; 2],
    lifts: Vec<(usize, u64)>,
    violation: bool,
}

struct CheckEnv<'a> {
    robot: usize,
    shared: &'a mut Shared,
    /// Ticks of this robot so far; it finds the box after `reach` of them.
    ticks: u64,
    reach: u64,
}

impl LiftEnv for CheckEnv<'_> {
    fn now(&self) -> u64 {
        self.shared.step
    }
    fn sense(&mut self) -> ContactState {
        if self.ticks >= self.reach {
            ContactState::touching(2.6, 0.0)
        } else {
            ContactState::none()
        }
    }
    fn pose(&self) -> Pose2 {
        Pose2::IDENTITY
    }
    fn vision_estimate(&mut self) -> Pose2 {
        Pose2::IDENTITY
    }
    fn object_centre_hint(&self) -> Point2 {
        Point2::new(0.0, 0.0)
    }
    fn execute(&mut self, cmd: RobotCommand) {
        if cmd == RobotCommand::Lift {
            let readies = self.shared.sent.iter().filter(|m| m.kind == MessageKind::Ready).count();
            if readies < 2 {
                self.shared.violation = true;
            }
            self.shared.lifts.push((self.robot, self.shared.step));
        }
    }
    fn send(&mut self, kind: MessageKind) {
        let m = Message {
            from: self.robot,
            kind,
            tick_stamp: self.shared.step,
        };
        self.shared.sent.push(m);
    }
    fn receive(&mut self) -> Vec<Message> {
        let step = self.shared.step;
        let start = self.shared.delivered[self.robot];
        let fresh: Vec<Message> = self.shared.sent[start..]
            .iter()
            .copied()
            .filter(|m| m.from != self.robot && m.tick_stamp < step)
            .collect();
        // Everything up to the first undeliverable message counts as delivered.
        let upto = self.shared.sent[start..]
            .iter()
            .position(|m| m.tick_stamp >= step)
            .map_or(self.shared.sent.len(), |i| start + i);
        self.shared.delivered[self.robot] = upto;
        fresh
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Node2 {
    shared: Shared,
    ctrl: [LiftController; 2],
    ticks: [u64; 2],
}

/// Explores every schedule of up to `max_ticks` single-robot ticks (each
/// step either robot may tick) for two tactile lift controllers, where robot
/// `i` needs `reach[i]` ticks before it first touches the box. Each step
/// advances the clock by one.
pub fn check_barrier_interleavings(max_ticks: u32, reach: [u64; 2]) -> BarrierCheck {
    let params = StrategyParams::default();
    let geo = VisionGeometry::default();
    let root = Node2 {
        shared: Shared {
            step: 0,
            sent: Vec::new(),
            delivered: [0, 0],
            lifts: Vec::new(),
            violation: false,
        },
        ctrl: [
            LiftController::new(0, LiftMode::Tactile, &params, &geo),
            LiftController::new(1, LiftMode::Tactile, &params, &geo),
        ],
        ticks: [0, 0],
    };
    let mut report = BarrierCheck::default();
    let mut stack = vec![(root, 0u32)];
    while let Some((node, depth)) = stack.pop() {
        if node.shared.violation || depth == max_ticks {
            report.schedules += 1;
            report.schedules_with_lift += u64::from(!node.shared.lifts.is_empty());
            report.violations += u64::from(node.shared.violation);
            continue;
        }
        for robot in [1usize, 0] {
            let mut next = node.clone();
            next.shared.step = u64::from(depth) + 1;
            let Node2 { shared, ctrl, ticks } = &mut next;
            let mut env = CheckEnv {
                robot,
                shared,
                ticks: ticks[robot],
                reach: reach[robot],
            };
            ctrl[robot].tick(&mut env);
            ticks[robot] += 1;
            stack.push((next, depth + 1));
        }
    }
    report
}
