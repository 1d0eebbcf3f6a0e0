use serde::{Deserialize, Serialize};

use super::{object_rotation_step, self_rotation_step, RobotCommand, Strategy, StrategyParams};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::tactile::ContactState;

/// Something that can be sensed and commanded.
pub trait Plant {
    fn sense(&mut self) -> ContactState;
    fn execute(&mut self, cmd: RobotCommand);
}

/// A [`Plant`] made of a sensor closure and a motion closure.
pub struct FnPlant<S, M>(pub S, pub M);

impl<S, M> Plant for FnPlant<S, M>
where
    S: FnMut() -> ContactState,
    M: FnMut(RobotCommand),
{
    fn sense(&mut self) -> ContactState {
        (self.0)()
    }
    fn execute(&mut self, cmd: RobotCommand) {
        (self.1)(cmd)
    }
}

/// Result of feeding one reading to a closed loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step<T> {
    Command(RobotCommand),
    Done(T),
}

/// Drives forward in fixed increments until the sensor reports contact.
#[derive(Debug, Clone, PartialEq)]
pub struct Approach {
    speed: f64,
    budget: f64,
    travelled: f64,
}

impl Approach {
    pub fn new(params: &StrategyParams) -> Self {
        Self {
            speed: params.approach_speed,
            budget: params.approach_budget,
            travelled: 0.0,
        }
    }

    /// `None` once in contact.
    pub fn step(&mut self, reading: &ContactState) -> Result<Option<RobotCommand>> {
        if reading.in_contact {
            return Ok(None);
        }
        if self.travelled >= self.budget {
            return Err(Error::ObjectNotFound {
                travel_mm: self.travelled,
            });
        }
        self.travelled += self.speed;
        Ok(Some(RobotCommand::forward(self.speed)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustOutcome {
    pub contacts_used: usize,
    /// Angle estimate at the last contact, degrees.
    pub final_angle_est: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Phase {
    Approach(Approach),
    BackOff,
    Rotate { remaining: f64 },
}

/// Contact, check the angle, back off, rotate about the object centre and
/// contact again until the estimated angle is below the threshold.
///
/// Between contacts the measured angle is removed by repeated proportional
/// rotations on odometry alone, so with exact sensing a single extra contact
/// confirms alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiContactAdjuster {
    params: StrategyParams,
    hint: Point2,
    phase: Phase,
    contacts: usize,
    last_angle: f64,
}

impl MultiContactAdjuster {
    pub fn new(object_centre_hint: Point2, params: &StrategyParams) -> Self {
        Self {
            params: *params,
            hint: object_centre_hint,
            phase: Phase::Approach(Approach::new(params)),
            contacts: 0,
            last_angle: 0.0,
        }
    }

    pub fn contacts_used(&self) -> usize {
        self.contacts
    }

    fn outcome(&self, converged: bool) -> AdjustOutcome {
        AdjustOutcome {
            contacts_used: self.contacts,
            final_angle_est: self.last_angle,
            converged,
        }
    }

    pub fn step(&mut self, reading: &ContactState) -> Result<Step<AdjustOutcome>> {
        let p = self.params;
        loop {
            match &mut self.phase {
                Phase::Approach(a) => {
                    if let Some(cmd) = a.step(reading)? {
                        return Ok(Step::Command(cmd));
                    }
                    self.contacts += 1;
                    self.last_angle = reading.angle;
                    if reading.angle.abs() < p.angle_threshold {
                        return Ok(Step::Done(self.outcome(true)));
                    }
                    if self.contacts >= p.max_contacts {
                        return Ok(Step::Done(self.outcome(false)));
                    }
                    self.phase = Phase::BackOff;
                    return Ok(Step::Command(RobotCommand::forward(-p.backoff_distance)));
                }
                Phase::BackOff => {
                    self.phase = Phase::Rotate {
                        remaining: self.last_angle,
                    };
                }
                Phase::Rotate { remaining } => {
                    if remaining.abs() < p.rotation_resolution {
                        self.phase = Phase::Approach(Approach::new(&p));
                        continue;
                    }
                    let dtheta = -p.proportional_gain * *remaining;
                    *remaining += dtheta;
                    return Ok(Step::Command(RobotCommand::RotateAboutPoint {
                        centre: self.hint,
                        dtheta,
                    }));
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServoOutcome {
    pub final_depth_est: f64,
    pub moves: usize,
}

/// Moves along the heading until the estimated depth is inside the target
/// band. Moves are clamped to a step size that halves whenever the error
/// changes sign.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthServo {
    params: StrategyParams,
    approach: Approach,
    step_size: f64,
    last_sign: f64,
    moves: usize,
}

impl DepthServo {
    pub fn new(params: &StrategyParams) -> Self {
        Self {
            params: *params,
            approach: Approach::new(params),
            step_size: params.approach_speed,
            last_sign: 0.0,
            moves: 0,
        }
    }

    pub fn step(&mut self, reading: &ContactState) -> Result<Step<ServoOutcome>> {
        let p = &self.params;
        if !reading.in_contact {
            let cmd = self.approach.step(reading)?.expect("not in contact");
            return Ok(Step::Command(cmd));
        }
        let err = p.depth_target - reading.depth;
        if err.abs() <= p.depth_band {
            return Ok(Step::Done(ServoOutcome {
                final_depth_est: reading.depth,
                moves: self.moves,
            }));
        }
        if self.moves >= p.servo_max_moves {
            return Err(Error::ServoOscillation { moves: self.moves });
        }
        let sign = err.signum();
        if self.last_sign != 0.0 && sign != self.last_sign {
            self.step_size /= 2.0;
        }
        self.last_sign = sign;
        let mv = if reading.depth > p.max_depth {
            err
        } else {
            err.clamp(-self.step_size, self.step_size)
        };
        self.moves += 1;
        Ok(Step::Command(RobotCommand::forward(mv)))
    }
}

fn drive<T, P: Plant>(plant: &mut P, mut step: impl FnMut(&ContactState) -> Result<Step<T>>) -> Result<T> {
    loop {
        let reading = plant.sense();
        match step(&reading)? {
            Step::Command(cmd) => plant.execute(cmd),
            Step::Done(out) => return Ok(out),
        }
    }
}

pub fn multi_contact_adjust<S, M>(
    sensor_fn: S,
    move_fn: M,
    object_centre_hint: Point2,
    params: &StrategyParams,
) -> Result<AdjustOutcome>
where
    S: FnMut() -> ContactState,
    M: FnMut(RobotCommand),
{
    let mut adj = MultiContactAdjuster::new(object_centre_hint, params);
    drive(&mut FnPlant(sensor_fn, move_fn), |r| adj.step(r))
}

pub fn depth_servo<S, M>(sensor_fn: S, move_fn: M, params: &StrategyParams) -> Result<ServoOutcome>
where
    S: FnMut() -> ContactState,
    M: FnMut(RobotCommand),
{
    let mut servo = DepthServo::new(params);
    drive(&mut FnPlant(sensor_fn, move_fn), |r| servo.step(r))
}

/// Approach, take one reading and apply one proportional correction, either
/// about the robot centre or about the object centre. Multi-contact requests
/// are delegated to [`multi_contact_adjust`].
pub fn single_contact_adjust<S, M>(
    strategy: Strategy,
    mut sensor_fn: S,
    mut move_fn: M,
    object_centre_hint: Point2,
    params: &StrategyParams,
) -> Result<AdjustOutcome>
where
    S: FnMut() -> ContactState,
    M: FnMut(RobotCommand),
{
    if strategy == Strategy::MultiContact {
        return multi_contact_adjust(sensor_fn, move_fn, object_centre_hint, params);
    }
    let mut approach = Approach::new(params);
    let reading = drive(&mut FnPlant(&mut sensor_fn, &mut move_fn), |r| {
        Ok(match approach.step(r)? {
            Some(cmd) => Step::Command(cmd),
            None => Step::Done(*r),
        })
    })?;
    let cmd = match strategy {
        Strategy::SelfRotation => self_rotation_step(&reading, params)?,
        _ => object_rotation_step(&reading, object_centre_hint, params)?,
    };
    let converged = cmd == RobotCommand::Stop;
    if !converged {
        move_fn(cmd);
    }
    Ok(AdjustOutcome {
        contacts_used: 1,
        final_angle_est: reading.angle,
        converged,
    })
}
