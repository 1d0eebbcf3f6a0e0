//! A noiseless single-robot bench with exact sensing.

use super::RobotCommand;
use crate::geometry::{normalize_deg, LineSegment, Point2, Pose2};
use crate::tactile::{contact_geometry, ContactState, DomeGeometry};

pub const SENSOR_OFFSET: f64 = 150.0;

pub struct Bench {
    pub robot: Pose2,
    pub face: LineSegment,
    pub dome: DomeGeometry,
}

impl Bench {
    /// Box at the origin yawed so the first contact reads `theta`; the robot
    /// starts 1100 mm away facing the box centre.
    pub fn new(theta: f64) -> Self {
        let yaw = Pose2::new(0.0, 0.0, -theta);
        let face = LineSegment::new(
            yaw.transform_point(Point2::new(-30.0, -15.0)),
            yaw.transform_point(Point2::new(30.0, -15.0)),
        )
        .unwrap();
        Self {
            robot: Pose2::new(0.0, -1100.0, 90.0),
            face,
            dome: DomeGeometry::default(),
        }
    }

    pub fn centre(&self) -> Point2 {
        Point2::new(0.0, 0.0)
    }

    pub fn sensor_pose(&self) -> Pose2 {
        Pose2::from_position(self.robot.transform_point(Point2::new(SENSOR_OFFSET, 0.0)), self.robot.heading)
    }

    pub fn truth(&self) -> ContactState {
        contact_geometry(&self.sensor_pose(), &self.face, &self.dome)
    }

    pub fn heading_error(&self) -> f64 {
        normalize_deg(self.robot.heading - self.face.inward_normal().heading())
    }

    pub fn sense(&mut self) -> ContactState {
        self.truth()
    }

    pub fn execute(&mut self, cmd: RobotCommand) {
        self.robot = match cmd {
            RobotCommand::Translate { dx, dy } => {
                Pose2::from_position(self.robot.transform_point(Point2::new(dx, dy)), self.robot.heading)
            }
            RobotCommand::Rotate { dtheta } => Pose2::new(self.robot.x, self.robot.y, self.robot.heading + dtheta),
            RobotCommand::RotateAboutPoint { centre, dtheta } => self.robot.rotated_about(centre, dtheta),
            _ => self.robot,
        };
        let c = self.truth();
        if c.depth > 5.0 {
            let back = (c.depth - 5.0) / c.angle.to_radians().cos();
            self.robot = Pose2::from_position(self.robot.transform_point(Point2::new(-back, 0.0)), self.robot.heading);
        }
    }

    pub fn drive_to_contact(&mut self) {
        while !self.truth().in_contact {
            self.execute(RobotCommand::forward(10.0));
        }
    }
}
