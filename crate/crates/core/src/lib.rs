//! Simulation and control library for a pair of tactile mobile manipulators
//! that cooperatively lift boxes.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: planar poses and faces.
//! - [`tactile`]: the soft-dome contact model and its simulated pin features.
//! - [`regressor`]: dataset generation and the small neural network that
//!   predicts contact depth and angle from pin features.
//! - [`bt`]: a behavior-tree engine with memory composites.
//! - [`strategies`]: pose-adjustment step functions and closed loops, the
//!   vision planner and the lift coordination tree.
//! - [`grasp`]: friction cones, force-closure checks and the lift verdict.
//! - [`world`]: the deterministic two-robot world and single-trial runner.

pub mod bt;
pub mod error;
pub mod geometry;
pub mod grasp;
pub mod regressor;
pub mod rng;
pub mod strategies;
pub mod tactile;
pub mod world;

pub use error::{Error, Result};
pub use geometry::{compose, normalize_deg, relative_pose, LineSegment, Point2, Pose2};
