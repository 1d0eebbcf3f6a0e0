//! Analytic model of the soft hemispherical sensing dome.
//!
//! The dome is treated in a 2D cross-section through its axis. A flat face
//! pressed into the dome compresses every internal pin whose ray from the
//! dome centre meets the face before reaching the undeformed skin; the pins
//! also lever sideways, which shows up as a lateral marker shift.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_deg, LineSegment, Pose2};
use crate::rng::gaussian;

/// Gain from accumulated tangential slip to marker shift.
pub const KAPPA_SHEAR: f64 = 1.0;
/// Gain from pin tilt (relative to the face normal) to marker shift.
pub const KAPPA_LEVER: f64 = 0.1;
/// Pins span this half-angle about the dome axis.
pub const PIN_SPAN_DEG: f64 = 70.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomeGeometry {
    radius: f64,
    pin_angles: Vec<f64>,
}

impl DomeGeometry {
    /// `pin_count` pins evenly spaced over `[-70°, +70°]`.
    pub fn new(radius: f64, pin_count: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("dome radius must be > 0, got {radius}")));
        }
        if pin_count < 3 {
            return Err(Error::InvalidArgument(format!("need at least 3 pins, got {pin_count}")));
        }
        let step = 2.0 * PIN_SPAN_DEG / (pin_count - 1) as f64;
        let pin_angles = (0..pin_count)
            .map(|j| -PIN_SPAN_DEG + step * j as f64)
            .collect();
        Ok(Self { radius, pin_angles })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn pin_count(&self) -> usize {
        self.pin_angles.len()
    }

    pub fn pin_angles(&self) -> &[f64] {
        &self.pin_angles
    }

    /// Length of a flattened [`FeatureVector`] for this dome.
    pub fn feature_len(&self) -> usize {
        2 * self.pin_count()
    }
}

impl Default for DomeGeometry {
    fn default() -> Self {
        Self::new(20.0, 21).expect("default dome is valid")
    }
}

/// Ground-truth contact between the dome and a face.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactState {
    /// Penetration of the face past the dome apex along the face normal, mm.
    pub depth: f64,
    /// Signed angle from the inward face normal to the dome axis, degrees.
    pub angle: f64,
    /// Offset along the face from its midpoint to the contact point, mm.
    pub tangential_offset: f64,
    /// Tangential slip accumulated since first touch, mm.
    pub shear: f64,
    pub in_contact: bool,
}

impl ContactState {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn touching(depth: f64, angle: f64) -> Self {
        Self {
            depth,
            angle,
            tangential_offset: 0.0,
            shear: 0.0,
            in_contact: depth > 0.0,
        }
    }

    pub fn with_shear(mut self, shear: f64) -> Self {
        self.shear = shear;
        self
    }
}

/// Simulated tactile observation: one compression and one lateral marker
/// shift per pin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub compressions: Vec<f64>,
    pub lateral_shifts: Vec<f64>,
}

impl FeatureVector {
    pub fn zeros(pins: usize) -> Self {
        Self {
            compressions: vec![0.0; pins],
            lateral_shifts: vec![0.0; pins],
        }
    }

    /// Compressions followed by lateral shifts.
    pub fn flatten(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.compressions.len() * 2);
        v.extend_from_slice(&self.compressions);
        v.extend_from_slice(&self.lateral_shifts);
        v
    }

    pub fn len(&self) -> usize {
        self.compressions.len() + self.lateral_shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Contact between a dome whose centre and axis are given by `sensor_pose`
/// and a face. Contact requires the face to be within one radius of the
/// centre, the perpendicular foot to lie on the segment, and the face to be
/// in front of the dome.
pub fn contact_geometry(sensor_pose: &Pose2, face: &LineSegment, dome: &DomeGeometry) -> ContactState {
    let centre = sensor_pose.position();
    let s = face.signed_distance(centre);
    let r = dome.radius();
    if s >= r || s < 0.0 {
        return ContactState::none();
    }
    let offset = face.tangential_coordinate(centre);
    if offset.abs() > 0.5 * face.length() {
        return ContactState::none();
    }
    let angle = normalize_deg(sensor_pose.heading - face.inward_normal().heading());
    if angle.abs() >= 90.0 {
        return ContactState::none();
    }
    ContactState {
        depth: r - s,
        angle,
        tangential_offset: offset,
        shear: 0.0,
        in_contact: true,
    }
}

/// Noise-free pin features for a contact state.
pub fn pin_compressions(state: &ContactState, dome: &DomeGeometry) -> FeatureVector {
    let m = dome.pin_count();
    let mut out = FeatureVector::zeros(m);
    if !state.in_contact || state.depth <= 0.0 {
        return out;
    }
    let r = dome.radius();
    let s = r - state.depth;
    for (j, &pin) in dome.pin_angles().iter().enumerate() {
        // Tilt of the pin ray away from the face normal.
        let tilt = (pin + state.angle).to_radians();
        let c = tilt.cos();
        if c <= 0.0 {
            continue;
        }
        let delta = (r - s / c).max(0.0);
        out.compressions[j] = delta;
        out.lateral_shifts[j] = delta / r * (KAPPA_SHEAR * state.shear + KAPPA_LEVER * r * tilt.tan());
    }
    out
}

/// Adds i.i.d. Gaussian noise to every channel and re-clamps compressions.
pub fn add_noise<R: Rng + ?Sized>(features: &mut FeatureVector, noise_std: f64, rng: &mut R) {
    for c in features.compressions.iter_mut() {
        *c = (*c + gaussian(rng, noise_std)).max(0.0);
    }
    for l in features.lateral_shifts.iter_mut() {
        *l += gaussian(rng, noise_std);
    }
}

/// Noisy features for an already-resolved contact state (including shear).
pub fn sense_state<R: Rng + ?Sized>(
    state: &ContactState,
    dome: &DomeGeometry,
    noise_std: f64,
    rng: &mut R,
) -> Result<FeatureVector> {
    if !(noise_std >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise_std must be >= 0, got {noise_std}")));
    }
    let mut f = pin_compressions(state, dome);
    add_noise(&mut f, noise_std, rng);
    Ok(f)
}

/// Geometry → features → additive noise.
pub fn sense<R: Rng + ?Sized>(
    sensor_pose: &Pose2,
    face: &LineSegment,
    dome: &DomeGeometry,
    noise_std: f64,
    rng: &mut R,
) -> Result<FeatureVector> {
    sense_state(&contact_geometry(sensor_pose, face, dome), dome, noise_std, rng)
}

/// The exact-pose sensor used in simulation.
pub fn bumper_oracle(sensor_pose: &Pose2, face: &LineSegment, dome: &DomeGeometry) -> ContactState {
    contact_geometry(sensor_pose, face, dome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::rng;

    /// Vertical face at x = 0 whose solid lies at x > 0.
    fn wall() -> LineSegment {
        LineSegment::new(Point2::new(0.0, 100.0), Point2::new(0.0, -100.0)).unwrap()
    }

    /// Dome centre `s` mm in front of the wall, axis tilted by `tilt` degrees.
    fn sensor_at(s: f64, tilt: f64) -> Pose2 {
        Pose2::new(-s, 0.0, tilt)
    }

    #[test]
    fn wall_orientation() {
        let w = wall();
        assert!((w.inward_normal().x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn head_on_contact() {
        let c = contact_geometry(&sensor_at(18.0, 0.0), &wall(), &DomeGeometry::default());
        assert!(c.in_contact);
        assert!((c.depth - 2.0).abs() < 1e-12);
        assert!(c.angle.abs() < 1e-12);
    }

    #[test]
    fn beyond_radius_is_no_contact() {
        let c = contact_geometry(&sensor_at(25.0, 0.0), &wall(), &DomeGeometry::default());
        assert!(!c.in_contact);
        assert_eq!(c.depth, 0.0);
    }

    #[test]
    fn tilted_contact() {
        // Oracle: depth = R - s independent of tilt; angle = heading - normal heading.
        let c = contact_geometry(&sensor_at(17.0, 10.0), &wall(), &DomeGeometry::default());
        assert!((c.depth - 3.0).abs() < 1e-12);
        assert!((c.angle - 10.0).abs() < 1e-12);
        let b = bumper_oracle(&sensor_at(17.0, 25.0), &wall(), &DomeGeometry::default());
        assert!((b.angle - 25.0).abs() < 1e-12);
    }

    #[test]
    fn off_segment_is_no_contact() {
        let short = LineSegment::new(Point2::new(0.0, 10.0), Point2::new(0.0, -10.0)).unwrap();
        let c = contact_geometry(&Pose2::new(-18.0, 15.0, 0.0), &short, &DomeGeometry::default());
        assert!(!c.in_contact);
        let c = contact_geometry(&Pose2::new(-18.0, 5.0, 0.0), &short, &DomeGeometry::default());
        assert!(c.in_contact);
        // Offset is measured along a → b, which points -y here.
        assert!((c.tangential_offset + 5.0).abs() < 1e-12);
    }

    #[test]
    fn facing_away_is_no_contact() {
        let c = contact_geometry(&sensor_at(18.0, 120.0), &wall(), &DomeGeometry::default());
        assert!(!c.in_contact);
    }

    #[test]
    fn non_contact_features_are_zero() {
        let f = pin_compressions(&ContactState::none(), &DomeGeometry::default());
        assert!(f.flatten().iter().all(|&v| v == 0.0));
        assert_eq!(f.len(), 42);
    }

    #[test]
    fn apex_pin_compression() {
        let dome = DomeGeometry::default();
        let f = pin_compressions(&ContactState::touching(2.0, 0.0), &dome);
        // Pin 10 sits on the axis.
        assert_eq!(dome.pin_angles()[10], 0.0);
        assert!((f.compressions[10] - 2.0).abs() < 1e-12);
        assert!(f.lateral_shifts[10].abs() < 1e-12);
    }

    #[test]
    fn oblique_pin_is_not_compressed() {
        // Pins at -70/0/+70; a contact angle of -10° tilts pin 2 by 60° from
        // the normal, so s / cos 60° = 36 > R and the pin stays free.
        let dome = DomeGeometry::new(20.0, 3).unwrap();
        let f = pin_compressions(&ContactState::touching(2.0, -10.0), &dome);
        assert_eq!(f.compressions[2], 0.0);
        assert_eq!(f.compressions[0], 0.0);
        assert!(f.compressions[1] > 0.0);
    }

    #[test]
    fn sense_without_noise_matches_model() {
        let dome = DomeGeometry::default();
        let mut r = rng::stream(1, 0);
        let pose = sensor_at(17.5, 7.0);
        let clean = pin_compressions(&contact_geometry(&pose, &wall(), &dome), &dome);
        let sensed = sense(&pose, &wall(), &dome, 0.0, &mut r).unwrap();
        assert_eq!(clean, sensed);
    }

    #[test]
    fn sense_is_deterministic_per_seed() {
        let dome = DomeGeometry::default();
        let pose = sensor_at(17.5, 7.0);
        let a = sense(&pose, &wall(), &dome, 0.05, &mut rng::stream(9, 3)).unwrap();
        let b = sense(&pose, &wall(), &dome, 0.05, &mut rng::stream(9, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sense_rejects_negative_noise() {
        let dome = DomeGeometry::default();
        let err = sense(&sensor_at(18.0, 0.0), &wall(), &dome, -1.0, &mut rng::stream(0, 0));
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn noise_magnitude_matches_half_normal_mean() {
        // E|N(0, σ)| = σ·sqrt(2/π) ≈ 0.0399 for σ = 0.05. Use a lateral-shift
        // channel that is far from the compression clamp.
        let dome = DomeGeometry::default();
        let state = ContactState::touching(3.0, 0.0);
        let clean = pin_compressions(&state, &dome);
        let mut r = rng::stream(2024, 0);
        let n = 10_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let f = sense_state(&state, &dome, 0.05, &mut r).unwrap();
            sum += (f.lateral_shifts[10] - clean.lateral_shifts[10]).abs();
        }
        let mad = sum / n as f64;
        let expected = 0.05 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((mad - expected).abs() < 0.002, "mad = {mad}");
    }

    #[test]
    fn compression_monotone_in_depth() {
        let dome = DomeGeometry::default();
        for angle in [-25.0, -10.0, 0.0, 13.0, 25.0] {
            let mut prev = pin_compressions(&ContactState::touching(0.0, angle), &dome);
            for k in 1..=50 {
                let d = k as f64 * 0.1;
                let cur = pin_compressions(&ContactState::touching(d, angle), &dome);
                for j in 0..dome.pin_count() {
                    assert!(cur.compressions[j] >= prev.compressions[j]);
                }
                prev = cur;
            }
        }
    }

    #[test]
    fn mirrored_angle_mirrors_profile() {
        let dome = DomeGeometry::default();
        let m = dome.pin_count();
        for angle in [3.0, 11.5, 25.0] {
            for depth in [1.0, 2.6, 5.0] {
                let p = pin_compressions(&ContactState::touching(depth, angle), &dome);
                let q = pin_compressions(&ContactState::touching(depth, -angle), &dome);
                for j in 0..m {
                    assert!((p.compressions[j] - q.compressions[m - 1 - j]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn features_distinguish_working_grid() {
        let dome = DomeGeometry::default();
        let mut seen: Vec<Vec<f64>> = Vec::new();
        for di in 0..=16 {
            let depth = 1.0 + 0.25 * di as f64;
            for angle in -25..=25 {
                let f = pin_compressions(&ContactState::touching(depth, angle as f64), &dome).flatten();
                assert!(
                    !seen.iter().any(|g| g.iter().zip(&f).all(|(a, b)| (a - b).abs() < 1e-12)),
                    "duplicate features at depth {depth}, angle {angle}"
                );
                seen.push(f);
            }
        }
    }

    #[test]
    fn invalid_dome() {
        assert!(DomeGeometry::new(0.0, 21).is_err());
        assert!(DomeGeometry::new(20.0, 2).is_err());
        let d = DomeGeometry::new(20.0, 5).unwrap();
        assert_eq!(d.pin_angles(), &[-70.0, -35.0, 0.0, 35.0, 70.0]);
    }
}
