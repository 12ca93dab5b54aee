use crate::CoverageState;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};
use vical_geom::rpy_of;

/// Dimension of the policy state vector.
pub const STATE_DIM: usize = 24;

/// Policy state: 18 normalized coverage components followed by the raw pose
/// (position, then roll/pitch/yaw). Layout:
///
/// ```text
/// [ v1u v1v v2u v2v v3u v3v v4u v4v   a_min a_max   eta_min eta_max
///   dp_x dp_y dp_z   dth_x dth_y dth_z   px py pz   roll pitch yaw ]
/// ```
pub type StateVector = [f64; STATE_DIM];

/// Board-area proportion mapped to 0 at the high reference...
pub const A_REF_LO: f64 = 0.01;
/// ...and 1 at the low one (for `a_min`; `a_max` runs the other way).
pub const A_REF_HI: f64 = 0.5;
/// Skew angles are normalized about the fronto-parallel right angle...
pub const ETA_CENTER: f64 = FRAC_PI_2;
/// ...over a span of pi/3 each side.
pub const ETA_SPAN: f64 = FRAC_PI_3;
/// Translation-difference reference, metres.
pub const DP_REF: f64 = 0.6;
/// Rotation-difference reference, radians.
pub const DTHETA_REF: f64 = 1.2;

fn unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Normalizes the coverage state into the policy's 24-vector.
///
/// Every coverage component is scaled so 0 means "no coverage yet" and 1
/// means "reference coverage reached", and each is non-decreasing along an
/// episode: vertices measure progress from the image center toward their
/// region's image corner, `a_min` counts down from [`A_REF_HI`] while
/// `a_max` counts up from [`A_REF_LO`], skew extremes spread from the right
/// angle, and the pose-difference maxima grow toward their references.
pub fn to_vector(s: &CoverageState) -> StateVector {
    let mut out = [0.0; STATE_DIM];
    let (hw, hh) = (s.width / 2.0, s.height / 2.0);
    // Per-axis sign toward each region's image corner: 0 left-up, 1
    // right-up, 2 right-down, 3 left-down.
    let signs = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
    for i in 0..4 {
        if s.seen_flags[i] {
            let [u, v] = s.vertices[i];
            out[2 * i] = unit(signs[i][0] * (u - hw) / hw);
            out[2 * i + 1] = unit(signs[i][1] * (v - hh) / hh);
        }
    }
    if s.any_seen {
        let span = A_REF_HI - A_REF_LO;
        out[8] = unit((A_REF_HI - s.a_min) / span);
        out[9] = unit((s.a_max - A_REF_LO) / span);
        out[10] = unit((ETA_CENTER - s.eta_min) / ETA_SPAN);
        out[11] = unit((s.eta_max - ETA_CENTER) / ETA_SPAN);
    }
    for i in 0..3 {
        out[12 + i] = unit(s.dp_axis_max[i] / DP_REF);
        out[15 + i] = unit(s.dtheta_axis_max[i] / DTHETA_REF);
    }
    let (roll, pitch, yaw) = rpy_of(&s.pose.rotation());
    for i in 0..3 {
        out[18 + i] = s.pose.position[i];
    }
    out[21] = roll;
    out[22] = pitch;
    out[23] = yaw;
    out
}
