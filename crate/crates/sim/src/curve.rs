use nalgebra::{UnitQuaternion, Vector3};
use vical_geom::Pose;

/// Minimum-jerk time scaling `s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5` on
/// `tau in [0, 1]`: `s(0) = 0`, `s(1) = 1`, with zero first and second
/// derivatives at both ends. `s'(tau) = 30 tau^2 (1 - tau)^2 >= 0`, so the
/// scaling is monotone.
pub fn min_jerk(tau: f64) -> f64 {
    let t2 = tau * tau;
    t2 * tau * (10.0 - 15.0 * tau + 6.0 * t2)
}

/// `ds/dtau` of [`min_jerk`]: `30 tau^2 (1 - tau)^2`.
pub fn min_jerk_vel(tau: f64) -> f64 {
    let u = tau * (1.0 - tau);
    30.0 * u * u
}

/// `d^2 s / dtau^2` of [`min_jerk`].
pub fn min_jerk_accel(tau: f64) -> f64 {
    60.0 * tau - 180.0 * tau * tau + 120.0 * tau * tau * tau
}

/// Smooth pose trajectory with analytic kinematics of the carried camera
/// frame, used both to drive the simulator and to synthesize ideal IMU
/// readings.
pub trait MotionCurve {
    fn duration(&self) -> f64;
    /// Camera pose at time `t` in `[0, duration]`.
    fn pose(&self, t: f64) -> Pose;
    /// Angular velocity of the camera frame, expressed in the camera frame.
    fn angular_velocity_body(&self, t: f64) -> Vector3<f64>;
    /// Time derivative of [`Self::angular_velocity_body`].
    fn angular_acceleration_body(&self, t: f64) -> Vector3<f64>;
    /// World-frame acceleration of the camera origin.
    fn acceleration_world(&self, t: f64) -> Vector3<f64>;
}

/// Rest-to-rest segment between two poses: positions interpolate linearly
/// and orientations along the shortest geodesic (SLERP), both under the
/// minimum-jerk time scaling.
#[derive(Debug, Clone)]
pub struct SegmentCurve {
    start: Pose,
    end: Pose,
    duration: f64,
    /// Rotation vector of `start_q^-1 * end_q` (constant body-frame axis).
    delta: Vector3<f64>,
}

impl SegmentCurve {
    pub fn new(start: Pose, end: Pose, duration: f64) -> Self {
        assert!(duration > 0.0, "segment duration must be positive");
        let delta = (start.orientation.inverse() * end.orientation).scaled_axis();
        Self {
            start,
            end,
            duration,
            delta,
        }
    }

    pub fn start(&self) -> &Pose {
        &self.start
    }

    pub fn end(&self) -> &Pose {
        &self.end
    }

    fn tau(&self, t: f64) -> f64 {
        (t / self.duration).clamp(0.0, 1.0)
    }
}

impl MotionCurve for SegmentCurve {
    fn duration(&self) -> f64 {
        self.duration
    }

    fn pose(&self, t: f64) -> Pose {
        let s = min_jerk(self.tau(t));
        let position = self.start.position + s * (self.end.position - self.start.position);
        let orientation = self.start.orientation * UnitQuaternion::from_scaled_axis(self.delta * s);
        Pose::new(position, orientation)
    }

    fn angular_velocity_body(&self, t: f64) -> Vector3<f64> {
        // q(t) = q0 * exp(s * delta) rotates about the fixed body axis
        // `delta`, so omega_body = delta * ds/dt.
        self.delta * (min_jerk_vel(self.tau(t)) / self.duration)
    }

    fn angular_acceleration_body(&self, t: f64) -> Vector3<f64> {
        self.delta * (min_jerk_accel(self.tau(t)) / (self.duration * self.duration))
    }

    fn acceleration_world(&self, t: f64) -> Vector3<f64> {
        (self.end.position - self.start.position)
            * (min_jerk_accel(self.tau(t)) / (self.duration * self.duration))
    }
}
