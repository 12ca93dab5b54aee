//! Pinhole camera model with radial-tangential (Brown-Conrady) distortion.
//!
//! Camera frame convention: `z` forward (optical axis), `x` right, `y` down.
//! A camera pose is the camera-to-world transform, so a world point maps into
//! the camera frame as `p_cam = R^T * (p_world - t)`.
//!
//! Distortion acts on normalized image coordinates `(X/Z, Y/Z)`. The
//! simulator can place the distortion center away from the pinhole principal
//! point (an asymmetric lens); the fitting side of the workspace always
//! assumes the symmetric single-center model, which is what makes such lenses
//! interesting test subjects.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use vical_geom::Pose;

/// Points with camera-frame depth at or below this (metres) are treated as
/// invisible rather than projected.
pub const Z_MIN: f64 = 0.05;

/// Fixed-point undistortion failed to reach the required residual.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("undistortion did not converge: residual {residual:.3e} after {iterations} iterations")]
pub struct NoConvergence {
    pub residual: f64,
    pub iterations: usize,
}

/// Radial-tangential distortion coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RadTan {
    pub k1: f64,
    pub k2: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Pinhole intrinsics plus distortion and image size (pixels).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
    pub dist: RadTan,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: f64, height: f64, dist: RadTan) -> Self {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            dist,
        };
        k.validate();
        k
    }

    /// Builds intrinsics from a horizontal field of view (radians):
    /// `fx = fy = (width/2) / tan(fov/2)`, principal point at the image
    /// center.
    pub fn from_fov(fov: f64, width: f64, height: f64, dist: RadTan) -> Self {
        assert!(fov > 0.0 && fov < std::f64::consts::PI, "fov out of range: {fov}");
        let f = (width / 2.0) / (fov / 2.0).tan();
        Self::new(f, f, width / 2.0, height / 2.0, width, height, dist)
    }

    fn validate(&self) {
        assert!(self.fx > 0.0 && self.fy > 0.0, "non-positive focal length");
        assert!(
            self.cx > 0.0 && self.cx < self.width && self.cy > 0.0 && self.cy < self.height,
            "principal point outside the image"
        );
    }

    pub fn principal_point(&self) -> Vector2<f64> {
        Vector2::new(self.cx, self.cy)
    }

    /// Pixel coordinates of normalized image coordinates (no distortion).
    pub fn to_pixel(&self, x: f64, y: f64) -> Vector2<f64> {
        Vector2::new(self.fx * x + self.cx, self.fy * y + self.cy)
    }

    /// Normalized image coordinates of a pixel (no distortion).
    pub fn to_normalized(&self, px: &Vector2<f64>) -> (f64, f64) {
        ((px.x - self.cx) / self.fx, (px.y - self.cy) / self.fy)
    }

    pub fn contains(&self, px: &Vector2<f64>) -> bool {
        px.x >= 0.0 && px.x <= self.width && px.y >= 0.0 && px.y <= self.height
    }
}

/// Applies radial-tangential distortion to normalized image coordinates.
pub fn distort_radtan(x: f64, y: f64, d: &RadTan) -> (f64, f64) {
    let r2 = x * x + y * y;
    let radial = 1.0 + d.k1 * r2 + d.k2 * r2 * r2;
    let xd = x * radial + 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x * x);
    let yd = y * radial + d.p1 * (r2 + 2.0 * y * y) + 2.0 * d.p2 * x * y;
    (xd, yd)
}

const UNDISTORT_MAX_ITERS: usize = 50;
const UNDISTORT_STEP_TOL: f64 = 1e-12;
const UNDISTORT_RESIDUAL_TOL: f64 = 1e-6;

/// Inverts [`distort_radtan`] by fixed-point iteration:
/// `x <- (xd - tangential(x, y)) / radial(x, y)`, starting from the distorted
/// point, up to 50 iterations or until the step drops below `1e-12`.
///
/// Fails with [`NoConvergence`] when the final residual
/// `|distort(x, y) - (xd, yd)|` exceeds `1e-6`, which happens for distortion
/// strong enough that the iteration stops contracting.
pub fn undistort_radtan(xd: f64, yd: f64, d: &RadTan) -> Result<(f64, f64), NoConvergence> {
    let (mut x, mut y) = (xd, yd);
    let mut iterations = UNDISTORT_MAX_ITERS;
    for i in 0..UNDISTORT_MAX_ITERS {
        let r2 = x * x + y * y;
        let radial = 1.0 + d.k1 * r2 + d.k2 * r2 * r2;
        let tx = 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x * x);
        let ty = d.p1 * (r2 + 2.0 * y * y) + 2.0 * d.p2 * x * y;
        let nx = (xd - tx) / radial;
        let ny = (yd - ty) / radial;
        let step = (nx - x).abs().max((ny - y).abs());
        x = nx;
        y = ny;
        if step < UNDISTORT_STEP_TOL {
            iterations = i + 1;
            break;
        }
    }
    let (rx, ry) = distort_radtan(x, y, d);
    let residual = ((rx - xd).powi(2) + (ry - yd).powi(2)).sqrt();
    if residual > UNDISTORT_RESIDUAL_TOL {
        return Err(NoConvergence {
            residual,
            iterations,
        });
    }
    Ok((x, y))
}

/// Projects a world point through a camera at `camera_pose` (camera-to-world)
/// with the distortion centered on the principal point.
///
/// Returns `None` when the point is not visible: camera-frame depth at or
/// below [`Z_MIN`], or the pixel falls outside `[0, width] x [0, height]`.
pub fn project_point(
    p_world: &Vector3<f64>,
    camera_pose: &Pose,
    k: &Intrinsics,
) -> Option<Vector2<f64>> {
    project_with_distortion_center(p_world, camera_pose, k, &k.principal_point())
}

/// [`project_point`] generalized to a distortion center `dist_center_px`
/// that may differ from the pinhole principal point. The distortion warp is
/// applied about that center (in normalized coordinates); with the center at
/// the principal point this is exactly the symmetric model.
pub fn project_with_distortion_center(
    p_world: &Vector3<f64>,
    camera_pose: &Pose,
    k: &Intrinsics,
    dist_center_px: &Vector2<f64>,
) -> Option<Vector2<f64>> {
    let p_cam = camera_pose.orientation.inverse() * (p_world - camera_pose.position);
    if p_cam.z <= Z_MIN {
        return None;
    }
    let x = p_cam.x / p_cam.z;
    let y = p_cam.y / p_cam.z;
    let ox = (dist_center_px.x - k.cx) / k.fx;
    let oy = (dist_center_px.y - k.cy) / k.fy;
    let (dx, dy) = distort_radtan(x - ox, y - oy, &k.dist);
    let px = k.to_pixel(dx + ox, dy + oy);
    k.contains(&px).then_some(px)
}

/// Unit-norm camera-frame ray through a pixel, undoing distortion first.
pub fn unproject_ray(px: &Vector2<f64>, k: &Intrinsics) -> Result<Vector3<f64>, NoConvergence> {
    let (xd, yd) = k.to_normalized(px);
    let (x, y) = undistort_radtan(xd, yd, &k.dist)?;
    Ok(Vector3::new(x, y, 1.0).normalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use vical_geom::euler_to_rot;

    fn mild_dist(rng: &mut ChaCha8Rng) -> RadTan {
        RadTan {
            k1: rng.gen_range(-0.08..0.08),
            k2: rng.gen_range(-0.05..0.05),
            p1: rng.gen_range(-0.005..0.005),
            p2: rng.gen_range(-0.005..0.005),
        }
    }

    #[test]
    fn focal_length_from_fov() {
        let k = Intrinsics::from_fov(1.0, 640.0, 480.0, RadTan::default());
        // 320 / tan(0.5), evaluated independently.
        assert!((k.fx - 585.756070947985).abs() < 1e-9, "fx = {}", k.fx);
        assert_eq!(k.fx, k.fy);
        assert_eq!(k.cx, 320.0);
        assert_eq!(k.cy, 240.0);
        assert_eq!(k.fx, 320.0 / 0.5f64.tan());
    }

    #[test]
    fn distort_matches_formula_evaluation() {
        // Pure k1 case, evaluated by hand: r^2 = 0.05, factor = 1.0005.
        let d = RadTan {
            k1: 0.01,
            ..RadTan::default()
        };
        let (xd, yd) = distort_radtan(0.1, 0.2, &d);
        assert!((xd - 0.10005).abs() < 1e-15);
        assert!((yd - 0.2001).abs() < 1e-15);

        // Full-coefficient case, each term evaluated separately.
        let d = RadTan {
            k1: 0.03,
            k2: -0.01,
            p1: 0.002,
            p2: -0.001,
        };
        let (x, y) = (-0.25, 0.15);
        let r2: f64 = x * x + y * y;
        let radial = 1.0 + d.k1 * r2 + d.k2 * r2 * r2;
        let expect_x = x * radial + 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x * x);
        let expect_y = y * radial + d.p1 * (r2 + 2.0 * y * y) + 2.0 * d.p2 * x * y;
        let (xd, yd) = distort_radtan(x, y, &d);
        assert_eq!(xd, expect_x);
        assert_eq!(yd, expect_y);
    }

    #[test]
    fn zero_coefficients_distort_is_identity() {
        let d = RadTan::default();
        let (xd, yd) = distort_radtan(-0.3, 0.45, &d);
        assert_eq!((xd, yd), (-0.3, 0.45));
    }

    #[test]
    fn undistort_inverts_distort_over_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let d = mild_dist(&mut rng);
            for i in 0..7 {
                for j in 0..7 {
                    let x = -0.45 + 0.15 * i as f64;
                    let y = -0.45 + 0.15 * j as f64;
                    let (xd, yd) = distort_radtan(x, y, &d);
                    let (ux, uy) = undistort_radtan(xd, yd, &d).unwrap();
                    assert!((ux - x).abs() < 1e-9 && (uy - y).abs() < 1e-9);
                    // And the other composition order.
                    let (rx, ry) = distort_radtan(ux, uy, &d);
                    assert!((rx - xd).abs() < 1e-9 && (ry - yd).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn undistort_diverges_for_strong_distortion_far_out() {
        // Empirically constructed divergent case: the fixed point stops
        // contracting well inside 50 iterations.
        let d = RadTan {
            k1: -0.3,
            ..RadTan::default()
        };
        let err = undistort_radtan(1.0, 0.4, &d).unwrap_err();
        assert!(err.residual > 1e-6);
    }

    /// Step-by-step projection oracle: rotation via explicit matrix,
    /// perspective divide, distortion formula re-evaluated locally.
    fn project_oracle(
        p_world: &Vector3<f64>,
        pose: &Pose,
        k: &Intrinsics,
    ) -> Option<(f64, f64)> {
        let r = pose.rotation();
        let dp = p_world - pose.position;
        let m = r.matrix();
        // R^T * dp written out.
        let pc = Vector3::new(
            m[(0, 0)] * dp.x + m[(1, 0)] * dp.y + m[(2, 0)] * dp.z,
            m[(0, 1)] * dp.x + m[(1, 1)] * dp.y + m[(2, 1)] * dp.z,
            m[(0, 2)] * dp.x + m[(1, 2)] * dp.y + m[(2, 2)] * dp.z,
        );
        if pc.z <= Z_MIN {
            return None;
        }
        let (x, y) = (pc.x / pc.z, pc.y / pc.z);
        let r2 = x * x + y * y;
        let radial = 1.0 + k.dist.k1 * r2 + k.dist.k2 * r2 * r2;
        let xd = x * radial + 2.0 * k.dist.p1 * x * y + k.dist.p2 * (r2 + 2.0 * x * x);
        let yd = y * radial + k.dist.p1 * (r2 + 2.0 * y * y) + 2.0 * k.dist.p2 * x * y;
        let u = k.fx * xd + k.cx;
        let v = k.fy * yd + k.cy;
        (u >= 0.0 && u <= k.width && v >= 0.0 && v <= k.height).then_some((u, v))
    }

    #[test]
    fn project_matches_step_by_step_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..300 {
            let k = Intrinsics::from_fov(1.0, 640.0, 480.0, mild_dist(&mut rng));
            let pose = Pose::from_rpy(
                Vector3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                ),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(-0.5..0.5),
            );
            // Points scattered in front of and behind the camera.
            let p = pose.transform_point(&Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..4.0),
            ));
            let got = project_point(&p, &pose, &k);
            let expect = project_oracle(&p, &pose, &k);
            match (got, expect) {
                (None, None) => {}
                (Some(px), Some((u, v))) => {
                    assert!((px.x - u).abs() < 1e-10 && (px.y - v).abs() < 1e-10);
                }
                other => panic!("visibility mismatch: {other:?}"),
            }
        }
    }

    #[test]
    fn projection_is_scale_invariant_along_the_ray() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let pose = Pose::identity();
        for _ in 0..200 {
            let k = Intrinsics::from_fov(1.0, 640.0, 480.0, mild_dist(&mut rng));
            let p = Vector3::new(
                rng.gen_range(-0.4..0.4),
                rng.gen_range(-0.3..0.3),
                rng.gen_range(0.5..2.0),
            );
            let a = project_point(&p, &pose, &k);
            let b = project_point(&(p * rng.gen_range(1.1..3.0)), &pose, &k);
            if let (Some(a), Some(b)) = (a, b) {
                assert!((a - b).norm() < 1e-9, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn near_plane_and_image_bounds_gate_visibility() {
        let k = Intrinsics::from_fov(1.0, 640.0, 480.0, RadTan::default());
        let pose = Pose::identity();
        assert_eq!(project_point(&Vector3::new(0.0, 0.0, -1.0), &pose, &k), None);
        assert_eq!(project_point(&Vector3::new(0.0, 0.0, 0.04), &pose, &k), None);
        assert_eq!(project_point(&Vector3::new(0.0, 0.0, 0.05), &pose, &k), None);
        assert!(project_point(&Vector3::new(0.0, 0.0, 0.0501), &pose, &k).is_some());
        // Far off-axis point lands outside the image.
        assert_eq!(project_point(&Vector3::new(2.0, 0.0, 1.0), &pose, &k), None);
        // On-axis point lands exactly on the principal point.
        let px = project_point(&Vector3::new(0.0, 0.0, 2.0), &pose, &k).unwrap();
        assert_eq!(px, Vector2::new(320.0, 240.0));
    }

    #[test]
    fn unproject_then_project_recovers_the_pixel() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let pose = Pose::identity();
        for _ in 0..200 {
            let k = Intrinsics::from_fov(1.0, 640.0, 480.0, mild_dist(&mut rng));
            let px = Vector2::new(rng.gen_range(40.0..600.0), rng.gen_range(40.0..440.0));
            let ray = unproject_ray(&px, &k).unwrap();
            let p = ray * 2.0;
            let back = project_point(&p, &pose, &k).unwrap();
            assert!((back - px).norm() < 1e-8, "{back:?} vs {px:?}");
        }
    }

    #[test]
    fn offset_distortion_center_reduces_to_symmetric_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let k = Intrinsics::from_fov(1.0, 640.0, 480.0, mild_dist(&mut rng));
        let pose = Pose::from_rpy(Vector3::new(0.1, -0.2, 0.05), 0.1, -0.1, 0.2);
        let p = pose.transform_point(&Vector3::new(0.3, -0.2, 1.5));
        let sym = project_point(&p, &pose, &k).unwrap();
        let via_center =
            project_with_distortion_center(&p, &pose, &k, &k.principal_point()).unwrap();
        assert_eq!(sym, via_center);

        // With zero distortion the center offset is irrelevant.
        let k0 = Intrinsics::from_fov(1.0, 640.0, 480.0, RadTan::default());
        let a = project_point(&p, &pose, &k0).unwrap();
        let b =
            project_with_distortion_center(&p, &pose, &k0, &Vector2::new(352.0, 216.0)).unwrap();
        assert!((a - b).norm() < 1e-12);

        // With distortion the offset matters.
        let c =
            project_with_distortion_center(&p, &pose, &k, &Vector2::new(352.0, 216.0)).unwrap();
        assert!((sym - c).norm() > 1e-3);
    }

    #[test]
    fn world_frame_projection_uses_camera_to_world_pose() {
        // Camera 2 m behind a point, rotated so the optical axis (+z cam)
        // points along world +x: the point must land on the principal point.
        let k = Intrinsics::from_fov(1.0, 640.0, 480.0, RadTan::default());
        let rot = euler_to_rot(-std::f64::consts::FRAC_PI_2, 0.0, -std::f64::consts::FRAC_PI_2);
        let pose = Pose::new(
            Vector3::zeros(),
            nalgebra::UnitQuaternion::from_rotation_matrix(&rot),
        );
        let px = project_point(&Vector3::new(2.0, 0.0, 0.0), &pose, &k).unwrap();
        assert!((px - Vector2::new(320.0, 240.0)).norm() < 1e-9);
    }
}
