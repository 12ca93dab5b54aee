use crate::{estimate_homography, lm_solve, zhang::zhang_init, LmOptions, NllsProblem, SolveError};
use nalgebra::{Matrix3, SMatrix, UnitQuaternion, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use vical_camera::{distort_radtan, Intrinsics, RadTan};
use vical_geom::Pose;
use vical_sim::{BoardSpec, Detection};

/// Number of camera parameters in the refinement: `fx, fy, cx, cy, k1, k2,
/// p1, p2`.
pub const INTRINSIC_DIM: usize = 8;

/// Options for [`calibrate_intrinsics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibOptions {
    /// Minimum number of full-view frames required.
    pub min_frames: usize,
    /// Frames are evenly subsampled down to this many refinement views.
    pub max_views: usize,
    /// `converged` additionally requires the RMS below this cap, pixels.
    pub rms_cap: f64,
    pub lm: LmOptions,
}

impl Default for CalibOptions {
    fn default() -> Self {
        Self {
            min_frames: 8,
            max_views: 30,
            rms_cap: 2.0,
            lm: LmOptions::default(),
        }
    }
}

/// Calibration outcome. Operations that only touch one half leave the other
/// at its identity/default value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibResult {
    pub intrinsics: Intrinsics,
    /// Camera-to-IMU transform estimate (identity until the extrinsic stage
    /// fills it in).
    pub extrinsic: Pose,
    /// Root-mean-square reprojection error per residual coordinate, pixels
    /// (matches the per-axis detection noise level on a good fit).
    pub reproj_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    pub solve_time: f64,
}

/// Projects one board point through explicit parameters: `intr` is
/// `[fx, fy, cx, cy, k1, k2, p1, p2]` and `(rvec, t)` the board-to-camera
/// pose as a rotation vector and translation.
pub fn project_param(
    intr: &[f64],
    rvec: &Vector3<f64>,
    t: &Vector3<f64>,
    p_board: &Vector3<f64>,
) -> Vector2<f64> {
    let rot = UnitQuaternion::from_scaled_axis(*rvec);
    let pc = rot * p_board + t;
    let x = pc.x / pc.z;
    let y = pc.y / pc.z;
    let dist = RadTan {
        k1: intr[4],
        k2: intr[5],
        p1: intr[6],
        p2: intr[7],
    };
    let (xd, yd) = distort_radtan(x, y, &dist);
    Vector2::new(intr[0] * xd + intr[2], intr[1] * yd + intr[3])
}

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Right Jacobian of SO(3): `exp((w + d)^) ~ exp(w^) exp((J_r(w) d)^)`.
fn so3_right_jacobian(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = w.norm_squared();
    let wx = skew(w);
    let (c1, c2) = if theta2 < 1e-12 {
        (0.5 - theta2 / 24.0, 1.0 / 6.0 - theta2 / 120.0)
    } else {
        let theta = theta2.sqrt();
        (
            (1.0 - theta.cos()) / theta2,
            (theta - theta.sin()) / (theta2 * theta),
        )
    };
    Matrix3::identity() - wx * c1 + wx * wx * c2
}

/// Closed-form Jacobian of [`project_param`] with respect to the 14
/// parameters `[fx, fy, cx, cy, k1, k2, p1, p2, rvec, t]`, derived by the
/// chain rule through the pinhole division and the distortion polynomial.
/// Returns the projected pixel together with the 2x14 Jacobian.
pub fn project_param_jacobian(
    intr: &[f64],
    rvec: &Vector3<f64>,
    t: &Vector3<f64>,
    p_board: &Vector3<f64>,
) -> (Vector2<f64>, SMatrix<f64, 2, 14>) {
    let (fx, fy) = (intr[0], intr[1]);
    let (k1, k2, p1, p2) = (intr[4], intr[5], intr[6], intr[7]);
    let rot = UnitQuaternion::from_scaled_axis(*rvec);
    let pc = rot * p_board + t;
    let (xc, yc, zc) = (pc.x, pc.y, pc.z);
    let x = xc / zc;
    let y = yc / zc;
    let r2 = x * x + y * y;
    let d1 = 1.0 + k1 * r2 + k2 * r2 * r2;
    let xd = x * d1 + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
    let yd = y * d1 + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
    let px = Vector2::new(fx * xd + intr[2], fy * yd + intr[3]);

    let mut jac = SMatrix::<f64, 2, 14>::zeros();
    // Intrinsic block.
    jac[(0, 0)] = xd;
    jac[(1, 1)] = yd;
    jac[(0, 2)] = 1.0;
    jac[(1, 3)] = 1.0;
    jac[(0, 4)] = fx * x * r2;
    jac[(1, 4)] = fy * y * r2;
    jac[(0, 5)] = fx * x * r2 * r2;
    jac[(1, 5)] = fy * y * r2 * r2;
    jac[(0, 6)] = fx * 2.0 * x * y;
    jac[(1, 6)] = fy * (r2 + 2.0 * y * y);
    jac[(0, 7)] = fx * (r2 + 2.0 * x * x);
    jac[(1, 7)] = fy * 2.0 * x * y;

    // Distorted normalized coordinates w.r.t. ideal ones.
    let dgain = k1 + 2.0 * k2 * r2;
    let dxd_dx = d1 + 2.0 * x * x * dgain + 2.0 * p1 * y + 6.0 * p2 * x;
    let dxd_dy = 2.0 * x * y * dgain + 2.0 * p1 * x + 2.0 * p2 * y;
    let dyd_dx = dxd_dy;
    let dyd_dy = d1 + 2.0 * y * y * dgain + 6.0 * p1 * y + 2.0 * p2 * x;
    let j_px_xy = SMatrix::<f64, 2, 2>::new(
        fx * dxd_dx,
        fx * dxd_dy,
        fy * dyd_dx,
        fy * dyd_dy,
    );
    // Ideal normalized coordinates w.r.t. the camera-frame point.
    let j_xy_pc = SMatrix::<f64, 2, 3>::new(
        1.0 / zc,
        0.0,
        -x / zc,
        0.0,
        1.0 / zc,
        -y / zc,
    );
    let j_px_pc = j_px_xy * j_xy_pc;
    // Camera-frame point w.r.t. the rotation vector (right perturbation)
    // and translation.
    let j_pc_rvec = -(rot.to_rotation_matrix().into_inner() * skew(p_board))
        * so3_right_jacobian(rvec);
    let j_px_rvec = j_px_pc * j_pc_rvec;
    for c in 0..3 {
        for r in 0..2 {
            jac[(r, 8 + c)] = j_px_rvec[(r, c)];
            jac[(r, 11 + c)] = j_px_pc[(r, c)];
        }
    }
    (px, jac)
}

/// Board-to-camera pose from a homography and known pinhole parameters.
///
/// Scales `K^-1 H` so its first two columns are unit rotation columns,
/// flips the sign to put the board in front of the camera, and projects the
/// column triplet onto SO(3).
pub fn decompose_homography(h: &Matrix3<f64>, k: &Intrinsics) -> Result<Pose, SolveError> {
    let k_inv = Matrix3::new(
        1.0 / k.fx,
        0.0,
        -k.cx / k.fx,
        0.0,
        1.0 / k.fy,
        -k.cy / k.fy,
        0.0,
        0.0,
        1.0,
    );
    decompose_normalized(&(k_inv * h))
}

/// [`decompose_homography`] for a homography already expressed in
/// normalized (pinhole-free) image coordinates.
pub fn decompose_normalized(m: &Matrix3<f64>) -> Result<Pose, SolveError> {
    let m1 = m.column(0).into_owned();
    let m2 = m.column(1).into_owned();
    let m3 = m.column(2).into_owned();
    let scale = 2.0 / (m1.norm() + m2.norm());
    if !scale.is_finite() || scale > 1e12 {
        return Err(SolveError::Degenerate("homography has vanishing columns".into()));
    }
    let mut r1 = m1 * scale;
    let mut r2 = m2 * scale;
    let mut t = m3 * scale;
    if t.z < 0.0 {
        r1 = -r1;
        r2 = -r2;
        t = -t;
    }
    let r3 = r1.cross(&r2);
    let q = Matrix3::from_columns(&[r1, r2, r3]);
    let svd = q.svd(true, true);
    let (u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut rot = u * v_t;
    if rot.determinant() < 0.0 {
        rot = u * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0)) * v_t;
    }
    Ok(Pose::new(
        t,
        UnitQuaternion::from_rotation_matrix(&nalgebra::Rotation3::from_matrix_unchecked(rot)),
    ))
}

pub(crate) fn board_point(board: &BoardSpec, id: usize) -> Vector3<f64> {
    board.corner_local(id / board.cols, id % board.cols)
}

/// Evenly subsamples `items` down to at most `max` entries.
pub(crate) fn subsample<T: Clone>(items: &[T], max: usize) -> Vec<T> {
    if items.len() <= max {
        return items.to_vec();
    }
    (0..max)
        .map(|i| items[i * items.len() / max].clone())
        .collect()
}

/// Intrinsic calibration from board observations.
///
/// Keeps only full-view frames, subsamples them to `opts.max_views`, seeds
/// `fx, fy, cx, cy` by [`zhang_init`] and each view pose by homography
/// decomposition, then jointly refines the eight camera parameters and all
/// view poses against the reprojection residuals. The distortion model is
/// centered on the principal point.
pub fn calibrate_intrinsics(
    frames: &[Detection],
    board: &BoardSpec,
    width: f64,
    height: f64,
    opts: &CalibOptions,
) -> Result<CalibResult, SolveError> {
    let t_start = std::time::Instant::now();
    let full: Vec<&Detection> = frames.iter().filter(|d| d.full_view).collect();
    if full.len() < opts.min_frames {
        return Err(SolveError::InsufficientData(format!(
            "{} full-view frames, need at least {}",
            full.len(),
            opts.min_frames
        )));
    }
    let views = subsample(&full, opts.max_views);

    // Per-view correspondences: board 3-D point (z = 0) and observed pixel.
    let corr: Vec<Vec<(Vector3<f64>, Vector2<f64>)>> = views
        .iter()
        .map(|d| {
            d.corners
                .iter()
                .map(|(id, px)| (board_point(board, *id), Vector2::new(px[0], px[1])))
                .collect()
        })
        .collect();

    let homographies: Vec<Matrix3<f64>> = corr
        .iter()
        .map(|pts| {
            let src: Vec<Vector2<f64>> = pts.iter().map(|(b, _)| Vector2::new(b.x, b.y)).collect();
            let dst: Vec<Vector2<f64>> = pts.iter().map(|(_, px)| *px).collect();
            estimate_homography(&src, &dst)
        })
        .collect::<Result<_, _>>()?;

    let k0 = zhang_init(&homographies, width, height)?;
    let n_views = views.len();
    let mut x0 = vec![k0.fx, k0.fy, k0.cx, k0.cy, 0.0, 0.0, 0.0, 0.0];
    for h in &homographies {
        let pose = decompose_homography(h, &k0)?;
        let rvec = pose.orientation.scaled_axis();
        x0.extend_from_slice(&[rvec.x, rvec.y, rvec.z]);
        x0.extend_from_slice(&[pose.position.x, pose.position.y, pose.position.z]);
    }

    let n_points: usize = corr.iter().map(|v| v.len()).sum();
    let problem = NllsProblem {
        dim: INTRINSIC_DIM + 6 * n_views,
        residual_dim: 2 * n_points,
        residual: Box::new(|x: &[f64], out: &mut [f64]| {
            let mut at = 0;
            for (v, pts) in corr.iter().enumerate() {
                let base = INTRINSIC_DIM + 6 * v;
                let rvec = Vector3::new(x[base], x[base + 1], x[base + 2]);
                let t = Vector3::new(x[base + 3], x[base + 4], x[base + 5]);
                for (pb, obs) in pts {
                    let px = project_param(&x[..INTRINSIC_DIM], &rvec, &t, pb);
                    out[at] = px.x - obs.x;
                    out[at + 1] = px.y - obs.y;
                    at += 2;
                }
            }
        }),
    };

    let report = lm_solve(&problem, &x0, &opts.lm);
    let reproj_rms = (report.cost / (2.0 * n_points as f64)).sqrt();
    let x = report.x.as_slice();
    let intrinsics = Intrinsics {
        fx: x[0],
        fy: x[1],
        cx: x[2],
        cy: x[3],
        width,
        height,
        dist: RadTan {
            k1: x[4],
            k2: x[5],
            p1: x[6],
            p2: x[7],
        },
    };
    Ok(CalibResult {
        intrinsics,
        extrinsic: Pose::identity(),
        reproj_rms,
        converged: report.converged && reproj_rms < opts.rms_cap,
        iterations: report.iterations,
        solve_time: t_start.elapsed().as_secs_f64(),
    })
}
