use crate::intrinsics::{board_point, decompose_normalized, project_param};
use crate::{estimate_homography, lm_solve, LmOptions, NllsProblem, SolveError};
use nalgebra::{UnitQuaternion, Vector2, Vector3};
use vical_camera::{undistort_radtan, Intrinsics};
use vical_geom::Pose;
use vical_sim::{BoardSpec, Detection};

const MIN_PNP_CORNERS: usize = 6;

/// Board-to-camera pose from a single detection and known camera parameters.
///
/// Undistorts the observed corners into normalized image coordinates,
/// seeds the pose from the board-plane homography, and refines the six pose
/// parameters against the full projection model.
pub fn pnp_board_pose(
    detection: &Detection,
    k: &Intrinsics,
    board: &BoardSpec,
) -> Result<Pose, SolveError> {
    if detection.corners.len() < MIN_PNP_CORNERS {
        return Err(SolveError::InsufficientData(format!(
            "{} corners, need at least {MIN_PNP_CORNERS}",
            detection.corners.len()
        )));
    }
    let mut board_xy = Vec::with_capacity(detection.corners.len());
    let mut norm_xy = Vec::with_capacity(detection.corners.len());
    let mut corr = Vec::with_capacity(detection.corners.len());
    for (id, px) in &detection.corners {
        let pb = board_point(board, *id);
        let (xd, yd) = k.to_normalized(&Vector2::new(px[0], px[1]));
        let (x, y) = undistort_radtan(xd, yd, &k.dist)
            .map_err(|_| SolveError::Degenerate("corner undistortion diverged".into()))?;
        board_xy.push(Vector2::new(pb.x, pb.y));
        norm_xy.push(Vector2::new(x, y));
        corr.push((pb, Vector2::new(px[0], px[1])));
    }

    let h = estimate_homography(&board_xy, &norm_xy)?;
    let seed = decompose_normalized(&h)?;

    let intr = [k.fx, k.fy, k.cx, k.cy, k.dist.k1, k.dist.k2, k.dist.p1, k.dist.p2];
    let problem = NllsProblem {
        dim: 6,
        residual_dim: 2 * corr.len(),
        residual: Box::new(|x: &[f64], out: &mut [f64]| {
            let rvec = Vector3::new(x[0], x[1], x[2]);
            let t = Vector3::new(x[3], x[4], x[5]);
            for (i, (pb, obs)) in corr.iter().enumerate() {
                let px = project_param(&intr, &rvec, &t, pb);
                out[2 * i] = px.x - obs.x;
                out[2 * i + 1] = px.y - obs.y;
            }
        }),
    };
    let rvec0 = seed.orientation.scaled_axis();
    let x0 = [
        rvec0.x,
        rvec0.y,
        rvec0.z,
        seed.position.x,
        seed.position.y,
        seed.position.z,
    ];
    let report = lm_solve(&problem, &x0, &LmOptions::default());
    if !report.converged {
        return Err(SolveError::Degenerate("pose refinement did not converge".into()));
    }
    let x = report.x.as_slice();
    Ok(Pose::new(
        Vector3::new(x[3], x[4], x[5]),
        UnitQuaternion::from_scaled_axis(Vector3::new(x[0], x[1], x[2])),
    ))
}
