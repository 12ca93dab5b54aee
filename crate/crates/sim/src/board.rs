use crate::{BoardSpec, RigConfig, SimConfig};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use vical_geom::Pose;

/// One simulated checkerboard observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Visible corners as `(corner_id, [u, v])`, ordered by ascending id.
    pub corners: Vec<(usize, [f64; 2])>,
    /// Centroid of the four outer corners, pixels.
    pub center: [f64; 2],
    /// Shoelace area of the outer-corner quadrilateral over the image area.
    pub area_prop: f64,
    /// Angle in `[0, pi]` at the board's `(0, 0)` corner between the edges
    /// toward `(rows-1, 0)` and `(0, cols-1)`.
    pub skew: f64,
    /// True when every interior corner projected inside the image.
    pub full_view: bool,
}

/// Builds a [`Detection`] from a visible-corner list, or `None` when any of
/// the four outer corners (which anchor the summary statistics) is missing.
///
/// Shared by the simulator and by the episode-record reader so on-disk corner
/// tables summarize exactly like live observations.
pub fn summarize_corners(
    board: &BoardSpec,
    width: f64,
    height: f64,
    corners: Vec<(usize, [f64; 2])>,
) -> Option<Detection> {
    let outer_ids = board.outer_corner_ids();
    let mut outer = [[0.0f64; 2]; 4];
    for (slot, id) in outer_ids.iter().enumerate() {
        let px = corners.iter().find(|(cid, _)| cid == id)?;
        outer[slot] = px.1;
    }

    let center = [
        (outer[0][0] + outer[1][0] + outer[2][0] + outer[3][0]) / 4.0,
        (outer[0][1] + outer[1][1] + outer[2][1] + outer[3][1]) / 4.0,
    ];

    let mut twice_area = 0.0;
    for i in 0..4 {
        let a = outer[i];
        let b = outer[(i + 1) % 4];
        twice_area += a[0] * b[1] - b[0] * a[1];
    }
    let area_prop = 0.5 * twice_area.abs() / (width * height);

    // outer[3] is (rows-1, 0) and outer[1] is (0, cols-1); both edges hinge
    // at outer[0] = (0, 0).
    let e1 = [outer[3][0] - outer[0][0], outer[3][1] - outer[0][1]];
    let e2 = [outer[1][0] - outer[0][0], outer[1][1] - outer[0][1]];
    let n1 = (e1[0] * e1[0] + e1[1] * e1[1]).sqrt();
    let n2 = (e2[0] * e2[0] + e2[1] * e2[1]).sqrt();
    let skew = if n1 == 0.0 || n2 == 0.0 {
        0.0
    } else {
        let c = ((e1[0] * e2[0] + e1[1] * e2[1]) / (n1 * n2)).clamp(-1.0, 1.0);
        c.acos()
    };

    let full_view = corners.len() == board.n_corners();
    Some(Detection {
        corners,
        center,
        area_prop,
        skew,
        full_view,
    })
}

/// Observes the rig's board from `camera_pose`.
///
/// Every interior corner is projected through the rig's camera (including its
/// distortion-center offset); corners falling inside the image are reported
/// with `N(0, sigma_px^2)` pixel noise. Returns `None` when fewer than
/// `cfg.min_corners` corners are visible (default: all of them) or when an
/// outer corner is hidden.
///
/// Noise is drawn for all corners in id order whether or not they are
/// visible, so the RNG stream consumed per observation is constant.
pub fn observe_board(
    camera_pose: &Pose,
    rig: &RigConfig,
    cfg: &SimConfig,
    rng: &mut ChaCha8Rng,
) -> Option<Detection> {
    let board = &rig.board;
    let n = board.n_corners();
    let mut corners = Vec::with_capacity(n);
    let dist_center = rig.dist_center_px();
    for row in 0..board.rows {
        for col in 0..board.cols {
            let world = board.corner_world(row, col);
            let projected = vical_camera::project_with_distortion_center(
                &world,
                camera_pose,
                &rig.intrinsics,
                &dist_center,
            );
            let du: f64 = rng.sample(StandardNormal);
            let dv: f64 = rng.sample(StandardNormal);
            if let Some(px) = projected {
                corners.push((
                    board.corner_id(row, col),
                    [px[0] + cfg.pixel_noise * du, px[1] + cfg.pixel_noise * dv],
                ));
            }
        }
    }
    let min_corners = cfg.min_corners.unwrap_or(n);
    if corners.len() < min_corners {
        return None;
    }
    summarize_corners(
        board,
        rig.intrinsics.width,
        rig.intrinsics.height,
        corners,
    )
}
