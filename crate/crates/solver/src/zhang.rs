use crate::SolveError;
use nalgebra::{DMatrix, Matrix3};
use vical_camera::{Intrinsics, RadTan};

/// Row of the absolute-conic constraint `v_ij^T b = 0` for a skewless
/// camera, with `b = (B11, B22, B13, B23, B33)`.
fn conic_row(h: &Matrix3<f64>, i: usize, j: usize) -> [f64; 5] {
    let hi = h.column(i);
    let hj = h.column(j);
    [
        hi[0] * hj[0],
        hi[1] * hj[1],
        hi[2] * hj[0] + hi[0] * hj[2],
        hi[2] * hj[1] + hi[1] * hj[2],
        hi[2] * hj[2],
    ]
}

/// Closed-form pinhole initialization from board-to-image homographies.
///
/// Solves the linear system the image of the absolute conic satisfies under
/// a skewless camera and extracts `fx, fy, cx, cy`; distortion starts at
/// zero. Needs at least 3 homographies from genuinely different board
/// orientations; a rank-deficient system (all views alike or fronto-
/// parallel) reports [`SolveError::Degenerate`].
pub fn zhang_init(
    homographies: &[Matrix3<f64>],
    width: f64,
    height: f64,
) -> Result<Intrinsics, SolveError> {
    let m = homographies.len();
    if m < 3 {
        return Err(SolveError::InsufficientData(format!(
            "{m} homographies, need at least 3"
        )));
    }
    let mut a = DMatrix::zeros(2 * m, 5);
    for (k, h) in homographies.iter().enumerate() {
        let v12 = conic_row(h, 0, 1);
        let v11 = conic_row(h, 0, 0);
        let v22 = conic_row(h, 1, 1);
        for c in 0..5 {
            a[(2 * k, c)] = v12[c];
            a[(2 * k + 1, c)] = v11[c] - v22[c];
        }
    }

    let svd = a.svd(false, true);
    let sv = &svd.singular_values;
    if sv[3] <= 1e-8 * sv[0] {
        return Err(SolveError::Degenerate(
            "view orientations do not constrain the conic".into(),
        ));
    }
    let v_t = svd.v_t.expect("v_t requested");
    let mut b: Vec<f64> = v_t.row(4).iter().cloned().collect();
    if b[0] < 0.0 {
        for x in &mut b {
            *x = -*x;
        }
    }
    let (b11, b22, b13, b23, b33) = (b[0], b[1], b[2], b[3], b[4]);
    if b11 <= 0.0 || b22 <= 0.0 {
        return Err(SolveError::Degenerate("conic is not positive".into()));
    }
    let cy = -b23 / b22;
    let cx = -b13 / b11;
    let lambda = b33 - b13 * b13 / b11 - b23 * b23 / b22;
    if lambda <= 0.0 {
        return Err(SolveError::Degenerate("conic scale is not positive".into()));
    }
    let fx = (lambda / b11).sqrt();
    let fy = (lambda / b22).sqrt();
    if !(fx.is_finite() && fy.is_finite()) || fx <= 0.0 || fy <= 0.0 {
        return Err(SolveError::Degenerate("focal solution invalid".into()));
    }
    Ok(Intrinsics {
        fx,
        fy,
        cx,
        cy,
        width,
        height,
        dist: RadTan::default(),
    })
}
