use crate::SolveError;
use nalgebra::{DMatrix, Matrix3, Vector2};

/// Similarity that moves `pts` to centroid zero and mean distance sqrt(2).
fn normalizing_transform(pts: &[Vector2<f64>]) -> Result<Matrix3<f64>, SolveError> {
    let n = pts.len() as f64;
    let centroid = pts.iter().sum::<Vector2<f64>>() / n;
    let mean_dist = pts.iter().map(|p| (p - centroid).norm()).sum::<f64>() / n;
    if mean_dist < 1e-12 {
        return Err(SolveError::Degenerate(
            "all correspondences coincide".into(),
        ));
    }
    let s = std::f64::consts::SQRT_2 / mean_dist;
    Ok(Matrix3::new(
        s,
        0.0,
        -s * centroid.x,
        0.0,
        s,
        -s * centroid.y,
        0.0,
        0.0,
        1.0,
    ))
}

fn apply_h(h: &Matrix3<f64>, p: &Vector2<f64>) -> Vector2<f64> {
    let q = h * nalgebra::Vector3::new(p.x, p.y, 1.0);
    Vector2::new(q.x / q.z, q.y / q.z)
}

/// Estimates the 3x3 homography mapping `src` points to `dst` points by the
/// normalized direct linear transform.
///
/// The result is scaled to unit Frobenius norm with a non-negative lower
/// right entry. Fails with [`SolveError::Degenerate`] when the
/// correspondences do not determine a unique homography (collinear points)
/// and with [`SolveError::InsufficientData`] below 4 pairs.
pub fn estimate_homography(
    src: &[Vector2<f64>],
    dst: &[Vector2<f64>],
) -> Result<Matrix3<f64>, SolveError> {
    assert_eq!(src.len(), dst.len(), "correspondence lists must pair up");
    let n = src.len();
    if n < 4 {
        return Err(SolveError::InsufficientData(format!(
            "{n} correspondences, need at least 4"
        )));
    }
    let t_src = normalizing_transform(src)?;
    let t_dst = normalizing_transform(dst)?;

    // At least 9 rows (padding with zeros if needed) so the SVD is full and
    // exposes the null-space vector as the 9th right singular vector.
    let mut a = DMatrix::zeros((2 * n).max(9), 9);
    for (i, (ps, pd)) in src.iter().zip(dst).enumerate() {
        let s = apply_h(&t_src, ps);
        let d = apply_h(&t_dst, pd);
        let (x, y) = (s.x, s.y);
        let (u, v) = (d.x, d.y);
        let r0 = 2 * i;
        a[(r0, 0)] = -x;
        a[(r0, 1)] = -y;
        a[(r0, 2)] = -1.0;
        a[(r0, 6)] = u * x;
        a[(r0, 7)] = u * y;
        a[(r0, 8)] = u;
        let r1 = r0 + 1;
        a[(r1, 3)] = -x;
        a[(r1, 4)] = -y;
        a[(r1, 5)] = -1.0;
        a[(r1, 6)] = v * x;
        a[(r1, 7)] = v * y;
        a[(r1, 8)] = v;
    }

    let svd = a.svd(false, true);
    let sv = &svd.singular_values;
    // A unique solution leaves exactly one vanishing singular value; a
    // second small one means the points were (nearly) collinear.
    if sv[7] <= 1e-10 * sv[0] {
        return Err(SolveError::Degenerate(
            "correspondences are collinear or repeated".into(),
        ));
    }
    let v_t = svd.v_t.expect("v_t requested");
    let h_vec = v_t.row(8);
    let h_norm = Matrix3::new(
        h_vec[0], h_vec[1], h_vec[2], //
        h_vec[3], h_vec[4], h_vec[5], //
        h_vec[6], h_vec[7], h_vec[8],
    );

    let t_dst_inv = t_dst.try_inverse().expect("similarity is invertible");
    let mut h = t_dst_inv * h_norm * t_src;
    h /= h.norm();
    if h[(2, 2)] < 0.0 {
        h = -h;
    }
    Ok(h)
}
