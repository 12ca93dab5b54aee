use crate::SolveError;

/// Relative error of `estimate` against `truth` as a percentage:
/// `100 * |truth - estimate| / |truth|` over the whole vectors.
///
/// The two slices must have equal length; a zero-norm truth vector cannot be
/// scored and yields [`SolveError::ZeroTruth`].
pub fn percent_error(truth: &[f64], estimate: &[f64]) -> Result<f64, SolveError> {
    assert_eq!(truth.len(), estimate.len(), "vector length mismatch");
    let norm: f64 = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(SolveError::ZeroTruth);
    }
    let diff: f64 = truth
        .iter()
        .zip(estimate)
        .map(|(t, e)| (t - e) * (t - e))
        .sum::<f64>()
        .sqrt();
    Ok(100.0 * diff / norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_estimate_is_zero_percent() {
        let v = [3.0, -1.0, 2.5];
        assert_eq!(percent_error(&v, &v).unwrap(), 0.0);
    }

    #[test]
    fn doubled_estimate_is_one_hundred_percent() {
        let truth = [1.0, -2.0, 0.5];
        let est: Vec<f64> = truth.iter().map(|v| 2.0 * v).collect();
        let err = percent_error(&truth, &est).unwrap();
        assert!((err - 100.0).abs() < 1e-12);
    }

    #[test]
    fn single_component_offset() {
        let err = percent_error(&[3.0, 4.0], &[3.0, 4.5]).unwrap();
        assert!((err - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_truth_is_rejected() {
        assert!(matches!(
            percent_error(&[0.0, 0.0], &[1.0, 0.0]),
            Err(SolveError::ZeroTruth)
        ));
    }
}
