//! Terminal-step calibration: the real offline solver, a noisy ground-truth
//! stub for fast pipeline tests, or none at all.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use vical_sim::{EpisodeRecord, RigConfig};
use vical_solver::{solve_record, JointSolution, RecordSolveOptions};

/// Ground-truth calibration parameters in the solved layout:
/// `[fx, fy, cx, cy, k1, k2, p1, p2, x, y, z, roll, pitch, yaw]`.
pub fn truth_vector(rig: &RigConfig) -> Vec<f64> {
    let mut v = rig.intrinsic_vector().to_vec();
    v.extend_from_slice(&rig.extrinsic_vector());
    v
}

/// What the calibrator produced at a terminal step.
#[derive(Debug, Clone)]
pub enum CalibOutcome {
    /// Full offline solution of the recorded episode.
    Solved(Box<JointSolution>),
    /// Ground truth with Gaussian relative noise (stub).
    Stubbed { estimate: Vec<f64> },
    /// The solver rejected the episode data.
    Failed(String),
}

impl CalibOutcome {
    /// The 14-parameter estimate, when one exists.
    pub fn estimate(&self) -> Option<Vec<f64>> {
        match self {
            CalibOutcome::Solved(sol) => {
                let mut v = sol.intrinsic_vector.to_vec();
                v.extend_from_slice(&sol.extrinsic_vector);
                Some(v)
            }
            CalibOutcome::Stubbed { estimate } => Some(estimate.clone()),
            CalibOutcome::Failed(_) => None,
        }
    }
}

/// Calibration backend used when an episode reaches its terminal condition.
#[derive(Debug, Clone)]
pub enum Calibrator {
    /// Solve the record with the offline pipeline.
    Real(RecordSolveOptions),
    /// Perturb the ground truth with per-component relative Gaussian noise
    /// of the given magnitude in percent. Fast stand-in for smoke tests.
    Stubbed { noise_pct: f64 },
    /// Never calibrate (evaluation runs solve separately per task).
    Skip,
}

impl Calibrator {
    /// Scores a terminal episode. Returns `None` for [`Calibrator::Skip`].
    pub fn solve(
        &self,
        record: &EpisodeRecord,
        rig: &RigConfig,
        rng: &mut ChaCha8Rng,
    ) -> Option<CalibOutcome> {
        match self {
            Calibrator::Real(opts) => Some(match solve_record(record, opts) {
                Ok(sol) => CalibOutcome::Solved(Box::new(sol)),
                Err(e) => CalibOutcome::Failed(e.to_string()),
            }),
            Calibrator::Stubbed { noise_pct } => {
                let scale = noise_pct / 100.0;
                let estimate = truth_vector(rig)
                    .iter()
                    .map(|t| {
                        let z: f64 = rng.sample(StandardNormal);
                        t * (1.0 + scale * z)
                    })
                    .collect();
                Some(CalibOutcome::Stubbed { estimate })
            }
            Calibrator::Skip => None,
        }
    }
}
