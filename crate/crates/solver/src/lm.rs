use nalgebra::{DMatrix, DVector};

/// A nonlinear least-squares problem: a residual map from `dim` parameters
/// to `residual_dim` residual components.
pub struct NllsProblem<'a> {
    pub dim: usize,
    pub residual_dim: usize,
    pub residual: Box<dyn Fn(&[f64], &mut [f64]) + 'a>,
}

impl NllsProblem<'_> {
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut r = DVector::zeros(self.residual_dim);
        (self.residual)(x.as_slice(), r.as_mut_slice());
        r
    }
}

/// Tuning knobs for [`lm_solve`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LmOptions {
    pub max_iters: usize,
    /// Stop when the accepted step is shorter than this.
    pub dx_tol: f64,
    /// Stop when the gradient's max-norm falls below this.
    pub grad_tol: f64,
    pub lambda0: f64,
    /// Relative forward-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            dx_tol: 1e-10,
            grad_tol: 1e-10,
            lambda0: 1e-6,
            fd_step: 1e-6,
        }
    }
}

/// Outcome of an LM run. When `converged` is false the best iterate found is
/// still returned.
#[derive(Debug, Clone)]
pub struct LmReport {
    pub x: DVector<f64>,
    pub converged: bool,
    /// Number of accepted steps.
    pub iterations: usize,
    /// Final sum of squared residuals.
    pub cost: f64,
    /// Sum of squared residuals after each accepted step (starting cost
    /// first); non-increasing by construction.
    pub cost_history: Vec<f64>,
}

/// Forward-difference Jacobian of `problem` at `x`, using the same relative
/// step as [`lm_solve`].
pub fn fd_jacobian(problem: &NllsProblem, x: &DVector<f64>, fd_step: f64) -> DMatrix<f64> {
    let r0 = problem.eval(x);
    let mut jac = DMatrix::zeros(problem.residual_dim, problem.dim);
    let mut xp = x.clone();
    for j in 0..problem.dim {
        let h = fd_step * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let rj = problem.eval(&xp);
        xp[j] = x[j];
        for i in 0..problem.residual_dim {
            jac[(i, j)] = (rj[i] - r0[i]) / h;
        }
    }
    jac
}

/// Minimizes `|r(x)|^2` by Levenberg-Marquardt with multiplicative damping
/// on the normal-equation diagonal: rejected steps scale the damping up by
/// 10, accepted steps scale it down by 10. The Jacobian is built by forward
/// finite differences.
pub fn lm_solve(problem: &NllsProblem, x0: &[f64], opts: &LmOptions) -> LmReport {
    assert_eq!(x0.len(), problem.dim, "x0 length must match problem dim");
    let mut x = DVector::from_column_slice(x0);
    let mut r = problem.eval(&x);
    let mut cost = r.norm_squared();
    let mut lambda = opts.lambda0;
    let mut iterations = 0;
    let mut converged = false;
    let mut cost_history = vec![cost];

    'outer: while iterations < opts.max_iters {
        let jac = fd_jacobian(problem, &x, opts.fd_step);
        let grad = jac.transpose() * &r;
        if grad.amax() < opts.grad_tol {
            converged = true;
            break;
        }
        let jtj = jac.transpose() * &jac;

        loop {
            let mut damped = jtj.clone();
            for j in 0..problem.dim {
                // Floor keeps the system solvable when a parameter has no
                // residual influence at this point.
                damped[(j, j)] += lambda * jtj[(j, j)].max(1e-12);
            }
            let step = match damped.cholesky() {
                Some(chol) => chol.solve(&(-&grad)),
                None => {
                    lambda *= 10.0;
                    if lambda > 1e14 {
                        break 'outer;
                    }
                    continue;
                }
            };
            let x_new = &x + &step;
            let r_new = problem.eval(&x_new);
            let cost_new = r_new.norm_squared();
            if cost_new < cost {
                let small_step = step.norm() < opts.dx_tol;
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = (lambda / 10.0).max(1e-12);
                iterations += 1;
                cost_history.push(cost);
                if small_step {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            if step.norm() < opts.dx_tol {
                // Cannot improve even with a vanishing step: at a minimum.
                converged = true;
                break 'outer;
            }
            lambda *= 10.0;
            if lambda > 1e14 {
                break 'outer;
            }
        }
    }

    LmReport {
        x,
        converged,
        iterations,
        cost,
        cost_history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    #[test]
    fn linear_least_squares_solves_in_a_few_steps() {
        // r = A x - b with a well-conditioned 5x3 A; optimum is the
        // normal-equation solution.
        let a = DMatrix::from_row_slice(
            5,
            3,
            &[
                2.0, 0.5, -1.0, //
                0.3, 1.8, 0.2, //
                -0.7, 0.4, 2.2, //
                1.1, -0.9, 0.6, //
                0.2, 0.3, 0.9,
            ],
        );
        let b = DVector::from_column_slice(&[1.0, -2.0, 0.5, 3.0, -1.0]);
        let expect = (a.transpose() * &a)
            .cholesky()
            .unwrap()
            .solve(&(a.transpose() * &b));

        let problem = NllsProblem {
            dim: 3,
            residual_dim: 5,
            residual: Box::new(|x, out| {
                let xv = DVector::from_column_slice(x);
                let r = &a * xv - &b;
                out.copy_from_slice(r.as_slice());
            }),
        };
        let report = lm_solve(&problem, &[0.0, 0.0, 0.0], &LmOptions::default());
        assert!(report.converged);
        assert!(report.iterations <= 3, "took {} iterations", report.iterations);
        assert!((report.x - expect).amax() < 1e-10);
    }

    #[test]
    fn rosenbrock_reaches_the_global_minimum() {
        let problem = NllsProblem {
            dim: 2,
            residual_dim: 2,
            residual: Box::new(|x, out| {
                out[0] = 10.0 * (x[1] - x[0] * x[0]);
                out[1] = 1.0 - x[0];
            }),
        };
        let report = lm_solve(&problem, &[-1.2, 1.0], &LmOptions::default());
        assert!(report.converged);
        assert!((report.x[0] - 1.0).abs() < 1e-6, "x = {}", report.x[0]);
        assert!((report.x[1] - 1.0).abs() < 1e-6, "y = {}", report.x[1]);
    }

    #[test]
    fn starting_at_the_optimum_changes_nothing() {
        let problem = NllsProblem {
            dim: 2,
            residual_dim: 3,
            residual: Box::new(|x, out| {
                out[0] = x[0] - 1.0;
                out[1] = x[1] + 2.0;
                out[2] = 0.5 * (x[0] - 1.0);
            }),
        };
        let report = lm_solve(&problem, &[1.0, -2.0], &LmOptions::default());
        assert!(report.converged);
        assert!(report.iterations <= 1);
        assert!((report.x[0] - 1.0).abs() < 1e-10);
        assert!((report.x[1] + 2.0).abs() < 1e-10);
    }

    #[test]
    fn accepted_costs_never_increase() {
        // A mildly nasty nonconvex residual.
        let problem = NllsProblem {
            dim: 2,
            residual_dim: 3,
            residual: Box::new(|x, out| {
                out[0] = x[0].sin() * 3.0 + x[1] * x[1] - 1.0;
                out[1] = x[0] * x[1] - 0.5;
                out[2] = (x[0] - 2.0) * 0.3;
            }),
        };
        let report = lm_solve(&problem, &[4.0, -3.0], &LmOptions::default());
        for w in report.cost_history.windows(2) {
            assert!(w[1] <= w[0], "cost increased: {} -> {}", w[0], w[1]);
        }
        assert!(report.cost < report.cost_history[0]);
    }

    #[test]
    fn non_convergence_reports_best_iterate() {
        // Exponential decay toward an asymptote the solver cannot reach in
        // few iterations with a tight budget.
        let problem = NllsProblem {
            dim: 1,
            residual_dim: 1,
            residual: Box::new(|x, out| {
                out[0] = (-x[0]).exp();
            }),
        };
        let opts = LmOptions {
            max_iters: 3,
            ..LmOptions::default()
        };
        let report = lm_solve(&problem, &[0.0], &opts);
        assert!(!report.converged);
        assert!(report.x[0] > 0.0, "should have moved downhill");
        assert!(report.cost < 1.0);
    }
}
