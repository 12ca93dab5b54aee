use crate::Mlp;

/// Adaptive-moment gradient descent for one [`Mlp`].
///
/// Keeps first and second moment estimates in network-shaped buffers and
/// applies the bias-corrected update `p -= lr * m_hat / (sqrt(v_hat) + eps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Completed steps (drives bias correction).
    pub t: u64,
    pub m: Mlp,
    pub v: Mlp,
}

impl Adam {
    pub fn new(net: &Mlp, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: net.zeros_like(),
            v: net.zeros_like(),
        }
    }

    /// One update of `net` from gradients accumulated in `grads`.
    pub fn step(&mut self, net: &mut Mlp, grads: &Mlp) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for l in 0..net.n_layers() {
            Self::step_slice(
                &mut net.w[l],
                &grads.w[l],
                &mut self.m.w[l],
                &mut self.v.w[l],
                self.lr,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            );
            Self::step_slice(
                &mut net.b[l],
                &grads.b[l],
                &mut self.m.b[l],
                &mut self.v.b[l],
                self.lr,
                self.beta1,
                self.beta2,
                self.eps,
                bc1,
                bc2,
            );
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn step_slice(
        params: &mut [f64],
        grads: &[f64],
        m: &mut [f64],
        v: &mut [f64],
        lr: f64,
        beta1: f64,
        beta2: f64,
        eps: f64,
        bc1: f64,
        bc2: f64,
    ) {
        for i in 0..params.len() {
            let g = grads[i];
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_param_net(value: f64) -> Mlp {
        let mut net = Mlp {
            sizes: vec![1, 1],
            w: vec![vec![value]],
            b: vec![vec![0.0]],
        };
        net.b[0][0] = 0.0;
        net
    }

    #[test]
    fn first_step_matches_hand_computed_update() {
        // g = 0.5, lr = 0.1: m = 0.05, v = 2.5e-4, m_hat = 0.5, v_hat = 0.25,
        // delta = -0.1 * 0.5 / (0.5 + 1e-8) ~= -0.1.
        let mut net = one_param_net(2.0);
        let mut grads = net.zeros_like();
        grads.w[0][0] = 0.5;
        let mut adam = Adam::new(&net, 0.1);
        adam.step(&mut net, &grads);
        assert!((net.w[0][0] - 1.9).abs() < 1e-8, "{}", net.w[0][0]);
        assert!((adam.m.w[0][0] - 0.05).abs() < 1e-15);
        assert!((adam.v.w[0][0] - 2.5e-4).abs() < 1e-15);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut net = Mlp::init(&[1, 1], &mut rng);
        let mut adam = Adam::new(&net, 0.05);
        // Minimize (w - 3)^2 + (b + 1)^2.
        for _ in 0..2000 {
            let mut grads = net.zeros_like();
            grads.w[0][0] = 2.0 * (net.w[0][0] - 3.0);
            grads.b[0][0] = 2.0 * (net.b[0][0] + 1.0);
            adam.step(&mut net, &grads);
        }
        assert!((net.w[0][0] - 3.0).abs() < 1e-4);
        assert!((net.b[0][0] + 1.0).abs() < 1e-4);
    }
}
