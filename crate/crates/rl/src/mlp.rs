use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Dense multilayer perceptron: ReLU hidden layers, linear output.
///
/// Layer `l` maps `sizes[l]` inputs to `sizes[l+1]` outputs through a
/// row-major weight matrix `w[l]` and bias `b[l]`. Parameters are plain
/// `f64` vectors so gradient buffers, optimizer moments, and checkpoints
/// can all share the same shape (see [`Mlp::zeros_like`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    /// `w[l][i * sizes[l] + j]` is the weight from input `j` to output `i`.
    pub w: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

/// Activations recorded by [`Mlp::forward_cached`]: the input of every layer
/// and its pre-activation output, which is all backpropagation needs.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// `inputs[l]` is the vector fed to layer `l` (so `inputs[0]` is `x`).
    pub inputs: Vec<Vec<f64>>,
    /// `pre[l]` is `w[l] * inputs[l] + b[l]` before any activation.
    pub pre: Vec<Vec<f64>>,
}

impl Mlp {
    /// A network with all parameters drawn from `U(-1/sqrt(fan_in),
    /// 1/sqrt(fan_in))` per layer (weights row-major first, then biases).
    pub fn init(sizes: &[usize], rng: &mut ChaCha8Rng) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output widths");
        let mut w = Vec::new();
        let mut b = Vec::new();
        for l in 0..sizes.len() - 1 {
            let bound = 1.0 / (sizes[l] as f64).sqrt();
            w.push(
                (0..sizes[l + 1] * sizes[l])
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect(),
            );
            b.push((0..sizes[l + 1]).map(|_| rng.gen_range(-bound..bound)).collect());
        }
        Self {
            sizes: sizes.to_vec(),
            w,
            b,
        }
    }

    /// A same-shaped network with every parameter zero (gradient and
    /// optimizer-moment storage).
    pub fn zeros_like(&self) -> Self {
        Self {
            sizes: self.sizes.clone(),
            w: self.w.iter().map(|l| vec![0.0; l.len()]).collect(),
            b: self.b.iter().map(|l| vec![0.0; l.len()]).collect(),
        }
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn in_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn out_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn n_params(&self) -> usize {
        self.w.iter().map(Vec::len).sum::<usize>() + self.b.iter().map(Vec::len).sum::<usize>()
    }

    /// All parameters as one vector: per layer, weights then biases.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in 0..self.n_layers() {
            out.extend_from_slice(&self.w[l]);
            out.extend_from_slice(&self.b[l]);
        }
        out
    }

    /// Inverse of [`Mlp::flat_params`].
    pub fn set_flat_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.n_params(), "parameter count mismatch");
        let mut at = 0;
        for l in 0..self.w.len() {
            let nw = self.w[l].len();
            self.w[l].copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = self.b[l].len();
            self.b[l].copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
    }

    /// Scales all parameters in place (used to decay gradient accumulators).
    pub fn scale(&mut self, factor: f64) {
        for l in 0..self.w.len() {
            for v in &mut self.w[l] {
                *v *= factor;
            }
            for v in &mut self.b[l] {
                *v *= factor;
            }
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_cached(x).0
    }

    /// Forward pass that also returns the activations needed by
    /// [`Mlp::backward`].
    pub fn forward_cached(&self, x: &[f64]) -> (Vec<f64>, MlpCache) {
        assert_eq!(x.len(), self.in_dim(), "input width mismatch");
        let last = self.n_layers() - 1;
        let mut inputs = Vec::with_capacity(self.n_layers());
        let mut pre = Vec::with_capacity(self.n_layers());
        let mut a = x.to_vec();
        for l in 0..self.n_layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let mut z = self.b[l].clone();
            for i in 0..n_out {
                let row = &self.w[l][i * n_in..(i + 1) * n_in];
                let mut acc = 0.0;
                for (wij, aj) in row.iter().zip(&a) {
                    acc += wij * aj;
                }
                z[i] += acc;
            }
            inputs.push(a);
            a = if l == last {
                z.clone()
            } else {
                z.iter().map(|v| v.max(0.0)).collect()
            };
            pre.push(z);
        }
        (a, MlpCache { inputs, pre })
    }

    /// Exact reverse-mode gradients.
    ///
    /// `upstream` is `dL/dy` for the forward pass that produced `cache`.
    /// Parameter gradients are *accumulated* into `grads` (a
    /// [`Mlp::zeros_like`] buffer), so one buffer can sum a whole batch.
    /// Returns `dL/dx`.
    pub fn backward(&self, cache: &MlpCache, upstream: &[f64], grads: &mut Mlp) -> Vec<f64> {
        assert_eq!(upstream.len(), self.out_dim(), "upstream width mismatch");
        let last = self.n_layers() - 1;
        let mut g = upstream.to_vec();
        for l in (0..self.n_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            // dL/dz: the output layer is linear, hidden layers gate through
            // the ReLU derivative.
            let dz: Vec<f64> = if l == last {
                g
            } else {
                g.iter()
                    .zip(&cache.pre[l])
                    .map(|(gi, zi)| if *zi > 0.0 { *gi } else { 0.0 })
                    .collect()
            };
            let a = &cache.inputs[l];
            for i in 0..n_out {
                let row = &mut grads.w[l][i * n_in..(i + 1) * n_in];
                for (dwij, aj) in row.iter_mut().zip(a) {
                    *dwij += dz[i] * aj;
                }
                grads.b[l][i] += dz[i];
            }
            let mut g_prev = vec![0.0; n_in];
            for i in 0..n_out {
                let row = &self.w[l][i * n_in..(i + 1) * n_in];
                for (gj, wij) in g_prev.iter_mut().zip(row) {
                    *gj += wij * dz[i];
                }
            }
            g = g_prev;
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn zero_weights_pass_the_bias_through() {
        let mut net = Mlp::init(&[3, 4, 2], &mut rng(1));
        // With zero weights every layer ignores its input, so the output is
        // exactly the final bias whatever x is.
        for l in 0..net.n_layers() {
            net.w[l].iter_mut().for_each(|v| *v = 0.0);
            net.b[l].iter_mut().for_each(|v| *v = 0.3);
        }
        let y = net.forward(&[5.0, -2.0, 0.7]);
        assert_eq!(y, vec![0.3, 0.3]);
    }

    #[test]
    fn single_layer_matches_matrix_product() {
        let net = Mlp::init(&[4, 3], &mut rng(2));
        let x = [0.5, -1.2, 2.0, 0.1];
        let y = net.forward(&x);
        let w = DMatrix::from_row_slice(3, 4, &net.w[0]);
        let oracle = w * DVector::from_column_slice(&x) + DVector::from_column_slice(&net.b[0]);
        for i in 0..3 {
            assert!((y[i] - oracle[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_is_deterministic() {
        let net = Mlp::init(&[5, 8, 3], &mut rng(3));
        let x = [0.1, -0.4, 0.9, 2.2, -1.1];
        assert_eq!(net.forward(&x), net.forward(&x));
    }

    /// Random net whose hidden pre-activations stay away from the ReLU kink
    /// for the given input, so finite differences are smooth.
    fn net_off_the_kink(sizes: &[usize], x: &[f64], seed: u64) -> Mlp {
        let mut seed = seed;
        loop {
            let net = Mlp::init(sizes, &mut rng(seed));
            let (_, cache) = net.forward_cached(x);
            let min_pre = cache.pre[..cache.pre.len() - 1]
                .iter()
                .flat_map(|z| z.iter().map(|v| v.abs()))
                .fold(f64::INFINITY, f64::min);
            if min_pre > 1e-3 {
                return net;
            }
            seed += 1;
        }
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        let x = [0.3, -0.8, 1.4, 0.2, -0.5];
        let upstream = [0.7, -1.3, 0.4];
        let net = net_off_the_kink(&[5, 8, 3], &x, 10);
        let (_, cache) = net.forward_cached(&x);
        let mut grads = net.zeros_like();
        let dx = net.backward(&cache, &upstream, &mut grads);
        let flat = grads.flat_params();

        let loss = |n: &Mlp, input: &[f64]| -> f64 {
            n.forward(input)
                .iter()
                .zip(&upstream)
                .map(|(y, u)| y * u)
                .sum()
        };
        let h = 1e-5;
        let base = net.flat_params();
        for k in 0..net.n_params() {
            let mut plus = base.clone();
            plus[k] += h;
            let mut minus = base.clone();
            minus[k] -= h;
            let mut np = net.clone();
            np.set_flat_params(&plus);
            let mut nm = net.clone();
            nm.set_flat_params(&minus);
            let fd = (loss(&np, &x) - loss(&nm, &x)) / (2.0 * h);
            assert!(
                (fd - flat[k]).abs() <= 1e-4 * (1.0 + flat[k].abs()),
                "param {k}: fd {fd}, backprop {}",
                flat[k]
            );
        }
        // The input gradient must check out too (the policy update differentiates
        // a Q network with respect to its action inputs).
        for j in 0..x.len() {
            let mut xp = x;
            xp[j] += h;
            let mut xm = x;
            xm[j] -= h;
            let fd = (loss(&net, &xp) - loss(&net, &xm)) / (2.0 * h);
            assert!(
                (fd - dx[j]).abs() <= 1e-4 * (1.0 + dx[j].abs()),
                "input {j}: fd {fd}, backprop {}",
                dx[j]
            );
        }
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_parameter_gradients() {
        let net = Mlp::init(&[4, 6, 2], &mut rng(11));
        let (_, cache) = net.forward_cached(&[1.0, 2.0, -0.5, 0.3]);
        let mut grads = net.zeros_like();
        let dx = net.backward(&cache, &[0.0, 0.0], &mut grads);
        assert!(grads.flat_params().iter().all(|g| *g == 0.0));
        assert!(dx.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn linear_net_squared_loss_matches_closed_form() {
        let net = Mlp::init(&[3, 2], &mut rng(12));
        let x = [0.4, -1.0, 2.5];
        let target = [1.0, -0.5];
        let (y, cache) = net.forward_cached(&x);
        // L = |y - target|^2, dL/dy = 2(y - target); dW = dL/dy ⊗ x, db = dL/dy.
        let upstream: Vec<f64> = y.iter().zip(&target).map(|(yi, t)| 2.0 * (yi - t)).collect();
        let mut grads = net.zeros_like();
        net.backward(&cache, &upstream, &mut grads);
        for i in 0..2 {
            for j in 0..3 {
                assert!((grads.w[0][i * 3 + j] - upstream[i] * x[j]).abs() < 1e-12);
            }
            assert!((grads.b[0][i] - upstream[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_params_round_trip() {
        let net = Mlp::init(&[6, 5, 4], &mut rng(13));
        let mut copy = net.zeros_like();
        copy.set_flat_params(&net.flat_params());
        assert_eq!(net, copy);
    }
}
