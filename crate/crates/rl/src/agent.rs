use crate::{Adam, Mlp, ReplayBuffer, RlError, Transition};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

const LOG_STD_MIN: f64 = -20.0;
const LOG_STD_MAX: f64 = 2.0;
/// Guard inside the tanh-squash log-density so it stays finite at |a| = 1.
const SQUASH_EPS: f64 = 1e-6;
const LN_2PI: f64 = 1.8378770664093453;

/// Hyperparameters of [`SacAgent`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SacConfig {
    pub state_dim: usize,
    pub action_dim: usize,
    /// Hidden layer widths shared by all networks.
    pub hidden: Vec<usize>,
    /// Entropy coefficient.
    pub alpha: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Polyak averaging rate for the target value network.
    pub tau: f64,
    pub lr: f64,
    pub batch_size: usize,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            state_dim: 24,
            action_dim: 6,
            hidden: vec![256, 256],
            alpha: 0.2,
            gamma: 0.99,
            tau: 0.005,
            lr: 3e-4,
            batch_size: 256,
        }
    }
}

/// Loss diagnostics of one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateDiag {
    pub q1_loss: f64,
    pub q2_loss: f64,
    pub v_loss: f64,
    pub policy_loss: f64,
    pub mean_log_prob: f64,
}

/// Per-network gradient buffers of one batch.
#[derive(Debug, Clone)]
pub struct SacGrads {
    pub policy: Mlp,
    pub q1: Mlp,
    pub q2: Mlp,
    pub v: Mlp,
}

/// `target <- (1 - tau) * target + tau * online`, elementwise.
pub fn polyak_update(target: &mut Mlp, online: &Mlp, tau: f64) {
    assert_eq!(target.sizes, online.sizes, "network shapes must match");
    for l in 0..target.n_layers() {
        for (t, o) in target.w[l].iter_mut().zip(&online.w[l]) {
            *t = (1.0 - tau) * *t + tau * *o;
        }
        for (t, o) in target.b[l].iter_mut().zip(&online.b[l]) {
            *t = (1.0 - tau) * *t + tau * *o;
        }
    }
}

/// Soft actor-critic learner: tanh-Gaussian policy, twin Q networks with
/// min-clipping, and a value network tracked by a Polyak-averaged target.
///
/// All stochastic choices flow through the RNG passed into
/// [`SacAgent::sample_action`] and [`SacAgent::update`] in a documented
/// order, so training is bitwise reproducible and resumable.
#[derive(Debug, Clone, PartialEq)]
pub struct SacAgent {
    pub config: SacConfig,
    /// Outputs `action_dim` means followed by `action_dim` log-stds.
    pub policy: Mlp,
    /// Inputs are `state ++ action`.
    pub q1: Mlp,
    pub q2: Mlp,
    pub v: Mlp,
    pub v_target: Mlp,
    pub opt_policy: Adam,
    pub opt_q1: Adam,
    pub opt_q2: Adam,
    pub opt_v: Adam,
    /// Completed [`SacAgent::update`] calls.
    pub updates: u64,
}

impl SacAgent {
    /// Initializes all networks from `rng` (order: policy, q1, q2, v; the
    /// value target starts as a copy of the value network).
    pub fn new(config: SacConfig, rng: &mut ChaCha8Rng) -> Self {
        let widths = |inp: usize, out: usize| -> Vec<usize> {
            let mut s = vec![inp];
            s.extend_from_slice(&config.hidden);
            s.push(out);
            s
        };
        let policy = Mlp::init(&widths(config.state_dim, 2 * config.action_dim), rng);
        let q_sizes = widths(config.state_dim + config.action_dim, 1);
        let q1 = Mlp::init(&q_sizes, rng);
        let q2 = Mlp::init(&q_sizes, rng);
        let v = Mlp::init(&widths(config.state_dim, 1), rng);
        let v_target = v.clone();
        let lr = config.lr;
        Self {
            opt_policy: Adam::new(&policy, lr),
            opt_q1: Adam::new(&q1, lr),
            opt_q2: Adam::new(&q2, lr),
            opt_v: Adam::new(&v, lr),
            config,
            policy,
            q1,
            q2,
            v,
            v_target,
            updates: 0,
        }
    }

    /// Policy head for `state`: means and clamped log-stds, plus a mask that
    /// is 1 where the clamp is inactive (the clamp passes no gradient).
    fn policy_stats(&self, state: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let out = self.policy.forward(state);
        let d = self.config.action_dim;
        let mu = out[..d].to_vec();
        let mut ls = Vec::with_capacity(d);
        let mut mask = Vec::with_capacity(d);
        for &raw in &out[d..] {
            ls.push(raw.clamp(LOG_STD_MIN, LOG_STD_MAX));
            mask.push(if (LOG_STD_MIN..LOG_STD_MAX).contains(&raw) { 1.0 } else { 0.0 });
        }
        (mu, ls, mask)
    }

    /// Squashes `mu + sigma * eps` and returns the action with its log
    /// density under the squashed Gaussian.
    fn squash(mu: &[f64], ls: &[f64], eps: &[f64]) -> (Vec<f64>, f64) {
        let mut action = Vec::with_capacity(mu.len());
        let mut logp = 0.0;
        for j in 0..mu.len() {
            let sigma = ls[j].exp();
            let u = mu[j] + sigma * eps[j];
            let a = u.tanh();
            logp += -0.5 * eps[j] * eps[j] - ls[j] - 0.5 * LN_2PI - (1.0 - a * a + SQUASH_EPS).ln();
            action.push(a);
        }
        (action, logp)
    }

    /// Draws a stochastic action for `state`; returns it with its log
    /// probability. Consumes exactly `action_dim` standard-normal draws.
    pub fn sample_action(&self, state: &[f64], rng: &mut ChaCha8Rng) -> (Vec<f64>, f64) {
        let (mu, ls, _) = self.policy_stats(state);
        let eps: Vec<f64> = (0..self.config.action_dim)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        Self::squash(&mu, &ls, &eps)
    }

    /// The deterministic (mean) action for `state`.
    pub fn mean_action(&self, state: &[f64]) -> Vec<f64> {
        let (mu, _, _) = self.policy_stats(state);
        mu.iter().map(|m| m.tanh()).collect()
    }

    fn q_input(&self, state: &[f64], action: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(state.len() + action.len());
        x.extend_from_slice(state);
        x.extend_from_slice(action);
        x
    }

    /// Bootstrap targets `r + gamma * (1 - done) * V_target(s')`.
    pub(crate) fn q_targets(&self, batch: &[&Transition]) -> Vec<f64> {
        batch
            .iter()
            .map(|t| {
                if t.done {
                    t.reward
                } else {
                    t.reward + self.config.gamma * self.v_target.forward(&t.next_state)[0]
                }
            })
            .collect()
    }

    /// Losses and exact gradients for one batch at the current parameters.
    ///
    /// `eps[i]` holds the `action_dim` standard-normal draws that
    /// reparameterize the fresh action of sample `i`; the same fresh action
    /// feeds both the value target and the policy loss. Gradients follow the
    /// SAC flow: each loss only reaches its own network (targets are
    /// detached, and the Q networks are frozen inside the policy loss).
    pub fn loss_gradients(&self, batch: &[&Transition], eps: &[Vec<f64>]) -> (UpdateDiag, SacGrads) {
        assert_eq!(batch.len(), eps.len(), "one draw vector per sample");
        assert!(!batch.is_empty(), "batch must not be empty");
        let n = batch.len() as f64;
        let alpha = self.config.alpha;
        let d = self.config.action_dim;

        let mut grads = SacGrads {
            policy: self.policy.zeros_like(),
            q1: self.q1.zeros_like(),
            q2: self.q2.zeros_like(),
            v: self.v.zeros_like(),
        };
        // Scratch buffer for Q backward passes that only need input
        // gradients (parameter gradients discarded).
        let mut scratch = self.q1.zeros_like();

        let q_targets = self.q_targets(batch);
        let mut diag = UpdateDiag {
            q1_loss: 0.0,
            q2_loss: 0.0,
            v_loss: 0.0,
            policy_loss: 0.0,
            mean_log_prob: 0.0,
        };

        for (i, t) in batch.iter().enumerate() {
            // Q losses on the replayed action against the detached target.
            let xq = self.q_input(&t.state, &t.action);
            for (net, opt_grads, loss) in [
                (&self.q1, &mut grads.q1, &mut diag.q1_loss),
                (&self.q2, &mut grads.q2, &mut diag.q2_loss),
            ] {
                let (pred, cache) = net.forward_cached(&xq);
                let err = pred[0] - q_targets[i];
                *loss += err * err / n;
                net.backward(&cache, &[2.0 * err / n], opt_grads);
            }

            // Fresh reparameterized action for the value target and the
            // policy loss.
            let (mu, ls, mask) = self.policy_stats(&t.state);
            let (a_new, logp) = Self::squash(&mu, &ls, &eps[i]);
            diag.mean_log_prob += logp / n;

            let x_new = self.q_input(&t.state, &a_new);
            let (q1_new, c1) = self.q1.forward_cached(&x_new);
            let (q2_new, c2) = self.q2.forward_cached(&x_new);
            let (q_min, min_net, min_cache) = if q1_new[0] <= q2_new[0] {
                (q1_new[0], &self.q1, &c1)
            } else {
                (q2_new[0], &self.q2, &c2)
            };

            // Value loss against the detached target min(Q) - alpha * logp.
            let y_v = q_min - alpha * logp;
            let (v_pred, vc) = self.v.forward_cached(&t.state);
            let verr = v_pred[0] - y_v;
            diag.v_loss += verr * verr / n;
            self.v.backward(&vc, &[2.0 * verr / n], &mut grads.v);

            // Policy loss alpha * logp - min(Q); reparameterized through the
            // fresh action, Q parameters frozen.
            diag.policy_loss += (alpha * logp - q_min) / n;
            scratch.scale(0.0);
            let dq_dx = min_net.backward(min_cache, &[1.0], &mut scratch);
            let mut upstream = vec![0.0; 2 * d];
            for j in 0..d {
                let a = a_new[j];
                let one_m_a2 = 1.0 - a * a;
                let dlogp_da = 2.0 * a / (one_m_a2 + SQUASH_EPS);
                let dqa = dq_dx[self.config.state_dim + j];
                let dl_da = alpha * dlogp_da - dqa;
                let sigma_eps = ls[j].exp() * eps[i][j];
                upstream[j] = dl_da * one_m_a2 / n;
                upstream[d + j] = (dl_da * one_m_a2 * sigma_eps - alpha) * mask[j] / n;
            }
            let (_, pc) = self.policy.forward_cached(&t.state);
            self.policy.backward(&pc, &upstream, &mut grads.policy);
        }
        (diag, grads)
    }

    /// One gradient step for all networks from a batch and its draws, then a
    /// Polyak target update. All gradients are computed at the incoming
    /// parameter snapshot before any network moves.
    pub fn update_from_batch(&mut self, batch: &[&Transition], eps: &[Vec<f64>]) -> UpdateDiag {
        let (diag, grads) = self.loss_gradients(batch, eps);
        self.opt_q1.step(&mut self.q1, &grads.q1);
        self.opt_q2.step(&mut self.q2, &grads.q2);
        self.opt_v.step(&mut self.v, &grads.v);
        self.opt_policy.step(&mut self.policy, &grads.policy);
        polyak_update(&mut self.v_target, &self.v, self.config.tau);
        self.updates += 1;
        diag
    }

    /// One SAC update from uniformly replayed transitions.
    ///
    /// RNG consumption order: `batch_size` index draws, then `action_dim`
    /// standard-normal draws per sample.
    pub fn update(&mut self, replay: &ReplayBuffer, rng: &mut ChaCha8Rng) -> Result<UpdateDiag, RlError> {
        let indices = replay.sample_indices(rng, self.config.batch_size)?;
        let batch: Vec<&Transition> = indices.iter().map(|&i| replay.get(i)).collect();
        let eps: Vec<Vec<f64>> = (0..batch.len())
            .map(|_| {
                (0..self.config.action_dim)
                    .map(|_| rng.sample(StandardNormal))
                    .collect()
            })
            .collect();
        Ok(self.update_from_batch(&batch, &eps))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_transition(r: &mut ChaCha8Rng, sdim: usize, adim: usize, p_done: f64) -> Transition {
        let state = (0..sdim).map(|_| r.gen_range(-1.0..1.0)).collect();
        let action = (0..adim).map(|_| r.gen_range(-1.0..1.0)).collect();
        let reward = r.gen_range(-1.0..1.0);
        let next_state = (0..sdim).map(|_| r.gen_range(-1.0..1.0)).collect();
        let done = p_done > 0.0 && r.gen_bool(p_done);
        Transition { state, action, reward, next_state, done }
    }

    fn tiny_config() -> SacConfig {
        SacConfig {
            state_dim: 3,
            action_dim: 2,
            hidden: vec![4],
            batch_size: 2,
            ..Default::default()
        }
    }

    fn tiny_batch(config: &SacConfig, seed: u64) -> Vec<Transition> {
        let mut r = rng(seed);
        let mut vec_of = |n: usize, scale: f64| -> Vec<f64> {
            (0..n).map(|_| r.gen_range(-scale..scale)).collect()
        };
        (0..config.batch_size)
            .map(|i| Transition {
                state: vec_of(config.state_dim, 1.0),
                action: vec_of(config.action_dim, 0.9),
                reward: if i % 2 == 0 { 0.7 } else { -0.3 },
                next_state: vec_of(config.state_dim, 1.0),
                done: false,
            })
            .collect()
    }

    fn draws(config: &SacConfig, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng(seed);
        (0..n)
            .map(|_| {
                (0..config.action_dim)
                    .map(|_| r.sample(StandardNormal))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn terminal_transitions_bootstrap_to_the_raw_reward() {
        let config = tiny_config();
        let agent = SacAgent::new(config.clone(), &mut rng(1));
        let mut batch = tiny_batch(&config, 2);
        batch[0].done = true;
        batch[0].reward = 1.25;
        let refs: Vec<&Transition> = batch.iter().collect();
        let targets = agent.q_targets(&refs);
        assert_eq!(targets[0], 1.25);
        // Non-terminal targets include the bootstrap term.
        let boot = agent.v_target.forward(&batch[1].next_state)[0];
        assert_eq!(targets[1], batch[1].reward + config.gamma * boot);
    }

    #[test]
    fn all_loss_gradients_match_finite_differences() {
        let config = tiny_config();
        let agent = SacAgent::new(config.clone(), &mut rng(3));
        let batch = tiny_batch(&config, 4);
        let refs: Vec<&Transition> = batch.iter().collect();
        let eps = draws(&config, batch.len(), 5);
        let (_, grads) = agent.loss_gradients(&refs, &eps);

        let h = 1e-5;
        // (selector of the perturbed net, selector of the matching loss)
        type NetSel = fn(&mut SacAgent) -> &mut Mlp;
        type LossSel = fn(&UpdateDiag) -> f64;
        let cases: [(NetSel, LossSel, &Mlp, &str); 4] = [
            (|a| &mut a.q1, |d| d.q1_loss, &grads.q1, "q1"),
            (|a| &mut a.q2, |d| d.q2_loss, &grads.q2, "q2"),
            (|a| &mut a.v, |d| d.v_loss, &grads.v, "v"),
            (|a| &mut a.policy, |d| d.policy_loss, &grads.policy, "policy"),
        ];
        for (net_of, loss_of, grad, name) in cases {
            let base = net_of(&mut agent.clone()).flat_params();
            let flat_grad = grad.flat_params();
            for k in 0..base.len() {
                let eval = |delta: f64| -> f64 {
                    let mut probe = agent.clone();
                    let mut p = base.clone();
                    p[k] += delta;
                    net_of(&mut probe).set_flat_params(&p);
                    loss_of(&probe.loss_gradients(&refs, &eps).0)
                };
                let fd = (eval(h) - eval(-h)) / (2.0 * h);
                assert!(
                    (fd - flat_grad[k]).abs() <= 1e-3 * (1.0 + flat_grad[k].abs()),
                    "{name} param {k}: fd {fd}, backprop {}",
                    flat_grad[k]
                );
            }
        }
    }

    #[test]
    fn vanishing_stddev_makes_sampling_deterministic() {
        let config = tiny_config();
        let mut agent = SacAgent::new(config.clone(), &mut rng(6));
        // Force the log-std head far below the clamp: sigma = e^-20.
        let last = agent.policy.n_layers() - 1;
        let n_in = agent.policy.sizes[last];
        for j in config.action_dim..2 * config.action_dim {
            agent.policy.b[last][j] = -30.0;
            for w in &mut agent.policy.w[last][j * n_in..(j + 1) * n_in] {
                *w = 0.0;
            }
        }
        let state = vec![0.4, -0.2, 0.9];
        let expect = agent.mean_action(&state);
        for seed in 0..5 {
            let (a, _) = agent.sample_action(&state, &mut rng(100 + seed));
            for j in 0..config.action_dim {
                assert!((a[j] - expect[j]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn standard_normal_head_is_symmetric() {
        let config = SacConfig {
            state_dim: 2,
            action_dim: 6,
            hidden: vec![4],
            ..Default::default()
        };
        let mut agent = SacAgent::new(config.clone(), &mut rng(7));
        // Zero parameters: mu = 0 and log-std = 0, so u ~ N(0, 1).
        for l in 0..agent.policy.n_layers() {
            agent.policy.w[l].iter_mut().for_each(|v| *v = 0.0);
            agent.policy.b[l].iter_mut().for_each(|v| *v = 0.0);
        }
        let state = vec![0.3, -0.8];
        let mut r = rng(8);
        let n = 100_000;
        let mut mean = vec![0.0; 6];
        for _ in 0..n {
            let (a, _) = agent.sample_action(&state, &mut r);
            for j in 0..6 {
                mean[j] += a[j] / n as f64;
            }
        }
        for m in mean {
            assert!(m.abs() < 0.01, "per-component mean {m}");
        }
    }

    #[test]
    fn log_prob_matches_a_histogram_density_estimate() {
        let config = SacConfig {
            state_dim: 1,
            action_dim: 1,
            hidden: vec![4],
            ..Default::default()
        };
        let mut agent = SacAgent::new(config, &mut rng(9));
        for l in 0..agent.policy.n_layers() {
            agent.policy.w[l].iter_mut().for_each(|v| *v = 0.0);
            agent.policy.b[l].iter_mut().for_each(|v| *v = 0.0);
        }
        let state = vec![0.0];
        let mut r = rng(10);
        let n = 4_000_000;
        let width = 0.05;
        let lo = -0.9;
        let bins = ((0.9 - lo) / width) as usize;
        let mut counts = vec![0usize; bins];
        let mut logp_sums = vec![0.0; bins];
        for _ in 0..n {
            let (a, logp) = agent.sample_action(&state, &mut r);
            let b = ((a[0] - lo) / width).floor();
            if b >= 0.0 && (b as usize) < bins {
                counts[b as usize] += 1;
                logp_sums[b as usize] += logp;
            }
        }
        // Compare on well-populated central bins where the density is smooth.
        for b in 0..bins {
            let center = lo + (b as f64 + 0.5) * width;
            if center.abs() > 0.6 {
                continue;
            }
            let empirical = counts[b] as f64 / (n as f64 * width);
            let analytic = (logp_sums[b] / counts[b] as f64).exp();
            let rel = (empirical - analytic).abs() / analytic;
            assert!(rel < 0.02, "bin at {center}: empirical {empirical}, analytic {analytic}");
        }
    }

    #[test]
    fn polyak_endpoints_and_midpoint() {
        let online = Mlp::init(&[3, 4, 2], &mut rng(11));
        let base = Mlp::init(&[3, 4, 2], &mut rng(12));

        let mut target = base.clone();
        polyak_update(&mut target, &online, 1.0);
        assert_eq!(target, online);

        let mut target = base.clone();
        polyak_update(&mut target, &online, 0.0);
        assert_eq!(target, base);

        let mut target = base.clone();
        polyak_update(&mut target, &online, 0.5);
        let (t, b, o) = (target.flat_params(), base.flat_params(), online.flat_params());
        for k in 0..t.len() {
            assert!((t[k] - 0.5 * (b[k] + o[k])).abs() < 1e-12);
        }
    }

    #[test]
    fn random_updates_keep_parameters_finite() {
        let config = SacConfig {
            state_dim: 24,
            action_dim: 6,
            hidden: vec![32, 32],
            batch_size: 32,
            ..Default::default()
        };
        let mut r = rng(13);
        let mut agent = SacAgent::new(config.clone(), &mut r);
        let mut replay = ReplayBuffer::new(5_000);
        for _ in 0..2_000 {
            let t = random_transition(&mut r, 24, 6, 0.05);
            replay.push(t);
        }
        let mut last = None;
        for _ in 0..1000 {
            last = Some(agent.update(&replay, &mut r).unwrap());
        }
        let diag = last.unwrap();
        assert!(diag.q1_loss.is_finite() && diag.q2_loss.is_finite());
        assert!(diag.v_loss.is_finite() && diag.policy_loss.is_finite());
        for net in [&agent.policy, &agent.q1, &agent.q2, &agent.v, &agent.v_target] {
            assert!(net.flat_params().iter().all(|p| p.is_finite()));
        }
    }

    #[test]
    fn training_is_bitwise_deterministic() {
        let config = SacConfig {
            state_dim: 4,
            action_dim: 2,
            hidden: vec![8, 8],
            batch_size: 16,
            ..Default::default()
        };
        let run = || -> Vec<f64> {
            let mut r = rng(14);
            let mut agent = SacAgent::new(config.clone(), &mut r);
            let mut replay = ReplayBuffer::new(500);
            for _ in 0..100 {
                let t = random_transition(&mut r, 4, 2, 0.0);
                replay.push(t);
            }
            for _ in 0..50 {
                agent.update(&replay, &mut r).unwrap();
            }
            let mut params = agent.policy.flat_params();
            params.extend(agent.q1.flat_params());
            params.extend(agent.q2.flat_params());
            params.extend(agent.v.flat_params());
            params.extend(agent.v_target.flat_params());
            params
        };
        let a = run();
        let b = run();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
