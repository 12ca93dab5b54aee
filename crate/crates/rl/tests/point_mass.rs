//! End-to-end learning check on a 1-D point-mass reach task.
//!
//! State is the position, the action commands a velocity, and each step pays
//! the distance to a fixed goal. A correct SAC implementation should shrink
//! the mean evaluation cost by a large factor within a modest step budget.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vical_rl::{ReplayBuffer, SacAgent, SacConfig, Transition};

const GOAL: f64 = 0.5;
const DT: f64 = 0.25;
const EPISODE_LEN: usize = 30;
const WARMUP: usize = 500;
const TOTAL_STEPS: usize = 20_000;

fn step_env(x: f64, a: f64) -> (f64, f64) {
    let next = (x + DT * a).clamp(-2.0, 2.0);
    (next, -(next - GOAL).abs())
}

/// Mean return of deterministic (mean-action) rollouts over fixed starts.
fn eval_mean_return(agent: &SacAgent, episodes: usize) -> f64 {
    let mut r = ChaCha8Rng::seed_from_u64(7);
    let mut total = 0.0;
    for _ in 0..episodes {
        let mut x = r.gen_range(-1.0..1.0);
        for _ in 0..EPISODE_LEN {
            let a = agent.mean_action(&[x])[0];
            let (next, reward) = step_env(x, a);
            total += reward;
            x = next;
        }
    }
    total / episodes as f64
}

#[test]
fn sac_improves_point_mass_return_at_least_five_fold() {
    let config = SacConfig {
        state_dim: 1,
        action_dim: 1,
        hidden: vec![32, 32],
        batch_size: 64,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut agent = SacAgent::new(config, &mut rng);
    let mut replay = ReplayBuffer::new(TOTAL_STEPS);

    let untrained = eval_mean_return(&agent, 20);

    let mut x = rng.gen_range(-1.0..1.0);
    let mut steps_in_episode = 0;
    for step in 0..TOTAL_STEPS {
        let a = if step < WARMUP {
            rng.gen_range(-1.0..1.0)
        } else {
            agent.sample_action(&[x], &mut rng).0[0]
        };
        let (next, reward) = step_env(x, a);
        // Episodes end by timeout, which is not a terminal state.
        replay.push(Transition {
            state: vec![x],
            action: vec![a],
            reward,
            next_state: vec![next],
            done: false,
        });
        x = next;
        steps_in_episode += 1;
        if steps_in_episode == EPISODE_LEN {
            x = rng.gen_range(-1.0..1.0);
            steps_in_episode = 0;
        }
        if step >= WARMUP {
            agent.update(&replay, &mut rng).unwrap();
        }
    }

    let trained = eval_mean_return(&agent, 20);
    println!("mean return untrained {untrained:.3}, trained {trained:.3}");
    assert!(
        trained.abs() * 5.0 <= untrained.abs(),
        "expected at least 5x improvement: untrained {untrained}, trained {trained}"
    );
}
