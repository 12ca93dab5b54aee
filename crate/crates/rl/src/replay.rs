use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RlError {
    #[error("cannot sample from an empty replay buffer")]
    EmptyBuffer,
}

/// One environment interaction.
///
/// `done` flags a genuine terminal condition (it cuts the value bootstrap);
/// episode timeouts must leave it false.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    /// Network-space action, components in `[-1, 1]`.
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Fixed-capacity ring buffer with uniform sampling (with replacement).
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    data: Vec<Transition>,
    capacity: usize,
    /// Next slot to overwrite once the buffer is full.
    head: usize,
}

impl ReplayBuffer {
    pub const DEFAULT_CAPACITY: usize = 100_000;

    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        Self {
            data: Vec::with_capacity(capacity.min(1 << 20)),
            capacity,
            head: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Appends a transition, evicting the oldest once at capacity.
    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.data[i]
    }

    /// `n` uniform indices with replacement, deterministic under the RNG.
    pub fn sample_indices(&self, rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<usize>, RlError> {
        if self.data.is_empty() {
            return Err(RlError::EmptyBuffer);
        }
        Ok((0..n).map(|_| rng.gen_range(0..self.data.len())).collect())
    }

    pub(crate) fn raw(&self) -> (&[Transition], usize) {
        (&self.data, self.head)
    }

    pub(crate) fn from_raw(capacity: usize, data: Vec<Transition>, head: usize) -> Self {
        assert!(capacity > 0 && data.len() <= capacity && (data.len() < capacity || head < capacity));
        Self {
            data,
            capacity,
            head,
        }
    }
}
