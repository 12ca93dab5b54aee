//! Versioned binary checkpoints for training runs.
//!
//! A checkpoint captures everything training state depends on — network
//! parameters, optimizer moments, progress counters, the RNG, and the replay
//! buffer — as little-endian IEEE-754 bits, so a restored run continues
//! bitwise identically to one that never stopped.

use crate::{Adam, Mlp, ReplayBuffer, SacAgent, SacConfig, Transition};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{self, Cursor, Read};
use std::path::Path;
use thiserror::Error;

const MAGIC: &[u8; 8] = b"VICALSC1";
const VERSION: u32 = 1;
/// Upper bound on any serialized vector length, to fail fast on corruption.
const MAX_LEN: u64 = 100_000_000;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {found} (expected {VERSION})")]
    Version { found: u32 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
}

/// Progress counters a training loop needs to resume mid-run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrainCounters {
    pub env_steps: u64,
    pub updates: u64,
    pub episodes: u64,
}

fn write_vec_f64(buf: &mut Vec<u8>, v: &[f64]) {
    buf.write_u64::<LittleEndian>(v.len() as u64).unwrap();
    for x in v {
        buf.write_f64::<LittleEndian>(*x).unwrap();
    }
}

fn read_len(cur: &mut Cursor<&[u8]>) -> Result<usize, CheckpointError> {
    let n = cur.read_u64::<LittleEndian>()?;
    if n > MAX_LEN {
        return Err(CheckpointError::Corrupt(format!("length {n} out of range")));
    }
    Ok(n as usize)
}

fn read_vec_f64(cur: &mut Cursor<&[u8]>) -> Result<Vec<f64>, CheckpointError> {
    let n = read_len(cur)?;
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        v.push(cur.read_f64::<LittleEndian>()?);
    }
    Ok(v)
}

fn write_mlp(buf: &mut Vec<u8>, net: &Mlp) {
    buf.write_u64::<LittleEndian>(net.sizes.len() as u64).unwrap();
    for s in &net.sizes {
        buf.write_u64::<LittleEndian>(*s as u64).unwrap();
    }
    for l in 0..net.n_layers() {
        for x in net.w[l].iter().chain(&net.b[l]) {
            buf.write_f64::<LittleEndian>(*x).unwrap();
        }
    }
}

fn read_mlp(cur: &mut Cursor<&[u8]>) -> Result<Mlp, CheckpointError> {
    let n_sizes = read_len(cur)?;
    if n_sizes < 2 {
        return Err(CheckpointError::Corrupt("network needs two widths".into()));
    }
    let mut sizes = Vec::with_capacity(n_sizes);
    for _ in 0..n_sizes {
        sizes.push(read_len(cur)?);
    }
    let mut w = Vec::with_capacity(n_sizes - 1);
    let mut b = Vec::with_capacity(n_sizes - 1);
    for l in 0..n_sizes - 1 {
        let mut wl = Vec::with_capacity(sizes[l + 1] * sizes[l]);
        for _ in 0..sizes[l + 1] * sizes[l] {
            wl.push(cur.read_f64::<LittleEndian>()?);
        }
        let mut bl = Vec::with_capacity(sizes[l + 1]);
        for _ in 0..sizes[l + 1] {
            bl.push(cur.read_f64::<LittleEndian>()?);
        }
        w.push(wl);
        b.push(bl);
    }
    Ok(Mlp { sizes, w, b })
}

fn write_adam(buf: &mut Vec<u8>, opt: &Adam) {
    buf.write_f64::<LittleEndian>(opt.lr).unwrap();
    buf.write_f64::<LittleEndian>(opt.beta1).unwrap();
    buf.write_f64::<LittleEndian>(opt.beta2).unwrap();
    buf.write_f64::<LittleEndian>(opt.eps).unwrap();
    buf.write_u64::<LittleEndian>(opt.t).unwrap();
    write_mlp(buf, &opt.m);
    write_mlp(buf, &opt.v);
}

fn read_adam(cur: &mut Cursor<&[u8]>, net: &Mlp) -> Result<Adam, CheckpointError> {
    let lr = cur.read_f64::<LittleEndian>()?;
    let beta1 = cur.read_f64::<LittleEndian>()?;
    let beta2 = cur.read_f64::<LittleEndian>()?;
    let eps = cur.read_f64::<LittleEndian>()?;
    let t = cur.read_u64::<LittleEndian>()?;
    let m = read_mlp(cur)?;
    let v = read_mlp(cur)?;
    if m.sizes != net.sizes || v.sizes != net.sizes {
        return Err(CheckpointError::Corrupt("optimizer moments do not match network".into()));
    }
    Ok(Adam { lr, beta1, beta2, eps, t, m, v })
}

/// Serializes the full training state to `path`.
pub fn save_checkpoint(
    path: &Path,
    agent: &SacAgent,
    replay: &ReplayBuffer,
    rng: &ChaCha8Rng,
    counters: &TrainCounters,
) -> Result<(), CheckpointError> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.write_u32::<LittleEndian>(VERSION).unwrap();

    let c = &agent.config;
    buf.write_u64::<LittleEndian>(c.state_dim as u64).unwrap();
    buf.write_u64::<LittleEndian>(c.action_dim as u64).unwrap();
    buf.write_u64::<LittleEndian>(c.hidden.len() as u64).unwrap();
    for h in &c.hidden {
        buf.write_u64::<LittleEndian>(*h as u64).unwrap();
    }
    buf.write_f64::<LittleEndian>(c.alpha).unwrap();
    buf.write_f64::<LittleEndian>(c.gamma).unwrap();
    buf.write_f64::<LittleEndian>(c.tau).unwrap();
    buf.write_f64::<LittleEndian>(c.lr).unwrap();
    buf.write_u64::<LittleEndian>(c.batch_size as u64).unwrap();

    for net in [&agent.policy, &agent.q1, &agent.q2, &agent.v, &agent.v_target] {
        write_mlp(&mut buf, net);
    }
    for opt in [&agent.opt_policy, &agent.opt_q1, &agent.opt_q2, &agent.opt_v] {
        write_adam(&mut buf, opt);
    }
    buf.write_u64::<LittleEndian>(agent.updates).unwrap();

    buf.write_u64::<LittleEndian>(counters.env_steps).unwrap();
    buf.write_u64::<LittleEndian>(counters.updates).unwrap();
    buf.write_u64::<LittleEndian>(counters.episodes).unwrap();

    buf.extend_from_slice(&rng.get_seed());
    buf.write_u64::<LittleEndian>(rng.get_stream()).unwrap();
    let word_pos = rng.get_word_pos();
    buf.write_u64::<LittleEndian>(word_pos as u64).unwrap();
    buf.write_u64::<LittleEndian>((word_pos >> 64) as u64).unwrap();

    let (data, head) = replay.raw();
    buf.write_u64::<LittleEndian>(replay.capacity() as u64).unwrap();
    buf.write_u64::<LittleEndian>(head as u64).unwrap();
    buf.write_u64::<LittleEndian>(data.len() as u64).unwrap();
    for t in data {
        write_vec_f64(&mut buf, &t.state);
        write_vec_f64(&mut buf, &t.action);
        buf.write_f64::<LittleEndian>(t.reward).unwrap();
        write_vec_f64(&mut buf, &t.next_state);
        buf.push(t.done as u8);
    }

    std::fs::write(path, buf)?;
    Ok(())
}

/// Restores the training state written by [`save_checkpoint`].
pub fn load_checkpoint(
    path: &Path,
) -> Result<(SacAgent, ReplayBuffer, ChaCha8Rng, TrainCounters), CheckpointError> {
    let bytes = std::fs::read(path)?;
    let mut cur = Cursor::new(bytes.as_slice());

    let mut magic = [0u8; 8];
    cur.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let found = cur.read_u32::<LittleEndian>()?;
    if found != VERSION {
        return Err(CheckpointError::Version { found });
    }

    let state_dim = read_len(&mut cur)?;
    let action_dim = read_len(&mut cur)?;
    let n_hidden = read_len(&mut cur)?;
    let mut hidden = Vec::with_capacity(n_hidden);
    for _ in 0..n_hidden {
        hidden.push(read_len(&mut cur)?);
    }
    let alpha = cur.read_f64::<LittleEndian>()?;
    let gamma = cur.read_f64::<LittleEndian>()?;
    let tau = cur.read_f64::<LittleEndian>()?;
    let lr = cur.read_f64::<LittleEndian>()?;
    let batch_size = read_len(&mut cur)?;
    let config = SacConfig {
        state_dim,
        action_dim,
        hidden,
        alpha,
        gamma,
        tau,
        lr,
        batch_size,
    };

    let policy = read_mlp(&mut cur)?;
    let q1 = read_mlp(&mut cur)?;
    let q2 = read_mlp(&mut cur)?;
    let v = read_mlp(&mut cur)?;
    let v_target = read_mlp(&mut cur)?;
    if v_target.sizes != v.sizes {
        return Err(CheckpointError::Corrupt("value target shape mismatch".into()));
    }
    let opt_policy = read_adam(&mut cur, &policy)?;
    let opt_q1 = read_adam(&mut cur, &q1)?;
    let opt_q2 = read_adam(&mut cur, &q2)?;
    let opt_v = read_adam(&mut cur, &v)?;
    let updates = cur.read_u64::<LittleEndian>()?;
    let agent = SacAgent {
        config,
        policy,
        q1,
        q2,
        v,
        v_target,
        opt_policy,
        opt_q1,
        opt_q2,
        opt_v,
        updates,
    };

    let counters = TrainCounters {
        env_steps: cur.read_u64::<LittleEndian>()?,
        updates: cur.read_u64::<LittleEndian>()?,
        episodes: cur.read_u64::<LittleEndian>()?,
    };

    let mut seed = [0u8; 32];
    cur.read_exact(&mut seed)?;
    let stream = cur.read_u64::<LittleEndian>()?;
    let lo = cur.read_u64::<LittleEndian>()? as u128;
    let hi = cur.read_u64::<LittleEndian>()? as u128;
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng.set_word_pos(lo | (hi << 64));

    let capacity = read_len(&mut cur)?;
    let head = read_len(&mut cur)?;
    let n = read_len(&mut cur)?;
    // While filling, the write head stays at zero; it only walks once full.
    if capacity == 0 || n > capacity || (n == capacity && head >= capacity) || (n < capacity && head != 0) {
        return Err(CheckpointError::Corrupt("replay layout out of range".into()));
    }
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let state = read_vec_f64(&mut cur)?;
        let action = read_vec_f64(&mut cur)?;
        let reward = cur.read_f64::<LittleEndian>()?;
        let next_state = read_vec_f64(&mut cur)?;
        let done = cur.read_u8()? != 0;
        data.push(Transition {
            state,
            action,
            reward,
            next_state,
            done,
        });
    }
    let replay = ReplayBuffer::from_raw(capacity, data, head);
    Ok((agent, replay, rng, counters))
}
