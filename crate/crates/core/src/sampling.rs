//! Seeded random streams and sharded Monte Carlo.
//!
//! Work is cut into fixed-size shards. Shard `i` draws from the ChaCha8
//! stream `i` of the run seed, so results do not depend on how many worker
//! threads execute the shards; merged outputs are always in shard order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub type StreamRng = ChaCha8Rng;

/// Samples per shard.
pub const SHARD_SIZE: usize = 4096;

/// RNG for stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `work(rng, start, len)` over consecutive shards covering `0..total`
/// and returns the shard results in shard order.
///
/// `stream_base` offsets the stream index so that independent stages of one
/// experiment can share a seed without sharing draws.
pub fn sharded<T, F>(
    total: usize,
    seed: u64,
    stream_base: u64,
    threads: usize,
    work: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut StreamRng, usize, usize) -> T + Sync,
{
    let shards = total.div_ceil(SHARD_SIZE);
    let run = |i: usize| {
        let start = i * SHARD_SIZE;
        let len = SHARD_SIZE.min(total - start);
        let mut rng = stream_rng(seed, stream_base + i as u64);
        work(&mut rng, start, len)
    };
    if threads <= 1 || shards <= 1 {
        return Ok((0..shards).map(run).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(|| (0..shards).into_par_iter().map(run).collect()))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub ci95: [f64; 2],
}

impl Estimate {
    pub fn new(value: f64, stderr: f64) -> Self {
        Estimate {
            value,
            stderr,
            ci95: [value - 1.96 * stderr, value + 1.96 * stderr],
        }
    }

    /// Binomial proportion `hits / trials` with standard error `sqrt(p(1-p)/n)`.
    pub fn proportion(hits: u64, trials: u64) -> Self {
        let n = trials as f64;
        let p = hits as f64 / n;
        Estimate::new(p, (p * (1.0 - p) / n).sqrt())
    }

    /// Proportion scaled by a known constant factor.
    pub fn scaled(self, factor: f64) -> Self {
        Estimate::new(self.value * factor, self.stderr * factor.abs())
    }
}

pub fn standard_normal_vec(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Uniform point on the probability simplex of dimension `k`.
pub fn random_simplex(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k).map(|_| -open_unit(rng).ln()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Uniform draw from `(0, 1]`.
#[inline]
pub fn open_unit(rng: &mut impl Rng) -> f64 {
    1.0 - rng.random::<f64>()
}
