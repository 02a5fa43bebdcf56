//! Per-path random streams.
//!
//! Every path owns a ChaCha stream keyed by `(seed, path index)`, so a path's draws do
//! not depend on which worker runs it or on how many paths ran before it.

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Clone, Debug)]
pub struct PathRng {
    inner: ChaCha8Rng,
    draws: u64,
}

impl PathRng {
    pub fn new(seed: u64, path: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(path);
        Self { inner, draws: 0 }
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.draws += 1;
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.draws += 1;
        Open01.sample(&mut self.inner)
    }

    /// Number of variates handed out so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }
}
