//! Seeded, splittable random streams.
//!
//! A stream is identified by `(seed, stream)`. Both map onto a ChaCha8
//! generator: the seed keys the cipher and the stream id selects an
//! independent keystream. Replication `r` of an experiment draws from stream
//! `r`, so results never depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Opens the stream at its first draw.
    pub fn open(&self) -> SimRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream);
        SimRng { inner }
    }
}

/// A live generator positioned somewhere in an [`RngStream`].
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    /// Uniform draw on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }
}
