//! Seeded, splittable random streams.
//!
//! Every randomized operation derives its generator from a master seed and a
//! fixed stream id, so `sample_ppp(.., seed)` followed by
//! `connect_rgg(.., seed)` draws from independent, reproducible streams.
//! ChaCha8 output is platform independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub(crate) const STREAM_PPP: u64 = 1;
pub(crate) const STREAM_PCP: u64 = 2;
pub(crate) const STREAM_CONNECT: u64 = 3;
pub(crate) const STREAM_PERTURB: u64 = 4;
/// Monte Carlo trial `k` uses stream `STREAM_MC_BASE + k`.
pub(crate) const STREAM_MC_BASE: u64 = 1 << 32;

/// Generator for `stream` under master `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
