#![allow(dead_code)]

use loadstab_core::Network;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Directed Erdős–Rényi network; weights uniform in [0.1, 2] when `weighted`.
pub fn random_network(n: usize, p: f64, weighted: bool, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n, n, |j, i| {
        if i != j && rng.random::<f64>() < p {
            if weighted {
                rng.random_range(0.1..2.0)
            } else {
                1.0
            }
        } else {
            0.0
        }
    });
    Network::new(a).unwrap()
}

/// Undirected unit-weight network guaranteed connected (random spanning
/// tree plus extra edges with probability `p`).
pub fn random_connected(n: usize, p: f64, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for v in 1..n {
        pairs.push((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p && !pairs.contains(&(u, v)) {
                pairs.push((u, v));
            }
        }
    }
    Network::undirected(n, &pairs).unwrap()
}
