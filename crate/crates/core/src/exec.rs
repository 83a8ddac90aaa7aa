//! Shard scheduling, random streams and order-stable summation.
//!
//! A Monte Carlo run is cut into a fixed number of shards. Shard `i` draws
//! from ChaCha8 stream `i` of the run seed, and shard results are combined
//! in index order. The numbers therefore depend on the seed and the shard
//! count, never on how many workers executed the shards.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Runs `f(0..n)` and returns the results in shard order.
pub trait ShardExecutor {
    fn map_shards<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs shards one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ShardExecutor for Sequential {
    fn map_shards<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Random stream for one shard of a run.
pub fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

/// Number of items shard `i` of `shards` handles out of `total`.
pub fn shard_len(total: u64, shards: usize, i: usize) -> u64 {
    let s = shards as u64;
    total / s + u64::from((i as u64) < total % s)
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompSum {
    sum: f64,
    comp: f64,
}

impl CompSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Pairwise sum in a fixed tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn shard_lengths_cover_total() {
        for total in [0u64, 1, 7, 64, 1000, 1_000_003] {
            let s: u64 = (0..64).map(|i| shard_len(total, 64, i)).sum();
            assert_eq!(s, total);
        }
    }

    #[test]
    fn streams_are_distinct_and_repeatable() {
        let a: u64 = shard_rng(5, 0).random();
        let b: u64 = shard_rng(5, 1).random();
        let a2: u64 = shard_rng(5, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, a2);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
