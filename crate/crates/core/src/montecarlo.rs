//! Seeded sampling that gives the same answer for any worker count.
//!
//! Samples are cut into fixed-size batches; batch `b` draws from ChaCha8
//! stream `b` of the user seed, so which thread runs a batch never matters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{Membership, Polytope};

pub const BATCH_SIZE: usize = 256;

/// A Bernoulli proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub fraction: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn from_counts(hits: usize, samples: usize) -> Self {
        if samples == 0 {
            return Self { fraction: 0.0, stderr: 0.0, samples };
        }
        let p = hits as f64 / samples as f64;
        Self { fraction: p, stderr: (p * (1.0 - p) / samples as f64).sqrt(), samples }
    }
}

pub fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

/// Draws `n` values in index order; `draw` sees the batch's stream.
pub fn sample_ordered<T, F>(n: usize, seed: u64, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let batches = n.div_ceil(BATCH_SIZE);
    (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = batch_rng(seed, b);
            let len = BATCH_SIZE.min(n - b * BATCH_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

/// Uniform point of the polytope by rejection from its bounding box.
pub fn uniform_in(poly: &Polytope<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (lo, hi) = poly.bounding_box();
    let mut x = vec![0.0; poly.dim()];
    loop {
        for i in 0..x.len() {
            x[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
        }
        if poly.contains_unchecked(&x, &Membership::InteriorMargin(0.0)) {
            return x;
        }
    }
}

/// Uniform samples of the polytope, deterministic in `seed`.
pub fn uniform_samples(poly: &Polytope<f64>, n: usize, seed: u64) -> Vec<Vec<f64>> {
    sample_ordered(n, seed, |rng| uniform_in(poly, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thread_count_does_not_change_samples() {
        let tri = Polytope::new(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| uniform_samples(&tri, 1000, 42));
        let b = four.install(|| uniform_samples(&tri, 1000, 42));
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
        assert!(a.iter().all(|p| p[0] + p[1] <= 1.0));
        assert_ne!(a, uniform_samples(&tri, 1000, 43));
    }

    #[test]
    fn estimate_stderr() {
        let e = Estimate::from_counts(25, 100);
        assert_eq!(e.fraction, 0.25);
        assert!((e.stderr - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }
}
