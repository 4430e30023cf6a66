//! Seeded random streams and Monte Carlo estimates over `Z ~ Exp(1)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::Real;

/// Default seed used by the command line and the randomized tests.
pub const DEFAULT_SEED: u64 = 0x5eed_2017_0e1e_0001;
/// Default Monte Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 1_000_000;

/// Deterministic random stream. Identical seeds produce identical sequences.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for parallel work item `index`.
    pub fn substream(&self, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index.wrapping_add(1));
        Self { seed: self.seed, rng }
    }

    fn next_exponential(&mut self) -> f64 {
        Exp1.sample(&mut self.rng)
    }
}

/// Draws `count` unit-mean exponential variates.
pub fn sample_exponential<T: Real>(stream: &mut RandomStream, count: usize) -> Vec<T> {
    (0..count).map(|_| T::lit(stream.next_exponential())).collect()
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T = f64> {
    pub mean: T,
    pub std_error: T,
    pub samples: usize,
}

/// Monte Carlo estimate of `E[f(Z)]`, `Z ~ Exp(1)`, without storing the samples.
pub fn monte_carlo_mean<T, F>(f: F, stream: &mut RandomStream, count: usize) -> Estimate<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    // Welford's running moments.
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for k in 1..=count {
        let z = T::lit(stream.next_exponential());
        let v = f(z).as_f64();
        let delta = v - mean;
        mean += delta / k as f64;
        m2 += delta * (v - mean);
    }
    let variance = if count > 1 { m2 / (count - 1) as f64 } else { 0.0 };
    Estimate {
        mean: T::lit(mean),
        std_error: T::lit((variance / count.max(1) as f64).sqrt()),
        samples: count,
    }
}
