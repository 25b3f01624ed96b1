//! Seeded randomness shared by tests, suites and the CLI.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Coefficients with real and imaginary parts uniform in [-1, 1).
pub fn random_coeffs(rng: &mut SeededRng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// `count` Halton points in [-1, 1]^d with a seeded Cranley–Patterson shift.
pub fn quasi_random_points(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(d <= PRIMES.len(), "quasi-random points support up to 8 dimensions");
    let mut rng = seeded(seed);
    let shift: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..1.0)).collect();
    (1..=count as u64)
        .map(|i| {
            (0..d)
                .map(|k| {
                    let u = (radical_inverse(i, PRIMES[k]) + shift[k]).fract();
                    2.0 * u - 1.0
                })
                .collect()
        })
        .collect()
}
