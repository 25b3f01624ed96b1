//! FFT helpers for row-major arrays on periodic grids over `[0, 1)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::rng::{random_coeffs, SeededRng};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Signed frequency of FFT bin `i` on a grid of `n` points.
pub fn frequency(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

fn stride(shape: &[usize], axis: usize) -> usize {
    shape[axis + 1..].iter().product()
}

/// Applies `op` to every line of `data` along `axis`.
fn for_each_line(data: &mut [Complex64], shape: &[usize], axis: usize, mut op: impl FnMut(&mut [Complex64])) {
    let n = shape[axis];
    let s = stride(shape, axis);
    let block = n * s;
    let mut line = vec![ZERO; n];
    for outer in (0..data.len()).step_by(block) {
        for inner in 0..s {
            let base = outer + inner;
            for (i, z) in line.iter_mut().enumerate() {
                *z = data[base + i * s];
            }
            op(&mut line);
            for (i, z) in line.iter().enumerate() {
                data[base + i * s] = *z;
            }
        }
    }
}

fn plans(n: usize) -> (std::sync::Arc<dyn Fft<f64>>, std::sync::Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

/// Spectral derivative `∂/∂t` along `axis` (period 1). The Nyquist bin is
/// dropped, which keeps derivatives of real data real.
pub fn derivative(data: &[Complex64], shape: &[usize], axis: usize) -> Vec<Complex64> {
    let n = shape[axis];
    let mut out = data.to_vec();
    let (fwd, inv) = plans(n);
    let factors: Vec<Complex64> = (0..n)
        .map(|i| {
            let k = frequency(i, n);
            if n.is_multiple_of(2) && i == n / 2 {
                ZERO
            } else {
                Complex64::new(0.0, 2.0 * PI * k as f64 / n as f64)
            }
        })
        .collect();
    for_each_line(&mut out, shape, axis, |line| {
        fwd.process(line);
        for (z, f) in line.iter_mut().zip(&factors) {
            *z *= f;
        }
        inv.process(line);
    });
    out
}

/// Real-valued spectral derivative.
pub fn derivative_real(data: &[f64], shape: &[usize], axis: usize) -> Vec<f64> {
    let c: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    derivative(&c, shape, axis).into_iter().map(|z| z.re).collect()
}

/// Unnormalized inverse transform along every axis: `Σ_k c_k e^{2πi k·t}`.
pub fn synthesize(coeffs: &mut [Complex64], shape: &[usize]) {
    for axis in 0..shape.len() {
        let (_, inv) = plans(shape[axis]);
        for_each_line(coeffs, shape, axis, |line| inv.process(line));
    }
}

/// Random trigonometric polynomial with frequencies `|k_a| ≤ bandwidth` on each
/// axis, scaled so that values are of order one.
pub fn random_band_limited(shape: &[usize], bandwidth: usize, rng: &mut SeededRng) -> Vec<Complex64> {
    let total: usize = shape.iter().product();
    let mut coeffs = vec![ZERO; total];
    let allowed: Vec<Vec<usize>> = shape
        .iter()
        .map(|&n| {
            (0..n)
                .filter(|&i| frequency(i, n).unsigned_abs() as usize <= bandwidth && !(n % 2 == 0 && i == n / 2))
                .collect()
        })
        .collect();
    let count: usize = allowed.iter().map(Vec::len).product();
    let norm = 1.0 / (count as f64).sqrt();
    let mut idx = vec![0usize; shape.len()];
    'modes: loop {
        let flat = idx.iter().zip(&allowed).zip(shape).fold(0, |acc, ((&i, a), &n)| acc * n + a[i]);
        coeffs[flat] = random_coeffs(rng, 1)[0] * norm;
        for a in (0..shape.len()).rev() {
            idx[a] += 1;
            if idx[a] < allowed[a].len() {
                continue 'modes;
            }
            idx[a] = 0;
        }
        break;
    }
    synthesize(&mut coeffs, shape);
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn derivative_of_trig_polynomial_is_exact() {
        let (n, m) = (16, 8);
        let shape = [n, m];
        let f = |x: f64, y: f64| (2.0 * PI * 3.0 * x).sin() * (2.0 * PI * y).cos();
        let data: Vec<Complex64> = (0..n * m)
            .map(|i| Complex64::new(f((i / m) as f64 / n as f64, (i % m) as f64 / m as f64), 0.0))
            .collect();
        let dx = derivative(&data, &shape, 0);
        let dy = derivative(&data, &shape, 1);
        for i in 0..n * m {
            let (x, y) = ((i / m) as f64 / n as f64, (i % m) as f64 / m as f64);
            let ex = 6.0 * PI * (6.0 * PI * x).cos() * (2.0 * PI * y).cos();
            let ey = -2.0 * PI * (6.0 * PI * x).sin() * (2.0 * PI * y).sin();
            assert!((dx[i].re - ex).abs() < 1e-11 && dx[i].im.abs() < 1e-11);
            assert!((dy[i].re - ey).abs() < 1e-11);
        }
    }

    #[test]
    fn band_limited_samples_have_no_high_modes() {
        let shape = [8, 4, 6];
        let a = random_band_limited(&shape, 1, &mut seeded(2));
        // forward transform along axis 0 and inspect the spectrum
        let mut spec = a.clone();
        let (fwd, _) = plans(8);
        for_each_line(&mut spec, &shape, 0, |l| fwd.process(l));
        for (i, z) in spec.iter().enumerate() {
            let k = frequency(i / 24, 8);
            if k.abs() > 1 {
                assert!(z.norm() < 1e-12);
            }
        }
        assert!(a.iter().map(|z| z.norm()).fold(0.0, f64::max) > 0.1);
    }
}
