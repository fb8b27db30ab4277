//! Arbitrary-length DFT by the chirp-z (Bluestein) reduction to a
//! power-of-two cyclic convolution.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_j = sum_k x_k exp(-2 pi i jk / n)`
    Forward,
    /// `X_j = sum_k x_k exp(+2 pi i jk / n)`, unnormalized.
    Inverse,
}

enum Plan {
    Direct {
        forward: Arc<dyn Fft<f64>>,
    },
    Bluestein {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
        /// `exp(-pi i k^2 / n)` for `k < n`
        chirp: Vec<Complex64>,
        /// spectrum of the conjugate chirp laid out cyclically, pre-scaled by `1/L`
        kernel: Vec<Complex64>,
    },
}

/// A DFT of fixed length, reusable across calls.
pub struct ChirpZ {
    len: usize,
    plan: Plan,
}

impl ChirpZ {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "zero-length transform");
        let mut planner = FftPlanner::new();
        if len.is_power_of_two() {
            return Self {
                len,
                plan: Plan::Direct {
                    forward: planner.plan_fft_forward(len),
                },
            };
        }
        let inner = (2 * len - 1).next_power_of_two();
        let forward = planner.plan_fft_forward(inner);
        let inverse = planner.plan_fft_inverse(inner);

        let two_n = 2 * len as u64;
        let chirp: Vec<Complex64> = (0..len as u64)
            .map(|k| {
                // k^2 mod 2n keeps the angle small and exact
                let phase = (k * k) % two_n;
                Complex64::from_polar(1.0, -PI * phase as f64 / len as f64)
            })
            .collect();

        let scale = 1.0 / inner as f64;
        let mut kernel = vec![Complex64::new(0.0, 0.0); inner];
        kernel[0] = chirp[0].conj() * scale;
        for m in 1..len {
            let w = chirp[m].conj() * scale;
            kernel[m] = w;
            kernel[inner - m] = w;
        }
        forward.process(&mut kernel);

        Self {
            len,
            plan: Plan::Bluestein {
                forward,
                inverse,
                chirp,
                kernel,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Transform `data` in place.
    pub fn process(&self, data: &mut [Complex64], direction: Direction) {
        assert_eq!(data.len(), self.len, "transform length mismatch");
        if direction == Direction::Inverse {
            data.iter_mut().for_each(|z| *z = z.conj());
        }
        match &self.plan {
            Plan::Direct { forward } => forward.process(data),
            Plan::Bluestein {
                forward,
                inverse,
                chirp,
                kernel,
            } => {
                let mut work = vec![Complex64::new(0.0, 0.0); kernel.len()];
                for ((w, &x), &c) in work.iter_mut().zip(data.iter()).zip(chirp) {
                    *w = x * c;
                }
                forward.process(&mut work);
                for (w, &k) in work.iter_mut().zip(kernel) {
                    *w *= k;
                }
                inverse.process(&mut work);
                for ((x, &w), &c) in data.iter_mut().zip(&work).zip(chirp) {
                    *x = w * c;
                }
            }
        }
        if direction == Direction::Inverse {
            data.iter_mut().for_each(|z| *z = z.conj());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sum::CompensatedSum;

    fn naive_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|j| {
                let mut s = CompensatedSum::default();
                for (k, &v) in x.iter().enumerate() {
                    let phase = ((j * k) % n) as f64;
                    s.add(v * Complex64::from_polar(1.0, sign * 2.0 * PI * phase / n as f64));
                }
                s.value()
            })
            .collect()
    }

    fn signal(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|k| Complex64::new((k as f64 * 0.7).sin() + 0.3, (k as f64 * 1.3).cos()))
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in (1..=40).chain([100, 210, 256, 1008]) {
            let x = signal(n);
            let plan = ChirpZ::new(n);
            for (dir, sign) in [(Direction::Forward, -1.0), (Direction::Inverse, 1.0)] {
                let mut y = x.clone();
                plan.process(&mut y, dir);
                let expect = naive_dft(&x, sign);
                let err = y.iter().zip(&expect).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err < 1e-9 * n as f64, "n = {n}, dir = {dir:?}, err = {err}");
            }
        }
    }

    #[test]
    fn round_trip_is_accurate_at_large_prime_minus_one() {
        // p = 1_000_003, p - 1 = 2 * 3 * 166667
        let n = 1_000_002;
        let x = signal(n);
        let plan = ChirpZ::new(n);
        let mut y = x.clone();
        plan.process(&mut y, Direction::Forward);
        plan.process(&mut y, Direction::Inverse);
        let scale = 1.0 / n as f64;
        let max_in = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = y
            .iter()
            .zip(&x)
            .map(|(a, b)| (a * scale - b).norm())
            .fold(0.0, f64::max);
        assert!(err / max_in < 1e-9, "relative round trip error {err}");
    }
}
