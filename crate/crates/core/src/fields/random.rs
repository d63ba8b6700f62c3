use super::{Grid, ScalarField};
use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use std::f64::consts::PI;

// coefficients are damped by 1/|m|^(2·DECAY)
const DECAY: i32 = 2;

/// Seeded strictly positive test density `ρ = exp(g)`.
///
/// `g` is a real trigonometric polynomial with modes up to `max_mode`
/// (default `N/8` per axis) and zero mean. Coefficients are drawn uniformly
/// from `[-1, 1)` with SplitMix64 seeded by `seed` (53-bit mantissa draws,
/// cosine then sine coefficient per mode, modes in increasing order), damped
/// by `1/|m|⁴`, and the sum is rescaled so that `max|g| = amplitude`.
/// Output is bit-reproducible for a given seed and grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSmoothDensity {
    pub seed: u64,
    pub max_mode: Option<usize>,
    pub amplitude: f64,
}

impl LogSmoothDensity {
    pub fn new(seed: u64) -> Self {
        LogSmoothDensity {
            seed,
            max_mode: None,
            amplitude: 1.0,
        }
    }

    pub fn with_max_mode(mut self, m: usize) -> Self {
        self.max_mode = Some(m);
        self
    }

    pub fn with_amplitude(mut self, a: f64) -> Self {
        self.amplitude = a;
        self
    }

    /// The exponent `g = ln ρ`.
    pub fn log_density(&self, grid: &Grid) -> ScalarField {
        let mut rng = SplitMix64::seed_from_u64(self.seed);
        let mut uniform = move || {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            2.0 * u - 1.0
        };
        let max_mode = |axis: usize| self.max_mode.unwrap_or(grid.points(axis) / 8).max(1) as i64;
        // (m0, m1, a, b) with a cos(phase) + b sin(phase)
        let mut modes: Vec<(i64, i64, f64, f64)> = Vec::new();
        if grid.dim() == 1 {
            for m in 1..=max_mode(0) {
                let w = 1.0 / ((m * m) as f64).powi(DECAY);
                modes.push((m, 0, w * uniform(), w * uniform()));
            }
        } else {
            let (m0max, m1max) = (max_mode(0), max_mode(1));
            // half plane: m0 > 0, or m0 = 0 and m1 > 0
            for m0 in 0..=m0max {
                let lo = if m0 == 0 { 1 } else { -m1max };
                for m1 in lo..=m1max {
                    let w = 1.0 / ((m0 * m0 + m1 * m1) as f64).powi(DECAY);
                    modes.push((m0, m1, w * uniform(), w * uniform()));
                }
            }
        }
        let k0 = 2.0 * PI / grid.length(0);
        let k1 = if grid.dim() == 2 { 2.0 * PI / grid.length(1) } else { 0.0 };
        let mut g: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let p = grid.point(idx);
                modes
                    .iter()
                    .map(|&(m0, m1, a, b)| {
                        let ph = m0 as f64 * k0 * p[0] + m1 as f64 * k1 * p[1];
                        a * ph.cos() + b * ph.sin()
                    })
                    .sum()
            })
            .collect();
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        let peak = g.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        let scale = if peak > 0.0 { self.amplitude / peak } else { 0.0 };
        for v in g.iter_mut() {
            *v = (*v - mean) * scale;
        }
        ScalarField::from_raw(*grid, g)
    }

    pub fn sample(&self, grid: &Grid) -> ScalarField {
        self.log_density(grid).map(f64::exp)
    }
}
