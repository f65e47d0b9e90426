use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use super::SpreadParams;
use crate::error::{check, Result};

/// Samples per random stream. Block `b` draws from stream `b` of the seed,
/// so output is independent of the number of worker threads.
pub const SAMPLER_BLOCK: usize = 1 << 16;

fn counts(mean: f64) -> Option<Poisson<f64>> {
    (mean > 0.0).then(|| Poisson::new(mean).expect("finite positive mean"))
}

/// Terminal prices `x0 + eps (N+ - N-) - vol² delta t / eps`.
pub fn sample_paths(params: &SpreadParams, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    check(n_samples >= 1, "n_samples", "must be >= 1")?;
    let n_blocks = n_samples.div_ceil(SAMPLER_BLOCK);
    let blocks: Vec<Vec<f64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let len = SAMPLER_BLOCK.min(n_samples - b * SAMPLER_BLOCK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            draw_block(params, len, &mut rng)
        })
        .collect();
    Ok(blocks.concat())
}

fn draw_block(params: &SpreadParams, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if params.eps == 0.0 {
        let normal = rand_distr::Normal::new(params.x0, params.variance().sqrt()).expect("finite sd");
        return (0..len).map(|_| normal.sample(rng)).collect();
    }
    let (up, down) = params.jump_rates();
    let up = counts(up * params.t);
    let down = counts(down * params.t);
    let base = params.x0 + params.drift();
    (0..len)
        .map(|_| {
            let nu = up.as_ref().map_or(0.0, |d| d.sample(rng));
            let nd = down.as_ref().map_or(0.0, |d| d.sample(rng));
            base + params.eps * (nu - nd)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl MomentEstimate {
    /// `|value - target|` in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.std_error
    }
}

/// Sample mean of `(X - center)^k` with its standard error.
pub fn sample_moment(samples: &[f64], k: u32, center: f64) -> MomentEstimate {
    let n = samples.len() as f64;
    let (s1, s2) = samples.iter().fold((0.0, 0.0), |(a, b), &x| {
        let y = (x - center).powi(k as i32);
        (a + y, b + y * y)
    });
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    MomentEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
    }
}
