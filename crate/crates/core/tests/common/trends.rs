//! Noiseless generators for the eleven trend shapes, plus seeded noise.

use featrend_core::trendfit::TrendLabel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LENGTHS: [usize; 3] = [10, 30, 100];

/// Unrounded generator values for `label` over `n` commits.
pub fn generate(label: TrendLabel, n: usize) -> Vec<f64> {
    let last = (n - 1) as f64;
    let w = (n as f64 / 5.0).max(3.0);
    let gradual_k = 4.0 / w;
    let x0 = last / 2.0;
    let sig = |x: f64, k: f64| 1.0 / (1.0 + (-k * (x - x0)).exp());
    let cubic = |t: f64| (t - 0.2) * (t - 0.5) * (t - 0.8);
    let cubic_max = (0..n).map(|i| cubic(i as f64 / last).abs()).fold(0.0, f64::max);
    (0..n)
        .map(|i| {
            let x = i as f64;
            let t = x / last;
            let e = ((4.0 * t).exp() - 1.0) / (4f64.exp() - 1.0);
            match label {
                TrendLabel::CR => 3.0 + 40.0 * t,
                TrendLabel::CD => 45.0 - 40.0 * t,
                TrendLabel::S => 7.0,
                TrendLabel::SR => 2.0 + 40.0 * e,
                TrendLabel::SD => 45.0 - 40.0 * e,
                TrendLabel::SRP => 2.0 + 10.0 * (x + 1.0).ln(),
                TrendLabel::PGR => 5.0 + 40.0 * sig(x, gradual_k),
                TrendLabel::PGD => 45.0 - 40.0 * sig(x, gradual_k),
                TrendLabel::PSR => 5.0 + 40.0 * sig(x, 4.0),
                TrendLabel::PSD => 45.0 - 40.0 * sig(x, 4.0),
                TrendLabel::I => 25.0 + 20.0 * cubic(t) / cubic_max,
            }
        })
        .collect()
}

pub fn rounded(label: TrendLabel, n: usize) -> Vec<f64> {
    generate(label, n).into_iter().map(f64::round).collect()
}

/// Rounded series with uniform noise of ±5% of its range, rounded again and
/// clipped at zero.
pub fn noisy(label: TrendLabel, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = rounded(label, n);
    let lo = base.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let amp = 0.05 * (hi - lo);
    generate(label, n)
        .into_iter()
        .map(|y| {
            let jitter = if amp > 0.0 { rng.gen_range(-amp..=amp) } else { 0.0 };
            (y + jitter).round().max(0.0)
        })
        .collect()
}
