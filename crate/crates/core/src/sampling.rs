//! Deterministic sampling inside a chart's box.
//!
//! Point `k` is drawn from its own ChaCha stream keyed by `(seed, k)`, so any
//! subset of points can be regenerated independently and in parallel.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::Chart;

/// Attempts per point before rejection sampling gives up.
pub const MAX_ATTEMPTS: usize = 10_000;

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point `index` of the box, ignoring exclusions.
pub fn box_point(bx: &[(f64, f64)], seed: u64, index: u64) -> Vec<f64> {
    let mut rng = stream(seed, index);
    bx.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect()
}

/// Admissible point `index` of `chart`, by rejection against its exclusions.
pub fn chart_point(chart: &Chart, seed: u64, index: u64) -> Result<Vec<f64>> {
    let mut rng = stream(seed, index);
    for _ in 0..MAX_ATTEMPTS {
        let x: Vec<f64> = chart
            .sample_box
            .iter()
            .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect();
        if chart.violated(&x).is_none() {
            return Ok(x);
        }
    }
    Err(Error::SamplerExhausted { attempts: MAX_ATTEMPTS })
}

/// The first `count` admissible points for `seed`.
pub fn sample_points(chart: &Chart, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    (0..count as u64).map(|k| chart_point(chart, seed, k)).collect()
}

/// Like [`sample_points`] with an extra admissibility test.
pub fn sample_points_where(
    chart: &Chart,
    seed: u64,
    count: usize,
    accept: impl Fn(&[f64]) -> bool,
) -> Result<Vec<Vec<f64>>> {
    (0..count as u64)
        .map(|k| {
            let mut rng = stream(seed, k);
            for _ in 0..MAX_ATTEMPTS {
                let x: Vec<f64> = chart
                    .sample_box
                    .iter()
                    .map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
                    .collect();
                if chart.violated(&x).is_none() && accept(&x) {
                    return Ok(x);
                }
            }
            Err(Error::SamplerExhausted { attempts: MAX_ATTEMPTS })
        })
        .collect()
}
