use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Parameters of the outlier-line generator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_line: usize,
    pub n_outliers: usize,
    /// Inliers sit at `s·direction` with `s ~ U[−spread, spread]`.
    pub spread: f64,
    /// Standard deviation of the perpendicular inlier noise.
    pub noise: f64,
    /// Outliers sit at perpendicular distance `factor · spread · (1 + U[0, 0.5])`.
    pub outlier_factor: f64,
    /// Unit direction of the line.
    pub direction: [f64; 2],
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_line: 30,
            n_outliers: 3,
            spread: 3.0,
            noise: 0.05,
            outlier_factor: 5.0,
            direction: [std::f64::consts::FRAC_1_SQRT_2; 2],
        }
    }
}

/// Generated points; the first `n_line` rows are inliers.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthData {
    pub points: Matrix,
    pub outliers: Vec<usize>,
}

pub fn synth_line(config: &SynthConfig, seed: u64) -> Result<SynthData> {
    if config.n_line < 2 {
        return Err(Error::param(format!(
            "need at least two points on the line, got {}",
            config.n_line
        )));
    }
    if !(config.spread > 0.0 && config.noise >= 0.0 && config.outlier_factor > 0.0) {
        return Err(Error::param(
            "spread and outlier factor must be positive, noise nonnegative",
        ));
    }
    let [dx, dy] = config.direction;
    let len = dx.hypot(dy);
    if !(len.is_finite() && len > 0.0) {
        return Err(Error::param("line direction must be a nonzero vector"));
    }
    let (ux, uy) = (dx / len, dy / len);
    let (px, py) = (-uy, ux);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, config.noise).map_err(|e| Error::param(e.to_string()))?;
    let mut rows = Vec::with_capacity(config.n_line + config.n_outliers);
    for _ in 0..config.n_line {
        let s = rng.random_range(-config.spread..=config.spread);
        let e = normal.sample(&mut rng);
        rows.push([s * ux + e * px, s * uy + e * py]);
    }
    for _ in 0..config.n_outliers {
        let a = rng.random_range(-config.spread..=config.spread);
        let dist = config.outlier_factor * config.spread * (1.0 + rng.random_range(0.0..=0.5));
        let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        rows.push([a * ux + side * dist * px, a * uy + side * dist * py]);
    }
    Ok(SynthData {
        points: Matrix::from_rows(&rows)?,
        outliers: (config.n_line..config.n_line + config.n_outliers).collect(),
    })
}

/// Points only; see [`synth_line`].
pub fn synth_line_dataset(config: &SynthConfig, seed: u64) -> Result<Matrix> {
    synth_line(config, seed).map(|d| d.points)
}
