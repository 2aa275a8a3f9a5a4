//! Noise-floor clamp with random and calibrated samplers.
//!
//! Both training-time schemes raise background cells to a sampled floor,
//! `out(i,j) = max(S(i,j), N(i,j))`, applied in the dB domain before
//! clipping and normalization. They differ only in how the noise map is
//! drawn: the random variant picks a fresh mean and spread per frame from
//! wide intervals; the calibrated variant reuses one pair of statistics
//! estimated from unlabeled empty-room frames.

use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rd::RdMap;

/// Per-cell noise-floor field in dB, same shape as the target map.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseMap {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f32>,
}

impl NoiseMap {
    pub fn new(rows: usize, cols: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Processing(format!(
                "noise map value count {} does not match {rows}x{cols}",
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::Processing("non-finite noise value".into()));
        }
        Ok(Self { rows, cols, values })
    }

    /// All cells independently Gaussian with the given dB mean and spread.
    pub fn gaussian(rows: usize, cols: usize, mean_db: f64, std_db: f64, rng: &mut ChaCha8Rng) -> Self {
        let values = if std_db > 0.0 {
            let normal = Normal::new(mean_db, std_db).expect("valid noise spread");
            (0..rows * cols).map(|_| normal.sample(rng) as f32).collect()
        } else {
            vec![mean_db as f32; rows * cols]
        };
        Self { rows, cols, values }
    }
}

/// Sampling intervals of the uncalibrated randomizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomDrRanges {
    /// Interval for the per-frame mean, dB.
    pub mean_range_db: (f64, f64),
    /// Interval for the per-frame standard deviation, dB.
    pub std_range_db: (f64, f64),
}

impl Default for RandomDrRanges {
    fn default() -> Self {
        Self {
            mean_range_db: (-130.0, -100.0),
            std_range_db: (1.0, 4.0),
        }
    }
}

impl RandomDrRanges {
    pub fn validate(&self) -> Result<()> {
        let (m_lo, m_hi) = self.mean_range_db;
        let (s_lo, s_hi) = self.std_range_db;
        if !(m_lo <= m_hi) || !m_lo.is_finite() || !m_hi.is_finite() {
            return Err(Error::Config(format!("invalid mean range [{m_lo}, {m_hi}]")));
        }
        if !(s_lo > 0.0 && s_lo <= s_hi) || !s_hi.is_finite() {
            return Err(Error::Config(format!("invalid std range [{s_lo}, {s_hi}]")));
        }
        Ok(())
    }
}

/// Noise-floor statistics estimated once from calibration frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFloorStats {
    pub mean_db: f64,
    pub std_db: f64,
    pub n_cells: u64,
}

impl NoiseFloorStats {
    pub fn validate(&self) -> Result<()> {
        if !(self.std_db >= 0.0) || !self.mean_db.is_finite() || self.n_cells == 0 {
            return Err(Error::Config(format!(
                "invalid noise-floor stats (mean {}, std {}, n {})",
                self.mean_db, self.std_db, self.n_cells
            )));
        }
        Ok(())
    }

    pub fn to_json_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let stats: NoiseFloorStats = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        stats.validate()?;
        Ok(stats)
    }
}

/// Per-cell clamp `out = max(map, noise)`, the dB-domain floor raise.
pub fn clamp_noise(map: &RdMap, noise: &NoiseMap) -> Result<RdMap> {
    if map.rows != noise.rows || map.cols != noise.cols {
        return Err(Error::Processing(format!(
            "clamp shape mismatch: map {}x{}, noise {}x{}",
            map.rows, map.cols, noise.rows, noise.cols
        )));
    }
    let cells = map
        .cells
        .iter()
        .zip(&noise.values)
        .map(|(&s, &n)| s.max(n))
        .collect();
    Ok(RdMap {
        rows: map.rows,
        cols: map.cols,
        cells,
        domain: map.domain,
        label: map.label,
    })
}

/// Draws one random-DR noise map: a fresh (mean, std) pair per call, then
/// i.i.d. Gaussian cells.
pub fn sample_random_dr(
    ranges: &RandomDrRanges,
    rows: usize,
    cols: usize,
    rng: &mut ChaCha8Rng,
) -> Result<NoiseMap> {
    ranges.validate()?;
    let mean = sample_interval(ranges.mean_range_db, rng);
    let std = sample_interval(ranges.std_range_db, rng);
    Ok(NoiseMap::gaussian(rows, cols, mean, std, rng))
}

fn sample_interval(range: (f64, f64), rng: &mut ChaCha8Rng) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.random_range(range.0..=range.1)
    }
}

/// Pools every cell of the calibration maps and returns their mean and
/// population standard deviation. Labels are never consulted; callers are
/// responsible for passing frames from the unlabeled empty-room sequence.
pub fn calibrate_noise_floor(maps: &[RdMap]) -> Result<NoiseFloorStats> {
    if maps.is_empty() {
        return Err(Error::Processing("calibration needs at least one map".into()));
    }
    // Welford's online moments over the pooled cells.
    let mut count = 0u64;
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for map in maps {
        for &cell in &map.cells {
            count += 1;
            let x = cell as f64;
            let delta = x - mean;
            mean += delta / count as f64;
            m2 += delta * (x - mean);
        }
    }
    Ok(NoiseFloorStats {
        mean_db: mean,
        std_db: (m2 / count as f64).sqrt(),
        n_cells: count,
    })
}

/// Calibrated domain randomization: samples a Gaussian noise map from the
/// calibrated statistics and applies the clamp.
pub fn apply_cdr(map: &RdMap, stats: &NoiseFloorStats, rng: &mut ChaCha8Rng) -> Result<RdMap> {
    stats.validate()?;
    let noise = NoiseMap::gaussian(map.rows, map.cols, stats.mean_db, stats.std_db, rng);
    clamp_noise(map, &noise)
}

/// Random-DR augmentation of a whole dataset. Frame `i` always uses the RNG
/// substream seeded with `derive_seed(master_seed, i)`, so parallel and
/// serial runs produce identical outputs.
pub fn augment_random_dr(
    maps: &[RdMap],
    ranges: &RandomDrRanges,
    master_seed: u64,
    threads: usize,
) -> Result<Vec<RdMap>> {
    ranges.validate()?;
    crate::util::par_map_indexed(maps.len(), threads, |i| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::util::derive_seed(
            master_seed,
            i as u64,
        ));
        let noise = sample_random_dr(ranges, maps[i].rows, maps[i].cols, &mut rng)?;
        clamp_noise(&maps[i], &noise)
    })
    .into_iter()
    .collect()
}

/// CDR augmentation of a whole dataset, same substream-per-frame rule as
/// [`augment_random_dr`].
pub fn augment_cdr(
    maps: &[RdMap],
    stats: &NoiseFloorStats,
    master_seed: u64,
    threads: usize,
) -> Result<Vec<RdMap>> {
    stats.validate()?;
    crate::util::par_map_indexed(maps.len(), threads, |i| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(crate::util::derive_seed(
            master_seed,
            i as u64,
        ));
        apply_cdr(&maps[i], stats, &mut rng)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Domain;

    fn map_from(cells: Vec<f32>, cols: usize) -> RdMap {
        let rows = cells.len() / cols;
        RdMap::new(rows, cols, cells, Domain::Sim).unwrap()
    }

    #[test]
    fn clamp_preserves_signal_and_raises_floor() {
        let map = map_from(vec![-80.0, -140.0], 2);
        let noise = NoiseMap::new(1, 2, vec![-120.0, -120.0]).unwrap();
        let out = clamp_noise(&map, &noise).unwrap();
        assert_eq!(out.cells, vec![-80.0, -120.0]);
    }

    #[test]
    fn clamp_rejects_shape_mismatch() {
        let map = map_from(vec![-80.0; 4], 2);
        let noise = NoiseMap::new(1, 2, vec![-120.0; 2]).unwrap();
        assert!(clamp_noise(&map, &noise).is_err());
    }

    #[test]
    fn random_dr_moment_check() {
        // Collapsed ranges pin the distribution; the sampled std over 1e5
        // cells must sit within 1% of the requested 1 dB.
        let ranges = RandomDrRanges {
            mean_range_db: (-100.0, -100.0),
            std_range_db: (1.0, 1.0),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let noise = sample_random_dr(&ranges, 250, 400, &mut rng).unwrap();
        let n = noise.values.len() as f64;
        let mean = noise.values.iter().map(|&v| v as f64).sum::<f64>() / n;
        let var = noise
            .values
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        let std = var.sqrt();
        assert!((0.99..=1.01).contains(&std), "std {std}");
        assert!((mean - -100.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn random_dr_redraws_mean_per_frame() {
        let ranges = RandomDrRanges::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = sample_random_dr(&ranges, 8, 8, &mut rng).unwrap();
        let b = sample_random_dr(&ranges, 8, 8, &mut rng).unwrap();
        let mean = |m: &NoiseMap| m.values.iter().map(|&v| v as f64).sum::<f64>() / 64.0;
        assert!((mean(&a) - mean(&b)).abs() > 0.5);
    }

    #[test]
    fn random_dr_pooled_mean_near_interval_midpoint() {
        let ranges = RandomDrRanges::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut total = 0.0;
        let mut count = 0usize;
        for _ in 0..100 {
            let noise = sample_random_dr(&ranges, 32, 32, &mut rng).unwrap();
            total += noise.values.iter().map(|&v| v as f64).sum::<f64>();
            count += noise.values.len();
        }
        let pooled = total / count as f64;
        assert!((pooled - -115.0).abs() < 1.0, "pooled mean {pooled}");
    }

    #[test]
    fn calibration_constant_field() {
        let maps = vec![map_from(vec![-110.0; 64], 8)];
        let stats = calibrate_noise_floor(&maps).unwrap();
        assert_eq!(stats.mean_db, -110.0);
        assert_eq!(stats.std_db, 0.0);
        assert_eq!(stats.n_cells, 64);
    }

    #[test]
    fn calibration_two_point_field() {
        let maps = vec![map_from(vec![-100.0, -90.0], 2)];
        let stats = calibrate_noise_floor(&maps).unwrap();
        assert!((stats.mean_db - -95.0).abs() < 1e-9);
        assert!((stats.std_db - 5.0).abs() < 1e-9);
    }

    #[test]
    fn calibration_rejects_empty_input() {
        assert!(calibrate_noise_floor(&[]).is_err());
    }

    #[test]
    fn cdr_degenerate_spread_is_exact_max() {
        let map = map_from(vec![-140.0, -90.0, -111.0, -109.0], 2);
        let stats = NoiseFloorStats {
            mean_db: -110.0,
            std_db: 0.0,
            n_cells: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = apply_cdr(&map, &stats, &mut rng).unwrap();
        assert_eq!(out.cells, vec![-110.0, -90.0, -110.0, -109.0]);
    }

    #[test]
    fn cdr_matches_calibrated_moments_on_clean_floor() {
        // A floor far below the calibrated mean never survives the clamp,
        // so the output is the pure Gaussian field.
        let stats = NoiseFloorStats {
            mean_db: -110.0,
            std_db: 2.0,
            n_cells: 1000,
        };
        let map = map_from(vec![-160.0; 128 * 64 * 16], 64);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let out = apply_cdr(&map, &stats, &mut rng).unwrap();
        let n = out.cells.len() as f64;
        assert!(n >= 1e5);
        let mean = out.cells.iter().map(|&v| v as f64).sum::<f64>() / n;
        let std = (out
            .cells
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        assert!((mean - stats.mean_db).abs() < 0.2, "mean {mean}");
        assert!((std - stats.std_db).abs() / stats.std_db < 0.02, "std {std}");
    }

    #[test]
    fn strong_cells_survive_cdr() {
        let stats = NoiseFloorStats {
            mean_db: -110.0,
            std_db: 3.0,
            n_cells: 1000,
        };
        let strong = -80.0f32; // mean + 30 dB = mean + 10 sigma
        let map = map_from(vec![strong; 4096], 64);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = apply_cdr(&map, &stats, &mut rng).unwrap();
        assert!(out.cells.iter().all(|&c| c == strong));
    }
}
