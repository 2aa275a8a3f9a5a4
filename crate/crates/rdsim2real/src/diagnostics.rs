//! Alignment diagnostics: global RD magnitude histograms and the
//! static-to-total energy ratio.

use crate::error::{Error, Result};
use crate::rd::RdMap;

/// Pooled cell-value histogram over a set of maps.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Ascending bin edges, dB; `counts.len() == bin_edges.len() - 1`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    /// Normalized bin masses.
    pub fn densities(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }
}

/// 100 uniform bins spanning [-160, -60] dB.
pub fn default_edges() -> Vec<f64> {
    (0..=100).map(|i| -160.0 + i as f64).collect()
}

/// Pools all cells of all maps into a histogram. Values outside the edge
/// span saturate into the first/last bin.
pub fn magnitude_histogram(maps: &[RdMap], edges: &[f64]) -> Result<Histogram> {
    if maps.is_empty() {
        return Err(Error::Processing("histogram needs at least one map".into()));
    }
    if edges.len() < 2 || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Processing("bin edges must be ascending with >= 2 entries".into()));
    }
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    let mut total = 0u64;
    for map in maps {
        for &cell in &map.cells {
            let value = cell as f64;
            // partition_point gives the count of edges <= value; interior
            // values land in bin k with edges[k] <= value < edges[k+1].
            let bin = edges.partition_point(|&e| e <= value);
            let bin = bin.saturating_sub(1).min(bins - 1);
            counts[bin] += 1;
            total += 1;
        }
    }
    Ok(Histogram {
        bin_edges: edges.to_vec(),
        counts,
        total,
    })
}

/// Wasserstein-1 distance between two histograms on identical edges:
/// sum over bins of |CDF_a - CDF_b| times the bin width, both normalized.
pub fn wasserstein1(a: &Histogram, b: &Histogram) -> Result<f64> {
    if a.bin_edges != b.bin_edges {
        return Err(Error::Processing("histogram edges differ".into()));
    }
    if a.total == 0 || b.total == 0 {
        return Err(Error::Processing("histograms must be non-empty".into()));
    }
    let mut cdf_a = 0.0;
    let mut cdf_b = 0.0;
    let mut distance = 0.0;
    for (i, (&ca, &cb)) in a.counts.iter().zip(&b.counts).enumerate() {
        cdf_a += ca as f64 / a.total as f64;
        cdf_b += cb as f64 / b.total as f64;
        distance += (cdf_a - cdf_b).abs() * (a.bin_edges[i + 1] - a.bin_edges[i]);
    }
    Ok(distance)
}

/// Fraction of a frame's linear power inside the low-Doppler band
/// `|j - cols/2| <= halfwidth_bins`.
pub fn static_energy_ratio(map: &RdMap, halfwidth_bins: usize) -> Result<f64> {
    if halfwidth_bins >= map.cols / 2 {
        return Err(Error::Processing(format!(
            "halfwidth {halfwidth_bins} must be below cols/2 = {}",
            map.cols / 2
        )));
    }
    let center = map.cols / 2;
    let mut band = 0.0f64;
    let mut total = 0.0f64;
    for row in 0..map.rows {
        for col in 0..map.cols {
            let power = 10f64.powf(map.get(row, col) as f64 / 10.0);
            total += power;
            if col.abs_diff(center) <= halfwidth_bins {
                band += power;
            }
        }
    }
    Ok(band / total)
}

/// Default low-Doppler band halfwidth (3 columns of 64).
pub const DEFAULT_STATIC_HALFWIDTH: usize = 1;
