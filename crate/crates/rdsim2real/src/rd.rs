//! Range-Doppler processing: windowed 2D FFT, dB conversion, clipping,
//! normalization and viridis image rendering.
//!
//! The same pipeline processes both domains; the held-out pseudo-real path
//! is only ever clipped, normalized and colormapped — never randomized.

pub mod viridis;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scene::Domain;
use crate::sim::DataCube;

/// Guard against log of zero; silence maps to 20*log10(ε) = -240 dB.
pub const DB_EPSILON: f64 = 1e-12;
/// dB value of an all-zero cell.
pub const DB_SILENCE: f64 = -240.0;

/// dB-magnitude range-Doppler grid. Rows are range bins (0 = closest),
/// columns are Doppler bins with zero Doppler at `cols / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RdMap {
    pub rows: usize,
    pub cols: usize,
    /// Row-major cells, dB.
    pub cells: Vec<f32>,
    pub domain: Domain,
    pub label: Option<u8>,
}

impl RdMap {
    pub fn new(rows: usize, cols: usize, cells: Vec<f32>, domain: Domain) -> Result<Self> {
        if cells.len() != rows * cols {
            return Err(Error::Processing(format!(
                "cell count {} does not match {rows}x{cols}",
                cells.len()
            )));
        }
        if !cells.iter().all(|c| c.is_finite()) {
            return Err(Error::Processing("non-finite RD cell".into()));
        }
        Ok(Self {
            rows,
            cols,
            cells,
            domain,
            label: None,
        })
    }

    pub fn constant(rows: usize, cols: usize, value: f32, domain: Domain) -> Self {
        Self {
            rows,
            cols,
            cells: vec![value; rows * cols],
            domain,
            label: None,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.cells[row * self.cols + col]
    }

    /// Index of the strongest cell as (range bin, Doppler bin).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, cell) in self.cells.iter().enumerate() {
            if *cell > self.cells[best] {
                best = i;
            }
        }
        (best / self.cols, best % self.cols)
    }

    pub fn with_label(mut self, label: u8) -> Self {
        self.label = Some(label);
        self
    }
}

/// Fixed dB clip window estimated from simulated training data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClipRange {
    pub v_min_db: f64,
    pub v_max_db: f64,
}

impl ClipRange {
    pub fn new(v_min_db: f64, v_max_db: f64) -> Result<Self> {
        if !(v_min_db < v_max_db) {
            return Err(Error::Processing(format!(
                "clip range requires v_min < v_max, got [{v_min_db}, {v_max_db}]"
            )));
        }
        Ok(Self { v_min_db, v_max_db })
    }

    pub fn to_json_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let parsed: ClipRange = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        ClipRange::new(parsed.v_min_db, parsed.v_max_db)
    }
}

/// H x W x 3 image with channel values in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RdImage {
    pub height: usize,
    pub width: usize,
    /// Row-major RGB triples, `pixels[(y * width + x) * 3 + channel]`.
    pub pixels: Vec<f32>,
}

impl RdImage {
    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let base = (y * self.width + x) * 3;
        [self.pixels[base], self.pixels[base + 1], self.pixels[base + 2]]
    }

    /// Halves the height by averaging row pairs; used to shrink 128x64 maps
    /// to the 64x64 classifier input.
    pub fn average_row_pairs(&self) -> Result<RdImage> {
        if self.height % 2 != 0 {
            return Err(Error::Processing(format!(
                "cannot pair rows of height {}",
                self.height
            )));
        }
        let out_h = self.height / 2;
        let mut pixels = vec![0.0f32; out_h * self.width * 3];
        for y in 0..out_h {
            for x in 0..self.width {
                for ch in 0..3 {
                    let top = self.pixels[((2 * y) * self.width + x) * 3 + ch];
                    let bottom = self.pixels[((2 * y + 1) * self.width + x) * 3 + ch];
                    pixels[(y * self.width + x) * 3 + ch] = 0.5 * (top + bottom);
                }
            }
        }
        Ok(RdImage {
            height: out_h,
            width: self.width,
            pixels,
        })
    }

    /// Writes an 8-bit RGB PNG with value = round(255 * channel).
    pub fn write_png(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let writer = std::io::BufWriter::new(file);
        let mut encoder = png::Encoder::new(writer, self.width as u32, self.height as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header()?;
        let data: Vec<u8> = self
            .pixels
            .iter()
            .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect();
        writer.write_image_data(&data)?;
        Ok(())
    }
}

/// Periodic Hann window of length `n`.
pub fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 * (1.0 - (std::f64::consts::TAU * k as f64 / n as f64).cos()))
        .collect()
}

/// Hann-windowed 2D spectrum of a cube, keeping the one-sided fast-time
/// band: rows 0..n_fast/2, Doppler shifted so zero lands at column
/// n_slow/2. Unnormalized forward FFTs.
pub fn range_doppler_spectrum(cube: &DataCube) -> Result<Vec<Complex64>> {
    let n_fast = cube.n_fast;
    let n_slow = cube.n_slow;
    if n_fast < 4 || n_slow < 2 || cube.samples.len() != n_fast * n_slow {
        return Err(Error::Processing(format!(
            "cube dimensions {n_fast}x{n_slow} unsupported"
        )));
    }
    let rows = n_fast / 2;
    let window_fast = hann(n_fast);
    let window_slow = hann(n_slow);
    let mut planner = FftPlanner::<f64>::new();
    let fft_fast = planner.plan_fft_forward(n_fast);
    let fft_slow = planner.plan_fft_forward(n_slow);

    // Fast-time FFT per chirp, keep the positive-frequency half.
    let mut kept = vec![Complex64::new(0.0, 0.0); rows * n_slow];
    let mut column = vec![Complex64::new(0.0, 0.0); n_fast];
    for chirp in 0..n_slow {
        for fast in 0..n_fast {
            column[fast] =
                Complex64::new(cube.samples[fast * n_slow + chirp] * window_fast[fast], 0.0);
        }
        fft_fast.process(&mut column);
        for row in 0..rows {
            kept[row * n_slow + chirp] = column[row];
        }
    }

    // Slow-time FFT per kept range row, then shift zero Doppler to center.
    let mut spectrum = vec![Complex64::new(0.0, 0.0); rows * n_slow];
    let mut line = vec![Complex64::new(0.0, 0.0); n_slow];
    let half = n_slow / 2;
    for row in 0..rows {
        for chirp in 0..n_slow {
            line[chirp] = kept[row * n_slow + chirp] * window_slow[chirp];
        }
        fft_slow.process(&mut line);
        for col in 0..n_slow {
            spectrum[row * n_slow + col] = line[(col + half) % n_slow];
        }
    }
    Ok(spectrum)
}

/// Full RD processing: windowed 2D FFT and conversion to dB magnitude.
pub fn range_doppler(cube: &DataCube) -> Result<RdMap> {
    let rows = cube.n_fast / 2;
    let cols = cube.n_slow;
    let spectrum = range_doppler_spectrum(cube)?;
    let cells: Vec<f32> = spectrum
        .iter()
        .map(|x| (20.0 * (x.norm() + DB_EPSILON).log10()) as f32)
        .collect();
    RdMap::new(rows, cols, cells, cube.domain)
}

/// Pools all cells of all maps and returns the requested percentiles as the
/// clip window. Percentiles use linear interpolation between order
/// statistics.
pub fn estimate_clip_range(maps: &[RdMap], lo_pct: f64, hi_pct: f64) -> Result<ClipRange> {
    if maps.is_empty() {
        return Err(Error::Processing("clip estimation needs at least one map".into()));
    }
    if !(0.0..=100.0).contains(&lo_pct) || !(0.0..=100.0).contains(&hi_pct) || lo_pct >= hi_pct {
        return Err(Error::Processing(format!(
            "invalid percentile pair ({lo_pct}, {hi_pct})"
        )));
    }
    let mut pooled: Vec<f64> = maps
        .iter()
        .flat_map(|m| m.cells.iter().map(|&c| c as f64))
        .collect();
    let v_min = percentile(&mut pooled, lo_pct);
    let v_max = percentile(&mut pooled, hi_pct);
    ClipRange::new(v_min, v_max)
}

fn percentile(values: &mut [f64], pct: f64) -> f64 {
    let n = values.len();
    let rank = pct / 100.0 * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    let (_, lo_value, rest) =
        values.select_nth_unstable_by(lo, |a, b| a.partial_cmp(b).expect("finite cells"));
    let lo_value = *lo_value;
    if frac == 0.0 || rest.is_empty() {
        lo_value
    } else {
        let hi_value = rest
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        lo_value + frac * (hi_value - lo_value)
    }
}

/// Clamps to the clip window and rescales to [0, 1].
pub fn clip_normalize(map: &RdMap, range: &ClipRange) -> RdMap {
    let lo = range.v_min_db as f32;
    let hi = range.v_max_db as f32;
    let span = hi - lo;
    let cells = map
        .cells
        .iter()
        .map(|&c| (c.clamp(lo, hi) - lo) / span)
        .collect();
    RdMap {
        rows: map.rows,
        cols: map.cols,
        cells,
        domain: map.domain,
        label: map.label,
    }
}

/// Renders a normalized map through the 256-entry viridis table with linear
/// interpolation between adjacent entries.
pub fn colormap_viridis(map: &RdMap) -> Result<RdImage> {
    let mut pixels = vec![0.0f32; map.rows * map.cols * 3];
    for (idx, &value) in map.cells.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Processing(format!(
                "colormap input {value} outside [0, 1] at cell {idx}"
            )));
        }
        let rgb = viridis_lookup(value as f64);
        pixels[idx * 3] = rgb[0] as f32;
        pixels[idx * 3 + 1] = rgb[1] as f32;
        pixels[idx * 3 + 2] = rgb[2] as f32;
    }
    Ok(RdImage {
        height: map.rows,
        width: map.cols,
        pixels,
    })
}

/// Interpolated viridis lookup for `value` in [0, 1].
pub fn viridis_lookup(value: f64) -> [f64; 3] {
    let x = value * 255.0;
    let idx = (x.floor() as usize).min(255);
    if idx >= 255 {
        return viridis::VIRIDIS[255];
    }
    let frac = x - idx as f64;
    let a = viridis::VIRIDIS[idx];
    let b = viridis::VIRIDIS[idx + 1];
    [
        a[0] + frac * (b[0] - a[0]),
        a[1] + frac * (b[1] - a[1]),
        a[2] + frac * (b[2] - a[2]),
    ]
}

/// Rec. 709 luminance of an RGB triple.
pub fn luminance(rgb: [f64; 3]) -> f64 {
    0.2126 * rgb[0] + 0.7152 * rgb[1] + 0.0722 * rgb[2]
}
