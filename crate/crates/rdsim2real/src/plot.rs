//! Minimal PNG plotting for the diagnostic reports: enough to overlay
//! histograms and scatter per-frame energy ratios, nothing more.

use std::path::Path;

use crate::diagnostics::Histogram;
use crate::error::Result;
use crate::rd::RdImage;

pub struct Canvas {
    pub width: usize,
    pub height: usize,
    pixels: Vec<f32>,
}

impl Canvas {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            pixels: vec![1.0; width * height * 3],
        }
    }

    pub fn set(&mut self, x: i64, y: i64, rgb: [f32; 3]) {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            return;
        }
        let base = (y as usize * self.width + x as usize) * 3;
        self.pixels[base] = rgb[0];
        self.pixels[base + 1] = rgb[1];
        self.pixels[base + 2] = rgb[2];
    }

    pub fn line(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, rgb: [f32; 3]) {
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        let (mut x, mut y) = (x0, y0);
        loop {
            self.set(x, y, rgb);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    pub fn disc(&mut self, cx: i64, cy: i64, radius: i64, rgb: [f32; 3]) {
        for y in -radius..=radius {
            for x in -radius..=radius {
                if x * x + y * y <= radius * radius {
                    self.set(cx + x, cy + y, rgb);
                }
            }
        }
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        RdImage {
            height: self.height,
            width: self.width,
            pixels: self.pixels.clone(),
        }
        .write_png(path)
    }
}

pub const SERIES_COLORS: [[f32; 3]; 6] = [
    [0.19, 0.42, 0.79], // blue
    [0.94, 0.55, 0.15], // orange
    [0.22, 0.65, 0.32], // green
    [0.80, 0.22, 0.25], // red
    [0.53, 0.35, 0.70], // purple
    [0.35, 0.35, 0.35], // gray
];

/// Overlays normalized histograms as polylines on a shared axis.
pub fn plot_histograms(series: &[(String, &Histogram)], path: &Path) -> Result<()> {
    let (width, height, margin) = (640usize, 400usize, 30i64);
    let mut canvas = Canvas::new(width, height);
    let peak = series
        .iter()
        .flat_map(|(_, h)| h.densities())
        .fold(1e-12, f64::max);
    let plot_w = width as i64 - 2 * margin;
    let plot_h = height as i64 - 2 * margin;
    canvas.line(margin, height as i64 - margin, width as i64 - margin, height as i64 - margin, [0.0; 3]);
    canvas.line(margin, margin, margin, height as i64 - margin, [0.0; 3]);
    for (idx, (_, hist)) in series.iter().enumerate() {
        let color = SERIES_COLORS[idx % SERIES_COLORS.len()];
        let densities = hist.densities();
        let bins = densities.len();
        let mut previous: Option<(i64, i64)> = None;
        for (bin, &density) in densities.iter().enumerate() {
            let x = margin + ((bin as f64 + 0.5) / bins as f64 * plot_w as f64) as i64;
            let y = height as i64 - margin - (density / peak * plot_h as f64) as i64;
            if let Some((px, py)) = previous {
                canvas.line(px, py, x, y, color);
            }
            previous = Some((x, y));
        }
    }
    canvas.save_png(path)
}

/// Scatter of per-frame values grouped into labeled columns.
pub fn plot_grouped_scatter(groups: &[(String, Vec<f64>)], path: &Path) -> Result<()> {
    let (width, height, margin) = (640usize, 400usize, 30i64);
    let mut canvas = Canvas::new(width, height);
    canvas.line(margin, height as i64 - margin, width as i64 - margin, height as i64 - margin, [0.0; 3]);
    canvas.line(margin, margin, margin, height as i64 - margin, [0.0; 3]);
    let plot_h = height as i64 - 2 * margin;
    let slot = (width as i64 - 2 * margin) / groups.len().max(1) as i64;
    for (idx, (_, values)) in groups.iter().enumerate() {
        let color = SERIES_COLORS[idx % SERIES_COLORS.len()];
        let x_center = margin + slot * idx as i64 + slot / 2;
        for (i, &value) in values.iter().enumerate() {
            let jitter = ((i * 2654435761) % 41) as i64 - 20;
            let y = height as i64 - margin - (value.clamp(0.0, 1.0) * plot_h as f64) as i64;
            canvas.disc(x_center + jitter, y, 2, color);
        }
    }
    canvas.save_png(path)
}
