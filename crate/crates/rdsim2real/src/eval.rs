//! Confusion matrices and accuracy metrics for the three-method comparison.

use std::path::Path;

use crate::error::{Error, Result};
use crate::rd::RdImage;

/// K x K confusion counts; rows are true classes, columns predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub classes: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![0; classes * classes],
        }
    }

    pub fn from_counts(classes: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != classes * classes {
            return Err(Error::Metrics(format!(
                "{} counts for a {classes}x{classes} matrix",
                counts.len()
            )));
        }
        Ok(Self { classes, counts })
    }

    pub fn get(&self, true_class: usize, predicted: usize) -> u64 {
        self.counts[true_class * self.classes + predicted]
    }

    pub fn row_sum(&self, true_class: usize) -> u64 {
        (0..self.classes).map(|p| self.get(true_class, p)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes).map(|k| self.get(k, k)).sum()
    }

    /// CSV grid: header row `true\pred,0,1,...` then one row per class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\pred");
        for p in 0..self.classes {
            out.push_str(&format!(",{p}"));
        }
        out.push('\n');
        for t in 0..self.classes {
            out.push_str(&t.to_string());
            for p in 0..self.classes {
                out.push_str(&format!(",{}", self.get(t, p)));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let row: Vec<u64> = line
                .split(',')
                .skip(1)
                .map(|f| {
                    f.trim()
                        .parse::<u64>()
                        .map_err(|e| Error::Metrics(format!("bad confusion CSV field: {e}")))
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        let classes = rows.len();
        if classes == 0 || rows.iter().any(|r| r.len() != classes) {
            return Err(Error::Metrics("confusion CSV is not square".into()));
        }
        Ok(Self {
            classes,
            counts: rows.into_iter().flatten().collect(),
        })
    }

    /// Renders the matrix as a viridis heatmap PNG, cells normalized per
    /// row so recall structure stays visible regardless of class counts.
    pub fn write_heatmap_png(&self, path: &Path, cell_px: usize) -> Result<()> {
        let size = self.classes * cell_px;
        let mut pixels = vec![0.0f32; size * size * 3];
        for t in 0..self.classes {
            let row_total = self.row_sum(t).max(1) as f64;
            for p in 0..self.classes {
                let value = self.get(t, p) as f64 / row_total;
                let rgb = crate::rd::viridis_lookup(value);
                for dy in 0..cell_px {
                    for dx in 0..cell_px {
                        let y = t * cell_px + dy;
                        let x = p * cell_px + dx;
                        let base = (y * size + x) * 3;
                        pixels[base] = rgb[0] as f32;
                        pixels[base + 1] = rgb[1] as f32;
                        pixels[base + 2] = rgb[2] as f32;
                    }
                }
            }
        }
        RdImage {
            height: size,
            width: size,
            pixels,
        }
        .write_png(path)
    }
}

/// Tallies predictions against labels into a K x K matrix.
pub fn confusion_matrix(predictions: &[u8], labels: &[u8], classes: usize) -> Result<ConfusionMatrix> {
    if predictions.len() != labels.len() {
        return Err(Error::Metrics(format!(
            "{} predictions vs {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut cm = ConfusionMatrix::zeros(classes);
    for (&pred, &label) in predictions.iter().zip(labels) {
        if pred as usize >= classes || label as usize >= classes {
            return Err(Error::Metrics(format!(
                "class out of range for K = {classes}: label {label}, prediction {pred}"
            )));
        }
        cm.counts[label as usize * classes + pred as usize] += 1;
    }
    Ok(cm)
}

/// Macro-averaged per-class recall. A class absent from the test set (zero
/// row) is an error rather than a silent skip.
pub fn balanced_accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let mut sum = 0.0;
    for k in 0..cm.classes {
        let row = cm.row_sum(k);
        if row == 0 {
            return Err(Error::Metrics(format!(
                "class {k} has no test samples; balanced accuracy undefined"
            )));
        }
        sum += cm.get(k, k) as f64 / row as f64;
    }
    Ok(sum / cm.classes as f64)
}

/// Trace over total count.
pub fn overall_accuracy(cm: &ConfusionMatrix) -> Result<f64> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Metrics("empty confusion matrix".into()));
    }
    Ok(cm.trace() as f64 / total as f64)
}
