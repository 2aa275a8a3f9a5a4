//! Batch command-line workflow: simulate, calibrate, augment, train, eval,
//! report. The binary in `src/main.rs` is a thin wrapper around [`run`];
//! all behavior lives here so the library and the examples share it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::classifier::{self, LabeledDataset, ModelMeta, Split, Task, TrainConfig};
use crate::datagen::{generate_dataset, DatasetSpec};
use crate::dataset::{
    load_dataset, save_generated, save_maps_with_manifest, Augmentation, DatasetManifest,
};
use crate::diagnostics::{
    default_edges, magnitude_histogram, static_energy_ratio, wasserstein1, Histogram,
    DEFAULT_STATIC_HALFWIDTH,
};
use crate::dr::{augment_cdr, augment_random_dr, calibrate_noise_floor, NoiseFloorStats, RandomDrRanges};
use crate::error::{Error, Result};
use crate::eval::{balanced_accuracy, confusion_matrix, overall_accuracy, ConfusionMatrix};
use crate::params::RadarConfig;
use crate::rd::{estimate_clip_range, ClipRange};
use crate::scene::{Domain, Occupancy, ScenarioEnvelope};

/// Default clip-range percentiles (lo, hi).
pub const CLIP_PERCENTILES: (f64, f64) = (1.0, 99.9);

/// Experiment configuration file: optional `radar` and `scenario` sections,
/// each with exact field names and unknown-key rejection.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub radar: Option<RadarConfig>,
    pub scenario: Option<ScenarioEnvelope>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<(RadarConfig, ScenarioEnvelope)> {
        let config = match path {
            Some(path) => {
                let parsed: ExperimentConfig =
                    serde_json::from_str(&std::fs::read_to_string(path)?)?;
                parsed
            }
            None => ExperimentConfig::default(),
        };
        let radar = config.radar.unwrap_or_default();
        radar.validate()?;
        Ok((radar, config.scenario.unwrap_or_default()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Sim,
    PseudoReal,
}

impl From<DomainArg> for Domain {
    fn from(value: DomainArg) -> Self {
        match value {
            DomainArg::Sim => Domain::Sim,
            DomainArg::PseudoReal => Domain::PseudoReal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    None,
    RandomDr,
    Cdr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TaskArg {
    Occupancy,
    Counting,
}

impl From<TaskArg> for Task {
    fn from(value: TaskArg) -> Self {
        match value {
            TaskArg::Occupancy => Task::Occupancy,
            TaskArg::Counting => Task::Counting,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rdsim2real",
    version,
    about = "Synthetic FMCW range-Doppler datasets, calibrated noise-floor randomization, \
             and sim-to-real occupancy classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render sequences and store their RD maps as a dataset.
    Simulate {
        #[arg(long, value_enum)]
        domain: DomainArg,
        /// Occupancy class: 0, 1, 2 or "all".
        #[arg(long = "class", default_value = "all")]
        class: String,
        /// Sequences per class.
        #[arg(long, default_value_t = 1)]
        sequences: usize,
        /// Frames per sequence.
        #[arg(long, default_value_t = 25)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Optional experiment config (radar + scenario sections).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also persist raw beat-signal cubes.
        #[arg(long, default_value_t = false)]
        keep_raw: bool,
    },
    /// Estimate noise-floor statistics from an empty-room dataset.
    Calibrate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a noise-floor randomization scheme to a stored dataset.
    Augment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Calibration statistics JSON (required for cdr).
        #[arg(long)]
        stats: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on a stored (usually augmented) sim dataset.
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        task: TaskArg,
        /// Dataset used to estimate the clip range (defaults to --in).
        #[arg(long)]
        clip_from: Option<PathBuf>,
        /// Training hyperparameter JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the estimated clip range (defaults to clip.json
        /// beside the model).
        #[arg(long)]
        clip_out: Option<PathBuf>,
    },
    /// Evaluate a model on an un-randomized test dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        clip: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Optional confusion-matrix CSV.
        #[arg(long)]
        confusion_out: Option<PathBuf>,
        /// Optional confusion-matrix heatmap PNG.
        #[arg(long)]
        heatmap_out: Option<PathBuf>,
    },
    /// Emit alignment diagnostics and confusion-matrix artifacts for a
    /// directory of datasets and eval outputs.
    Report {
        #[arg(long)]
        runs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn worker_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get().min(8))
        .unwrap_or(1)
}

fn parse_classes(arg: &str) -> Result<Vec<Occupancy>> {
    match arg {
        "all" => Ok(Occupancy::ALL.to_vec()),
        other => {
            let index: u8 = other
                .parse()
                .map_err(|_| Error::Usage(format!("invalid --class value '{other}'")))?;
            Ok(vec![Occupancy::from_index(index)?])
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            domain,
            class,
            sequences,
            frames,
            seed,
            out,
            config,
            keep_raw,
        } => {
            let (radar, envelope) = ExperimentConfig::load(config.as_deref())?;
            let spec = DatasetSpec {
                domain: domain.into(),
                classes: parse_classes(&class)?,
                sequences_per_class: sequences,
                frames_per_sequence: frames,
                seed,
                keep_cubes: keep_raw,
            };
            let generated = generate_dataset(&spec, &radar, &envelope, worker_threads())?;
            let manifest = save_generated(&out, &radar, spec.domain, seed, &generated)?;
            println!(
                "simulate: wrote {} frames ({} sequences) to {}",
                manifest.frames.len(),
                manifest.sequences.len(),
                out.display()
            );
            Ok(())
        }
        Command::Calibrate { input, out } => {
            // The calibration estimator never consults labels; the caller
            // points it at the unlabeled empty-room sequence.
            let (_, maps) = load_dataset(&input)?;
            let stats = calibrate_noise_floor(&maps)?;
            stats.to_json_file(&out)?;
            println!(
                "calibrate: mean {:.3} dB, std {:.3} dB over {} cells -> {}",
                stats.mean_db,
                stats.std_db,
                stats.n_cells,
                out.display()
            );
            Ok(())
        }
        Command::Augment {
            input,
            method,
            stats,
            seed,
            out,
        } => {
            let (manifest, maps) = load_dataset(&input)?;
            if manifest.augmentation != Augmentation::None {
                return Err(Error::Usage(format!(
                    "dataset {} is already augmented ({})",
                    input.display(),
                    manifest.augmentation.name()
                )));
            }
            let threads = worker_threads();
            let (augmented, tag) = match method {
                MethodArg::None => (maps, Augmentation::None),
                MethodArg::RandomDr => {
                    let ranges = RandomDrRanges::default();
                    (
                        augment_random_dr(&maps, &ranges, seed, threads)?,
                        Augmentation::RandomDr { ranges, seed },
                    )
                }
                MethodArg::Cdr => {
                    let stats_path = stats.ok_or_else(|| {
                        Error::Usage("--method cdr requires --stats <stats.json>".into())
                    })?;
                    let stats = NoiseFloorStats::from_json_file(&stats_path)?;
                    (
                        augment_cdr(&maps, &stats, seed, threads)?,
                        Augmentation::Cdr { stats, seed },
                    )
                }
            };
            save_maps_with_manifest(&out, &manifest, tag, &augmented)?;
            println!(
                "augment: {} frames -> {} ({})",
                augmented.len(),
                out.display(),
                method_name(method)
            );
            Ok(())
        }
        Command::Train {
            input,
            task,
            clip_from,
            config,
            out,
            clip_out,
        } => {
            let task: Task = task.into();
            let (manifest, maps) = load_dataset(&input)?;
            let clip = match &clip_from {
                Some(dir) if dir != &input => {
                    let (_, clip_maps) = load_dataset(dir)?;
                    estimate_clip_range(&clip_maps, CLIP_PERCENTILES.0, CLIP_PERCENTILES.1)?
                }
                _ => estimate_clip_range(&maps, CLIP_PERCENTILES.0, CLIP_PERCENTILES.1)?,
            };
            let mut train_config = match config {
                Some(path) => TrainConfig::from_json_file(&path)?,
                None => TrainConfig::default(),
            };
            train_config.task = task;
            let dataset = LabeledDataset::from_maps(&maps, &clip, Split::Train)?;
            let (params, history) = classifier::train(&dataset, &train_config)?;
            let meta = ModelMeta {
                task: Some(task.name().to_string()),
                method: Some(manifest.augmentation.name().to_string()),
            };
            classifier::save_model(&params, &meta, &out)?;
            let clip_path = clip_out.unwrap_or_else(|| out.with_file_name("clip.json"));
            clip.to_json_file(&clip_path)?;
            println!(
                "train: {} items, {} epochs, loss {:.4} -> {:.4}; model {}, clip {}",
                dataset.len(),
                history.len(),
                history.first().unwrap_or(&f64::NAN),
                history.last().unwrap_or(&f64::NAN),
                out.display(),
                clip_path.display()
            );
            Ok(())
        }
        Command::Eval {
            model,
            input,
            clip,
            out,
            confusion_out,
            heatmap_out,
        } => {
            let (params, meta) = classifier::load_model(&model)?;
            let clip = ClipRange::from_json_file(&clip)?;
            let (manifest, maps) = load_dataset(&input)?;
            if manifest.augmentation != Augmentation::None {
                return Err(Error::Dataset(format!(
                    "test data must be un-randomized, but {} has augmentation '{}'",
                    input.display(),
                    manifest.augmentation.name()
                )));
            }
            let task = match meta.task.as_deref() {
                Some("occupancy") => Task::Occupancy,
                Some("counting") => Task::Counting,
                other => {
                    return Err(Error::Dataset(format!(
                        "model does not declare a known task (found {other:?})"
                    )))
                }
            };
            let dataset = LabeledDataset::from_maps(&maps, &clip, Split::Test)?;
            let mut predictions = Vec::with_capacity(dataset.len());
            let mut labels = Vec::with_capacity(dataset.len());
            for (image, label) in &dataset.items {
                predictions.push(classifier::predict(&params, image)?);
                labels.push(task.remap(*label));
            }
            let cm = confusion_matrix(&predictions, &labels, task.classes())?;
            let accuracy = overall_accuracy(&cm)?;
            let balanced = balanced_accuracy(&cm)?;
            let method = meta.method.as_deref().unwrap_or("unknown");
            let csv = format!(
                "method,task,accuracy,balanced_accuracy\n{},{},{:.6},{:.6}\n",
                method,
                task.name(),
                accuracy,
                balanced
            );
            std::fs::write(&out, csv)?;
            if let Some(path) = confusion_out {
                std::fs::write(&path, cm.to_csv())?;
            }
            if let Some(path) = heatmap_out {
                cm.write_heatmap_png(&path, 48)?;
            }
            println!(
                "eval: {} items, method {method}, task {}, accuracy {accuracy:.4}, \
                 balanced {balanced:.4} -> {}",
                dataset.len(),
                task.name(),
                out.display()
            );
            Ok(())
        }
        Command::Report { runs, out } => report(&runs, &out),
    }
}

fn method_name(method: MethodArg) -> &'static str {
    match method {
        MethodArg::None => "none",
        MethodArg::RandomDr => "random-dr",
        MethodArg::Cdr => "cdr",
    }
}

struct DatasetDiagnostics {
    name: String,
    manifest: DatasetManifest,
    empty_histogram: Option<Histogram>,
    /// (sequence, frame, label, ratio) per frame.
    ratios: Vec<(u32, u32, u8, f64)>,
}

/// Scans a runs directory for datasets (subdirectories with a manifest) and
/// confusion CSVs, then writes histogram, Wasserstein, energy-ratio and
/// heatmap artifacts.
fn report(runs: &Path, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let mut dataset_dirs: Vec<PathBuf> = std::fs::read_dir(runs)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && DatasetManifest::manifest_path(p).exists())
        .collect();
    dataset_dirs.sort();
    if dataset_dirs.is_empty() {
        return Err(Error::Usage(format!(
            "no datasets (directories with manifest.json) under {}",
            runs.display()
        )));
    }

    let edges = default_edges();
    let mut diagnostics = Vec::new();
    for dir in &dataset_dirs {
        let (manifest, maps) = load_dataset(dir)?;
        let empty_maps: Vec<_> = maps
            .iter()
            .filter(|m| m.label == Some(0))
            .cloned()
            .collect();
        let empty_histogram = if empty_maps.is_empty() {
            None
        } else {
            Some(magnitude_histogram(&empty_maps, &edges)?)
        };
        let mut ratios = Vec::with_capacity(maps.len());
        for (entry, map) in manifest.frames.iter().zip(&maps) {
            ratios.push((
                entry.sequence,
                entry.frame,
                entry.label,
                static_energy_ratio(map, DEFAULT_STATIC_HALFWIDTH)?,
            ));
        }
        diagnostics.push(DatasetDiagnostics {
            name: dir.file_name().unwrap().to_string_lossy().into_owned(),
            manifest,
            empty_histogram,
            ratios,
        });
    }

    // histograms.csv: one row per dataset per bin
    let mut hist_csv = String::from("dataset,bin_lo_db,bin_hi_db,count\n");
    for diag in &diagnostics {
        if let Some(hist) = &diag.empty_histogram {
            for (i, &count) in hist.counts.iter().enumerate() {
                hist_csv.push_str(&format!(
                    "{},{:.1},{:.1},{}\n",
                    diag.name,
                    hist.bin_edges[i],
                    hist.bin_edges[i + 1],
                    count
                ));
            }
        }
    }
    std::fs::write(out.join("histograms.csv"), hist_csv)?;

    // energy_ratio.csv: per frame
    let mut ratio_csv = String::from("dataset,sequence,frame,label,static_energy_ratio\n");
    for diag in &diagnostics {
        for (sequence, frame, label, ratio) in &diag.ratios {
            ratio_csv.push_str(&format!(
                "{},{},{},{},{:.6}\n",
                diag.name, sequence, frame, label, ratio
            ));
        }
    }
    std::fs::write(out.join("energy_ratio.csv"), ratio_csv)?;

    // wasserstein.csv: every dataset against each pseudo-real reference
    let references: Vec<&DatasetDiagnostics> = diagnostics
        .iter()
        .filter(|d| {
            d.manifest.domain == Domain::PseudoReal
                && d.manifest.augmentation == Augmentation::None
                && d.empty_histogram.is_some()
        })
        .collect();
    let mut wasserstein_csv = String::from("dataset,reference,distance_db\n");
    for diag in &diagnostics {
        let Some(hist) = &diag.empty_histogram else {
            continue;
        };
        for reference in &references {
            if std::ptr::eq(*reference, diag) {
                continue;
            }
            let distance = wasserstein1(hist, reference.empty_histogram.as_ref().unwrap())?;
            wasserstein_csv.push_str(&format!(
                "{},{},{:.6}\n",
                diag.name, reference.name, distance
            ));
        }
    }
    std::fs::write(out.join("wasserstein.csv"), wasserstein_csv)?;

    // overlay plots
    let hist_series: Vec<(String, &Histogram)> = diagnostics
        .iter()
        .filter_map(|d| d.empty_histogram.as_ref().map(|h| (d.name.clone(), h)))
        .collect();
    if !hist_series.is_empty() {
        crate::plot::plot_histograms(&hist_series, &out.join("histograms.png"))?;
    }
    let scatter_groups: Vec<(String, Vec<f64>)> = diagnostics
        .iter()
        .map(|d| {
            (
                d.name.clone(),
                d.ratios.iter().map(|(_, _, _, r)| *r).collect(),
            )
        })
        .collect();
    crate::plot::plot_grouped_scatter(&scatter_groups, &out.join("energy_ratio.png"))?;

    // render any confusion CSVs found directly under the runs directory
    let mut confusion_files: Vec<PathBuf> = std::fs::read_dir(runs)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.file_name()
                    .map(|n| n.to_string_lossy().contains("confusion"))
                    .unwrap_or(false)
                && p.extension().map(|e| e == "csv").unwrap_or(false)
        })
        .collect();
    confusion_files.sort();
    for file in confusion_files {
        let cm = ConfusionMatrix::from_csv(&std::fs::read_to_string(&file)?)?;
        let stem = file.file_stem().unwrap().to_string_lossy().into_owned();
        cm.write_heatmap_png(&out.join(format!("{stem}.png")), 48)?;
    }

    // summary of per-class mean ratios, useful when eyeballing alignment
    let mut summary = String::from("dataset,label,mean_static_energy_ratio,frames\n");
    for diag in &diagnostics {
        let mut per_class: BTreeMap<u8, (f64, usize)> = BTreeMap::new();
        for (_, _, label, ratio) in &diag.ratios {
            let entry = per_class.entry(*label).or_insert((0.0, 0));
            entry.0 += ratio;
            entry.1 += 1;
        }
        for (label, (sum, count)) in per_class {
            summary.push_str(&format!(
                "{},{},{:.6},{}\n",
                diag.name,
                label,
                sum / count as f64,
                count
            ));
        }
    }
    std::fs::write(out.join("energy_ratio_summary.csv"), summary)?;

    println!(
        "report: {} datasets -> {}",
        diagnostics.len(),
        out.display()
    );
    Ok(())
}
