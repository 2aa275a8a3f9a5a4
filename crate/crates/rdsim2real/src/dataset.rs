//! Dataset persistence: one directory per dataset, one JSON manifest, one
//! little-endian f32 blob per frame (row-major, range-major).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::datagen::GeneratedSequence;
use crate::dr::{NoiseFloorStats, RandomDrRanges};
use crate::error::{Error, Result};
use crate::params::RadarConfig;
use crate::rd::RdMap;
use crate::scene::Domain;
use crate::sim::SequenceProfile;

pub const MANIFEST_VERSION: u32 = 1;

/// Randomization applied to the stored maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Augmentation {
    None,
    RandomDr { ranges: RandomDrRanges, seed: u64 },
    Cdr { stats: NoiseFloorStats, seed: u64 },
}

impl Augmentation {
    pub fn name(&self) -> &'static str {
        match self {
            Augmentation::None => "none",
            Augmentation::RandomDr { .. } => "random_dr",
            Augmentation::Cdr { .. } => "cdr",
        }
    }
}

/// One stored frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    /// Path relative to the dataset directory.
    pub path: String,
    pub label: u8,
    pub sequence: u32,
    pub frame: u32,
}

/// Per-sequence provenance, including the drawn noise profile (and with it
/// the pseudo-real generator's configured effective floor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub id: u32,
    pub label: u8,
    pub seed: u64,
    pub profile: SequenceProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub radar_config: RadarConfig,
    pub domain: Domain,
    /// RD map shape: range rows x Doppler columns.
    pub rows: usize,
    pub cols: usize,
    /// Frame count per class label.
    pub classes: BTreeMap<u8, usize>,
    pub frames: Vec<FrameEntry>,
    pub augmentation: Augmentation,
    pub seed: u64,
    pub sequences: Vec<SequenceRecord>,
    /// Raw beat-signal cubes, present only when generated with cube
    /// retention; blobs are n_fast x n_slow f32, row-major.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub raw_frames: Vec<FrameEntry>,
}

impl DatasetManifest {
    pub fn manifest_path(dir: &Path) -> PathBuf {
        dir.join("manifest.json")
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = Self::manifest_path(dir);
        if !path.exists() {
            return Err(Error::Dataset(format!(
                "no manifest.json in {}",
                dir.display()
            )));
        }
        let manifest: DatasetManifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if manifest.version != MANIFEST_VERSION {
            return Err(Error::ManifestVersion {
                expected: MANIFEST_VERSION,
                found: manifest.version,
            });
        }
        Ok(manifest)
    }

    fn save(&self, dir: &Path) -> Result<()> {
        std::fs::write(
            Self::manifest_path(dir),
            serde_json::to_string_pretty(self)?,
        )?;
        Ok(())
    }
}

fn write_blob(path: &Path, cells: &[f32]) -> Result<()> {
    let mut bytes = Vec::with_capacity(cells.len() * 4);
    for &cell in cells {
        bytes.extend_from_slice(&cell.to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn read_blob(path: &Path, expected: usize) -> Result<Vec<f32>> {
    if !path.exists() {
        return Err(Error::MissingFrameFile {
            path: path.to_path_buf(),
        });
    }
    let bytes = std::fs::read(path)?;
    if bytes.len() != expected * 4 {
        return Err(Error::ShapeMismatch {
            path: path.to_path_buf(),
            expected,
            found: bytes.len() / 4,
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

/// Writes generated sequences as a dataset directory.
pub fn save_generated(
    dir: &Path,
    config: &RadarConfig,
    domain: Domain,
    seed: u64,
    sequences: &[GeneratedSequence],
) -> Result<DatasetManifest> {
    let frame_dir = dir.join("frames");
    std::fs::create_dir_all(&frame_dir)?;
    let (rows, cols) = match sequences.first().and_then(|s| s.maps.first()) {
        Some(map) => (map.rows, map.cols),
        None => return Err(Error::Dataset("no sequences to save".into())),
    };
    let mut frames = Vec::new();
    let mut raw_frames = Vec::new();
    let mut classes: BTreeMap<u8, usize> = BTreeMap::new();
    let mut records = Vec::new();
    for (seq_idx, sequence) in sequences.iter().enumerate() {
        let label = sequence.label.index();
        records.push(SequenceRecord {
            id: seq_idx as u32,
            label,
            seed: sequence.seed,
            profile: sequence.profile,
        });
        for (frame_idx, map) in sequence.maps.iter().enumerate() {
            let name = format!("frames/seq{seq_idx:04}_f{frame_idx:03}.f32");
            write_blob(&dir.join(&name), &map.cells)?;
            frames.push(FrameEntry {
                path: name,
                label,
                sequence: seq_idx as u32,
                frame: frame_idx as u32,
            });
            *classes.entry(label).or_insert(0) += 1;
        }
        if let Some(cubes) = &sequence.cubes {
            let raw_dir = dir.join("raw");
            std::fs::create_dir_all(&raw_dir)?;
            for (frame_idx, cube) in cubes.iter().enumerate() {
                let name = format!("raw/seq{seq_idx:04}_f{frame_idx:03}.f32");
                let cells: Vec<f32> = cube.samples.iter().map(|&s| s as f32).collect();
                write_blob(&dir.join(&name), &cells)?;
                raw_frames.push(FrameEntry {
                    path: name,
                    label,
                    sequence: seq_idx as u32,
                    frame: frame_idx as u32,
                });
            }
        }
    }
    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        radar_config: config.clone(),
        domain,
        rows,
        cols,
        classes,
        frames,
        augmentation: Augmentation::None,
        seed,
        sequences: records,
        raw_frames,
    };
    manifest.save(dir)?;
    Ok(manifest)
}

/// Writes an augmented (or otherwise transformed) copy of a dataset,
/// reusing the source manifest's provenance.
pub fn save_maps_with_manifest(
    dir: &Path,
    source: &DatasetManifest,
    augmentation: Augmentation,
    maps: &[RdMap],
) -> Result<DatasetManifest> {
    if maps.len() != source.frames.len() {
        return Err(Error::Dataset(format!(
            "{} maps for {} manifest frames",
            maps.len(),
            source.frames.len()
        )));
    }
    std::fs::create_dir_all(dir.join("frames"))?;
    for (entry, map) in source.frames.iter().zip(maps) {
        write_blob(&dir.join(&entry.path), &map.cells)?;
    }
    let manifest = DatasetManifest {
        augmentation,
        raw_frames: Vec::new(),
        ..source.clone()
    };
    manifest.save(dir)?;
    Ok(manifest)
}

/// Loads every frame of a dataset, in manifest order, with labels and the
/// dataset domain attached.
pub fn load_dataset(dir: &Path) -> Result<(DatasetManifest, Vec<RdMap>)> {
    let manifest = DatasetManifest::load(dir)?;
    let mut maps = Vec::with_capacity(manifest.frames.len());
    for entry in &manifest.frames {
        let cells = read_blob(&dir.join(&entry.path), manifest.rows * manifest.cols)?;
        let map = RdMap::new(manifest.rows, manifest.cols, cells, manifest.domain)?
            .with_label(entry.label);
        maps.push(map);
    }
    Ok((manifest, maps))
}
