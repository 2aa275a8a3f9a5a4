//! Dataset generation: scenes to labeled RD-map collections.
//!
//! The sim domain stores raw RD maps; training-time randomization is a
//! separate, explicit augmentation step. The pseudo-real domain stands in
//! for hardware captures, so its per-sequence noise floor (a Gaussian
//! dB-domain clamp drawn from shifted ranges) is baked in at generation
//! time. Downstream, pseudo-real maps are only ever clipped, normalized
//! and colormapped.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dr::{clamp_noise, NoiseMap};
use crate::error::Result;
use crate::params::RadarConfig;
use crate::rd::{range_doppler, RdMap};
use crate::scene::{Domain, Occupancy, ScenarioEnvelope};
use crate::sim::{render_sequence, DataCube, SequenceProfile};
use crate::util::{derive_seed, par_map_indexed};

/// One generated sequence: labeled maps plus provenance.
#[derive(Debug, Clone)]
pub struct GeneratedSequence {
    pub maps: Vec<RdMap>,
    pub label: Occupancy,
    pub profile: SequenceProfile,
    pub seed: u64,
    /// Present only when cube retention was requested.
    pub cubes: Option<Vec<DataCube>>,
}

/// Renders one sequence and converts it to RD maps. For the pseudo-real
/// domain the per-sequence RD floor clamp is applied here, from an RNG
/// substream (stream 1) independent of the render stream.
pub fn generate_sequence(
    label: Occupancy,
    domain: Domain,
    n_frames: usize,
    config: &RadarConfig,
    envelope: &ScenarioEnvelope,
    seed: u64,
    keep_cubes: bool,
) -> Result<GeneratedSequence> {
    let rendered = render_sequence(label, n_frames, domain, config, envelope, seed)?;
    let mut floor_rng = ChaCha8Rng::seed_from_u64(seed);
    floor_rng.set_stream(1);
    let mut maps = Vec::with_capacity(rendered.cubes.len());
    for cube in &rendered.cubes {
        let mut map = range_doppler(cube)?;
        if let Some(floor) = rendered.profile.rd_floor {
            let noise = NoiseMap::gaussian(
                map.rows,
                map.cols,
                floor.mean_db,
                floor.std_db,
                &mut floor_rng,
            );
            map = clamp_noise(&map, &noise)?;
        }
        maps.push(map.with_label(label.index()));
    }
    Ok(GeneratedSequence {
        maps,
        label,
        profile: rendered.profile,
        seed,
        cubes: keep_cubes.then_some(rendered.cubes),
    })
}

/// Specification of a multi-sequence dataset.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub domain: Domain,
    pub classes: Vec<Occupancy>,
    pub sequences_per_class: usize,
    pub frames_per_sequence: usize,
    pub seed: u64,
    pub keep_cubes: bool,
}

/// Generates `sequences_per_class` sequences for every requested class.
/// Sequence `i` (in class-major order) always uses the substream seed
/// `derive_seed(spec.seed, i)`, so parallel and serial runs produce
/// identical datasets.
pub fn generate_dataset(
    spec: &DatasetSpec,
    config: &RadarConfig,
    envelope: &ScenarioEnvelope,
    threads: usize,
) -> Result<Vec<GeneratedSequence>> {
    let jobs: Vec<(Occupancy, u64)> = spec
        .classes
        .iter()
        .flat_map(|&label| (0..spec.sequences_per_class).map(move |_| label))
        .enumerate()
        .map(|(index, label)| (label, derive_seed(spec.seed, index as u64)))
        .collect();
    let results = par_map_indexed(jobs.len(), threads, |i| {
        let (label, seed) = jobs[i];
        generate_sequence(
            label,
            spec.domain,
            spec.frames_per_sequence,
            config,
            envelope,
            seed,
            spec.keep_cubes,
        )
    });
    results.into_iter().collect()
}

/// Flattens generated sequences into one labeled map list (class-major,
/// frame order preserved).
pub fn flatten_maps(sequences: &[GeneratedSequence]) -> Vec<RdMap> {
    sequences.iter().flat_map(|s| s.maps.iter().cloned()).collect()
}
