//! Dechirped beat-signal synthesis for point-scatterer scenes.
//!
//! The beat signal for scatterer k at fast-time sample n of chirp c is
//!
//! ```text
//! a_k * cos(2*pi * f_b,k * n / f_s  +  (4*pi * f_c / c) * r_k(t_c)  +  phi_k)
//! ```
//!
//! with `f_b,k = 2 * r_k(t0) * S / c` frozen at the frame start
//! (stop-and-hop) and the slow-time phase driven by the full kinematic
//! range `r_k` at chirp time `t_c = t0 + c * T_c`. For a constant-velocity
//! scatterer the slow-time term reduces exactly to `2*pi * f_d * t_c` plus
//! a constant absorbed in `phi_k`; with limb modulation it produces the
//! bounded sinusoidal phase excursion that gives walking targets their
//! Doppler spread.

use std::f64::consts::{PI, TAU};

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{RadarConfig, SPEED_OF_LIGHT_M_S};
use crate::rd::hann;
use crate::scene::{sample_scenario, Domain, Occupancy, Scene, ScenarioEnvelope};

/// Thermal floor at or below this level disables additive noise entirely.
pub const SILENT_FLOOR_DB: f64 = -300.0;

/// Default expected RD noise floor of the clean simulation domain, dB.
pub const SIM_THERMAL_FLOOR_DB: f64 = -160.0;

/// Per-sequence draw range for the pseudo-real RD floor mean, dB.
pub const PSEUDO_REAL_FLOOR_MEAN_RANGE_DB: (f64, f64) = (-115.0, -105.0);
/// Per-sequence draw range for the pseudo-real RD floor spread, dB.
pub const PSEUDO_REAL_FLOOR_STD_RANGE_DB: (f64, f64) = (1.5, 3.0);
/// Per-sequence draw range for the pseudo-real receiver gain offset, dB.
pub const PSEUDO_REAL_GAIN_RANGE_DB: (f64, f64) = (-2.0, 2.0);
/// Clutter reflectivity multiplier of the pseudo-real domain.
pub const PSEUDO_REAL_CLUTTER_MULTIPLIER: f64 = 2.5;
/// Pseudo-real thermal noise sits this far below the RD floor clamp, dB.
pub const PSEUDO_REAL_THERMAL_OFFSET_DB: f64 = -15.0;

/// 10 * EulerGamma / ln(10): offset between the mean dB value of an
/// exponentially distributed power and the dB of its mean power.
const LOG_MEAN_OFFSET_DB: f64 = 2.506_802_775_644_024;

/// One frame of real-valued beat samples, fast time x slow time.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    /// Fast-time samples per chirp (rows).
    pub n_fast: usize,
    /// Chirps per frame (columns).
    pub n_slow: usize,
    /// Row-major samples, `samples[n * n_slow + c]`.
    pub samples: Vec<f64>,
    /// Frame start time within its sequence, s.
    pub frame_time_s: f64,
    pub domain: Domain,
}

impl DataCube {
    pub fn get(&self, fast: usize, slow: usize) -> f64 {
        self.samples[fast * self.n_slow + slow]
    }

    /// Sum of squared samples.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.samples.iter().all(|s| s.is_finite())
    }
}

/// Additive-noise and gain description of one domain.
///
/// `thermal_floor_db` is the expected RD-cell level produced by the white
/// noise after standard processing; the time-domain noise scale is derived
/// from it. `gain_offset_db` scales scatterer returns only (the floor stays
/// at its configured level), and `clutter_multiplier` scales the
/// reflectivity of static scatterers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainNoiseProfile {
    pub thermal_floor_db: f64,
    pub gain_offset_db: f64,
    pub clutter_multiplier: f64,
}

impl DomainNoiseProfile {
    pub fn sim_default() -> Self {
        Self {
            thermal_floor_db: SIM_THERMAL_FLOOR_DB,
            gain_offset_db: 0.0,
            clutter_multiplier: 1.0,
        }
    }

    /// Profile with additive noise disabled, for oracle tests.
    pub fn silent() -> Self {
        Self {
            thermal_floor_db: SILENT_FLOOR_DB,
            gain_offset_db: 0.0,
            clutter_multiplier: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.thermal_floor_db.is_finite() && self.thermal_floor_db != f64::NEG_INFINITY {
            return Err(Error::Config("thermal_floor_db must be finite".into()));
        }
        if !self.gain_offset_db.is_finite() || !(self.clutter_multiplier > 0.0) {
            return Err(Error::Config(
                "gain_offset_db must be finite and clutter_multiplier positive".into(),
            ));
        }
        Ok(())
    }
}

/// Gaussian RD-floor clamp applied when generating pseudo-real maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RdFloorParams {
    pub mean_db: f64,
    pub std_db: f64,
}

/// Everything drawn once per rendered sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SequenceProfile {
    pub noise: DomainNoiseProfile,
    /// Present for the pseudo-real domain only; its `mean_db` is the
    /// generator's configured effective floor for the sequence.
    pub rd_floor: Option<RdFloorParams>,
}

impl SequenceProfile {
    /// Draws the per-sequence profile. The sim domain uses fixed constants
    /// and consumes no randomness; the pseudo-real domain draws floor mean,
    /// floor spread and gain offset, in that order.
    pub fn sample(domain: Domain, rng: &mut ChaCha8Rng) -> Self {
        match domain {
            Domain::Sim => Self {
                noise: DomainNoiseProfile::sim_default(),
                rd_floor: None,
            },
            Domain::PseudoReal => {
                let mean = rng.random_range(
                    PSEUDO_REAL_FLOOR_MEAN_RANGE_DB.0..=PSEUDO_REAL_FLOOR_MEAN_RANGE_DB.1,
                );
                let std = rng.random_range(
                    PSEUDO_REAL_FLOOR_STD_RANGE_DB.0..=PSEUDO_REAL_FLOOR_STD_RANGE_DB.1,
                );
                let gain = rng
                    .random_range(PSEUDO_REAL_GAIN_RANGE_DB.0..=PSEUDO_REAL_GAIN_RANGE_DB.1);
                Self {
                    noise: DomainNoiseProfile {
                        thermal_floor_db: mean + PSEUDO_REAL_THERMAL_OFFSET_DB,
                        gain_offset_db: gain,
                        clutter_multiplier: PSEUDO_REAL_CLUTTER_MULTIPLIER,
                    },
                    rd_floor: Some(RdFloorParams {
                        mean_db: mean,
                        std_db: std,
                    }),
                }
            }
        }
    }

    /// The generator's configured effective RD floor, dB.
    pub fn effective_floor_db(&self) -> f64 {
        match self.rd_floor {
            Some(floor) => floor.mean_db,
            None => self.noise.thermal_floor_db,
        }
    }
}

/// Time-domain noise standard deviation that lands the RD floor at
/// `floor_db` after Hann-windowed processing of an `n_fast x n_slow` frame.
pub fn noise_sigma_for_floor(floor_db: f64, n_fast: usize, n_slow: usize) -> f64 {
    if floor_db <= SILENT_FLOOR_DB {
        return 0.0;
    }
    let window_energy = |n: usize| hann(n).iter().map(|h| h * h).sum::<f64>();
    let gain = window_energy(n_fast) * window_energy(n_slow);
    (10f64.powf((floor_db + LOG_MEAN_OFFSET_DB) / 10.0) / gain).sqrt()
}

/// Renders one frame, drawing per-scatterer initial phases from `rng`.
pub fn simulate_frame(
    scene: &Scene,
    config: &RadarConfig,
    t0: f64,
    profile: &DomainNoiseProfile,
    rng: &mut ChaCha8Rng,
) -> Result<DataCube> {
    let phases: Vec<f64> = scene
        .scatterers
        .iter()
        .map(|_| rng.random_range(0.0..TAU))
        .collect();
    simulate_frame_with_phases(scene, config, t0, profile, &phases, rng)
}

/// Renders one frame with caller-provided initial phases. Sequences reuse
/// one phase vector across frames so that Doppler phase stays coherent at
/// frame boundaries.
pub fn simulate_frame_with_phases(
    scene: &Scene,
    config: &RadarConfig,
    t0: f64,
    profile: &DomainNoiseProfile,
    phases: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<DataCube> {
    let derived = config.derived()?;
    profile.validate()?;
    if phases.len() != scene.scatterers.len() {
        return Err(Error::Simulation(format!(
            "{} phases supplied for {} scatterers",
            phases.len(),
            scene.scatterers.len()
        )));
    }
    let n_fast = config.samples_per_chirp;
    let n_slow = config.chirps_per_frame;
    let mut samples = vec![0.0f64; n_fast * n_slow];
    let gain = 10f64.powf(profile.gain_offset_db / 20.0);
    let doppler_phase_scale = 4.0 * PI * config.carrier_hz / SPEED_OF_LIGHT_M_S;

    for (idx, scatterer) in scene.scatterers.iter().enumerate() {
        let r0 = scatterer.range_at(t0);
        if r0 <= 0.0 || r0 >= derived.max_range_m {
            return Err(Error::Simulation(format!(
                "scatterer {idx} at t0 = {t0:.3} s: range {r0:.2} m outside (0, {:.2}) m",
                derived.max_range_m
            )));
        }
        if scatterer.peak_speed() >= derived.max_velocity_m_s {
            return Err(Error::Simulation(format!(
                "scatterer {idx}: peak speed {:.2} m/s exceeds unambiguous limit {:.2} m/s",
                scatterer.peak_speed(),
                derived.max_velocity_m_s
            )));
        }
        let mut amplitude = scatterer.amplitude / (r0 * r0);
        if scatterer.is_static() {
            amplitude *= profile.clutter_multiplier;
        }
        amplitude *= gain;

        let beat_hz = derived.beat_frequency_hz(r0);
        let fast_step = TAU * beat_hz / config.sample_rate_hz;
        let (step_cos, step_sin) = (fast_step.cos(), fast_step.sin());

        for chirp in 0..n_slow {
            let t_c = t0 + chirp as f64 * config.chirp_duration_s;
            let phase0 = doppler_phase_scale * scatterer.range_at(t_c) + phases[idx];
            // cos(phase0 + n * fast_step) by complex rotation.
            let (mut re, mut im) = (phase0.cos(), phase0.sin());
            for fast in 0..n_fast {
                samples[fast * n_slow + chirp] += amplitude * re;
                let next_re = re * step_cos - im * step_sin;
                im = re * step_sin + im * step_cos;
                re = next_re;
            }
        }
    }

    let sigma = noise_sigma_for_floor(profile.thermal_floor_db, n_fast, n_slow);
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("valid sigma");
        for sample in samples.iter_mut() {
            *sample += normal.sample(rng);
        }
    }

    Ok(DataCube {
        n_fast,
        n_slow,
        samples,
        frame_time_s: t0,
        domain: scene_domain_guess(profile),
    })
}

// The cube's domain tag mirrors the profile that produced it; only the
// pseudo-real generator uses a clutter multiplier above one.
fn scene_domain_guess(profile: &DomainNoiseProfile) -> Domain {
    if profile.clutter_multiplier > 1.0 {
        Domain::PseudoReal
    } else {
        Domain::Sim
    }
}

/// One sampled scene rendered as a frame sequence.
#[derive(Debug, Clone)]
pub struct RenderedSequence {
    pub cubes: Vec<DataCube>,
    pub label: Occupancy,
    pub scene: Scene,
    pub profile: SequenceProfile,
}

/// Samples a scene for `label` and renders `n_frames` cubes at the frame
/// period, with kinematics continuous across frames. Deterministic for a
/// fixed seed.
pub fn render_sequence(
    label: Occupancy,
    n_frames: usize,
    domain: Domain,
    config: &RadarConfig,
    envelope: &ScenarioEnvelope,
    seed: u64,
) -> Result<RenderedSequence> {
    if n_frames == 0 {
        return Err(Error::Simulation("n_frames must be >= 1".into()));
    }
    let derived = config.derived()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profile = SequenceProfile::sample(domain, &mut rng);
    let duration = n_frames as f64 * config.frame_period_s;
    let scene = sample_scenario(label, domain, envelope, &derived, duration, &mut rng)?;
    let phases: Vec<f64> = scene
        .scatterers
        .iter()
        .map(|_| rng.random_range(0.0..TAU))
        .collect();
    let mut cubes = Vec::with_capacity(n_frames);
    for frame in 0..n_frames {
        let t0 = frame as f64 * config.frame_period_s;
        let mut cube =
            simulate_frame_with_phases(&scene, config, t0, &profile.noise, &phases, &mut rng)?;
        cube.domain = domain;
        cubes.push(cube);
    }
    Ok(RenderedSequence {
        cubes,
        label,
        scene,
        profile,
    })
}
