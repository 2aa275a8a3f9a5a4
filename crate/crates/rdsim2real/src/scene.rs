//! Scenes as collections of time-parameterized point scatterers.
//!
//! A walker is modeled as a torso scatterer plus a few limb scatterers whose
//! radial velocity is sinusoidally modulated at the gait frequency. That is
//! the cheapest model that still produces a Doppler ridge with micro-Doppler
//! spread around it.

use std::f64::consts::TAU;

use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::DerivedParams;

/// Data-generation domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Clean simulation used for training data.
    Sim,
    /// Held-out generator with shifted noise/clutter statistics, standing in
    /// for real hardware captures.
    PseudoReal,
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Domain::Sim => write!(f, "sim"),
            Domain::PseudoReal => write!(f, "pseudo_real"),
        }
    }
}

/// Scene occupancy class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Occupancy {
    Empty,
    OnePerson,
    TwoPeople,
}

impl Occupancy {
    pub const ALL: [Occupancy; 3] = [Occupancy::Empty, Occupancy::OnePerson, Occupancy::TwoPeople];

    pub fn index(self) -> u8 {
        match self {
            Occupancy::Empty => 0,
            Occupancy::OnePerson => 1,
            Occupancy::TwoPeople => 2,
        }
    }

    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            0 => Ok(Occupancy::Empty),
            1 => Ok(Occupancy::OnePerson),
            2 => Ok(Occupancy::TwoPeople),
            other => Err(Error::Scene(format!("invalid occupancy label {other}"))),
        }
    }

    fn walker_count(self) -> usize {
        self.index() as usize
    }
}

/// A point scatterer with optional sinusoidal micro-Doppler modulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    /// Relative linear reflectivity (unitless).
    pub amplitude: f64,
    /// Range at t = 0, m.
    pub base_range_m: f64,
    /// Bulk radial velocity, m/s; negative = approaching.
    pub radial_velocity_m_s: f64,
    /// Micro-Doppler velocity modulation amplitude, m/s.
    pub md_amplitude_m_s: f64,
    /// Gait modulation frequency, Hz.
    pub md_freq_hz: f64,
    /// Gait phase offset, rad.
    pub md_phase_rad: f64,
}

impl Scatterer {
    pub fn static_point(amplitude: f64, range_m: f64) -> Self {
        Self {
            amplitude,
            base_range_m: range_m,
            radial_velocity_m_s: 0.0,
            md_amplitude_m_s: 0.0,
            md_freq_hz: 0.0,
            md_phase_rad: 0.0,
        }
    }

    pub fn is_static(&self) -> bool {
        self.radial_velocity_m_s == 0.0 && self.md_amplitude_m_s == 0.0
    }

    /// Instantaneous range, m. The micro-Doppler displacement is the time
    /// integral of the velocity modulation; it vanishes for md_freq_hz = 0.
    pub fn range_at(&self, t: f64) -> f64 {
        let linear = self.base_range_m + self.radial_velocity_m_s * t;
        if self.md_freq_hz > 0.0 && self.md_amplitude_m_s != 0.0 {
            let omega = TAU * self.md_freq_hz;
            linear - (self.md_amplitude_m_s / omega) * (omega * t + self.md_phase_rad).cos()
        } else {
            linear
        }
    }

    /// Instantaneous radial velocity, m/s.
    pub fn radial_velocity_at(&self, t: f64) -> f64 {
        if self.md_freq_hz > 0.0 && self.md_amplitude_m_s != 0.0 {
            let omega = TAU * self.md_freq_hz;
            self.radial_velocity_m_s + self.md_amplitude_m_s * (omega * t + self.md_phase_rad).sin()
        } else {
            self.radial_velocity_m_s
        }
    }

    /// Largest possible |radial velocity| over any time.
    pub fn peak_speed(&self) -> f64 {
        self.radial_velocity_m_s.abs() + self.md_amplitude_m_s.abs()
    }

    /// Largest micro-Doppler range excursion, m.
    fn range_excursion(&self) -> f64 {
        if self.md_freq_hz > 0.0 {
            self.md_amplitude_m_s.abs() / (TAU * self.md_freq_hz)
        } else {
            0.0
        }
    }
}

/// A collection of scatterers with a known occupancy label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub scatterers: Vec<Scatterer>,
    pub label: Occupancy,
    pub duration_s: f64,
}

impl Scene {
    /// Groups moving scatterers by their shared bulk velocity. Walker parts
    /// are constructed with bit-identical velocities, so exact comparison is
    /// the intended grouping key.
    pub fn walker_groups(&self) -> Vec<Vec<&Scatterer>> {
        let mut groups: Vec<(f64, Vec<&Scatterer>)> = Vec::new();
        for s in self.scatterers.iter().filter(|s| !s.is_static()) {
            match groups.iter_mut().find(|(v, _)| *v == s.radial_velocity_m_s) {
                Some((_, members)) => members.push(s),
                None => groups.push((s.radial_velocity_m_s, vec![s])),
            }
        }
        groups.into_iter().map(|(_, members)| members).collect()
    }

    /// Checks label/content consistency and kinematic bounds for the frame
    /// geometry in force.
    pub fn validate(&self, derived: &DerivedParams) -> Result<()> {
        let groups = self.walker_groups();
        if groups.len() != self.label.walker_count() {
            return Err(Error::Scene(format!(
                "label {:?} requires {} walker group(s), scene has {}",
                self.label,
                self.label.walker_count(),
                groups.len()
            )));
        }
        if self.label == Occupancy::Empty {
            if self.scatterers.iter().any(|s| !s.is_static()) {
                return Err(Error::Scene("empty scene contains moving scatterers".into()));
            }
        }
        let min_range = 0.5 * derived.range_bin_m;
        for (idx, s) in self.scatterers.iter().enumerate() {
            if !(s.amplitude > 0.0) {
                return Err(Error::Scene(format!("scatterer {idx}: non-positive amplitude")));
            }
            if s.peak_speed() >= derived.max_velocity_m_s {
                return Err(Error::Scene(format!(
                    "scatterer {idx}: peak speed {:.2} m/s exceeds unambiguous limit {:.2} m/s",
                    s.peak_speed(),
                    derived.max_velocity_m_s
                )));
            }
            let start = s.base_range_m;
            let end = s.base_range_m + s.radial_velocity_m_s * self.duration_s;
            let excursion = s.range_excursion();
            let lo = start.min(end) - excursion;
            let hi = start.max(end) + excursion;
            if lo <= min_range || hi >= derived.max_range_m {
                return Err(Error::Scene(format!(
                    "scatterer {idx}: range [{lo:.2}, {hi:.2}] m leaves ({min_range:.2}, {:.2}) m \
                     over {} s",
                    derived.max_range_m, self.duration_s
                )));
            }
        }
        Ok(())
    }
}

/// Randomization envelope for one walker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkerParams {
    /// Range at t = 0, m.
    pub start_range_m: f64,
    /// Walking speed drawn uniformly from this interval, m/s.
    pub speed_range_m_s: (f64, f64),
    /// Gait frequency drawn uniformly from this interval, Hz.
    pub gait_freq_range_hz: (f64, f64),
    /// Number of limb scatterers in addition to the torso.
    pub limb_count: usize,
    /// Torso amplitude divided by limb amplitude.
    pub torso_to_limb_amplitude_ratio: f64,
    /// Torso reflectivity drawn log-uniformly from this interval.
    pub torso_amplitude_range: (f64, f64),
    /// Walks toward the sensor (negative radial velocity) when true.
    pub approaching: bool,
}

/// Relative md amplitude per limb, as a multiple of walking speed.
const LIMB_MD_REL_RANGE: (f64, f64) = (0.4, 1.2);
/// Limb position offset around the torso, m.
const LIMB_RANGE_OFFSET_M: f64 = 0.3;

/// Builds one torso scatterer plus `limb_count` micro-Doppler-bearing limb
/// scatterers, all sharing the torso's bulk velocity.
pub fn make_walker(
    params: &WalkerParams,
    derived: &DerivedParams,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Scatterer>> {
    let (speed_lo, speed_hi) = params.speed_range_m_s;
    if !(speed_lo > 0.0 && speed_lo <= speed_hi) {
        return Err(Error::Scene(format!(
            "invalid speed range [{speed_lo}, {speed_hi}]"
        )));
    }
    // Worst-case instantaneous speed includes the limb modulation.
    let worst = speed_hi * (1.0 + LIMB_MD_REL_RANGE.1);
    if worst >= derived.max_velocity_m_s {
        return Err(Error::Scene(format!(
            "walker speed range up to {speed_hi} m/s can reach {worst:.2} m/s with limb motion, \
             exceeding the unambiguous limit {:.2} m/s",
            derived.max_velocity_m_s
        )));
    }
    let speed = rng.random_range(speed_lo..=speed_hi);
    let gait = rng.random_range(params.gait_freq_range_hz.0..=params.gait_freq_range_hz.1);
    let torso_amplitude = log_uniform(params.torso_amplitude_range, rng);
    let velocity = if params.approaching { -speed } else { speed };

    let mut scatterers = Vec::with_capacity(1 + params.limb_count);
    scatterers.push(Scatterer {
        amplitude: torso_amplitude,
        base_range_m: params.start_range_m,
        radial_velocity_m_s: velocity,
        md_amplitude_m_s: 0.0,
        md_freq_hz: 0.0,
        md_phase_rad: 0.0,
    });
    let limb_amplitude = torso_amplitude / params.torso_to_limb_amplitude_ratio;
    for limb in 0..params.limb_count {
        let md_amplitude = speed * rng.random_range(LIMB_MD_REL_RANGE.0..=LIMB_MD_REL_RANGE.1);
        let slot = TAU / params.limb_count as f64;
        let phase = slot * limb as f64 + rng.random_range(0.0..slot);
        let offset = rng.random_range(-LIMB_RANGE_OFFSET_M..=LIMB_RANGE_OFFSET_M);
        scatterers.push(Scatterer {
            amplitude: limb_amplitude,
            base_range_m: params.start_range_m + offset,
            radial_velocity_m_s: velocity,
            md_amplitude_m_s: md_amplitude,
            md_freq_hz: gait,
            md_phase_rad: phase,
        });
    }
    Ok(scatterers)
}

fn log_uniform(range: (f64, f64), rng: &mut ChaCha8Rng) -> f64 {
    if range.0 == range.1 {
        return range.0;
    }
    let (lo, hi) = (range.0.ln(), range.1.ln());
    rng.random_range(lo..=hi).exp()
}

/// Static clutter randomization for one domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClutterProfile {
    pub count_range: (usize, usize),
    pub amplitude_range: (f64, f64),
    pub range_span_m: (f64, f64),
}

impl Default for ClutterProfile {
    fn default() -> Self {
        Self {
            count_range: (3, 8),
            amplitude_range: (5.0e-9, 3.0e-8),
            range_span_m: (3.0, 18.0),
        }
    }
}

/// Scenario randomization envelope with per-domain clutter overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioEnvelope {
    pub walker_speed_range_m_s: (f64, f64),
    pub gait_freq_range_hz: (f64, f64),
    pub limb_count: usize,
    pub torso_to_limb_amplitude_ratio: f64,
    pub walker_amplitude_range: (f64, f64),
    pub walker_start_range_m: (f64, f64),
    /// Minimum start-range separation between two walkers, m.
    pub walker_separation_m: f64,
    pub sim_clutter: ClutterProfile,
    pub pseudo_real_clutter: ClutterProfile,
}

impl Default for ScenarioEnvelope {
    fn default() -> Self {
        Self {
            walker_speed_range_m_s: (0.8, 1.8),
            gait_freq_range_hz: (1.2, 2.2),
            limb_count: 4,
            torso_to_limb_amplitude_ratio: 3.0,
            walker_amplitude_range: (2.0e-6, 8.0e-6),
            walker_start_range_m: (2.5, 12.5),
            walker_separation_m: 1.0,
            sim_clutter: ClutterProfile::default(),
            pseudo_real_clutter: ClutterProfile {
                count_range: (8, 20),
                ..ClutterProfile::default()
            },
        }
    }
}

impl ScenarioEnvelope {
    pub fn clutter_for(&self, domain: Domain) -> &ClutterProfile {
        match domain {
            Domain::Sim => &self.sim_clutter,
            Domain::PseudoReal => &self.pseudo_real_clutter,
        }
    }
}

/// Draws a full scene for the requested class and domain.
///
/// Empty scenes contain only static clutter; occupied scenes add one or two
/// walkers whose start ranges are chosen so that the whole trajectory stays
/// inside the unambiguous region for `duration_s`.
pub fn sample_scenario(
    label: Occupancy,
    domain: Domain,
    envelope: &ScenarioEnvelope,
    derived: &DerivedParams,
    duration_s: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Scene> {
    let clutter = envelope.clutter_for(domain);
    let mut scatterers = Vec::new();
    let count = rng.random_range(clutter.count_range.0..=clutter.count_range.1);
    let span_hi = clutter.range_span_m.1.min(derived.max_range_m - 1.0);
    for _ in 0..count {
        let amplitude = log_uniform(clutter.amplitude_range, rng);
        let range = rng.random_range(clutter.range_span_m.0..=span_hi);
        scatterers.push(Scatterer::static_point(amplitude, range));
    }

    let mut starts: Vec<f64> = Vec::new();
    for _ in 0..label.walker_count() {
        let approaching = rng.random_bool(0.5);
        let (params, start) = place_walker(
            envelope,
            approaching,
            duration_s,
            &starts,
            derived,
            rng,
        )?;
        starts.push(start);
        scatterers.extend(make_walker(&params, derived, rng)?);
    }

    let scene = Scene {
        scatterers,
        label,
        duration_s,
    };
    scene.validate(derived)?;
    Ok(scene)
}

/// Picks a feasible start range (and possibly a narrowed speed range) for one
/// walker, keeping it at least `walker_separation_m` from earlier walkers.
fn place_walker(
    envelope: &ScenarioEnvelope,
    approaching: bool,
    duration_s: f64,
    existing_starts: &[f64],
    derived: &DerivedParams,
    rng: &mut ChaCha8Rng,
) -> Result<(WalkerParams, f64)> {
    let (zone_lo, zone_hi) = envelope.walker_start_range_m;
    let (speed_lo, mut speed_hi) = envelope.walker_speed_range_m_s;
    // Leave room for the trajectory plus the limb range excursion.
    let margin = 0.6;
    let mut travel = speed_hi * duration_s + margin;
    if zone_hi - zone_lo < travel {
        // Long sequences: narrow the speed range so a window exists.
        speed_hi = ((zone_hi - zone_lo - margin) / duration_s).max(speed_lo);
        travel = speed_hi * duration_s + margin;
        if zone_hi - zone_lo < travel {
            return Err(Error::Scene(format!(
                "no feasible walker start range for duration {duration_s} s in zone \
                 [{zone_lo}, {zone_hi}] m"
            )));
        }
    }
    let window = if approaching {
        (zone_lo + travel, zone_hi)
    } else {
        (zone_lo, zone_hi - travel)
    };
    let mut start = rng.random_range(window.0..=window.1);
    let mut tries = 0;
    while existing_starts
        .iter()
        .any(|s| (s - start).abs() < envelope.walker_separation_m)
    {
        start = rng.random_range(window.0..=window.1);
        tries += 1;
        if tries > 200 {
            return Err(Error::Scene(
                "could not separate walker start ranges".into(),
            ));
        }
    }
    let params = WalkerParams {
        start_range_m: start,
        speed_range_m_s: (speed_lo, speed_hi),
        gait_freq_range_hz: envelope.gait_freq_range_hz,
        limb_count: envelope.limb_count,
        torso_to_limb_amplitude_ratio: envelope.torso_to_limb_amplitude_ratio,
        torso_amplitude_range: envelope.walker_amplitude_range,
        approaching,
    };
    let _ = derived;
    Ok((params, start))
}
