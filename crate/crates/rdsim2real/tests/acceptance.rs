//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line. Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion summary.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rdsim2real::classifier::{
    self, batch_loss, kink_margin, ClassifierParams, LabeledDataset, Split, Task, TrainConfig,
};
use rdsim2real::datagen::{flatten_maps, generate_dataset, generate_sequence, DatasetSpec};
use rdsim2real::diagnostics::{
    default_edges, magnitude_histogram, static_energy_ratio, wasserstein1,
    DEFAULT_STATIC_HALFWIDTH,
};
use rdsim2real::dr::{
    apply_cdr, augment_cdr, augment_random_dr, calibrate_noise_floor, clamp_noise, NoiseFloorStats,
    NoiseMap, RandomDrRanges,
};
use rdsim2real::eval::{balanced_accuracy, confusion_matrix, ConfusionMatrix};
use rdsim2real::params::RadarConfig;
use rdsim2real::rd::{estimate_clip_range, range_doppler, RdImage, RdMap};
use rdsim2real::scene::{Domain, Occupancy, Scatterer, Scene, ScenarioEnvelope};
use rdsim2real::sim::{simulate_frame_with_phases, DomainNoiseProfile};
use rdsim2real::util::par_map_indexed;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "[{}] acceptance {criterion}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {criterion} failed: {detail}");
}

// ---------------------------------------------------------------------------
// criterion 1: derived-parameter fidelity
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_derived_parameter_fidelity() {
    let derived = RadarConfig::default().derived().unwrap();
    let slope_err = (derived.chirp_slope_hz_per_s - 3.44e12).abs() / 3.44e12;
    let res_err = (derived.range_resolution_m - 0.17).abs() / 0.17;
    let range_err = (derived.max_range_m - 21.7).abs() / 21.7;
    let pass = slope_err < 0.01 && res_err < 0.01 && range_err < 0.01;
    report(
        "1 derived-parameter fidelity",
        pass,
        &format!(
            "slope {:.4e} ({:.2}%), resolution {:.4} m ({:.2}%), max range {:.3} m ({:.2}%)",
            derived.chirp_slope_hz_per_s,
            slope_err * 100.0,
            derived.range_resolution_m,
            res_err * 100.0,
            derived.max_range_m,
            range_err * 100.0
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 2: point-target oracle
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_point_target_oracle() {
    let config = RadarConfig::default();
    let derived = config.derived().unwrap();
    let range_bin_hz = config.sample_rate_hz / config.samples_per_chirp as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut hits = 0;
    for case in 0..50 {
        // keep predicted bins away from the grid edges and Doppler wrap
        let range = rng.random_range(1.0..20.5);
        let velocity = rng.random_range(-4.2..4.2);
        let scene = Scene {
            scatterers: vec![Scatterer {
                amplitude: 1e-5,
                base_range_m: range,
                radial_velocity_m_s: velocity,
                md_amplitude_m_s: 0.0,
                md_freq_hz: 0.0,
                md_phase_rad: 0.0,
            }],
            label: Occupancy::Empty,
            duration_s: 0.2,
        };
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let cube = simulate_frame_with_phases(
            &scene,
            &config,
            0.0,
            &DomainNoiseProfile::silent(),
            &[phase],
            &mut rng,
        )
        .unwrap();
        let map = range_doppler(&cube).unwrap();
        let predicted_range = derived.beat_frequency_hz(range) / range_bin_hz;
        let predicted_doppler =
            32.0 + derived.doppler_frequency_hz(velocity) / derived.doppler_bin_hz;
        let (row, col) = map.argmax();
        let range_ok = (row as f64 - predicted_range).abs() <= 1.0;
        let doppler_ok = (col as f64 - predicted_doppler).abs() <= 1.0;
        if range_ok && doppler_ok {
            hits += 1;
        } else {
            println!(
                "case {case}: argmax ({row}, {col}) vs predicted ({predicted_range:.2}, \
                 {predicted_doppler:.2})"
            );
        }
    }
    report(
        "2 point-target oracle",
        hits == 50,
        &format!("{hits}/50 argmax within +-1 bin of the analytic prediction"),
    );
}

// ---------------------------------------------------------------------------
// criterion 3: clamp property suite
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_clamp_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);

    // monotonicity and elementwise lower bound over random map pairs
    let mut monotone = true;
    let mut lower_bound = true;
    for _ in 0..1000 {
        let cells_lo: Vec<f32> = (0..256).map(|_| rng.random_range(-170.0..-60.0)).collect();
        let cells_hi: Vec<f32> = cells_lo
            .iter()
            .map(|&c| c + rng.random_range(0.0f32..25.0))
            .collect();
        let noise_values: Vec<f32> = (0..256).map(|_| rng.random_range(-140.0..-90.0)).collect();
        let lo = RdMap::new(16, 16, cells_lo, Domain::Sim).unwrap();
        let hi = RdMap::new(16, 16, cells_hi, Domain::Sim).unwrap();
        let noise = NoiseMap::new(16, 16, noise_values).unwrap();
        let out_lo = clamp_noise(&lo, &noise).unwrap();
        let out_hi = clamp_noise(&hi, &noise).unwrap();
        for i in 0..256 {
            monotone &= out_lo.cells[i] <= out_hi.cells[i];
            lower_bound &= out_lo.cells[i] >= lo.cells[i] && out_lo.cells[i] >= noise.values[i];
        }
    }

    // signal preservation: strong cells altered with frequency < 1e-6
    let stats = NoiseFloorStats {
        mean_db: -110.0,
        std_db: 2.5,
        n_cells: 819_200,
    };
    let threshold = stats.mean_db + 8.0 * stats.std_db;
    let mut altered = 0u64;
    let mut strong_cells = 0u64;
    while strong_cells < 1_000_000 {
        let cells: Vec<f32> = (0..8192)
            .map(|_| rng.random_range(threshold as f32..(threshold as f32 + 30.0)))
            .collect();
        let map = RdMap::new(128, 64, cells, Domain::Sim).unwrap();
        let out = apply_cdr(&map, &stats, &mut rng).unwrap();
        for (a, b) in map.cells.iter().zip(&out.cells) {
            strong_cells += 1;
            if a != b {
                altered += 1;
            }
        }
    }
    let alteration_rate = altered as f64 / strong_cells as f64;

    // CDR statistical alignment on clutter-free empty sim maps
    let config = RadarConfig::default();
    let mut envelope = ScenarioEnvelope::default();
    envelope.sim_clutter.count_range = (0, 0);
    let sequence = generate_sequence(
        Occupancy::Empty,
        Domain::Sim,
        16,
        &config,
        &envelope,
        99,
        false,
    )
    .unwrap();
    let stats_align = NoiseFloorStats {
        mean_db: -110.0,
        std_db: 2.2,
        n_cells: 819_200,
    };
    let mut cdr_rng = ChaCha8Rng::seed_from_u64(7);
    let mut pooled = Vec::new();
    for map in &sequence.maps {
        let out = apply_cdr(map, &stats_align, &mut cdr_rng).unwrap();
        pooled.extend(out.cells.iter().map(|&c| c as f64));
    }
    let n = pooled.len() as f64;
    let mean = pooled.iter().sum::<f64>() / n;
    let std = (pooled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mean_ok = (mean - stats_align.mean_db).abs() < 0.2;
    let std_ok = (std - stats_align.std_db).abs() / stats_align.std_db < 0.02;

    let pass =
        monotone && lower_bound && alteration_rate < 1e-6 && mean_ok && std_ok && n >= 1e5;
    report(
        "3 clamp property suite",
        pass,
        &format!(
            "monotone {monotone}, lower bound {lower_bound}, strong-cell alteration rate \
             {alteration_rate:.2e} over {strong_cells} cells, CDR mean {mean:.3} dB \
             (target {:.1}), std {std:.3} dB (target {:.1}) over {n} cells",
            stats_align.mean_db, stats_align.std_db
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 4: calibration estimator
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_calibration_estimator() {
    let config = RadarConfig::default();
    let envelope = ScenarioEnvelope::default();
    let sequence = generate_sequence(
        Occupancy::Empty,
        Domain::PseudoReal,
        100,
        &config,
        &envelope,
        4321,
        false,
    )
    .unwrap();
    let configured = sequence.profile.effective_floor_db();
    let stats = calibrate_noise_floor(&sequence.maps).unwrap();
    let error = (stats.mean_db - configured).abs();
    report(
        "4 calibration estimator",
        error < 0.5,
        &format!(
            "recovered mean {:.3} dB vs configured effective floor {configured:.3} dB \
             (|error| {error:.3} dB, std {:.3} dB, {} cells)",
            stats.mean_db, stats.std_db, stats.n_cells
        ),
    );
}

// ---------------------------------------------------------------------------
// shared study data for criteria 5 and 6
// ---------------------------------------------------------------------------

struct StudyData {
    train_raw: Vec<RdMap>,
    train_random_dr: Vec<RdMap>,
    train_cdr: Vec<RdMap>,
    test_maps: Vec<RdMap>,
    stats: NoiseFloorStats,
}

fn study_data() -> &'static StudyData {
    static DATA: OnceLock<StudyData> = OnceLock::new();
    DATA.get_or_init(|| {
        let config = RadarConfig::default();
        let envelope = ScenarioEnvelope::default();
        let threads = 2;
        // 24 sequences x 25 frames = 600 sim training frames per class
        let train_spec = DatasetSpec {
            domain: Domain::Sim,
            classes: Occupancy::ALL.to_vec(),
            sequences_per_class: 24,
            frames_per_sequence: 25,
            seed: 101,
            keep_cubes: false,
        };
        let train_raw = flatten_maps(&generate_dataset(&train_spec, &config, &envelope, threads).unwrap());
        // 12 sequences x 25 frames = 300 pseudo-real test frames per class
        let test_spec = DatasetSpec {
            domain: Domain::PseudoReal,
            classes: Occupancy::ALL.to_vec(),
            sequences_per_class: 12,
            frames_per_sequence: 25,
            seed: 202,
            keep_cubes: false,
        };
        let test_maps = flatten_maps(&generate_dataset(&test_spec, &config, &envelope, threads).unwrap());
        // one unlabeled 100-frame empty calibration sequence
        let calib = generate_sequence(
            Occupancy::Empty,
            Domain::PseudoReal,
            100,
            &config,
            &envelope,
            303,
            false,
        )
        .unwrap();
        let stats = calibrate_noise_floor(&calib.maps).unwrap();
        let train_random_dr =
            augment_random_dr(&train_raw, &RandomDrRanges::default(), 404, threads).unwrap();
        let train_cdr = augment_cdr(&train_raw, &stats, 505, threads).unwrap();
        StudyData {
            train_raw,
            train_random_dr,
            train_cdr,
            test_maps,
            stats,
        }
    })
}

fn maps_with_label(maps: &[RdMap], label: u8) -> Vec<RdMap> {
    maps.iter()
        .filter(|m| m.label == Some(label))
        .cloned()
        .collect()
}

// ---------------------------------------------------------------------------
// criterion 5: diagnostic alignment
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_diagnostic_alignment() {
    let data = study_data();
    let edges = default_edges();
    let empty_raw = maps_with_label(&data.train_raw, 0);
    let empty_cdr = maps_with_label(&data.train_cdr, 0);
    let empty_real = maps_with_label(&data.test_maps, 0);
    let hist_raw = magnitude_histogram(&empty_raw, &edges).unwrap();
    let hist_cdr = magnitude_histogram(&empty_cdr, &edges).unwrap();
    let hist_real = magnitude_histogram(&empty_real, &edges).unwrap();
    let w_raw = wasserstein1(&hist_raw, &hist_real).unwrap();
    let w_cdr = wasserstein1(&hist_cdr, &hist_real).unwrap();
    let histogram_ok = w_cdr < w_raw;

    let mean_ratio = |maps: &[RdMap]| {
        let ratios: Vec<f64> = maps
            .iter()
            .map(|m| static_energy_ratio(m, DEFAULT_STATIC_HALFWIDTH).unwrap())
            .collect();
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    let mut ratio_ok = true;
    let mut ratio_detail = String::new();
    for label in 0..3u8 {
        let raw = mean_ratio(&maps_with_label(&data.train_raw, label));
        let cdr = mean_ratio(&maps_with_label(&data.train_cdr, label));
        let real = mean_ratio(&maps_with_label(&data.test_maps, label));
        let closer = (cdr - real).abs() < (raw - real).abs();
        ratio_ok &= closer;
        ratio_detail.push_str(&format!(
            " class {label}: raw {raw:.3} cdr {cdr:.3} real {real:.3} ({});",
            if closer { "closer" } else { "NOT closer" }
        ));
    }

    report(
        "5 diagnostic alignment",
        histogram_ok && ratio_ok,
        &format!(
            "wasserstein raw->real {w_raw:.3} dB vs cdr->real {w_cdr:.3} dB;{ratio_detail}"
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 6: sim-to-real surrogate study
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_sim_to_real_surrogate() {
    let started = Instant::now();
    let data = study_data();

    let methods: [(&str, &Vec<RdMap>); 3] = [
        ("baseline", &data.train_raw),
        ("random_dr", &data.train_random_dr),
        ("cdr", &data.train_cdr),
    ];
    // per-method datasets share that method's clip range, estimated from
    // its own training maps and applied unchanged to the test path
    let mut method_data = Vec::new();
    for (name, maps) in &methods {
        let clip = estimate_clip_range(maps, 1.0, 99.9).unwrap();
        let train = Arc::new(LabeledDataset::from_maps(maps, &clip, Split::Train).unwrap());
        let test = Arc::new(LabeledDataset::from_maps(&data.test_maps, &clip, Split::Test).unwrap());
        method_data.push((name.to_string(), train, test));
    }

    let seeds = [40u64, 41, 42];
    let tasks = [Task::Occupancy, Task::Counting];
    let jobs: Vec<(usize, Task, u64)> = (0..3)
        .flat_map(|m| {
            tasks
                .into_iter()
                .flat_map(move |t| seeds.into_iter().map(move |s| (m, t, s)))
        })
        .collect();

    let results = par_map_indexed(jobs.len(), 2, |i| {
        let (method_idx, task, seed) = jobs[i];
        let (name, train, test) = &method_data[method_idx];
        let config = TrainConfig {
            learning_rate: 0.05,
            epochs: 15,
            batch_size: 32,
            seed,
            task,
        };
        let (params, _history) = classifier::train(train, &config).unwrap();
        let mut predictions = Vec::with_capacity(test.len());
        let mut labels = Vec::with_capacity(test.len());
        for (image, label) in &test.items {
            predictions.push(classifier::predict(&params, image).unwrap());
            labels.push(task.remap(*label));
        }
        let cm = confusion_matrix(&predictions, &labels, task.classes()).unwrap();
        let balanced = balanced_accuracy(&cm).unwrap();
        (name.clone(), task, seed, balanced)
    });

    let lookup = |method: &str, task: Task, seed: u64| {
        results
            .iter()
            .find(|(m, t, s, _)| m == method && *t == task && *s == seed)
            .map(|(_, _, _, b)| *b)
            .unwrap()
    };

    println!("method      task       seed  balanced_accuracy");
    for (method, task, seed, balanced) in &results {
        println!("{method:<11} {:<10} {seed:<5} {balanced:.4}", task.name());
    }

    let mut pass = true;
    let mut detail = String::new();
    for seed in seeds {
        let b_occ = lookup("baseline", Task::Occupancy, seed);
        let r_occ = lookup("random_dr", Task::Occupancy, seed);
        let c_occ = lookup("cdr", Task::Occupancy, seed);
        let b_cnt = lookup("baseline", Task::Counting, seed);
        let r_cnt = lookup("random_dr", Task::Counting, seed);
        let c_cnt = lookup("cdr", Task::Counting, seed);
        let occupancy_ok = b_occ <= 0.65 && c_occ >= 0.90 && c_occ > r_occ && r_occ > b_occ;
        let counting_ok = b_cnt <= 0.50 && c_cnt >= 0.65 && c_cnt > r_cnt && r_cnt > b_cnt;
        pass &= occupancy_ok && counting_ok;
        detail.push_str(&format!(
            " seed {seed}: occupancy {b_occ:.3}/{r_occ:.3}/{c_occ:.3} ({}), counting \
             {b_cnt:.3}/{r_cnt:.3}/{c_cnt:.3} ({});",
            if occupancy_ok { "ok" } else { "VIOLATED" },
            if counting_ok { "ok" } else { "VIOLATED" }
        ));
    }
    let elapsed = started.elapsed().as_secs_f64();
    let within_budget = elapsed <= 900.0;
    report(
        "6 sim-to-real surrogate",
        pass && within_budget,
        &format!("{detail} elapsed {elapsed:.0} s (budget 900 s); calibration stats mean \
                  {:.2} dB std {:.2} dB", data.stats.mean_db, data.stats.std_db),
    );
}

// ---------------------------------------------------------------------------
// criterion 7: classifier numerics
// ---------------------------------------------------------------------------

/// Piecewise-constant probe batch: flat regions keep every preactivation
/// away from the ReLU kinks so central differences are well-posed.
fn gradient_check_batch() -> Vec<(RdImage, u8)> {
    let flat = |value: f32| vec![value; 64 * 64 * 3];
    let blob = |pixels: &mut [f32], y0: usize, x0: usize, value: f32| {
        for y in y0..y0 + 16 {
            for x in x0..x0 + 16 {
                for c in 0..3 {
                    pixels[(y * 64 + x) * 3 + c] = value;
                }
            }
        }
    };
    let p0 = flat(0.25);
    let mut p1 = flat(0.25);
    blob(&mut p1, 16, 16, 0.75);
    let mut p2 = flat(0.3);
    blob(&mut p2, 8, 32, 0.8);
    let mut p3 = flat(0.2);
    blob(&mut p3, 40, 12, 0.7);
    [(p0, 0u8), (p1, 1), (p2, 1), (p3, 0)]
        .into_iter()
        .map(|(pixels, label)| {
            (
                RdImage {
                    height: 64,
                    width: 64,
                    pixels,
                },
                label,
            )
        })
        .collect()
}

#[test]
fn criterion_7_classifier_numerics() {
    // full finite-difference sweep over every parameter coordinate
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut params = ClassifierParams::init(2, &mut rng);
    let items = gradient_check_batch();
    let batch: Vec<(&RdImage, u8)> = items.iter().map(|(i, l)| (i, *l)).collect();
    let margin = kink_margin(&params, &batch).unwrap();
    assert!(margin > 1.5e-3, "probe batch sits near a ReLU kink: {margin}");
    let (_, grads) = classifier::loss_and_grads(&params, &batch).unwrap();
    let step = 1e-4;
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    let coords: Vec<(usize, usize)> = {
        let views = grads.tensor_views();
        (0..6)
            .flat_map(|t| (0..views[t].1.len()).map(move |c| (t, c)))
            .collect()
    };
    for (tensor, coord) in coords {
        let analytic = grads.tensor_views()[tensor].1[coord];
        let original = params.tensor_views()[tensor].1[coord];
        params.tensors_mut()[tensor][coord] = original + step;
        let loss_plus = batch_loss(&params, &batch).unwrap();
        params.tensors_mut()[tensor][coord] = original - step;
        let loss_minus = batch_loss(&params, &batch).unwrap();
        params.tensors_mut()[tensor][coord] = original;
        let numeric = (loss_plus - loss_minus) / (2.0 * step);
        let denom = analytic.abs().max(numeric.abs()).max(1e-6);
        worst = worst.max(((analytic - numeric) / denom).abs());
        checked += 1;
    }
    let gradients_ok = worst < 1e-4;

    // forward pass against an independently coded direct convolution
    let oracle = |params: &ClassifierParams, image: &RdImage| -> Vec<f64> {
        let get = |y: usize, x: usize, c: usize| image.pixels[(y * 64 + x) * 3 + c] as f64;
        let mut act1 = vec![vec![vec![0.0f64; 31]; 31]; 8];
        for o in 0..8 {
            for oy in 0..31 {
                for ox in 0..31 {
                    let mut acc = params.conv1_bias[o];
                    for c in 0..3 {
                        for ky in 0..3 {
                            for kx in 0..3 {
                                acc += params.conv1_weights[((o * 3 + c) * 3 + ky) * 3 + kx]
                                    * get(2 * oy + ky, 2 * ox + kx, c);
                            }
                        }
                    }
                    act1[o][oy][ox] = acc.max(0.0);
                }
            }
        }
        let mut pooled = vec![0.0f64; 16];
        for p in 0..16 {
            let mut sum = 0.0;
            for oy in 0..15 {
                for ox in 0..15 {
                    let mut acc = params.conv2_bias[p];
                    for c in 0..8 {
                        for ky in 0..3 {
                            for kx in 0..3 {
                                acc += params.conv2_weights[((p * 8 + c) * 3 + ky) * 3 + kx]
                                    * act1[c][2 * oy + ky][2 * ox + kx];
                            }
                        }
                    }
                    sum += acc.max(0.0);
                }
            }
            pooled[p] = sum / 225.0;
        }
        (0..params.classes)
            .map(|k| {
                params.head_bias[k]
                    + (0..16)
                        .map(|p| params.head_weights[k * 16 + p] * pooled[p])
                        .sum::<f64>()
            })
            .collect()
    };
    let mut forward_worst: f64 = 0.0;
    for (image, _) in &items {
        let fast = classifier::forward(&params, image).unwrap();
        let slow = oracle(&params, image);
        for (a, b) in fast.iter().zip(&slow) {
            let denom = a.abs().max(b.abs()).max(1e-9);
            forward_worst = forward_worst.max(((a - b) / denom).abs());
        }
    }
    let forward_ok = forward_worst < 1e-6;

    report(
        "7 classifier numerics",
        gradients_ok && forward_ok,
        &format!(
            "{checked} gradient coordinates, worst FD relative error {worst:.2e} (< 1e-4); \
             forward vs direct-convolution oracle worst relative error {forward_worst:.2e} \
             (< 1e-6)"
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 8: metrics unit checks
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_metrics_units() {
    let worked = ConfusionMatrix::from_counts(2, vec![45, 5, 20, 30]).unwrap();
    let exact = balanced_accuracy(&worked).unwrap() == 0.75;

    let identity = ConfusionMatrix::from_counts(3, vec![7, 0, 0, 0, 7, 0, 0, 0, 7]).unwrap();
    let identity_ok = balanced_accuracy(&identity).unwrap() == 1.0;

    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let labels: Vec<u8> = (0..3000).map(|i| (i % 3) as u8).collect();
    let preds: Vec<u8> = (0..3000).map(|_| rng.random_range(0..3u32) as u8).collect();
    let cm = confusion_matrix(&preds, &labels, 3).unwrap();
    let chance = balanced_accuracy(&cm).unwrap();
    let chance_ok = (chance - 1.0 / 3.0).abs() <= 0.05;

    report(
        "8 metrics units",
        exact && identity_ok && chance_ok,
        &format!(
            "balanced([[45,5],[20,30]]) = 0.75 exact: {exact}; identity -> 1.0: {identity_ok}; \
             random 3-class balanced accuracy {chance:.4} within 1/3 +- 0.05"
        ),
    );
}

// ---------------------------------------------------------------------------
// criterion 9: CLI workflow reproducibility
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_cli_reproducibility() {
    use std::path::{Path, PathBuf};
    use std::process::Command;

    let binary = env!("CARGO_BIN_EXE_rdsim2real");
    let base = std::env::temp_dir().join("rdsim2real_acceptance_cli");
    let _ = std::fs::remove_dir_all(&base);

    let run_workflow = |root: &Path| -> Vec<(String, Vec<u8>)> {
        std::fs::create_dir_all(root).unwrap();
        let run = |args: &[&str]| {
            let output = Command::new(binary)
                .args(args)
                .output()
                .expect("spawn rdsim2real");
            assert!(
                output.status.success(),
                "command {:?} failed: {}",
                args,
                String::from_utf8_lossy(&output.stderr)
            );
        };
        let path = |name: &str| root.join(name).to_string_lossy().into_owned();
        let train_json = root.join("train.json");
        std::fs::write(
            &train_json,
            r#"{"learning_rate": 0.05, "epochs": 4, "batch_size": 16, "seed": 40, "task": "occupancy"}"#,
        )
        .unwrap();

        run(&["simulate", "--domain", "sim", "--class", "all", "--sequences", "3",
              "--frames", "10", "--seed", "11", "--out", &path("sim_raw")]);
        run(&["simulate", "--domain", "pseudo-real", "--class", "all", "--sequences", "2",
              "--frames", "10", "--seed", "22", "--out", &path("test_real")]);
        run(&["simulate", "--domain", "pseudo-real", "--class", "0", "--sequences", "1",
              "--frames", "30", "--seed", "33", "--out", &path("calib")]);
        run(&["calibrate", "--in", &path("calib"), "--out", &path("stats.json")]);
        run(&["augment", "--in", &path("sim_raw"), "--method", "random-dr", "--seed", "44",
              "--out", &path("sim_dr")]);
        run(&["augment", "--in", &path("sim_raw"), "--method", "cdr", "--stats",
              &path("stats.json"), "--seed", "55", "--out", &path("sim_cdr")]);
        let mut artifacts = Vec::new();
        for method in ["sim_raw", "sim_dr", "sim_cdr"] {
            let model = path(&format!("{method}_model.bin"));
            let clip = path(&format!("{method}_clip.json"));
            let metrics = path(&format!("{method}_metrics.csv"));
            let confusion = path(&format!("{method}_confusion.csv"));
            run(&["train", "--in", &path(method), "--task", "occupancy",
                  "--config", train_json.to_str().unwrap(),
                  "--out", &model, "--clip-out", &clip]);
            run(&["eval", "--model", &model, "--in", &path("test_real"), "--clip", &clip,
                  "--out", &metrics, "--confusion-out", &confusion]);
            artifacts.push((
                format!("{method}_metrics"),
                std::fs::read(PathBuf::from(&metrics)).unwrap(),
            ));
            artifacts.push((
                format!("{method}_confusion"),
                std::fs::read(PathBuf::from(&confusion)).unwrap(),
            ));
        }
        run(&["report", "--runs", root.to_str().unwrap(), "--out", &path("report")]);
        for csv in ["histograms.csv", "energy_ratio.csv", "wasserstein.csv"] {
            artifacts.push((
                csv.to_string(),
                std::fs::read(root.join("report").join(csv)).unwrap(),
            ));
        }
        artifacts
    };

    let first = run_workflow(&base.join("run_a"));
    let second = run_workflow(&base.join("run_b"));
    let mut identical = true;
    for ((name_a, bytes_a), (_, bytes_b)) in first.iter().zip(&second) {
        if bytes_a != bytes_b {
            identical = false;
            println!("artifact {name_a} differs between runs");
        }
    }
    report(
        "9 CLI reproducibility",
        identical && !first.is_empty(),
        &format!(
            "{} artifacts byte-identical across two full workflow runs",
            first.len()
        ),
    );
}
