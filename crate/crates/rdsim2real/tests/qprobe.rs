use rdsim2real::classifier::*;
use rdsim2real::datagen::*;
use rdsim2real::dr::*;
use rdsim2real::params::RadarConfig;
use rdsim2real::rd::*;
use rdsim2real::scene::*;

#[test]
fn probe_export_images() {
    let out = std::path::Path::new("/tmp/rdsim_imgs");
    std::fs::create_dir_all(out).unwrap();
    let config = RadarConfig::default();
    let mut envelope = ScenarioEnvelope::default();
    envelope.walker_amplitude_range = (3e-6, 3e-5);
    let mk = |domain, seed| {
        let spec = DatasetSpec {
            domain, classes: Occupancy::ALL.to_vec(),
            sequences_per_class: 2, frames_per_sequence: 4, seed, keep_cubes: false,
        };
        flatten_maps(&generate_dataset(&spec, &config, &envelope, 2).unwrap())
    };
    let raw = mk(Domain::Sim, 101);
    let real = mk(Domain::PseudoReal, 202);
    let calib = generate_sequence(Occupancy::Empty, Domain::PseudoReal, 100, &config, &envelope, 303, false).unwrap();
    let stats = calibrate_noise_floor(&calib.maps).unwrap();
    let cdr = augment_cdr(&raw, &stats, 505, 2).unwrap();
    let clip = estimate_clip_range(&cdr, 1.0, 99.9).unwrap();
    println!("clip [{:.1}, {:.1}] stats m {:.1} s {:.2}", clip.v_min_db, clip.v_max_db, stats.mean_db, stats.std_db);
    for (name, maps) in [("raw", &raw), ("cdr", &cdr), ("real", &real)] {
        for (i, map) in maps.iter().enumerate().step_by(4) {
            let img = prepare_input(map, &clip).unwrap();
            // upscale x4 for visibility
            let mut big = RdImage { height: 256, width: 256, pixels: vec![0.0; 256 * 256 * 3] };
            for y in 0..256 {
                for x in 0..256 {
                    let p = img.pixel(y / 4, x / 4);
                    let base = (y * 256 + x) * 3;
                    big.pixels[base] = p[0]; big.pixels[base + 1] = p[1]; big.pixels[base + 2] = p[2];
                }
            }
            big.write_png(&out.join(format!("{name}_c{}_{i:02}.png", map.label.unwrap()))).unwrap();
        }
    }
    println!("wrote {:?}", out);
}
