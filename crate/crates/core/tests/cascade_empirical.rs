//! Empirical cascade behavior on synthetic images: the standard seven-block
//! run clears moderate densities without needing extra passes, and
//! repeat-last finishes the job at extreme densities.

use seconv_core::image::Image;
use seconv_core::noise::{add_sap_noise, NoiseSpec};
use seconv_core::seconv::{cascade_denoise_report, CascadeSpec};

fn smooth_gradient(h: usize, w: usize) -> Image {
    let bytes: Vec<u8> = (0..h * w)
        .map(|idx| {
            let (i, j) = (idx / w, idx % w);
            (1 + (i * 126 / h) + (j * 126 / w)) as u8
        })
        .collect();
    Image::from_u8(h, w, 1, &bytes).unwrap()
}

#[test]
fn half_density_clears_within_the_seven_blocks() {
    let clean = smooth_gradient(256, 256);
    let spec = CascadeSpec::standard();
    for seed in 0..100u64 {
        let noisy = add_sap_noise(&clean, &NoiseSpec::new(0.5, seed).unwrap()).unwrap();
        let (out, run) = cascade_denoise_report(&noisy.image, &spec).unwrap();
        assert_eq!(out.zero_count(), 0, "seed {seed}: {run:?}");
        assert_eq!(run.extra_passes, 0, "seed {seed} needed extra passes");
        assert_eq!(run.mean_filled, 0, "seed {seed} fell back to mean fill");
    }
}

#[test]
fn extreme_density_clears_under_repeat_last() {
    let clean = smooth_gradient(256, 256);
    let spec = CascadeSpec::standard();
    for seed in 0..5u64 {
        let noisy = add_sap_noise(&clean, &NoiseSpec::new(0.95, seed).unwrap()).unwrap();
        let (out, run) = cascade_denoise_report(&noisy.image, &spec).unwrap();
        assert_eq!(out.zero_count(), 0, "seed {seed}: {run:?}");
    }
}
