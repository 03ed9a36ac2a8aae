use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rdr_core::preprocess::{
    augment, crop_resize, locate_fundus, normalize, AugmentationConfig, NormalizationMethod,
};
use rdr_core::Error;

/// Disk with pixel centres at integer coordinates, plus Gaussian noise on
/// every pixel.
fn noisy_disk(w: u32, h: u32, cx: f64, cy: f64, r: f64, color: [f64; 3], sigma: f64, rng: &mut ChaCha8Rng) -> RgbImage {
    let noise = Normal::new(0.0, sigma).unwrap();
    RgbImage::from_fn(w, h, |x, y| {
        let inside = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2) <= r * r;
        let base = if inside { color } else { [0.0; 3] };
        Rgb(base.map(|c| (c + noise.sample(rng)).round().clamp(0.0, 255.0) as u8))
    })
}

#[test]
fn localization_is_robust_to_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 500;
    let mut hits = 0;
    for _ in 0..trials {
        let r: f64 = rng.random_range(40.0..=180.0);
        let w = (2.0 * r) as u32 + rng.random_range(6..120);
        let h = (2.0 * r) as u32 + rng.random_range(6..120);
        let cx = rng.random_range(r + 2.0..w as f64 - r - 2.0);
        let cy = rng.random_range(r + 2.0..h as f64 - r - 2.0);
        let sigma = rng.random_range(0.0..=8.0);
        let color = [
            rng.random_range(120.0..250.0),
            rng.random_range(50.0..160.0),
            rng.random_range(20.0..90.0),
        ];
        let img = noisy_disk(w, h, cx, cy, r, color, sigma, &mut rng);
        let c = locate_fundus(&img, 0.1).unwrap();
        if (c.center_x - cx).abs() <= 3.0 && (c.center_y - cy).abs() <= 3.0 && (c.radius - r).abs() <= 3.0 {
            hits += 1;
        }
    }
    assert!(hits as f64 >= 0.99 * trials as f64, "{hits}/{trials} within 3 px");
}

#[test]
fn all_black_image_fails_to_localize() {
    let img = RgbImage::new(300, 200);
    assert!(matches!(locate_fundus(&img, 0.1), Err(Error::LocalizationFailed(_))));
}

#[test]
fn crop_centres_the_fundus() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let r: f64 = rng.random_range(40.0..120.0);
        let w = (2.0 * r) as u32 + rng.random_range(10..200);
        let h = (2.0 * r) as u32 + rng.random_range(10..200);
        let cx = rng.random_range(r + 2.0..w as f64 - r - 2.0);
        let cy = rng.random_range(r + 2.0..h as f64 - r - 2.0);
        let img = noisy_disk(w, h, cx, cy, r, [200.0, 100.0, 50.0], 3.0, &mut rng);
        let circle = locate_fundus(&img, 0.1).unwrap();
        let size = 128;
        let out = crop_resize(&img, &circle, size);

        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for (x, y, p) in out.enumerate_pixels() {
            let g = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
            if g > 25.0 {
                sx += x as f64;
                sy += y as f64;
                n += 1.0;
            }
        }
        let mid = (size as f64 - 1.0) / 2.0;
        assert!((sx / n - mid).abs() <= 2.0 && (sy / n - mid).abs() <= 2.0);
        assert!(out.get_pixel(0, 0).0.iter().all(|&v| v < 25));
    }
}

#[test]
fn normalization_ranges_hold_on_random_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for i in 0..10_000 {
        let (w, h) = (rng.random_range(1..12), rng.random_range(1..12));
        let mut img = RgbImage::new(w, h);
        // Narrow-range images exercise standardization with small spreads.
        let (lo, hi) = if i % 3 == 0 {
            let a = rng.random_range(0..250u8);
            (a, a + 5)
        } else {
            (0, 255)
        };
        img.pixels_mut().for_each(|p| *p = Rgb([rng.random_range(lo..=hi), rng.random_range(lo..=hi), rng.random_range(lo..=hi)]));

        for method in NormalizationMethod::ALL {
            let t = normalize(&img, method);
            assert_eq!(t.values.len(), 3 * (w * h) as usize);
            match method.range() {
                Some((a, b)) => assert!(t.values.iter().all(|v| (a..=b).contains(v))),
                None => {
                    let vals: Vec<f64> = t.values.iter().map(|&v| v as f64).collect();
                    let n = vals.len() as f64;
                    let mean = vals.iter().sum::<f64>() / n;
                    let raw: Vec<f64> = img.as_raw().iter().map(|&v| v as f64).collect();
                    let raw_mean = raw.iter().sum::<f64>() / n;
                    let raw_std = (raw.iter().map(|v| (v - raw_mean).powi(2)).sum::<f64>() / n).sqrt();
                    if raw_std >= 1e-6 {
                        let std = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
                        assert!(mean.abs() < 1e-5, "mean {mean}");
                        assert!((std - 1.0).abs() < 1e-4, "std {std}");
                    } else {
                        assert!(vals.iter().all(|&v| v == 0.0));
                    }
                }
            }
        }
    }
}

#[test]
fn endpoints_and_constant_guard() {
    let img = RgbImage::from_fn(2, 1, |x, _| if x == 0 { Rgb([0; 3]) } else { Rgb([255; 3]) });
    let s = normalize(&img, NormalizationMethod::SymmetricRange);
    assert_eq!(s.get(0, 0, 0), -1.0);
    assert_eq!(s.get(2, 0, 1), 1.0);
    let u = normalize(&img, NormalizationMethod::UnitRange);
    assert_eq!(u.get(1, 0, 1), 1.0);
    let flat = RgbImage::from_pixel(5, 4, Rgb([128; 3]));
    assert!(normalize(&flat, NormalizationMethod::Standardize).values.iter().all(|&v| v == 0.0));
}

#[test]
fn augmentation_identity_and_determinism() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let img = RgbImage::from_fn(9, 7, |_, _| Rgb([rng.random(), rng.random(), rng.random()]));
    for method in NormalizationMethod::ALL {
        let t = normalize(&img, method);
        let mut r = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(augment(&t, &AugmentationConfig::identity(), &mut r), t);

        let cfg = AugmentationConfig::default();
        let a = augment(&t, &cfg, &mut ChaCha8Rng::seed_from_u64(3));
        let b = augment(&t, &cfg, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        if let Some((lo, hi)) = method.range() {
            assert!(a.values.iter().all(|v| (lo..=hi).contains(v)));
        }
    }
}
