//! Planted-lesion fundus images for desk-scale runs.
//!
//! Every image is a bright orange disk on a black background. Positive
//! images also carry a few small pale-yellow blobs inside the disk, which
//! is the only class signal.

use std::fs;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub n_images: usize,
    pub positive_fraction: f64,
    pub image_size: u32,
    pub seed: u64,
}

impl SyntheticConfig {
    pub fn new(n_images: usize, positive_fraction: f64, seed: u64) -> Self {
        SyntheticConfig {
            n_images,
            positive_fraction,
            image_size: 192,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_images < 4 {
            return Err(Error::InvalidConfig("synthetic corpus needs at least 4 images".into()));
        }
        if !(0.0..=1.0).contains(&self.positive_fraction) {
            return Err(Error::InvalidConfig("positive_fraction must lie in [0, 1]".into()));
        }
        if self.image_size < 64 {
            return Err(Error::InvalidConfig("synthetic image_size must be at least 64".into()));
        }
        Ok(())
    }

    pub fn n_positive(&self) -> usize {
        (self.n_images as f64 * self.positive_fraction).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lesion {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
}

/// Ground truth for one generated image, with pixel centres at integer
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticImage {
    pub image: RgbImage,
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    pub lesions: Vec<Lesion>,
}

/// Draws one fundus-like image; `positive` plants 1 to 5 lesions.
pub fn generate_image<R: Rng + ?Sized>(rng: &mut R, size: u32, positive: bool) -> SyntheticImage {
    let s = size as f64;
    let r = s * rng.random_range(0.30..0.42);
    let jitter = s * 0.05;
    let mid = (s - 1.0) / 2.0;
    let cx = mid + rng.random_range(-jitter..jitter);
    let cy = mid + rng.random_range(-jitter..jitter);
    let base = [
        rng.random_range(170.0..210.0),
        rng.random_range(80.0..110.0),
        rng.random_range(35.0..55.0),
    ];

    let lesions: Vec<Lesion> = if positive {
        (0..rng.random_range(1..=5))
            .map(|_| {
                let lr = r * rng.random_range(0.05..0.08);
                let dist = (r - 2.0 * lr) * rng.random::<f64>().sqrt() * 0.9;
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                Lesion {
                    cx: cx + dist * angle.cos(),
                    cy: cy + dist * angle.sin(),
                    r: lr,
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    let disk_noise = Normal::new(0.0, 4.0).expect("finite sigma");
    let mut image = RgbImage::new(size, size);
    for (x, y, px) in image.enumerate_pixels_mut() {
        let (fx, fy) = (x as f64, y as f64);
        let d = ((fx - cx).powi(2) + (fy - cy).powi(2)).sqrt();
        let mut rgb = if d <= r {
            let vignette = 1.0 - 0.35 * (d / r).powi(2);
            let n = disk_noise.sample(rng);
            [base[0] * vignette + n, base[1] * vignette + n, base[2] * vignette + n]
        } else {
            let n = rng.random_range(0.0..3.0);
            [n, n, n]
        };
        for l in &lesions {
            let dl = ((fx - l.cx).powi(2) + (fy - l.cy).powi(2)).sqrt();
            if dl <= l.r {
                rgb = [255.0, 245.0, 200.0];
            }
        }
        *px = Rgb(rgb.map(|v| v.round().clamp(0.0, 255.0) as u8));
    }
    SyntheticImage {
        image,
        cx,
        cy,
        r,
        lesions,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntheticEntry {
    pub image_id: String,
    pub grade: u8,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub image_dir: PathBuf,
    pub grades_csv: PathBuf,
    pub entries: Vec<SyntheticEntry>,
}

/// Writes `images/<id>.png` and `grades.csv` (columns `image,level`) under
/// `out_dir`. Positives get grade 2, negatives grade 0; which images are
/// positive is a seeded shuffle, so exactly `n_positive()` are.
pub fn generate_corpus(cfg: &SyntheticConfig, out_dir: &Path) -> Result<SyntheticCorpus> {
    cfg.validate()?;
    let image_dir = out_dir.join("images");
    fs::create_dir_all(&image_dir).map_err(|e| Error::io(&image_dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut positive = vec![false; cfg.n_images];
    positive[..cfg.n_positive()].iter_mut().for_each(|p| *p = true);
    positive.shuffle(&mut rng);

    let width = cfg.n_images.to_string().len().max(5);
    let mut entries = Vec::with_capacity(cfg.n_images);
    for (i, &pos) in positive.iter().enumerate() {
        let image_id = format!("synth_{i:0width$}");
        let img = generate_image(&mut rng, cfg.image_size, pos);
        let path = image_dir.join(format!("{image_id}.png"));
        img.image.save(&path)?;
        entries.push(SyntheticEntry {
            image_id,
            grade: if pos { 2 } else { 0 },
        });
    }

    let grades_csv = out_dir.join("grades.csv");
    let mut w = csv::Writer::from_path(&grades_csv)?;
    w.write_record(["image", "level"])?;
    for e in &entries {
        w.write_record([e.image_id.as_str(), &e.grade.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&grades_csv, e))?;
    Ok(SyntheticCorpus {
        image_dir,
        grades_csv,
        entries,
    })
}
