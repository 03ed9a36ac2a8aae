use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ImageTensor;
use crate::error::{Error, Result};

/// Random flips and colour jitter applied to normalised training tensors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentationConfig {
    pub horizontal_flip: bool,
    pub vertical_flip: bool,
    /// Maximum additive brightness shift, as a fraction of the full
    /// intensity swing.
    pub brightness_delta: f64,
    pub contrast_range: (f64, f64),
    pub saturation_range: (f64, f64),
    /// Maximum hue rotation, as a fraction of a full turn.
    pub hue_delta: f64,
    pub rng_seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        AugmentationConfig {
            horizontal_flip: true,
            vertical_flip: true,
            brightness_delta: 0.1,
            contrast_range: (0.9, 1.1),
            saturation_range: (0.9, 1.1),
            hue_delta: 0.02,
            rng_seed: 0,
        }
    }
}

impl AugmentationConfig {
    /// Settings under which [`augment`] returns its input unchanged.
    pub fn identity() -> Self {
        AugmentationConfig {
            horizontal_flip: false,
            vertical_flip: false,
            brightness_delta: 0.0,
            contrast_range: (1.0, 1.0),
            saturation_range: (1.0, 1.0),
            hue_delta: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |(lo, hi): (f64, f64), name: &str| {
            if lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!(
                    "{name} ({lo}, {hi}) must be a non-negative, ordered pair"
                )))
            }
        };
        ordered(self.contrast_range, "contrast_range")?;
        ordered(self.saturation_range, "saturation_range")?;
        for (name, v) in [
            ("brightness_delta", self.brightness_delta),
            ("hue_delta", self.hue_delta),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} {v} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// Applies, in order: horizontal flip and vertical flip (each with
/// probability 0.5 when enabled), then brightness, contrast, saturation and
/// hue jitter drawn uniformly from the configured ranges. The result is
/// clamped to the normalisation method's range. Jitter steps whose range is
/// the identity are skipped entirely, so an identity config is an exact
/// no-op.
pub fn augment<R: Rng + ?Sized>(
    tensor: &ImageTensor,
    config: &AugmentationConfig,
    rng: &mut R,
) -> ImageTensor {
    let mut out = tensor.clone();
    if config.horizontal_flip && rng.random_bool(0.5) {
        flip_horizontal(&mut out);
    }
    if config.vertical_flip && rng.random_bool(0.5) {
        flip_vertical(&mut out);
    }

    let span = tensor.method.span();
    let mut touched = false;
    if config.brightness_delta > 0.0 {
        let d = config.brightness_delta;
        let shift = rng.random_range(-d..=d) as f32 * span;
        out.values.iter_mut().for_each(|v| *v += shift);
        touched = true;
    }
    if let Some(f) = sample_factor(config.contrast_range, rng) {
        adjust_contrast(&mut out, f);
        touched = true;
    }
    if let Some(f) = sample_factor(config.saturation_range, rng) {
        adjust_saturation(&mut out, f);
        touched = true;
    }
    if config.hue_delta > 0.0 {
        let h = config.hue_delta;
        let turn = rng.random_range(-h..=h);
        rotate_hue(&mut out, turn * std::f64::consts::TAU);
        touched = true;
    }

    if touched {
        if let Some((lo, hi)) = tensor.method.range() {
            out.values.iter_mut().for_each(|v| *v = v.clamp(lo, hi));
        }
    }
    out
}

fn sample_factor<R: Rng + ?Sized>((lo, hi): (f64, f64), rng: &mut R) -> Option<f32> {
    if lo == 1.0 && hi == 1.0 {
        None
    } else if lo == hi {
        Some(lo as f32)
    } else {
        Some(rng.random_range(lo..=hi) as f32)
    }
}

/// Reverses column order in every channel.
pub fn flip_horizontal(t: &mut ImageTensor) {
    let w = t.width;
    for row in t.values.chunks_exact_mut(w) {
        row.reverse();
    }
}

/// Reverses row order in every channel.
pub fn flip_vertical(t: &mut ImageTensor) {
    let (w, h) = (t.width, t.height);
    for plane in t.values.chunks_exact_mut(w * h) {
        for y in 0..h / 2 {
            let (upper, lower) = plane.split_at_mut((h - 1 - y) * w);
            upper[y * w..(y + 1) * w].swap_with_slice(&mut lower[..w]);
        }
    }
}

fn adjust_contrast(t: &mut ImageTensor, factor: f32) {
    let n = t.width * t.height;
    for plane in t.values.chunks_exact_mut(n) {
        let mean = plane.iter().map(|&v| v as f64).sum::<f64>() as f32 / n as f32;
        plane.iter_mut().for_each(|v| *v = mean + (*v - mean) * factor);
    }
}

fn adjust_saturation(t: &mut ImageTensor, factor: f32) {
    let n = t.width * t.height;
    let (r, rest) = t.values.split_at_mut(n);
    let (g, b) = rest.split_at_mut(n);
    for i in 0..n {
        let gray = (r[i] + g[i] + b[i]) / 3.0;
        r[i] = gray + (r[i] - gray) * factor;
        g[i] = gray + (g[i] - gray) * factor;
        b[i] = gray + (b[i] - gray) * factor;
    }
}

/// Rotates colours about the gray axis `(1, 1, 1)`. The gray axis is fixed,
/// so the rotation commutes with every normalisation's offset.
fn rotate_hue(t: &mut ImageTensor, angle: f64) {
    let (s, c) = angle.sin_cos();
    let k = 1.0 / 3.0f64;
    let q = k.sqrt();
    // Rodrigues rotation about the unit vector (1, 1, 1) / sqrt(3).
    let diag = c + (1.0 - c) * k;
    let plus = (1.0 - c) * k + s * q;
    let minus = (1.0 - c) * k - s * q;
    let m = [
        [diag, minus, plus],
        [plus, diag, minus],
        [minus, plus, diag],
    ]
    .map(|row| row.map(|v| v as f32));

    let n = t.width * t.height;
    let (r, rest) = t.values.split_at_mut(n);
    let (g, b) = rest.split_at_mut(n);
    for i in 0..n {
        let (x, y, z) = (r[i], g[i], b[i]);
        r[i] = m[0][0] * x + m[0][1] * y + m[0][2] * z;
        g[i] = m[1][0] * x + m[1][1] * y + m[1][2] * z;
        b[i] = m[2][0] * x + m[2][1] * y + m[2][2] * z;
    }
}
