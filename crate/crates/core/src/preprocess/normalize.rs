use std::fmt;
use std::str::FromStr;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pixel scaling applied when images are loaded for training or inference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMethod {
    /// Per-image `(v - mean) / std` over all pixels and channels.
    Standardize,
    /// `v / 255`, giving `[0, 1]`.
    UnitRange,
    /// `v / 127.5 - 1`, giving `[-1, 1]`.
    SymmetricRange,
}

impl NormalizationMethod {
    pub const ALL: [NormalizationMethod; 3] = [
        NormalizationMethod::SymmetricRange,
        NormalizationMethod::Standardize,
        NormalizationMethod::UnitRange,
    ];

    /// Closed value range of normalised output, if the method has one.
    pub fn range(self) -> Option<(f32, f32)> {
        match self {
            NormalizationMethod::Standardize => None,
            NormalizationMethod::UnitRange => Some((0.0, 1.0)),
            NormalizationMethod::SymmetricRange => Some((-1.0, 1.0)),
        }
    }

    /// Width of one full 8-bit intensity swing in normalised units, used to
    /// scale additive jitter.
    pub(crate) fn span(self) -> f32 {
        match self {
            NormalizationMethod::Standardize | NormalizationMethod::UnitRange => 1.0,
            NormalizationMethod::SymmetricRange => 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NormalizationMethod::Standardize => "standardize",
            NormalizationMethod::UnitRange => "unit_range",
            NormalizationMethod::SymmetricRange => "symmetric_range",
        }
    }
}

impl FromStr for NormalizationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NormalizationMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown normalization method {s:?}")))
    }
}

impl fmt::Display for NormalizationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Normalised image in channel-major (CHW) layout, three channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    pub height: usize,
    pub width: usize,
    pub method: NormalizationMethod,
    pub values: Vec<f32>,
}

impl ImageTensor {
    pub const CHANNELS: usize = 3;

    pub fn plane(&self, channel: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.values[channel * n..(channel + 1) * n]
    }

    pub fn get(&self, channel: usize, y: usize, x: usize) -> f32 {
        self.values[(channel * self.height + y) * self.width + x]
    }
}

/// Constant images have no spread to divide by.
const STD_GUARD: f64 = 1e-6;

pub fn normalize(image: &RgbImage, method: NormalizationMethod) -> ImageTensor {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let n = w * h;
    let raw = image.as_raw();
    let mut values = vec![0f32; 3 * n];

    match method {
        NormalizationMethod::UnitRange => fill(&mut values, raw, n, |v| v as f32 / 255.0),
        NormalizationMethod::SymmetricRange => {
            fill(&mut values, raw, n, |v| v as f32 / 127.5 - 1.0)
        }
        NormalizationMethod::Standardize => {
            let count = raw.len() as f64;
            let mean = raw.iter().map(|&v| v as f64).sum::<f64>() / count.max(1.0);
            let var = raw
                .iter()
                .map(|&v| (v as f64 - mean).powi(2))
                .sum::<f64>()
                / count.max(1.0);
            let std = var.sqrt();
            if std >= STD_GUARD {
                fill(&mut values, raw, n, |v| ((v as f64 - mean) / std) as f32);
            }
        }
    }

    ImageTensor {
        height: h,
        width: w,
        method,
        values,
    }
}

fn fill(values: &mut [f32], raw: &[u8], n: usize, f: impl Fn(u8) -> f32) {
    for (i, px) in raw.chunks_exact(3).enumerate() {
        for ch in 0..3 {
            values[ch * n + i] = f(px[ch]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    #[test]
    fn affine_endpoints_are_exact() {
        let img = RgbImage::from_fn(2, 1, |x, _| Rgb([if x == 0 { 0 } else { 255 }; 3]));
        let sym = normalize(&img, NormalizationMethod::SymmetricRange);
        assert_eq!(sym.get(0, 0, 0), -1.0);
        assert_eq!(sym.get(2, 0, 1), 1.0);
        let unit = normalize(&img, NormalizationMethod::UnitRange);
        assert_eq!(unit.get(1, 0, 1), 1.0);
        assert_eq!(unit.get(1, 0, 0), 0.0);
    }

    #[test]
    fn constant_image_standardizes_to_zero() {
        let img = RgbImage::from_pixel(8, 8, Rgb([128; 3]));
        let t = normalize(&img, NormalizationMethod::Standardize);
        assert!(t.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn layout_is_channel_major() {
        let img = RgbImage::from_fn(3, 2, |x, y| Rgb([x as u8, y as u8, 9]));
        let t = normalize(&img, NormalizationMethod::UnitRange);
        assert_eq!(t.get(0, 1, 2), 2.0 / 255.0);
        assert_eq!(t.get(1, 1, 2), 1.0 / 255.0);
        assert_eq!(t.plane(2), &[9.0 / 255.0; 6]);
    }

    #[test]
    fn method_names_round_trip() {
        for m in NormalizationMethod::ALL {
            assert_eq!(m.as_str().parse::<NormalizationMethod>().unwrap(), m);
        }
        assert!("zscore".parse::<NormalizationMethod>().is_err());
    }
}
