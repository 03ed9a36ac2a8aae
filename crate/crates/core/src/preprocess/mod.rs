//! Raw fundus photograph to fixed-size normalised tensor.
//!
//! The stages run in this order: [`locate_fundus`] finds the bright fundus
//! disc, [`crop_resize`] centres it in a square of `target_size` pixels,
//! [`normalize`] maps 8-bit values to one of three ranges, and [`augment`]
//! applies random flips and colour jitter during training.

mod augment;
mod crop;
mod fundus;
mod normalize;

use serde::{Deserialize, Serialize};

pub use augment::{augment, flip_horizontal, flip_vertical, AugmentationConfig};
pub use crop::crop_resize;
pub use fundus::{locate_fundus, FundusCircle, MIN_FUNDUS_RADIUS};
pub use normalize::{normalize, ImageTensor, NormalizationMethod};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    #[default]
    Bilinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub target_size: u32,
    /// Grayscale threshold as a fraction of the image's maximum intensity.
    pub localization_threshold_fraction: f64,
    pub interpolation: Interpolation,
    pub augmentation: AugmentationConfig,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            target_size: 299,
            localization_threshold_fraction: 0.1,
            interpolation: Interpolation::Bilinear,
            augmentation: AugmentationConfig::default(),
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_size < 32 {
            return Err(Error::InvalidConfig(format!(
                "target_size {} is below the minimum of 32",
                self.target_size
            )));
        }
        let f = self.localization_threshold_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "localization_threshold_fraction {f} must lie in (0, 1)"
            )));
        }
        self.augmentation.validate()
    }
}

/// Locates the fundus and produces the square, centred crop.
pub fn preprocess_image(
    image: &image::RgbImage,
    config: &PreprocessConfig,
) -> Result<(FundusCircle, image::RgbImage)> {
    let circle = locate_fundus(image, config.localization_threshold_fraction)?;
    let out = crop_resize(image, &circle, config.target_size);
    Ok((circle, out))
}
