use std::path::Path;

use image::RgbImage;
use rand::Rng;

use crate::dataset::{DatasetManifest, Split};
use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::preprocess::{augment, normalize, AugmentationConfig, NormalizationMethod};

/// Preprocessed images of one split with their binary labels.
#[derive(Debug, Clone, Default)]
pub struct LabeledImages {
    pub ids: Vec<String>,
    pub labels: Vec<bool>,
    pub images: Vec<RgbImage>,
}

impl LabeledImages {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn push(&mut self, id: impl Into<String>, label: bool, image: RgbImage) {
        self.ids.push(id.into());
        self.labels.push(label);
        self.images.push(image);
    }

    /// Subset in the given order.
    pub fn select(&self, indices: &[usize]) -> LabeledImages {
        let mut out = LabeledImages::default();
        for &i in indices {
            out.push(self.ids[i].clone(), self.labels[i], self.images[i].clone());
        }
        out
    }

    /// Normalised (and optionally augmented) batch tensor.
    pub fn batch<R: Rng + ?Sized>(
        &self,
        indices: &[usize],
        method: NormalizationMethod,
        augmentation: Option<(&AugmentationConfig, &mut R)>,
    ) -> Tensor {
        let first = &self.images[indices[0]];
        let (w, h) = first.dimensions();
        let per = 3 * (w * h) as usize;
        let mut data = Vec::with_capacity(indices.len() * per);
        let mut aug = augmentation;
        for &i in indices {
            let img = &self.images[i];
            assert_eq!(img.dimensions(), (w, h), "images in a batch differ in size");
            let mut t = normalize(img, method);
            if let Some((cfg, rng)) = aug.as_mut() {
                t = augment(&t, cfg, &mut **rng);
            }
            data.extend_from_slice(&t.values);
        }
        Tensor::from_data(indices.len(), 3, h as usize, w as usize, data)
    }
}

/// Loads the preprocessed images of `split`. Each entry is looked up as
/// `<image_dir>/<image_id>.png`, falling back to its manifest file path
/// relative to `image_dir`.
pub fn load_split(
    manifest: &DatasetManifest,
    split: Split,
    image_dir: &Path,
    input_size: u32,
) -> Result<LabeledImages> {
    let mut out = LabeledImages::default();
    for entry in manifest.split(split) {
        let id = entry.image_id();
        let primary = image_dir.join(format!("{id}.png"));
        let path = if primary.is_file() {
            primary
        } else {
            let alt = image_dir.join(&entry.file_path);
            if !alt.is_file() {
                return Err(Error::DataUnavailable(format!(
                    "no preprocessed image for {id} in {}",
                    image_dir.display()
                )));
            }
            alt
        };
        let img = image::open(&path)?.to_rgb8();
        if img.dimensions() != (input_size, input_size) {
            return Err(Error::DataUnavailable(format!(
                "{} is {}x{}, expected {input_size}x{input_size}",
                path.display(),
                img.width(),
                img.height()
            )));
        }
        out.push(id, entry.referable(), img);
    }
    if out.is_empty() {
        return Err(Error::DataUnavailable(format!("{split} split is empty")));
    }
    Ok(out)
}
