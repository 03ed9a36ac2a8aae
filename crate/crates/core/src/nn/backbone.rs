use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{run_backward, run_forward};
use super::{AvgPool3, BatchNorm, Conv2d, GlobalPool, Inception, Layer, MaxPool2, Param, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackboneKind {
    InceptionV3Like,
    SmallCnn,
}

impl BackboneKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackboneKind::InceptionV3Like => "inception_v3_like",
            BackboneKind::SmallCnn => "small_cnn",
        }
    }
}

impl fmt::Display for BackboneKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BackboneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inception_v3_like" => Ok(BackboneKind::InceptionV3Like),
            "small_cnn" => Ok(BackboneKind::SmallCnn),
            other => Err(Error::InvalidConfig(format!("unknown backbone {other:?}"))),
        }
    }
}

/// Architecture choice. The network always ends in a single logit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackboneSpec {
    pub kind: BackboneKind,
    pub input_size: u32,
    pub uses_batch_norm: bool,
}

impl BackboneSpec {
    pub fn new(kind: BackboneKind, input_size: u32) -> Self {
        BackboneSpec {
            kind,
            input_size,
            uses_batch_norm: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.uses_batch_norm {
            return Err(Error::InvalidConfig("backbones always use batch normalization".into()));
        }
        let min = match self.kind {
            BackboneKind::SmallCnn => 16,
            BackboneKind::InceptionV3Like => 32,
        };
        if self.input_size < min {
            return Err(Error::InvalidConfig(format!(
                "{} needs input_size >= {min}, got {}",
                self.kind, self.input_size
            )));
        }
        Ok(())
    }
}

impl Default for BackboneSpec {
    fn default() -> Self {
        BackboneSpec::new(BackboneKind::InceptionV3Like, 299)
    }
}

fn conv_bn_relu(
    in_c: usize,
    out_c: usize,
    k: usize,
    stride: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Layer> {
    vec![
        Layer::Conv(Conv2d::new(in_c, out_c, k, stride, rng)),
        Layer::BatchNorm(BatchNorm::new(out_c)),
        Layer::relu(),
    ]
}

/// Inception-A style block: 1x1, 1x1 -> 3x3, 1x1 -> 3x3 -> 3x3 and
/// avgpool -> 1x1 branches.
fn inception_a(in_c: usize, width: usize, rng: &mut ChaCha8Rng) -> (Layer, usize) {
    let b1 = conv_bn_relu(in_c, width, 1, 1, rng);
    let mut b2 = conv_bn_relu(in_c, width, 1, 1, rng);
    b2.extend(conv_bn_relu(width, width * 3 / 2, 3, 1, rng));
    let mut b3 = conv_bn_relu(in_c, width, 1, 1, rng);
    b3.extend(conv_bn_relu(width, width * 3 / 2, 3, 1, rng));
    b3.extend(conv_bn_relu(width * 3 / 2, width * 3 / 2, 3, 1, rng));
    let mut b4 = vec![Layer::AvgPool(AvgPool3::default())];
    b4.extend(conv_bn_relu(in_c, width / 2, 1, 1, rng));
    let out = width + 2 * (width * 3 / 2) + width / 2;
    (Layer::Inception(Inception::new(vec![b1, b2, b3, b4])), out)
}

/// Feed-forward network producing one logit per image.
#[derive(Debug, Clone)]
pub struct Network {
    pub spec: BackboneSpec,
    layers: Vec<Layer>,
}

impl Network {
    /// Builds a randomly initialised network; identical seeds give identical
    /// weights.
    pub fn new(spec: BackboneSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut layers = Vec::new();
        let features = match spec.kind {
            BackboneKind::SmallCnn => {
                layers.extend(conv_bn_relu(3, 8, 3, 2, &mut rng));
                layers.extend(conv_bn_relu(8, 16, 3, 2, &mut rng));
                layers.extend(conv_bn_relu(16, 32, 3, 2, &mut rng));
                32
            }
            BackboneKind::InceptionV3Like => {
                layers.extend(conv_bn_relu(3, 16, 3, 2, &mut rng));
                layers.extend(conv_bn_relu(16, 32, 3, 2, &mut rng));
                layers.push(Layer::MaxPool(MaxPool2::default()));
                let (block, c1) = inception_a(32, 16, &mut rng);
                layers.push(block);
                layers.push(Layer::MaxPool(MaxPool2::default()));
                let (block, c2) = inception_a(c1, 32, &mut rng);
                layers.push(block);
                c2
            }
        };
        layers.push(Layer::GlobalPool(GlobalPool::default()));
        layers.push(Layer::dense(2 * features, 1, &mut rng));
        Ok(Network { spec, layers })
    }

    /// Logits for a batch, shape `n`.
    pub fn forward(&mut self, x: &Tensor, train: bool) -> Vec<f32> {
        let s = self.spec.input_size as usize;
        assert_eq!((x.c, x.h, x.w), (3, s, s), "network input shape");
        run_forward(&mut self.layers, x.clone(), train).data
    }

    /// Backpropagates d(loss)/d(logit) through the last training-mode
    /// forward pass, accumulating parameter gradients.
    pub fn backward(&mut self, dlogits: &[f32]) {
        let dy = Tensor::from_data(dlogits.len(), 1, 1, 1, dlogits.to_vec());
        run_backward(&mut self.layers, dy);
    }

    pub fn params(&mut self) -> Vec<&mut Param> {
        let mut out = Vec::new();
        for l in &mut self.layers {
            l.params(&mut out);
        }
        out
    }

    pub fn zero_grad(&mut self) {
        self.params().into_iter().for_each(Param::zero_grad);
    }

    /// Named persisted tensors in a stable order.
    pub fn state_mut(&mut self) -> Vec<(String, &mut Vec<f32>)> {
        let mut out = Vec::new();
        for (i, l) in self.layers.iter_mut().enumerate() {
            l.state(&format!("layer{i}"), &mut out);
        }
        out
    }

    pub fn state(&self) -> Vec<(String, Vec<f32>)> {
        let mut copy = self.clone();
        copy.state_mut()
            .into_iter()
            .map(|(name, v)| (name, v.clone()))
            .collect()
    }

    pub fn parameter_count(&mut self) -> usize {
        self.params().iter().map(|p| p.value.len()).sum()
    }
}
