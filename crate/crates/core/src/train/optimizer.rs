use crate::nn::Param;

use super::TrainingConfig;

/// RMSProp over a fixed, ordered list of parameters.
///
/// Per element: `g += weight_decay * w` (decayed tensors only),
/// `ms = decay * ms + (1 - decay) * g^2`,
/// `v = momentum * v + lr * g / sqrt(ms + epsilon)`, `w -= v`.
#[derive(Debug, Clone)]
pub struct RmsProp {
    pub learning_rate: f32,
    pub decay: f32,
    pub epsilon: f32,
    pub momentum: f32,
    pub weight_decay: f32,
    mean_square: Vec<Vec<f32>>,
    velocity: Vec<Vec<f32>>,
}

impl RmsProp {
    pub fn new(config: &TrainingConfig) -> Self {
        RmsProp {
            learning_rate: config.learning_rate as f32,
            decay: config.rmsprop_decay as f32,
            epsilon: config.rmsprop_epsilon as f32,
            momentum: config.rmsprop_momentum as f32,
            weight_decay: config.weight_decay as f32,
            mean_square: Vec::new(),
            velocity: Vec::new(),
        }
    }

    pub fn step(&mut self, params: Vec<&mut Param>) {
        if self.mean_square.is_empty() {
            self.mean_square = params.iter().map(|p| vec![0.0; p.value.len()]).collect();
            self.velocity = self.mean_square.clone();
        }
        assert_eq!(self.mean_square.len(), params.len(), "parameter list changed");
        for ((p, ms), vel) in params.into_iter().zip(&mut self.mean_square).zip(&mut self.velocity) {
            let wd = if p.decay { self.weight_decay } else { 0.0 };
            for (((w, &g), m), v) in p.value.iter_mut().zip(&p.grad).zip(ms.iter_mut()).zip(vel.iter_mut()) {
                let g = g + wd * *w;
                *m = self.decay * *m + (1.0 - self.decay) * g * g;
                *v = self.momentum * *v + self.learning_rate * g / (*m + self.epsilon).sqrt();
                *w -= *v;
            }
        }
    }
}
