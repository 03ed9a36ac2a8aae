//! A small CPU-only convolutional network library with explicit backward
//! passes.
//!
//! Layers cache what they need during a training-mode forward pass and
//! accumulate parameter gradients in [`Param::grad`] during the backward
//! pass. Work inside a layer is split across samples; gradient reductions
//! always run in sample order, so results do not depend on the number of
//! worker threads.

mod backbone;
mod layers;
mod tensor;

pub use backbone::{BackboneKind, BackboneSpec, Network};
pub use layers::{BatchNorm, Conv2d, Dense, GlobalPool, Inception, Layer, MaxPool2, Param, AvgPool3};
pub use tensor::Tensor;
