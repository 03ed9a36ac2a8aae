use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::Tensor;

/// A trainable tensor with its gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub value: Vec<f32>,
    pub grad: Vec<f32>,
    /// Whether weight decay applies (kernels yes, biases and BN no).
    pub decay: bool,
}

impl Param {
    fn new(value: Vec<f32>, decay: bool) -> Self {
        let grad = vec![0.0; value.len()];
        Param { value, grad, decay }
    }

    fn normal<R: Rng + ?Sized>(len: usize, std: f32, decay: bool, rng: &mut R) -> Self {
        let dist = Normal::new(0.0, std).expect("finite std");
        Param::new((0..len).map(|_| dist.sample(rng)).collect(), decay)
    }

    pub fn zero_grad(&mut self) {
        self.grad.iter_mut().for_each(|g| *g = 0.0);
    }
}

/// C = alpha * A * B + beta * C with explicit strides, row-major C.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f32],
    (rsa, csa): (isize, isize),
    b: &[f32],
    (rsb, csb): (isize, isize),
    beta: f32,
    c: &mut [f32],
) {
    debug_assert!(c.len() >= m * n);
    // SAFETY: callers pass slices whose extents cover every index reachable
    // through the given dimensions and strides.
    unsafe {
        matrixmultiply::sgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// 2-D convolution without bias (every convolution is followed by batch
/// normalisation).
#[derive(Debug, Clone)]
pub struct Conv2d {
    pub in_c: usize,
    pub out_c: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
    pub weight: Param,
    cols: Vec<f32>,
    in_shape: (usize, usize, usize),
}

impl Conv2d {
    pub fn new<R: Rng + ?Sized>(
        in_c: usize,
        out_c: usize,
        kernel: usize,
        stride: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = in_c * kernel * kernel;
        let std = (2.0 / fan_in as f32).sqrt();
        Conv2d {
            in_c,
            out_c,
            kernel,
            stride,
            pad: kernel / 2,
            weight: Param::normal(out_c * fan_in, std, true, rng),
            cols: Vec::new(),
            in_shape: (0, 0, 0),
        }
    }

    fn out_dims(&self, h: usize, w: usize) -> (usize, usize) {
        (
            (h + 2 * self.pad - self.kernel) / self.stride + 1,
            (w + 2 * self.pad - self.kernel) / self.stride + 1,
        )
    }

    fn im2col(&self, x: &[f32], h: usize, w: usize, cols: &mut [f32]) {
        let (oh, ow) = self.out_dims(h, w);
        let (k, s, p) = (self.kernel, self.stride, self.pad as isize);
        for c in 0..self.in_c {
            let plane = &x[c * h * w..(c + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = (c * k + ky) * k + kx;
                    let dst = &mut cols[row * oh * ow..(row + 1) * oh * ow];
                    for oy in 0..oh {
                        let iy = (oy * s) as isize + ky as isize - p;
                        let out_row = &mut dst[oy * ow..(oy + 1) * ow];
                        if iy < 0 || iy >= h as isize {
                            out_row.iter_mut().for_each(|v| *v = 0.0);
                            continue;
                        }
                        let src = &plane[iy as usize * w..(iy as usize + 1) * w];
                        for (ox, v) in out_row.iter_mut().enumerate() {
                            let ix = (ox * s) as isize + kx as isize - p;
                            *v = if ix < 0 || ix >= w as isize { 0.0 } else { src[ix as usize] };
                        }
                    }
                }
            }
        }
    }

    fn col2im(&self, cols: &[f32], h: usize, w: usize, dx: &mut [f32]) {
        let (oh, ow) = self.out_dims(h, w);
        let (k, s, p) = (self.kernel, self.stride, self.pad as isize);
        dx.iter_mut().for_each(|v| *v = 0.0);
        for c in 0..self.in_c {
            let plane = &mut dx[c * h * w..(c + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = (c * k + ky) * k + kx;
                    let src = &cols[row * oh * ow..(row + 1) * oh * ow];
                    for oy in 0..oh {
                        let iy = (oy * s) as isize + ky as isize - p;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let dst = &mut plane[iy as usize * w..(iy as usize + 1) * w];
                        for ox in 0..ow {
                            let ix = (ox * s) as isize + kx as isize - p;
                            if ix >= 0 && ix < w as isize {
                                dst[ix as usize] += src[oy * ow + ox];
                            }
                        }
                    }
                }
            }
        }
    }

    fn forward(&mut self, x: &Tensor, train: bool) -> Tensor {
        assert_eq!(x.c, self.in_c, "conv input channels");
        let (oh, ow) = self.out_dims(x.h, x.w);
        let kk = self.in_c * self.kernel * self.kernel;
        let cols_len = kk * oh * ow;
        let mut y = Tensor::zeros(x.n, self.out_c, oh, ow);
        let mut cols = vec![0.0f32; x.n * cols_len];
        let out_len = y.sample_len();
        let this = &*self;
        y.data
            .par_chunks_mut(out_len)
            .zip(cols.par_chunks_mut(cols_len))
            .enumerate()
            .for_each(|(i, (yi, ci))| {
                this.im2col(x.sample(i), x.h, x.w, ci);
                gemm(
                    this.out_c,
                    kk,
                    oh * ow,
                    &this.weight.value,
                    (kk as isize, 1),
                    ci,
                    ((oh * ow) as isize, 1),
                    0.0,
                    yi,
                );
            });
        if train {
            self.cols = cols;
            self.in_shape = (x.n, x.h, x.w);
        }
        y
    }

    fn backward(&mut self, dy: &Tensor) -> Tensor {
        let (n, h, w) = self.in_shape;
        let (oh, ow) = (dy.h, dy.w);
        let p = oh * ow;
        let kk = self.in_c * self.kernel * self.kernel;
        let cols_len = kk * p;
        for i in 0..n {
            gemm(
                self.out_c,
                p,
                kk,
                dy.sample(i),
                (p as isize, 1),
                &self.cols[i * cols_len..(i + 1) * cols_len],
                (1, p as isize),
                1.0,
                &mut self.weight.grad,
            );
        }
        let mut dx = Tensor::zeros(n, self.in_c, h, w);
        let in_len = dx.sample_len();
        let this = &*self;
        dx.data.par_chunks_mut(in_len).enumerate().for_each(|(i, dxi)| {
            let mut dcols = vec![0.0f32; cols_len];
            gemm(
                kk,
                this.out_c,
                p,
                &this.weight.value,
                (1, kk as isize),
                dy.sample(i),
                (p as isize, 1),
                0.0,
                &mut dcols,
            );
            this.col2im(&dcols, h, w, dxi);
        });
        self.cols = Vec::new();
        dx
    }
}

/// Per-channel batch normalisation with learned scale and shift.
#[derive(Debug, Clone)]
pub struct BatchNorm {
    pub channels: usize,
    pub gamma: Param,
    pub beta: Param,
    pub running_mean: Vec<f32>,
    pub running_var: Vec<f32>,
    pub momentum: f32,
    pub eps: f32,
    xhat: Vec<f32>,
    inv_std: Vec<f32>,
}

impl BatchNorm {
    pub fn new(channels: usize) -> Self {
        BatchNorm {
            channels,
            gamma: Param::new(vec![1.0; channels], false),
            beta: Param::new(vec![0.0; channels], false),
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            momentum: 0.9,
            eps: 1e-3,
            xhat: Vec::new(),
            inv_std: Vec::new(),
        }
    }

    fn forward(&mut self, x: &Tensor, train: bool) -> Tensor {
        let hw = x.plane_len();
        let c = self.channels;
        let mut y = x.same_shape();
        if !train {
            for ch in 0..c {
                let inv = 1.0 / (self.running_var[ch] + self.eps).sqrt();
                let scale = self.gamma.value[ch] * inv;
                let shift = self.beta.value[ch] - self.running_mean[ch] * scale;
                for i in 0..x.n {
                    let off = (i * c + ch) * hw;
                    for (o, v) in y.data[off..off + hw].iter_mut().zip(&x.data[off..off + hw]) {
                        *o = v * scale + shift;
                    }
                }
            }
            return y;
        }

        let m = (x.n * hw) as f64;
        let mut xhat = vec![0.0f32; x.data.len()];
        self.inv_std = vec![0.0; c];
        for ch in 0..c {
            let mut sum = 0.0f64;
            for i in 0..x.n {
                let off = (i * c + ch) * hw;
                sum += x.data[off..off + hw].iter().map(|&v| v as f64).sum::<f64>();
            }
            let mean = sum / m;
            let mut sq = 0.0f64;
            for i in 0..x.n {
                let off = (i * c + ch) * hw;
                sq += x.data[off..off + hw]
                    .iter()
                    .map(|&v| (v as f64 - mean).powi(2))
                    .sum::<f64>();
            }
            let var = sq / m;
            let inv = 1.0 / (var + self.eps as f64).sqrt();
            self.inv_std[ch] = inv as f32;
            let (g, b) = (self.gamma.value[ch], self.beta.value[ch]);
            for i in 0..x.n {
                let off = (i * c + ch) * hw;
                for k in off..off + hw {
                    let xh = ((x.data[k] as f64 - mean) * inv) as f32;
                    xhat[k] = xh;
                    y.data[k] = g * xh + b;
                }
            }
            let mo = self.momentum;
            self.running_mean[ch] = mo * self.running_mean[ch] + (1.0 - mo) * mean as f32;
            self.running_var[ch] = mo * self.running_var[ch] + (1.0 - mo) * var as f32;
        }
        self.xhat = xhat;
        y
    }

    fn backward(&mut self, dy: &Tensor) -> Tensor {
        let hw = dy.plane_len();
        let c = self.channels;
        let m = (dy.n * hw) as f32;
        let mut dx = dy.same_shape();
        for ch in 0..c {
            let (mut sum_dy, mut sum_dy_xhat) = (0.0f64, 0.0f64);
            for i in 0..dy.n {
                let off = (i * c + ch) * hw;
                for k in off..off + hw {
                    sum_dy += dy.data[k] as f64;
                    sum_dy_xhat += (dy.data[k] * self.xhat[k]) as f64;
                }
            }
            self.gamma.grad[ch] += sum_dy_xhat as f32;
            self.beta.grad[ch] += sum_dy as f32;
            let g = self.gamma.value[ch];
            let scale = g * self.inv_std[ch] / m;
            let (sd, sdx) = (sum_dy as f32, sum_dy_xhat as f32);
            for i in 0..dy.n {
                let off = (i * c + ch) * hw;
                for k in off..off + hw {
                    dx.data[k] = scale * (m * dy.data[k] - sd - self.xhat[k] * sdx);
                }
            }
        }
        self.xhat = Vec::new();
        dx
    }
}

/// 2x2 max pooling with stride 2.
#[derive(Debug, Clone, Default)]
pub struct MaxPool2 {
    argmax: Vec<u32>,
    in_shape: (usize, usize, usize, usize),
}

impl MaxPool2 {
    fn forward(&mut self, x: &Tensor, train: bool) -> Tensor {
        let (oh, ow) = (x.h / 2, x.w / 2);
        let mut y = Tensor::zeros(x.n, x.c, oh, ow);
        let mut argmax = vec![0u32; y.data.len()];
        for plane in 0..x.n * x.c {
            let src = &x.data[plane * x.h * x.w..(plane + 1) * x.h * x.w];
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = f32::NEG_INFINITY;
                    let mut at = 0;
                    for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        let idx = (2 * oy + dy) * x.w + 2 * ox + dx;
                        if src[idx] > best {
                            best = src[idx];
                            at = idx;
                        }
                    }
                    let o = plane * oh * ow + oy * ow + ox;
                    y.data[o] = best;
                    argmax[o] = at as u32;
                }
            }
        }
        if train {
            self.argmax = argmax;
            self.in_shape = (x.n, x.c, x.h, x.w);
        }
        y
    }

    fn backward(&mut self, dy: &Tensor) -> Tensor {
        let (n, c, h, w) = self.in_shape;
        let mut dx = Tensor::zeros(n, c, h, w);
        let out_plane = dy.plane_len();
        for (o, &g) in dy.data.iter().enumerate() {
            let plane = o / out_plane;
            dx.data[plane * h * w + self.argmax[o] as usize] += g;
        }
        dx
    }
}

/// 3x3 average pooling, stride 1, same padding; padded cells are not
/// counted.
#[derive(Debug, Clone, Default)]
pub struct AvgPool3 {
    in_shape: (usize, usize, usize, usize),
}

impl AvgPool3 {
    fn window(i: usize, len: usize) -> (usize, usize) {
        (i.saturating_sub(1), (i + 1).min(len - 1))
    }

    fn forward(&mut self, x: &Tensor, train: bool) -> Tensor {
        let mut y = x.same_shape();
        let (h, w) = (x.h, x.w);
        for plane in 0..x.n * x.c {
            let src = &x.data[plane * h * w..(plane + 1) * h * w];
            let dst = &mut y.data[plane * h * w..(plane + 1) * h * w];
            for oy in 0..h {
                let (y0, y1) = Self::window(oy, h);
                for ox in 0..w {
                    let (x0, x1) = Self::window(ox, w);
                    let mut s = 0.0;
                    for iy in y0..=y1 {
                        s += src[iy * w + x0..=iy * w + x1].iter().sum::<f32>();
                    }
                    dst[oy * w + ox] = s / ((y1 - y0 + 1) * (x1 - x0 + 1)) as f32;
                }
            }
        }
        if train {
            self.in_shape = (x.n, x.c, x.h, x.w);
        }
        y
    }

    fn backward(&mut self, dy: &Tensor) -> Tensor {
        let (_, _, h, w) = self.in_shape;
        let mut dx = dy.same_shape();
        for plane in 0..dy.n * dy.c {
            let src = &dy.data[plane * h * w..(plane + 1) * h * w];
            let dst = &mut dx.data[plane * h * w..(plane + 1) * h * w];
            for oy in 0..h {
                let (y0, y1) = Self::window(oy, h);
                for ox in 0..w {
                    let (x0, x1) = Self::window(ox, w);
                    let g = src[oy * w + ox] / ((y1 - y0 + 1) * (x1 - x0 + 1)) as f32;
                    for iy in y0..=y1 {
                        dst[iy * w + x0..=iy * w + x1].iter_mut().for_each(|v| *v += g);
                    }
                }
            }
        }
        dx
    }
}

/// Concatenated global average and global max over each channel: output has
/// `2 * c` features of spatial size 1x1.
#[derive(Debug, Clone, Default)]
pub struct GlobalPool {
    argmax: Vec<u32>,
    in_shape: (usize, usize, usize, usize),
}

impl GlobalPool {
    fn forward(&mut self, x: &Tensor, train: bool) -> Tensor {
        let hw = x.plane_len();
        let mut y = Tensor::zeros(x.n, 2 * x.c, 1, 1);
        let mut argmax = vec![0u32; x.n * x.c];
        for i in 0..x.n {
            for ch in 0..x.c {
                let src = &x.data[(i * x.c + ch) * hw..(i * x.c + ch + 1) * hw];
                let mean = src.iter().sum::<f32>() / hw as f32;
                let (at, max) = src
                    .iter()
                    .enumerate()
                    .fold((0, f32::NEG_INFINITY), |(bi, bv), (j, &v)| if v > bv { (j, v) } else { (bi, bv) });
                y.data[i * 2 * x.c + ch] = mean;
                y.data[i * 2 * x.c + x.c + ch] = max;
                argmax[i * x.c + ch] = at as u32;
            }
        }
        if train {
            self.argmax = argmax;
            self.in_shape = (x.n, x.c, x.h, x.w);
        }
        y
    }

    fn backward(&mut self, dy: &Tensor) -> Tensor {
        let (n, c, h, w) = self.in_shape;
        let hw = h * w;
        let mut dx = Tensor::zeros(n, c, h, w);
        for i in 0..n {
            for ch in 0..c {
                let g_avg = dy.data[i * 2 * c + ch] / hw as f32;
                let g_max = dy.data[i * 2 * c + c + ch];
                let dst = &mut dx.data[(i * c + ch) * hw..(i * c + ch + 1) * hw];
                dst.iter_mut().for_each(|v| *v = g_avg);
                dst[self.argmax[i * c + ch] as usize] += g_max;
            }
        }
        dx
    }
}

/// Fully connected layer over flattened features.
#[derive(Debug, Clone)]
pub struct Dense {
    pub in_features: usize,
    pub out_features: usize,
    pub weight: Param,
    pub bias: Param,
    input: Vec<f32>,
    batch: usize,
}

impl Dense {
    pub fn new<R: Rng + ?Sized>(in_features: usize, out_features: usize, rng: &mut R) -> Self {
        let std = (1.0 / in_features as f32).sqrt();
        Dense {
            in_features,
            out_features,
            weight: Param::normal(in_features * out_features, std, true, rng),
            bias: Param::new(vec![0.0; out_features], false),
            input: Vec::new(),
            batch: 0,
        }
    }

    fn forward(&mut self, x: &Tensor, train: bool) -> Tensor {
        assert_eq!(x.sample_len(), self.in_features, "dense input features");
        let mut y = Tensor::zeros(x.n, self.out_features, 1, 1);
        for i in 0..x.n {
            for o in 0..self.out_features {
                y.data[i * self.out_features + o] = self.bias.value[o];
            }
        }
        gemm(
            x.n,
            self.in_features,
            self.out_features,
            &x.data,
            (self.in_features as isize, 1),
            &self.weight.value,
            (1, self.in_features as isize),
            1.0,
            &mut y.data,
        );
        if train {
            self.input = x.data.clone();
            self.batch = x.n;
        }
        y
    }

    fn backward(&mut self, dy: &Tensor, in_shape: (usize, usize, usize)) -> Tensor {
        let n = self.batch;
        for i in 0..n {
            for o in 0..self.out_features {
                self.bias.grad[o] += dy.data[i * self.out_features + o];
            }
        }
        // dW[out, in] += dy^T[out, n] * x[n, in]
        gemm(
            self.out_features,
            n,
            self.in_features,
            &dy.data,
            (1, self.out_features as isize),
            &self.input,
            (self.in_features as isize, 1),
            1.0,
            &mut self.weight.grad,
        );
        let (c, h, w) = in_shape;
        let mut dx = Tensor::zeros(n, c, h, w);
        gemm(
            n,
            self.out_features,
            self.in_features,
            &dy.data,
            (self.out_features as isize, 1),
            &self.weight.value,
            (self.in_features as isize, 1),
            0.0,
            &mut dx.data,
        );
        dx
    }
}

/// Parallel branches over the same input, concatenated along channels.
#[derive(Debug, Clone)]
pub struct Inception {
    pub branches: Vec<Vec<Layer>>,
    out_channels: Vec<usize>,
}

impl Inception {
    pub fn new(branches: Vec<Vec<Layer>>) -> Self {
        Inception {
            branches,
            out_channels: Vec::new(),
        }
    }

    fn forward(&mut self, x: &Tensor, train: bool) -> Tensor {
        let outs: Vec<Tensor> = self
            .branches
            .iter_mut()
            .map(|b| run_forward(b, x.clone(), train))
            .collect();
        let (h, w) = (outs[0].h, outs[0].w);
        let total_c: usize = outs.iter().map(|o| o.c).sum();
        let mut y = Tensor::zeros(x.n, total_c, h, w);
        let hw = h * w;
        for i in 0..x.n {
            let mut c0 = 0;
            for o in &outs {
                assert_eq!((o.h, o.w), (h, w), "inception branches disagree on size");
                let dst = &mut y.data[(i * total_c + c0) * hw..(i * total_c + c0 + o.c) * hw];
                dst.copy_from_slice(o.sample(i));
                c0 += o.c;
            }
        }
        self.out_channels = outs.iter().map(|o| o.c).collect();
        y
    }

    fn backward(&mut self, dy: &Tensor) -> Tensor {
        let hw = dy.plane_len();
        let mut dx: Option<Tensor> = None;
        let mut c0 = 0;
        for (branch, &bc) in self.branches.iter_mut().zip(&self.out_channels) {
            let mut part = Tensor::zeros(dy.n, bc, dy.h, dy.w);
            for i in 0..dy.n {
                let src = &dy.data[(i * dy.c + c0) * hw..(i * dy.c + c0 + bc) * hw];
                part.data[i * bc * hw..(i + 1) * bc * hw].copy_from_slice(src);
            }
            c0 += bc;
            let g = run_backward(branch, part);
            match dx.as_mut() {
                None => dx = Some(g),
                Some(acc) => acc.data.iter_mut().zip(&g.data).for_each(|(a, b)| *a += b),
            }
        }
        dx.expect("inception has at least one branch")
    }
}

#[derive(Debug, Clone)]
pub enum Layer {
    Conv(Conv2d),
    BatchNorm(BatchNorm),
    Relu(Vec<bool>),
    MaxPool(MaxPool2),
    AvgPool(AvgPool3),
    Inception(Inception),
    GlobalPool(GlobalPool),
    Dense(Dense, (usize, usize, usize)),
}

impl Layer {
    pub fn relu() -> Self {
        Layer::Relu(Vec::new())
    }

    pub fn dense<R: Rng + ?Sized>(in_features: usize, out_features: usize, rng: &mut R) -> Self {
        Layer::Dense(Dense::new(in_features, out_features, rng), (0, 0, 0))
    }

    pub fn forward(&mut self, x: Tensor, train: bool) -> Tensor {
        match self {
            Layer::Conv(l) => l.forward(&x, train),
            Layer::BatchNorm(l) => l.forward(&x, train),
            Layer::Relu(mask) => {
                let mut y = x;
                if train {
                    *mask = y.data.iter().map(|&v| v > 0.0).collect();
                }
                y.data.iter_mut().for_each(|v| *v = v.max(0.0));
                y
            }
            Layer::MaxPool(l) => l.forward(&x, train),
            Layer::AvgPool(l) => l.forward(&x, train),
            Layer::Inception(l) => l.forward(&x, train),
            Layer::GlobalPool(l) => l.forward(&x, train),
            Layer::Dense(l, shape) => {
                *shape = (x.c, x.h, x.w);
                l.forward(&x, train)
            }
        }
    }

    pub fn backward(&mut self, dy: Tensor) -> Tensor {
        match self {
            Layer::Conv(l) => l.backward(&dy),
            Layer::BatchNorm(l) => l.backward(&dy),
            Layer::Relu(mask) => {
                let mut dx = dy;
                dx.data
                    .iter_mut()
                    .zip(mask.iter())
                    .for_each(|(g, &on)| if !on { *g = 0.0 });
                dx
            }
            Layer::MaxPool(l) => l.backward(&dy),
            Layer::AvgPool(l) => l.backward(&dy),
            Layer::Inception(l) => l.backward(&dy),
            Layer::GlobalPool(l) => l.backward(&dy),
            Layer::Dense(l, shape) => l.backward(&dy, *shape),
        }
    }

    /// Trainable parameters in a fixed traversal order.
    pub fn params<'a>(&'a mut self, out: &mut Vec<&'a mut Param>) {
        match self {
            Layer::Conv(l) => out.push(&mut l.weight),
            Layer::BatchNorm(l) => {
                out.push(&mut l.gamma);
                out.push(&mut l.beta);
            }
            Layer::Dense(l, _) => {
                out.push(&mut l.weight);
                out.push(&mut l.bias);
            }
            Layer::Inception(l) => {
                for b in &mut l.branches {
                    for layer in b {
                        layer.params(out);
                    }
                }
            }
            Layer::Relu(_) | Layer::MaxPool(_) | Layer::AvgPool(_) | Layer::GlobalPool(_) => {}
        }
    }

    /// Every persisted tensor (parameters and running statistics), named by
    /// position.
    pub fn state<'a>(&'a mut self, prefix: &str, out: &mut Vec<(String, &'a mut Vec<f32>)>) {
        match self {
            Layer::Conv(l) => out.push((format!("{prefix}.conv.weight"), &mut l.weight.value)),
            Layer::BatchNorm(l) => {
                out.push((format!("{prefix}.bn.gamma"), &mut l.gamma.value));
                out.push((format!("{prefix}.bn.beta"), &mut l.beta.value));
                out.push((format!("{prefix}.bn.running_mean"), &mut l.running_mean));
                out.push((format!("{prefix}.bn.running_var"), &mut l.running_var));
            }
            Layer::Dense(l, _) => {
                out.push((format!("{prefix}.dense.weight"), &mut l.weight.value));
                out.push((format!("{prefix}.dense.bias"), &mut l.bias.value));
            }
            Layer::Inception(l) => {
                for (bi, b) in l.branches.iter_mut().enumerate() {
                    for (li, layer) in b.iter_mut().enumerate() {
                        layer.state(&format!("{prefix}.branch{bi}.{li}"), out);
                    }
                }
            }
            Layer::Relu(_) | Layer::MaxPool(_) | Layer::AvgPool(_) | Layer::GlobalPool(_) => {}
        }
    }
}

pub(crate) fn run_forward(layers: &mut [Layer], x: Tensor, train: bool) -> Tensor {
    layers.iter_mut().fold(x, |h, l| l.forward(h, train))
}

pub(crate) fn run_backward(layers: &mut [Layer], dy: Tensor) -> Tensor {
    layers.iter_mut().rev().fold(dy, |g, l| l.backward(g))
}
