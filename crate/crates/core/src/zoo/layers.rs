//! Layers of the 1-D convolutional classifiers.
//!
//! Activations travel between layers as `(batch, channels * length)` matrices
//! in channel-major order, so `x[b, c * len + t]` is channel `c` at position
//! `t`. Every parametric layer exposes its tensors as flat slices; gradients
//! use the same order.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis, Zip};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::Activation;

pub const NORM_EPSILON: f64 = 1e-3;
pub const NORM_MOMENTUM: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub channels: usize,
    pub len: usize,
}

impl Shape {
    pub fn width(&self) -> usize {
        self.channels * self.len
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layer", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv1d { filters: usize, kernel: usize },
    Norm,
    Activation { kind: Activation },
    MaxPool { size: usize },
    Flatten,
    Dense { units: usize },
    Dropout { rate: f64 },
}

impl LayerSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv1d { .. } => "conv1d",
            LayerSpec::Norm => "norm",
            LayerSpec::Activation { .. } => "activation",
            LayerSpec::MaxPool { .. } => "maxpool",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Dropout { .. } => "dropout",
        }
    }
}

fn uniform_fill<R: Rng>(rng: &mut R, n: usize, fan_in: usize) -> Vec<f64> {
    let limit = (3.0 / fan_in as f64).sqrt();
    (0..n).map(|_| rng.gen_range(-limit..limit)).collect()
}

#[derive(Debug, Clone)]
pub struct Conv1d {
    pub input: Shape,
    pub filters: usize,
    pub kernel: usize,
    /// `(filters, channels * kernel)`
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Conv1d {
    pub fn new<R: Rng>(input: Shape, filters: usize, kernel: usize, rng: &mut R) -> Self {
        let fan_in = input.channels * kernel;
        let w = uniform_fill(rng, filters * fan_in, fan_in);
        Conv1d {
            input,
            filters,
            kernel,
            weight: Array2::from_shape_vec((filters, fan_in), w).expect("shape"),
            bias: Array1::zeros(filters),
        }
    }

    pub fn output(&self) -> Shape {
        Shape {
            channels: self.filters,
            len: self.input.len + 1 - self.kernel,
        }
    }

    /// `(out_len, channels * kernel)` patch matrix of one sample.
    fn im2col(&self, x: ArrayView1<f64>) -> Array2<f64> {
        let Shape { channels, len } = self.input;
        let k = self.kernel;
        let out_len = len + 1 - k;
        let mut cols = Array2::zeros((out_len, channels * k));
        for (t, mut row) in cols.axis_iter_mut(Axis(0)).enumerate() {
            for c in 0..channels {
                let src = x.slice(ndarray::s![c * len + t..c * len + t + k]);
                row.slice_mut(ndarray::s![c * k..(c + 1) * k]).assign(&src);
            }
        }
        cols
    }

    fn col2im_add(&self, dcols: &Array2<f64>, mut dx: ArrayViewMut1<f64>) {
        let Shape { channels, len } = self.input;
        let k = self.kernel;
        for (t, row) in dcols.axis_iter(Axis(0)).enumerate() {
            for c in 0..channels {
                let mut dst = dx.slice_mut(ndarray::s![c * len + t..c * len + t + k]);
                dst += &row.slice(ndarray::s![c * k..(c + 1) * k]);
            }
        }
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let out_shape = self.output();
        let batch = x.nrows();
        let mut out = Array2::zeros((batch, out_shape.width()));
        for (xb, ob) in x.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
            let cols = self.im2col(xb);
            let mut ob = ob
                .into_shape_with_order((self.filters, out_shape.len))
                .expect("contiguous row");
            general_mat_mul(1.0, &self.weight, &cols.t(), 0.0, &mut ob);
            for (mut r, &b) in ob.axis_iter_mut(Axis(0)).zip(&self.bias) {
                r += b;
            }
        }
        out
    }

    pub fn backward(
        &self,
        x: ArrayView2<f64>,
        dout: ArrayView2<f64>,
        grads: &mut [Vec<f64>],
        need_input_grad: bool,
    ) -> Option<Array2<f64>> {
        let out_len = self.output().len;
        let (gw, gb) = grads.split_at_mut(1);
        let mut dw = ArrayViewMut2::from_shape(self.weight.dim(), &mut gw[0]).expect("grad shape");
        dw.fill(0.0);
        let mut db = ArrayViewMut1::from(&mut gb[0][..]);
        db.fill(0.0);
        let mut dx = need_input_grad.then(|| Array2::zeros(x.dim()));
        for (b, (xb, gb_row)) in x
            .axis_iter(Axis(0))
            .zip(dout.axis_iter(Axis(0)))
            .enumerate()
        {
            let cols = self.im2col(xb);
            let dob = gb_row
                .into_shape_with_order((self.filters, out_len))
                .expect("contiguous row");
            general_mat_mul(1.0, &dob, &cols, 1.0, &mut dw);
            db += &dob.sum_axis(Axis(1));
            if let Some(dx) = dx.as_mut() {
                let dcols = dob.t().dot(&self.weight);
                self.col2im_add(&dcols, dx.row_mut(b));
            }
        }
        dx
    }
}

/// Per-channel normalization with batch statistics during training and
/// running statistics at inference.
#[derive(Debug, Clone)]
pub struct Norm {
    pub shape: Shape,
    pub gamma: Array1<f64>,
    pub beta: Array1<f64>,
    pub running_mean: Array1<f64>,
    pub running_var: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct NormCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
    pub(crate) mean: Array1<f64>,
    pub(crate) var: Array1<f64>,
    pub(crate) count: usize,
}

impl Norm {
    pub fn new(shape: Shape) -> Self {
        let c = shape.channels;
        Norm {
            shape,
            gamma: Array1::ones(c),
            beta: Array1::zeros(c),
            running_mean: Array1::zeros(c),
            running_var: Array1::ones(c),
        }
    }

    fn channel_view<'a>(&self, x: ArrayView2<'a, f64>, c: usize) -> ArrayView2<'a, f64> {
        let len = self.shape.len;
        x.slice_move(ndarray::s![.., c * len..(c + 1) * len])
    }

    pub fn forward_eval(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let len = self.shape.len;
        let mut y = x.to_owned();
        for c in 0..self.shape.channels {
            let scale = self.gamma[c] / (self.running_var[c] + NORM_EPSILON).sqrt();
            let shift = self.beta[c] - self.running_mean[c] * scale;
            y.slice_mut(ndarray::s![.., c * len..(c + 1) * len])
                .mapv_inplace(|v| v * scale + shift);
        }
        y
    }

    pub fn forward_train(&self, x: ArrayView2<f64>) -> (Array2<f64>, NormCache) {
        let len = self.shape.len;
        let channels = self.shape.channels;
        let count = x.nrows() * len;
        let mut xhat = Array2::zeros(x.dim());
        let mut y = Array2::zeros(x.dim());
        let mut mean = Array1::zeros(channels);
        let mut var = Array1::zeros(channels);
        let mut inv_std = Array1::zeros(channels);
        for c in 0..channels {
            let xc = self.channel_view(x, c);
            let m = xc.sum() / count as f64;
            let v = xc.fold(0.0, |acc, &val| acc + (val - m) * (val - m)) / count as f64;
            let is = 1.0 / (v + NORM_EPSILON).sqrt();
            let range = ndarray::s![.., c * len..(c + 1) * len];
            let mut xh = xhat.slice_mut(range);
            Zip::from(&mut xh)
                .and(&xc)
                .for_each(|h, &val| *h = (val - m) * is);
            Zip::from(y.slice_mut(range))
                .and(&xh)
                .for_each(|o, &h| *o = self.gamma[c] * h + self.beta[c]);
            mean[c] = m;
            var[c] = v;
            inv_std[c] = is;
        }
        (
            y,
            NormCache {
                xhat,
                inv_std,
                mean,
                var,
                count,
            },
        )
    }

    pub fn backward(
        &self,
        cache: &NormCache,
        dout: ArrayView2<f64>,
        grads: &mut [Vec<f64>],
    ) -> Array2<f64> {
        let len = self.shape.len;
        let n = cache.count as f64;
        let mut dx = Array2::zeros(dout.dim());
        for c in 0..self.shape.channels {
            let range = ndarray::s![.., c * len..(c + 1) * len];
            let dy = dout.slice(range);
            let xh = cache.xhat.slice(range);
            let sum_dy = dy.sum();
            let sum_dy_xh = Zip::from(&dy).and(&xh).fold(0.0, |acc, &a, &b| acc + a * b);
            grads[0][c] = sum_dy_xh;
            grads[1][c] = sum_dy;
            // dxhat = dy * gamma
            let g = self.gamma[c];
            let coef = g * cache.inv_std[c] / n;
            Zip::from(dx.slice_mut(range))
                .and(&dy)
                .and(&xh)
                .for_each(|d, &dyv, &h| *d = coef * (n * dyv - sum_dy - h * sum_dy_xh));
        }
        dx
    }

    pub fn update_running(&mut self, cache: &NormCache) {
        let n = cache.count as f64;
        let unbias = if cache.count > 1 { n / (n - 1.0) } else { 1.0 };
        Zip::from(&mut self.running_mean)
            .and(&cache.mean)
            .for_each(|r, &m| *r = NORM_MOMENTUM * *r + (1.0 - NORM_MOMENTUM) * m);
        Zip::from(&mut self.running_var)
            .and(&cache.var)
            .for_each(|r, &v| *r = NORM_MOMENTUM * *r + (1.0 - NORM_MOMENTUM) * v * unbias);
    }
}

pub fn activate(kind: Activation, x: ArrayView2<f64>) -> Array2<f64> {
    match kind {
        Activation::LeakyRelu => x.mapv(|v| {
            if v > 0.0 {
                v
            } else {
                Activation::LEAKY_SLOPE * v
            }
        }),
        Activation::Tanh => x.mapv(f64::tanh),
    }
}

pub fn activate_backward(
    kind: Activation,
    x: ArrayView2<f64>,
    dout: ArrayView2<f64>,
) -> Array2<f64> {
    let mut dx = dout.to_owned();
    match kind {
        Activation::LeakyRelu => Zip::from(&mut dx).and(&x).for_each(|d, &v| {
            if v <= 0.0 {
                *d *= Activation::LEAKY_SLOPE;
            }
        }),
        Activation::Tanh => Zip::from(&mut dx).and(&x).for_each(|d, &v| {
            let t = v.tanh();
            *d *= 1.0 - t * t;
        }),
    }
    dx
}

/// Non-overlapping max pooling with stride equal to the window.
#[derive(Debug, Clone)]
pub struct MaxPool {
    pub input: Shape,
    pub size: usize,
}

impl MaxPool {
    pub fn output(&self) -> Shape {
        Shape {
            channels: self.input.channels,
            len: self.input.len / self.size,
        }
    }

    /// Pooled values and, for each output cell, the input column it came from.
    pub fn forward(&self, x: ArrayView2<f64>) -> (Array2<f64>, Array2<usize>) {
        let out = self.output();
        let (len, p) = (self.input.len, self.size);
        let mut y = Array2::zeros((x.nrows(), out.width()));
        let mut arg = Array2::zeros((x.nrows(), out.width()));
        for b in 0..x.nrows() {
            let row = x.row(b);
            for c in 0..out.channels {
                for t in 0..out.len {
                    let start = c * len + t * p;
                    let mut best = start;
                    for j in start + 1..start + p {
                        if row[j] > row[best] {
                            best = j;
                        }
                    }
                    y[[b, c * out.len + t]] = row[best];
                    arg[[b, c * out.len + t]] = best;
                }
            }
        }
        (y, arg)
    }

    pub fn backward(&self, argmax: &Array2<usize>, dout: ArrayView2<f64>) -> Array2<f64> {
        let mut dx = Array2::zeros((dout.nrows(), self.input.width()));
        for b in 0..dout.nrows() {
            for (j, &src) in argmax.row(b).iter().enumerate() {
                dx[[b, src]] += dout[[b, j]];
            }
        }
        dx
    }
}

#[derive(Debug, Clone)]
pub struct Dense {
    /// `(inputs, units)`
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn new<R: Rng>(inputs: usize, units: usize, rng: &mut R) -> Self {
        let w = uniform_fill(rng, inputs * units, inputs);
        Dense {
            weight: Array2::from_shape_vec((inputs, units), w).expect("shape"),
            bias: Array1::zeros(units),
        }
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut y = x.dot(&self.weight);
        y += &self.bias;
        y
    }

    pub fn backward(
        &self,
        x: ArrayView2<f64>,
        dout: ArrayView2<f64>,
        grads: &mut [Vec<f64>],
        need_input_grad: bool,
    ) -> Option<Array2<f64>> {
        let (gw, gb) = grads.split_at_mut(1);
        let mut dw = ArrayViewMut2::from_shape(self.weight.dim(), &mut gw[0]).expect("grad shape");
        general_mat_mul(1.0, &x.t(), &dout, 0.0, &mut dw);
        ArrayViewMut1::from(&mut gb[0][..]).assign(&dout.sum_axis(Axis(0)));
        need_input_grad.then(|| dout.dot(&self.weight.t()))
    }
}

#[derive(Debug, Clone)]
pub enum Layer {
    Conv1d(Conv1d),
    Norm(Norm),
    Activation(Activation),
    MaxPool(MaxPool),
    Flatten,
    Dense(Dense),
    Dropout(f64),
}

#[derive(Debug, Clone)]
pub enum Cache {
    Input(Array2<f64>),
    Norm(NormCache),
    Pool(Array2<usize>),
    Mask(Option<Array2<f64>>),
    Empty,
}

impl Layer {
    pub fn params(&self) -> Vec<&[f64]> {
        match self {
            Layer::Conv1d(c) => vec![slice(&c.weight), slice1(&c.bias)],
            Layer::Norm(n) => vec![slice1(&n.gamma), slice1(&n.beta)],
            Layer::Dense(d) => vec![slice(&d.weight), slice1(&d.bias)],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            Layer::Conv1d(c) => vec![
                c.weight.as_slice_mut().expect("standard layout"),
                c.bias.as_slice_mut().expect("standard layout"),
            ],
            Layer::Norm(n) => vec![
                n.gamma.as_slice_mut().expect("standard layout"),
                n.beta.as_slice_mut().expect("standard layout"),
            ],
            Layer::Dense(d) => vec![
                d.weight.as_slice_mut().expect("standard layout"),
                d.bias.as_slice_mut().expect("standard layout"),
            ],
            _ => Vec::new(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    pub fn forward_eval(&self, x: ArrayView2<f64>) -> Array2<f64> {
        match self {
            Layer::Conv1d(c) => c.forward(x),
            Layer::Norm(n) => n.forward_eval(x),
            Layer::Activation(kind) => activate(*kind, x),
            Layer::MaxPool(p) => p.forward(x).0,
            Layer::Flatten | Layer::Dropout(_) => x.to_owned(),
            Layer::Dense(d) => d.forward(x),
        }
    }

    /// Training-mode forward. Dropout is applied only when `rng` is given.
    pub fn forward_train<R: Rng>(
        &self,
        x: ArrayView2<f64>,
        rng: Option<&mut R>,
    ) -> (Array2<f64>, Cache) {
        match self {
            Layer::Conv1d(c) => (c.forward(x), Cache::Input(x.to_owned())),
            Layer::Norm(n) => {
                let (y, cache) = n.forward_train(x);
                (y, Cache::Norm(cache))
            }
            Layer::Activation(kind) => (activate(*kind, x), Cache::Input(x.to_owned())),
            Layer::MaxPool(p) => {
                let (y, arg) = p.forward(x);
                (y, Cache::Pool(arg))
            }
            Layer::Flatten => (x.to_owned(), Cache::Empty),
            Layer::Dense(d) => (d.forward(x), Cache::Input(x.to_owned())),
            Layer::Dropout(rate) => match rng {
                Some(rng) if *rate > 0.0 => {
                    let keep = 1.0 - rate;
                    let mask = Array2::from_shape_fn(x.dim(), |_| {
                        if rng.gen::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    });
                    (&x * &mask, Cache::Mask(Some(mask)))
                }
                _ => (x.to_owned(), Cache::Mask(None)),
            },
        }
    }

    pub fn backward(
        &self,
        cache: &Cache,
        dout: ArrayView2<f64>,
        grads: &mut [Vec<f64>],
        need_input_grad: bool,
    ) -> Option<Array2<f64>> {
        match (self, cache) {
            (Layer::Conv1d(c), Cache::Input(x)) => {
                c.backward(x.view(), dout, grads, need_input_grad)
            }
            (Layer::Dense(d), Cache::Input(x)) => {
                d.backward(x.view(), dout, grads, need_input_grad)
            }
            (Layer::Norm(n), Cache::Norm(nc)) => Some(n.backward(nc, dout, grads)),
            (Layer::Activation(kind), Cache::Input(x)) => {
                Some(activate_backward(*kind, x.view(), dout))
            }
            (Layer::MaxPool(p), Cache::Pool(arg)) => Some(p.backward(arg, dout)),
            (Layer::Flatten, _) | (Layer::Dropout(_), Cache::Mask(None)) => Some(dout.to_owned()),
            (Layer::Dropout(_), Cache::Mask(Some(mask))) => Some(&dout * mask),
            _ => unreachable!("cache does not match layer"),
        }
    }
}

fn slice(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("standard layout")
}

fn slice1(a: &Array1<f64>) -> &[f64] {
    a.as_slice().expect("standard layout")
}
