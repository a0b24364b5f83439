use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{NnError, Result};
use crate::spectral_norm::PowerIteration;
use crate::tensor::Tensor;

/// One stage of a sequential network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerSpec {
    /// Fully connected; flattens all non-batch dimensions of its input.
    Dense {
        inputs: usize,
        outputs: usize,
    },
    /// 3x3 convolution, stride 1, zero padding 1.
    Conv3x3 {
        in_channels: usize,
        out_channels: usize,
    },
    /// `[batch, c*h*w]` to `[batch, c, h, w]`.
    Reshape {
        channels: usize,
        height: usize,
        width: usize,
    },
    UpsampleNearest2x,
    AvgPool2x,
    LeakyRelu(f64),
    Relu,
    Tanh,
    Sigmoid,
}

impl LayerSpec {
    pub fn has_parameters(&self) -> bool {
        matches!(self, LayerSpec::Dense { .. } | LayerSpec::Conv3x3 { .. })
    }

    /// Output shape for one sample (batch dimension excluded).
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let numel: usize = input.iter().product();
        let spatial = |what: &str| -> Result<(usize, usize, usize)> {
            match input {
                &[c, h, w] => Ok((c, h, w)),
                _ => Err(NnError::Shape(format!(
                    "{what} needs [c, h, w] input, got {input:?}"
                ))),
            }
        };
        match *self {
            LayerSpec::Dense { inputs, outputs } => {
                if numel != inputs {
                    return Err(NnError::Shape(format!(
                        "dense expects {inputs} inputs, got {input:?}"
                    )));
                }
                Ok(vec![outputs])
            }
            LayerSpec::Conv3x3 {
                in_channels,
                out_channels,
            } => {
                let (c, h, w) = spatial("conv3x3")?;
                if c != in_channels {
                    return Err(NnError::Shape(format!(
                        "conv3x3 expects {in_channels} channels, got {c}"
                    )));
                }
                Ok(vec![out_channels, h, w])
            }
            LayerSpec::Reshape {
                channels,
                height,
                width,
            } => {
                if numel != channels * height * width {
                    return Err(NnError::Shape(format!(
                        "cannot reshape {input:?} to [{channels}, {height}, {width}]"
                    )));
                }
                Ok(vec![channels, height, width])
            }
            LayerSpec::UpsampleNearest2x => {
                let (c, h, w) = spatial("upsample2x")?;
                Ok(vec![c, 2 * h, 2 * w])
            }
            LayerSpec::AvgPool2x => {
                let (c, h, w) = spatial("avgpool2x")?;
                if h % 2 != 0 || w % 2 != 0 {
                    return Err(NnError::Shape(format!(
                        "avgpool2x needs even sides, got {h}x{w}"
                    )));
                }
                Ok(vec![c, h / 2, w / 2])
            }
            LayerSpec::LeakyRelu(_) | LayerSpec::Relu | LayerSpec::Tanh | LayerSpec::Sigmoid => {
                Ok(input.to_vec())
            }
        }
    }

    /// Parses a comma-separated list such as `dense:16:8,leaky_relu:0.2`.
    pub fn parse_list(s: &str) -> Result<Vec<LayerSpec>> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect()
    }

    pub fn format_list(specs: &[LayerSpec]) -> String {
        specs
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerSpec::Dense { inputs, outputs } => write!(f, "dense:{inputs}:{outputs}"),
            LayerSpec::Conv3x3 {
                in_channels,
                out_channels,
            } => write!(f, "conv3x3:{in_channels}:{out_channels}"),
            LayerSpec::Reshape {
                channels,
                height,
                width,
            } => write!(f, "reshape:{channels}:{height}:{width}"),
            LayerSpec::UpsampleNearest2x => f.write_str("upsample2x"),
            LayerSpec::AvgPool2x => f.write_str("avgpool2x"),
            LayerSpec::LeakyRelu(slope) => write!(f, "leaky_relu:{slope:?}"),
            LayerSpec::Relu => f.write_str("relu"),
            LayerSpec::Tanh => f.write_str("tanh"),
            LayerSpec::Sigmoid => f.write_str("sigmoid"),
        }
    }
}

impl FromStr for LayerSpec {
    type Err = NnError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let int = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .and_then(|p| p.parse().ok())
                .filter(|&n: &usize| n > 0)
                .ok_or_else(|| NnError::parse(s, "expected positive integer arguments"))
        };
        let arity = |n: usize| -> Result<()> {
            if parts.len() == n + 1 {
                Ok(())
            } else {
                Err(NnError::parse(s, format!("expected {n} arguments")))
            }
        };
        let spec = match parts[0] {
            "dense" => {
                arity(2)?;
                LayerSpec::Dense {
                    inputs: int(1)?,
                    outputs: int(2)?,
                }
            }
            "conv3x3" => {
                arity(2)?;
                LayerSpec::Conv3x3 {
                    in_channels: int(1)?,
                    out_channels: int(2)?,
                }
            }
            "reshape" => {
                arity(3)?;
                LayerSpec::Reshape {
                    channels: int(1)?,
                    height: int(2)?,
                    width: int(3)?,
                }
            }
            "upsample2x" => {
                arity(0)?;
                LayerSpec::UpsampleNearest2x
            }
            "avgpool2x" => {
                arity(0)?;
                LayerSpec::AvgPool2x
            }
            "leaky_relu" => {
                arity(1)?;
                let slope: f64 = parts[1]
                    .parse()
                    .map_err(|_| NnError::parse(s, "bad slope"))?;
                LayerSpec::LeakyRelu(slope)
            }
            "relu" => {
                arity(0)?;
                LayerSpec::Relu
            }
            "tanh" => {
                arity(0)?;
                LayerSpec::Tanh
            }
            "sigmoid" => {
                arity(0)?;
                LayerSpec::Sigmoid
            }
            _ => return Err(NnError::parse(s, "unknown layer")),
        };
        Ok(spec)
    }
}

/// A layer with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub(crate) spec: LayerSpec,
    pub(crate) weight: Option<Tensor>,
    pub(crate) bias: Option<Tensor>,
    pub(crate) power: Option<PowerIteration>,
}

/// What a layer keeps from its forward pass.
#[derive(Debug, Clone)]
pub struct LayerCache {
    pub input: Tensor,
    /// Kept for activations whose derivative is cheapest from the output.
    output: Option<Vec<f64>>,
    /// Weight actually used (differs from the raw weight under spectral norm).
    effective_weight: Option<Vec<f64>>,
    sigma: Option<f64>,
}

pub(crate) struct ParamGrads {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    /// He-normal weights, zero biases.
    pub fn init(spec: LayerSpec, rng: &mut impl Rng) -> Self {
        let (weight, bias) = match spec {
            LayerSpec::Dense { inputs, outputs } => (
                Some(he_normal(vec![outputs, inputs], inputs, rng)),
                Some(Tensor::parameter(vec![outputs], vec![0.0; outputs]).unwrap()),
            ),
            LayerSpec::Conv3x3 {
                in_channels,
                out_channels,
            } => (
                Some(he_normal(
                    vec![out_channels, in_channels, 3, 3],
                    in_channels * 9,
                    rng,
                )),
                Some(Tensor::parameter(vec![out_channels], vec![0.0; out_channels]).unwrap()),
            ),
            _ => (None, None),
        };
        Self {
            spec,
            weight,
            bias,
            power: None,
        }
    }

    pub fn spec(&self) -> &LayerSpec {
        &self.spec
    }

    pub fn weight(&self) -> Option<&Tensor> {
        self.weight.as_ref()
    }

    pub fn bias(&self) -> Option<&Tensor> {
        self.bias.as_ref()
    }

    pub fn weight_mut(&mut self) -> Option<&mut Tensor> {
        self.weight.as_mut()
    }

    pub fn bias_mut(&mut self) -> Option<&mut Tensor> {
        self.bias.as_mut()
    }

    pub fn power_iteration(&self) -> Option<&PowerIteration> {
        self.power.as_ref()
    }

    /// Weight matrix as `[rows, cols]`.
    fn matrix_dims(&self) -> Option<(usize, usize)> {
        self.weight
            .as_ref()
            .map(|w| (w.shape()[0], w.len() / w.shape()[0]))
    }

    pub(crate) fn enable_spectral_norm(&mut self, rng: &mut impl Rng) {
        if let Some((rows, cols)) = self.matrix_dims() {
            self.power = Some(PowerIteration::new(rows, cols, rng));
        }
    }

    pub(crate) fn power_iterate(&mut self, iters: usize) {
        if let (Some(p), Some(w)) = (self.power.as_mut(), self.weight.as_ref()) {
            p.iterate(w.data(), iters);
        }
    }

    pub(crate) fn forward(&self, x: &Tensor) -> Result<(Tensor, LayerCache)> {
        let batch = x.batch();
        let sample = &x.shape()[1..];
        let out_sample = self.spec.output_shape(sample)?;
        let mut out_shape = vec![batch];
        out_shape.extend_from_slice(&out_sample);

        let (weight, sigma) = match (&self.weight, &self.power) {
            (Some(w), Some(p)) => {
                let s = p.sigma(w.data());
                (
                    Some(w.data().iter().map(|v| v / s).collect::<Vec<_>>()),
                    Some(s),
                )
            }
            _ => (None, None),
        };
        let w_eff = || -> &[f64] {
            weight
                .as_deref()
                .unwrap_or_else(|| self.weight.as_ref().unwrap().data())
        };

        let mut keep_output = false;
        let data = match self.spec {
            LayerSpec::Dense { inputs, outputs } => {
                dense_forward(x.data(), batch, inputs, outputs, w_eff(), self.bias_data())
            }
            LayerSpec::Conv3x3 {
                in_channels,
                out_channels,
            } => conv3x3_forward(
                x.data(),
                batch,
                in_channels,
                out_channels,
                sample[1],
                sample[2],
                w_eff(),
                self.bias_data(),
            ),
            LayerSpec::Reshape { .. } => x.data().to_vec(),
            LayerSpec::UpsampleNearest2x => {
                upsample_forward(x.data(), batch * sample[0], sample[1], sample[2])
            }
            LayerSpec::AvgPool2x => {
                avgpool_forward(x.data(), batch * sample[0], sample[1], sample[2])
            }
            LayerSpec::LeakyRelu(slope) => x
                .data()
                .iter()
                .map(|&v| if v > 0.0 { v } else { slope * v })
                .collect(),
            LayerSpec::Relu => x.data().iter().map(|&v| v.max(0.0)).collect(),
            LayerSpec::Tanh => {
                keep_output = true;
                x.data().iter().map(|v| v.tanh()).collect()
            }
            LayerSpec::Sigmoid => {
                keep_output = true;
                x.data().iter().map(|&v| sigmoid(v)).collect()
            }
        };
        let out = Tensor::new(out_shape, data)?;
        let cache = LayerCache {
            input: x.clone(),
            output: keep_output.then(|| out.data().to_vec()),
            effective_weight: weight,
            sigma,
        };
        Ok((out, cache))
    }

    fn bias_data(&self) -> &[f64] {
        self.bias.as_ref().map(|b| b.data()).unwrap_or(&[])
    }

    /// Input gradient, plus parameter gradients when `want_params` is set.
    pub(crate) fn backward(
        &self,
        cache: &LayerCache,
        grad_out: &Tensor,
        want_params: bool,
    ) -> Result<(Tensor, Option<ParamGrads>)> {
        let x = &cache.input;
        let batch = x.batch();
        let sample = &x.shape()[1..];
        let g = grad_out.data();
        let w_eff = || -> &[f64] {
            cache
                .effective_weight
                .as_deref()
                .unwrap_or_else(|| self.weight.as_ref().unwrap().data())
        };
        let mut params = None;
        let gx = match self.spec {
            LayerSpec::Dense { inputs, outputs } => {
                let (gx, gw, gb) =
                    dense_backward(x.data(), g, batch, inputs, outputs, w_eff(), want_params);
                if want_params {
                    params = Some(ParamGrads {
                        weight: gw,
                        bias: gb,
                    });
                }
                gx
            }
            LayerSpec::Conv3x3 {
                in_channels,
                out_channels,
            } => {
                let (gx, gw, gb) = conv3x3_backward(
                    x.data(),
                    g,
                    batch,
                    in_channels,
                    out_channels,
                    sample[1],
                    sample[2],
                    w_eff(),
                    want_params,
                );
                if want_params {
                    params = Some(ParamGrads {
                        weight: gw,
                        bias: gb,
                    });
                }
                gx
            }
            LayerSpec::Reshape { .. } => g.to_vec(),
            LayerSpec::UpsampleNearest2x => {
                upsample_backward(g, batch * sample[0], sample[1], sample[2])
            }
            LayerSpec::AvgPool2x => avgpool_backward(g, batch * sample[0], sample[1], sample[2]),
            LayerSpec::LeakyRelu(slope) => x
                .data()
                .iter()
                .zip(g)
                .map(|(&v, &gi)| if v > 0.0 { gi } else { slope * gi })
                .collect(),
            LayerSpec::Relu => x
                .data()
                .iter()
                .zip(g)
                .map(|(&v, &gi)| if v > 0.0 { gi } else { 0.0 })
                .collect(),
            LayerSpec::Tanh => cache
                .output
                .as_ref()
                .unwrap()
                .iter()
                .zip(g)
                .map(|(&y, &gi)| gi * (1.0 - y * y))
                .collect(),
            LayerSpec::Sigmoid => cache
                .output
                .as_ref()
                .unwrap()
                .iter()
                .zip(g)
                .map(|(&y, &gi)| gi * y * (1.0 - y))
                .collect(),
        };

        // d/dW of W / (u^T W v) with u, v held fixed.
        if let (Some(pg), Some(sigma), Some(p), Some(w_bar)) = (
            params.as_mut(),
            cache.sigma,
            self.power.as_ref(),
            cache.effective_weight.as_ref(),
        ) {
            let inner: f64 = pg.weight.iter().zip(w_bar).map(|(a, b)| a * b).sum();
            let cols = p.cols();
            for (idx, gw) in pg.weight.iter_mut().enumerate() {
                let (r, c) = (idx / cols, idx % cols);
                *gw = (*gw - inner * p.u[r] * p.v[c]) / sigma;
            }
        }
        Ok((Tensor::new(x.shape().to_vec(), gx)?, params))
    }
}

fn he_normal(shape: Vec<usize>, fan_in: usize, rng: &mut impl Rng) -> Tensor {
    let std = (2.0 / fan_in as f64).sqrt();
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| std * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Tensor::parameter(shape, data).unwrap()
}

pub(crate) fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

fn dense_forward(
    x: &[f64],
    batch: usize,
    inputs: usize,
    outputs: usize,
    w: &[f64],
    b: &[f64],
) -> Vec<f64> {
    let mut y = Vec::with_capacity(batch * outputs);
    for xb in x.chunks_exact(inputs).take(batch) {
        for o in 0..outputs {
            let row = &w[o * inputs..(o + 1) * inputs];
            y.push(b[o] + row.iter().zip(xb).map(|(a, c)| a * c).sum::<f64>());
        }
    }
    y
}

fn dense_backward(
    x: &[f64],
    g: &[f64],
    batch: usize,
    inputs: usize,
    outputs: usize,
    w: &[f64],
    want_params: bool,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut gx = vec![0.0; batch * inputs];
    let mut gw = if want_params {
        vec![0.0; outputs * inputs]
    } else {
        Vec::new()
    };
    let mut gb = if want_params {
        vec![0.0; outputs]
    } else {
        Vec::new()
    };
    for n in 0..batch {
        let xb = &x[n * inputs..(n + 1) * inputs];
        let gxb = &mut gx[n * inputs..(n + 1) * inputs];
        for o in 0..outputs {
            let go = g[n * outputs + o];
            if go == 0.0 {
                continue;
            }
            let row = &w[o * inputs..(o + 1) * inputs];
            for (a, &wv) in gxb.iter_mut().zip(row) {
                *a += go * wv;
            }
            if want_params {
                gb[o] += go;
                for (a, &xv) in gw[o * inputs..(o + 1) * inputs].iter_mut().zip(xb) {
                    *a += go * xv;
                }
            }
        }
    }
    (gx, gw, gb)
}

/// Valid output index range along one axis for kernel tap `k` in `0..3`.
#[inline]
fn tap_range(k: usize, n: usize) -> (usize, usize) {
    let lo = if k == 0 { 1 } else { 0 };
    let hi = if k == 2 { n - 1 } else { n };
    (lo, hi.max(lo))
}

/// Unfolds one `[ic, h, w]` sample into `[ic * 9, h * w]` patches (zero padded).
fn im2col(x: &[f64], ic: usize, h: usize, w: usize, cols: &mut [f64]) {
    let plane = h * w;
    cols.fill(0.0);
    for c in 0..ic {
        let xc = &x[c * plane..(c + 1) * plane];
        for ky in 0..3 {
            let (r0, r1) = tap_range(ky, h);
            for kx in 0..3 {
                let (c0, c1) = tap_range(kx, w);
                let row = &mut cols[((c * 3 + ky) * 3 + kx) * plane..][..plane];
                for r in r0..r1 {
                    let ir = r + ky - 1;
                    row[r * w + c0..r * w + c1]
                        .copy_from_slice(&xc[ir * w + c0 + kx - 1..ir * w + c1 + kx - 1]);
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: accumulates patches back into `gx`.
fn col2im(cols: &[f64], ic: usize, h: usize, w: usize, gx: &mut [f64]) {
    let plane = h * w;
    for c in 0..ic {
        let gc = &mut gx[c * plane..(c + 1) * plane];
        for ky in 0..3 {
            let (r0, r1) = tap_range(ky, h);
            for kx in 0..3 {
                let (c0, c1) = tap_range(kx, w);
                let row = &cols[((c * 3 + ky) * 3 + kx) * plane..][..plane];
                for r in r0..r1 {
                    let ir = r + ky - 1;
                    let dst = &mut gc[ir * w + c0 + kx - 1..ir * w + c1 + kx - 1];
                    for (a, &b) in dst.iter_mut().zip(&row[r * w + c0..r * w + c1]) {
                        *a += b;
                    }
                }
            }
        }
    }
}

/// `c = alpha * a * b + beta * c` for dense operands given by (row, col) strides.
#[allow(clippy::too_many_arguments)]
fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: (&[f64], isize, isize),
    b: (&[f64], isize, isize),
    beta: f64,
    c: (&mut [f64], isize, isize),
) {
    let extent = |rows: usize, cols: usize, rs: isize, cs: isize| {
        if rows == 0 || cols == 0 {
            0
        } else {
            (rows - 1) * rs as usize + (cols - 1) * cs as usize + 1
        }
    };
    assert!(a.0.len() >= extent(m, k, a.1, a.2));
    assert!(b.0.len() >= extent(k, n, b.1, b.2));
    assert!(c.0.len() >= extent(m, n, c.1, c.2));
    // SAFETY: the asserts above keep every strided access inside the slices.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.0.as_ptr(),
            a.1,
            a.2,
            b.0.as_ptr(),
            b.1,
            b.2,
            beta,
            c.0.as_mut_ptr(),
            c.1,
            c.2,
        );
    }
}

#[allow(clippy::too_many_arguments)]
fn conv3x3_forward(
    x: &[f64],
    batch: usize,
    ic: usize,
    oc: usize,
    h: usize,
    w: usize,
    weight: &[f64],
    bias: &[f64],
) -> Vec<f64> {
    let plane = h * w;
    let k = ic * 9;
    let mut y = vec![0.0; batch * oc * plane];
    let mut cols = vec![0.0; k * plane];
    for n in 0..batch {
        im2col(
            &x[n * ic * plane..(n + 1) * ic * plane],
            ic,
            h,
            w,
            &mut cols,
        );
        let yn = &mut y[n * oc * plane..(n + 1) * oc * plane];
        for (o, row) in yn.chunks_exact_mut(plane).enumerate() {
            row.fill(bias[o]);
        }
        gemm(
            oc,
            k,
            plane,
            (weight, k as isize, 1),
            (&cols, plane as isize, 1),
            1.0,
            (yn, plane as isize, 1),
        );
    }
    y
}

#[allow(clippy::too_many_arguments)]
fn conv3x3_backward(
    x: &[f64],
    g: &[f64],
    batch: usize,
    ic: usize,
    oc: usize,
    h: usize,
    w: usize,
    weight: &[f64],
    want_params: bool,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let plane = h * w;
    let k = ic * 9;
    let mut gx = vec![0.0; batch * ic * plane];
    let mut gw = if want_params {
        vec![0.0; oc * k]
    } else {
        Vec::new()
    };
    let mut gb = if want_params {
        vec![0.0; oc]
    } else {
        Vec::new()
    };
    let mut cols = vec![0.0; k * plane];
    let mut gcols = vec![0.0; k * plane];
    for n in 0..batch {
        let gn = &g[n * oc * plane..(n + 1) * oc * plane];
        if want_params {
            for (o, row) in gn.chunks_exact(plane).enumerate() {
                gb[o] += row.iter().sum::<f64>();
            }
            im2col(
                &x[n * ic * plane..(n + 1) * ic * plane],
                ic,
                h,
                w,
                &mut cols,
            );
            // gw[oc, k] += g_n[oc, plane] * cols^T[plane, k]
            gemm(
                oc,
                plane,
                k,
                (gn, plane as isize, 1),
                (&cols, 1, plane as isize),
                1.0,
                (&mut gw, k as isize, 1),
            );
        }
        // gcols[k, plane] = w^T[k, oc] * g_n[oc, plane]
        gemm(
            k,
            oc,
            plane,
            (weight, 1, k as isize),
            (gn, plane as isize, 1),
            0.0,
            (&mut gcols, plane as isize, 1),
        );
        col2im(
            &gcols,
            ic,
            h,
            w,
            &mut gx[n * ic * plane..(n + 1) * ic * plane],
        );
    }
    (gx, gw, gb)
}

fn upsample_forward(x: &[f64], planes: usize, h: usize, w: usize) -> Vec<f64> {
    let (oh, ow) = (2 * h, 2 * w);
    let mut y = vec![0.0; planes * oh * ow];
    for p in 0..planes {
        for i in 0..oh {
            for j in 0..ow {
                y[(p * oh + i) * ow + j] = x[(p * h + i / 2) * w + j / 2];
            }
        }
    }
    y
}

fn upsample_backward(g: &[f64], planes: usize, h: usize, w: usize) -> Vec<f64> {
    let (oh, ow) = (2 * h, 2 * w);
    let mut gx = vec![0.0; planes * h * w];
    for p in 0..planes {
        for i in 0..oh {
            for j in 0..ow {
                gx[(p * h + i / 2) * w + j / 2] += g[(p * oh + i) * ow + j];
            }
        }
    }
    gx
}

fn avgpool_forward(x: &[f64], planes: usize, h: usize, w: usize) -> Vec<f64> {
    let (oh, ow) = (h / 2, w / 2);
    let mut y = vec![0.0; planes * oh * ow];
    for p in 0..planes {
        for i in 0..oh {
            for j in 0..ow {
                let at = |a: usize, b: usize| x[(p * h + 2 * i + a) * w + 2 * j + b];
                y[(p * oh + i) * ow + j] = 0.25 * (at(0, 0) + at(0, 1) + at(1, 0) + at(1, 1));
            }
        }
    }
    y
}

fn avgpool_backward(g: &[f64], planes: usize, h: usize, w: usize) -> Vec<f64> {
    let (oh, ow) = (h / 2, w / 2);
    let mut gx = vec![0.0; planes * h * w];
    for p in 0..planes {
        for i in 0..h {
            for j in 0..w {
                gx[(p * h + i) * w + j] = 0.25 * g[(p * oh + i / 2) * ow + j / 2];
            }
        }
    }
    gx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings_roundtrip() {
        let specs = vec![
            LayerSpec::Dense {
                inputs: 16,
                outputs: 8,
            },
            LayerSpec::Conv3x3 {
                in_channels: 1,
                out_channels: 4,
            },
            LayerSpec::Reshape {
                channels: 2,
                height: 4,
                width: 4,
            },
            LayerSpec::UpsampleNearest2x,
            LayerSpec::AvgPool2x,
            LayerSpec::LeakyRelu(0.2),
            LayerSpec::Relu,
            LayerSpec::Tanh,
            LayerSpec::Sigmoid,
        ];
        let s = LayerSpec::format_list(&specs);
        assert_eq!(LayerSpec::parse_list(&s).unwrap(), specs);
        assert!("dense:3".parse::<LayerSpec>().is_err());
        assert!("conv5x5:1:1".parse::<LayerSpec>().is_err());
        assert!("dense:0:1".parse::<LayerSpec>().is_err());
    }

    #[test]
    fn output_shapes() {
        let conv = LayerSpec::Conv3x3 {
            in_channels: 2,
            out_channels: 5,
        };
        assert_eq!(conv.output_shape(&[2, 6, 4]).unwrap(), vec![5, 6, 4]);
        assert!(conv.output_shape(&[3, 6, 4]).is_err());
        assert!(LayerSpec::AvgPool2x.output_shape(&[1, 3, 4]).is_err());
        assert_eq!(
            LayerSpec::UpsampleNearest2x
                .output_shape(&[1, 3, 4])
                .unwrap(),
            vec![1, 6, 8]
        );
    }

    #[test]
    fn conv_single_tap_shifts() {
        // Only the (0, 0) tap set: output(y, x) = input(y - 1, x - 1).
        let mut weight = vec![0.0; 9];
        weight[0] = 1.0;
        let x: Vec<f64> = (0..12).map(|v| v as f64).collect();
        let y = conv3x3_forward(&x, 1, 1, 1, 3, 4, &weight, &[0.5]);
        assert_eq!(y[0], 0.5);
        assert_eq!(y[5], 0.5 + x[0]);
        assert_eq!(y[11], 0.5 + x[6]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }
}
