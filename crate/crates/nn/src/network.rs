use rand::Rng;

use crate::checkpoint::Checkpoint;
use crate::error::{NnError, Result};
use crate::layer::{Layer, LayerCache, LayerSpec};
use crate::spectral_norm::PowerIteration;
use crate::tensor::Tensor;

/// Sequential network over a fixed per-sample input shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_shape: Vec<usize>,
    layers: Vec<Layer>,
}

/// Forward record consumed by [`Network::backward`].
#[derive(Debug, Clone)]
pub struct Tape {
    entries: Vec<LayerCache>,
    output_shape: Vec<usize>,
}

impl Tape {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Input seen by layer `index` during the recorded forward pass.
    pub fn layer_input(&self, index: usize) -> &Tensor {
        &self.entries[index].input
    }
}

impl Network {
    /// He-normal initialisation; fails if adjacent layer shapes disagree.
    pub fn new(input_shape: &[usize], specs: &[LayerSpec], rng: &mut impl Rng) -> Result<Self> {
        let mut shape = input_shape.to_vec();
        for spec in specs {
            shape = spec.output_shape(&shape)?;
        }
        Ok(Self {
            input_shape: input_shape.to_vec(),
            layers: specs.iter().map(|&s| Layer::init(s, rng)).collect(),
        })
    }

    pub fn identity(input_shape: &[usize]) -> Self {
        Self {
            input_shape: input_shape.to_vec(),
            layers: Vec::new(),
        }
    }

    /// Attaches power-iteration state to every weighted layer.
    pub fn with_spectral_norm(mut self, rng: &mut impl Rng) -> Self {
        for layer in &mut self.layers {
            layer.enable_spectral_norm(rng);
        }
        self
    }

    pub fn spectral_norm_enabled(&self) -> bool {
        self.layers.iter().any(|l| l.power.is_some())
    }

    pub fn power_iterate(&mut self, iters: usize) {
        for layer in &mut self.layers {
            layer.power_iterate(iters);
        }
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn output_shape(&self) -> Vec<usize> {
        let mut shape = self.input_shape.clone();
        for layer in &self.layers {
            shape = layer
                .spec
                .output_shape(&shape)
                .expect("validated at construction");
        }
        shape
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    fn check_input(&self, input: &Tensor) -> Result<()> {
        if input.shape().len() < 2 || input.shape()[1..] != self.input_shape[..] {
            return Err(NnError::Shape(format!(
                "network expects [batch, {:?}], got {:?}",
                self.input_shape,
                input.shape()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, input: &Tensor) -> Result<(Tensor, Tape)> {
        self.check_input(input)?;
        let mut entries = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let (y, cache) = layer.forward(&x)?;
            if !y.is_finite() {
                return Err(NnError::NonFinite {
                    layer: i,
                    spec: layer.spec.to_string(),
                });
            }
            entries.push(cache);
            x = y;
        }
        let output_shape = x.shape().to_vec();
        Ok((
            x,
            Tape {
                entries,
                output_shape,
            },
        ))
    }

    /// Forward pass without keeping a tape.
    pub fn predict(&self, input: &Tensor) -> Result<Tensor> {
        self.check_input(input)?;
        let mut x = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            x = layer.forward(&x)?.0;
            if !x.is_finite() {
                return Err(NnError::NonFinite {
                    layer: i,
                    spec: layer.spec.to_string(),
                });
            }
        }
        Ok(x)
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, tape: &Tape, output_grad: &Tensor) -> Result<Tensor> {
        self.check_tape(tape, output_grad)?;
        let mut g = output_grad.clone();
        for i in (0..self.layers.len()).rev() {
            let (gx, params) = self.layers[i].backward(&tape.entries[i], &g, true)?;
            if let Some(p) = params {
                let layer = &mut self.layers[i];
                if let Some(w) = layer.weight.as_mut() {
                    w.accumulate_grad(&p.weight);
                }
                if let Some(b) = layer.bias.as_mut() {
                    b.accumulate_grad(&p.bias);
                }
            }
            g = gx;
        }
        Ok(g)
    }

    /// Input gradient only; parameter gradients are left untouched.
    pub fn input_gradient(&self, tape: &Tape, output_grad: &Tensor) -> Result<Tensor> {
        self.check_tape(tape, output_grad)?;
        let mut g = output_grad.clone();
        for i in (0..self.layers.len()).rev() {
            g = self.layers[i].backward(&tape.entries[i], &g, false)?.0;
        }
        Ok(g)
    }

    fn check_tape(&self, tape: &Tape, output_grad: &Tensor) -> Result<()> {
        if tape.entries.len() != self.layers.len() {
            return Err(NnError::Shape(format!(
                "tape has {} entries for {} layers",
                tape.entries.len(),
                self.layers.len()
            )));
        }
        if output_grad.shape() != tape.output_shape.as_slice() {
            return Err(NnError::Shape(format!(
                "output gradient {:?} does not match output {:?}",
                output_grad.shape(),
                tape.output_shape
            )));
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        for p in self.parameters_mut() {
            p.zero_grad();
        }
    }

    /// Weights and biases in layer order (weight before bias).
    pub fn parameters(&self) -> Vec<&Tensor> {
        self.layers
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()))
            .collect()
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weight.iter_mut().chain(l.bias.iter_mut()))
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|p| p.len()).sum()
    }

    /// Concatenated parameter values, in [`Network::parameters`] order.
    pub fn flat_parameters(&self) -> Vec<f64> {
        self.parameters()
            .iter()
            .flat_map(|p| p.data().iter().copied())
            .collect()
    }

    pub fn flat_gradients(&self) -> Vec<f64> {
        self.parameters()
            .iter()
            .flat_map(|p| p.grad().unwrap_or(&[]).iter().copied())
            .collect()
    }

    pub fn set_flat_parameters(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(NnError::Shape(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                values.len()
            )));
        }
        let mut offset = 0;
        for p in self.parameters_mut() {
            let n = p.len();
            p.data_mut().copy_from_slice(&values[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    pub fn write_checkpoint(&self, prefix: &str, ckpt: &mut Checkpoint) {
        ckpt.set_meta(
            format!("{prefix}.layers"),
            LayerSpec::format_list(&self.specs()),
        );
        ckpt.set_meta(
            format!("{prefix}.input_shape"),
            self.input_shape
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        ckpt.set_meta(
            format!("{prefix}.spectral_norm"),
            self.spectral_norm_enabled().to_string(),
        );
        for (i, layer) in self.layers.iter().enumerate() {
            if let Some(w) = &layer.weight {
                ckpt.insert(
                    format!("{prefix}.{i}.weight"),
                    w.shape().to_vec(),
                    w.data().to_vec(),
                );
            }
            if let Some(b) = &layer.bias {
                ckpt.insert(
                    format!("{prefix}.{i}.bias"),
                    b.shape().to_vec(),
                    b.data().to_vec(),
                );
            }
            if let Some(p) = &layer.power {
                ckpt.insert(format!("{prefix}.{i}.sn_u"), vec![p.u.len()], p.u.clone());
                ckpt.insert(format!("{prefix}.{i}.sn_v"), vec![p.v.len()], p.v.clone());
            }
        }
    }

    pub fn read_checkpoint(prefix: &str, ckpt: &Checkpoint) -> Result<Self> {
        let meta = |key: &str| -> Result<&str> {
            ckpt.meta(&format!("{prefix}.{key}"))
                .ok_or_else(|| NnError::Checkpoint(format!("missing meta {prefix}.{key}")))
        };
        let specs = LayerSpec::parse_list(meta("layers")?)?;
        let input_shape = meta("input_shape")?
            .split(',')
            .map(|d| {
                d.trim()
                    .parse::<usize>()
                    .map_err(|_| NnError::Checkpoint(format!("bad input shape `{d}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let sn = meta("spectral_norm")? == "true";

        let mut shape = input_shape.clone();
        let mut layers = Vec::with_capacity(specs.len());
        for (i, spec) in specs.into_iter().enumerate() {
            shape = spec.output_shape(&shape)?;
            let mut layer = Layer {
                spec,
                weight: None,
                bias: None,
                power: None,
            };
            if spec.has_parameters() {
                let param = |name: &str| -> Result<Tensor> {
                    let key = format!("{prefix}.{i}.{name}");
                    let (s, d) = ckpt
                        .get(&key)
                        .ok_or_else(|| NnError::Checkpoint(format!("missing array {key}")))?;
                    Tensor::parameter(s.to_vec(), d.to_vec())
                };
                let weight = param("weight")?;
                let bias = param("bias")?;
                let expected = Layer::init_shapes(&spec);
                if weight.shape() != expected.0.as_slice() || bias.shape() != expected.1.as_slice()
                {
                    return Err(NnError::Checkpoint(format!(
                        "layer {i} ({spec}) has parameter shapes {:?}/{:?}",
                        weight.shape(),
                        bias.shape()
                    )));
                }
                if sn {
                    let u = param("sn_u")?.into_data();
                    let v = param("sn_v")?.into_data();
                    if u.len() != weight.shape()[0] || u.len() * v.len() != weight.len() {
                        return Err(NnError::Checkpoint(format!(
                            "layer {i} spectral-norm vectors do not match weight"
                        )));
                    }
                    layer.power = Some(PowerIteration { u, v });
                }
                layer.weight = Some(weight);
                layer.bias = Some(bias);
            }
            layers.push(layer);
        }
        Ok(Self {
            input_shape,
            layers,
        })
    }
}

impl Layer {
    fn init_shapes(spec: &LayerSpec) -> (Vec<usize>, Vec<usize>) {
        match *spec {
            LayerSpec::Dense { inputs, outputs } => (vec![outputs, inputs], vec![outputs]),
            LayerSpec::Conv3x3 {
                in_channels,
                out_channels,
            } => (vec![out_channels, in_channels, 3, 3], vec![out_channels]),
            _ => (Vec::new(), Vec::new()),
        }
    }
}
