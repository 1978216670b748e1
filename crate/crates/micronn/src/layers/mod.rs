//! Layer kinds and their parameters.

mod batchnorm;
mod conv;
mod dense;

pub use batchnorm::BatchNorm2d;
pub(crate) use batchnorm::BnCache;
pub use conv::Conv2d;
pub use dense::Dense;

use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Conv,
    BatchNorm,
    Relu,
    Dense,
    Sigmoid,
}

impl LayerKind {
    pub fn name(self) -> &'static str {
        match self {
            LayerKind::Conv => "conv2d",
            LayerKind::BatchNorm => "batchnorm",
            LayerKind::Relu => "relu",
            LayerKind::Dense => "dense",
            LayerKind::Sigmoid => "sigmoid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(Conv2d),
    BatchNorm(BatchNorm2d),
    Relu,
    Dense(Dense),
    Sigmoid,
}

impl Layer {
    pub fn kind(&self) -> LayerKind {
        match self {
            Layer::Conv(_) => LayerKind::Conv,
            Layer::BatchNorm(_) => LayerKind::BatchNorm,
            Layer::Relu => LayerKind::Relu,
            Layer::Dense(_) => LayerKind::Dense,
            Layer::Sigmoid => LayerKind::Sigmoid,
        }
    }

    /// Trainable tensors, in a fixed order matching the gradients.
    pub fn params(&self) -> Vec<&Tensor> {
        match self {
            Layer::Conv(c) => vec![&c.weight, &c.bias],
            Layer::BatchNorm(b) => vec![&b.gamma, &b.beta],
            Layer::Dense(d) => vec![&d.weight, &d.bias],
            Layer::Relu | Layer::Sigmoid => vec![],
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Layer::Conv(c) => vec![&mut c.weight, &mut c.bias],
            Layer::BatchNorm(b) => vec![&mut b.gamma, &mut b.beta],
            Layer::Dense(d) => vec![&mut d.weight, &mut d.bias],
            Layer::Relu | Layer::Sigmoid => vec![],
        }
    }

    /// Output shape for an input of `shape` (batch axis excluded).
    pub fn output_shape(&self, shape: &[usize]) -> Result<Vec<usize>, String> {
        match self {
            Layer::Conv(c) => {
                if shape.len() != 3 || shape[0] != c.in_channels {
                    return Err(format!("conv expects [{}, H, W], got {shape:?}", c.in_channels));
                }
                let (h, w) = c.output_hw(shape[1], shape[2]);
                if h == 0 || w == 0 {
                    return Err(format!("conv output collapses for input {shape:?}"));
                }
                Ok(vec![c.out_channels, h, w])
            }
            Layer::BatchNorm(b) => {
                if shape.first() != Some(&b.channels) {
                    return Err(format!("batchnorm expects {} channels, got {shape:?}", b.channels));
                }
                Ok(shape.to_vec())
            }
            Layer::Dense(d) => {
                let n: usize = shape.iter().product();
                if n != d.inputs {
                    return Err(format!("dense expects {} inputs, got {shape:?}", d.inputs));
                }
                Ok(vec![d.outputs])
            }
            Layer::Relu | Layer::Sigmoid => Ok(shape.to_vec()),
        }
    }
}

pub(crate) fn relu_forward(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    y.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    y
}

pub(crate) fn relu_backward(output: &Tensor, dy: &Tensor) -> Tensor {
    let mut dx = dy.clone();
    for (g, &o) in dx.data_mut().iter_mut().zip(output.data()) {
        if o <= 0.0 {
            *g = 0.0;
        }
    }
    dx
}

pub(crate) fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn sigmoid_forward(x: &Tensor) -> Tensor {
    let mut y = x.clone();
    y.data_mut().iter_mut().for_each(|v| *v = sigmoid(*v));
    y
}

pub(crate) fn sigmoid_backward(output: &Tensor, dy: &Tensor) -> Tensor {
    let mut dx = dy.clone();
    for (g, &p) in dx.data_mut().iter_mut().zip(output.data()) {
        *g *= p * (1.0 - p);
    }
    dx
}
