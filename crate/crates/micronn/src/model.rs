use rand::Rng;

use crate::error::NnError;
use crate::layers::{
    relu_backward, relu_forward, sigmoid_backward, sigmoid_forward, BatchNorm2d, BnCache, Conv2d,
    Dense, Layer,
};
use crate::loss::bce_loss;
use crate::optim::Adam;
use crate::tensor::Tensor;

/// Shape of the canonical decoder network.
///
/// A pointwise conv maps `input_channels` to `widths[0]`, then each further
/// width adds a `kernel`×`kernel` conv with `stride`. Every conv is followed
/// by batch norm and ReLU. A dense layer and a sigmoid produce `outputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchConfig {
    pub input_channels: usize,
    pub input_side: usize,
    pub widths: Vec<usize>,
    pub kernel: usize,
    pub stride: usize,
    pub outputs: usize,
}

impl Default for ArchConfig {
    fn default() -> Self {
        ArchConfig {
            input_channels: 3,
            input_side: 96,
            widths: vec![16, 32, 32, 64, 64],
            kernel: 3,
            stride: 2,
            outputs: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics in batch norm; running moments are updated.
    Train,
    /// Running moments in batch norm.
    Infer,
}

/// Parameter gradients laid out like [`Layer::params`] for each layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub per_layer: Vec<Vec<Tensor>>,
}

impl Gradients {
    pub fn l2_norm(&self) -> f64 {
        self.per_layer
            .iter()
            .flatten()
            .flat_map(|t| t.data())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Output of every layer for one forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    pub activations: Vec<Tensor>,
}

enum Cache {
    Conv(Tensor),
    Bn(BnCache),
    Relu(Tensor),
    Dense(Tensor),
    Sigmoid(Tensor),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    input: [usize; 3],
    outputs: usize,
    layers: Vec<Layer>,
}

impl Model {
    pub fn from_arch(arch: &ArchConfig, rng: &mut impl Rng) -> Result<Model, NnError> {
        let Some((&first, rest)) = arch.widths.split_first() else {
            return Err(NnError::Architecture("at least one width is required".into()));
        };
        if arch.outputs == 0 || arch.input_side == 0 || arch.input_channels == 0 {
            return Err(NnError::Architecture("zero-sized input or output".into()));
        }
        let mut layers = vec![
            Layer::Conv(Conv2d::new(arch.input_channels, first, 1, 1, rng)),
            Layer::BatchNorm(BatchNorm2d::new(first)),
            Layer::Relu,
        ];
        let mut ch = first;
        let mut side = arch.input_side;
        for &w in rest {
            let conv = Conv2d::new(ch, w, arch.kernel, arch.stride, rng);
            side = conv.output_hw(side, side).0;
            layers.push(Layer::Conv(conv));
            layers.push(Layer::BatchNorm(BatchNorm2d::new(w)));
            layers.push(Layer::Relu);
            ch = w;
        }
        layers.push(Layer::Dense(Dense::new(ch * side * side, arch.outputs, rng)));
        layers.push(Layer::Sigmoid);
        Model::from_layers([arch.input_channels, arch.input_side, arch.input_side], layers)
    }

    /// Checks that shapes chain from `input` (C, H, W) and that the network
    /// ends in a sigmoid.
    pub fn from_layers(input: [usize; 3], layers: Vec<Layer>) -> Result<Model, NnError> {
        if !matches!(layers.last(), Some(Layer::Sigmoid)) {
            return Err(NnError::Architecture("final layer must be a sigmoid".into()));
        }
        let mut shape = input.to_vec();
        for (i, layer) in layers.iter().enumerate() {
            for p in layer.params() {
                if !p.all_finite() {
                    return Err(NnError::Architecture(format!("layer {i} has non-finite parameters")));
                }
            }
            shape = layer
                .output_shape(&shape)
                .map_err(|e| NnError::Architecture(format!("layer {i}: {e}")))?;
        }
        if shape.len() != 1 {
            return Err(NnError::Architecture(format!("output is not a vector: {shape:?}")));
        }
        Ok(Model {
            input,
            outputs: shape[0],
            layers,
        })
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.input
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Direct parameter access. Shapes must not be changed.
    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().flat_map(|l| l.params()).map(|t| t.len()).sum()
    }

    fn check_input(&self, x: &Tensor) -> Result<usize, NnError> {
        let s = x.shape();
        if s.len() != 4 || s[1..] != self.input || s[0] == 0 {
            let mut expected = vec![0];
            expected.extend_from_slice(&self.input);
            return Err(NnError::Shape {
                context: "model input",
                expected,
                actual: s.to_vec(),
            });
        }
        Ok(s[0])
    }

    fn run(&self, x: &Tensor, mode: Mode, mut tape: Option<&mut Vec<Cache>>, mut trace: Option<&mut Vec<Tensor>>) -> Result<Tensor, NnError> {
        self.check_input(x)?;
        let mut cur = x.clone();
        for (index, layer) in self.layers.iter().enumerate() {
            let next = match layer {
                Layer::Conv(c) => {
                    let y = c.forward(&cur)?;
                    if let Some(t) = tape.as_deref_mut() {
                        t.push(Cache::Conv(cur));
                    }
                    y
                }
                Layer::BatchNorm(b) => match mode {
                    Mode::Train => {
                        let (y, cache) = b.forward_batch(&cur)?;
                        if let Some(t) = tape.as_deref_mut() {
                            t.push(Cache::Bn(cache));
                        }
                        y
                    }
                    Mode::Infer => b.forward_infer(&cur)?,
                },
                Layer::Relu => {
                    let y = relu_forward(&cur);
                    if let Some(t) = tape.as_deref_mut() {
                        t.push(Cache::Relu(y.clone()));
                    }
                    y
                }
                Layer::Dense(d) => {
                    let y = d.forward(&cur)?;
                    if let Some(t) = tape.as_deref_mut() {
                        t.push(Cache::Dense(cur));
                    }
                    y
                }
                Layer::Sigmoid => {
                    let y = sigmoid_forward(&cur);
                    if let Some(t) = tape.as_deref_mut() {
                        t.push(Cache::Sigmoid(y.clone()));
                    }
                    y
                }
            };
            if !next.all_finite() {
                return Err(NnError::NonFinite {
                    index,
                    kind: layer.kind().name(),
                });
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(next.clone());
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Inference on `[N, C, H, W]`, returning `[N, outputs]` probabilities.
    pub fn predict(&self, x: &Tensor) -> Result<Tensor, NnError> {
        self.run(x, Mode::Infer, None, None)
    }

    /// Forward pass; in [`Mode::Train`] batch-norm running moments are updated.
    pub fn forward(&mut self, x: &Tensor, mode: Mode) -> Result<Tensor, NnError> {
        match mode {
            Mode::Infer => self.predict(x),
            Mode::Train => {
                let mut tape = Vec::new();
                let y = self.run(x, mode, Some(&mut tape), None)?;
                self.fold_running(&tape, x.shape()[0]);
                Ok(y)
            }
        }
    }

    /// Every layer's output, without touching running moments.
    pub fn trace(&self, x: &Tensor, mode: Mode) -> Result<Trace, NnError> {
        let mut activations = Vec::with_capacity(self.layers.len());
        self.run(x, mode, None, Some(&mut activations))?;
        Ok(Trace { activations })
    }

    fn fold_running(&mut self, tape: &[Cache], batch: usize) {
        let mut caches = tape.iter().filter_map(|c| match c {
            Cache::Bn(b) => Some(b),
            _ => None,
        });
        for layer in &mut self.layers {
            if let Layer::BatchNorm(bn) = layer {
                if let Some(cache) = caches.next() {
                    let spatial = cache.xhat.len() / (batch * bn.channels);
                    bn.update_running(cache, batch * spatial);
                }
            }
        }
    }

    fn tape_backward(&self, x: &Tensor, targets: &Tensor) -> Result<(f64, Gradients, Vec<Cache>), NnError> {
        let mut tape = Vec::with_capacity(self.layers.len());
        let p = self.run(x, Mode::Train, Some(&mut tape), None)?;
        let (loss, mut grad) = bce_loss(&p, targets)?;
        if !loss.is_finite() {
            return Err(NnError::NonFinite {
                index: self.layers.len() - 1,
                kind: "loss",
            });
        }
        let mut per_layer = vec![Vec::new(); self.layers.len()];
        for (i, (layer, cache)) in self.layers.iter().zip(&tape).enumerate().rev() {
            grad = match (layer, cache) {
                (Layer::Conv(c), Cache::Conv(input)) => {
                    let (dx, dw, db) = c.backward(input, &grad)?;
                    per_layer[i] = vec![dw, db];
                    dx
                }
                (Layer::BatchNorm(b), Cache::Bn(cache)) => {
                    let (dx, dg, db) = b.backward(cache, &grad);
                    per_layer[i] = vec![dg, db];
                    dx
                }
                (Layer::Relu, Cache::Relu(out)) => relu_backward(out, &grad),
                (Layer::Dense(d), Cache::Dense(input)) => {
                    let (dx, dw, db) = d.backward(input, &grad)?;
                    per_layer[i] = vec![dw, db];
                    dx
                }
                (Layer::Sigmoid, Cache::Sigmoid(out)) => sigmoid_backward(out, &grad),
                _ => unreachable!("tape entries follow layer order"),
            };
            if !grad.all_finite() {
                return Err(NnError::NonFinite {
                    index: i,
                    kind: layer.kind().name(),
                });
            }
        }
        Ok((loss, Gradients { per_layer }, tape))
    }

    /// Mean BCE of a train-mode forward pass and the gradient of every
    /// parameter. Running moments are left alone.
    pub fn backward(&self, x: &Tensor, targets: &Tensor) -> Result<(f64, Gradients), NnError> {
        let (loss, grads, _) = self.tape_backward(x, targets)?;
        Ok((loss, grads))
    }

    /// One optimization step: forward, backward, running-moment update and
    /// an optimizer update. Returns the batch loss and the predictions.
    pub fn train_step(&mut self, x: &Tensor, targets: &Tensor, opt: &mut Adam) -> Result<(f64, Tensor), NnError> {
        let (loss, grads, tape) = self.tape_backward(x, targets)?;
        self.fold_running(&tape, x.shape()[0]);
        let preds = match tape.last() {
            Some(Cache::Sigmoid(p)) => p.clone(),
            _ => unreachable!("model ends in a sigmoid"),
        };
        opt.step(self, &grads)?;
        Ok((loss, preds))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small() -> ArchConfig {
        ArchConfig {
            input_side: 12,
            widths: vec![4, 6, 8],
            outputs: 5,
            ..ArchConfig::default()
        }
    }

    #[test]
    fn canonical_model_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = Model::from_arch(&ArchConfig::default(), &mut rng).unwrap();
        // 96 → 48 → 24 → 12 → 6, 64 channels into the dense head.
        match &m.layers()[m.layers().len() - 2] {
            Layer::Dense(d) => assert_eq!(d.inputs, 64 * 6 * 6),
            other => panic!("{other:?}"),
        }
        assert_eq!(m.layers().iter().filter(|l| matches!(l, Layer::Conv(_))).count(), 5);
        assert_eq!(m.outputs(), 16);
    }

    #[test]
    fn outputs_strictly_inside_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Model::from_arch(&small(), &mut rng).unwrap();
        let x = Tensor::randn(&[3, 3, 12, 12], 5.0, &mut rng);
        let p = m.predict(&x).unwrap();
        assert!(p.data().iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn forward_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = Model::from_arch(&small(), &mut rng).unwrap();
        let x = Tensor::randn(&[2, 3, 12, 12], 1.0, &mut rng);
        assert_eq!(m.predict(&x).unwrap(), m.predict(&x).unwrap());
        let t1 = m.trace(&x, Mode::Train).unwrap();
        let t2 = m.trace(&x, Mode::Train).unwrap();
        assert_eq!(t1.activations, t2.activations);
    }

    #[test]
    fn rejects_missing_sigmoid_and_bad_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let conv = Layer::Conv(Conv2d::new(3, 2, 3, 1, &mut rng));
        assert!(Model::from_layers([3, 4, 4], vec![conv.clone()]).is_err());
        let dense = Layer::Dense(Dense::new(10, 2, &mut rng));
        assert!(Model::from_layers([3, 4, 4], vec![conv, dense, Layer::Sigmoid]).is_err());
    }

    #[test]
    fn wrong_input_shape_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = Model::from_arch(&small(), &mut rng).unwrap();
        assert!(m.predict(&Tensor::zeros(&[1, 3, 10, 12])).is_err());
    }

    #[test]
    fn nan_input_names_the_first_layer() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Model::from_arch(&small(), &mut rng).unwrap();
        let mut x = Tensor::zeros(&[2, 3, 12, 12]);
        x.data_mut()[7] = f64::NAN;
        let t = Tensor::zeros(&[2, 5]);
        match m.backward(&x, &t) {
            Err(NnError::NonFinite { index, kind }) => {
                assert_eq!(index, 0);
                assert_eq!(kind, "conv2d");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn train_forward_moves_running_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut m = Model::from_arch(&small(), &mut rng).unwrap();
        let before = m.clone();
        let x = Tensor::randn(&[2, 3, 12, 12], 1.0, &mut rng);
        m.forward(&x, Mode::Infer).unwrap();
        assert_eq!(m, before);
        m.forward(&x, Mode::Train).unwrap();
        assert_ne!(m, before);
    }
}
