//! Adam optimizer.

use crate::error::NnError;
use crate::model::{Gradients, Model};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adam {
    config: AdamConfig,
    step: u64,
    m: Vec<Vec<Tensor>>,
    v: Vec<Vec<Tensor>>,
}

impl Adam {
    pub fn new(config: AdamConfig, model: &Model) -> Adam {
        let zeros: Vec<Vec<Tensor>> = model
            .layers()
            .iter()
            .map(|l| l.params().iter().map(|p| Tensor::zeros(p.shape())).collect())
            .collect();
        Adam {
            config,
            step: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn step(&mut self, model: &mut Model, grads: &Gradients) -> Result<(), NnError> {
        if grads.per_layer.len() != model.layers().len() {
            return Err(NnError::Shape {
                context: "adam gradients",
                expected: vec![model.layers().len()],
                actual: vec![grads.per_layer.len()],
            });
        }
        self.step += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let c1 = 1.0 - beta1.powi(self.step as i32);
        let c2 = 1.0 - beta2.powi(self.step as i32);
        for (li, layer) in model.layers_mut().iter_mut().enumerate() {
            for (pi, param) in layer.params_mut().into_iter().enumerate() {
                let g = &grads.per_layer[li][pi];
                if g.shape() != param.shape() {
                    return Err(NnError::Shape {
                        context: "adam gradient",
                        expected: param.shape().to_vec(),
                        actual: g.shape().to_vec(),
                    });
                }
                let m = self.m[li][pi].data_mut();
                let v = self.v[li][pi].data_mut();
                for (((w, &gv), mv), vv) in param.data_mut().iter_mut().zip(g.data()).zip(m).zip(v) {
                    *mv = beta1 * *mv + (1.0 - beta1) * gv;
                    *vv = beta2 * *vv + (1.0 - beta2) * gv * gv;
                    *w -= lr * (*mv / c1) / ((*vv / c2).sqrt() + eps);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::{Dense, Layer};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_step_moves_each_weight_by_lr() {
        // With bias correction the first update is lr·sign(g).
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut model = Model::from_layers(
            [2, 1, 1],
            vec![Layer::Dense(Dense::new(2, 1, &mut rng)), Layer::Sigmoid],
        )
        .unwrap();
        let before = model.clone();
        let grads = Gradients {
            per_layer: vec![
                vec![
                    Tensor::from_vec(&[1, 2], vec![0.3, -2.0]).unwrap(),
                    Tensor::from_vec(&[1], vec![0.0]).unwrap(),
                ],
                vec![],
            ],
        };
        let mut adam = Adam::new(AdamConfig::default(), &model);
        adam.step(&mut model, &grads).unwrap();
        let (Layer::Dense(a), Layer::Dense(b)) = (&before.layers()[0], &model.layers()[0]) else {
            unreachable!()
        };
        let dw: Vec<f64> = a.weight.data().iter().zip(b.weight.data()).map(|(x, y)| x - y).collect();
        assert!((dw[0] - 1e-3).abs() < 1e-9);
        assert!((dw[1] + 1e-3).abs() < 1e-9);
        assert_eq!(a.bias, b.bias);
    }
}
