use rand::Rng;

use crate::error::NnError;
use crate::gemm::gemm;
use crate::tensor::Tensor;

/// Fully connected layer; any input `[N, ...]` is flattened per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    /// `[out, in]`
    pub weight: Tensor,
    /// `[out]`
    pub bias: Tensor,
}

impl Dense {
    /// Weights drawn from N(0, 1/inputs).
    pub fn new(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Dense {
        Dense {
            inputs,
            outputs,
            weight: Tensor::randn(&[outputs, inputs], (1.0 / inputs as f64).sqrt(), rng),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    fn batch(&self, x: &Tensor) -> Result<usize, NnError> {
        let n = x.shape().first().copied().unwrap_or(0);
        if n == 0 || x.len() != n * self.inputs {
            return Err(NnError::Shape {
                context: "dense input",
                expected: vec![n, self.inputs],
                actual: x.shape().to_vec(),
            });
        }
        Ok(n)
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor, NnError> {
        let n = self.batch(x)?;
        let mut y = Tensor::zeros(&[n, self.outputs]);
        for row in y.data_mut().chunks_mut(self.outputs) {
            row.copy_from_slice(self.bias.data());
        }
        gemm(n, self.inputs, self.outputs, x.data(), false, self.weight.data(), true, y.data_mut(), true);
        Ok(y)
    }

    /// Returns `(dx, dweight, dbias)`; `dx` has the shape of `x`.
    pub fn backward(&self, x: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor, Tensor), NnError> {
        let n = self.batch(x)?;
        if dy.shape() != [n, self.outputs] {
            return Err(NnError::Shape {
                context: "dense grad",
                expected: vec![n, self.outputs],
                actual: dy.shape().to_vec(),
            });
        }
        let mut dw = Tensor::zeros(self.weight.shape());
        gemm(self.outputs, n, self.inputs, dy.data(), true, x.data(), false, dw.data_mut(), false);
        let mut db = Tensor::zeros(&[self.outputs]);
        for row in dy.data().chunks(self.outputs) {
            for (b, g) in db.data_mut().iter_mut().zip(row) {
                *b += g;
            }
        }
        let mut dx = Tensor::zeros(x.shape());
        gemm(n, self.outputs, self.inputs, dy.data(), false, self.weight.data(), false, dx.data_mut(), false);
        Ok((dx, dw, db))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_hand_computation() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut d = Dense::new(3, 2, &mut rng);
        d.weight = Tensor::from_vec(&[2, 3], vec![1.0, 2.0, 3.0, -1.0, 0.0, 0.5]).unwrap();
        d.bias = Tensor::from_vec(&[2], vec![0.1, 0.2]).unwrap();
        let x = Tensor::from_vec(&[1, 3], vec![1.0, 1.0, 2.0]).unwrap();
        let y = d.forward(&x).unwrap();
        assert!((y.data()[0] - 9.1).abs() < 1e-12);
        assert!((y.data()[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn flattens_spatial_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = Dense::new(12, 5, &mut rng);
        let x = Tensor::randn(&[2, 3, 2, 2], 1.0, &mut rng);
        assert_eq!(d.forward(&x).unwrap().shape(), &[2, 5]);
        let (dx, _, _) = d.backward(&x, &Tensor::zeros(&[2, 5])).unwrap();
        assert_eq!(dx.shape(), x.shape());
    }
}
