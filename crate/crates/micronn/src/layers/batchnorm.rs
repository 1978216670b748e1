use crate::error::NnError;
use crate::tensor::Tensor;

pub const BN_EPS: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.9;

/// Per-channel batch normalization over `[N, C, ...]` inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchNorm2d {
    pub channels: usize,
    pub gamma: Tensor,
    pub beta: Tensor,
    pub running_mean: Tensor,
    pub running_var: Tensor,
}

/// Batch statistics and normalized activations kept for the backward pass.
#[derive(Debug, Clone)]
pub(crate) struct BnCache {
    pub xhat: Tensor,
    pub inv_std: Vec<f64>,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl BatchNorm2d {
    pub fn new(channels: usize) -> BatchNorm2d {
        BatchNorm2d {
            channels,
            gamma: Tensor::filled(&[channels], 1.0),
            beta: Tensor::zeros(&[channels]),
            running_mean: Tensor::zeros(&[channels]),
            running_var: Tensor::filled(&[channels], 1.0),
        }
    }

    fn dims(&self, x: &Tensor) -> Result<(usize, usize), NnError> {
        let s = x.shape();
        if s.len() < 2 || s[1] != self.channels {
            return Err(NnError::Shape {
                context: "batchnorm input",
                expected: vec![0, self.channels],
                actual: s.to_vec(),
            });
        }
        Ok((s[0], s[2..].iter().product()))
    }

    /// Normalizes with batch statistics. Running moments are untouched; see
    /// [`BatchNorm2d::update_running`].
    pub(crate) fn forward_batch(&self, x: &Tensor) -> Result<(Tensor, BnCache), NnError> {
        let (n, spatial) = self.dims(x)?;
        if n < 2 {
            return Err(NnError::BatchTooSmall(n));
        }
        let c = self.channels;
        let count = (n * spatial) as f64;
        let mut mean = vec![0.0; c];
        let mut var = vec![0.0; c];
        for (idx, chunk) in x.data().chunks(spatial).enumerate() {
            mean[idx % c] += chunk.iter().sum::<f64>();
        }
        mean.iter_mut().for_each(|m| *m /= count);
        for (idx, chunk) in x.data().chunks(spatial).enumerate() {
            let m = mean[idx % c];
            var[idx % c] += chunk.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
        }
        var.iter_mut().for_each(|v| *v /= count);
        let inv_std: Vec<f64> = var.iter().map(|v| 1.0 / (v + BN_EPS).sqrt()).collect();

        let mut xhat = x.clone();
        let mut y = x.clone();
        for (idx, (hc, yc)) in xhat
            .data_mut()
            .chunks_mut(spatial)
            .zip(y.data_mut().chunks_mut(spatial))
            .enumerate()
        {
            let ch = idx % c;
            let (g, b) = (self.gamma.data()[ch], self.beta.data()[ch]);
            for (h, yv) in hc.iter_mut().zip(yc.iter_mut()) {
                *h = (*h - mean[ch]) * inv_std[ch];
                *yv = g * *h + b;
            }
        }
        Ok((y, BnCache { xhat, inv_std, mean, var }))
    }

    /// Folds batch moments into the running estimates (unbiased variance).
    pub(crate) fn update_running(&mut self, cache: &BnCache, count: usize) {
        let unbias = if count > 1 {
            count as f64 / (count - 1) as f64
        } else {
            1.0
        };
        for ch in 0..self.channels {
            let rm = &mut self.running_mean.data_mut()[ch];
            *rm = BN_MOMENTUM * *rm + (1.0 - BN_MOMENTUM) * cache.mean[ch];
            let rv = &mut self.running_var.data_mut()[ch];
            *rv = BN_MOMENTUM * *rv + (1.0 - BN_MOMENTUM) * cache.var[ch] * unbias;
        }
    }

    pub fn forward_infer(&self, x: &Tensor) -> Result<Tensor, NnError> {
        let (_, spatial) = self.dims(x)?;
        let c = self.channels;
        let mut y = x.clone();
        for (idx, chunk) in y.data_mut().chunks_mut(spatial).enumerate() {
            let ch = idx % c;
            let inv = 1.0 / (self.running_var.data()[ch] + BN_EPS).sqrt();
            let scale = self.gamma.data()[ch] * inv;
            let shift = self.beta.data()[ch] - self.running_mean.data()[ch] * scale;
            chunk.iter_mut().for_each(|v| *v = *v * scale + shift);
        }
        Ok(y)
    }

    /// Returns `(dx, dgamma, dbeta)`.
    pub(crate) fn backward(&self, cache: &BnCache, dy: &Tensor) -> (Tensor, Tensor, Tensor) {
        let c = self.channels;
        let n = dy.shape()[0];
        let spatial = dy.len() / (n * c);
        let count = (n * spatial) as f64;
        let mut dgamma = vec![0.0; c];
        let mut dbeta = vec![0.0; c];
        for (idx, (g, h)) in dy
            .data()
            .chunks(spatial)
            .zip(cache.xhat.data().chunks(spatial))
            .enumerate()
        {
            let ch = idx % c;
            dbeta[ch] += g.iter().sum::<f64>();
            dgamma[ch] += g.iter().zip(h).map(|(a, b)| a * b).sum::<f64>();
        }
        let mut dx = dy.clone();
        for (idx, (d, h)) in dx
            .data_mut()
            .chunks_mut(spatial)
            .zip(cache.xhat.data().chunks(spatial))
            .enumerate()
        {
            let ch = idx % c;
            let k = self.gamma.data()[ch] * cache.inv_std[ch] / count;
            for (dv, &hv) in d.iter_mut().zip(h) {
                *dv = k * (count * *dv - dbeta[ch] - hv * dgamma[ch]);
            }
        }
        (
            dx,
            Tensor::from_vec(&[c], dgamma).expect("channel count"),
            Tensor::from_vec(&[c], dbeta).expect("channel count"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normalized_batch_has_zero_mean_unit_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut x = Tensor::randn(&[4, 3, 5, 5], 3.0, &mut rng);
        x.data_mut().iter_mut().for_each(|v| *v += 10.0);
        let bn = BatchNorm2d::new(3);
        let (y, _) = bn.forward_batch(&x).unwrap();
        for ch in 0..3 {
            let vals: Vec<f64> = (0..4)
                .flat_map(|b| y.data()[(b * 3 + ch) * 25..(b * 3 + ch + 1) * 25].to_vec())
                .collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let v = vals.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / vals.len() as f64;
            assert!(m.abs() < 1e-6);
            assert!((v - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn standardized_input_passes_through() {
        // Two samples ±1 per position: mean 0, variance 1.
        let x = Tensor::from_vec(&[2, 1, 2], vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let (y, _) = BatchNorm2d::new(1).forward_batch(&x).unwrap();
        for (a, b) in y.data().iter().zip(x.data()) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_scale_outputs_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut bn = BatchNorm2d::new(2);
        bn.gamma = Tensor::zeros(&[2]);
        bn.beta = Tensor::from_vec(&[2], vec![0.25, -3.0]).unwrap();
        let x = Tensor::randn(&[3, 2, 4], 1.0, &mut rng);
        let (y, _) = bn.forward_batch(&x).unwrap();
        for (idx, chunk) in y.data().chunks(4).enumerate() {
            let want = if idx % 2 == 0 { 0.25 } else { -3.0 };
            assert!(chunk.iter().all(|&v| v == want));
        }
        let yi = bn.forward_infer(&x).unwrap();
        for (idx, chunk) in yi.data().chunks(4).enumerate() {
            let want = if idx % 2 == 0 { 0.25 } else { -3.0 };
            assert!(chunk.iter().all(|&v| v == want));
        }
    }

    #[test]
    fn single_sample_batch_is_rejected() {
        let bn = BatchNorm2d::new(1);
        assert!(matches!(
            bn.forward_batch(&Tensor::zeros(&[1, 1, 3, 3])),
            Err(NnError::BatchTooSmall(1))
        ));
    }

    #[test]
    fn running_moments_move_toward_batch() {
        let x = Tensor::from_vec(&[2, 1, 1], vec![4.0, 6.0]).unwrap();
        let mut bn = BatchNorm2d::new(1);
        let (_, cache) = bn.forward_batch(&x).unwrap();
        bn.update_running(&cache, 2);
        assert!((bn.running_mean.data()[0] - 0.5).abs() < 1e-12);
        // batch var 1, unbiased 2 → 0.9·1 + 0.1·2
        assert!((bn.running_var.data()[0] - 1.1).abs() < 1e-12);
    }
}
