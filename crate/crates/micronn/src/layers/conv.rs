use rand::Rng;

use crate::error::NnError;
use crate::gemm::gemm;
use crate::tensor::Tensor;

/// 2-D cross-correlation with square kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
    /// `[out, in, k, k]`
    pub weight: Tensor,
    /// `[out]`
    pub bias: Tensor,
}

impl Conv2d {
    /// He-initialized convolution with "same" padding (`k/2`) for `k > 1`.
    pub fn new(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        rng: &mut impl Rng,
    ) -> Conv2d {
        let fan_in = (in_channels * kernel * kernel) as f64;
        Conv2d {
            in_channels,
            out_channels,
            kernel,
            stride: stride.max(1),
            pad: if kernel > 1 { kernel / 2 } else { 0 },
            weight: Tensor::randn(
                &[out_channels, in_channels, kernel, kernel],
                (2.0 / fan_in).sqrt(),
                rng,
            ),
            bias: Tensor::zeros(&[out_channels]),
        }
    }

    pub fn output_hw(&self, h: usize, w: usize) -> (usize, usize) {
        let span = |n: usize| {
            let padded = n + 2 * self.pad;
            if padded < self.kernel {
                0
            } else {
                (padded - self.kernel) / self.stride + 1
            }
        };
        (span(h), span(w))
    }

    fn check_input(&self, x: &Tensor) -> Result<(usize, usize, usize), NnError> {
        let s = x.shape();
        if s.len() != 4 || s[1] != self.in_channels {
            return Err(NnError::Shape {
                context: "conv2d input",
                expected: vec![0, self.in_channels, 0, 0],
                actual: s.to_vec(),
            });
        }
        Ok((s[0], s[2], s[3]))
    }

    fn is_pointwise(&self) -> bool {
        self.kernel == 1 && self.stride == 1 && self.pad == 0
    }

    fn im2col(&self, x: &[f64], h: usize, w: usize, ho: usize, wo: usize, cols: &mut [f64]) {
        let (k, s, p) = (self.kernel, self.stride, self.pad as isize);
        let plane = ho * wo;
        for c in 0..self.in_channels {
            let src = &x[c * h * w..(c + 1) * h * w];
            for ki in 0..k {
                for kj in 0..k {
                    let row = (c * k + ki) * k + kj;
                    let dst = &mut cols[row * plane..(row + 1) * plane];
                    for oy in 0..ho {
                        let iy = (oy * s + ki) as isize - p;
                        let out_row = &mut dst[oy * wo..(oy + 1) * wo];
                        if iy < 0 || iy >= h as isize {
                            out_row.iter_mut().for_each(|v| *v = 0.0);
                            continue;
                        }
                        let src_row = &src[iy as usize * w..(iy as usize + 1) * w];
                        for (ox, v) in out_row.iter_mut().enumerate() {
                            let ix = (ox * s + kj) as isize - p;
                            *v = if ix < 0 || ix >= w as isize {
                                0.0
                            } else {
                                src_row[ix as usize]
                            };
                        }
                    }
                }
            }
        }
    }

    fn col2im(&self, cols: &[f64], h: usize, w: usize, ho: usize, wo: usize, dx: &mut [f64]) {
        let (k, s, p) = (self.kernel, self.stride, self.pad as isize);
        let plane = ho * wo;
        for c in 0..self.in_channels {
            let dst = &mut dx[c * h * w..(c + 1) * h * w];
            for ki in 0..k {
                for kj in 0..k {
                    let row = (c * k + ki) * k + kj;
                    let src = &cols[row * plane..(row + 1) * plane];
                    for oy in 0..ho {
                        let iy = (oy * s + ki) as isize - p;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for ox in 0..wo {
                            let ix = (ox * s + kj) as isize - p;
                            if ix >= 0 && ix < w as isize {
                                dst[iy as usize * w + ix as usize] += src[oy * wo + ox];
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor, NnError> {
        let (n, h, w) = self.check_input(x)?;
        let (ho, wo) = self.output_hw(h, w);
        let ckk = self.in_channels * self.kernel * self.kernel;
        let plane = ho * wo;
        let mut y = Tensor::zeros(&[n, self.out_channels, ho, wo]);
        let mut cols = if self.is_pointwise() {
            Vec::new()
        } else {
            vec![0.0; ckk * plane]
        };
        let in_len = self.in_channels * h * w;
        let out_len = self.out_channels * plane;
        for i in 0..n {
            let xs = &x.data()[i * in_len..(i + 1) * in_len];
            let b: &[f64] = if self.is_pointwise() {
                xs
            } else {
                self.im2col(xs, h, w, ho, wo, &mut cols);
                &cols
            };
            let ys = &mut y.data_mut()[i * out_len..(i + 1) * out_len];
            gemm(self.out_channels, ckk, plane, self.weight.data(), false, b, false, ys, false);
            for (o, chunk) in ys.chunks_mut(plane).enumerate() {
                let bias = self.bias.data()[o];
                chunk.iter_mut().for_each(|v| *v += bias);
            }
        }
        Ok(y)
    }

    /// Returns `(dx, dweight, dbias)`.
    pub fn backward(&self, x: &Tensor, dy: &Tensor) -> Result<(Tensor, Tensor, Tensor), NnError> {
        let (n, h, w) = self.check_input(x)?;
        let (ho, wo) = self.output_hw(h, w);
        let expected = [n, self.out_channels, ho, wo];
        if dy.shape() != expected {
            return Err(NnError::Shape {
                context: "conv2d grad",
                expected: expected.to_vec(),
                actual: dy.shape().to_vec(),
            });
        }
        let ckk = self.in_channels * self.kernel * self.kernel;
        let plane = ho * wo;
        let in_len = self.in_channels * h * w;
        let out_len = self.out_channels * plane;
        let mut dx = Tensor::zeros(x.shape());
        let mut dw = Tensor::zeros(self.weight.shape());
        let mut db = Tensor::zeros(self.bias.shape());
        let mut cols = vec![0.0; ckk * plane];
        let mut dcols = vec![0.0; ckk * plane];
        for i in 0..n {
            let xs = &x.data()[i * in_len..(i + 1) * in_len];
            let dys = &dy.data()[i * out_len..(i + 1) * out_len];
            let b: &[f64] = if self.is_pointwise() {
                xs
            } else {
                self.im2col(xs, h, w, ho, wo, &mut cols);
                &cols
            };
            gemm(self.out_channels, plane, ckk, dys, false, b, true, dw.data_mut(), true);
            for (o, chunk) in dys.chunks(plane).enumerate() {
                db.data_mut()[o] += chunk.iter().sum::<f64>();
            }
            let dxs = &mut dx.data_mut()[i * in_len..(i + 1) * in_len];
            if self.is_pointwise() {
                gemm(ckk, self.out_channels, plane, self.weight.data(), true, dys, false, dxs, false);
            } else {
                gemm(ckk, self.out_channels, plane, self.weight.data(), true, dys, false, &mut dcols, false);
                self.col2im(&dcols, h, w, ho, wo, dxs);
            }
        }
        Ok((dx, dw, db))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Quadruple loop straight from the definition.
    fn reference(conv: &Conv2d, x: &Tensor) -> Tensor {
        let s = x.shape();
        let (n, h, w) = (s[0], s[2], s[3]);
        let (ho, wo) = conv.output_hw(h, w);
        let mut y = Tensor::zeros(&[n, conv.out_channels, ho, wo]);
        let k = conv.kernel;
        for b in 0..n {
            for o in 0..conv.out_channels {
                for oy in 0..ho {
                    for ox in 0..wo {
                        let mut acc = conv.bias.data()[o];
                        for c in 0..conv.in_channels {
                            for ki in 0..k {
                                for kj in 0..k {
                                    let iy = (oy * conv.stride + ki) as isize - conv.pad as isize;
                                    let ix = (ox * conv.stride + kj) as isize - conv.pad as isize;
                                    if iy < 0 || ix < 0 || iy >= h as isize || ix >= w as isize {
                                        continue;
                                    }
                                    let xv = x.data()[((b * conv.in_channels + c) * h + iy as usize) * w + ix as usize];
                                    let wv = conv.weight.data()[((o * conv.in_channels + c) * k + ki) * k + kj];
                                    acc += xv * wv;
                                }
                            }
                        }
                        y.data_mut()[((b * conv.out_channels + o) * ho + oy) * wo + ox] = acc;
                    }
                }
            }
        }
        y
    }

    #[test]
    fn matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (k, stride) in [(3, 1), (3, 2), (1, 1), (5, 2)] {
            let mut conv = Conv2d::new(2, 3, k, stride, &mut rng);
            conv.bias = Tensor::randn(&[3], 1.0, &mut rng);
            let x = Tensor::randn(&[2, 2, 6, 6], 1.0, &mut rng);
            let y = conv.forward(&x).unwrap();
            let r = reference(&conv, &x);
            assert_eq!(y.shape(), r.shape());
            for (a, b) in y.data().iter().zip(r.data()) {
                assert!((a - b).abs() < 1e-6, "k={k} s={stride}");
            }
        }
    }

    #[test]
    fn output_size_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let conv = Conv2d::new(1, 1, 3, 2, &mut rng);
        assert_eq!(conv.output_hw(96, 96), (48, 48));
        assert_eq!(conv.output_hw(7, 5), ((7 + 2 - 3) / 2 + 1, (5 + 2 - 3) / 2 + 1));
    }

    #[test]
    fn pointwise_identity_permutation_reorders_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut conv = Conv2d::new(3, 3, 1, 1, &mut rng);
        // out0 <- in2, out1 <- in0, out2 <- in1
        let mut w = vec![0.0; 9];
        w[2] = 1.0;
        w[3] = 1.0;
        w[3 + 4] = 1.0;
        conv.weight = Tensor::from_vec(&[3, 3, 1, 1], w).unwrap();
        let x = Tensor::randn(&[1, 3, 4, 4], 1.0, &mut rng);
        let y = conv.forward(&x).unwrap();
        let plane = 16;
        assert_eq!(&y.data()[..plane], &x.data()[2 * plane..3 * plane]);
        assert_eq!(&y.data()[plane..2 * plane], &x.data()[..plane]);
        assert_eq!(&y.data()[2 * plane..], &x.data()[plane..2 * plane]);
    }

    #[test]
    fn zero_weights_give_bias() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut conv = Conv2d::new(2, 2, 3, 1, &mut rng);
        conv.weight = Tensor::zeros(conv.weight.shape());
        conv.bias = Tensor::from_vec(&[2], vec![0.5, -1.5]).unwrap();
        let y = conv.forward(&Tensor::randn(&[1, 2, 5, 5], 1.0, &mut rng)).unwrap();
        assert!(y.data()[..25].iter().all(|&v| v == 0.5));
        assert!(y.data()[25..].iter().all(|&v| v == -1.5));
    }

    #[test]
    fn channel_mismatch_is_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let conv = Conv2d::new(3, 2, 3, 1, &mut rng);
        assert!(conv.forward(&Tensor::zeros(&[1, 2, 4, 4])).is_err());
    }
}
