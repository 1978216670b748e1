//! Binary model files.
//!
//! Layout, all integers `u32` little-endian and parameters `f64` LE:
//!
//! ```text
//! magic "MNN\0" | version | C | H | W | outputs | layer count
//! per layer: tag (u32) then
//!   1 conv:      in, out, kernel, stride, pad, weight[out·in·k·k], bias[out]
//!   2 batchnorm: channels, gamma, beta, running mean, running var
//!   3 relu
//!   4 dense:     in, out, weight[out·in], bias[out]
//!   5 sigmoid
//! ```

use std::path::Path;

use crate::error::NnError;
use crate::layers::{BatchNorm2d, Conv2d, Dense, Layer};
use crate::model::Model;
use crate::tensor::Tensor;

pub const MAGIC: [u8; 4] = *b"MNN\0";
pub const FORMAT_VERSION: u32 = 1;

const TAG_CONV: u32 = 1;
const TAG_BN: u32 = 2;
const TAG_RELU: u32 = 3;
const TAG_DENSE: u32 = 4;
const TAG_SIGMOID: u32 = 5;

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_tensor(out: &mut Vec<u8>, t: &Tensor) {
    for v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn to_bytes(model: &Model) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    put_u32(&mut out, FORMAT_VERSION as usize);
    for d in model.input_shape() {
        put_u32(&mut out, d);
    }
    put_u32(&mut out, model.outputs());
    put_u32(&mut out, model.layers().len());
    for layer in model.layers() {
        match layer {
            Layer::Conv(c) => {
                put_u32(&mut out, TAG_CONV as usize);
                for v in [c.in_channels, c.out_channels, c.kernel, c.stride, c.pad] {
                    put_u32(&mut out, v);
                }
                put_tensor(&mut out, &c.weight);
                put_tensor(&mut out, &c.bias);
            }
            Layer::BatchNorm(b) => {
                put_u32(&mut out, TAG_BN as usize);
                put_u32(&mut out, b.channels);
                for t in [&b.gamma, &b.beta, &b.running_mean, &b.running_var] {
                    put_tensor(&mut out, t);
                }
            }
            Layer::Relu => put_u32(&mut out, TAG_RELU as usize),
            Layer::Dense(d) => {
                put_u32(&mut out, TAG_DENSE as usize);
                put_u32(&mut out, d.inputs);
                put_u32(&mut out, d.outputs);
                put_tensor(&mut out, &d.weight);
                put_tensor(&mut out, &d.bias);
            }
            Layer::Sigmoid => put_u32(&mut out, TAG_SIGMOID as usize),
        }
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], NnError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let Some(end) = end else {
            return Err(NnError::Format(format!(
                "truncated at byte {} (wanted {n} more)",
                self.pos
            )));
        };
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, NnError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")) as usize)
    }

    fn tensor(&mut self, shape: &[usize]) -> Result<Tensor, NnError> {
        let n = shape
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n <= (self.buf.len() - self.pos) / 8)
            .ok_or_else(|| NnError::Format(format!("tensor {shape:?} exceeds file size")))?;
        let bytes = self.take(n * 8)?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        Tensor::from_vec(shape, data)
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<Model, NnError> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(NnError::Format("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION as usize {
        return Err(NnError::Format(format!(
            "unsupported version {version}, expected {FORMAT_VERSION}"
        )));
    }
    let input = [r.u32()?, r.u32()?, r.u32()?];
    let outputs = r.u32()?;
    let count = r.u32()?;
    let mut layers = Vec::with_capacity(count.min(1024));
    for _ in 0..count {
        let layer = match r.u32()? as u32 {
            TAG_CONV => {
                let (i, o, k, s, p) = (r.u32()?, r.u32()?, r.u32()?, r.u32()?, r.u32()?);
                if s == 0 {
                    return Err(NnError::Format("conv stride 0".into()));
                }
                Layer::Conv(Conv2d {
                    in_channels: i,
                    out_channels: o,
                    kernel: k,
                    stride: s,
                    pad: p,
                    weight: r.tensor(&[o, i, k, k])?,
                    bias: r.tensor(&[o])?,
                })
            }
            TAG_BN => {
                let c = r.u32()?;
                Layer::BatchNorm(BatchNorm2d {
                    channels: c,
                    gamma: r.tensor(&[c])?,
                    beta: r.tensor(&[c])?,
                    running_mean: r.tensor(&[c])?,
                    running_var: r.tensor(&[c])?,
                })
            }
            TAG_RELU => Layer::Relu,
            TAG_DENSE => {
                let (i, o) = (r.u32()?, r.u32()?);
                Layer::Dense(Dense {
                    inputs: i,
                    outputs: o,
                    weight: r.tensor(&[o, i])?,
                    bias: r.tensor(&[o])?,
                })
            }
            TAG_SIGMOID => Layer::Sigmoid,
            tag => return Err(NnError::Format(format!("unknown layer tag {tag}"))),
        };
        layers.push(layer);
    }
    if r.pos != buf.len() {
        return Err(NnError::Format(format!(
            "{} trailing bytes",
            buf.len() - r.pos
        )));
    }
    let model = Model::from_layers(input, layers).map_err(|e| NnError::Format(e.to_string()))?;
    if model.outputs() != outputs {
        return Err(NnError::Format(format!(
            "header says {outputs} outputs, layers produce {}",
            model.outputs()
        )));
    }
    Ok(model)
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<(), NnError> {
    std::fs::write(path, to_bytes(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, NnError> {
    from_bytes(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ArchConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> Model {
        let arch = ArchConfig {
            input_side: 8,
            widths: vec![3, 4],
            outputs: 6,
            ..ArchConfig::default()
        };
        Model::from_arch(&arch, &mut ChaCha8Rng::seed_from_u64(9)).unwrap()
    }

    #[test]
    fn roundtrip_is_exact() {
        let m = model();
        assert_eq!(from_bytes(&to_bytes(&m)).unwrap(), m);
    }

    #[test]
    fn every_truncation_fails_cleanly() {
        let bytes = to_bytes(&model());
        for cut in 0..bytes.len() {
            assert!(matches!(from_bytes(&bytes[..cut]), Err(NnError::Format(_))), "cut {cut}");
        }
    }

    #[test]
    fn version_and_magic_are_checked() {
        let mut bytes = to_bytes(&model());
        bytes[4] = 2;
        assert!(from_bytes(&bytes).unwrap_err().to_string().contains("version"));
        bytes[4] = 1;
        bytes[0] = b'X';
        assert!(from_bytes(&bytes).unwrap_err().to_string().contains("magic"));
    }

    #[test]
    fn output_count_mismatch_is_rejected() {
        let mut bytes = to_bytes(&model());
        bytes[20] = 7;
        assert!(from_bytes(&bytes).is_err());
    }
}
