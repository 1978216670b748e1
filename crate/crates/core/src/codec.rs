//! Blue-channel Manchester embedding on an M×N cell grid.
//!
//! Bits map to cells in row-major order from the top-left. A 1 bit adds +Δ to
//! every Blue value of its cell in F+ and −Δ in F−; a 0 bit does the opposite.
//! Results clamp to [0, 255].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::Frame;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("grid {rows}x{cols} does not fit a {width}x{height} image")]
    Grid {
        rows: usize,
        cols: usize,
        width: usize,
        height: usize,
    },
    #[error("expected {expected} bits, got {actual}")]
    BitCount { expected: usize, actual: usize },
    #[error("frame is {actual:?}, grid expects {expected:?}")]
    FrameSize {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    #[error("delta {0} outside 1..=3")]
    Delta(u8),
}

/// Cell partition of an image. Cells are `⌊H/M⌋ × ⌊W/N⌋` pixels; the last row
/// and column absorb the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub rows: usize,
    pub cols: usize,
    pub width: usize,
    pub height: usize,
}

impl GridGeometry {
    pub fn new(rows: usize, cols: usize, width: usize, height: usize) -> Result<GridGeometry, CodecError> {
        if rows == 0 || cols == 0 || rows > height || cols > width {
            return Err(CodecError::Grid { rows, cols, width, height });
        }
        Ok(GridGeometry { rows, cols, width, height })
    }

    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }

    pub fn cell_height(&self) -> usize {
        self.height / self.rows
    }

    pub fn cell_width(&self) -> usize {
        self.width / self.cols
    }

    /// Pixel rectangle `(x0, y0, x1, y1)` of a cell, end-exclusive.
    pub fn cell_rect(&self, row: usize, col: usize) -> (usize, usize, usize, usize) {
        let (bh, bw) = (self.cell_height(), self.cell_width());
        let x1 = if col + 1 == self.cols { self.width } else { (col + 1) * bw };
        let y1 = if row + 1 == self.rows { self.height } else { (row + 1) * bh };
        (col * bw, row * bh, x1, y1)
    }

    fn check_frame(&self, f: &Frame) -> Result<(), CodecError> {
        if (f.width(), f.height()) != (self.width, self.height) {
            return Err(CodecError::FrameSize {
                expected: (self.width, self.height),
                actual: (f.width(), f.height()),
            });
        }
        Ok(())
    }
}

/// Amplitude rule for the Blue modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ModulationPlan {
    Fixed { delta: u8 },
    /// `high` for cells whose mean Blue exceeds `threshold`, else `low`.
    Mix { low: u8, high: u8, threshold: u8 },
}

impl Default for ModulationPlan {
    fn default() -> Self {
        ModulationPlan::Mix {
            low: 3,
            high: 2,
            threshold: 30,
        }
    }
}

impl ModulationPlan {
    pub fn validate(&self) -> Result<(), CodecError> {
        let deltas = match *self {
            ModulationPlan::Fixed { delta } => vec![delta],
            ModulationPlan::Mix { low, high, .. } => vec![low, high],
        };
        match deltas.into_iter().find(|d| !(1..=3).contains(d)) {
            Some(d) => Err(CodecError::Delta(d)),
            None => Ok(()),
        }
    }

    /// Short label: the fixed Δ, or `mix`.
    pub fn label(&self) -> String {
        match *self {
            ModulationPlan::Fixed { delta } => delta.to_string(),
            ModulationPlan::Mix { .. } => "mix".into(),
        }
    }

    /// Δ for a cell with the given mean Blue intensity.
    pub fn delta_for(&self, mean_blue: f64) -> u8 {
        match *self {
            ModulationPlan::Fixed { delta } => delta,
            ModulationPlan::Mix { low, high, threshold } => {
                if mean_blue > f64::from(threshold) {
                    high
                } else {
                    low
                }
            }
        }
    }
}

fn cell_mean(plane: &[f32], width: usize, rect: (usize, usize, usize, usize)) -> f64 {
    let (x0, y0, x1, y1) = rect;
    let mut sum = 0.0f64;
    for y in y0..y1 {
        sum += plane[y * width + x0..y * width + x1].iter().map(|&v| f64::from(v)).sum::<f64>();
    }
    sum / ((x1 - x0) * (y1 - y0)) as f64
}

/// Produces the Manchester pair `(F+, F−)` for one frame of bits.
pub fn embed_pair(
    image: &Frame,
    bits: &[u8],
    geom: &GridGeometry,
    plan: &ModulationPlan,
) -> Result<(Frame, Frame), CodecError> {
    geom.check_frame(image)?;
    plan.validate()?;
    if bits.len() != geom.cells() {
        return Err(CodecError::BitCount {
            expected: geom.cells(),
            actual: bits.len(),
        });
    }
    let blue: Vec<f32> = image.channel(2).into_iter().map(f32::from).collect();
    let mut plus = image.clone();
    let mut minus = image.clone();
    for row in 0..geom.rows {
        for col in 0..geom.cols {
            let rect = geom.cell_rect(row, col);
            let delta = i16::from(plan.delta_for(cell_mean(&blue, geom.width, rect)));
            let sign = if bits[row * geom.cols + col] != 0 { 1 } else { -1 };
            let (x0, y0, x1, y1) = rect;
            for y in y0..y1 {
                for x in x0..x1 {
                    let i = (y * geom.width + x) * 3 + 2;
                    let b = i16::from(image.data()[i]);
                    plus.data_mut()[i] = (b + sign * delta).clamp(0, 255) as u8;
                    minus.data_mut()[i] = (b - sign * delta).clamp(0, 255) as u8;
                }
            }
        }
    }
    Ok((plus, minus))
}

/// Per-cell `mean(a) − mean(b)` over two equally sized planes.
pub fn cell_differences(a: &[f32], b: &[f32], geom: &GridGeometry) -> Vec<f64> {
    let mut out = Vec::with_capacity(geom.cells());
    for row in 0..geom.rows {
        for col in 0..geom.cols {
            let rect = geom.cell_rect(row, col);
            out.push(cell_mean(a, geom.width, rect) - cell_mean(b, geom.width, rect));
        }
    }
    out
}

/// Hard decisions: 1 iff the difference is strictly positive.
pub fn bits_from_differences(diff: &[f64]) -> Vec<u8> {
    diff.iter().map(|&d| u8::from(d > 0.0)).collect()
}

/// Independent per-cell decision from the Blue means of a Manchester pair.
pub fn classical_decode(plus: &Frame, minus: &Frame, geom: &GridGeometry) -> Result<Vec<u8>, CodecError> {
    geom.check_frame(plus)?;
    geom.check_frame(minus)?;
    let a: Vec<f32> = plus.channel(2).into_iter().map(f32::from).collect();
    let b: Vec<f32> = minus.channel(2).into_iter().map(f32::from).collect();
    Ok(bits_from_differences(&cell_differences(&a, &b, geom)))
}

/// Peak signal-to-noise ratio in dB with R = 255 and the MSE averaged over
/// all pixels and channels. Identical frames give `f64::INFINITY`.
pub fn psnr(original: &Frame, modified: &Frame) -> Result<f64, CodecError> {
    if (original.width(), original.height()) != (modified.width(), modified.height()) {
        return Err(CodecError::FrameSize {
            expected: (original.width(), original.height()),
            actual: (modified.width(), modified.height()),
        });
    }
    let sse: f64 = original
        .data()
        .iter()
        .zip(modified.data())
        .map(|(&a, &b)| {
            let d = f64::from(a) - f64::from(b);
            d * d
        })
        .sum();
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    let mse = sse / original.data().len() as f64;
    Ok(10.0 * (255.0f64 * 255.0 / mse).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gray(b: u8) -> Frame {
        Frame::filled(40, 30, [128, 128, b])
    }

    #[test]
    fn mid_gray_delta_two() {
        let img = gray(128);
        let g = GridGeometry::new(3, 4, 40, 30).unwrap();
        let (p, m) = embed_pair(&img, &[1; 12], &g, &ModulationPlan::Fixed { delta: 2 }).unwrap();
        assert!(p.data().chunks(3).all(|px| px == [128, 128, 130]));
        assert!(m.data().chunks(3).all(|px| px == [128, 128, 126]));
    }

    #[test]
    fn clamps_at_white() {
        let img = gray(255);
        let g = GridGeometry::new(1, 1, 40, 30).unwrap();
        let (p, m) = embed_pair(&img, &[1], &g, &ModulationPlan::Fixed { delta: 2 }).unwrap();
        assert_eq!(p.get(0, 0)[2], 255);
        assert_eq!(m.get(0, 0)[2], 253);
    }

    #[test]
    fn mix_rule_threshold() {
        let plan = ModulationPlan::default();
        assert_eq!(plan.delta_for(20.0), 3);
        assert_eq!(plan.delta_for(40.0), 2);
        assert_eq!(plan.delta_for(30.0), 3);
        let g = GridGeometry::new(1, 1, 40, 30).unwrap();
        let (p, _) = embed_pair(&gray(20), &[1], &g, &plan).unwrap();
        assert_eq!(p.get(5, 5)[2], 23);
        let (p, _) = embed_pair(&gray(40), &[1], &g, &plan).unwrap();
        assert_eq!(p.get(5, 5)[2], 42);
    }

    #[test]
    fn remainder_pixels_join_last_cells() {
        let g = GridGeometry::new(4, 3, 10, 9).unwrap();
        assert_eq!(g.cell_rect(0, 0), (0, 0, 3, 2));
        assert_eq!(g.cell_rect(3, 2), (6, 6, 10, 9));
        let covered: usize = (0..4)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .map(|(r, c)| {
                let (x0, y0, x1, y1) = g.cell_rect(r, c);
                (x1 - x0) * (y1 - y0)
            })
            .sum();
        assert_eq!(covered, 90);
    }

    #[test]
    fn swapped_frames_give_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = Frame::from_fn(40, 30, |_, _| rng.random());
        let g = GridGeometry::new(3, 4, 40, 30).unwrap();
        let bits: Vec<u8> = (0..12).map(|i| (i % 3 == 0) as u8).collect();
        let (p, m) = embed_pair(&img, &bits, &g, &ModulationPlan::default()).unwrap();
        assert_eq!(classical_decode(&p, &m, &g).unwrap(), bits);
        let flipped: Vec<u8> = bits.iter().map(|b| 1 - b).collect();
        assert_eq!(classical_decode(&m, &p, &g).unwrap(), flipped);
    }

    #[test]
    fn psnr_values() {
        let a = gray(100);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let b = gray(103);
        assert!((psnr(&a, &b).unwrap() - 43.36).abs() < 0.01);
        assert!(psnr(&a, &Frame::new(3, 3)).is_err());
    }

    #[test]
    fn errors() {
        let g = GridGeometry::new(2, 2, 40, 30).unwrap();
        assert!(matches!(
            embed_pair(&gray(1), &[1, 0], &g, &ModulationPlan::default()),
            Err(CodecError::BitCount { .. })
        ));
        assert!(embed_pair(&Frame::new(10, 10), &[0; 4], &g, &ModulationPlan::default()).is_err());
        assert!(embed_pair(&gray(1), &[0; 4], &g, &ModulationPlan::Fixed { delta: 4 }).is_err());
        assert!(GridGeometry::new(40, 2, 40, 30).is_err());
    }
}
