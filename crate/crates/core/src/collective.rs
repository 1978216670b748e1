//! Collective bit decoding from Blue-channel frame triples.
//!
//! A triple is three consecutive camera frames unwarped to a square view.
//! Only one phase of the stream holds a true `(F+, F+ᵗ, F−)` triple; the
//! others are screened out by the protocol layer, optionally after a cheap
//! ranking by difference energy.

use frameproto::{parse_frame, DedupDecision, DedupState, FrameLayout};
use micronn::{Dataset, Model, Sample, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{Camera, CameraFrame, ChannelConfig, ChannelError, SampleKind};
use crate::codec::{bits_from_differences, embed_pair, CodecError, GridGeometry, ModulationPlan};
use crate::extract::{detect_landmark, unwarp_channel, ExtractError, LandmarkThresholds};
use crate::frame::{bilinear, Frame};
use crate::geometry::Quad;

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("decoder expects a {expected}x{expected} view, triple is {actual}x{actual}")]
    Side { expected: usize, actual: usize },
    #[error("model produces {outputs} bits, grid needs {rows}x{cols}")]
    ModelGrid { outputs: usize, rows: usize, cols: usize },
    #[error("{rows}x{cols} grid is not a multiple of the {tile_rows}x{tile_cols} decoder grid")]
    TileGrid {
        rows: usize,
        cols: usize,
        tile_rows: usize,
        tile_cols: usize,
    },
    #[error("{frames} frames but {quads} quads")]
    QuadCount { frames: usize, quads: usize },
    #[error(transparent)]
    Model(#[from] micronn::NnError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Frame(#[from] frameproto::FrameError),
}

/// Three consecutive Blue-channel views, `side × side` each.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTriple {
    pub planes: [Vec<f32>; 3],
    pub side: usize,
    /// Camera frame indices of the three views.
    pub indices: [usize; 3],
}

impl FrameTriple {
    /// Mean absolute block-averaged difference between the first and last
    /// view. Blocks of about side/16 pixels suppress sensor noise. Blocks
    /// that differ by more than `cap` are content changes, not modulation,
    /// and count as zero.
    pub fn phase_score(&self, cap: f64) -> f64 {
        let b = (self.side / 16).max(1);
        let blocks = self.side / b;
        let mut total = 0.0;
        for by in 0..blocks {
            for bx in 0..blocks {
                let mut s = 0.0f64;
                for y in by * b..(by + 1) * b {
                    for x in bx * b..(bx + 1) * b {
                        let i = y * self.side + x;
                        s += f64::from(self.planes[0][i] - self.planes[2][i]);
                    }
                }
                let d = (s / (b * b) as f64).abs();
                if d <= cap {
                    total += d;
                }
            }
        }
        total / (blocks * blocks) as f64
    }

    /// Network input: each view minus the per-pixel mean of the three,
    /// halved. Static content cancels and the modulation stays.
    pub fn network_input(&self) -> Vec<f64> {
        let n = self.side * self.side;
        let mut out = vec![0.0; 3 * n];
        for i in 0..n {
            let m = (self.planes[0][i] + self.planes[1][i] + self.planes[2][i]) / 3.0;
            for c in 0..3 {
                out[c * n + i] = f64::from(self.planes[c][i] - m) / 2.0;
            }
        }
        out
    }

    /// Crops a sub-rectangle of the view and resamples it to `side`.
    pub fn crop(&self, x0: usize, y0: usize, x1: usize, y1: usize, side: usize) -> FrameTriple {
        let (cw, ch) = (x1 - x0, y1 - y0);
        let planes = std::array::from_fn(|c| {
            let sub: Vec<f32> = (y0..y1)
                .flat_map(|y| self.planes[c][y * self.side + x0..y * self.side + x1].iter().copied())
                .collect();
            if (cw, ch) == (side, side) {
                return sub;
            }
            let mut out = Vec::with_capacity(side * side);
            for y in 0..side {
                for x in 0..side {
                    let u = (x as f64 + 0.5) * cw as f64 / side as f64;
                    let v = (y as f64 + 0.5) * ch as f64 / side as f64;
                    out.push(bilinear(&sub, cw, ch, u, v));
                }
            }
            out
        });
        FrameTriple {
            planes,
            side,
            indices: self.indices,
        }
    }
}

/// Unwarps the Blue channel of every frame with its quad.
pub fn unwarp_blue(frames: &[Frame], quads: &[Quad], side: usize) -> Result<Vec<Vec<f32>>, DecodeError> {
    if frames.len() != quads.len() {
        return Err(DecodeError::QuadCount {
            frames: frames.len(),
            quads: quads.len(),
        });
    }
    frames
        .iter()
        .zip(quads)
        .map(|(f, q)| unwarp_channel(f, 2, q, side).map_err(DecodeError::from))
        .collect()
}

/// Every consecutive triple `(i, i+1, i+2)` of a camera stream.
pub fn assemble_triples(frames: &[Frame], quads: &[Quad], side: usize) -> Result<Vec<FrameTriple>, DecodeError> {
    let views = unwarp_blue(frames, quads, side)?;
    Ok(triples_from_views(&views, side, 0))
}

/// Triples over already unwarped views; `first_index` is the camera index of
/// `views[0]`.
pub fn triples_from_views(views: &[Vec<f32>], side: usize, first_index: usize) -> Vec<FrameTriple> {
    (0..views.len().saturating_sub(2))
        .map(|i| FrameTriple {
            planes: [views[i].clone(), views[i + 1].clone(), views[i + 2].clone()],
            side,
            indices: [first_index + i, first_index + i + 1, first_index + i + 2],
        })
        .collect()
}

/// Maps whole-screen triples to grid bits.
pub trait BitDecoder {
    fn grid(&self) -> (usize, usize);
    /// View side the decoder works at; `None` accepts any.
    fn input_side(&self) -> Option<usize>;
    fn decode(&self, triples: &[&FrameTriple]) -> Result<Vec<Vec<u8>>, DecodeError>;
}

/// Independent per-cell decisions: sign of mean(first) − mean(last).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalDecoder {
    pub rows: usize,
    pub cols: usize,
}

/// Per-cell `f1 − f3` means on a square view. The view spans the whole
/// screen, so cell bounds are proportional rather than floor-sized.
pub fn view_cell_differences(t: &FrameTriple, rows: usize, cols: usize) -> Vec<f64> {
    let (a, b, side) = (&t.planes[0], &t.planes[2], t.side);
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let (y0, y1) = (r * side / rows, (r + 1) * side / rows);
        for c in 0..cols {
            let (x0, x1) = (c * side / cols, (c + 1) * side / cols);
            let mut sum = 0.0f64;
            for y in y0..y1 {
                for x in x0..x1 {
                    sum += f64::from(a[y * side + x] - b[y * side + x]);
                }
            }
            out.push(sum / ((y1 - y0) * (x1 - x0)) as f64);
        }
    }
    out
}

impl BitDecoder for ClassicalDecoder {
    fn grid(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn input_side(&self) -> Option<usize> {
        None
    }

    fn decode(&self, triples: &[&FrameTriple]) -> Result<Vec<Vec<u8>>, DecodeError> {
        triples
            .iter()
            .map(|t| {
                if self.rows == 0 || self.cols == 0 || self.rows > t.side || self.cols > t.side {
                    return Err(DecodeError::TileGrid {
                        rows: self.rows,
                        cols: self.cols,
                        tile_rows: t.side,
                        tile_cols: t.side,
                    });
                }
                Ok(bits_from_differences(&view_cell_differences(t, self.rows, self.cols)))
            })
            .collect()
    }
}

/// The trained network, thresholding sigmoid outputs at 0.5.
#[derive(Debug, Clone)]
pub struct CnnDecoder {
    pub model: Model,
    pub rows: usize,
    pub cols: usize,
}

impl CnnDecoder {
    pub fn new(model: Model, rows: usize, cols: usize) -> Result<CnnDecoder, DecodeError> {
        if model.outputs() != rows * cols || model.input_shape()[0] != 3 || model.input_shape()[1] != model.input_shape()[2] {
            return Err(DecodeError::ModelGrid {
                outputs: model.outputs(),
                rows,
                cols,
            });
        }
        Ok(CnnDecoder { model, rows, cols })
    }

    pub fn side(&self) -> usize {
        self.model.input_shape()[1]
    }

    /// Sigmoid outputs for each triple.
    pub fn probabilities(&self, triples: &[&FrameTriple]) -> Result<Vec<Vec<f64>>, DecodeError> {
        let side = self.side();
        if let Some(t) = triples.iter().find(|t| t.side != side) {
            return Err(DecodeError::Side {
                expected: side,
                actual: t.side,
            });
        }
        let mut out = Vec::with_capacity(triples.len());
        for chunk in triples.chunks(32) {
            let mut data = Vec::with_capacity(chunk.len() * 3 * side * side);
            for t in chunk {
                data.extend(t.network_input());
            }
            let x = Tensor::from_vec(&[chunk.len(), 3, side, side], data)?;
            let p = self.model.predict(&x)?;
            out.extend(p.data().chunks(self.rows * self.cols).map(|r| r.to_vec()));
        }
        Ok(out)
    }
}

impl BitDecoder for CnnDecoder {
    fn grid(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn input_side(&self) -> Option<usize> {
        Some(self.side())
    }

    fn decode(&self, triples: &[&FrameTriple]) -> Result<Vec<Vec<u8>>, DecodeError> {
        Ok(self
            .probabilities(triples)?
            .into_iter()
            .map(|p| p.into_iter().map(|v| u8::from(v > 0.5)).collect())
            .collect())
    }
}

/// Decodes an `rows × cols` grid with a decoder for a smaller grid by
/// splitting the view into equal tiles. Each tile's bits land at their
/// row-major positions in the full grid.
pub fn decode_tiled(triple: &FrameTriple, decoder: &dyn BitDecoder, rows: usize, cols: usize) -> Result<Vec<u8>, DecodeError> {
    let (tr, tc) = decoder.grid();
    if rows % tr != 0 || cols % tc != 0 || rows == 0 || cols == 0 {
        return Err(DecodeError::TileGrid {
            rows,
            cols,
            tile_rows: tr,
            tile_cols: tc,
        });
    }
    let (ny, nx) = (rows / tr, cols / tc);
    let side = decoder.input_side();
    let mut tiles = Vec::with_capacity(ny * nx);
    for ty in 0..ny {
        for tx in 0..nx {
            let (x0, x1) = (tx * triple.side / nx, (tx + 1) * triple.side / nx);
            let (y0, y1) = (ty * triple.side / ny, (ty + 1) * triple.side / ny);
            let out_side = side.unwrap_or((x1 - x0).min(y1 - y0));
            tiles.push(triple.crop(x0, y0, x1, y1, out_side));
        }
    }
    let refs: Vec<&FrameTriple> = tiles.iter().collect();
    let decoded = decoder.decode(&refs)?;
    let mut bits = vec![0u8; rows * cols];
    for (t, tile_bits) in decoded.iter().enumerate() {
        let (ty, tx) = (t / nx, t % nx);
        for r in 0..tr {
            for c in 0..tc {
                bits[(ty * tr + r) * cols + tx * tc + c] = tile_bits[r * tc + c];
            }
        }
    }
    Ok(bits)
}

/// Decodes whole-screen triples into `rows × cols` bits, directly when the
/// decoder matches the grid and view side, tiled otherwise.
pub fn decode_grid(triples: &[&FrameTriple], decoder: &dyn BitDecoder, rows: usize, cols: usize) -> Result<Vec<Vec<u8>>, DecodeError> {
    let direct = decoder.grid() == (rows, cols) && decoder.input_side().is_none_or(|s| triples.iter().all(|t| t.side == s));
    if direct {
        decoder.decode(triples)
    } else {
        triples.iter().map(|t| decode_tiled(t, decoder, rows, cols)).collect()
    }
}

/// Which candidates get decoded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamDecodeConfig {
    /// A candidate is decoded only if its phase score reaches this fraction
    /// of the best score within ±`window` candidates. 0 decodes everything.
    pub min_relative_score: f64,
    /// Must stay below the camera frames per data frame, or neighbouring
    /// true triples compete.
    pub window: usize,
    /// Largest block difference the phase score treats as modulation.
    pub difference_cap: f64,
}

impl Default for StreamDecodeConfig {
    fn default() -> Self {
        StreamDecodeConfig {
            min_relative_score: 0.75,
            window: 2,
            difference_cap: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLog {
    pub frame_index: usize,
    pub score: f64,
    pub seq: Option<u8>,
    pub corrected: Option<usize>,
    /// `skipped`, a parse failure reason, or a dedup decision.
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivered {
    pub frame_index: usize,
    pub seq: u8,
    pub unwrapped_seq: u64,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StreamReport {
    pub delivered: Vec<Delivered>,
    pub log: Vec<FrameLog>,
}

impl StreamReport {
    pub fn decoder_calls(&self) -> usize {
        self.log.iter().filter(|l| l.outcome != "skipped").count()
    }

    /// Delivered payload bits in sequence order.
    pub fn payload_bits(&self) -> Vec<u8> {
        let mut d = self.delivered.clone();
        d.sort_by_key(|x| x.unwrapped_seq);
        d.into_iter().flat_map(|x| x.payload).collect()
    }
}

/// Candidate indices worth decoding under `cfg`.
pub fn select_candidates(scores: &[f64], cfg: &StreamDecodeConfig) -> Vec<bool> {
    (0..scores.len())
        .map(|i| {
            if cfg.min_relative_score <= 0.0 {
                return true;
            }
            let lo = i.saturating_sub(cfg.window);
            let hi = (i + cfg.window + 1).min(scores.len());
            let best = scores[lo..hi].iter().copied().fold(0.0, f64::max);
            best > 0.0 && scores[i] >= cfg.min_relative_score * best
        })
        .collect()
}

/// Runs candidate triples through decoder, frame parser and dedup, in
/// camera order. The frame index used for dedup is the triple's first frame.
pub fn decode_stream(
    triples: &[FrameTriple],
    decoder: &dyn BitDecoder,
    layout: &FrameLayout,
    dedup: &mut DedupState,
    cfg: &StreamDecodeConfig,
) -> Result<StreamReport, DecodeError> {
    let (rows, cols) = (layout.rows(), layout.cols());
    let scores: Vec<f64> = triples.iter().map(|t| t.phase_score(cfg.difference_cap)).collect();
    let chosen = select_candidates(&scores, cfg);
    let picked: Vec<&FrameTriple> = triples.iter().zip(&chosen).filter(|(_, &c)| c).map(|(t, _)| t).collect();
    let decoded = decode_grid(&picked, decoder, rows, cols)?;
    let mut report = StreamReport::default();
    let mut next = decoded.into_iter();
    for ((t, &score), &use_it) in triples.iter().zip(&scores).zip(&chosen) {
        let frame_index = t.indices[0];
        let mut log = FrameLog {
            frame_index,
            score,
            seq: None,
            corrected: None,
            outcome: "skipped".into(),
        };
        if use_it {
            let bits = next.next().expect("one result per picked triple");
            match parse_frame(&bits, layout)? {
                Err(e) => log.outcome = e.reason().into(),
                Ok(parsed) => {
                    log.seq = Some(parsed.seq);
                    log.corrected = Some(parsed.corrected);
                    let decision = dedup.accept(parsed.seq, frame_index as u64);
                    log.outcome = decision.reason().into();
                    if let DedupDecision::Accept { unwrapped_seq } = decision {
                        report.delivered.push(Delivered {
                            frame_index,
                            seq: parsed.seq,
                            unwrapped_seq,
                            payload: parsed.payload,
                        });
                    }
                }
            }
        }
        report.log.push(log);
    }
    Ok(report)
}

/// Training-data generator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainGenConfig {
    pub channel: ChannelConfig,
    pub rows: usize,
    pub cols: usize,
    pub plan: ModulationPlan,
    pub side: usize,
    pub display_width: usize,
    pub display_height: usize,
    pub pairs_per_landmark: usize,
    /// Translation jitter bound in cells, per axis.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for TrainGenConfig {
    fn default() -> Self {
        TrainGenConfig {
            channel: ChannelConfig::default(),
            rows: 4,
            cols: 4,
            plan: ModulationPlan::default(),
            side: 96,
            display_width: 320,
            display_height: 180,
            pairs_per_landmark: 10,
            jitter: 0.5,
            seed: 0,
        }
    }
}

/// One labelled view triple.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSample {
    pub triple: FrameTriple,
    pub bits: Vec<u8>,
    /// Applied offset in cells, `(x, y)`.
    pub jitter: (f64, f64),
    /// Landmark interval the sample came from.
    pub group: usize,
}

/// Samples that feed [`micronn::train`] directly.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingSet {
    pub samples: Vec<TrainSample>,
}

impl Dataset for TrainingSet {
    fn len(&self) -> usize {
        self.samples.len()
    }

    fn sample(&self, index: usize) -> Sample {
        let s = &self.samples[index];
        let side = s.triple.side;
        Sample {
            input: Tensor::from_vec(&[3, side, side], s.triple.network_input()).expect("sized input"),
            target: s.bits.iter().map(|&b| f64::from(b)).collect(),
        }
    }
}

const LANDMARK_RGB: [u8; 3] = [255, 0, 0];

/// Camera index of the reddest aligned landmark sample.
fn find_landmark(frames: &[CameraFrame]) -> Option<usize> {
    let thresholds = LandmarkThresholds::default();
    frames
        .iter()
        .enumerate()
        .filter(|(_, f)| detect_landmark(&f.frame, &f.quad, &thresholds))
        .max_by(|(_, a), (_, b)| {
            let redness = |f: &CameraFrame| {
                let m = crate::extract::mean_in_quad(&f.frame, &f.quad);
                m[0] - (m[1] + m[2]) / 2.0
            };
            redness(a).total_cmp(&redness(b))
        })
        .map(|(i, _)| i)
}

/// Simulates landmark-delimited groups of Manchester pairs over `content`
/// and cuts jittered training triples from them.
///
/// Each group is a red landmark frame followed by `pairs_per_landmark`
/// pairs with random bits on random content frames. The landmark fixes the
/// stream phase: pair `j` starts `k·(1 + 2j)` camera frames after it, with
/// `k` camera frames per display frame. Every group runs its own camera
/// with a seed derived from `seed` and the group index.
pub fn gen_training_set(content: &[Frame], cfg: &TrainGenConfig, count: usize) -> Result<TrainingSet, DecodeError> {
    let geom = GridGeometry::new(cfg.rows, cfg.cols, cfg.display_width, cfg.display_height)?;
    let k = cfg.channel.rate_ratio()?;
    let mut samples = Vec::with_capacity(count);
    let mut group = 0usize;
    while samples.len() < count {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ (group as u64).wrapping_mul(0x2545_F491_4F6C_DD1D));
        let mut display = vec![Frame::filled(cfg.display_width, cfg.display_height, LANDMARK_RGB)];
        let mut truth_bits = Vec::new();
        for _ in 0..cfg.pairs_per_landmark {
            let img = &content[rng.random_range(0..content.len())];
            let img = if (img.width(), img.height()) == (cfg.display_width, cfg.display_height) {
                img.clone()
            } else {
                img.resize(cfg.display_width, cfg.display_height)
            };
            let bits: Vec<u8> = (0..geom.cells()).map(|_| u8::from(rng.random_bool(0.5))).collect();
            let (p, m) = embed_pair(&img, &bits, &geom, &cfg.plan)?;
            display.push(p);
            display.push(m);
            truth_bits.push(bits);
        }
        let mut cam = Camera::new(&cfg.channel, cfg.display_width, cfg.display_height, rng.random())?;
        let mut frames = Vec::with_capacity(display.len() * k);
        for f in &display {
            frames.extend(cam.push(f));
        }
        frames.extend(cam.finish());

        let Some(landmark) = find_landmark(&frames) else {
            group += 1;
            continue;
        };
        let truth = cam.truth();
        let (cw, ch) = truth.cell_size(cfg.rows, cfg.cols);
        for (j, bits) in truth_bits.into_iter().enumerate() {
            if samples.len() >= count {
                break;
            }
            let start = landmark + k * (1 + 2 * j);
            let idx = [start + k - 2, start + k - 1, start + k];
            if idx[2] >= frames.len() {
                break;
            }
            debug_assert_eq!(frames[idx[1]].kind, SampleKind::Transition);
            let (jx, jy) = if cfg.jitter > 0.0 {
                (rng.random_range(-cfg.jitter..=cfg.jitter), rng.random_range(-cfg.jitter..=cfg.jitter))
            } else {
                (0.0, 0.0)
            };
            let quad = truth.translate(jx * cw, jy * ch);
            let planes: [Vec<f32>; 3] = [
                unwarp_channel(&frames[idx[0]].frame, 2, &quad, cfg.side)?,
                unwarp_channel(&frames[idx[1]].frame, 2, &quad, cfg.side)?,
                unwarp_channel(&frames[idx[2]].frame, 2, &quad, cfg.side)?,
            ];
            samples.push(TrainSample {
                triple: FrameTriple {
                    planes,
                    side: cfg.side,
                    indices: idx,
                },
                bits,
                jitter: (jx, jy),
                group,
            });
        }
        group += 1;
    }
    Ok(TrainingSet { samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple_from(f1: f32, f2: f32, f3: f32, side: usize) -> FrameTriple {
        FrameTriple {
            planes: [vec![f1; side * side], vec![f2; side * side], vec![f3; side * side]],
            side,
            indices: [0, 1, 2],
        }
    }

    #[test]
    fn network_input_cancels_static_content() {
        let t = triple_from(104.0, 100.0, 96.0, 4);
        let x = t.network_input();
        assert!(x[..16].iter().all(|&v| (v - 2.0).abs() < 1e-6));
        assert!(x[16..32].iter().all(|&v| v.abs() < 1e-6));
        assert!(x[32..].iter().all(|&v| (v + 2.0).abs() < 1e-6));
        assert_eq!(triple_from(50.0, 50.0, 50.0, 4).phase_score(8.0), 0.0);
        assert!((t.phase_score(8.0) - 8.0).abs() < 1e-9);
        assert_eq!(t.phase_score(7.9), 0.0);
    }

    #[test]
    fn candidate_selection_keeps_local_peaks() {
        let scores = [1.0, 4.0, 2.0, 1.0, 0.5, 4.2, 2.5, 1.0];
        let cfg = StreamDecodeConfig {
            min_relative_score: 0.75,
            window: 2,
            ..StreamDecodeConfig::default()
        };
        let picked: Vec<usize> = select_candidates(&scores, &cfg).iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        assert_eq!(picked, vec![1, 5]);
        let all = StreamDecodeConfig {
            min_relative_score: 0.0,
            window: 2,
            ..StreamDecodeConfig::default()
        };
        assert!(select_candidates(&scores, &all).iter().all(|&b| b));
    }

    /// Decoder for a 2×2 grid that reports the tile's mean first-view level
    /// in every bit, so tile placement is visible in the output.
    struct Probe;

    impl BitDecoder for Probe {
        fn grid(&self) -> (usize, usize) {
            (1, 2)
        }
        fn input_side(&self) -> Option<usize> {
            None
        }
        fn decode(&self, triples: &[&FrameTriple]) -> Result<Vec<Vec<u8>>, DecodeError> {
            Ok(triples
                .iter()
                .map(|t| {
                    let half = t.side / 2;
                    let left = t.planes[0][half * t.side + half / 2];
                    let right = t.planes[0][half * t.side + half + half / 2];
                    vec![left as u8, right as u8]
                })
                .collect())
        }
    }

    #[test]
    fn tiles_land_in_row_major_positions() {
        // 2×4 grid decoded as four 1×2 tiles; view value = global column
        // index + 10·row.
        let side = 40;
        let mut plane = vec![0.0f32; side * side];
        for y in 0..side {
            for x in 0..side {
                plane[y * side + x] = (x / 10 + 10 * (y / 20)) as f32;
            }
        }
        let t = FrameTriple {
            planes: [plane.clone(), plane.clone(), plane],
            side,
            indices: [0, 1, 2],
        };
        let bits = decode_tiled(&t, &Probe, 2, 4).unwrap();
        assert_eq!(bits, vec![0, 1, 2, 3, 10, 11, 12, 13]);
        assert!(decode_tiled(&t, &Probe, 2, 3).is_err());
    }
}
