//! End-to-end links: payload bits to Manchester pairs, through the simulated
//! camera, back to delivered payloads.

use frameproto::{assemble_frame, DedupState, FrameLayout};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{perturb_quad, Camera, ChannelConfig, ChannelError, Perturbation};
use crate::codec::{embed_pair, psnr, CodecError, GridGeometry, ModulationPlan};
use crate::collective::{decode_grid, decode_stream, BitDecoder, DecodeError, FrameTriple, StreamDecodeConfig, StreamReport};
use crate::extract::{locate_screen, unwarp_channel, BackgroundSegmenter, ExtractError, ExtractorParams};
use crate::frame::Frame;
use crate::geometry::{iou_ioc, Quad};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no content frames")]
    EmptyContent,
    #[error("no data frames to send")]
    EmptyStream,
    #[error("hold must be at least 1")]
    Hold,
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Layout(#[from] frameproto::FrameError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
}

/// Bytes to bits, most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|&b| (0..8).rev().map(move |i| (b >> i) & 1)).collect()
}

/// Bits to bytes, most significant bit first; the last byte is zero-padded.
pub fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i))))
        .collect()
}

/// Splits payload bits into frame-sized chunks, zero-padding the last.
pub fn chunk_payload(bits: &[u8], layout: &FrameLayout) -> Vec<Vec<u8>> {
    let d = layout.data_bits();
    bits.chunks(d)
        .map(|c| {
            let mut v = c.to_vec();
            v.resize(d, 0);
            v
        })
        .collect()
}

/// One data frame and its display pair.
#[derive(Debug, Clone)]
pub struct EncodedPair {
    pub seq: u8,
    pub payload: Vec<u8>,
    /// Grid bits, row-major.
    pub bits: Vec<u8>,
    pub content_index: usize,
    pub plus: Frame,
    pub minus: Frame,
    /// Mean PSNR of the two modulated frames against the content.
    pub psnr: f64,
}

pub fn encode_pair(content: &Frame, payload: &[u8], seq: u8, layout: &FrameLayout, plan: &ModulationPlan) -> Result<EncodedPair, PipelineError> {
    let bits = assemble_frame(payload, seq, layout)?;
    let geom = GridGeometry::new(layout.rows(), layout.cols(), content.width(), content.height())?;
    let (plus, minus) = embed_pair(content, &bits, &geom, plan)?;
    let psnr = (psnr(content, &plus)? + psnr(content, &minus)?) / 2.0;
    Ok(EncodedPair {
        seq,
        payload: payload.to_vec(),
        bits,
        content_index: 0,
        plus,
        minus,
        psnr,
    })
}

/// Encodes payload bits frame by frame over the content, which cycles.
/// Sequence numbers count up modulo 32.
pub fn encode_payload(content: &[Frame], payload_bits: &[u8], layout: &FrameLayout, plan: &ModulationPlan) -> Result<Vec<EncodedPair>, PipelineError> {
    if content.is_empty() {
        return Err(PipelineError::EmptyContent);
    }
    chunk_payload(payload_bits, layout)
        .iter()
        .enumerate()
        .map(|(i, chunk)| {
            let ci = i % content.len();
            let mut p = encode_pair(&content[ci], chunk, (i % 32) as u8, layout, plan)?;
            p.content_index = ci;
            Ok(p)
        })
        .collect()
}

/// Display refresh order: each pair as `F+` then `F−`, each held for `hold`
/// refreshes.
pub fn display_order(pairs: &[EncodedPair], hold: usize) -> impl Iterator<Item = &Frame> {
    pairs
        .iter()
        .flat_map(move |p| std::iter::repeat_n(&p.plus, hold).chain(std::iter::repeat_n(&p.minus, hold)))
}

/// Where the receiver's screen outlines come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum QuadSource {
    Truth,
    /// Run the extractor on every `every`-th camera frame and reuse the last
    /// outline in between.
    Extract {
        every: usize,
        #[serde(default)]
        params: ExtractorParams,
    },
}

impl Default for QuadSource {
    fn default() -> Self {
        QuadSource::Truth
    }
}

/// Camera-frame phase of the true triples in a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamPhase {
    /// Camera frames per data frame.
    pub period: usize,
    /// Offset of the true triple's first frame within a period.
    pub offset: usize,
}

impl StreamPhase {
    pub fn new(frames_per_display: usize, hold: usize) -> StreamPhase {
        StreamPhase {
            period: 2 * hold * frames_per_display,
            offset: hold * frames_per_display - 2,
        }
    }

    pub fn true_start(&self, pair: usize) -> usize {
        pair * self.period + self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub layout: FrameLayout,
    pub channel: ChannelConfig,
    pub hold: usize,
    pub side: usize,
    pub quads: QuadSource,
    pub perturbation: Option<Perturbation>,
    pub stream: StreamDecodeConfig,
}

#[derive(Debug, Clone, Default)]
pub struct LinkOutcome {
    pub sent: usize,
    pub recovered: usize,
    /// Delivered payloads matching no nearby sent frame.
    pub corrupted: usize,
    /// Deliveries of a frame already delivered.
    pub duplicates: usize,
    pub bit_errors: usize,
    pub bits_checked: usize,
    pub camera_frames: usize,
    /// Camera frames without any screen outline.
    pub missing_quads: usize,
    pub mean_iou: f64,
    pub mean_ioc: f64,
    pub report: StreamReport,
}

impl LinkOutcome {
    pub fn fer(&self) -> f64 {
        if self.sent == 0 {
            return 1.0;
        }
        1.0 - self.recovered as f64 / self.sent as f64
    }

    pub fn ber(&self) -> f64 {
        if self.bits_checked == 0 {
            return 1.0;
        }
        self.bit_errors as f64 / self.bits_checked as f64
    }
}

/// Camera-side view extraction for one stream.
struct Receiver<'a> {
    params: &'a LinkParams,
    truth: Quad,
    geom: GridGeometry,
    phase: StreamPhase,
    segmenter: Option<BackgroundSegmenter>,
    last_quad: Option<Quad>,
    seed: u64,
    views: Vec<Option<Vec<f32>>>,
    iou: f64,
    ioc: f64,
    outlined: usize,
}

impl Receiver<'_> {
    fn take(&mut self, frame: &Frame) -> Result<(), PipelineError> {
        let index = self.views.len();
        let quad = match &self.params.quads {
            QuadSource::Truth => Some(self.truth),
            QuadSource::Extract { every, params } => {
                if index % (*every).max(1) == 0 {
                    let seg = self.segmenter.as_ref().expect("extractor has a segmenter");
                    if let Some(q) = locate_screen(frame, seg, params)? {
                        self.last_quad = Some(q);
                    }
                }
                self.last_quad
            }
        };
        let quad = quad.map(|q| match &self.params.perturbation {
            Some(p) => {
                let group = (index / self.phase.period) as u64;
                perturb_quad(&q, p, &self.geom, self.seed ^ group.wrapping_mul(0x9E37_79B9_7F4A_7C15))
            }
            None => q,
        });
        let view = match quad {
            Some(q) if q.is_convex() => {
                let (iou, ioc) = iou_ioc(&q, &self.truth);
                self.iou += iou;
                self.ioc += ioc;
                self.outlined += 1;
                Some(unwarp_channel(frame, 2, &q, self.params.side)?)
            }
            _ => None,
        };
        self.views.push(view);
        Ok(())
    }
}

fn triple_at(views: &[Option<Vec<f32>>], start: usize, side: usize) -> Option<FrameTriple> {
    let a = views.get(start)?.as_ref()?;
    let b = views.get(start + 1)?.as_ref()?;
    let c = views.get(start + 2)?.as_ref()?;
    Some(FrameTriple {
        planes: [a.clone(), b.clone(), c.clone()],
        side,
        indices: [start, start + 1, start + 2],
    })
}

/// Sends `pairs` through a fresh camera and decodes the result.
///
/// BER is measured on the true triples of every sent frame. A delivered
/// payload counts as recovering frame `j` when its sequence number and
/// payload both match `j` and it was decoded within one data frame of `j`.
pub fn run_link(pairs: &[EncodedPair], params: &LinkParams, decoder: &dyn BitDecoder, seed: u64) -> Result<LinkOutcome, PipelineError> {
    let first = pairs.first().ok_or(PipelineError::EmptyStream)?;
    if params.hold == 0 {
        return Err(PipelineError::Hold);
    }
    let (w, h) = (first.plus.width(), first.plus.height());
    let layout = &params.layout;
    let mut camera = Camera::new(&params.channel, w, h, seed)?;
    let phase = StreamPhase::new(camera.frames_per_display(), params.hold);
    let segmenter = match params.quads {
        QuadSource::Truth => None,
        QuadSource::Extract { .. } => {
            let plate = params.channel.background.render(params.channel.scene_width, params.channel.scene_height);
            Some(BackgroundSegmenter::with_plate(plate))
        }
    };
    let mut rx = Receiver {
        params,
        truth: camera.truth(),
        geom: GridGeometry::new(layout.rows(), layout.cols(), w, h)?,
        phase,
        segmenter,
        last_quad: None,
        seed: seed.rotate_left(17),
        views: Vec::with_capacity(pairs.len() * phase.period),
        iou: 0.0,
        ioc: 0.0,
        outlined: 0,
    };
    for display in display_order(pairs, params.hold) {
        for cf in camera.push(display) {
            rx.take(&cf.frame)?;
        }
    }
    for cf in camera.finish() {
        rx.take(&cf.frame)?;
    }

    let side = params.side;
    let views = std::mem::take(&mut rx.views);
    let triples: Vec<FrameTriple> = (0..views.len().saturating_sub(2)).filter_map(|i| triple_at(&views, i, side)).collect();
    let mut dedup = DedupState::from_rates(params.channel.camera_rate, params.channel.display_rate / params.hold as f64);
    let report = decode_stream(&triples, decoder, layout, &mut dedup, &params.stream)?;

    let truth_triples: Vec<(usize, FrameTriple)> = (0..pairs.len())
        .filter_map(|i| triple_at(&views, phase.true_start(i), side).map(|t| (i, t)))
        .collect();
    let refs: Vec<&FrameTriple> = truth_triples.iter().map(|(_, t)| t).collect();
    let decoded = decode_grid(&refs, decoder, layout.rows(), layout.cols())?;
    let mut out = LinkOutcome {
        sent: pairs.len(),
        camera_frames: views.len(),
        missing_quads: views.iter().filter(|v| v.is_none()).count(),
        ..LinkOutcome::default()
    };
    for ((i, _), bits) in truth_triples.iter().zip(&decoded) {
        out.bits_checked += bits.len();
        out.bit_errors += bits.iter().zip(&pairs[*i].bits).filter(|(a, b)| a != b).count();
    }
    // Frames whose true triple never formed count as fully wrong.
    let unseen = pairs.len() - truth_triples.len();
    out.bits_checked += unseen * layout.cells();
    out.bit_errors += unseen * layout.cells();

    let mut recovered = vec![false; pairs.len()];
    for d in &report.delivered {
        let approx = (d.frame_index as f64 - phase.offset as f64) / phase.period as f64;
        let centre = approx.round().max(0.0) as usize;
        let matched = (centre.saturating_sub(1)..=centre + 1)
            .filter(|&j| j < pairs.len())
            .find(|&j| pairs[j].seq == d.seq && pairs[j].payload == d.payload);
        match matched {
            Some(j) if recovered[j] => out.duplicates += 1,
            Some(j) => recovered[j] = true,
            None => out.corrupted += 1,
        }
    }
    out.recovered = recovered.iter().filter(|&&r| r).count();
    if rx.outlined > 0 {
        out.mean_iou = rx.iou / rx.outlined as f64;
        out.mean_ioc = rx.ioc / rx.outlined as f64;
    }
    out.report = report;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::ClassicalDecoder;
    use crate::content::procedural_content;

    #[test]
    fn bit_byte_round_trip() {
        let bytes = vec![0xA5, 0x01, 0xFF];
        let bits = bytes_to_bits(&bytes);
        assert_eq!(&bits[..8], &[1, 0, 1, 0, 0, 1, 0, 1]);
        assert_eq!(bits_to_bytes(&bits), bytes);
        assert_eq!(bits_to_bytes(&[1, 1]), vec![0xC0]);
    }

    #[test]
    fn payload_chunks_are_padded() {
        let l = FrameLayout::new(4, 4, 0).unwrap();
        let chunks = chunk_payload(&[1; 12], &l);
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[2], vec![1, 1, 0, 0, 0]);
    }

    #[test]
    fn true_triple_phase() {
        let p = StreamPhase::new(2, 1);
        assert_eq!((p.period, p.offset), (4, 0));
        let p = StreamPhase::new(2, 2);
        assert_eq!((p.period, p.offset), (8, 2));
        assert_eq!(p.true_start(3), 26);
    }

    #[test]
    fn quiet_link_delivers_everything() {
        let layout = FrameLayout::new(4, 4, 0).unwrap();
        let content = procedural_content(4, 160, 90, 1);
        let bits: Vec<u8> = (0..layout.data_bits() * 12).map(|i| ((i * 7) % 3 == 0) as u8).collect();
        let pairs = encode_payload(&content, &bits, &layout, &ModulationPlan::default()).unwrap();
        let params = LinkParams {
            layout: layout.clone(),
            channel: ChannelConfig {
                noise_sigma: 0.0,
                ..ChannelConfig::default()
            },
            hold: 1,
            side: 64,
            quads: QuadSource::Truth,
            perturbation: None,
            stream: StreamDecodeConfig::default(),
        };
        let out = run_link(&pairs, &params, &ClassicalDecoder { rows: 4, cols: 4 }, 3).unwrap();
        assert_eq!(out.bit_errors, 0);
        assert_eq!((out.recovered, out.corrupted, out.duplicates), (12, 0, 0));
        assert_eq!(out.camera_frames, 12 * 4);
        assert!((out.mean_iou - 1.0).abs() < 1e-9);
    }
}
