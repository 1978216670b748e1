//! Command-line front end. Each subcommand reads its inputs and validates
//! its config before it creates any output.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use frameproto::{DedupState, FrameLayout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{Camera, ChannelConfig, SampleKind};
use crate::codec::ModulationPlan;
use crate::collective::{decode_stream, triples_from_views, ClassicalDecoder, CnnDecoder, StreamDecodeConfig};
use crate::experiment::{metrics_csv, read_metrics, run_experiment, write_experiment, write_report, ExperimentConfig, HarnessError};
use crate::extract::{locate_screen, unwarp_channel, BackgroundSegmenter, ExtractorParams};
use crate::frame::Frame;
use crate::geometry::{iou_ioc, Quad};
use crate::pipeline::{bits_to_bytes, bytes_to_bits, display_order, encode_payload, EncodedPair};
use crate::training::{train_decoder, TrainRunConfig};

pub const ARTIFACT_SCHEMA: u32 = 1;
pub const FRAME_LOG_SCHEMA: &str = "#schema scc-frames/1";

#[derive(Debug, Parser)]
#[command(name = "scc", version, about = "Screen-camera communication codec and simulator")]
pub struct Cli {
    /// Root for relative output paths.
    #[arg(long, global = true, env = "SCC_OUTPUT_ROOT")]
    pub output_root: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a payload into Manchester frame pairs.
    Encode(EncodeArgs),
    /// Film an encoded pair directory with the simulated camera.
    Simulate(SimulateArgs),
    /// Locate the screen in every camera frame.
    Extract(ExtractArgs),
    /// Decode a camera frame directory to payload bytes.
    Decode(DecodeArgs),
    /// Train a collective bit decoder on simulated data.
    Train(TrainArgs),
    /// Run an experiment sweep and write metrics.
    Evaluate(EvaluateArgs),
    /// Turn a metrics CSV into plot-data series.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Experiment config (layout, plan, display size, hold, content).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Image directory; overrides the config's content directory.
    #[arg(long)]
    pub content: Option<PathBuf>,
    /// Payload file; random payload bits when absent.
    #[arg(long)]
    pub payload: Option<PathBuf>,
    /// Data frames of random payload when no payload file is given.
    #[arg(long, default_value_t = 32)]
    pub frames: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Directory written by `encode`.
    #[arg(long)]
    pub input: PathBuf,
    /// Experiment config; only its channel section is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory written by `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    /// Run the extractor every J frames and reuse the outline in between.
    #[arg(long, default_value_t = 1)]
    pub every: usize,
    #[arg(long, default_value_t = 2)]
    pub kernel: usize,
    /// Segment without the background plate.
    #[arg(long)]
    pub no_plate: bool,
    /// Output JSON file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Directory written by `simulate`.
    #[arg(long)]
    pub input: PathBuf,
    /// Outlines from `extract`; true outlines when absent.
    #[arg(long)]
    pub quads: Option<PathBuf>,
    /// Model file; the classical decoder when absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Model grid as ROWSxCOLS.
    #[arg(long, default_value = "4x4")]
    pub grid: String,
    /// View side for the classical decoder.
    #[arg(long, default_value_t = 96)]
    pub side: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training config; defaults when absent.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print one line per epoch.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub metrics: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

/// Manifest of an `encode` directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodeManifest {
    pub schema: u32,
    pub layout: FrameLayout,
    pub plan: ModulationPlan,
    pub hold: usize,
    pub display_rate: f64,
    pub width: usize,
    pub height: usize,
    pub payload_bits: usize,
    pub payload_sha256: String,
    pub frames: Vec<EncodedEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedEntry {
    pub seq: u8,
    pub content_index: usize,
    /// Grid bits as a `0`/`1` string, row-major.
    pub bits: String,
    pub plus: String,
    pub minus: String,
    pub psnr: f64,
}

/// Manifest of a `simulate` directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimManifest {
    pub schema: u32,
    pub seed: u64,
    pub config_hash: String,
    pub channel: ChannelConfig,
    pub layout: FrameLayout,
    pub hold: usize,
    pub payload_bits: usize,
    pub truth: [f64; 8],
    pub frames: Vec<SimEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimEntry {
    pub file: String,
    pub display_index: usize,
    pub kind: SampleKind,
    pub quad: [f64; 8],
}

/// Output of `extract`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadsFile {
    pub schema: u32,
    pub every: usize,
    pub kernel: usize,
    pub quads: Vec<Option<[f64; 8]>>,
    pub mean_iou: f64,
    pub mean_ioc: f64,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, HarnessError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), HarnessError> {
    Ok(std::fs::write(path, serde_json::to_string_pretty(value)?)?)
}

fn require_dir(p: &Path, what: &str) -> Result<(), HarnessError> {
    if p.is_dir() {
        Ok(())
    } else {
        Err(bad(format!("{what} {} is not a directory", p.display())))
    }
}

fn require_file(p: &Path, what: &str) -> Result<(), HarnessError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(bad(format!("{what} {} does not exist", p.display())))
    }
}

impl Cli {
    fn out(&self, p: &Path) -> PathBuf {
        match &self.output_root {
            Some(root) if p.is_relative() => root.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn run(&self) -> Result<(), HarnessError> {
        match &self.command {
            Command::Encode(a) => self.encode(a),
            Command::Simulate(a) => self.simulate(a),
            Command::Extract(a) => self.extract(a),
            Command::Decode(a) => self.decode(a),
            Command::Train(a) => self.train(a),
            Command::Evaluate(a) => self.evaluate(a),
            Command::Report(a) => self.report(a),
        }
    }

    fn encode(&self, a: &EncodeArgs) -> Result<(), HarnessError> {
        let mut cfg = match &a.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(dir) = &a.content {
            require_dir(dir, "content directory")?;
            cfg.content.dir = Some(dir.clone());
            cfg.content.procedural = 0;
        }
        cfg.validate()?;
        let bits = match &a.payload {
            Some(p) => {
                require_file(p, "payload file")?;
                bytes_to_bits(&std::fs::read(p)?)
            }
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                (0..a.frames * cfg.layout.data_bits()).map(|_| u8::from(rng.random_bool(0.5))).collect()
            }
        };
        if bits.is_empty() {
            return Err(bad("empty payload"));
        }
        let content = cfg.load_content()?;
        let pairs = encode_payload(&content, &bits, &cfg.layout, &cfg.plan)?;
        let out = self.out(&a.out);
        std::fs::create_dir_all(&out)?;
        let mut frames = Vec::with_capacity(pairs.len());
        for (i, p) in pairs.iter().enumerate() {
            let plus = format!("pair_{i:05}_plus.png");
            let minus = format!("pair_{i:05}_minus.png");
            p.plus.save(out.join(&plus))?;
            p.minus.save(out.join(&minus))?;
            frames.push(EncodedEntry {
                seq: p.seq,
                content_index: p.content_index,
                bits: p.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect(),
                plus,
                minus,
                psnr: p.psnr,
            });
        }
        let manifest = EncodeManifest {
            schema: ARTIFACT_SCHEMA,
            layout: cfg.layout.clone(),
            plan: cfg.plan,
            hold: cfg.hold,
            display_rate: cfg.channel.display_rate,
            width: cfg.display_width,
            height: cfg.display_height,
            payload_bits: bits.len(),
            payload_sha256: hex(&Sha256::digest(&bits)),
            frames,
        };
        write_json(&out.join("manifest.json"), &manifest)?;
        println!("{} data frames -> {}", pairs.len(), out.display());
        Ok(())
    }

    fn simulate(&self, a: &SimulateArgs) -> Result<(), HarnessError> {
        require_dir(&a.input, "input")?;
        let enc: EncodeManifest = read_json(&a.input.join("manifest.json"))?;
        let cfg = match &a.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let channel = ChannelConfig {
            display_rate: enc.display_rate,
            ..cfg.channel.clone()
        };
        let mut camera = Camera::new(&channel, enc.width, enc.height, a.seed)?;
        let pairs: Vec<EncodedPair> = enc
            .frames
            .iter()
            .map(|e| {
                Ok(EncodedPair {
                    seq: e.seq,
                    payload: Vec::new(),
                    bits: e.bits.bytes().map(|b| b - b'0').collect(),
                    content_index: e.content_index,
                    plus: Frame::load(a.input.join(&e.plus))?,
                    minus: Frame::load(a.input.join(&e.minus))?,
                    psnr: e.psnr,
                })
            })
            .collect::<Result<_, HarnessError>>()?;
        let out = self.out(&a.out);
        std::fs::create_dir_all(&out)?;
        let mut entries = Vec::new();
        let save = |cf: crate::channel::CameraFrame, entries: &mut Vec<SimEntry>| -> Result<(), HarnessError> {
            let file = format!("cam_{:06}.png", entries.len());
            cf.frame.save(out.join(&file))?;
            entries.push(SimEntry {
                file,
                display_index: cf.display_index,
                kind: cf.kind,
                quad: cf.quad.to_array(),
            });
            Ok(())
        };
        for d in display_order(&pairs, enc.hold) {
            for cf in camera.push(d) {
                save(cf, &mut entries)?;
            }
        }
        for cf in camera.finish() {
            save(cf, &mut entries)?;
        }
        let manifest = SimManifest {
            schema: ARTIFACT_SCHEMA,
            seed: a.seed,
            config_hash: hex(&Sha256::digest(toml::to_string(&channel)?.as_bytes())),
            channel,
            layout: enc.layout,
            hold: enc.hold,
            payload_bits: enc.payload_bits,
            truth: camera.truth().to_array(),
            frames: entries,
        };
        write_json(&out.join("manifest.json"), &manifest)?;
        println!("{} camera frames -> {}", manifest.frames.len(), out.display());
        Ok(())
    }

    fn extract(&self, a: &ExtractArgs) -> Result<(), HarnessError> {
        require_dir(&a.input, "input")?;
        if a.every == 0 || !(1..=3).contains(&a.kernel) {
            return Err(bad("--every must be ≥ 1 and --kernel in 1..=3"));
        }
        let sim: SimManifest = read_json(&a.input.join("manifest.json"))?;
        let segmenter = if a.no_plate {
            BackgroundSegmenter::default()
        } else {
            BackgroundSegmenter::with_plate(sim.channel.background.render(sim.channel.scene_width, sim.channel.scene_height))
        };
        let params = ExtractorParams {
            kernel: a.kernel,
            ..ExtractorParams::default()
        };
        let mut quads = Vec::with_capacity(sim.frames.len());
        let (mut iou, mut ioc, mut n) = (0.0, 0.0, 0usize);
        let mut last: Option<Quad> = None;
        for (i, e) in sim.frames.iter().enumerate() {
            if i % a.every == 0 {
                let frame = Frame::load(a.input.join(&e.file))?;
                if let Some(q) = locate_screen(&frame, &segmenter, &params)? {
                    last = Some(q);
                }
            }
            if let Some(q) = last {
                let (u, c) = iou_ioc(&q, &Quad::from_array(e.quad));
                iou += u;
                ioc += c;
                n += 1;
            }
            quads.push(last.map(|q| q.to_array()));
        }
        let file = QuadsFile {
            schema: ARTIFACT_SCHEMA,
            every: a.every,
            kernel: a.kernel,
            quads,
            mean_iou: if n > 0 { iou / n as f64 } else { 0.0 },
            mean_ioc: if n > 0 { ioc / n as f64 } else { 0.0 },
        };
        let out = self.out(&a.out);
        if let Some(parent) = out.parent() {
            std::fs::create_dir_all(parent)?;
        }
        write_json(&out, &file)?;
        println!("IoU {:.4} IoC {:.4} over {n} frames -> {}", file.mean_iou, file.mean_ioc, out.display());
        Ok(())
    }

    fn decode(&self, a: &DecodeArgs) -> Result<(), HarnessError> {
        require_dir(&a.input, "input")?;
        let sim: SimManifest = read_json(&a.input.join("manifest.json"))?;
        let quads: Vec<Option<Quad>> = match &a.quads {
            Some(p) => {
                let q: QuadsFile = read_json(p)?;
                if q.quads.len() != sim.frames.len() {
                    return Err(bad(format!("{} outlines for {} frames", q.quads.len(), sim.frames.len())));
                }
                q.quads.into_iter().map(|q| q.map(Quad::from_array)).collect()
            }
            None => sim.frames.iter().map(|e| Some(Quad::from_array(e.quad))).collect(),
        };
        let cnn = match &a.model {
            Some(p) => {
                require_file(p, "model")?;
                let (r, c) = a.grid.split_once('x').and_then(|(r, c)| Some((r.parse().ok()?, c.parse().ok()?))).ok_or_else(|| bad(format!("bad grid {:?}", a.grid)))?;
                Some(CnnDecoder::new(micronn::load_model(p)?, r, c)?)
            }
            None => None,
        };
        let side = cnn.as_ref().map_or(a.side, CnnDecoder::side);
        // Frames without an outline break the triple chain; decode each
        // unbroken run separately with one dedup state.
        let mut runs: Vec<(usize, Vec<Vec<f32>>)> = Vec::new();
        for (i, (e, q)) in sim.frames.iter().zip(&quads).enumerate() {
            match q {
                Some(q) => {
                    let view = unwarp_channel(&Frame::load(a.input.join(&e.file))?, 2, q, side)?;
                    match runs.last_mut() {
                        Some((start, views)) if *start + views.len() == i => views.push(view),
                        _ => runs.push((i, vec![view])),
                    }
                }
                None => continue,
            }
        }
        let classical = ClassicalDecoder {
            rows: sim.layout.rows(),
            cols: sim.layout.cols(),
        };
        let mut dedup = DedupState::from_rates(sim.channel.camera_rate, sim.channel.display_rate / sim.hold as f64);
        let mut delivered = Vec::new();
        let mut log = Vec::new();
        for (start, views) in &runs {
            let triples = triples_from_views(views, side, *start);
            let report = match &cnn {
                Some(c) => decode_stream(&triples, c, &sim.layout, &mut dedup, &StreamDecodeConfig::default())?,
                None => decode_stream(&triples, &classical, &sim.layout, &mut dedup, &StreamDecodeConfig::default())?,
            };
            delivered.extend(report.delivered);
            log.extend(report.log);
        }
        delivered.sort_by_key(|d| d.unwrapped_seq);
        let mut bits: Vec<u8> = delivered.iter().flat_map(|d| d.payload.iter().copied()).collect();
        bits.truncate(sim.payload_bits);
        let out = self.out(&a.out);
        std::fs::create_dir_all(&out)?;
        std::fs::write(out.join("payload.bin"), bits_to_bytes(&bits))?;
        let mut buf = format!("{FRAME_LOG_SCHEMA}\n").into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for l in &log {
                w.serialize(l)?;
            }
            w.flush()?;
        }
        std::fs::write(out.join("frames.csv"), buf)?;
        println!("{} frames delivered -> {}", delivered.len(), out.display());
        Ok(())
    }

    fn train(&self, a: &TrainArgs) -> Result<(), HarnessError> {
        let cfg = match &a.config {
            Some(p) => TrainRunConfig::from_toml_str(&std::fs::read_to_string(p)?)?,
            None => TrainRunConfig::default(),
        };
        cfg.validate()?;
        let trained = train_decoder(&cfg, a.verbose)?;
        let out = self.out(a.out.as_ref().unwrap_or(&cfg.output_dir));
        std::fs::create_dir_all(&out)?;
        micronn::save_model(&trained.model, out.join("model.mnn"))?;
        trained.history.save_csv(out.join("history.csv"))?;
        std::fs::write(out.join("train.toml"), toml::to_string(&cfg)?)?;
        let last = trained.history.epochs.last();
        println!(
            "{} epochs, val bit accuracy {:?} -> {}",
            trained.history.epochs.len(),
            last.and_then(|e| e.val_bit_accuracy),
            out.display()
        );
        Ok(())
    }

    fn evaluate(&self, a: &EvaluateArgs) -> Result<(), HarnessError> {
        let cfg = ExperimentConfig::load(&a.config)?;
        let result = run_experiment(&cfg)?;
        let out = self.out(a.out.as_ref().unwrap_or(&cfg.output_dir));
        write_experiment(&result, &out)?;
        print!("{}", String::from_utf8_lossy(&metrics_csv(&result.rows)?));
        Ok(())
    }

    fn report(&self, a: &ReportArgs) -> Result<(), HarnessError> {
        let rows = read_metrics(&a.metrics)?;
        let files = write_report(&rows, self.out(&a.out))?;
        for f in files {
            println!("{}", f.display());
        }
        Ok(())
    }
}
