//! Experiment sweeps: configuration, per-condition runs and their outputs.
//!
//! A config fixes one base link and lists sweep values; every combination
//! of sweep values is one condition and one row of `metrics.csv`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use frameproto::FrameLayout;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::{ChannelConfig, Perturbation};
use crate::codec::ModulationPlan;
use crate::collective::{BitDecoder, ClassicalDecoder, CnnDecoder, DecodeError, FrameTriple, StreamDecodeConfig};
use crate::content::{load_content_dir, procedural_content};
use crate::frame::{Frame, FrameIoError};
use crate::metrics::{frame_rate, goodput_at, raw_throughput_at, throughput_at};
use crate::pipeline::{encode_payload, run_link, LinkParams, PipelineError, QuadSource};

pub const METRICS_SCHEMA: &str = "#schema scc-metrics/1";
pub const MANIFEST_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("config parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config write: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Frame(#[from] FrameIoError),
    #[error(transparent)]
    Model(#[from] micronn::NnError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
    #[error(transparent)]
    Extract(#[from] crate::extract::ExtractError),
}

/// Bit decoder selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DecoderChoice {
    Classical,
    /// Model file with its `rows × cols` output grid; larger layouts are
    /// decoded tile by tile.
    Cnn { model: PathBuf, rows: usize, cols: usize },
}

impl Default for DecoderChoice {
    fn default() -> Self {
        DecoderChoice::Classical
    }
}

/// Content frames: a directory of images, procedural frames, or both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContentSource {
    pub dir: Option<PathBuf>,
    pub procedural: usize,
}

impl Default for ContentSource {
    fn default() -> Self {
        ContentSource { dir: None, procedural: 20 }
    }
}

/// Sweep values. An empty list keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub distances: Vec<f64>,
    pub angles: Vec<f64>,
    pub plans: Vec<ModulationPlan>,
    pub parity_fractions: Vec<f64>,
    pub noise: Vec<f64>,
    pub perturbations: Vec<Perturbation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Data frames sent per condition.
    pub frames: usize,
    pub display_width: usize,
    pub display_height: usize,
    /// Side of the unwarped receiver view.
    pub side: usize,
    /// Display refreshes per Manchester frame; 2 models 30 FPS content.
    pub hold: usize,
    pub layout: FrameLayout,
    pub plan: ModulationPlan,
    pub channel: ChannelConfig,
    pub decoder: DecoderChoice,
    pub quads: QuadSource,
    pub stream: StreamDecodeConfig,
    pub content: ContentSource,
    pub output_dir: PathBuf,
    pub sweep: Sweep,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            frames: 60,
            display_width: 320,
            display_height: 180,
            side: 96,
            hold: 1,
            layout: FrameLayout::new(10, 10, 50).expect("default layout"),
            plan: ModulationPlan::default(),
            channel: ChannelConfig::default(),
            decoder: DecoderChoice::default(),
            quads: QuadSource::default(),
            stream: StreamDecodeConfig::default(),
            content: ContentSource::default(),
            output_dir: PathBuf::from("runs/experiment"),
            sweep: Sweep::default(),
        }
    }
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<ExperimentConfig, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ExperimentConfig, HarnessError> {
        ExperimentConfig::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        Ok(toml::to_string(self)?)
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String, HarnessError> {
        Ok(hex(&Sha256::digest(self.to_toml()?.as_bytes())))
    }

    /// Checks everything a run needs before any output is written.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.frames == 0 {
            return Err(bad("frames must be at least 1"));
        }
        if self.hold == 0 {
            return Err(bad("hold must be at least 1"));
        }
        if self.side < 8 {
            return Err(bad("side must be at least 8"));
        }
        if self.display_width < self.layout.cols() || self.display_height < self.layout.rows() {
            return Err(bad("display smaller than the grid"));
        }
        if let QuadSource::Extract { every, params } = &self.quads {
            if *every == 0 {
                return Err(bad("extractor interval must be at least 1"));
            }
            if !(1..=3).contains(&params.kernel) {
                return Err(bad("extractor kernel must be 1, 2 or 3"));
            }
        }
        if let Some(dir) = &self.content.dir {
            if !dir.is_dir() {
                return Err(bad(format!("content directory {} does not exist", dir.display())));
            }
        } else if self.content.procedural == 0 {
            return Err(bad("no content: set content.dir or content.procedural"));
        }
        if let DecoderChoice::Cnn { model, .. } = &self.decoder {
            if !model.is_file() {
                return Err(bad(format!("model file {} does not exist", model.display())));
            }
        }
        for cond in self.conditions()? {
            cond.plan.validate().map_err(|e| bad(e.to_string()))?;
            self.condition_channel(&cond).screen_homography(self.display_width, self.display_height).map_err(|e| bad(e.to_string()))?;
            self.condition_channel(&cond).rate_ratio().map_err(|e| bad(e.to_string()))?;
        }
        Ok(())
    }

    /// Every combination of sweep values, perturbations innermost.
    pub fn conditions(&self) -> Result<Vec<Condition>, HarnessError> {
        let or = |v: &Vec<f64>, base: f64| if v.is_empty() { vec![base] } else { v.clone() };
        let distances = or(&self.sweep.distances, self.channel.distance_m);
        let angles = or(&self.sweep.angles, self.channel.angle_deg);
        let noise = or(&self.sweep.noise, self.channel.noise_sigma);
        let plans = if self.sweep.plans.is_empty() { vec![self.plan] } else { self.sweep.plans.clone() };
        let layouts: Vec<FrameLayout> = if self.sweep.parity_fractions.is_empty() {
            vec![self.layout.clone()]
        } else {
            self.sweep
                .parity_fractions
                .iter()
                .map(|&f| {
                    if !(0.0..1.0).contains(&f) {
                        return Err(bad(format!("parity fraction {f} outside [0, 1)")));
                    }
                    FrameLayout::with_parity_fraction(self.layout.rows(), self.layout.cols(), f).map_err(|e| bad(e.to_string()))
                })
                .collect::<Result<_, _>>()?
        };
        let perturbations: Vec<Option<Perturbation>> = if self.sweep.perturbations.is_empty() {
            vec![None]
        } else {
            self.sweep.perturbations.iter().copied().map(Some).collect()
        };
        let mut out = Vec::new();
        for &distance_m in &distances {
            for &angle_deg in &angles {
                for &plan in &plans {
                    for layout in &layouts {
                        for &noise_sigma in &noise {
                            for &perturbation in &perturbations {
                                out.push(Condition {
                                    index: out.len(),
                                    distance_m,
                                    angle_deg,
                                    plan,
                                    layout: layout.clone(),
                                    noise_sigma,
                                    perturbation,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn condition_channel(&self, cond: &Condition) -> ChannelConfig {
        ChannelConfig {
            distance_m: cond.distance_m,
            angle_deg: cond.angle_deg,
            noise_sigma: cond.noise_sigma,
            ..self.channel.clone()
        }
    }

    /// Procedural frames followed by any directory frames, at display size.
    pub fn load_content(&self) -> Result<Vec<Frame>, HarnessError> {
        let (w, h) = (self.display_width, self.display_height);
        let mut frames = procedural_content(self.content.procedural, w, h, self.seed);
        if let Some(dir) = &self.content.dir {
            frames.extend(load_content_dir(dir, w, h)?);
        }
        if frames.is_empty() {
            return Err(bad("content source produced no frames"));
        }
        Ok(frames)
    }

    pub fn load_decoder(&self) -> Result<Decoder, HarnessError> {
        Ok(match &self.decoder {
            DecoderChoice::Classical => Decoder::Classical,
            DecoderChoice::Cnn { model, rows, cols } => Decoder::Cnn(CnnDecoder::new(micronn::load_model(model)?, *rows, *cols)?),
        })
    }
}

/// One point of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub index: usize,
    pub distance_m: f64,
    pub angle_deg: f64,
    pub plan: ModulationPlan,
    pub layout: FrameLayout,
    pub noise_sigma: f64,
    pub perturbation: Option<Perturbation>,
}

/// A loaded decoder, bound to a layout per condition.
#[derive(Debug, Clone)]
pub enum Decoder {
    Classical,
    Cnn(CnnDecoder),
}

impl Decoder {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::Classical => "classical",
            Decoder::Cnn(_) => "cnn",
        }
    }

    pub fn bind(&self, layout: &FrameLayout) -> BoundDecoder<'_> {
        match self {
            Decoder::Classical => BoundDecoder::Classical(ClassicalDecoder {
                rows: layout.rows(),
                cols: layout.cols(),
            }),
            Decoder::Cnn(c) => BoundDecoder::Cnn(c),
        }
    }
}

pub enum BoundDecoder<'a> {
    Classical(ClassicalDecoder),
    Cnn(&'a CnnDecoder),
}

impl BitDecoder for BoundDecoder<'_> {
    fn grid(&self) -> (usize, usize) {
        match self {
            BoundDecoder::Classical(c) => c.grid(),
            BoundDecoder::Cnn(c) => c.grid(),
        }
    }

    fn input_side(&self) -> Option<usize> {
        match self {
            BoundDecoder::Classical(c) => c.input_side(),
            BoundDecoder::Cnn(c) => c.input_side(),
        }
    }

    fn decode(&self, triples: &[&FrameTriple]) -> Result<Vec<Vec<u8>>, DecodeError> {
        match self {
            BoundDecoder::Classical(c) => c.decode(triples),
            BoundDecoder::Cnn(c) => c.decode(triples),
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub condition: usize,
    pub distance_m: f64,
    pub angle_deg: f64,
    pub delta: String,
    pub parity_fraction: f64,
    pub noise_sigma: f64,
    pub perturbation: String,
    pub magnitude: f64,
    pub decoder: String,
    pub frames_sent: usize,
    pub frames_recovered: usize,
    pub corrupted: usize,
    pub duplicates: usize,
    pub decoder_calls: usize,
    pub fer: f64,
    pub ber: f64,
    pub goodput_bps: f64,
    pub throughput_bps: f64,
    pub raw_throughput_bps: f64,
    pub psnr_db: f64,
    pub iou: f64,
    pub ioc: f64,
    /// Empty unless the condition failed.
    pub error: String,
}

impl MetricsRow {
    fn labels(cond: &Condition, decoder: &str) -> MetricsRow {
        MetricsRow {
            condition: cond.index,
            distance_m: cond.distance_m,
            angle_deg: cond.angle_deg,
            delta: cond.plan.label(),
            parity_fraction: cond.layout.parity_fraction(),
            noise_sigma: cond.noise_sigma,
            perturbation: cond.perturbation.map_or("none", |p| p.kind.label()).into(),
            magnitude: cond.perturbation.map_or(0.0, |p| p.magnitude),
            decoder: decoder.into(),
            frames_sent: 0,
            frames_recovered: 0,
            corrupted: 0,
            duplicates: 0,
            decoder_calls: 0,
            fer: 1.0,
            ber: f64::NAN,
            goodput_bps: 0.0,
            throughput_bps: 0.0,
            raw_throughput_bps: f64::NAN,
            psnr_db: f64::NAN,
            iou: f64::NAN,
            ioc: f64::NAN,
            error: String::new(),
        }
    }
}

/// Independent stream of seeds per purpose.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs one condition with random payload bits.
pub fn run_condition(config: &ExperimentConfig, cond: &Condition, content: &[Frame], decoder: &Decoder) -> MetricsRow {
    let mut row = MetricsRow::labels(cond, decoder.name());
    match try_condition(config, cond, content, decoder, &mut row) {
        Ok(()) => row,
        Err(e) => {
            row.error = e.to_string();
            row
        }
    }
}

fn try_condition(config: &ExperimentConfig, cond: &Condition, content: &[Frame], decoder: &Decoder, row: &mut MetricsRow) -> Result<(), HarnessError> {
    let seed = derive_seed(config.seed, cond.index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layout = &cond.layout;
    let bits: Vec<u8> = (0..config.frames * layout.data_bits()).map(|_| u8::from(rng.random_bool(0.5))).collect();
    let pairs = encode_payload(content, &bits, layout, &cond.plan)?;
    let params = LinkParams {
        layout: layout.clone(),
        channel: config.condition_channel(cond),
        hold: config.hold,
        side: config.side,
        quads: config.quads,
        perturbation: cond.perturbation,
        stream: config.stream,
    };
    let out = run_link(&pairs, &params, &decoder.bind(layout), rng.random())?;
    let fr = frame_rate(params.channel.display_rate, config.hold);
    let (fer, ber) = (out.fer(), out.ber());
    row.frames_sent = out.sent;
    row.frames_recovered = out.recovered;
    row.corrupted = out.corrupted;
    row.duplicates = out.duplicates;
    row.decoder_calls = out.report.decoder_calls();
    row.fer = fer;
    row.ber = ber;
    row.goodput_bps = goodput_at(layout, fr, fer);
    row.throughput_bps = throughput_at(layout, fr, fer);
    row.raw_throughput_bps = raw_throughput_at(layout, fr, ber);
    row.psnr_db = pairs.iter().map(|p| p.psnr).sum::<f64>() / pairs.len() as f64;
    row.iou = out.mean_iou;
    row.ioc = out.mean_ioc;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: u32,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub content_digest: String,
    pub conditions: usize,
    pub failed_conditions: usize,
    pub metrics_file: String,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub rows: Vec<MetricsRow>,
    pub manifest: Manifest,
}

/// SHA-256 over frame sizes and pixels.
pub fn content_digest(frames: &[Frame]) -> String {
    let mut h = Sha256::new();
    for f in frames {
        h.update((f.width() as u64).to_le_bytes());
        h.update((f.height() as u64).to_le_bytes());
        h.update(f.data());
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Validates the config, loads content and decoder, and runs every
/// condition. Conditions run on worker threads; rows come back in
/// condition order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    config.validate()?;
    let content = config.load_content()?;
    let decoder = config.load_decoder()?;
    run_experiment_with(config, &content, &decoder)
}

pub fn run_experiment_with(config: &ExperimentConfig, content: &[Frame], decoder: &Decoder) -> Result<ExperimentOutput, HarnessError> {
    let conditions = config.conditions()?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(conditions.len()).max(1);
    let next = AtomicUsize::new(0);
    let mut rows: Vec<Option<MetricsRow>> = vec![None; conditions.len()];
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(cond) = conditions.get(i) else { break };
                        done.push((i, run_condition(config, cond, content, decoder)));
                    }
                    done
                })
            })
            .collect();
        for h in handles {
            for (i, row) in h.join().expect("worker panicked") {
                rows[i] = Some(row);
            }
        }
    });
    let rows: Vec<MetricsRow> = rows.into_iter().map(|r| r.expect("every condition ran")).collect();
    let manifest = Manifest {
        schema: MANIFEST_SCHEMA,
        version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        config_hash: config.hash()?,
        content_digest: content_digest(content),
        conditions: rows.len(),
        failed_conditions: rows.iter().filter(|r| !r.error.is_empty()).count(),
        metrics_file: "metrics.csv".into(),
        config: config.clone(),
    };
    Ok(ExperimentOutput { rows, manifest })
}

/// Metrics CSV with a schema comment line ahead of the header.
pub fn metrics_csv(rows: &[MetricsRow]) -> Result<Vec<u8>, HarnessError> {
    let mut buf = format!("{METRICS_SCHEMA}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub fn read_metrics(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    match text.lines().next() {
        Some(l) if l.trim() == METRICS_SCHEMA => {}
        other => return Err(bad(format!("metrics schema line {other:?}, expected {METRICS_SCHEMA:?}"))),
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

/// Writes `metrics.csv` and `manifest.json` into `dir`.
pub fn write_experiment(out: &ExperimentOutput, dir: impl AsRef<Path>) -> Result<(), HarnessError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(&out.manifest.metrics_file), metrics_csv(&out.rows)?)?;
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&out.manifest)?)?;
    Ok(())
}

pub const PLOT_SCHEMA: &str = "#schema scc-plot/1";

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    Distance,
    Angle,
    Parity,
    Noise,
    Magnitude,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Distance => "distance",
            Axis::Angle => "angle",
            Axis::Parity => "parity",
            Axis::Noise => "noise",
            Axis::Magnitude => "magnitude",
        }
    }

    fn value(self, r: &MetricsRow) -> f64 {
        match self {
            Axis::Distance => r.distance_m,
            Axis::Angle => r.angle_deg,
            Axis::Parity => r.parity_fraction,
            Axis::Noise => r.noise_sigma,
            Axis::Magnitude => r.magnitude,
        }
    }
}

const AXES: [Axis; 5] = [Axis::Distance, Axis::Angle, Axis::Parity, Axis::Noise, Axis::Magnitude];

/// Series label from every condition field except the x axis.
fn series_key(r: &MetricsRow, x: Axis) -> String {
    let mut parts = vec![format!("decoder={}", r.decoder), format!("delta={}", r.delta)];
    for a in AXES {
        if a != x && a != Axis::Magnitude {
            parts.push(format!("{}={}", a.name(), a.value(r)));
        }
    }
    if x == Axis::Magnitude {
        parts.push(format!("perturbation={}", r.perturbation));
    } else {
        parts.push(format!("perturbation={}:{}", r.perturbation, r.magnitude));
    }
    parts.join(" ")
}

/// Writes one `series,x,y` file per metric and swept axis; returns the
/// paths written. Axes with a single value are skipped.
pub fn write_report(rows: &[MetricsRow], dir: impl AsRef<Path>) -> Result<Vec<PathBuf>, HarnessError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let metrics: [(&str, fn(&MetricsRow) -> f64); 4] = [
        ("fer", |r| r.fer),
        ("ber", |r| r.ber),
        ("goodput", |r| r.goodput_bps),
        ("psnr", |r| r.psnr_db),
    ];
    let mut written = Vec::new();
    for x in AXES {
        let mut xs: Vec<f64> = rows.iter().map(|r| x.value(r)).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        if xs.len() < 2 {
            continue;
        }
        for (name, metric) in metrics {
            let mut points: Vec<(String, f64, f64)> = rows.iter().filter(|r| r.error.is_empty()).map(|r| (series_key(r, x), x.value(r), metric(r))).collect();
            points.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let mut buf = format!("{PLOT_SCHEMA}\n").into_bytes();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(["series", x.name(), name])?;
                for (s, xv, yv) in &points {
                    w.write_record([s.clone(), xv.to_string(), yv.to_string()])?;
                }
                w.flush()?;
            }
            let path = dir.join(format!("{name}_vs_{}.csv", x.name()));
            std::fs::write(&path, buf)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::PerturbationKind;

    fn small() -> ExperimentConfig {
        ExperimentConfig {
            frames: 6,
            display_width: 160,
            display_height: 90,
            side: 48,
            layout: FrameLayout::new(4, 4, 0).unwrap(),
            content: ContentSource { dir: None, procedural: 4 },
            channel: ChannelConfig {
                noise_sigma: 0.0,
                ..ChannelConfig::default()
            },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn defaults_round_trip_through_toml() {
        let c = ExperimentConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), c);
        assert_eq!(c.layout.rows(), 10);
        assert_eq!(c.layout.parity_bits(), 50);
        assert_eq!(c.hash().unwrap(), ExperimentConfig::from_toml_str(&text).unwrap().hash().unwrap());
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(ExperimentConfig::from_toml_str("sed = 3").is_err());
        let c = ExperimentConfig {
            hold: 0,
            ..small()
        };
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        let c = ExperimentConfig {
            content: ContentSource {
                dir: Some("/no/such/dir".into()),
                procedural: 0,
            },
            ..small()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn sweep_expands_to_product() {
        let mut c = small();
        c.sweep.distances = vec![1.0, 1.5];
        c.sweep.perturbations = vec![Perturbation::new(PerturbationKind::Shift, 0.0), Perturbation::new(PerturbationKind::Shift, 0.2), Perturbation::new(PerturbationKind::Rotate, 0.2)];
        let conds = c.conditions().unwrap();
        assert_eq!(conds.len(), 6);
        assert_eq!(conds[4].distance_m, 1.5);
        assert_eq!(conds[4].perturbation.unwrap().magnitude, 0.2);
        assert!(conds.iter().enumerate().all(|(i, c)| c.index == i));
    }

    #[test]
    fn quiet_classical_run_is_clean_and_repeatable() {
        let mut c = small();
        c.sweep.distances = vec![1.0, 1.4];
        let a = run_experiment(&c).unwrap();
        assert!(a.rows.iter().all(|r| r.error.is_empty() && r.fer == 0.0 && r.corrupted == 0), "{:?}", a.rows);
        for r in &a.rows {
            assert!(r.goodput_bps <= r.throughput_bps && r.throughput_bps <= r.raw_throughput_bps);
        }
        let b = run_experiment(&c).unwrap();
        assert_eq!(metrics_csv(&a.rows).unwrap(), metrics_csv(&b.rows).unwrap());
        assert_eq!(a.manifest, b.manifest);
    }

    #[test]
    fn metrics_and_report_files() {
        let mut c = small();
        c.frames = 3;
        c.sweep.distances = vec![1.0, 1.5];
        let out = run_experiment(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_experiment(&out, dir.path()).unwrap();
        let back = read_metrics(dir.path().join("metrics.csv")).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].distance_m, 1.5);
        let files = write_report(&back, dir.path().join("plots")).unwrap();
        assert_eq!(files.len(), 4);
        let fer = std::fs::read_to_string(dir.path().join("plots/fer_vs_distance.csv")).unwrap();
        assert!(fer.starts_with(PLOT_SCHEMA));
        assert_eq!(fer.lines().count(), 4);
    }
}
