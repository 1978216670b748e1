//! Screen-to-camera channel: pinhole projection of a yawed screen, temporal
//! sampling with transition frames, photometric distortion and screen
//! outline perturbations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::GridGeometry;
use crate::content::Background;
use crate::frame::{quantize, Frame};
use crate::geometry::{Homography, Point, Quad};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("viewing angle {0}° must satisfy |θ| < 90°")]
    Angle(f64),
    #[error("camera rate {camera} is not an integer multiple (≥2) of display rate {display}")]
    Rate { camera: f64, display: f64 },
    #[error("screen falls behind the camera at distance {0} m")]
    BehindCamera(f64),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("empty screen frame")]
    EmptyFrame,
}

/// Channel parameters. Physical defaults describe a 25-inch 16:9 screen
/// that spans 60 % of the scene width at 1 m, seen head-on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub display_rate: f64,
    pub camera_rate: f64,
    pub distance_m: f64,
    pub angle_deg: f64,
    pub scene_width: usize,
    pub scene_height: usize,
    pub background: Background,
    pub noise_sigma: f64,
    /// Gaussian blur standard deviation in camera pixels; 0 disables.
    pub blur_radius: f64,
    pub gain: f64,
    /// Weight of the current display frame in a transition sample.
    pub transition_weight: f64,
    pub screen_width_m: f64,
    pub screen_aspect: f64,
    /// Fraction of the scene width the screen covers at 1 m, head-on.
    pub fill_at_1m: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            display_rate: 60.0,
            camera_rate: 120.0,
            distance_m: 1.0,
            angle_deg: 0.0,
            scene_width: 480,
            scene_height: 270,
            background: Background::default(),
            noise_sigma: 1.0,
            blur_radius: 0.0,
            gain: 1.0,
            transition_weight: 0.5,
            screen_width_m: 0.5534,
            screen_aspect: 16.0 / 9.0,
            fill_at_1m: 0.6,
        }
    }
}

impl ChannelConfig {
    /// Camera frames per display frame.
    pub fn rate_ratio(&self) -> Result<usize, ChannelError> {
        let r = self.camera_rate / self.display_rate;
        let k = r.round();
        if !r.is_finite() || (r - k).abs() > 1e-9 || k < 2.0 {
            return Err(ChannelError::Rate {
                camera: self.camera_rate,
                display: self.display_rate,
            });
        }
        Ok(k as usize)
    }

    /// Focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        self.fill_at_1m * self.scene_width as f64 / self.screen_width_m
    }

    /// Homography from screen-frame pixel coordinates to camera pixels.
    pub fn screen_homography(&self, screen_w: usize, screen_h: usize) -> Result<Homography, ChannelError> {
        if screen_w == 0 || screen_h == 0 {
            return Err(ChannelError::EmptyFrame);
        }
        if !(self.angle_deg.abs() < 90.0) {
            return Err(ChannelError::Angle(self.angle_deg));
        }
        let theta = self.angle_deg.to_radians();
        let (sw, sh) = (self.screen_width_m, self.screen_width_m / self.screen_aspect);
        let f = self.focal_px();
        let (cx, cy) = (self.scene_width as f64 / 2.0, self.scene_height as f64 / 2.0);
        let src = [
            Point::new(0.0, 0.0),
            Point::new(screen_w as f64, 0.0),
            Point::new(screen_w as f64, screen_h as f64),
            Point::new(0.0, screen_h as f64),
        ];
        let mut dst = [Point::default(); 4];
        for (d, s) in dst.iter_mut().zip(&src) {
            let x = (s.x / screen_w as f64 - 0.5) * sw;
            let y = (s.y / screen_h as f64 - 0.5) * sh;
            let z = self.distance_m + x * theta.sin();
            if z <= 1e-6 {
                return Err(ChannelError::BehindCamera(self.distance_m));
            }
            *d = Point::new(f * x * theta.cos() / z + cx, f * y / z + cy);
        }
        Homography::from_points(&src, &dst).ok_or_else(|| ChannelError::Degenerate("collinear screen corners".into()))
    }

    /// Distance at which a head-on screen spans the full scene width.
    pub fn filling_distance(&self) -> f64 {
        self.fill_at_1m
    }
}

/// Float RGB planes before photometric distortion.
#[derive(Debug, Clone, PartialEq)]
pub struct Radiance {
    pub width: usize,
    pub height: usize,
    pub planes: [Vec<f32>; 3],
}

impl Radiance {
    fn from_frame(f: &Frame) -> Radiance {
        Radiance {
            width: f.width(),
            height: f.height(),
            planes: std::array::from_fn(|c| f.channel(c).into_iter().map(f32::from).collect()),
        }
    }

    /// `w·self + (1−w)·other`
    pub fn blend(&self, other: &Radiance, w: f32) -> Radiance {
        Radiance {
            width: self.width,
            height: self.height,
            planes: std::array::from_fn(|c| {
                self.planes[c]
                    .iter()
                    .zip(&other.planes[c])
                    .map(|(&a, &b)| w * a + (1.0 - w) * b)
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleKind {
    Aligned,
    /// Exposure straddling the refresh into the next display frame.
    Transition,
}

#[derive(Debug, Clone)]
pub struct CameraFrame {
    pub frame: Frame,
    pub quad: Quad,
    pub display_index: usize,
    pub kind: SampleKind,
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let r = (3.0 * sigma).ceil() as i64;
    let k: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter().map(|v| (v / s) as f32).collect()
}

fn blur_plane(p: &mut [f32], w: usize, h: usize, kernel: &[f32]) {
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0f32; p.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let xx = (x as isize + i as isize - r).clamp(0, w as isize - 1) as usize;
                acc += k * p[y * w + xx];
            }
            tmp[y * w + x] = acc;
        }
    }
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let yy = (y as isize + i as isize - r).clamp(0, h as isize - 1) as usize;
                acc += k * tmp[yy * w + x];
            }
            p[y * w + x] = acc;
        }
    }
}

/// Bilinear source taps for one scene pixel covered by the screen.
#[derive(Debug, Clone, Copy)]
struct Tap {
    dst: u32,
    src: [u32; 4],
    weight: [f32; 4],
}

fn screen_taps(inv: &Homography, truth: &Quad, screen: (usize, usize), scene: (usize, usize)) -> Vec<Tap> {
    let (sw, sh) = screen;
    let (w, h) = scene;
    let (x0, y0, x1, y1) = truth.pixel_bounds(w, h);
    let mut taps = Vec::new();
    for y in y0..y1 {
        for x in x0..x1 {
            let s = inv.apply(Point::new(x as f64 + 0.5, y as f64 + 0.5));
            if s.x < 0.0 || s.y < 0.0 || s.x >= sw as f64 || s.y >= sh as f64 {
                continue;
            }
            let fx = (s.x - 0.5).clamp(0.0, (sw - 1) as f64);
            let fy = (s.y - 0.5).clamp(0.0, (sh - 1) as f64);
            let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
            let (jx, jy) = ((ix + 1).min(sw - 1), (iy + 1).min(sh - 1));
            let (ax, ay) = ((fx - ix as f64) as f32, (fy - iy as f64) as f32);
            taps.push(Tap {
                dst: (y * w + x) as u32,
                src: [(iy * sw + ix) as u32, (iy * sw + jx) as u32, (jy * sw + ix) as u32, (jy * sw + jx) as u32],
                weight: [(1.0 - ax) * (1.0 - ay), ax * (1.0 - ay), (1.0 - ax) * ay, ax * ay],
            });
        }
    }
    taps
}

/// Entries in the pre-sampled noise table, indexed by random `u16`s.
const NOISE_TABLE: usize = 1 << 16;

/// Simulated camera watching one screen. Display frames are pushed in order;
/// each push releases the camera frames of the previous display frame, since
/// its transition sample needs the next one.
pub struct Camera {
    config: ChannelConfig,
    screen_size: (usize, usize),
    truth: Quad,
    background: Radiance,
    ratio: usize,
    taps: Vec<Tap>,
    rng: ChaCha8Rng,
    noise: Option<Vec<f32>>,
    kernel: Option<Vec<f32>>,
    pending: Option<Radiance>,
    next_index: usize,
}

impl Camera {
    pub fn new(config: &ChannelConfig, screen_w: usize, screen_h: usize, seed: u64) -> Result<Camera, ChannelError> {
        let hom = config.screen_homography(screen_w, screen_h)?;
        let inv = hom.inverse().ok_or_else(|| ChannelError::Degenerate("singular homography".into()))?;
        let corners = [
            Point::new(0.0, 0.0),
            Point::new(screen_w as f64, 0.0),
            Point::new(screen_w as f64, screen_h as f64),
            Point::new(0.0, screen_h as f64),
        ];
        let truth = Quad::new(corners.map(|p| hom.apply(p)));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = (config.noise_sigma > 0.0).then(|| {
            let n = Normal::new(0.0, config.noise_sigma as f32).expect("finite sigma");
            (0..NOISE_TABLE).map(|_| n.sample(&mut rng)).collect()
        });
        let taps = screen_taps(&inv, &truth, (screen_w, screen_h), (config.scene_width, config.scene_height));
        Ok(Camera {
            ratio: config.rate_ratio()?,
            background: Radiance::from_frame(&config.background.render(config.scene_width, config.scene_height)),
            kernel: (config.blur_radius > 0.0).then(|| gaussian_kernel(config.blur_radius)),
            config: config.clone(),
            screen_size: (screen_w, screen_h),
            truth,
            taps,
            rng,
            noise,
            pending: None,
            next_index: 0,
        })
    }

    pub fn truth(&self) -> Quad {
        self.truth
    }

    pub fn frames_per_display(&self) -> usize {
        self.ratio
    }

    /// Projects a screen frame into the scene, over the background.
    pub fn project(&self, screen: &Frame) -> Radiance {
        let (sw, sh) = self.screen_size;
        assert_eq!((screen.width(), screen.height()), (sw, sh), "screen frame size changed");
        let src = screen.data();
        let mut out = self.background.clone();
        for t in &self.taps {
            for c in 0..3 {
                let v: f32 = (0..4).map(|k| t.weight[k] * f32::from(src[t.src[k] as usize * 3 + c])).sum();
                out.planes[c][t.dst as usize] = v;
            }
        }
        out
    }

    /// Gain, blur, additive noise and 8-bit quantization, in that order.
    pub fn expose(&mut self, r: &Radiance) -> Frame {
        let (w, h) = (r.width, r.height);
        let gain = self.config.gain as f32;
        let mut planes = r.planes.clone();
        for p in planes.iter_mut() {
            if gain != 1.0 {
                p.iter_mut().for_each(|v| *v *= gain);
            }
            if let Some(k) = &self.kernel {
                blur_plane(p, w, h, k);
            }
        }
        let mut data = vec![0u8; w * h * 3];
        match &self.noise {
            Some(table) => {
                let mut idx = vec![0u16; w * h * 3];
                self.rng.fill(&mut idx[..]);
                for (i, (px, n)) in data.chunks_exact_mut(3).zip(idx.chunks_exact(3)).enumerate() {
                    for c in 0..3 {
                        px[c] = quantize(planes[c][i] + table[usize::from(n[c])]);
                    }
                }
            }
            None => {
                for (i, px) in data.chunks_exact_mut(3).enumerate() {
                    for c in 0..3 {
                        px[c] = quantize(planes[c][i]);
                    }
                }
            }
        }
        Frame::from_rgb(w, h, data).expect("sized buffer")
    }

    fn emit(&mut self, current: &Radiance, next: &Radiance) -> Vec<CameraFrame> {
        let index = self.next_index;
        self.next_index += 1;
        let mut out = Vec::with_capacity(self.ratio);
        for _ in 0..self.ratio - 1 {
            out.push(CameraFrame {
                frame: self.expose(current),
                quad: self.truth,
                display_index: index,
                kind: SampleKind::Aligned,
            });
        }
        let mixed = current.blend(next, self.config.transition_weight as f32);
        out.push(CameraFrame {
            frame: self.expose(&mixed),
            quad: self.truth,
            display_index: index,
            kind: SampleKind::Transition,
        });
        out
    }

    /// Feeds the next display frame; returns the camera frames of the
    /// previous one (empty on the first call).
    pub fn push(&mut self, display: &Frame) -> Vec<CameraFrame> {
        let r = self.project(display);
        match self.pending.replace(r) {
            None => Vec::new(),
            Some(prev) => {
                let next = self.pending.take().expect("just stored");
                let out = self.emit(&prev, &next);
                self.pending = Some(next);
                out
            }
        }
    }

    /// Releases the last display frame; its transition blends with itself.
    pub fn finish(&mut self) -> Vec<CameraFrame> {
        match self.pending.take() {
            None => Vec::new(),
            Some(last) => self.emit(&last, &last),
        }
    }
}

/// One camera frame of a single screen image, with its true outline.
pub fn compose_scene(screen: &Frame, config: &ChannelConfig, seed: u64) -> Result<(Frame, Quad), ChannelError> {
    let mut cam = Camera::new(config, screen.width(), screen.height(), seed)?;
    let r = cam.project(screen);
    Ok((cam.expose(&r), cam.truth()))
}

/// Camera frames for a whole display sequence.
pub fn sample_camera_stream(display: &[Frame], config: &ChannelConfig, seed: u64) -> Result<Vec<CameraFrame>, ChannelError> {
    let first = display.first().ok_or(ChannelError::EmptyFrame)?;
    let mut cam = Camera::new(config, first.width(), first.height(), seed)?;
    let mut out = Vec::with_capacity(display.len() * cam.frames_per_display());
    for f in display {
        out.extend(cam.push(f));
    }
    out.extend(cam.finish());
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    Shift,
    Expand,
    Shrink,
    Rotate,
}

impl PerturbationKind {
    pub fn label(self) -> &'static str {
        match self {
            PerturbationKind::Shift => "SHIFT",
            PerturbationKind::Expand => "EXPAND",
            PerturbationKind::Shrink => "SHRINK",
            PerturbationKind::Rotate => "ROTATE",
        }
    }
}

/// Screen-outline error with `magnitude` in cell sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub magnitude: f64,
}

impl Perturbation {
    pub fn new(kind: PerturbationKind, magnitude: f64) -> Perturbation {
        Perturbation { kind, magnitude }
    }
}

/// Applies `p` to a true outline. Cell size in camera pixels comes from the
/// quad and the grid shape. SHIFT picks the sign on each axis and ROTATE its
/// direction from `direction_seed`; the rotation angle makes the farthest
/// corner move by `magnitude` cell widths.
pub fn perturb_quad(truth: &Quad, p: &Perturbation, geom: &GridGeometry, direction_seed: u64) -> Quad {
    let (cw, ch) = truth.cell_size(geom.rows, geom.cols);
    let m = p.magnitude.max(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(direction_seed);
    let mut sign = || if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    match p.kind {
        PerturbationKind::Shift => {
            let (sx, sy) = (sign(), sign());
            truth.translate(sx * m * cw, sy * m * ch)
        }
        PerturbationKind::Expand => truth.offset_edges(m * cw, m * ch),
        PerturbationKind::Shrink => truth.offset_edges(-m * cw, -m * ch),
        PerturbationKind::Rotate => {
            let c = truth.centroid();
            let r_max = truth.corners.iter().map(|q| q.dist(c)).fold(0.0, f64::max);
            let chord = (m * cw / (2.0 * r_max)).min(1.0);
            truth.rotate(sign() * 2.0 * chord.asin())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> ChannelConfig {
        ChannelConfig {
            noise_sigma: 0.0,
            ..ChannelConfig::default()
        }
    }

    #[test]
    fn rate_ratio_checks() {
        assert_eq!(ChannelConfig::default().rate_ratio().unwrap(), 2);
        let bad = ChannelConfig {
            camera_rate: 100.0,
            ..ChannelConfig::default()
        };
        assert!(bad.rate_ratio().is_err());
        let same = ChannelConfig {
            camera_rate: 60.0,
            ..ChannelConfig::default()
        };
        assert!(same.rate_ratio().is_err());
    }

    #[test]
    fn right_angle_is_rejected() {
        let c = ChannelConfig {
            angle_deg: 90.0,
            ..ChannelConfig::default()
        };
        assert!(matches!(c.screen_homography(10, 10), Err(ChannelError::Angle(_))));
    }

    #[test]
    fn head_on_screen_spans_configured_fraction() {
        let c = ChannelConfig::default();
        let cam = Camera::new(&c, 320, 180, 0).unwrap();
        let q = cam.truth();
        let width = q.corners[1].x - q.corners[0].x;
        assert!((width - 0.6 * 480.0).abs() < 1e-6);
        assert!((q.centroid().x - 240.0).abs() < 1e-9);
    }

    #[test]
    fn noise_has_configured_spread() {
        let c = ChannelConfig {
            noise_sigma: 2.0,
            ..ChannelConfig::default()
        };
        let screen = Frame::filled(32, 18, [100, 100, 100]);
        let (f, _) = compose_scene(&screen, &c, 4).unwrap();
        let vals: Vec<f64> = f.data().iter().map(|&v| f64::from(v) - 128.0).collect();
        let bg: Vec<f64> = vals.iter().copied().filter(|v| v.abs() < 15.0).collect();
        let sd = (bg.iter().map(|v| v * v).sum::<f64>() / bg.len() as f64).sqrt();
        // Quantization adds 1/12 to the variance.
        let expected = (4.0f64 + 1.0 / 12.0).sqrt();
        assert!((sd - expected).abs() / expected < 0.05, "{sd}");
    }

    #[test]
    fn stream_order_and_transitions() {
        let a = Frame::filled(32, 18, [0, 0, 40]);
        let b = Frame::filled(32, 18, [0, 0, 80]);
        let frames = sample_camera_stream(&[a, b], &quiet(), 0).unwrap();
        let kinds: Vec<_> = frames.iter().map(|f| (f.display_index, f.kind)).collect();
        assert_eq!(
            kinds,
            vec![
                (0, SampleKind::Aligned),
                (0, SampleKind::Transition),
                (1, SampleKind::Aligned),
                (1, SampleKind::Transition)
            ]
        );
        let center = |f: &Frame| f.get(240, 135)[2];
        assert_eq!(center(&frames[0].frame), 40);
        assert_eq!(center(&frames[1].frame), 60);
        assert_eq!(center(&frames[2].frame), 80);
        assert_eq!(center(&frames[3].frame), 80);
    }

    #[test]
    fn shift_example() {
        let truth = Quad::rect(100.0, 50.0, 100.0 + 55.0 * 10.0, 50.0 + 30.0 * 10.0);
        let geom = GridGeometry::new(10, 10, 550, 300).unwrap();
        let q = perturb_quad(&truth, &Perturbation::new(PerturbationKind::Shift, 0.3), &geom, 1);
        let d = (q.corners[0].x - truth.corners[0].x, q.corners[0].y - truth.corners[0].y);
        assert!((d.0.abs() - 16.5).abs() < 1e-9 && (d.1.abs() - 9.0).abs() < 1e-9);
        let z = perturb_quad(&truth, &Perturbation::new(PerturbationKind::Shift, 0.0), &geom, 1);
        assert_eq!(z, truth);
    }

    #[test]
    fn rotate_moves_farthest_corner_by_magnitude() {
        let truth = Quad::rect(0.0, 0.0, 400.0, 200.0);
        let geom = GridGeometry::new(4, 4, 400, 200).unwrap();
        let q = perturb_quad(&truth, &Perturbation::new(PerturbationKind::Rotate, 0.3), &geom, 7);
        let moved = q.corners.iter().zip(&truth.corners).map(|(a, b)| a.dist(*b)).fold(0.0, f64::max);
        assert!((moved - 30.0).abs() < 1e-9);
    }
}
