//! Procedural stand-ins for video content and camera backgrounds.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::frame::{Frame, FrameIoError};

/// Smooth 2-D noise in [0, 1]: bilinear interpolation of a random lattice,
/// summed over octaves.
struct ValueNoise {
    octaves: Vec<(usize, Vec<f32>)>,
}

impl ValueNoise {
    fn new(rng: &mut impl Rng, base: usize, octaves: usize) -> ValueNoise {
        let octaves = (0..octaves)
            .map(|o| {
                let n = base << o;
                (n, (0..(n + 1) * (n + 1)).map(|_| rng.random::<f32>()).collect())
            })
            .collect();
        ValueNoise { octaves }
    }

    fn at(&self, u: f32, v: f32) -> f32 {
        let mut total = 0.0;
        let mut weight = 0.0;
        let mut amp = 1.0;
        for (n, lattice) in &self.octaves {
            let x = u * *n as f32;
            let y = v * *n as f32;
            let (x0, y0) = ((x as usize).min(n - 1), (y as usize).min(n - 1));
            let (fx, fy) = (x - x0 as f32, y - y0 as f32);
            let g = |i: usize, j: usize| lattice[j * (n + 1) + i];
            let sx = fx * fx * (3.0 - 2.0 * fx);
            let sy = fy * fy * (3.0 - 2.0 * fy);
            let top = g(x0, y0) + (g(x0 + 1, y0) - g(x0, y0)) * sx;
            let bot = g(x0, y0 + 1) + (g(x0 + 1, y0 + 1) - g(x0, y0 + 1)) * sx;
            total += amp * (top + (bot - top) * sy);
            weight += amp;
            amp *= 0.5;
        }
        total / weight
    }
}

fn mix(a: [f32; 3], b: [f32; 3], t: f32) -> [f32; 3] {
    [a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t, a[2] + (b[2] - a[2]) * t]
}

fn to_px(c: [f32; 3]) -> [u8; 3] {
    c.map(|v| v.round().clamp(0.0, 255.0) as u8)
}

fn random_color(rng: &mut impl Rng, lo: f32, hi: f32) -> [f32; 3] {
    [rng.random_range(lo..hi), rng.random_range(lo..hi), rng.random_range(lo..hi)]
}

/// Sky gradient over a noisy ground with a horizon line.
fn landscape(rng: &mut impl Rng, w: usize, h: usize) -> Frame {
    let sky_top = [rng.random_range(20.0..90.0), rng.random_range(60.0..140.0), rng.random_range(150.0..255.0)];
    let sky_low = [rng.random_range(150.0..240.0), rng.random_range(150.0..220.0), rng.random_range(140.0..230.0)];
    let ground_a = random_color(rng, 20.0, 120.0);
    let ground_b = random_color(rng, 60.0, 200.0);
    let horizon = rng.random_range(0.35..0.65f32);
    let noise = ValueNoise::new(rng, 4, 5);
    let ridge = ValueNoise::new(rng, 3, 3);
    Frame::from_fn(w, h, |x, y| {
        let u = x as f32 / w as f32;
        let v = y as f32 / h as f32;
        let line = horizon + 0.15 * (ridge.at(u, 0.5) - 0.5);
        if v < line {
            to_px(mix(sky_top, sky_low, v / line))
        } else {
            to_px(mix(ground_a, ground_b, noise.at(u, v)))
        }
    })
}

/// Overlapping flat and shaded rectangles and discs.
fn shapes(rng: &mut impl Rng, w: usize, h: usize) -> Frame {
    let bg_a = random_color(rng, 0.0, 255.0);
    let bg_b = random_color(rng, 0.0, 255.0);
    let count = rng.random_range(6..14);
    let items: Vec<(bool, f32, f32, f32, f32, [f32; 3], [f32; 3])> = (0..count)
        .map(|_| {
            (
                rng.random_bool(0.5),
                rng.random::<f32>(),
                rng.random::<f32>(),
                rng.random_range(0.05..0.35),
                rng.random_range(0.05..0.35),
                random_color(rng, 0.0, 255.0),
                random_color(rng, 0.0, 255.0),
            )
        })
        .collect();
    Frame::from_fn(w, h, |x, y| {
        let u = x as f32 / w as f32;
        let v = y as f32 / h as f32;
        let mut c = mix(bg_a, bg_b, (u + v) / 2.0);
        for &(disc, cx, cy, rx, ry, ca, cb) in &items {
            let dx = (u - cx) / rx;
            let dy = (v - cy) / ry;
            let inside = if disc { dx * dx + dy * dy <= 1.0 } else { dx.abs() <= 1.0 && dy.abs() <= 1.0 };
            if inside {
                c = mix(ca, cb, ((dy + 1.0) / 2.0).clamp(0.0, 1.0));
            }
        }
        to_px(c)
    })
}

/// Colourised multi-octave noise, like foliage or rock.
fn texture(rng: &mut impl Rng, w: usize, h: usize) -> Frame {
    let a = random_color(rng, 0.0, 160.0);
    let b = random_color(rng, 90.0, 255.0);
    let c = random_color(rng, 0.0, 255.0);
    let n1 = ValueNoise::new(rng, 6, 5);
    let n2 = ValueNoise::new(rng, 2, 3);
    Frame::from_fn(w, h, |x, y| {
        let u = x as f32 / w as f32;
        let v = y as f32 / h as f32;
        to_px(mix(mix(a, b, n1.at(u, v)), c, 0.5 * n2.at(u, v)))
    })
}

/// Mostly dark frame with a few lit regions.
fn night(rng: &mut impl Rng, w: usize, h: usize) -> Frame {
    let base = random_color(rng, 0.0, 25.0);
    let glow = random_color(rng, 120.0, 255.0);
    let lights: Vec<(f32, f32, f32)> = (0..rng.random_range(2..6))
        .map(|_| (rng.random::<f32>(), rng.random::<f32>(), rng.random_range(0.05..0.2)))
        .collect();
    let noise = ValueNoise::new(rng, 5, 3);
    Frame::from_fn(w, h, |x, y| {
        let u = x as f32 / w as f32;
        let v = y as f32 / h as f32;
        let mut t = 0.0f32;
        for &(cx, cy, r) in &lights {
            let d = ((u - cx).powi(2) + (v - cy).powi(2)).sqrt() / r;
            t = t.max((1.0 - d).max(0.0));
        }
        let c = mix(base, glow, t * t);
        to_px(mix(c, [c[0] + 12.0, c[1] + 12.0, c[2] + 12.0], noise.at(u, v)))
    })
}

/// `count` deterministic frames cycling through landscape, shapes, texture
/// and night scenes.
pub fn procedural_content(count: usize, width: usize, height: usize, seed: u64) -> Vec<Frame> {
    (0..count)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9).wrapping_add(i as u64));
            match i % 4 {
                0 => landscape(&mut rng, width, height),
                1 => shapes(&mut rng, width, height),
                2 => texture(&mut rng, width, height),
                _ => night(&mut rng, width, height),
            }
        })
        .collect()
}

/// Loads every PNG or `.raw` frame in `dir` (sorted by name), resized to
/// `width × height`.
pub fn load_content_dir(dir: impl AsRef<Path>, width: usize, height: usize) -> Result<Vec<Frame>, FrameIoError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "png" || e == "raw"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let f = Frame::load(&p)?;
            Ok(if (f.width(), f.height()) == (width, height) { f } else { f.resize(width, height) })
        })
        .collect()
}

/// Kind of camera background behind the screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Background {
    Flat { rgb: [u8; 3] },
    /// Wall, floor and furniture-like blocks, generated from `seed`.
    Indoor { seed: u64 },
}

impl Default for Background {
    fn default() -> Self {
        Background::Flat { rgb: [128, 128, 128] }
    }
}

impl Background {
    pub fn render(&self, width: usize, height: usize) -> Frame {
        match *self {
            Background::Flat { rgb } => Frame::filled(width, height, rgb),
            Background::Indoor { seed } => indoor(seed, width, height),
        }
    }
}

fn indoor(seed: u64, w: usize, h: usize) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1d00_2b0c);
    let wall_a = random_color(&mut rng, 120.0, 230.0);
    let wall_b = mix(wall_a, random_color(&mut rng, 60.0, 200.0), 0.4);
    let floor = random_color(&mut rng, 40.0, 140.0);
    let floor_line = rng.random_range(0.7..0.9f32);
    let grain = ValueNoise::new(&mut rng, 8, 3);
    let blocks: Vec<(f32, f32, f32, f32, [f32; 3])> = (0..rng.random_range(3..7))
        .map(|_| {
            let x0 = rng.random::<f32>();
            let y0 = rng.random_range(0.3..0.9f32);
            (x0, y0, x0 + rng.random_range(0.05..0.25), y0 + rng.random_range(0.05..0.3), random_color(&mut rng, 20.0, 220.0))
        })
        .collect();
    Frame::from_fn(w, h, |x, y| {
        let u = x as f32 / w as f32;
        let v = y as f32 / h as f32;
        let mut c = if v < floor_line {
            mix(wall_a, wall_b, v / floor_line)
        } else {
            mix(floor, [floor[0] * 0.7, floor[1] * 0.7, floor[2] * 0.7], grain.at(u * 2.0 % 1.0, v))
        };
        for &(x0, y0, x1, y1, col) in &blocks {
            if u >= x0 && u < x1 && v >= y0 && v < y1 {
                c = col;
            }
        }
        let g = 10.0 * (grain.at(u, v) - 0.5);
        to_px([c[0] + g, c[1] + g, c[2] + g])
    })
}
