//! 8-bit RGB frames and their on-disk formats.
//!
//! Raw planar files are `b"SCCP"`, width and height as `u32` little-endian,
//! then the full R plane, G plane and B plane, one byte per pixel, rows top to
//! bottom.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Image(#[from] image::ImageError),
    #[error("raw frame: {0}")]
    Raw(String),
}

/// Interleaved RGB image, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Frame({}x{})", self.width, self.height)
    }
}

impl Frame {
    pub fn new(width: usize, height: usize) -> Frame {
        Frame::filled(width, height, [0, 0, 0])
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Frame {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Frame { width, height, data }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Frame {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Frame { width, height, data }
    }

    /// `data` must hold `width·height·3` interleaved bytes.
    pub fn from_rgb(width: usize, height: usize, data: Vec<u8>) -> Option<Frame> {
        (data.len() == width * height * 3).then_some(Frame { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// One channel (0 = R, 1 = G, 2 = B) as a row-major plane.
    pub fn channel(&self, c: usize) -> Vec<u8> {
        self.data.iter().skip(c).step_by(3).copied().collect()
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Frame, FrameIoError> {
        let img = image::open(path)?.to_rgb8();
        let (w, h) = img.dimensions();
        Ok(Frame {
            width: w as usize,
            height: h as usize,
            data: img.into_raw(),
        })
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), FrameIoError> {
        image::save_buffer(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::Rgb8,
        )?;
        Ok(())
    }

    pub fn to_raw(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.data.len());
        out.extend_from_slice(b"SCCP");
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        for c in 0..3 {
            out.extend(self.channel(c));
        }
        out
    }

    pub fn from_raw(bytes: &[u8]) -> Result<Frame, FrameIoError> {
        if bytes.len() < 12 || &bytes[..4] != b"SCCP" {
            return Err(FrameIoError::Raw("missing SCCP header".into()));
        }
        let w = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        let h = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
        let plane = w.checked_mul(h).ok_or_else(|| FrameIoError::Raw("size overflow".into()))?;
        if bytes.len() != 12 + 3 * plane {
            return Err(FrameIoError::Raw(format!(
                "{}x{} needs {} bytes, file has {}",
                w,
                h,
                12 + 3 * plane,
                bytes.len()
            )));
        }
        let body = &bytes[12..];
        let mut data = vec![0; 3 * plane];
        for c in 0..3 {
            for (i, &v) in body[c * plane..(c + 1) * plane].iter().enumerate() {
                data[i * 3 + c] = v;
            }
        }
        Ok(Frame { width: w, height: h, data })
    }

    /// Reads PNG or raw planar, chosen by extension (`.raw` means planar).
    pub fn load(path: impl AsRef<Path>) -> Result<Frame, FrameIoError> {
        let path = path.as_ref();
        if path.extension().is_some_and(|e| e == "raw") {
            Frame::from_raw(&std::fs::read(path)?)
        } else {
            Frame::load_png(path)
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FrameIoError> {
        let path = path.as_ref();
        if path.extension().is_some_and(|e| e == "raw") {
            std::fs::write(path, self.to_raw())?;
            Ok(())
        } else {
            self.save_png(path)
        }
    }

    /// Plain bilinear rescale; sample positions use pixel centers.
    pub fn resize(&self, width: usize, height: usize) -> Frame {
        let sx = self.width as f64 / width as f64;
        let sy = self.height as f64 / height as f64;
        let planes: Vec<Vec<f32>> = (0..3)
            .map(|c| self.channel(c).into_iter().map(f32::from).collect())
            .collect();
        Frame::from_fn(width, height, |x, y| {
            let u = (x as f64 + 0.5) * sx;
            let v = (y as f64 + 0.5) * sy;
            let mut px = [0u8; 3];
            for (c, p) in planes.iter().enumerate() {
                px[c] = quantize(bilinear(p, self.width, self.height, u, v));
            }
            px
        })
    }
}

/// Round half up and clamp to `0..=255`.
pub(crate) fn quantize(v: f32) -> u8 {
    (v.clamp(0.0, 255.0) + 0.5) as u8
}

/// Samples a row-major plane at continuous coordinates where pixel `(i, j)`
/// covers `[i, i+1) × [j, j+1)`. Out-of-range positions clamp to the edge.
pub fn bilinear(plane: &[f32], width: usize, height: usize, u: f64, v: f64) -> f32 {
    let fx = (u - 0.5).clamp(0.0, (width - 1) as f64);
    let fy = (v - 0.5).clamp(0.0, (height - 1) as f64);
    let x0 = fx.floor() as usize;
    let y0 = fy.floor() as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let ax = (fx - x0 as f64) as f32;
    let ay = (fy - y0 as f64) as f32;
    let p = |x: usize, y: usize| plane[y * width + x];
    let top = p(x0, y0) + (p(x1, y0) - p(x0, y0)) * ax;
    let bottom = p(x0, y1) + (p(x1, y1) - p(x0, y1)) * ax;
    top + (bottom - top) * ay
}
