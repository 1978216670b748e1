//! Screen localization: segmentation to a probability map, dilation and
//! thresholding, quadrilateral fitting, perspective unwarp.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{bilinear, quantize, Frame};
use crate::geometry::{Homography, Point, Quad};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("quadrilateral is degenerate or not convex")]
    DegenerateQuad,
    #[error("dilation kernel {0} outside 1..=3")]
    Kernel(usize),
}

/// Per-pixel screen probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

/// Binary screen mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

/// Anything that turns a camera frame into a screen probability map.
pub trait Segmenter {
    fn segment(&self, frame: &Frame) -> ProbMap;
}

/// Segmenter for simulated scenes.
///
/// Evidence is the colour distance to a background model. With a known
/// background plate the distance is per pixel; otherwise the background is
/// taken as one flat colour, the per-channel median of the frame border.
/// Local texture (a 3×3 gradient) adds evidence when no plate is known.
/// The distance is box-averaged over a small window and mapped through a
/// linear ramp between `low` and `high`.
#[derive(Debug, Clone)]
pub struct BackgroundSegmenter {
    pub plate: Option<Frame>,
    pub low: f32,
    pub high: f32,
    pub window: usize,
}

impl Default for BackgroundSegmenter {
    fn default() -> Self {
        BackgroundSegmenter {
            plate: None,
            low: 6.0,
            high: 18.0,
            window: 2,
        }
    }
}

impl BackgroundSegmenter {
    pub fn with_plate(plate: Frame) -> BackgroundSegmenter {
        BackgroundSegmenter {
            plate: Some(plate),
            ..BackgroundSegmenter::default()
        }
    }
}

fn border_median(frame: &Frame) -> [f32; 3] {
    let (w, h) = (frame.width(), frame.height());
    let mut samples: [Vec<u8>; 3] = Default::default();
    let mut take = |x: usize, y: usize| {
        let px = frame.get(x, y);
        for c in 0..3 {
            samples[c].push(px[c]);
        }
    };
    for x in 0..w {
        take(x, 0);
        take(x, h - 1);
    }
    for y in 1..h.saturating_sub(1) {
        take(0, y);
        take(w - 1, y);
    }
    samples.map(|mut s| {
        s.sort_unstable();
        f32::from(s[s.len() / 2])
    })
}

/// Mean over a `(2r+1)²` window via a summed-area table.
fn box_mean(src: &[f32], w: usize, h: usize, r: usize) -> Vec<f32> {
    let mut sat = vec![0.0f64; (w + 1) * (h + 1)];
    for y in 0..h {
        let mut row = 0.0;
        for x in 0..w {
            row += f64::from(src[y * w + x]);
            sat[(y + 1) * (w + 1) + x + 1] = sat[y * (w + 1) + x + 1] + row;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(r), (y + r + 1).min(h));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(r), (x + r + 1).min(w));
            let s = sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0];
            out[y * w + x] = (s / ((x1 - x0) * (y1 - y0)) as f64) as f32;
        }
    }
    out
}

impl Segmenter for BackgroundSegmenter {
    fn segment(&self, frame: &Frame) -> ProbMap {
        let (w, h) = (frame.width(), frame.height());
        let mut dist = vec![0.0f32; w * h];
        match &self.plate {
            Some(plate) if (plate.width(), plate.height()) == (w, h) => {
                for (i, d) in dist.iter_mut().enumerate() {
                    let a = &frame.data()[i * 3..i * 3 + 3];
                    let b = &plate.data()[i * 3..i * 3 + 3];
                    *d = (0..3).map(|c| (f32::from(a[c]) - f32::from(b[c])).abs()).sum();
                }
            }
            _ => {
                let bg = border_median(frame);
                let luma: Vec<f32> = frame
                    .data()
                    .chunks(3)
                    .map(|p| 0.299 * f32::from(p[0]) + 0.587 * f32::from(p[1]) + 0.114 * f32::from(p[2]))
                    .collect();
                for y in 0..h {
                    for x in 0..w {
                        let i = y * w + x;
                        let p = &frame.data()[i * 3..i * 3 + 3];
                        let colour: f32 = (0..3).map(|c| (f32::from(p[c]) - bg[c]).abs()).sum();
                        let gx = luma[y * w + (x + 1).min(w - 1)] - luma[y * w + x.saturating_sub(1)];
                        let gy = luma[(y + 1).min(h - 1) * w + x] - luma[y.saturating_sub(1) * w + x];
                        dist[i] = colour + gx.abs() + gy.abs();
                    }
                }
            }
        }
        let smooth = box_mean(&dist, w, h, self.window);
        let span = (self.high - self.low).max(1e-6);
        ProbMap {
            width: w,
            height: h,
            data: smooth.iter().map(|&d| ((d - self.low) / span).clamp(0.0, 1.0)).collect(),
        }
    }
}

/// Dilation by the maximum over a `kernel × kernel` window, then
/// `p ≥ threshold`. The window covers offsets `−⌊k/2⌋ ..= ⌈k/2⌉ − 1`, so k=2
/// reaches one pixel up and left and k=3 one pixel all round.
pub fn smooth_threshold(map: &ProbMap, kernel: usize, threshold: f32) -> Result<Mask, ExtractError> {
    if !(1..=3).contains(&kernel) {
        return Err(ExtractError::Kernel(kernel));
    }
    let (w, h) = (map.width, map.height);
    let lo = (kernel / 2) as isize;
    let hi = (kernel as isize) - lo - 1;
    let mut row_max = vec![0.0f32; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut m = f32::MIN;
            for dx in -lo..=hi {
                let xx = x as isize + dx;
                if xx >= 0 && (xx as usize) < w {
                    m = m.max(map.data[y * w + xx as usize]);
                }
            }
            row_max[y * w + x] = m;
        }
    }
    let mut data = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut m = f32::MIN;
            for dy in -lo..=hi {
                let yy = y as isize + dy;
                if yy >= 0 && (yy as usize) < h {
                    m = m.max(row_max[yy as usize * w + x]);
                }
            }
            data[y * w + x] = m >= threshold;
        }
    }
    Ok(Mask { width: w, height: h, data })
}

/// Pixels of the largest 4-connected component.
fn largest_component(mask: &Mask) -> Vec<usize> {
    let (w, h) = (mask.width, mask.height);
    let mut label = vec![false; w * h];
    let mut best: Vec<usize> = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.data[start] || label[start] {
            continue;
        }
        let mut comp = Vec::new();
        label[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            comp.push(i);
            let (x, y) = (i % w, i / w);
            let mut visit = |j: usize| {
                if mask.data[j] && !label[j] {
                    label[j] = true;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Andrew's monotone chain; counter-clockwise in y-up terms.
fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<Point> = Vec::with_capacity(pts.len() * 2);
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn seg_dist(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.dist(Point::new(a.x + t * dx, a.y + t * dy))
}

fn douglas_peucker(pts: &[Point], eps: f64, out: &mut Vec<Point>) {
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    let (mut idx, mut dmax) = (0, 0.0);
    for (i, &p) in pts.iter().enumerate().take(pts.len() - 1).skip(1) {
        let d = seg_dist(p, a, b);
        if d > dmax {
            idx = i;
            dmax = d;
        }
    }
    if dmax > eps {
        douglas_peucker(&pts[..=idx], eps, out);
        out.pop();
        douglas_peucker(&pts[idx..], eps, out);
    } else {
        out.push(a);
        out.push(b);
    }
}

/// Simplifies a closed hull, splitting it at its two mutually farthest
/// vertices.
fn simplify_closed(hull: &[Point], eps: f64) -> Vec<Point> {
    let n = hull.len();
    let (mut i0, mut i1, mut best) = (0, 0, -1.0);
    for i in 0..n {
        for j in i + 1..n {
            let d = hull[i].dist(hull[j]);
            if d > best {
                (i0, i1, best) = (i, j, d);
            }
        }
    }
    let first: Vec<Point> = hull[i0..=i1].to_vec();
    let mut second: Vec<Point> = hull[i1..].to_vec();
    second.extend_from_slice(&hull[..=i0]);
    let mut out = Vec::new();
    douglas_peucker(&first, eps, &mut out);
    out.pop();
    douglas_peucker(&second, eps, &mut out);
    out.pop();
    out
}

/// Largest-area quadrilateral with vertices on the hull.
fn max_area_quad(hull: &[Point]) -> [Point; 4] {
    let n = hull.len();
    let tri = |a: usize, b: usize, c: usize| cross(hull[a], hull[b], hull[c]).abs() / 2.0;
    let mut best = (0.0, [0, 1, 2, 3]);
    for i in 0..n {
        for k in i + 2..n {
            let left = (i + 1..k).map(|j| (tri(i, j, k), j)).fold((0.0, i + 1), |m, v| if v.0 > m.0 { v } else { m });
            let right = (k + 1..n + i).map(|l| (tri(i, k, l % n), l % n)).fold((0.0, (k + 1) % n), |m, v| if v.0 > m.0 { v } else { m });
            let area = left.0 + right.0;
            if area > best.0 {
                best = (area, [i, left.1, k, right.1]);
            }
        }
    }
    best.1.map(|i| hull[i])
}

/// Fits a quadrilateral to the largest mask component. Components smaller
/// than `min_area_fraction` of the frame count as no screen.
pub fn localize_quad(mask: &Mask, min_area_fraction: f64) -> Option<Quad> {
    let comp = largest_component(mask);
    let total = (mask.width * mask.height) as f64;
    if comp.is_empty() || (comp.len() as f64) < min_area_fraction * total {
        return None;
    }
    // Hull of pixel squares: the outer corners of each row's extreme pixels.
    let w = mask.width;
    let mut rows: std::collections::BTreeMap<usize, (usize, usize)> = Default::default();
    for &i in &comp {
        let (x, y) = (i % w, i / w);
        let e = rows.entry(y).or_insert((x, x));
        e.0 = e.0.min(x);
        e.1 = e.1.max(x);
    }
    let mut pts = Vec::with_capacity(rows.len() * 4);
    for (&y, &(x0, x1)) in &rows {
        let (y0, y1) = (y as f64, y as f64 + 1.0);
        pts.extend([
            Point::new(x0 as f64, y0),
            Point::new(x0 as f64, y1),
            Point::new(x1 as f64 + 1.0, y0),
            Point::new(x1 as f64 + 1.0, y1),
        ]);
    }
    let hull = convex_hull(pts);
    if hull.len() < 4 {
        return None;
    }
    let diag = (mask.width as f64).hypot(mask.height as f64);
    let mut eps = diag / 4.0;
    let mut corners = None;
    while eps > 0.25 {
        let simple = simplify_closed(&hull, eps);
        if simple.len() == 4 {
            corners = Some([simple[0], simple[1], simple[2], simple[3]]);
            break;
        }
        if simple.len() > 4 {
            break;
        }
        eps *= 0.85;
    }
    let corners = corners.unwrap_or_else(|| max_area_quad(&hull));
    let quad = Quad::from_unordered(corners);
    quad.is_convex().then_some(quad)
}

/// Convenience: segment, dilate, threshold and localize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractorParams {
    pub kernel: usize,
    pub threshold: f32,
    pub min_area_fraction: f64,
}

impl Default for ExtractorParams {
    fn default() -> Self {
        ExtractorParams {
            kernel: 2,
            threshold: 0.5,
            min_area_fraction: 0.01,
        }
    }
}

pub fn locate_screen(frame: &Frame, segmenter: &dyn Segmenter, params: &ExtractorParams) -> Result<Option<Quad>, ExtractError> {
    let map = segmenter.segment(frame);
    let mask = smooth_threshold(&map, params.kernel, params.threshold)?;
    Ok(localize_quad(&mask, params.min_area_fraction))
}

fn square_to_quad(quad: &Quad, side: usize) -> Result<Homography, ExtractError> {
    if !quad.is_convex() {
        return Err(ExtractError::DegenerateQuad);
    }
    let s = side as f64;
    let square = Quad::rect(0.0, 0.0, s, s);
    Homography::from_points(&square.corners, &quad.corners).ok_or(ExtractError::DegenerateQuad)
}

/// Resamples one channel of the quad's interior to a `side × side` plane.
pub fn unwarp_channel(frame: &Frame, channel: usize, quad: &Quad, side: usize) -> Result<Vec<f32>, ExtractError> {
    let h = square_to_quad(quad, side)?;
    let plane: Vec<f32> = frame.channel(channel).into_iter().map(f32::from).collect();
    let mut out = Vec::with_capacity(side * side);
    for y in 0..side {
        for x in 0..side {
            let p = h.apply(Point::new(x as f64 + 0.5, y as f64 + 0.5));
            out.push(bilinear(&plane, frame.width(), frame.height(), p.x, p.y));
        }
    }
    Ok(out)
}

/// Frontal `side × side` view of the quad's interior.
pub fn unwarp(frame: &Frame, quad: &Quad, side: usize) -> Result<Frame, ExtractError> {
    let planes: Vec<Vec<f32>> = (0..3).map(|c| unwarp_channel(frame, c, quad, side)).collect::<Result<_, _>>()?;
    Ok(Frame::from_fn(side, side, |x, y| std::array::from_fn(|c| quantize(planes[c][y * side + x]))))
}

/// Mean RGB over pixels whose centers fall inside the quad.
pub fn mean_in_quad(frame: &Frame, quad: &Quad) -> [f64; 3] {
    let (x0, y0, x1, y1) = quad.pixel_bounds(frame.width(), frame.height());
    let mut sum = [0.0; 3];
    let mut n = 0usize;
    for y in y0..y1 {
        for x in x0..x1 {
            if quad.contains(Point::new(x as f64 + 0.5, y as f64 + 0.5)) {
                let px = frame.get(x, y);
                for c in 0..3 {
                    sum[c] += f64::from(px[c]);
                }
                n += 1;
            }
        }
    }
    sum.map(|s| s / n.max(1) as f64)
}

/// Red landmark test on the screen region: mean R above `min_red`, mean G
/// and B below `max_other`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandmarkThresholds {
    pub min_red: f64,
    pub max_other: f64,
}

impl Default for LandmarkThresholds {
    fn default() -> Self {
        LandmarkThresholds {
            min_red: 180.0,
            max_other: 60.0,
        }
    }
}

pub fn detect_landmark(frame: &Frame, quad: &Quad, t: &LandmarkThresholds) -> bool {
    let [r, g, b] = mean_in_quad(frame, quad);
    r > t.min_red && g < t.max_other && b < t.max_other
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from(w: usize, h: usize, f: impl Fn(usize, usize) -> bool) -> Mask {
        Mask {
            width: w,
            height: h,
            data: (0..w * h).map(|i| f(i % w, i / w)).collect(),
        }
    }

    #[test]
    fn kernel_one_is_plain_threshold() {
        let map = ProbMap {
            width: 3,
            height: 1,
            data: vec![0.2, 0.5, 0.9],
        };
        assert_eq!(smooth_threshold(&map, 1, 0.5).unwrap().data, vec![false, true, true]);
        assert!(smooth_threshold(&map, 4, 0.5).is_err());
    }

    #[test]
    fn single_pixel_dilates_to_block() {
        let mut data = vec![0.0; 25];
        data[12] = 1.0;
        let map = ProbMap { width: 5, height: 5, data };
        let m3 = smooth_threshold(&map, 3, 0.5).unwrap();
        assert_eq!(m3.count(), 9);
        for (i, &b) in m3.data.iter().enumerate() {
            let (x, y) = (i % 5, i / 5);
            assert_eq!(b, (1..=3).contains(&x) && (1..=3).contains(&y));
        }
        assert_eq!(smooth_threshold(&map, 2, 0.5).unwrap().count(), 4);
    }

    #[test]
    fn rectangle_corners() {
        let m = mask_from(100, 80, |x, y| (20..70).contains(&x) && (10..50).contains(&y));
        let q = localize_quad(&m, 0.01).unwrap();
        let want = Quad::rect(20.0, 10.0, 70.0, 50.0);
        for (a, b) in q.corners.iter().zip(&want.corners) {
            assert!(a.dist(*b) <= 1.0, "{q:?}");
        }
    }

    #[test]
    fn larger_component_wins_and_tiny_is_rejected() {
        let m = mask_from(100, 100, |x, y| {
            ((5..15).contains(&x) && (5..15).contains(&y)) || ((40..90).contains(&x) && (30..80).contains(&y))
        });
        let q = localize_quad(&m, 0.01).unwrap();
        assert!(q.centroid().dist(Point::new(65.0, 55.0)) < 1.0);
        let tiny = mask_from(100, 100, |x, y| x < 5 && y < 5);
        assert!(localize_quad(&tiny, 0.01).is_none());
        assert!(localize_quad(&mask_from(10, 10, |_, _| false), 0.01).is_none());
    }

    #[test]
    fn trapezoid_mask_corners() {
        let truth = Quad::new([
            Point::new(30.0, 20.0),
            Point::new(170.0, 35.0),
            Point::new(170.0, 125.0),
            Point::new(30.0, 140.0),
        ]);
        let m = mask_from(200, 160, |x, y| truth.contains(Point::new(x as f64 + 0.5, y as f64 + 0.5)));
        let q = localize_quad(&m, 0.01).unwrap();
        for (a, b) in q.corners.iter().zip(&truth.corners) {
            assert!(a.dist(*b) < 2.0, "{q:?}");
        }
    }

    #[test]
    fn full_frame_unwarp_is_identity() {
        let f = Frame::from_fn(16, 16, |x, y| [(x * 16) as u8, (y * 16) as u8, 7]);
        let q = Quad::rect(0.0, 0.0, 16.0, 16.0);
        assert_eq!(unwarp(&f, &q, 16).unwrap(), f);
    }

    #[test]
    fn degenerate_quad_is_rejected() {
        let f = Frame::new(4, 4);
        let q = Quad::new([Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0), Point::new(3.0, 3.0)]);
        assert_eq!(unwarp(&f, &q, 4), Err(ExtractError::DegenerateQuad));
    }

    #[test]
    fn pure_red_is_a_landmark() {
        let red = Frame::filled(20, 20, [255, 0, 0]);
        let q = Quad::rect(2.0, 2.0, 18.0, 18.0);
        assert!(detect_landmark(&red, &q, &LandmarkThresholds::default()));
        let gray = Frame::filled(20, 20, [200, 100, 100]);
        assert!(!detect_landmark(&gray, &q, &LandmarkThresholds::default()));
    }
}
