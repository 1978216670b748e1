//! Points, quadrilaterals, homographies and convex polygon clipping.
//!
//! Image coordinates put pixel `(i, j)` over `[i, i+1) × [j, j+1)`, so the
//! center of the top-left pixel is `(0.5, 0.5)`.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }
}

/// Screen outline in camera pixels, corners ordered TL, TR, BR, BL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quad {
    pub corners: [Point; 4],
}

impl Quad {
    pub fn new(corners: [Point; 4]) -> Quad {
        Quad { corners }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Quad {
        Quad::new([
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    /// Reorders arbitrary corners: counter-clockwise-by-angle about the
    /// centroid (clockwise on screen), starting from the corner nearest the
    /// top-left.
    pub fn from_unordered(mut pts: [Point; 4]) -> Quad {
        let c = centroid_of(&pts);
        pts.sort_by(|a, b| {
            let ta = (a.y - c.y).atan2(a.x - c.x);
            let tb = (b.y - c.y).atan2(b.x - c.x);
            ta.total_cmp(&tb)
        });
        let start = (0..4)
            .min_by(|&i, &j| (pts[i].x + pts[i].y).total_cmp(&(pts[j].x + pts[j].y)))
            .expect("four points");
        pts.rotate_left(start);
        Quad::new(pts)
    }

    /// Flattens to `[x0, y0, x1, y1, ...]`.
    pub fn to_array(&self) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (i, p) in self.corners.iter().enumerate() {
            out[2 * i] = p.x;
            out[2 * i + 1] = p.y;
        }
        out
    }

    pub fn from_array(a: [f64; 8]) -> Quad {
        Quad::new(std::array::from_fn(|i| Point::new(a[2 * i], a[2 * i + 1])))
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.corners).abs()
    }

    pub fn centroid(&self) -> Point {
        centroid_of(&self.corners)
    }

    /// True for a strictly convex, non-degenerate outline in either winding.
    pub fn is_convex(&self) -> bool {
        let mut sign = 0.0;
        for i in 0..4 {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            let c = self.corners[(i + 2) % 4];
            let z = b.sub(a).cross(c.sub(b));
            if z.abs() < 1e-9 || (sign != 0.0 && z.signum() != sign) {
                return false;
            }
            sign = z.signum();
        }
        true
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Quad {
        Quad::new(self.corners.map(|p| Point::new(p.x + dx, p.y + dy)))
    }

    pub fn rotate(&self, angle: f64) -> Quad {
        let c = self.centroid();
        let (s, co) = angle.sin_cos();
        Quad::new(self.corners.map(|p| {
            let d = p.sub(c);
            Point::new(c.x + d.x * co - d.y * s, c.y + d.x * s + d.y * co)
        }))
    }

    /// Moves every edge line along its outward normal: left and right edges
    /// by `dx`, top and bottom by `dy` (negative moves inward), and
    /// intersects neighbouring lines for the new corners.
    pub fn offset_edges(&self, dx: f64, dy: f64) -> Quad {
        let outward_sign = if polygon_area(&self.corners) >= 0.0 { 1.0 } else { -1.0 };
        // Edge i runs from corner i to corner i+1: top, right, bottom, left.
        let amount = [dy, dx, dy, dx];
        let lines: Vec<(Point, Point)> = (0..4)
            .map(|i| {
                let a = self.corners[i];
                let b = self.corners[(i + 1) % 4];
                let d = b.sub(a);
                let len = d.x.hypot(d.y);
                // For positive (clockwise on screen) area the outward normal is (d.y, -d.x).
                let n = Point::new(d.y / len * outward_sign, -d.x / len * outward_sign);
                let o = Point::new(n.x * amount[i], n.y * amount[i]);
                (Point::new(a.x + o.x, a.y + o.y), d)
            })
            .collect();
        let corners = std::array::from_fn(|i| {
            // Corner i joins edge i-1 and edge i.
            let (p1, d1) = lines[(i + 3) % 4];
            let (p2, d2) = lines[i];
            let denom = d1.cross(d2);
            let t = p2.sub(p1).cross(d2) / denom;
            Point::new(p1.x + d1.x * t, p1.y + d1.y * t)
        });
        Quad::new(corners)
    }

    /// Approximate cell size `(width, height)` for a `rows × cols` grid,
    /// from the mean lengths of opposite edges.
    pub fn cell_size(&self, rows: usize, cols: usize) -> (f64, f64) {
        let [tl, tr, br, bl] = self.corners;
        let w = (tl.dist(tr) + bl.dist(br)) / 2.0;
        let h = (tl.dist(bl) + tr.dist(br)) / 2.0;
        (w / cols as f64, h / rows as f64)
    }

    /// Point-in-convex-quad test.
    pub fn contains(&self, p: Point) -> bool {
        let mut sign = 0.0;
        for i in 0..4 {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % 4];
            let z = b.sub(a).cross(p.sub(a));
            if z != 0.0 {
                if sign != 0.0 && z.signum() != sign {
                    return false;
                }
                sign = z.signum();
            }
        }
        true
    }

    /// Integer pixel box covering the quad, clipped to `width × height`.
    pub fn pixel_bounds(&self, width: usize, height: usize) -> (usize, usize, usize, usize) {
        let xs = self.corners.map(|p| p.x);
        let ys = self.corners.map(|p| p.y);
        let lo = |v: [f64; 4], lim: usize| v.iter().copied().fold(f64::INFINITY, f64::min).floor().clamp(0.0, lim as f64) as usize;
        let hi = |v: [f64; 4], lim: usize| v.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil().clamp(0.0, lim as f64) as usize;
        (lo(xs, width), lo(ys, height), hi(xs, width), hi(ys, height))
    }
}

fn centroid_of(pts: &[Point]) -> Point {
    let n = pts.len() as f64;
    Point::new(
        pts.iter().map(|p| p.x).sum::<f64>() / n,
        pts.iter().map(|p| p.y).sum::<f64>() / n,
    )
}

/// Signed shoelace area; positive for clockwise-on-screen (y down) order.
pub fn polygon_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Sutherland-Hodgman clipping of `subject` by the convex polygon `clip`.
pub fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let orient = if polygon_area(clip) >= 0.0 { 1.0 } else { -1.0 };
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let edge = b.sub(a);
        let inside = |p: Point| edge.cross(p.sub(a)) * orient >= 0.0;
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let intersect = || {
                let d = cur.sub(prev);
                let t = edge.cross(a.sub(prev)) / edge.cross(d);
                Point::new(prev.x + d.x * t, prev.y + d.y * t)
            };
            match (inside(cur), inside(prev)) {
                (true, true) => out.push(cur),
                (true, false) => {
                    out.push(intersect());
                    out.push(cur);
                }
                (false, true) => out.push(intersect()),
                (false, false) => {}
            }
        }
    }
    out
}

/// `(IoU, IoC)` of a predicted quad against the true one.
pub fn iou_ioc(pred: &Quad, truth: &Quad) -> (f64, f64) {
    let inter = polygon_area(&clip_convex(&pred.corners, &truth.corners)).abs();
    let union = pred.area() + truth.area() - inter;
    let iou = if union > 0.0 { inter / union } else { 0.0 };
    let ioc = if truth.area() > 0.0 { inter / truth.area() } else { 0.0 };
    (iou.clamp(0.0, 1.0), ioc.clamp(0.0, 1.0))
}

/// Projective map of the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(pub Matrix3<f64>);

impl Homography {
    /// Exact map taking `src[i]` to `dst[i]`. `None` when three of the points
    /// are collinear.
    pub fn from_points(src: &[Point; 4], dst: &[Point; 4]) -> Option<Homography> {
        let mut a = SMatrix::<f64, 8, 8>::zeros();
        let mut b = SVector::<f64, 8>::zeros();
        for i in 0..4 {
            let (x, y) = (src[i].x, src[i].y);
            let (u, v) = (dst[i].x, dst[i].y);
            let r = 2 * i;
            a.row_mut(r).copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
            a.row_mut(r + 1).copy_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
            b[r] = u;
            b[r + 1] = v;
        }
        let h = a.lu().solve(&b)?;
        if !h.iter().all(|v| v.is_finite()) {
            return None;
        }
        Some(Homography(Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], 1.0)))
    }

    pub fn apply(&self, p: Point) -> Point {
        let v = self.0 * Vector3::new(p.x, p.y, 1.0);
        Point::new(v.x / v.z, v.y / v.z)
    }

    pub fn inverse(&self) -> Option<Homography> {
        self.0.try_inverse().map(Homography)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapezoid() -> Quad {
        Quad::new([
            Point::new(10.0, 12.0),
            Point::new(90.0, 5.0),
            Point::new(95.0, 70.0),
            Point::new(8.0, 60.0),
        ])
    }

    #[test]
    fn homography_maps_corners() {
        let q = trapezoid();
        let sq = Quad::rect(0.0, 0.0, 1.0, 1.0);
        let h = Homography::from_points(&sq.corners, &q.corners).unwrap();
        for (s, d) in sq.corners.iter().zip(&q.corners) {
            assert!(h.apply(*s).dist(*d) < 1e-9);
        }
        let inv = h.inverse().unwrap();
        assert!(inv.apply(q.corners[2]).dist(sq.corners[2]) < 1e-9);
    }

    #[test]
    fn collinear_points_have_no_homography() {
        let line = [Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0), Point::new(3.0, 3.0)];
        assert!(Homography::from_points(&line, &Quad::rect(0.0, 0.0, 1.0, 1.0).corners).is_none());
    }

    #[test]
    fn identical_quads_have_unit_iou() {
        let q = trapezoid();
        let (iou, ioc) = iou_ioc(&q, &q);
        assert!((iou - 1.0).abs() < 1e-12 && (ioc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubled_containing_quad_halves_iou() {
        let truth = Quad::rect(0.0, 0.0, 10.0, 10.0);
        let pred = Quad::rect(0.0, 0.0, 20.0, 10.0);
        let (iou, ioc) = iou_ioc(&pred, &truth);
        assert!((iou - 0.5).abs() < 1e-12);
        assert!((ioc - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_quads_have_zero_overlap() {
        let a = Quad::rect(0.0, 0.0, 1.0, 1.0);
        let b = Quad::rect(5.0, 5.0, 6.0, 6.0);
        assert_eq!(iou_ioc(&a, &b), (0.0, 0.0));
    }

    #[test]
    fn offset_edges_of_rectangle() {
        let q = Quad::rect(10.0, 20.0, 50.0, 40.0).offset_edges(2.0, 3.0);
        assert_eq!(q, Quad::rect(8.0, 17.0, 52.0, 43.0));
    }

    #[test]
    fn offset_edges_is_invertible() {
        let q = trapezoid();
        let back = q.offset_edges(4.0, 2.5).offset_edges(-4.0, -2.5);
        for (a, b) in back.corners.iter().zip(&q.corners) {
            assert!(a.dist(*b) < 1e-9);
        }
    }

    #[test]
    fn unordered_corners_are_canonicalized() {
        let q = trapezoid();
        let c = q.corners;
        assert_eq!(Quad::from_unordered([c[2], c[0], c[3], c[1]]), q);
    }

    #[test]
    fn convexity() {
        assert!(trapezoid().is_convex());
        let bow = Quad::new([Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]);
        assert!(!bow.is_convex());
    }
}
