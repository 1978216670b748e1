use proptest::prelude::*;

use scc::channel::{perturb_quad, Perturbation, PerturbationKind};
use scc::codec::GridGeometry;
use scc::geometry::{iou_ioc, Homography, Point, Quad};

/// A convex quad: a rectangle with each corner nudged by less than a quarter
/// of the shorter side.
fn convex_quads() -> impl Strategy<Value = Quad> {
    (50.0f64..200.0, 50.0f64..150.0, 60.0f64..200.0, 60.0f64..200.0, proptest::array::uniform8(-0.24f64..0.24)).prop_map(
        |(x0, y0, w, h, j)| {
            let s = w.min(h);
            Quad::new([
                Point::new(x0 + j[0] * s, y0 + j[1] * s),
                Point::new(x0 + w + j[2] * s, y0 + j[3] * s),
                Point::new(x0 + w + j[4] * s, y0 + h + j[5] * s),
                Point::new(x0 + j[6] * s, y0 + h + j[7] * s),
            ])
        },
    )
}

fn kinds() -> impl Strategy<Value = PerturbationKind> {
    prop::sample::select(vec![PerturbationKind::Shift, PerturbationKind::Expand, PerturbationKind::Shrink, PerturbationKind::Rotate])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn corner_order_does_not_matter(q in convex_quads(), rot in 0usize..4, flip in any::<bool>()) {
        prop_assert!(q.is_convex());
        let mut pts = q.corners;
        pts.rotate_left(rot);
        if flip {
            pts.reverse();
        }
        let back = Quad::from_unordered(pts);
        prop_assert!(back.is_convex());
        let (iou, _) = iou_ioc(&back, &q);
        prop_assert!((iou - 1.0).abs() < 1e-9);
    }

    #[test]
    fn overlap_scores_are_bounded(a in convex_quads(), b in convex_quads()) {
        let (iou, ioc) = iou_ioc(&a, &b);
        prop_assert!((0.0..=1.0 + 1e-9).contains(&iou));
        prop_assert!((0.0..=1.0 + 1e-9).contains(&ioc));
        prop_assert!(iou <= ioc + 1e-9);
        let (self_iou, self_ioc) = iou_ioc(&a, &a);
        prop_assert!((self_iou - 1.0).abs() < 1e-9 && (self_ioc - 1.0).abs() < 1e-9);
    }

    #[test]
    fn perturbed_outlines_stay_convex(
        q in convex_quads(), kind in kinds(), magnitude in 0.0f64..0.5, seed in any::<u64>(),
        rows in 2usize..12, cols in 2usize..12,
    ) {
        let geom = GridGeometry::new(rows, cols, 320, 180).unwrap();
        let p = perturb_quad(&q, &Perturbation::new(kind, magnitude), &geom, seed);
        prop_assert!(p.is_convex());
        if magnitude == 0.0 {
            let (iou, _) = iou_ioc(&p, &q);
            prop_assert!((iou - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn homography_maps_corners_and_inverts(q in convex_quads()) {
        let square = Quad::rect(0.0, 0.0, 1.0, 1.0);
        let h = Homography::from_points(&square.corners, &q.corners).unwrap();
        for (s, d) in square.corners.iter().zip(&q.corners) {
            prop_assert!(h.apply(*s).dist(*d) < 1e-6);
        }
        let inv = h.inverse().unwrap();
        let c = q.centroid();
        prop_assert!(h.apply(inv.apply(c)).dist(c) < 1e-6);
    }
}
