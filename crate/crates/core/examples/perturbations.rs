//! Applies the four screen-outline perturbations to a true outline and shows
//! how far each one moves from it.
//!
//! ```bash
//! cargo run -p scc --example perturbations
//! ```

use scc::channel::{perturb_quad, Camera, ChannelConfig, Perturbation, PerturbationKind};
use scc::codec::GridGeometry;
use scc::geometry::iou_ioc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ChannelConfig::default();
    let truth = Camera::new(&config, 320, 180, 1)?.truth();
    let geom = GridGeometry::new(10, 10, 320, 180)?;
    println!("kind     magnitude   IoU     IoC");
    for kind in [PerturbationKind::Shift, PerturbationKind::Expand, PerturbationKind::Shrink, PerturbationKind::Rotate] {
        for magnitude in [0.1, 0.2, 0.3, 0.4, 0.5] {
            let q = perturb_quad(&truth, &Perturbation::new(kind, magnitude), &geom, 7);
            let (iou, ioc) = iou_ioc(&q, &truth);
            println!("{:<8} {magnitude:>9.1}  {iou:.4}  {ioc:.4}", kind.label());
        }
    }
    Ok(())
}
