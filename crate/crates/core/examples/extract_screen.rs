//! Locates the screen in indoor scenes with each dilation kernel and scores
//! the outlines against the truth.
//!
//! ```bash
//! cargo run -p scc --example extract_screen
//! ```

use scc::channel::{compose_scene, ChannelConfig};
use scc::content::{procedural_content, Background};
use scc::extract::{locate_screen, BackgroundSegmenter, ExtractorParams};
use scc::geometry::iou_ioc;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let content = procedural_content(10, 320, 180, 5);
    for kernel in 1..=3 {
        let params = ExtractorParams {
            kernel,
            ..ExtractorParams::default()
        };
        let (mut iou, mut ioc, mut found) = (0.0, 0.0, 0);
        for (i, c) in content.iter().enumerate() {
            let config = ChannelConfig {
                background: Background::Indoor { seed: i as u64 },
                angle_deg: -25.0 + 5.0 * i as f64,
                distance_m: 0.9 + 0.05 * i as f64,
                ..ChannelConfig::default()
            };
            let (scene, truth) = compose_scene(c, &config, i as u64)?;
            let plate = config.background.render(config.scene_width, config.scene_height);
            if let Some(q) = locate_screen(&scene, &BackgroundSegmenter::with_plate(plate), &params)? {
                let (u, o) = iou_ioc(&q, &truth);
                iou += u;
                ioc += o;
                found += 1;
            }
        }
        let n = content.len() as f64;
        println!("kernel {kernel}x{kernel}: found {found}/{}, IoU {:.4}, IoC {:.4}", content.len(), iou / n, ioc / n);
    }
    Ok(())
}
