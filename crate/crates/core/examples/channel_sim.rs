//! Films a short Manchester stream with the camera simulator and lists what
//! each camera frame saw.
//!
//! ```bash
//! cargo run -p scc --example channel_sim -- [out_dir]
//! ```

use scc::channel::{sample_camera_stream, ChannelConfig};
use scc::codec::ModulationPlan;
use scc::content::procedural_content;
use scc::frameproto::FrameLayout;
use scc::pipeline::{display_order, encode_payload};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1);
    let layout = FrameLayout::new(10, 10, 50)?;
    let content = procedural_content(4, 320, 180, 2);
    let bits: Vec<u8> = (0..layout.data_bits() * 3).map(|i| (i % 5 < 2) as u8).collect();
    let pairs = encode_payload(&content, &bits, &layout, &ModulationPlan::default())?;
    let config = ChannelConfig {
        distance_m: 1.2,
        angle_deg: 20.0,
        noise_sigma: 1.5,
        ..ChannelConfig::default()
    };
    let display: Vec<_> = display_order(&pairs, 1).cloned().collect();
    let frames = sample_camera_stream(&display, &config, 11)?;
    println!(
        "{} display frames at {} Hz filmed at {} FPS: {} camera frames",
        display.len(),
        config.display_rate,
        config.camera_rate,
        frames.len()
    );
    for (i, f) in frames.iter().enumerate() {
        let q = f.quad.corners;
        println!(
            "cam {i:2}: display {:2} {:?}, screen TL ({:.1}, {:.1}) BR ({:.1}, {:.1})",
            f.display_index, f.kind, q[0].x, q[0].y, q[2].x, q[2].y
        );
        if let Some(dir) = &out_dir {
            std::fs::create_dir_all(dir)?;
            f.frame.save(format!("{dir}/cam_{i:03}.png"))?;
        }
    }
    Ok(())
}
