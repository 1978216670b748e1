//! Compares 60 FPS content with 30 FPS content, where every display frame is
//! held for two refreshes and each pair spans eight camera frames.
//!
//! ```bash
//! cargo run -p scc --example variable_rate
//! ```

use scc::channel::ChannelConfig;
use scc::codec::ModulationPlan;
use scc::collective::{ClassicalDecoder, StreamDecodeConfig};
use scc::content::procedural_content;
use scc::frameproto::FrameLayout;
use scc::metrics::{frame_rate, goodput_at};
use scc::pipeline::{encode_payload, run_link, LinkParams, QuadSource};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let layout = FrameLayout::new(10, 10, 50)?;
    let content = procedural_content(20, 320, 180, 3);
    let bits: Vec<u8> = (0..layout.data_bits() * 40).map(|i| (i % 9 < 4) as u8).collect();
    let pairs = encode_payload(&content, &bits, &layout, &ModulationPlan::default())?;
    for hold in [1, 2] {
        let params = LinkParams {
            layout: layout.clone(),
            channel: ChannelConfig::default(),
            hold,
            side: 96,
            quads: QuadSource::Truth,
            perturbation: None,
            stream: StreamDecodeConfig::default(),
        };
        let out = run_link(&pairs, &params, &ClassicalDecoder { rows: 10, cols: 10 }, 9)?;
        let rate = frame_rate(params.channel.display_rate, hold);
        println!(
            "hold {hold}: {} camera frames, FER {:.3}, BER {:.4}, goodput {:.1} bps at {rate} data frames/s",
            out.camera_frames,
            out.fer(),
            out.ber(),
            goodput_at(&layout, rate, out.fer())
        );
    }
    Ok(())
}
