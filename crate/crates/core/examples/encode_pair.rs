//! Embeds one data frame into a content image as a Manchester pair and
//! decodes it back from the two display frames.
//!
//! ```bash
//! cargo run -p scc --example encode_pair
//! ```

use scc::codec::{classical_decode, GridGeometry, ModulationPlan};
use scc::content::procedural_content;
use scc::frameproto::{parse_frame, FrameLayout};
use scc::pipeline::encode_pair;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let layout = FrameLayout::new(10, 10, 50)?;
    let content = procedural_content(1, 320, 180, 4).remove(0);
    let payload: Vec<u8> = (0..layout.data_bits()).map(|i| (i % 3 == 0) as u8).collect();
    println!(
        "layout {}x{}: {} payload, 5 seq, 5 checksum, {} pad, {} parity bits",
        layout.rows(),
        layout.cols(),
        layout.data_bits(),
        layout.pad_bits(),
        layout.parity_bits()
    );
    for plan in [ModulationPlan::Fixed { delta: 2 }, ModulationPlan::Fixed { delta: 3 }, ModulationPlan::default()] {
        let pair = encode_pair(&content, &payload, 9, &layout, &plan)?;
        let geom = GridGeometry::new(layout.rows(), layout.cols(), 320, 180)?;
        let bits = classical_decode(&pair.plus, &pair.minus, &geom)?;
        let parsed = parse_frame(&bits, &layout)?.map_err(|e| e.reason())?;
        println!(
            "Δ {:>3}: PSNR {:.2} dB, seq {}, payload intact {}",
            plan.label(),
            pair.psnr,
            parsed.seq,
            parsed.payload == payload
        );
    }
    Ok(())
}
