//! Goodput, throughput and raw rate of 10x10 frames over a range of parity
//! fractions and frame error rates.
//!
//! ```bash
//! cargo run -p scc --example goodput_table
//! ```

use scc::frameproto::FrameLayout;
use scc::metrics::{compute_goodput, frame_rate, raw_throughput_at, throughput_at};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rate = frame_rate(60.0, 1);
    println!("data frames per second at 60 Hz: {rate}");
    println!("parity  data bits  FER    goodput bps  throughput bps");
    for fraction in [0.0, 0.3, 0.5, 0.7] {
        let layout = FrameLayout::with_parity_fraction(10, 10, fraction)?;
        for fer in [0.0, 0.003, 0.04, 0.2] {
            println!(
                "{fraction:>6.1}  {:>9}  {fer:<5}  {:>11.1}  {:>14.1}",
                layout.data_bits(),
                compute_goodput(&layout, 60.0, fer),
                throughput_at(&layout, rate, fer)
            );
        }
    }
    let layout = FrameLayout::new(10, 10, 50)?;
    println!("raw rate at BER 0.01: {:.1} bps", raw_throughput_at(&layout, rate, 0.01));
    Ok(())
}
