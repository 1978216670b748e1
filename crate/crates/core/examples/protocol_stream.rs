//! Frame assembly, error correction and stream screening without any
//! imaging: corrupt a few symbols, parse, then feed a noisy detection stream
//! through the duplicate filter.
//!
//! ```bash
//! cargo run -p scc --example protocol_stream
//! ```

use scc::frameproto::{assemble_frame, parse_frame, DedupState, FrameLayout};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let layout = FrameLayout::new(10, 10, 50)?;
    let payload: Vec<u8> = (0..layout.data_bits()).map(|i| (i % 7 < 3) as u8).collect();
    let clean = assemble_frame(&payload, 12, &layout)?;
    for flips in [0, 3, 5, 8, 14] {
        let mut bits = clean.clone();
        // One flipped bit per symbol, spread over the word.
        for s in 0..flips {
            bits[(s * 7 % 20) * 5 + s % 5] ^= 1;
        }
        match parse_frame(&bits, &layout)? {
            Ok(p) => println!("{flips:2} symbol errors: seq {} corrected {} payload intact {}", p.seq, p.corrected, p.payload == payload),
            Err(e) => println!("{flips:2} symbol errors: rejected ({})", e.reason()),
        }
    }

    let mut dedup = DedupState::from_rates(120.0, 60.0);
    println!("Sep = {}", dedup.sep());
    // (camera frame index, decoded sequence number)
    let detections = [(0, 3), (1, 3), (4, 4), (6, 5), (8, 5), (9, 6), (12, 6), (16, 7), (17, 20), (24, 9)];
    for (index, seq) in detections {
        println!("frame {index:2} seq {seq:2}: {:?}", dedup.accept(seq, index));
    }
    Ok(())
}
