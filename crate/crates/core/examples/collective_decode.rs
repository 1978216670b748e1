//! Sends a stream through the camera with a misplaced screen outline and
//! decodes it with the classical decoder and, if a model file is given, the
//! trained collective decoder.
//!
//! ```bash
//! cargo run -p scc --example collective_decode -- [model.mnn]
//! ```

use scc::channel::{ChannelConfig, Perturbation, PerturbationKind};
use scc::codec::ModulationPlan;
use scc::collective::{BitDecoder, ClassicalDecoder, CnnDecoder, StreamDecodeConfig};
use scc::content::procedural_content;
use scc::frameproto::FrameLayout;
use scc::pipeline::{encode_payload, run_link, LinkParams, QuadSource};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let layout = FrameLayout::new(4, 4, 0)?;
    let content = procedural_content(20, 320, 180, 1);
    let bits: Vec<u8> = (0..layout.data_bits() * 40).map(|i| ((i * 13) % 7 < 3) as u8).collect();
    let pairs = encode_payload(&content, &bits, &layout, &ModulationPlan::default())?;
    let mut decoders: Vec<(&str, Box<dyn BitDecoder>)> = vec![("classical", Box::new(ClassicalDecoder { rows: 4, cols: 4 }))];
    if let Some(path) = std::env::args().nth(1) {
        decoders.push(("cnn", Box::new(CnnDecoder::new(scc::micronn::load_model(path)?, 4, 4)?)));
    }
    for shift in [0.0, 0.2, 0.3, 0.4] {
        let params = LinkParams {
            layout: layout.clone(),
            channel: ChannelConfig::default(),
            hold: 1,
            side: 96,
            quads: QuadSource::Truth,
            perturbation: Some(Perturbation::new(PerturbationKind::Shift, shift)),
            stream: StreamDecodeConfig::default(),
        };
        for (name, decoder) in &decoders {
            let out = run_link(&pairs, &params, decoder.as_ref(), 5)?;
            println!(
                "SHIFT {:>3.0}% {name:<9}: BER {:.4} FER {:.3}, {} of {} triples decoded",
                shift * 100.0,
                out.ber(),
                out.fer(),
                out.report.decoder_calls(),
                out.report.log.len()
            );
        }
    }
    Ok(())
}
