//! Trains a small collective decoder on simulated landmark-aligned triples
//! and saves it with its history.
//!
//! ```bash
//! cargo run --release -p scc --example train_decoder -- [out_dir]
//! ```

use scc::training::{train_decoder, TrainRunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "runs/example_model".into()));
    let config = TrainRunConfig {
        train_samples: 300,
        val_samples: 60,
        epochs: 3,
        ..TrainRunConfig::default()
    };
    config.validate()?;
    let trained = train_decoder(&config, true)?;
    std::fs::create_dir_all(&out)?;
    scc::micronn::save_model(&trained.model, out.join("model.mnn"))?;
    trained.history.save_csv(out.join("history.csv"))?;
    println!("{} parameters saved to {}", trained.model.param_count(), out.display());
    Ok(())
}
