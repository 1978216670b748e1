//! Runs a small distance and noise sweep from a TOML config and writes the
//! metrics, manifest and plot series.
//!
//! ```bash
//! cargo run --release -p scc --example experiment_sweep -- [out_dir]
//! ```

use scc::experiment::{run_experiment, write_experiment, write_report, ExperimentConfig};

const CONFIG: &str = r#"
seed = 7
frames = 20

[layout]
rows = 10
cols = 10
parity_bits = 50

[sweep]
distances = [1.0, 1.5, 2.0]
noise = [1.0, 3.0]
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::path::PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "runs/example_sweep".into()));
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let result = run_experiment(&config)?;
    for r in &result.rows {
        println!(
            "d {:.1} m σ {:.1}: FER {:.3} BER {:.4} goodput {:.1} bps",
            r.distance_m, r.noise_sigma, r.fer, r.ber, r.goodput_bps
        );
    }
    write_experiment(&result, &out)?;
    for f in write_report(&result.rows, out.join("plots"))? {
        println!("wrote {}", f.display());
    }
    Ok(())
}
