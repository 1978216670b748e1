//! Times training steps of the canonical 96×96 decoder network.
//!
//! `cargo run --release -p micronn --example train_bench -- [batch] [steps]`

use std::time::Instant;

use micronn::{Adam, AdamConfig, ArchConfig, Model, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let batch: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(16);
    let steps: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let arch = ArchConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut model = Model::from_arch(&arch, &mut rng)?;
    let mut opt = Adam::new(AdamConfig::default(), &model);
    let side = arch.input_side;
    let x = Tensor::randn(&[batch, 3, side, side], 1.0, &mut rng);
    let t = Tensor::from_vec(
        &[batch, arch.outputs],
        (0..batch * arch.outputs).map(|_| f64::from(rng.random_bool(0.5) as u8)).collect(),
    )?;
    println!("{} parameters", model.param_count());
    let start = Instant::now();
    for _ in 0..steps {
        model.train_step(&x, &t, &mut opt)?;
    }
    let per_step = start.elapsed().as_secs_f64() / steps as f64;
    println!(
        "batch {batch}: {:.1} ms/step, {:.2} ms/sample",
        per_step * 1e3,
        per_step * 1e3 / batch as f64
    );
    let start = Instant::now();
    model.predict(&x)?;
    println!("inference: {:.2} ms/sample", start.elapsed().as_secs_f64() * 1e3 / batch as f64);
    Ok(())
}
