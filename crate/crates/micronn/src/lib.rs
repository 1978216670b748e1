//! A small CNN engine with no ML framework underneath.
//!
//! Activations are `f64` tensors in NCHW order. Layers cache what they need
//! during a train-mode forward pass and [`Model::backward`] walks that tape in
//! reverse. Everything is deterministic for a fixed seed; there is no
//! threading inside the engine.
//!
//! ```
//! use micronn::{ArchConfig, Model, Tensor, Mode};
//! use rand::SeedableRng;
//!
//! let arch = ArchConfig { input_side: 16, widths: vec![4, 8], outputs: 4, ..ArchConfig::default() };
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
//! let model = Model::from_arch(&arch, &mut rng).unwrap();
//! let x = Tensor::zeros(&[2, 3, 16, 16]);
//! let p = model.predict(&x).unwrap();
//! assert_eq!(p.shape(), &[2, 4]);
//! ```

mod error;
mod gemm;
pub mod io;
pub mod layers;
pub mod loss;
mod model;
pub mod optim;
mod tensor;
pub mod train;

pub use error::NnError;
pub use io::{load_model, save_model};
pub use layers::{BatchNorm2d, Conv2d, Dense, Layer, LayerKind};
pub use loss::{bce_loss, BCE_CLAMP};
pub use model::{ArchConfig, Gradients, Mode, Model, Trace};
pub use optim::{Adam, AdamConfig};
pub use tensor::Tensor;
pub use train::{bit_accuracy, evaluate, train, Dataset, EpochStats, History, Sample, TrainConfig, TrainError};
