//! Screen-camera communication: Manchester-coded frame pairs hidden in
//! display content, a simulated camera channel, screen extraction and
//! collective bit decoding.

pub mod channel;
pub mod codec;
pub mod collective;
pub mod content;
pub mod extract;
pub mod frame;
pub mod geometry;

pub use frameproto;
pub use micronn;
pub mod metrics;
pub mod pipeline;
pub mod experiment;
pub mod training;
pub mod cli;
