//! Frame protocol for screen-camera links.
//!
//! A data frame carries a payload, a 5-bit sequence number and a 5-bit
//! checksum, protected by a Reed-Solomon code over GF(2⁵) and serialized as a
//! flat bit vector that fills an `M × N` cell grid.
//!
//! ```text
//! | payload (data_bits) | seq (5) | checksum (5) | RS parity | pad |
//! ```
//!
//! On the receiving side [`parse_frame`] runs RS correction and checks the
//! checksum; [`DedupState`] then screens duplicates and implausible sequence
//! jumps using the camera/display frame-rate separation rule.

pub mod checksum;
pub mod dedup;
pub mod frame;
pub mod gf;
pub mod rs;

pub use checksum::{bsd5, bsd5_symbols};
pub use dedup::{DedupDecision, DedupState};
pub use frame::{
    assemble_frame, bits_to_symbols, parse_frame, symbols_to_bits, FrameError, FrameLayout,
    ParseError, ParsedFrame,
};
pub use gf::{gf_mul, Gf32};
pub use rs::{rs_decode, rs_encode, RsError};
