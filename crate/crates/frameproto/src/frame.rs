//! Frame layout, serialization and parsing.
//!
//! Bits are packed MSB-first into 5-bit symbols. The data symbols
//! (`payload ‖ seq ‖ checksum`) come first, then the parity symbols, then up
//! to four zero pad bits when the grid size is not a multiple of five.
//!
//! Grids with more than 31 symbols are split into several RS blocks. Data and
//! parity are each divided as evenly as possible, with spare data symbols
//! going to the first blocks and spare parity symbols to the last, which keeps
//! every block within one symbol of the others. Block `i` is
//! `data_chunk_i ‖ parity_chunk_i`; on the wire all data chunks precede all
//! parity chunks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checksum::bsd5_symbols;
use crate::gf::Gf32;
use crate::rs::{rs_decode, rs_encode, RsError, MAX_CODEWORD_LEN};

pub const SYMBOL_BITS: usize = 5;
pub const SEQ_BITS: usize = 5;
pub const CHECKSUM_BITS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("bit count {0} is not a multiple of 5")]
    Misaligned(usize),
    #[error("bit value {0} is not 0 or 1")]
    NotABit(u8),
    #[error("parity of {0} bits is not a whole number of symbols")]
    PartialParitySymbol(usize),
    #[error("{rows}x{cols} grid with {parity_bits} parity bits leaves no room for payload")]
    NoPayload {
        rows: usize,
        cols: usize,
        parity_bits: usize,
    },
    #[error("expected {expected} payload bits, got {actual}")]
    PayloadLength { expected: usize, actual: usize },
    #[error("expected {expected} frame bits, got {actual}")]
    FrameLength { expected: usize, actual: usize },
    #[error("sequence number {0} does not fit in 5 bits")]
    SeqRange(u8),
    #[error(transparent)]
    Rs(#[from] RsError),
}

/// Why a received frame was dropped.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParseError {
    #[error("reed-solomon decoding failed")]
    RsFailure,
    #[error("checksum mismatch")]
    ChecksumMismatch,
}

impl ParseError {
    pub fn reason(&self) -> &'static str {
        match self {
            ParseError::RsFailure => "rs_failure",
            ParseError::ChecksumMismatch => "checksum_mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFrame {
    pub payload: Vec<u8>,
    pub seq: u8,
    pub corrected: usize,
}

/// One RS block inside a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockShape {
    pub data_symbols: usize,
    pub parity_symbols: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LayoutParams", into = "LayoutParams")]
pub struct FrameLayout {
    rows: usize,
    cols: usize,
    parity_bits: usize,
    data_bits: usize,
    pad_bits: usize,
    blocks: Vec<BlockShape>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct LayoutParams {
    rows: usize,
    cols: usize,
    parity_bits: usize,
}

impl TryFrom<LayoutParams> for FrameLayout {
    type Error = FrameError;
    fn try_from(p: LayoutParams) -> Result<Self, Self::Error> {
        FrameLayout::new(p.rows, p.cols, p.parity_bits)
    }
}

impl From<FrameLayout> for LayoutParams {
    fn from(l: FrameLayout) -> Self {
        LayoutParams {
            rows: l.rows,
            cols: l.cols,
            parity_bits: l.parity_bits,
        }
    }
}

fn split_even(total: usize, parts: usize) -> Vec<usize> {
    let base = total / parts;
    let extra = total % parts;
    (0..parts).map(|i| base + usize::from(i < extra)).collect()
}

impl FrameLayout {
    pub fn new(rows: usize, cols: usize, parity_bits: usize) -> Result<FrameLayout, FrameError> {
        if parity_bits % SYMBOL_BITS != 0 {
            return Err(FrameError::PartialParitySymbol(parity_bits));
        }
        let cells = rows * cols;
        let pad_bits = cells % SYMBOL_BITS;
        let symbol_bits = cells - pad_bits;
        let overhead = SEQ_BITS + CHECKSUM_BITS + parity_bits;
        if symbol_bits <= overhead {
            return Err(FrameError::NoPayload {
                rows,
                cols,
                parity_bits,
            });
        }
        let data_bits = symbol_bits - overhead;
        let total_symbols = symbol_bits / SYMBOL_BITS;
        let parity_symbols = parity_bits / SYMBOL_BITS;
        let data_symbols = total_symbols - parity_symbols;
        let n_blocks = total_symbols.div_ceil(MAX_CODEWORD_LEN);

        let data_split = split_even(data_symbols, n_blocks);
        let mut parity_split = split_even(parity_symbols, n_blocks);
        parity_split.reverse();
        let blocks: Vec<BlockShape> = data_split
            .into_iter()
            .zip(parity_split)
            .map(|(d, p)| BlockShape {
                data_symbols: d,
                parity_symbols: p,
            })
            .collect();
        debug_assert!(blocks
            .iter()
            .all(|b| b.data_symbols + b.parity_symbols <= MAX_CODEWORD_LEN));

        Ok(FrameLayout {
            rows,
            cols,
            parity_bits,
            data_bits,
            pad_bits,
            blocks,
        })
    }

    /// Layout whose parity is `fraction` of the grid, rounded down to whole
    /// symbols.
    pub fn with_parity_fraction(
        rows: usize,
        cols: usize,
        fraction: f64,
    ) -> Result<FrameLayout, FrameError> {
        let raw = ((rows * cols) as f64 * fraction + 1e-9).floor() as usize;
        FrameLayout::new(rows, cols, raw - raw % SYMBOL_BITS)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn cells(&self) -> usize {
        self.rows * self.cols
    }
    pub fn parity_bits(&self) -> usize {
        self.parity_bits
    }
    pub fn data_bits(&self) -> usize {
        self.data_bits
    }
    pub fn seq_bits(&self) -> usize {
        SEQ_BITS
    }
    pub fn checksum_bits(&self) -> usize {
        CHECKSUM_BITS
    }
    pub fn pad_bits(&self) -> usize {
        self.pad_bits
    }
    pub fn blocks(&self) -> &[BlockShape] {
        &self.blocks
    }
    pub fn parity_fraction(&self) -> f64 {
        self.parity_bits as f64 / self.cells() as f64
    }
    /// Bits that survive RS decoding: payload, sequence number and checksum.
    pub fn protected_bits(&self) -> usize {
        self.data_bits + SEQ_BITS + CHECKSUM_BITS
    }
    /// Per-block guarantee: at most this many symbol errors in every block
    /// are always corrected.
    pub fn correctable_per_block(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.parity_symbols / 2).collect()
    }
}

pub fn bits_to_symbols(bits: &[u8]) -> Result<Vec<Gf32>, FrameError> {
    if bits.len() % SYMBOL_BITS != 0 {
        return Err(FrameError::Misaligned(bits.len()));
    }
    bits.chunks(SYMBOL_BITS)
        .map(|chunk| {
            chunk.iter().try_fold(0u8, |acc, &b| match b {
                0 | 1 => Ok((acc << 1) | b),
                other => Err(FrameError::NotABit(other)),
            })
        })
        .map(|v| v.map(Gf32::from_low_bits))
        .collect()
}

pub fn symbols_to_bits(symbols: &[Gf32]) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|s| (0..SYMBOL_BITS).rev().map(move |i| (s.value() >> i) & 1))
        .collect()
}

fn u5_bits(v: u8) -> [u8; 5] {
    [(v >> 4) & 1, (v >> 3) & 1, (v >> 2) & 1, (v >> 1) & 1, v & 1]
}

/// Serializes one data frame to exactly `rows × cols` bits.
pub fn assemble_frame(payload: &[u8], seq: u8, layout: &FrameLayout) -> Result<Vec<u8>, FrameError> {
    if payload.len() != layout.data_bits {
        return Err(FrameError::PayloadLength {
            expected: layout.data_bits,
            actual: payload.len(),
        });
    }
    if seq >= 32 {
        return Err(FrameError::SeqRange(seq));
    }
    let mut head = payload.to_vec();
    head.extend_from_slice(&u5_bits(seq));
    let checksum = bsd5_symbols(&bits_to_symbols(&head)?);
    head.extend_from_slice(&u5_bits(checksum));
    let data = bits_to_symbols(&head)?;

    let mut parity = Vec::with_capacity(layout.parity_bits / SYMBOL_BITS);
    let mut offset = 0;
    for block in &layout.blocks {
        let chunk = &data[offset..offset + block.data_symbols];
        let codeword = rs_encode(chunk, block.parity_symbols)?;
        parity.extend_from_slice(&codeword[block.data_symbols..]);
        offset += block.data_symbols;
    }

    let mut bits = symbols_to_bits(&data);
    bits.extend(symbols_to_bits(&parity));
    bits.resize(layout.cells(), 0);
    Ok(bits)
}

/// Decodes a received frame. Bits are hard decisions; any nonzero value
/// counts as 1.
pub fn parse_frame(bits: &[u8], layout: &FrameLayout) -> Result<Result<ParsedFrame, ParseError>, FrameError> {
    if bits.len() != layout.cells() {
        return Err(FrameError::FrameLength {
            expected: layout.cells(),
            actual: bits.len(),
        });
    }
    let hard: Vec<u8> = bits[..layout.cells() - layout.pad_bits]
        .iter()
        .map(|&b| u8::from(b != 0))
        .collect();
    let symbols = bits_to_symbols(&hard)?;
    let n_data: usize = layout.blocks.iter().map(|b| b.data_symbols).sum();
    let (data_part, parity_part) = symbols.split_at(n_data);

    let mut data = Vec::with_capacity(n_data);
    let mut corrected = 0;
    let (mut d_off, mut p_off) = (0, 0);
    for block in &layout.blocks {
        let mut word = data_part[d_off..d_off + block.data_symbols].to_vec();
        word.extend_from_slice(&parity_part[p_off..p_off + block.parity_symbols]);
        match rs_decode(&word, block.parity_symbols) {
            Ok((d, fixed)) => {
                data.extend(d);
                corrected += fixed;
            }
            Err(RsError::Uncorrectable) => return Ok(Err(ParseError::RsFailure)),
            Err(e) => return Err(e.into()),
        }
        d_off += block.data_symbols;
        p_off += block.parity_symbols;
    }

    let n = data.len();
    let expected = bsd5_symbols(&data[..n - 1]);
    if expected != data[n - 1].value() {
        return Ok(Err(ParseError::ChecksumMismatch));
    }
    let head = symbols_to_bits(&data[..n - 1]);
    let payload = head[..layout.data_bits].to_vec();
    let seq = data[n - 2].value();
    Ok(Ok(ParsedFrame {
        payload,
        seq,
        corrected,
    }))
}
