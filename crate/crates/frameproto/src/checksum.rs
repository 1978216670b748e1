//! BSD rotate-and-add checksum narrowed to a 5-bit register.

use crate::frame::{bits_to_symbols, FrameError};
use crate::gf::Gf32;

/// One step: rotate the register right by one bit, then add the symbol mod 32.
fn step(register: u8, symbol: u8) -> u8 {
    let rotated = (register >> 1) | ((register & 1) << 4);
    (rotated + symbol) & 0x1f
}

pub fn bsd5_symbols(symbols: &[Gf32]) -> u8 {
    symbols.iter().fold(0, |reg, s| step(reg, s.value()))
}

/// Checksum over a bit sequence whose length is a multiple of 5 (MSB-first
/// symbol packing).
pub fn bsd5(bits: &[u8]) -> Result<u8, FrameError> {
    Ok(bsd5_symbols(&bits_to_symbols(bits)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::symbols_to_bits;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_is_zero() {
        assert_eq!(bsd5(&[]).unwrap(), 0);
    }

    #[test]
    fn single_symbol_is_itself() {
        for s in Gf32::all() {
            assert_eq!(bsd5(&symbols_to_bits(&[s])).unwrap(), s.value());
        }
    }

    #[test]
    fn rotation_is_applied_before_the_add() {
        // reg: 0 -> 3 -> rot(3)=0b10001=17, +1 -> 18
        assert_eq!(bsd5_symbols(&[Gf32::new(3).unwrap(), Gf32::ONE]), 18);
    }

    #[test]
    fn misaligned_input_is_an_error() {
        assert!(bsd5(&[1, 0, 1]).is_err());
    }

    #[test]
    fn single_bit_flips_are_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let trials = 10_000;
        let mut detected = 0;
        for _ in 0..trials {
            let n_sym = rng.random_range(1..=14);
            let bits: Vec<u8> = (0..n_sym * 5).map(|_| rng.random_range(0..2)).collect();
            let mut flipped = bits.clone();
            let pos = rng.random_range(0..bits.len());
            flipped[pos] ^= 1;
            if bsd5(&bits).unwrap() != bsd5(&flipped).unwrap() {
                detected += 1;
            }
        }
        let rate = detected as f64 / trials as f64;
        assert!(rate >= 0.95, "detection rate {rate}");
    }
}
