//! Prints Reed-Solomon test vectors in the format of `testdata/rs_vectors.txt`.
//!
//! ```bash
//! cargo run -p frameproto --example rs_vectors > crates/frameproto/testdata/rs_vectors.txt
//! ```

use frameproto::{rs_encode, Gf32};

fn hex(symbols: &[Gf32]) -> String {
    symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

fn main() {
    println!("# Reed-Solomon over GF(32), primitive polynomial x^5+x^2+1,");
    println!("# generator roots alpha^1..alpha^p, systematic codeword = data || parity.");
    println!("# Symbols are two-digit hex values in 00..1f, highest-degree coefficient first.");
    println!("# n_parity | data | codeword");
    // Simple LCG so the file does not depend on any RNG crate's stream.
    let mut state: u32 = 0x2545_f491;
    let mut next = || {
        state = state.wrapping_mul(1_664_525).wrapping_add(1_013_904_223);
        Gf32::from_low_bits((state >> 24) as u8)
    };
    for (k, p) in [(1, 2), (4, 4), (10, 6), (10, 8), (10, 10), (13, 12), (21, 10), (7, 24)] {
        let data: Vec<Gf32> = (0..k).map(|_| next()).collect();
        let cw = rs_encode(&data, p).expect("fits in 31 symbols");
        println!("{p} | {} | {}", hex(&data), hex(&cw));
    }
    let ones = vec![Gf32::ONE; 8];
    println!("6 | {} | {}", hex(&ones), hex(&rs_encode(&ones, 6).unwrap()));
}
