//! Arithmetic in GF(2⁵) with primitive polynomial x⁵ + x² + 1.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Sub};

/// x⁵ + x² + 1
pub const PRIMITIVE_POLY: u8 = 0b10_0101;

/// Multiplicative order of the field.
pub const FIELD_ORDER: usize = 31;

struct Tables {
    exp: [u8; 2 * FIELD_ORDER],
    log: [u8; 32],
}

const fn build_tables() -> Tables {
    let mut exp = [0u8; 2 * FIELD_ORDER];
    let mut log = [0u8; 32];
    let mut x: u8 = 1;
    let mut i = 0;
    while i < FIELD_ORDER {
        exp[i] = x;
        exp[i + FIELD_ORDER] = x;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x20 != 0 {
            x ^= PRIMITIVE_POLY;
        }
        i += 1;
    }
    Tables { exp, log }
}

static TABLES: Tables = build_tables();

/// One 5-bit symbol, an element of GF(32).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf32(u8);

impl Gf32 {
    pub const ZERO: Gf32 = Gf32(0);
    pub const ONE: Gf32 = Gf32(1);

    /// Returns `None` for values outside `0..32`.
    pub const fn new(value: u8) -> Option<Gf32> {
        if value < 32 {
            Some(Gf32(value))
        } else {
            None
        }
    }

    /// Keeps the low five bits of `value`.
    pub const fn from_low_bits(value: u8) -> Gf32 {
        Gf32(value & 0x1f)
    }

    pub const fn value(self) -> u8 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// α^i for the primitive element α = x.
    pub fn alpha_pow(i: usize) -> Gf32 {
        Gf32(TABLES.exp[i % FIELD_ORDER])
    }

    /// Discrete log base α; `None` for zero.
    pub fn log(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(TABLES.log[self.0 as usize] as usize)
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(self) -> Option<Gf32> {
        self.log()
            .map(|l| Gf32(TABLES.exp[(FIELD_ORDER - l) % FIELD_ORDER]))
    }

    pub fn pow(self, e: usize) -> Gf32 {
        match self.log() {
            None if e == 0 => Gf32::ONE,
            None => Gf32::ZERO,
            Some(l) => Gf32(TABLES.exp[(l * e) % FIELD_ORDER]),
        }
    }

    /// Iterator over all 32 field elements.
    pub fn all() -> impl Iterator<Item = Gf32> {
        (0u8..32).map(Gf32)
    }
}

impl fmt::Debug for Gf32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf32({})", self.0)
    }
}

impl fmt::Display for Gf32 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02x}", self.0)
    }
}

impl Add for Gf32 {
    type Output = Gf32;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf32) -> Gf32 {
        Gf32(self.0 ^ rhs.0)
    }
}

impl Sub for Gf32 {
    type Output = Gf32;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn sub(self, rhs: Gf32) -> Gf32 {
        Gf32(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf32 {
    fn add_assign(&mut self, rhs: Gf32) {
        self.0 ^= rhs.0;
    }
}

impl Mul for Gf32 {
    type Output = Gf32;
    fn mul(self, rhs: Gf32) -> Gf32 {
        if self.0 == 0 || rhs.0 == 0 {
            return Gf32::ZERO;
        }
        let l = TABLES.log[self.0 as usize] as usize + TABLES.log[rhs.0 as usize] as usize;
        Gf32(TABLES.exp[l])
    }
}

impl MulAssign for Gf32 {
    fn mul_assign(&mut self, rhs: Gf32) {
        *self = *self * rhs;
    }
}

impl Div for Gf32 {
    type Output = Gf32;
    /// Panics on division by zero.
    fn div(self, rhs: Gf32) -> Gf32 {
        let inv = rhs.inv().expect("division by zero in GF(32)");
        self * inv
    }
}

/// Field multiplication.
pub fn gf_mul(a: Gf32, b: Gf32) -> Gf32 {
    a * b
}

#[cfg(test)]
mod tests {
    use super::*;

    // Carry-less multiply followed by reduction; shares nothing with the tables.
    fn slow_mul(a: u8, b: u8) -> u8 {
        let mut acc: u16 = 0;
        for i in 0..5 {
            if b & (1 << i) != 0 {
                acc ^= (a as u16) << i;
            }
        }
        for bit in (5..10).rev() {
            if acc & (1 << bit) != 0 {
                acc ^= (PRIMITIVE_POLY as u16) << (bit - 5);
            }
        }
        acc as u8
    }

    #[test]
    fn table_mul_matches_carryless_reference() {
        for a in Gf32::all() {
            for b in Gf32::all() {
                assert_eq!((a * b).value(), slow_mul(a.value(), b.value()), "{a:?}*{b:?}");
            }
        }
    }

    #[test]
    fn zero_and_one() {
        for k in Gf32::all() {
            assert_eq!(gf_mul(Gf32::ZERO, k), Gf32::ZERO);
            assert_eq!(gf_mul(Gf32::ONE, k), k);
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for a in Gf32::all() {
            if !a.is_zero() {
                assert_eq!(a * a.inv().unwrap(), Gf32::ONE);
            }
            for b in Gf32::all() {
                assert_eq!(a * b, b * a);
                assert_eq!(a + b, b + a);
                for c in Gf32::all() {
                    assert_eq!(a * (b + c), a * b + a * c);
                    assert_eq!((a * b) * c, a * (b * c));
                }
            }
        }
    }

    #[test]
    fn alpha_generates_multiplicative_group() {
        let mut seen = [false; 32];
        for i in 0..FIELD_ORDER {
            let v = Gf32::alpha_pow(i).value() as usize;
            assert!(!seen[v], "α^{i} repeats");
            seen[v] = true;
        }
        assert!(!seen[0]);
        assert_eq!(Gf32::alpha_pow(FIELD_ORDER), Gf32::ONE);
    }

    #[test]
    fn pow_and_div() {
        let a = Gf32::new(7).unwrap();
        assert_eq!(a.pow(0), Gf32::ONE);
        assert_eq!(a.pow(3), a * a * a);
        assert_eq!(Gf32::ZERO.pow(0), Gf32::ONE);
        assert_eq!((a * Gf32::new(19).unwrap()) / Gf32::new(19).unwrap(), a);
        assert!(Gf32::new(32).is_none());
    }
}
