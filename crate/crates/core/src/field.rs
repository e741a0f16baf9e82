//! Arithmetic in GF(2^C) for C = 1..=16.
//!
//! Elements are bit polynomials stored little-endian in a `u32` (bit k is the
//! coefficient of x^k). Each field uses the lexicographically smallest
//! primitive polynomial of its degree, so GF(2^8) reduces by `0x11D`.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

/// Largest supported field size in bits.
pub const MAX_BITS: u8 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("field size {0} bits is outside 1..=16")]
    UnsupportedSize(u8),
    #[error("element from GF(2^{got}) used in GF(2^{expected})")]
    Mismatch { expected: u8, got: u8 },
    #[error("value {value:#x} does not fit in GF(2^{bits})")]
    OutOfRange { value: u32, bits: u8 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("GF(2^{0}) has fewer than three distinct nonzero elements")]
    NoTriplets(u8),
}

/// Multiply two polynomials modulo `poly` (degree `bits`).
fn mul_raw(mut a: u32, mut b: u32, bits: u8, poly: u32) -> u32 {
    let top = 1u32 << bits;
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & top != 0 {
            a ^= poly;
        }
    }
    acc
}

fn prime_factors(mut n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// True when x has multiplicative order exactly 2^bits - 1 modulo `poly`.
/// That also proves `poly` irreducible, since a reducible modulus cannot
/// give an element of full order.
fn is_primitive(poly: u32, bits: u8) -> bool {
    if bits == 1 {
        return poly == 0b11;
    }
    if poly & 1 == 0 {
        return false;
    }
    let order = (1u32 << bits) - 1;
    let pow = |mut e: u32| {
        let (mut base, mut acc) = (2u32, 1u32);
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_raw(acc, base, bits, poly);
            }
            base = mul_raw(base, base, bits, poly);
            e >>= 1;
        }
        acc
    };
    pow(order) == 1 && prime_factors(order).iter().all(|&p| pow(order / p) != 1)
}

fn poly_table() -> &'static [u32; 17] {
    static TABLE: OnceLock<[u32; 17]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0u32; 17];
        for bits in 1..=MAX_BITS {
            let lo = 1u32 << bits;
            t[bits as usize] = (lo..lo << 1)
                .find(|&p| is_primitive(p, bits))
                .expect("every degree has a primitive polynomial");
        }
        t
    })
}

/// The lexicographically smallest primitive polynomial of degree `bits`,
/// including the leading term.
pub fn primitive_polynomial(bits: u8) -> Result<u32, FieldError> {
    if bits == 0 || bits > MAX_BITS {
        return Err(FieldError::UnsupportedSize(bits));
    }
    Ok(poly_table()[bits as usize])
}

/// An element of GF(2^bits). Carries its field size so mixing fields is caught.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement {
    value: u32,
    bits: u8,
}

impl FieldElement {
    pub fn value(self) -> u32 {
        self.value
    }

    pub fn bits(self) -> u8 {
        self.bits
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}@GF(2^{})", self.value, self.bits)
    }
}

/// GF(2^bits) with its reduction polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaloisField {
    bits: u8,
    poly: u32,
}

impl GaloisField {
    pub fn new(bits: u8) -> Result<Self, FieldError> {
        Ok(GaloisField {
            bits,
            poly: primitive_polynomial(bits)?,
        })
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn polynomial(&self) -> u32 {
        self.poly
    }

    pub fn order(&self) -> u32 {
        1 << self.bits
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement {
            value: 0,
            bits: self.bits,
        }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            value: 1,
            bits: self.bits,
        }
    }

    pub fn element(&self, value: u32) -> Result<FieldElement, FieldError> {
        if value >= self.order() {
            return Err(FieldError::OutOfRange {
                value,
                bits: self.bits,
            });
        }
        Ok(FieldElement {
            value,
            bits: self.bits,
        })
    }

    fn check(&self, x: FieldElement) -> Result<(), FieldError> {
        if x.bits != self.bits {
            return Err(FieldError::Mismatch {
                expected: self.bits,
                got: x.bits,
            });
        }
        Ok(())
    }

    pub fn add(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(x)?;
        self.check(y)?;
        Ok(FieldElement {
            value: x.value ^ y.value,
            bits: self.bits,
        })
    }

    /// Subtraction equals addition in characteristic 2.
    pub fn sub(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement, FieldError> {
        self.add(x, y)
    }

    pub fn mul(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(x)?;
        self.check(y)?;
        Ok(FieldElement {
            value: mul_raw(x.value, y.value, self.bits, self.poly),
            bits: self.bits,
        })
    }

    pub fn pow(&self, x: FieldElement, mut e: u64) -> Result<FieldElement, FieldError> {
        self.check(x)?;
        let mut base = x.value;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_raw(acc, base, self.bits, self.poly);
            }
            base = mul_raw(base, base, self.bits, self.poly);
            e >>= 1;
        }
        Ok(FieldElement {
            value: acc,
            bits: self.bits,
        })
    }

    pub fn inv(&self, x: FieldElement) -> Result<FieldElement, FieldError> {
        self.check(x)?;
        if x.is_zero() {
            return Err(FieldError::ZeroInverse);
        }
        self.pow(x, u64::from(self.order()) - 2)
    }

    pub fn div(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement, FieldError> {
        let yi = self.inv(y)?;
        self.mul(x, yi)
    }
}

/// Coefficient sets used by the star and line-star codecs: set `a` on even
/// phases and set `b` on odd ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoeffTriplets {
    pub a: [FieldElement; 3],
    pub b: [FieldElement; 3],
}

impl CoeffTriplets {
    pub fn set(&self, k: bool) -> &[FieldElement; 3] {
        if k {
            &self.b
        } else {
            &self.a
        }
    }
}

/// Pick `a = [1, 1, 1]` and `b = [1, 2, 3]`. Every 2x2 minor
/// `a_i b_j - a_j b_i` is then `b_i + b_j`, nonzero because the b's differ.
/// Needs at least three distinct nonzero elements, so not GF(2).
pub fn choose_triplets(field: &GaloisField) -> Result<CoeffTriplets, FieldError> {
    if field.order() < 4 {
        return Err(FieldError::NoTriplets(field.bits()));
    }
    let one = field.one();
    let e = |v| field.element(v);
    Ok(CoeffTriplets {
        a: [one, one, one],
        b: [one, e(2)?, e(3)?],
    })
}
