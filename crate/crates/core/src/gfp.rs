//! Arithmetic in the prime field `F_p` for primes below `2^31`.
//!
//! [`PrimeField`] is a validated modulus; it also exposes raw `u32`
//! operations that the matrix code uses on its packed storage.
//! [`FieldElement`] is the value type handed to callers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible modulus (exclusive). Products of two residues fit in `u64`.
pub const MODULUS_LIMIT: u64 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct PrimeField {
    p: u32,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for d in [2u64, 3, 5] {
        if n.is_multiple_of(d) {
            return n == d;
        }
    }
    let mut d = 7u64;
    let mut step = [4u64, 2, 4, 2, 4, 6, 2, 6].iter().cycle();
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += step.next().unwrap();
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= MODULUS_LIMIT || !is_prime(p) {
            return Err(Error::InvalidModulus(p));
        }
        Ok(Self { p: p as u32 })
    }

    #[inline]
    pub fn modulus(self) -> u32 {
        self.p
    }

    /// Reduces any signed integer into `[0, p)`.
    pub fn elem(self, v: i64) -> FieldElement {
        FieldElement {
            value: self.reduce(v),
            field: self,
        }
    }

    pub fn zero(self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(self) -> FieldElement {
        self.elem(1)
    }

    /// Wraps an already-reduced residue, rejecting values `>= p`.
    pub fn checked(self, v: u64) -> Option<FieldElement> {
        (v < self.p as u64).then_some(FieldElement {
            value: v as u32,
            field: self,
        })
    }

    #[inline]
    pub fn reduce(self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        let s = a as u64 + b as u64;
        let p = self.p as u64;
        (if s >= p { s - p } else { s }) as u32
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + (self.p - b)
        }
    }

    #[inline]
    pub fn neg(self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    /// Inverse by the extended Euclidean algorithm.
    pub fn inv(self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        let (mut r0, mut r1) = (self.p as i64, a as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        // r0 == gcd(p, a) == 1 since p is prime and 0 < a < p
        debug_assert_eq!(r0, 1);
        Some(self.reduce(t0))
    }

    /// `a^e` for signed `e`; `0^0 = 1`.
    pub fn pow(self, a: u32, e: i64) -> Option<u32> {
        let base = if e < 0 { self.inv(a)? } else { a };
        let mut e = e.unsigned_abs();
        let mut acc = 1 % self.p;
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, sq);
            }
            sq = self.mul(sq, sq);
            e >>= 1;
        }
        Some(acc)
    }
}

impl TryFrom<u64> for PrimeField {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        PrimeField::new(p)
    }
}

impl From<PrimeField> for u64 {
    fn from(f: PrimeField) -> u64 {
        f.p as u64
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

/// A fully reduced residue together with its field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u32,
    field: PrimeField,
}

impl FieldElement {
    #[inline]
    pub fn value(self) -> u32 {
        self.value
    }

    #[inline]
    pub fn field(self) -> PrimeField {
        self.field
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inv(self) -> Result<Self> {
        let value = self.field.inv(self.value).ok_or(Error::ZeroInverse)?;
        Ok(Self { value, ..self })
    }

    pub fn pow(self, e: i64) -> Result<Self> {
        let value = self.field.pow(self.value, e).ok_or(Error::ZeroInverse)?;
        Ok(Self { value, ..self })
    }

    #[inline]
    fn check(self, other: Self) {
        assert_eq!(
            self.field, other.field,
            "field elements from different moduli"
        );
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.check(rhs);
        Self {
            value: self.field.add(self.value, rhs.value),
            ..self
        }
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.check(rhs);
        Self {
            value: self.field.sub(self.value, rhs.value),
            ..self
        }
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.check(rhs);
        Self {
            value: self.field.mul(self.value, rhs.value),
            ..self
        }
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            value: self.field.neg(self.value),
            ..self
        }
    }
}
