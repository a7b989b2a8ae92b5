//! Exact arithmetic in Z/qZ for prime q.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The prime field Z/qZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    q: u64,
}

/// Deterministic for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < (1 << 32) {
        // trial division by odd candidates up to sqrt(n)
        if n % 2 == 0 {
            return n == 2;
        }
        let mut d = 3u64;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 2;
        }
        return true;
    }
    primal_check::miller_rabin(n)
}

/// Builds the field Z/qZ, rejecting composite moduli.
pub fn make_field(q: u64) -> Result<PrimeField> {
    if q < 2 {
        return Err(Error::ModulusTooSmall(q));
    }
    if !is_prime(q) {
        return Err(Error::CompositeModulus(q));
    }
    Ok(PrimeField { q })
}

impl PrimeField {
    pub fn new(q: u64) -> Result<Self> {
        make_field(q)
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Number of field elements, as a `usize` index bound.
    #[inline]
    pub fn size(&self) -> usize {
        self.q as usize
    }

    pub fn element(&self, value: u64) -> Result<FieldElement> {
        if value >= self.q {
            return Err(Error::ResidueOutOfRange { value, q: self.q });
        }
        Ok(FieldElement { value, field: *self })
    }

    /// Reduces an arbitrary integer into the field.
    pub fn reduce(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.q,
            field: *self,
        }
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement { value: 0, field: *self }
    }

    pub fn one(&self) -> FieldElement {
        FieldElement {
            value: 1 % self.q,
            field: *self,
        }
    }

    // Residue-level kernels. Callers guarantee inputs are already in [0, q).

    #[inline]
    pub fn add(&self, x: u64, y: u64) -> u64 {
        let s = x as u128 + y as u128;
        let q = self.q as u128;
        (if s >= q { s - q } else { s }) as u64
    }

    #[inline]
    pub fn sub(&self, x: u64, y: u64) -> u64 {
        if x >= y {
            x - y
        } else {
            (x as u128 + self.q as u128 - y as u128) as u64
        }
    }

    #[inline]
    pub fn neg(&self, x: u64) -> u64 {
        if x == 0 {
            0
        } else {
            self.q - x
        }
    }

    #[inline]
    pub fn mul(&self, x: u64, y: u64) -> u64 {
        ((x as u128 * y as u128) % self.q as u128) as u64
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, x: u64) -> Result<u64> {
        if x % self.q == 0 {
            return Err(Error::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.q as i128, (x % self.q) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(t0.rem_euclid(self.q as i128) as u64)
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }
}

/// A residue together with the field it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    field: PrimeField,
}

impl FieldElement {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn same_field(&self, other: &FieldElement) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch {
                left: self.field.q,
                right: other.field.q,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.field.add(self.value, other.value)))
    }

    pub fn checked_sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.field.sub(self.value, other.value)))
    }

    pub fn checked_mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.same_field(other)?;
        Ok(self.with(self.field.mul(self.value, other.value)))
    }

    pub fn inverse(&self) -> Result<FieldElement> {
        Ok(self.with(self.field.inv(self.value)?))
    }

    fn with(&self, value: u64) -> FieldElement {
        FieldElement {
            value,
            field: self.field,
        }
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}
