//! Exact comparison of non-negative rationals kept as raw (numerator, denominator) pairs.

use std::cmp::Ordering;

use serde::Serialize;

/// `num / den` with `den > 0`, never reduced so both sides of a measured
/// inequality stay visible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ExactRatio {
    pub num: u128,
    pub den: u128,
}

impl ExactRatio {
    pub fn new(num: u128, den: u128) -> Self {
        assert!(den > 0, "zero denominator");
        ExactRatio { num, den }
    }

    /// Decimal approximation, for display only.
    pub fn approx(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    /// Exact ordering; equal values with different representations compare equal.
    pub fn cmp_value(&self, other: &ExactRatio) -> Ordering {
        cmp_fractions(self.num, self.den, other.num, other.den)
    }
}

fn cmp_fractions(a: u128, b: u128, c: u128, d: u128) -> Ordering {
    if let (Some(l), Some(r)) = (a.checked_mul(d), c.checked_mul(b)) {
        return l.cmp(&r);
    }
    // compare integer parts, then recurse on the reciprocals of the fractional parts
    let (qa, ra) = (a / b, a % b);
    let (qc, rc) = (c / d, c % d);
    match qa.cmp(&qc) {
        Ordering::Equal => match (ra == 0, rc == 0) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => cmp_fractions(d, rc, b, ra),
        },
        other => other,
    }
}

/// `floor(sqrt(n))` for 128-bit `n`.
pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x.checked_mul(x).is_none_or(|sq| sq > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|sq| sq <= n) {
        x += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compares_without_overflow() {
        let big = u128::MAX / 3;
        let a = ExactRatio::new(big, big - 1);
        let b = ExactRatio::new(big - 1, big - 2);
        assert_eq!(a.cmp_value(&b), Ordering::Less);
        assert_eq!(ExactRatio::new(big, big).cmp_value(&ExactRatio::new(1, 1)), Ordering::Equal);
    }

    #[test]
    fn isqrt_edges() {
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(8), 2);
        assert_eq!(isqrt(9), 3);
        assert_eq!(isqrt(u128::MAX), u64::MAX as u128);
    }

    proptest! {
        #[test]
        fn matches_wide_cross_multiplication(a in 0u64.., b in 1u64.., c in 0u64.., d in 1u64..) {
            let expect = (a as u128 * d as u128).cmp(&(c as u128 * b as u128));
            prop_assert_eq!(ExactRatio::new(a as u128, b as u128).cmp_value(&ExactRatio::new(c as u128, d as u128)), expect);
        }

        #[test]
        fn isqrt_is_floor(n in any::<u64>()) {
            let r = isqrt(n as u128);
            prop_assert!(r * r <= n as u128 && (r + 1) * (r + 1) > n as u128);
        }
    }
}
