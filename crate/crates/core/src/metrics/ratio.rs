//! Minimal exact non-negative rationals for support-weighted averages.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Ratio {
    num: u128,
    den: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Ratio {
    pub(crate) const ZERO: Ratio = Ratio { num: 0, den: 1 };

    /// `None` when `den` is zero.
    pub(crate) fn new(num: u64, den: u64) -> Option<Ratio> {
        (den != 0).then(|| Ratio { num: num as u128, den: den as u128 }.reduced())
    }

    fn reduced(self) -> Ratio {
        if self.num == 0 {
            return Ratio::ZERO;
        }
        let g = gcd(self.num, self.den);
        Ratio { num: self.num / g, den: self.den / g }
    }

    /// `None` on overflow.
    pub(crate) fn checked_add(self, other: Ratio) -> Option<Ratio> {
        let g = gcd(self.den, other.den);
        let den = (self.den / g).checked_mul(other.den)?;
        let num = self
            .num
            .checked_mul(other.den / g)?
            .checked_add(other.num.checked_mul(self.den / g)?)?;
        Some(Ratio { num, den }.reduced())
    }

    /// `None` on overflow.
    pub(crate) fn checked_mul_int(self, k: u64) -> Option<Ratio> {
        let g = gcd(self.den, k as u128).max(1);
        let num = self.num.checked_mul(k as u128 / g)?;
        Some(Ratio { num, den: self.den / g }.reduced())
    }

    /// `None` when `k` is zero or on overflow.
    pub(crate) fn checked_div_int(self, k: u64) -> Option<Ratio> {
        if k == 0 {
            return None;
        }
        let g = gcd(self.num, k as u128).max(1);
        let den = self.den.checked_mul(k as u128 / g)?;
        Some(Ratio { num: self.num / g, den }.reduced())
    }

    /// Correctly rounded whenever numerator and denominator fit in 53 bits,
    /// because both convert exactly and IEEE division rounds once.
    pub(crate) fn to_f64(self) -> f64 {
        const EXACT: u128 = 1 << 53;
        if self.num <= EXACT && self.den <= EXACT {
            return self.num as f64 / self.den as f64;
        }
        // Scale both down together; only reached for very large counts.
        let shift = (128 - self.num.max(self.den).leading_zeros()).saturating_sub(53);
        (self.num >> shift) as f64 / (self.den >> shift) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_reduces() {
        let a = Ratio::new(1, 3).unwrap();
        let b = Ratio::new(1, 6).unwrap();
        assert_eq!(a.checked_add(b), Ratio::new(1, 2));
        assert_eq!(a.checked_mul_int(6), Ratio::new(2, 1));
        assert_eq!(Ratio::ZERO.checked_mul_int(0), Some(Ratio::ZERO));
        assert_eq!(a.checked_div_int(2).unwrap(), Ratio::new(1, 6).unwrap());
        assert!(Ratio::new(1, 0).is_none());
    }

    #[test]
    fn to_f64_matches_direct_division() {
        for (n, d) in [(1670u64, 1766u64), (1, 49), (2, 35), (0, 7)] {
            assert_eq!(Ratio::new(n, d).unwrap().to_f64(), n as f64 / d as f64);
        }
    }
}
