//! Natural logarithms held as signed fixed-point big integers.
//!
//! A [`LogValue`] stores `raw / 2^FRAC_BITS`. Paper-scale parameters such as
//! `N = D^{cD^2/2}` only ever exist in this form.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fractional bits carried by every [`LogValue`].
pub const FRAC_BITS: u32 = 192;

const GUARD_BITS: u32 = 32;
const WORK_BITS: u32 = FRAC_BITS + GUARD_BITS;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LogValue(BigInt);

impl LogValue {
    pub fn zero() -> Self {
        LogValue(BigInt::zero())
    }

    pub fn from_raw(raw: BigInt) -> Self {
        LogValue(raw)
    }

    pub fn raw(&self) -> &BigInt {
        &self.0
    }

    /// `ln n` for `n >= 1`.
    pub fn ln_u64(n: u64) -> Self {
        assert!(n >= 1, "logarithm of zero");
        LogValue(round_down(ln_work(n, 0)))
    }

    /// `ln x` for a finite positive `f64`, evaluated exactly from its binary
    /// mantissa and exponent.
    pub fn ln_f64(x: f64) -> Self {
        assert!(x.is_finite() && x > 0.0, "logarithm of non-positive value");
        let bits = x.to_bits();
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, exponent) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        LogValue(round_down(ln_work(mantissa, exponent)))
    }

    /// Multiply by the rational `num / den`, rounding toward negative infinity.
    pub fn mul_ratio(&self, num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let prod = &self.0 * BigInt::from(num);
        LogValue(prod.div_floor(&BigInt::from(den)))
    }

    pub fn mul_int(&self, k: i64) -> Self {
        LogValue(&self.0 * BigInt::from(k))
    }

    pub fn add(&self, other: &LogValue) -> Self {
        LogValue(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &LogValue) -> Self {
        LogValue(&self.0 - &other.0)
    }

    pub fn neg(&self) -> Self {
        LogValue(-&self.0)
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == Sign::Minus
    }

    pub fn to_f64(&self) -> f64 {
        // Keep 64 significant bits before converting so huge raws stay finite.
        let bits = self.0.bits();
        if bits <= 1000 {
            return self.0.to_f64().unwrap_or(f64::NAN) * (-(FRAC_BITS as f64)).exp2();
        }
        let shift = bits - 64;
        let top = (&self.0 >> shift).to_f64().unwrap_or(f64::NAN);
        top * (shift as f64 - FRAC_BITS as f64).exp2()
    }

    /// Truncated decimal expansion with `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let negative = self.is_negative();
        let abs = self.0.abs();
        let int_part: BigInt = &abs >> FRAC_BITS;
        let mask = (BigInt::one() << FRAC_BITS) - 1;
        let mut frac = abs & mask;
        let mut out = String::new();
        if negative {
            out.push('-');
        }
        out.push_str(&int_part.to_string());
        if digits > 0 {
            out.push('.');
            let ten = BigInt::from(10u8);
            for _ in 0..digits {
                frac *= &ten;
                let d: BigInt = &frac >> FRAC_BITS;
                out.push(char::from(b'0' + d.to_u8().unwrap_or(0)));
                frac -= d << FRAC_BITS;
            }
        }
        out
    }
}

impl fmt::Display for LogValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(40))
    }
}

fn round_down(work: BigInt) -> BigInt {
    work >> GUARD_BITS
}

/// `ln(m * 2^e)` at `WORK_BITS` precision, for `m >= 1`.
fn ln_work(m: u64, e: i64) -> BigInt {
    let top = 63 - m.leading_zeros() as i64;
    // m = 2^top * r with r in [1, 2)
    let one = BigInt::one() << WORK_BITS;
    let r = (BigInt::from(m) << WORK_BITS) >> top as usize;
    let z = ((&r - &one) << WORK_BITS) / (&r + &one);
    let ln_r = atanh_work(&z) * 2;
    ln_r + ln2_work() * BigInt::from(top + e)
}

fn ln2_work() -> BigInt {
    let one = BigInt::one() << WORK_BITS;
    atanh_work(&(one / 3)) * 2
}

/// `atanh z` for fixed-point `|z| <= 1/3`.
fn atanh_work(z: &BigInt) -> BigInt {
    let z2 = (z * z) >> WORK_BITS;
    let mut power = z.clone();
    let mut sum = BigInt::zero();
    let mut k = 1u64;
    while !power.is_zero() {
        sum += &power / BigInt::from(k);
        power = (&power * &z2) >> WORK_BITS;
        k += 2;
    }
    sum
}
