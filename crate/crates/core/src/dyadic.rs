//! Exact dyadic rationals `num / 2^exp`.
//!
//! Every Fourier coefficient, influence and probability produced by the
//! exact engine is a dyadic rational, so this type is closed under all the
//! arithmetic the library needs and equality is decidable.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

/// A dyadic rational, always normalized: `num` odd, or `num == 0` and `exp == 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: impl Into<BigInt>, exp: u32) -> Self {
        let mut num = num.into();
        if num.is_zero() {
            return Self::zero();
        }
        let tz = num.trailing_zeros().unwrap_or(0).min(exp as u64) as u32;
        if tz > 0 {
            num >>= tz;
        }
        Dyadic { num, exp: exp - tz }
    }

    /// `scaled / 2^exp` from a machine integer; the common case in the engine.
    pub fn from_scaled(scaled: i128, exp: u32) -> Self {
        if scaled == 0 {
            return Self::zero();
        }
        let tz = scaled.trailing_zeros().min(exp);
        Dyadic {
            num: BigInt::from(scaled >> tz),
            exp: exp - tz,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            num: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            num: BigInt::one(),
            exp: 0,
        }
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(v, 0)
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            num: self.num.abs(),
            exp: self.exp,
        }
    }

    /// Multiplies by `2^k` (k may be negative).
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        if k >= 0 {
            let k = k as u64;
            if k <= self.exp as u64 {
                Dyadic {
                    num: self.num.clone(),
                    exp: self.exp - k as u32,
                }
            } else {
                Dyadic {
                    num: &self.num << (k - self.exp as u64),
                    exp: 0,
                }
            }
        } else {
            Dyadic {
                num: self.num.clone(),
                exp: self.exp + (-k) as u32,
            }
        }
    }

    /// True iff the value is an integer multiple of `2^-k`.
    pub fn in_lattice(&self, k: u32) -> bool {
        self.exp <= k
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.num.bits();
        // keep 64 significant bits so the conversion does not overflow
        if bits > 64 {
            let shift = bits - 64;
            let top = (&self.num >> shift).to_f64().unwrap_or(f64::NAN);
            return top * 2f64.powi(shift as i32 - self.exp as i32);
        }
        self.num.to_f64().unwrap_or(f64::NAN) * pow2_neg(self.exp)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), BigInt::one() << self.exp)
    }

    /// Parse the `(num, exp)` serialized pair back.
    pub fn from_parts(num: &str, exp: u32) -> Option<Self> {
        num.parse::<BigInt>().ok().map(|n| Dyadic::new(n, exp))
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let e = self.exp.max(other.exp);
        (
            &self.num << (e - self.exp),
            &other.num << (e - other.exp),
            e,
        )
    }
}

fn pow2_neg(exp: u32) -> f64 {
    if exp <= 1022 {
        2f64.powi(-(exp as i32))
    } else {
        0.0
    }
}

impl Default for Dyadic {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Dyadic {
    fn from(v: i64) -> Self {
        Dyadic::from_int(v)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.num.sign(), other.num.sign()) {
            (a, b) if a != b => sign_rank(a).cmp(&sign_rank(b)),
            _ => {
                let (a, b, _) = self.aligned(other);
                a.cmp(&b)
            }
        }
    }
}

fn sign_rank(s: Sign) -> i8 {
    match s {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, e) = self.aligned(rhs);
        Dyadic::new(a - b, e)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        // product of odd numerators is odd, so no renormalization needed
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            num: &self.num * &rhs.num,
            exp: self.exp + rhs.exp,
        }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic {
            num: -&self.num,
            exp: self.exp,
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: Dyadic) -> Dyadic {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $m(self, rhs: &Dyadic) -> Dyadic {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        -&self
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, BigInt::one() << self.exp)
        }
    }
}

/// Serialized as `{"num": "<decimal>", "exp": e, "float": x}`.
impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Dyadic", 3)?;
        st.serialize_field("num", &self.num.to_string())?;
        st.serialize_field("exp", &self.exp)?;
        st.serialize_field("float", &self.to_f64())?;
        st.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalizes() {
        let d = Dyadic::new(12, 4);
        assert_eq!(d.num(), &BigInt::from(3));
        assert_eq!(d.exp(), 2);
        assert_eq!(Dyadic::new(0, 9), Dyadic::zero());
        assert_eq!(Dyadic::new(8, 2), Dyadic::from_int(2));
        assert_eq!(Dyadic::from_scaled(-12, 4), Dyadic::new(-3, 2));
    }

    #[test]
    fn arithmetic_and_display() {
        let half = Dyadic::new(1, 1);
        let quarter = Dyadic::new(1, 2);
        assert_eq!(&half + &quarter, Dyadic::new(3, 2));
        assert_eq!(&quarter - &half, Dyadic::new(-1, 2));
        assert_eq!(&half * &half, quarter);
        assert_eq!((&half + &half), Dyadic::one());
        assert_eq!(Dyadic::new(-3, 3).to_string(), "-3/8");
        assert_eq!(Dyadic::from_int(5).to_string(), "5");
        assert_eq!(Dyadic::new(7, 4).mul_pow2(2), Dyadic::new(7, 2));
        assert_eq!(Dyadic::new(7, 1).mul_pow2(3), Dyadic::from_int(28));
        assert!(Dyadic::new(3, 2).in_lattice(2));
        assert!(!Dyadic::new(3, 2).in_lattice(1));
    }

    #[test]
    fn ordering_across_signs() {
        let mut v = [
            Dyadic::new(1, 3),
            Dyadic::new(-5, 1),
            Dyadic::zero(),
            Dyadic::from_int(1),
            Dyadic::new(-1, 4),
        ];
        v.sort();
        let f: Vec<f64> = v.iter().map(Dyadic::to_f64).collect();
        assert_eq!(f, vec![-2.5, -0.0625, 0.0, 0.125, 1.0]);
    }

    #[test]
    fn float_conversion_of_wide_numerators() {
        let big = Dyadic::new(BigInt::from(3) << 200u32, 201);
        assert_eq!(big.to_f64(), 1.5);
    }

    proptest! {
        #[test]
        fn matches_rational_arithmetic(a in -1_000_000i64..1_000_000, ea in 0u32..40,
                                       b in -1_000_000i64..1_000_000, eb in 0u32..40) {
            let x = Dyadic::new(a, ea);
            let y = Dyadic::new(b, eb);
            let (rx, ry) = (x.to_rational(), y.to_rational());
            prop_assert_eq!((&x + &y).to_rational(), &rx + &ry);
            prop_assert_eq!((&x - &y).to_rational(), &rx - &ry);
            prop_assert_eq!((&x * &y).to_rational(), &rx * &ry);
            prop_assert_eq!(x.cmp(&y), rx.cmp(&ry));
            let s = &x + &y;
            prop_assert!(s.is_zero() && s.exp() == 0 || s.num().bit(0) || s.exp() == 0);
        }
    }
}
