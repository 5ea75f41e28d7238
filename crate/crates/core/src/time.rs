//! Exact non-negative rational time values.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Largest denominator (in bits) accepted when parsing a time value from text.
pub const MAX_PARSED_DENOMINATOR_BITS: u64 = 128;

/// A rational time quantity. Arithmetic never rounds.
///
/// Values produced by parsing are always non-negative; subtraction may
/// produce negative intermediates, which is what zone bounds need.
/// Small values are kept as `i64` ratios and promoted on overflow.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TimeValue(Repr);

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    Small(Ratio<i64>),
    Big(BigRational),
}

impl Default for TimeValue {
    fn default() -> Self {
        TimeValue::zero()
    }
}

fn demote(r: BigRational) -> TimeValue {
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(d)) if n != i64::MIN && d != i64::MIN => TimeValue(Repr::Small(Ratio::new_raw(n, d))),
        _ => TimeValue(Repr::Big(r)),
    }
}

/// Reduces `n / d` (with `d > 0`) and keeps it small when both parts fit.
fn small(n: i128, d: i128) -> Option<Ratio<i64>> {
    let g = n.gcd(&d);
    let (n, d) = if g > 1 { (n / g, d / g) } else { (n, d) };
    let n = i64::try_from(n).ok().filter(|&v| v != i64::MIN)?;
    let d = i64::try_from(d).ok().filter(|&v| v != i64::MIN)?;
    Some(Ratio::new_raw(n, d))
}

fn parts(r: &Ratio<i64>) -> (i128, i128) {
    (*r.numer() as i128, *r.denom() as i128)
}

fn small_add(a: &Ratio<i64>, b: &Ratio<i64>) -> Option<Ratio<i64>> {
    let ((an, ad), (bn, bd)) = (parts(a), parts(b));
    if ad == bd {
        return small(an + bn, ad);
    }
    small(an * bd + bn * ad, ad * bd)
}

fn small_sub(a: &Ratio<i64>, b: &Ratio<i64>) -> Option<Ratio<i64>> {
    let ((an, ad), (bn, bd)) = (parts(a), parts(b));
    if ad == bd {
        return small(an - bn, ad);
    }
    small(an * bd - bn * ad, ad * bd)
}

fn small_mul(a: &Ratio<i64>, b: &Ratio<i64>) -> Option<Ratio<i64>> {
    let ((an, ad), (bn, bd)) = (parts(a), parts(b));
    small(an * bn, ad * bd)
}

fn small_div(a: &Ratio<i64>, b: &Ratio<i64>) -> Option<Ratio<i64>> {
    let ((an, ad), (bn, bd)) = (parts(a), parts(b));
    if bn < 0 {
        small(-an * bd, -ad * bn)
    } else {
        small(an * bd, ad * bn)
    }
}

fn big(r: &Ratio<i64>) -> BigRational {
    BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

impl TimeValue {
    /// Numerator and denominator when both fit in `i64`.
    pub fn small_parts(&self) -> Option<(i64, i64)> {
        match &self.0 {
            Repr::Small(r) => Some((*r.numer(), *r.denom())),
            Repr::Big(_) => None,
        }
    }

    pub fn zero() -> Self {
        TimeValue(Repr::Small(Ratio::from_integer(0)))
    }

    pub fn one() -> Self {
        TimeValue(Repr::Small(Ratio::from_integer(1)))
    }

    pub fn from_integer(n: i64) -> Self {
        if n == i64::MIN {
            return demote(BigRational::from_integer(BigInt::from(n)));
        }
        TimeValue(Repr::Small(Ratio::from_integer(n)))
    }

    /// `numer / denom`; panics on a zero denominator.
    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        demote(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Self {
        demote(BigRational::new(numer, denom))
    }

    pub fn to_rational(&self) -> BigRational {
        match &self.0 {
            Repr::Small(r) => big(r),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn from_rational(r: BigRational) -> Self {
        demote(r)
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_zero(),
            Repr::Big(r) => r.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_negative(),
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn abs_diff(&self, other: &Self) -> Self {
        (self - other).abs()
    }

    /// Largest integer not above the value.
    pub fn floor_int(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(r.numer().div_euclid(*r.denom())),
            Repr::Big(r) => r.floor().to_integer(),
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract(&self) -> TimeValue {
        match &self.0 {
            Repr::Small(r) => TimeValue(Repr::Small(Ratio::new(r.numer().rem_euclid(*r.denom()), *r.denom()))),
            Repr::Big(r) => demote(r - r.floor()),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(r) => r.is_integer(),
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.numer()),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(r) => BigInt::from(*r.denom()),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero time value");
        if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &other.0) {
            if let Some(q) = small_div(a, b) {
                return TimeValue(Repr::Small(q));
            }
        }
        demote(self.to_rational() / other.to_rational())
    }

    pub fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Parses `"3"`, `"0.25"`, `"1e-3"` or `"5/4"`. Rejects negatives.
    pub fn parse(text: &str) -> Result<Self, Error> {
        let s = text.trim();
        let bad = || Error::InvalidTime(text.to_string());
        if s.is_empty() || s.starts_with('-') {
            return Err(bad());
        }
        let value = if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            BigRational::new(n, d)
        } else {
            parse_decimal(s).ok_or_else(bad)?
        };
        if value.is_negative() {
            return Err(bad());
        }
        if value.denom().bits() > MAX_PARSED_DENOMINATOR_BITS {
            return Err(Error::DenominatorTooLarge(text.to_string()));
        }
        Ok(demote(value))
    }
}

impl Ord for TimeValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a), Repr::Small(b)) => {
                // cross-multiplication in i128 cannot overflow
                let l = *a.numer() as i128 * *b.denom() as i128;
                let r = *b.numer() as i128 * *a.denom() as i128;
                l.cmp(&r)
            }
            _ => self.to_rational().cmp(&other.to_rational()),
        }
    }
}

impl PartialOrd for TimeValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

impl FromStr for TimeValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TimeValue::parse(s)
    }
}

impl fmt::Display for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for TimeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&TimeValue> for &TimeValue {
            type Output = TimeValue;
            fn $method(self, rhs: &TimeValue) -> TimeValue {
                if let (Repr::Small(a), Repr::Small(b)) = (&self.0, &rhs.0) {
                    if let Some(r) = $checked(a, b) {
                        return TimeValue(Repr::Small(r));
                    }
                }
                demote(self.to_rational().$method(rhs.to_rational()))
            }
        }
        impl $tr<TimeValue> for TimeValue {
            type Output = TimeValue;
            fn $method(self, rhs: TimeValue) -> TimeValue {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&TimeValue> for TimeValue {
            type Output = TimeValue;
            fn $method(self, rhs: &TimeValue) -> TimeValue {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, small_add);
forward_binop!(Sub, sub, small_sub);
forward_binop!(Mul, mul, small_mul);

impl AddAssign<&TimeValue> for TimeValue {
    fn add_assign(&mut self, rhs: &TimeValue) {
        *self = &*self + rhs;
    }
}

impl AddAssign<TimeValue> for TimeValue {
    fn add_assign(&mut self, rhs: TimeValue) {
        *self = &*self + &rhs;
    }
}

impl Neg for &TimeValue {
    type Output = TimeValue;
    fn neg(self) -> TimeValue {
        match &self.0 {
            // numerators never hold i64::MIN, so negation cannot overflow
            Repr::Small(r) => TimeValue(Repr::Small(-r)),
            Repr::Big(r) => demote(-r),
        }
    }
}

impl Neg for TimeValue {
    type Output = TimeValue;
    fn neg(self) -> TimeValue {
        -&self
    }
}

impl Sum for TimeValue {
    fn sum<I: Iterator<Item = TimeValue>>(iter: I) -> Self {
        iter.fold(TimeValue::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a TimeValue> for TimeValue {
    fn sum<I: Iterator<Item = &'a TimeValue>>(iter: I) -> Self {
        iter.fold(TimeValue::zero(), |acc, x| acc + x)
    }
}

impl PartialEq<i64> for TimeValue {
    fn eq(&self, other: &i64) -> bool {
        *self == TimeValue::from_integer(*other)
    }
}

impl PartialOrd<i64> for TimeValue {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        Some(self.cmp(&TimeValue::from_integer(*other)))
    }
}

impl From<i64> for TimeValue {
    fn from(n: i64) -> Self {
        TimeValue::from_integer(n)
    }
}

impl Serialize for TimeValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

struct TimeVisitor;

impl<'de> Visitor<'de> for TimeVisitor {
    type Value = TimeValue;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a non-negative number, decimal string or \"p/q\" string")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<TimeValue, E> {
        TimeValue::parse(v).map_err(E::custom)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<TimeValue, E> {
        Ok(demote(BigRational::from_integer(BigInt::from(v))))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<TimeValue, E> {
        if v < 0 {
            return Err(E::custom("negative time value"));
        }
        Ok(TimeValue::from_integer(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<TimeValue, E> {
        // Shortest round-trip decimal text, so 0.1 reads as 1/10.
        if !v.is_finite() {
            return Err(E::custom("non-finite time value"));
        }
        TimeValue::parse(&format!("{}", v)).map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for TimeValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(TimeVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_all_textual_forms() {
        assert_eq!(TimeValue::parse("3").unwrap(), TimeValue::from_integer(3));
        assert_eq!(TimeValue::parse("0.25").unwrap(), TimeValue::from_ratio(1, 4));
        assert_eq!(TimeValue::parse("5/4").unwrap(), TimeValue::from_ratio(5, 4));
        assert_eq!(TimeValue::parse(".5").unwrap(), TimeValue::from_ratio(1, 2));
        assert_eq!(TimeValue::parse("1.5e2").unwrap(), TimeValue::from_integer(150));
        assert_eq!(TimeValue::parse("25e-2").unwrap(), TimeValue::from_ratio(1, 4));
        assert!(TimeValue::parse("-1").is_err());
        assert!(TimeValue::parse("1/0").is_err());
        assert!(TimeValue::parse("abc").is_err());
        assert!(TimeValue::parse("").is_err());
    }

    #[test]
    fn display_is_lowest_terms() {
        assert_eq!(TimeValue::parse("6/4").unwrap().to_string(), "3/2");
        assert_eq!(TimeValue::parse("2.0").unwrap().to_string(), "2");
    }

    #[test]
    fn json_numbers_read_exactly() {
        let v: TimeValue = serde_json::from_str("0.1").unwrap();
        assert_eq!(v, TimeValue::from_ratio(1, 10));
        let v: TimeValue = serde_json::from_str("\"7/3\"").unwrap();
        assert_eq!(v, TimeValue::from_ratio(7, 3));
    }

    #[test]
    fn huge_denominators_rejected() {
        let text = format!("1/{}", "9".repeat(60));
        assert!(matches!(TimeValue::parse(&text), Err(Error::DenominatorTooLarge(_))));
    }

    #[test]
    fn overflow_promotes_to_big() {
        let big = TimeValue::from_integer(i64::MAX);
        let sum = &big + &big;
        assert_eq!(sum.to_string(), "18446744073709551614");
        assert_eq!(&sum - &big, big);
        assert!(sum > big);
        let tiny = TimeValue::from_ratio(1, i64::MAX);
        let prod = &tiny * &tiny;
        assert!(prod < tiny && !prod.is_zero());
        assert_eq!(prod.div(&tiny), tiny);
        assert_eq!(-(-&sum), sum);
    }

    proptest! {
        #[test]
        fn small_and_big_paths_agree(a in any::<i64>(), b in 1i64..i64::MAX, c in any::<i64>(), d in 1i64..i64::MAX) {
            let x = TimeValue::from_ratio(a, b);
            let y = TimeValue::from_ratio(c, d);
            let (rx, ry) = (x.to_rational(), y.to_rational());
            prop_assert_eq!((&x + &y).to_rational(), &rx + &ry);
            prop_assert_eq!((&x - &y).to_rational(), &rx - &ry);
            prop_assert_eq!((&x * &y).to_rational(), &rx * &ry);
            prop_assert_eq!(x.cmp(&y), rx.cmp(&ry));
            prop_assert_eq!(x.fract().to_rational(), &rx - rx.floor());
        }

        #[test]
        fn add_then_subtract_is_exact(a in 0u64..1_000_000, ad in 0u32..7, b in 0u64..1_000_000, bd in 0u32..7) {
            let ta = TimeValue::parse(&format!("{}e-{}", a, ad)).unwrap();
            let tb = TimeValue::parse(&format!("{}e-{}", b, bd)).unwrap();
            prop_assert_eq!(&(&ta + &tb) - &tb, ta);
        }
    }
}
