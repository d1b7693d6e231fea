//! Exact rational helpers, rational intervals and real numbers given by
//! continued-fraction digit sources.

use crate::error::{invalid, Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Exact conversion of a finite double.
pub fn from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Invalid(format!("non-finite value {x}")))
}

pub fn to_f64(x: &BigRational) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() && (v != 0.0 || x.is_zero()) {
            return v;
        }
    }
    let l = ln_abs(x);
    let s = if x.is_negative() { -1.0 } else { 1.0 };
    s * l.exp()
}

pub fn ln_abs_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural log of |x|, usable far outside the double range.
pub fn ln_abs(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_abs_int(x.numer()) - ln_abs_int(x.denom())
}

pub fn floor(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// Nearest integer, ties rounded down.
pub fn round_half_down(x: &BigRational) -> BigInt {
    let half = rat(1, 2);
    let f = floor(x);
    let frac = x - BigRational::from_integer(f.clone());
    if frac > half {
        f + 1
    } else {
        f
    }
}

/// Distance to the nearest integer.
pub fn dist_to_int(x: &BigRational) -> BigRational {
    let f = BigRational::from_integer(floor(x));
    let a = x - &f;
    let b = BigRational::one() - &a;
    if a < b {
        a
    } else {
        b
    }
}

/// Canonical continued-fraction digits of a rational, `[a0; a1, ..., an]` with `an >= 2`
/// unless the expansion has a single term.
pub fn cf_digits(x: &BigRational) -> (BigInt, Vec<BigInt>) {
    let mut p = x.numer().clone();
    let mut q = x.denom().clone();
    let (a0, r) = p.div_mod_floor(&q);
    let mut digits = Vec::new();
    p = q;
    q = r;
    while !q.is_zero() {
        let (a, r) = p.div_mod_floor(&q);
        digits.push(a);
        p = q;
        q = r;
    }
    (a0, digits)
}

/// Closed interval with rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RatInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return invalid("interval endpoints out of order");
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn around(center: &BigRational, radius: &BigRational) -> Self {
        let r = radius.abs();
        Self { lo: center - &r, hi: center + &r }
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, o: &RatInterval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn add(&self, o: &RatInterval) -> RatInterval {
        RatInterval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn neg(&self) -> RatInterval {
        RatInterval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn sub(&self, o: &RatInterval) -> RatInterval {
        self.add(&o.neg())
    }

    pub fn shift(&self, c: &BigRational) -> RatInterval {
        RatInterval { lo: &self.lo + c, hi: &self.hi + c }
    }

    pub fn scale(&self, c: &BigRational) -> RatInterval {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            RatInterval { lo: a, hi: b }
        } else {
            RatInterval { lo: b, hi: a }
        }
    }

    pub fn mul(&self, o: &RatInterval) -> RatInterval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        RatInterval { lo, hi }
    }

    /// Reciprocal; fails if the interval touches zero.
    pub fn recip(&self) -> Result<RatInterval> {
        if self.lo.is_positive() || self.hi.is_negative() {
            Ok(RatInterval { lo: self.hi.recip(), hi: self.lo.recip() })
        } else {
            Err(Error::Uncertified("reciprocal of an interval containing 0".into()))
        }
    }

    pub fn abs(&self) -> RatInterval {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            let m = if -&self.lo > self.hi { -&self.lo } else { self.hi.clone() };
            RatInterval { lo: BigRational::zero(), hi: m }
        }
    }

    /// The common floor of all points, if there is one.
    pub fn certified_floor(&self) -> Option<BigInt> {
        let a = floor(&self.lo);
        if floor(&self.hi) == a {
            Some(a)
        } else {
            None
        }
    }

    /// `Some(true)` if every point of `self` is below every point of `o`,
    /// `Some(false)` if the reverse non-strict order holds, else undecided.
    pub fn certainly_less(&self, o: &RatInterval) -> Option<bool> {
        if self.hi < o.lo {
            Some(true)
        } else if self.lo >= o.hi {
            Some(false)
        } else {
            None
        }
    }

    pub fn to_f64_mid(&self) -> f64 {
        to_f64(&self.midpoint())
    }
}

/// Source of continued-fraction digits `a1, a2, ...` after the integer part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DigitSource {
    /// Finite expansion: a rational number.
    Finite { digits: Vec<u64> },
    /// Eventually periodic expansion: a quadratic irrational.
    Periodic { preperiod: Vec<u64>, period: Vec<u64> },
    /// `prefix` followed by `base^k` for `k = start, start + 1, ...`.
    Geometric { prefix: Vec<u64>, base: u64, start: u32 },
    /// The expansion of e minus its integer part: 1, 2, 1, 1, 4, 1, 1, 6, ...
    EPattern,
}

impl DigitSource {
    /// Digit `k` (1-based), `None` past the end of a finite expansion.
    pub fn digit(&self, k: usize) -> Option<BigInt> {
        match self {
            DigitSource::Finite { digits } => digits.get(k - 1).map(|&d| BigInt::from(d)),
            DigitSource::Periodic { preperiod, period } => {
                if k <= preperiod.len() {
                    Some(BigInt::from(preperiod[k - 1]))
                } else {
                    let i = (k - 1 - preperiod.len()) % period.len();
                    Some(BigInt::from(period[i]))
                }
            }
            DigitSource::Geometric { prefix, base, start } => {
                if k <= prefix.len() {
                    Some(BigInt::from(prefix[k - 1]))
                } else {
                    let e = *start as usize + (k - 1 - prefix.len());
                    Some(num_traits::pow(BigInt::from(*base), e))
                }
            }
            DigitSource::EPattern => {
                if k % 3 == 2 {
                    Some(BigInt::from(2 * (k as u64 + 1) / 3))
                } else {
                    Some(BigInt::one())
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            DigitSource::Finite { digits } => {
                if digits.iter().any(|&d| d == 0) {
                    return invalid("continued-fraction digits must be positive");
                }
            }
            DigitSource::Periodic { preperiod, period } => {
                if period.is_empty() || preperiod.iter().chain(period).any(|&d| d == 0) {
                    return invalid("periodic expansion needs a nonempty period of positive digits");
                }
            }
            DigitSource::Geometric { prefix, base, .. } => {
                if *base < 2 || prefix.iter().any(|&d| d == 0) {
                    return invalid("geometric digit source needs base >= 2 and positive prefix");
                }
            }
            DigitSource::EPattern => {}
        }
        Ok(())
    }
}

/// A real number known either exactly (rational) or through its continued-fraction digits.
#[derive(Debug, Clone, PartialEq)]
pub enum RealSpec {
    Rational(BigRational),
    Cf { int_part: BigInt, digits: DigitSource },
}

fn sqrt_cf(n: u64) -> Result<RealSpec> {
    let a0 = (n as f64).sqrt().floor() as u64;
    let a0 = (a0.saturating_sub(2)..=a0 + 2).filter(|a| a * a <= n).max().unwrap_or(0);
    if a0 * a0 == n {
        return Ok(RealSpec::Rational(int(a0 as i64)));
    }
    // Standard recurrence m, d, a for the periodic expansion of sqrt(n).
    let (mut m, mut d, mut a) = (0u64, 1u64, a0);
    let mut period = Vec::new();
    loop {
        m = d * a - m;
        d = (n - m * m) / d;
        a = (a0 + m) / d;
        period.push(a);
        if a == 2 * a0 {
            break;
        }
    }
    Ok(RealSpec::Cf {
        int_part: BigInt::from(a0),
        digits: DigitSource::Periodic { preperiod: vec![], period },
    })
}

fn parse_digit_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|_| Error::Parse(format!("bad digit '{t}'"))))
        .collect()
}

impl RealSpec {
    pub fn rational(x: BigRational) -> Self {
        RealSpec::Rational(x)
    }

    pub fn from_digits(int_part: i64, digits: DigitSource) -> Result<Self> {
        digits.validate()?;
        if let DigitSource::Finite { digits: d } = &digits {
            let mut x = BigRational::zero();
            for &a in d.iter().rev() {
                x = (int(a as i64) + x).recip();
            }
            return Ok(RealSpec::Rational(int(int_part) + x));
        }
        Ok(RealSpec::Cf { int_part: BigInt::from(int_part), digits })
    }

    /// Parses `p/q`, a decimal literal, `golden`, `phi`, `sqrtN`, `e`,
    /// `cf:a0;a1,a2,...` (finite), `cf:a0;a1,...;(p1,p2,...)` (periodic),
    /// or `geom:base:start` / `geom:base:start:d1,d2,...` (growing digits).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "golden" => {
                return Self::from_digits(0, DigitSource::Periodic { preperiod: vec![], period: vec![1] })
            }
            "phi" => {
                return Self::from_digits(1, DigitSource::Periodic { preperiod: vec![], period: vec![1] })
            }
            "e" => return Self::from_digits(2, DigitSource::EPattern),
            _ => {}
        }
        if let Some(n) = s.strip_prefix("sqrt") {
            let n: u64 = n.trim_matches(|c| c == '(' || c == ')').parse().map_err(|_| Error::Parse(s.into()))?;
            return sqrt_cf(n);
        }
        if let Some(body) = s.strip_prefix("cf:") {
            let parts: Vec<&str> = body.split(';').collect();
            let a0: i64 = parts[0].trim().parse().map_err(|_| Error::Parse(s.into()))?;
            let pre = if parts.len() > 1 { parse_digit_list(parts[1])? } else { vec![] };
            if parts.len() > 2 {
                let per = parse_digit_list(parts[2].trim().trim_start_matches('(').trim_end_matches(')'))?;
                return Self::from_digits(a0, DigitSource::Periodic { preperiod: pre, period: per });
            }
            return Self::from_digits(a0, DigitSource::Finite { digits: pre });
        }
        if let Some(body) = s.strip_prefix("geom:") {
            let parts: Vec<&str> = body.split(':').collect();
            if parts.len() < 2 {
                return Err(Error::Parse(s.into()));
            }
            let base = parts[0].parse().map_err(|_| Error::Parse(s.into()))?;
            let start = parts[1].parse().map_err(|_| Error::Parse(s.into()))?;
            let prefix = if parts.len() > 2 { parse_digit_list(parts[2])? } else { vec![] };
            return Self::from_digits(0, DigitSource::Geometric { prefix, base, start });
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| Error::Parse(s.into()))?;
            let q: BigInt = q.trim().parse().map_err(|_| Error::Parse(s.into()))?;
            if q.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            return Ok(RealSpec::Rational(BigRational::new(p, q)));
        }
        parse_decimal(s).map(RealSpec::Rational)
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, RealSpec::Rational(_))
    }

    /// Convergents `(p_{k-1}, q_{k-1}), (p_k, q_k)` after `k` digits.
    fn convergents(&self, k: usize) -> Option<((BigInt, BigInt), (BigInt, BigInt))> {
        let RealSpec::Cf { int_part, digits } = self else { return None };
        let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (int_part.clone(), BigInt::one());
        for i in 1..=k {
            let a = digits.digit(i)?;
            let p2 = &a * &p1 + &p0;
            let q2 = &a * &q1 + &q0;
            p0 = p1;
            q0 = q1;
            p1 = p2;
            q1 = q2;
        }
        Some(((p0, q0), (p1, q1)))
    }

    /// Enclosure between consecutive convergents after `k` digits.
    pub fn enclosure_depth(&self, k: usize) -> RatInterval {
        match self {
            RealSpec::Rational(x) => RatInterval::point(x.clone()),
            RealSpec::Cf { .. } => {
                let ((_, _), (p1, q1)) = self.convergents(k).unwrap();
                let ((_, _), (p2, q2)) = self.convergents(k + 1).unwrap();
                let a = BigRational::new(p1, q1);
                let b = BigRational::new(p2, q2);
                if a <= b {
                    RatInterval { lo: a, hi: b }
                } else {
                    RatInterval { lo: b, hi: a }
                }
            }
        }
    }

    /// Enclosure of width at most `eps` (a positive rational).
    pub fn enclosure(&self, eps: &BigRational) -> RatInterval {
        let mut k = 4;
        loop {
            let e = self.enclosure_depth(k);
            if &e.width() <= eps {
                return e;
            }
            k += 4 + k / 2;
        }
    }

    /// Enclosure of width at most `exp(-ln_eps)`.
    pub fn enclosure_ln(&self, ln_inv_eps: f64) -> RatInterval {
        let mut k = 4;
        loop {
            let e = self.enclosure_depth(k);
            if e.is_point() || -ln_abs(&e.width()) >= ln_inv_eps {
                return e;
            }
            k += 4 + k / 2;
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealSpec::Rational(x) => to_f64(x),
            RealSpec::Cf { .. } => self.enclosure_ln(60.0).to_f64_mid(),
        }
    }
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let err = || Error::Parse(format!("cannot parse number '{s}'"));
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches(['-', '+']);
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(err());
    }
    let digits = format!("{ip}{fp}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let n: BigInt = digits.parse().map_err(|_| err())?;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(RealSpec::parse("3/6").unwrap(), RealSpec::Rational(rat(1, 2)));
        assert_eq!(RealSpec::parse("0.125").unwrap(), RealSpec::Rational(rat(1, 8)));
        assert_eq!(RealSpec::parse("-1.5e1").unwrap(), RealSpec::Rational(int(-15)));
        assert_eq!(RealSpec::parse("cf:0;2,3").unwrap(), RealSpec::Rational(rat(3, 7)));
        let g = RealSpec::parse("golden").unwrap();
        assert!((g.to_f64() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        let s = RealSpec::parse("sqrt7").unwrap();
        assert!((s.to_f64() - 7f64.sqrt()).abs() < 1e-14);
        let e = RealSpec::parse("e").unwrap();
        assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
        assert!(RealSpec::parse("abc").is_err());
    }

    #[test]
    fn sqrt_periods() {
        match RealSpec::parse("sqrt7").unwrap() {
            RealSpec::Cf { int_part, digits: DigitSource::Periodic { period, .. } } => {
                assert_eq!(int_part, BigInt::from(2));
                assert_eq!(period, vec![1, 1, 1, 4]);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn enclosures_shrink_and_contain_value() {
        let g = RealSpec::parse("golden").unwrap();
        let e1 = g.enclosure_depth(10);
        let e2 = g.enclosure_depth(20);
        assert!(e1.contains_interval(&e2));
        assert!(e2.width() < rat(1, 10_000_000));
        let x = g.enclosure_ln(200.0);
        assert!(-ln_abs(&x.width()) >= 200.0);
    }

    #[test]
    fn cf_digits_of_rationals() {
        let (a0, d) = cf_digits(&rat(3, 8));
        assert_eq!(a0, BigInt::zero());
        assert_eq!(d, vec![BigInt::from(2), BigInt::from(1), BigInt::from(2)]);
        let (a0, d) = cf_digits(&rat(-1, 3));
        assert_eq!(a0, BigInt::from(-1));
        assert_eq!(d, vec![BigInt::from(1), BigInt::from(2)]);
    }

    #[test]
    fn huge_ratio_to_f64() {
        let big = BigRational::new(num_traits::pow(BigInt::from(3), 800), num_traits::pow(BigInt::from(2), 1300));
        let expect = 800.0 * 3f64.ln() - 1300.0 * 2f64.ln();
        assert!((ln_abs(&big) - expect).abs() < 1e-9);
        assert!(to_f64(&big) > 0.0);
    }
}
