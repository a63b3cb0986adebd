//! Coefficient fields shared by every module: word-size prime fields and the
//! rationals. Algorithms that make sense in both settings are written once
//! against the [`Field`] trait.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

use crate::error::FfError;

/// A field with a context value (the prime for F_p, nothing for Q).
pub trait Field: Clone + fmt::Debug + PartialEq {
    type E: Clone + fmt::Debug + PartialEq;

    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn from_i64(&self, v: i64) -> Self::E;
    fn from_bigint(&self, v: &BigInt) -> Self::E;
    /// `None` when the denominator is not invertible in the field.
    fn from_rational(&self, v: &BigRational) -> Option<Self::E>;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Option<Self::E>;
    fn is_zero(&self, a: &Self::E) -> bool;
    /// `prime=` value of the text formats: the prime, or `exact`.
    fn tag(&self) -> String;
    fn format(&self, a: &Self::E) -> String;
    fn parse(&self, s: &str) -> Result<Self::E, FfError>;
    /// Scalar that brings a coefficient list to canonical form: first nonzero
    /// entry 1 over F_p, primitive integers with positive first entry over Q.
    fn canonical_scale(&self, coeffs: &[&Self::E]) -> Self::E;

    fn div(&self, a: &Self::E, b: &Self::E) -> Option<Self::E> {
        self.inv(b).map(|ib| self.mul(a, &ib))
    }

    fn pow(&self, a: &Self::E, mut n: u64) -> Self::E {
        let mut base = a.clone();
        let mut acc = self.one();
        while n > 0 {
            if n & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            n >>= 1;
        }
        acc
    }

    fn from_u64(&self, v: u64) -> Self::E {
        self.from_bigint(&BigInt::from(v))
    }
}

/// The prime field F_p for a word-size prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Verifies primality; any prime below 2^63 is accepted.
    pub fn new(p: u64) -> Result<Self, FfError> {
        if p >= 1 << 63 || !is_prime(p) {
            return Err(FfError::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    pub fn mulm(&self, a: u64, b: u64) -> u64 {
        if self.p < 1 << 32 {
            a * b % self.p
        } else {
            ((a as u128 * b as u128) % self.p as u128) as u64
        }
    }

    #[inline]
    pub fn addm(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn subm(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub fn invm(&self, a: u64) -> Option<u64> {
        if a % self.p == 0 {
            return None;
        }
        let (mut r0, mut r1) = (self.p as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        Some(t0.rem_euclid(self.p as i128) as u64)
    }

    /// Symmetric representative in (-p/2, p/2].
    pub fn signed(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    pub fn reduce_bigint(&self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.p)).to_u64().unwrap()
    }
}

impl Field for PrimeField {
    type E = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        self.reduce_i64(v)
    }
    fn from_bigint(&self, v: &BigInt) -> u64 {
        self.reduce_bigint(v)
    }
    fn from_rational(&self, v: &BigRational) -> Option<u64> {
        let d = self.reduce_bigint(v.denom());
        let n = self.reduce_bigint(v.numer());
        self.invm(d).map(|di| self.mulm(n, di))
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        self.addm(*a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        self.subm(*a, *b)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.mulm(*a, *b)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        self.invm(*a)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn tag(&self) -> String {
        self.p.to_string()
    }
    fn format(&self, a: &u64) -> String {
        a.to_string()
    }
    fn parse(&self, s: &str) -> Result<u64, FfError> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let q = parse_rational_parts(n, d)?;
            return self
                .from_rational(&q)
                .ok_or_else(|| FfError::Parse(format!("denominator of {s} vanishes mod {}", self.p)));
        }
        let v: BigInt = s
            .parse()
            .map_err(|_| FfError::Parse(format!("bad integer `{s}`")))?;
        Ok(self.reduce_bigint(&v))
    }
    fn canonical_scale(&self, coeffs: &[&u64]) -> u64 {
        coeffs
            .iter()
            .find(|c| ***c != 0)
            .and_then(|c| self.invm(**c))
            .unwrap_or(1)
    }
}

/// The rational numbers with exact big-integer arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Rationals;

impl Field for Rationals {
    type E = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }
    fn from_rational(&self, v: &BigRational) -> Option<BigRational> {
        Some(v.clone())
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn tag(&self) -> String {
        "exact".into()
    }
    fn format(&self, a: &BigRational) -> String {
        a.to_string()
    }
    fn parse(&self, s: &str) -> Result<BigRational, FfError> {
        parse_rational(s)
    }
    fn canonical_scale(&self, coeffs: &[&BigRational]) -> BigRational {
        let mut den = BigInt::one();
        let mut num = BigInt::zero();
        let mut sign = None;
        for c in coeffs {
            if c.is_zero() {
                continue;
            }
            den = den.lcm(c.denom());
            num = num.gcd(c.numer());
            if sign.is_none() {
                sign = Some(c.is_negative());
            }
        }
        if num.is_zero() {
            return BigRational::one();
        }
        let s = BigRational::new(den, num);
        if sign == Some(true) {
            -s
        } else {
            s
        }
    }
}

/// Parses `n`, `n/d`, or a decimal literal such as `-0.183` exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, FfError> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        return parse_rational_parts(n, d);
    }
    if let Some((m, e)) = s.split_once(['e', 'E']) {
        let e: i32 = e.parse().map_err(|_| FfError::Parse(format!("bad exponent in `{s}`")))?;
        let scale = BigRational::from_integer(num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize));
        let m = parse_rational(m)?;
        return Ok(if e >= 0 { m * scale } else { m / scale });
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ipv: BigInt = if ip.is_empty() || ip == "-" || ip == "+" {
            BigInt::zero()
        } else {
            ip.parse().map_err(|_| FfError::Parse(format!("bad number `{s}`")))?
        };
        let fpv: BigInt = if fp.is_empty() {
            BigInt::zero()
        } else {
            fp.parse().map_err(|_| FfError::Parse(format!("bad number `{s}`")))?
        };
        let scale = num_traits::pow(BigInt::from(10), fp.len());
        let frac = BigRational::new(fpv, scale);
        let whole = BigRational::from_integer(ipv.abs());
        let v = whole + frac;
        return Ok(if neg { -v } else { v });
    }
    let v: BigInt = s
        .parse()
        .map_err(|_| FfError::Parse(format!("bad number `{s}`")))?;
    Ok(BigRational::from_integer(v))
}

fn parse_rational_parts(n: &str, d: &str) -> Result<BigRational, FfError> {
    let n: BigInt = n
        .trim()
        .parse()
        .map_err(|_| FfError::Parse(format!("bad numerator `{n}`")))?;
    let d: BigInt = d
        .trim()
        .parse()
        .map_err(|_| FfError::Parse(format!("bad denominator `{d}`")))?;
    if d.is_zero() {
        return Err(FfError::Parse("zero denominator".into()));
    }
    Ok(BigRational::new(n, d))
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod_u64(r, a, m);
        }
        a = mul_mod_u64(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The `count` largest odd primes strictly below `below`, in descending order.
pub fn prime_pool(count: usize, below: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(count);
    let mut n = below.saturating_sub(1);
    while out.len() < count && n > 2 {
        if is_prime(n) {
            out.push(n);
        }
        n -= 1;
    }
    out
}

/// Default pool: descending odd primes below 2^15.
pub fn default_primes(count: usize) -> Vec<u64> {
    prime_pool(count, 1 << 15)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_matches_trial_division() {
        for n in 0..5000u64 {
            let slow = n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
            assert_eq!(is_prime(n), slow, "{n}");
        }
        assert!(is_prime(32749));
        assert!(is_prime(32719));
        assert!(is_prime((1u64 << 61) - 1));
    }

    #[test]
    fn pool_is_descending_below_bound() {
        let pool = default_primes(90);
        assert_eq!(pool.len(), 90);
        assert_eq!(pool[0], 32749);
        assert!(pool.windows(2).all(|w| w[0] > w[1]));
        assert!(pool.iter().all(|&p| p < 1 << 15 && p % 2 == 1));
    }

    #[test]
    fn rejects_composites() {
        assert!(PrimeField::new(32751).is_err());
        assert!(PrimeField::new(1).is_err());
    }

    #[test]
    fn decimal_parse_is_exact() {
        assert_eq!(parse_rational("0.183").unwrap(), BigRational::new(183.into(), 1000.into()));
        assert_eq!(parse_rational("-1.5").unwrap(), BigRational::new((-3).into(), 2.into()));
        assert_eq!(parse_rational("-637/228").unwrap(), BigRational::new((-637).into(), 228.into()));
        assert_eq!(parse_rational("-2.5e-3").unwrap(), BigRational::new((-1).into(), 400.into()));
        assert_eq!(parse_rational("3E2").unwrap(), BigRational::from_integer(300.into()));
    }

    #[test]
    fn canonical_scale_over_q() {
        let q = Rationals;
        let a = BigRational::new((-1).into(), 6.into());
        let b = BigRational::new(5.into(), 4.into());
        let s = q.canonical_scale(&[&a, &b]);
        assert_eq!(&a * &s, BigRational::from_integer(2.into()));
        assert_eq!(&b * &s, BigRational::from_integer((-15).into()));
    }
}
