//! Arbitrary-precision reals and complex numbers with a pessimistic
//! absolute error bound carried alongside every value.

use std::cmp::Ordering;
use std::fmt;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::ops::{BitTest, UnsignedAbs};
use dashu_int::IBig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{ContError, FfError};
use crate::field::{parse_rational, Field};

type Raw = FBig<HalfEven, 2>;

const LOG10_2: f64 = std::f64::consts::LOG10_2;

fn bits_for(digits: usize) -> usize {
    (digits as f64 / LOG10_2).ceil() as usize + 8
}

/// `log10(10^a + 10^b)` with `-inf` as the additive identity.
fn log10_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (1.0 + 10f64.powf(lo - hi)).log10()
}

fn raw_log10(v: &Raw) -> f64 {
    let sig = v.repr().significand();
    if sig.is_zero() {
        return f64::NEG_INFINITY;
    }
    let mag = sig.clone().unsigned_abs();
    let bits = mag.bit_len();
    let shift = bits.saturating_sub(60);
    let top: u64 = (mag >> shift).try_into().unwrap_or(u64::MAX);
    ((top as f64).log2() + shift as f64 + v.repr().exponent() as f64) * LOG10_2
}

fn ibig(v: &BigInt) -> IBig {
    let (sign, mag) = v.to_bytes_le();
    let m = IBig::from(dashu_int::UBig::from_le_bytes(&mag));
    if sign == num_bigint::Sign::Minus {
        -m
    } else {
        m
    }
}

fn bigint(v: &IBig) -> BigInt {
    let neg = *v < IBig::ZERO;
    let mag = v.clone().unsigned_abs().to_le_bytes();
    let m = BigInt::from_bytes_le(num_bigint::Sign::Plus, &mag);
    if neg {
        -m
    } else {
        m
    }
}

/// A real number with working precision `prec` (decimal digits) and an
/// absolute error bound `10^err`.
#[derive(Clone, Debug)]
pub struct BigFloat {
    v: Raw,
    err: f64,
    prec: usize,
}

impl BigFloat {
    fn raw(v: Raw, prec: usize) -> Raw {
        v.with_precision(bits_for(prec)).value()
    }

    /// Rounds an exact result and adds the rounding error to `err`.
    fn rounded(v: Raw, err: f64, prec: usize) -> Self {
        let v = Self::raw(v, prec);
        let round = raw_log10(&v) - prec as f64;
        BigFloat { v, err: log10_add(err, round), prec }
    }

    pub fn zero(prec: usize) -> Self {
        BigFloat { v: Self::raw(Raw::ZERO, prec), err: f64::NEG_INFINITY, prec }
    }

    pub fn from_i64(x: i64, prec: usize) -> Self {
        BigFloat { v: Self::raw(Raw::from(x), prec), err: f64::NEG_INFINITY, prec }
    }

    pub fn from_bigint(x: &BigInt, prec: usize) -> Self {
        let v = Raw::from_parts(ibig(x), 0);
        if x.bits() as usize <= bits_for(prec) {
            BigFloat { v: Self::raw(v, prec), err: f64::NEG_INFINITY, prec }
        } else {
            Self::rounded(v, f64::NEG_INFINITY, prec)
        }
    }

    pub fn from_rational(x: &BigRational, prec: usize) -> Self {
        if x.is_integer() {
            return Self::from_bigint(x.numer(), prec);
        }
        let n = Self::from_bigint(x.numer(), prec + 10);
        let d = Self::from_bigint(x.denom(), prec + 10);
        let q = n.v / d.v;
        Self::rounded(q, f64::NEG_INFINITY, prec)
    }

    pub fn from_f64(x: f64, prec: usize) -> Self {
        let r = BigRational::from_float(x).unwrap_or_else(BigRational::zero);
        let mut b = Self::from_rational(&r, prec);
        // an f64 carries about 16 significant digits
        if x != 0.0 {
            b.err = log10_add(b.err, x.abs().log10() - 15.9);
        }
        b
    }

    pub fn pi(prec: usize) -> Self {
        let v = Raw::pi(bits_for(prec + 5));
        Self::rounded(v, f64::NEG_INFINITY, prec)
    }

    /// Working precision in decimal digits.
    pub fn prec(&self) -> usize {
        self.prec
    }

    /// `log10` of the absolute error bound (`-inf` when exact).
    pub fn err_log10(&self) -> f64 {
        self.err
    }

    /// `log10 |x|` (`-inf` for zero).
    pub fn log10_abs(&self) -> f64 {
        raw_log10(&self.v)
    }

    /// Correct significant digits guaranteed by the error bound, capped at
    /// the working precision.
    pub fn digits(&self) -> f64 {
        if self.err == f64::NEG_INFINITY {
            return self.prec as f64;
        }
        let m = self.log10_abs();
        if m == f64::NEG_INFINITY {
            return 0.0;
        }
        (m - self.err).clamp(0.0, self.prec as f64)
    }

    /// Same value at a new working precision; the error bound is kept.
    pub fn with_prec(&self, prec: usize) -> Self {
        if prec >= self.prec {
            BigFloat { v: Self::raw(self.v.clone(), prec), err: self.err, prec }
        } else {
            Self::rounded(self.v.clone(), self.err, prec)
        }
    }

    /// Widens the error bound by `10^e`.
    pub fn add_error(&self, e: f64) -> Self {
        BigFloat { v: self.v.clone(), err: log10_add(self.err, e), prec: self.prec }
    }

    /// Value known to be within `10^err` of zero.
    pub fn is_negligible(&self) -> bool {
        let m = self.log10_abs();
        m == f64::NEG_INFINITY || m <= self.err
    }

    pub fn is_exact_zero(&self) -> bool {
        self.v.repr().significand().is_zero()
    }

    pub fn is_negative(&self) -> bool {
        *self.v.repr().significand() < IBig::ZERO
    }

    fn p2(&self, o: &Self) -> usize {
        self.prec.max(o.prec)
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = self.p2(o);
        Self::rounded(&self.v + &o.v, log10_add(self.err, o.err), prec)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let prec = self.p2(o);
        Self::rounded(&self.v - &o.v, log10_add(self.err, o.err), prec)
    }

    pub fn neg(&self) -> Self {
        BigFloat { v: -self.v.clone(), err: self.err, prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prec = self.p2(o);
        let (la, lb) = (self.log10_abs(), o.log10_abs());
        let err = log10_add(log10_add(la + o.err, lb + self.err), self.err + o.err);
        Self::rounded(&self.v * &o.v, err, prec)
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        self.mul(&BigFloat::from_i64(k, self.prec))
    }

    /// Quotient; the relative errors add, inflated when the divisor is
    /// barely resolved.
    pub fn div(&self, o: &Self) -> Result<Self, ContError> {
        if o.is_negligible() {
            return Err(ContError::BelowPrecision(o.digits()));
        }
        let prec = self.p2(o);
        let q = Self::raw(self.v.clone(), prec + 5) / Self::raw(o.v.clone(), prec + 5);
        let rel_b = o.err - o.log10_abs();
        let rel_a = if self.is_exact_zero() { self.err - o.log10_abs() } else { self.err - self.log10_abs() };
        let lq = raw_log10(&q);
        let inflate = -(1.0 - 10f64.powf(rel_b)).log10();
        let err = if self.is_exact_zero() {
            rel_a + inflate
        } else {
            log10_add(rel_a, rel_b) + lq + inflate
        };
        Ok(Self::rounded(q, err, prec))
    }

    pub fn div_i64(&self, k: i64) -> Self {
        self.div(&BigFloat::from_i64(k, self.prec)).expect("nonzero integer divisor")
    }

    pub fn recip(&self) -> Result<Self, ContError> {
        BigFloat::from_i64(1, self.prec).div(self)
    }

    pub fn sqrt(&self) -> Result<Self, ContError> {
        if self.is_negative() && !self.is_negligible() {
            return Err(ContError::NoRoot("square root of a negative number".into()));
        }
        if self.is_negligible() {
            return Ok(BigFloat { v: Self::raw(Raw::ZERO, self.prec), err: self.err / 2.0, prec: self.prec });
        }
        let r = Self::raw(self.v.clone(), self.prec + 5).sqrt();
        let rel = self.err - self.log10_abs();
        let err = rel + raw_log10(&r) - 2f64.log10();
        Ok(Self::rounded(r, err, self.prec))
    }

    /// Natural logarithm of a positive number.
    pub fn ln(&self) -> Result<Self, ContError> {
        if self.is_negative() || self.is_negligible() {
            return Err(ContError::NoRoot("logarithm of a non-positive number".into()));
        }
        let r = Self::raw(self.v.clone(), self.prec + 5).ln();
        let rel = self.err - self.log10_abs();
        let err = rel - (1.0 - 10f64.powf(rel.min(-0.1))).log10();
        Ok(Self::rounded(r, err, self.prec))
    }

    pub fn exp(&self) -> Self {
        let r = Self::raw(self.v.clone(), self.prec + 5).exp();
        // |e^{x+d} - e^x| <= e^x (e^|d| - 1)
        let d = 10f64.powf(self.err.min(2.0));
        let err = raw_log10(&r) + (d.exp_m1()).log10();
        Self::rounded(r, err, self.prec)
    }

    pub fn powi(&self, n: i64) -> Result<Self, ContError> {
        if n < 0 {
            return self.powi(-n)?.recip();
        }
        let mut acc = BigFloat::from_i64(1, self.prec);
        let mut base = self.clone();
        let mut e = n as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// `(sin x, cos x)` by Taylor series after reduction to `[-π, π]`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let prec = self.prec;
        let work = prec + 15;
        let x = self.with_prec(work);
        let two_pi = BigFloat::pi(work).mul_i64(2);
        let k = x.div(&two_pi).map(|q| q.round_to_bigint()).unwrap_or_default();
        let r = x.sub(&two_pi.mul(&BigFloat::from_bigint(&k, work)));
        let tol = -(work as f64);
        let r2 = r.mul(&r);
        let mut term = BigFloat::from_i64(1, work);
        let mut cos = term.clone();
        let mut s_term = r.clone();
        let mut sin = r.clone();
        let mut i = 1i64;
        loop {
            term = term.mul(&r2).div_i64((2 * i - 1) * (2 * i)).neg();
            s_term = s_term.mul(&r2).div_i64((2 * i) * (2 * i + 1)).neg();
            cos = cos.add(&term);
            sin = sin.add(&s_term);
            if term.log10_abs().max(s_term.log10_abs()) < tol {
                break;
            }
            i += 1;
        }
        // derivative bound 1: input error carries over, plus truncation
        let err = log10_add(self.err, -(prec as f64) - 1.0);
        let fix = |v: BigFloat| BigFloat::rounded(v.v, err, prec);
        (fix(sin), fix(cos))
    }

    /// Nearest integer.
    pub fn round_to_bigint(&self) -> BigInt {
        let half = Raw::from_parts(IBig::from(1), -1);
        let shifted = if self.is_negative() { &self.v - &half } else { &self.v + &half };
        bigint(&shifted.trunc().to_int().value())
    }

    /// Exact binary value as a rational.
    pub fn to_rational(&self) -> BigRational {
        let sig = bigint(self.v.repr().significand());
        let e = self.v.repr().exponent();
        if e >= 0 {
            BigRational::from_integer(sig << e as usize)
        } else {
            BigRational::new(sig, BigInt::from(1) << (-e) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.v.to_f64().value()
    }

    /// Ordering that refuses to decide when the difference is within the
    /// combined error bound.
    pub fn cmp_checked(&self, o: &Self) -> Result<Ordering, ContError> {
        let d = self.sub(o);
        if d.is_negligible() {
            return Err(ContError::BelowPrecision(d.digits()));
        }
        Ok(if d.is_negative() { Ordering::Less } else { Ordering::Greater })
    }

    /// Whether `|self - o|` is within the combined error bound widened to
    /// `10^tol`.
    pub fn agrees_with(&self, o: &Self, tol: f64) -> bool {
        let d = self.sub(o);
        let m = d.log10_abs();
        m == f64::NEG_INFINITY || m <= log10_add(d.err, tol)
    }

    /// Decimal text of the correct digits, `d.ddd…e±X`.
    pub fn to_sci(&self, digits: usize) -> String {
        let digits = digits.max(1);
        if self.is_exact_zero() {
            return "0".to_string();
        }
        let dec = self.v.to_decimal().value().with_precision(digits).value();
        let sig = bigint(dec.repr().significand());
        let exp10 = dec.repr().exponent();
        let neg = sig.is_negative();
        let s = sig.abs().to_string();
        let e = exp10 + s.len() as isize - 1;
        let (head, tail) = s.split_at(1);
        let tail = tail.trim_end_matches('0');
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(head);
        if !tail.is_empty() {
            out.push('.');
            out.push_str(tail);
        }
        if e != 0 {
            out.push_str(&format!("e{e}"));
        }
        out
    }

    /// Serialized form: decimal string with an `@digits` suffix.
    pub fn to_tagged(&self) -> String {
        let d = self.digits().floor() as usize;
        format!("{}@{}", self.to_sci(d.max(1)), d)
    }

    pub fn parse_tagged(s: &str) -> Result<Self, FfError> {
        let (num, digits) = match s.trim().split_once('@') {
            Some((n, d)) => (
                n,
                Some(d.trim().parse::<usize>().map_err(|_| FfError::Parse(format!("bad digit tag `{d}`")))?),
            ),
            None => (s.trim(), None),
        };
        let r = parse_rational(num)?;
        let prec = digits.unwrap_or(num.len().max(20));
        let mut b = BigFloat::from_rational(&r, prec);
        if let Some(d) = digits {
            if !r.is_zero() {
                b.err = log10_add(b.err, b.log10_abs() - d as f64);
            }
        }
        Ok(b)
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_tagged())
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, o: &Self) -> bool {
        self.v == o.v
    }
}

/// [`BigFloat`] as a field at a fixed working precision, so series and
/// operator routines run numerically. `is_zero` means "indistinguishable
/// from zero at the tracked precision".
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BigFloatField {
    pub digits: usize,
}

impl Field for BigFloatField {
    type E = BigFloat;

    fn zero(&self) -> BigFloat {
        BigFloat::zero(self.digits)
    }
    fn one(&self) -> BigFloat {
        BigFloat::from_i64(1, self.digits)
    }
    fn from_i64(&self, v: i64) -> BigFloat {
        BigFloat::from_i64(v, self.digits)
    }
    fn from_bigint(&self, v: &BigInt) -> BigFloat {
        BigFloat::from_bigint(v, self.digits)
    }
    fn from_rational(&self, v: &BigRational) -> Option<BigFloat> {
        Some(BigFloat::from_rational(v, self.digits))
    }
    fn add(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.add(b)
    }
    fn sub(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.sub(b)
    }
    fn mul(&self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        a.mul(b)
    }
    fn neg(&self, a: &BigFloat) -> BigFloat {
        a.neg()
    }
    fn inv(&self, a: &BigFloat) -> Option<BigFloat> {
        a.recip().ok()
    }
    fn is_zero(&self, a: &BigFloat) -> bool {
        a.is_negligible()
    }
    fn tag(&self) -> String {
        format!("float{}", self.digits)
    }
    fn format(&self, a: &BigFloat) -> String {
        a.to_tagged()
    }
    fn parse(&self, s: &str) -> Result<BigFloat, FfError> {
        BigFloat::parse_tagged(s).map(|b| b.with_prec(self.digits))
    }
    fn canonical_scale(&self, coeffs: &[&BigFloat]) -> BigFloat {
        coeffs
            .iter()
            .find(|c| !c.is_negligible())
            .and_then(|c| c.recip().ok())
            .unwrap_or_else(|| self.one())
    }
}

/// Complex number over [`BigFloat`].
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: BigFloat,
    pub im: BigFloat,
}

impl Complex {
    pub fn new(re: BigFloat, im: BigFloat) -> Self {
        Complex { re, im }
    }

    pub fn real(re: BigFloat) -> Self {
        let im = BigFloat::zero(re.prec());
        Complex { re, im }
    }

    pub fn zero(prec: usize) -> Self {
        Complex::real(BigFloat::zero(prec))
    }

    pub fn one(prec: usize) -> Self {
        Complex::real(BigFloat::from_i64(1, prec))
    }

    pub fn i(prec: usize) -> Self {
        Complex::new(BigFloat::zero(prec), BigFloat::from_i64(1, prec))
    }

    pub fn from_rational(x: &BigRational, prec: usize) -> Self {
        Complex::real(BigFloat::from_rational(x, prec))
    }

    pub fn add(&self, o: &Self) -> Self {
        Complex::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Complex::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn neg(&self) -> Self {
        Complex::new(self.re.neg(), self.im.neg())
    }

    pub fn conj(&self) -> Self {
        Complex::new(self.re.clone(), self.im.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Complex::new(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }

    pub fn scale(&self, s: &BigFloat) -> Self {
        Complex::new(self.re.mul(s), self.im.mul(s))
    }

    pub fn norm_sqr(&self) -> BigFloat {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn abs(&self) -> BigFloat {
        self.norm_sqr().sqrt().unwrap_or_else(|_| BigFloat::zero(self.re.prec()))
    }

    pub fn div(&self, o: &Self) -> Result<Self, ContError> {
        let d = o.norm_sqr();
        let n = self.mul(&o.conj());
        Ok(Complex::new(n.re.div(&d)?, n.im.div(&d)?))
    }

    pub fn is_negligible(&self) -> bool {
        self.re.is_negligible() && self.im.is_negligible()
    }

    /// `log10 |z|` from the larger component (within `log10 √2`).
    pub fn log10_abs(&self) -> f64 {
        self.re.log10_abs().max(self.im.log10_abs())
    }

    /// Worst of the two components' error bounds.
    pub fn err_log10(&self) -> f64 {
        self.re.err_log10().max(self.im.err_log10())
    }

    /// Correct digits relative to `|z|`.
    pub fn digits(&self) -> f64 {
        let m = self.log10_abs();
        if m == f64::NEG_INFINITY {
            return 0.0;
        }
        (m - self.err_log10()).clamp(0.0, self.re.prec() as f64)
    }

    pub fn exp(&self) -> Self {
        let m = self.re.exp();
        let (s, c) = self.im.sin_cos();
        Complex::new(m.mul(&c), m.mul(&s))
    }

    /// Natural log of a nonzero real number on the branch
    /// `ln|x| + iπ·branch` (`branch` counts half-turns).
    pub fn ln_real(x: &BigFloat, half_turns: i64) -> Result<Self, ContError> {
        let re = x.abs().ln()?;
        let im = BigFloat::pi(x.prec()).mul_i64(half_turns);
        Ok(Complex::new(re, im))
    }

    pub fn powi(&self, n: u64) -> Self {
        let mut acc = Complex::one(self.re.prec());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    pub fn to_tagged(&self) -> String {
        format!("{} {}i", self.re.to_tagged(), self.im.to_tagged())
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_tagged())
    }
}

/// Gaussian elimination with partial pivoting on complex matrices.
/// Returns `None` when a pivot is indistinguishable from zero.
pub fn complex_solve(a: &[Vec<Complex>], b: &[Vec<Complex>]) -> Option<Vec<Vec<Complex>>> {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<Complex>> = a.to_vec();
    let mut b: Vec<Vec<Complex>> = b.to_vec();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| {
            a[i][col].log10_abs().partial_cmp(&a[j][col].log10_abs()).unwrap_or(Ordering::Equal)
        })?;
        if a[piv][col].is_negligible() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r][col].div(&a[col][col]).ok()?;
            if f.is_negligible() && f.re.is_exact_zero() && f.im.is_exact_zero() {
                continue;
            }
            for k in col..n {
                let t = f.mul(&a[col][k]);
                a[r][k] = a[r][k].sub(&t);
            }
            for k in 0..m {
                let t = f.mul(&b[col][k]);
                b[r][k] = b[r][k].sub(&t);
            }
        }
    }
    let mut x = vec![Vec::with_capacity(m); n];
    for i in 0..n {
        for k in 0..m {
            x[i].push(b[i][k].div(&a[i][i]).ok()?);
        }
    }
    Some(x)
}

/// Euclidean norm of a rational's float value, for diagnostics.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_digits_and_tag() {
        let p = BigFloat::pi(60);
        assert_eq!(p.to_sci(30), "3.14159265358979323846264338328");
        assert!(p.digits() >= 59.0);
        let back = BigFloat::parse_tagged(&p.to_tagged()).unwrap();
        assert!(back.agrees_with(&p, -58.0));
    }

    #[test]
    fn cancellation_shows_in_tag() {
        let a = BigFloat::from_rational(&BigRational::new(1.into(), 3.into()), 40);
        let b = a.add(&BigFloat::from_f64(1e-30, 40));
        let d = b.sub(&a);
        assert!(d.digits() < 15.0, "{}", d.digits());
        assert!(a.cmp_checked(&a.clone()).is_err());
    }

    #[test]
    fn transcendental_identities() {
        let x = BigFloat::from_rational(&BigRational::new(7.into(), 5.into()), 50);
        let (s, c) = x.sin_cos();
        let one = s.mul(&s).add(&c.mul(&c));
        assert!(one.agrees_with(&BigFloat::from_i64(1, 50), -45.0));
        let e = x.ln().unwrap().exp();
        assert!(e.agrees_with(&x, -45.0));
        let r = x.sqrt().unwrap();
        assert!(r.mul(&r).agrees_with(&x, -45.0));
        let z = Complex::new(BigFloat::zero(50), BigFloat::pi(50)).exp();
        assert!(z.re.agrees_with(&BigFloat::from_i64(-1, 50), -45.0));
    }

    #[test]
    fn solve_small_system() {
        let p = 40;
        let c = |a: i64, b: i64| Complex::new(BigFloat::from_i64(a, p), BigFloat::from_i64(b, p));
        let a = vec![vec![c(2, 1), c(1, 0)], vec![c(0, 1), c(3, -1)]];
        let x = vec![vec![c(1, 2)], vec![c(-1, 1)]];
        let b: Vec<Vec<Complex>> = (0..2)
            .map(|i| vec![a[i][0].mul(&x[0][0]).add(&a[i][1].mul(&x[1][0]))])
            .collect();
        let s = complex_solve(&a, &b).unwrap();
        assert!(s[0][0].sub(&x[0][0]).is_negligible() || s[0][0].sub(&x[0][0]).log10_abs() < -35.0);
        assert!(s[1][0].sub(&x[1][0]).log10_abs() < -35.0);
    }
}
