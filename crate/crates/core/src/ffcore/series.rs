//! Truncated Laurent series with explicit offset and order bookkeeping.
//!
//! A series stores `c_{n0} .. c_{n0+count-1}` and is known modulo
//! `w^{n0+count}`. Binary operations truncate to the order both operands
//! support, so precision is never silently inflated.

use num_integer::Integer;
use std::fmt::Write as _;

use crate::error::FfError;
use crate::field::{Field, PrimeField, Rationals};

#[derive(Clone, Debug, PartialEq)]
pub struct Series<F: Field> {
    pub field: F,
    pub var: String,
    pub offset: i64,
    pub coeffs: Vec<F::E>,
}

pub type PrimeSeries = Series<PrimeField>;
pub type QSeries = Series<Rationals>;

/// Binary operation selector for [`series_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesOp {
    Add,
    Mul,
    Recip,
    Compose,
}

impl<F: Field> Series<F> {
    /// Leading zeros are moved into the offset; an all-zero series keeps a
    /// single stored zero at `order - 1`.
    pub fn new(field: F, var: &str, offset: i64, coeffs: Vec<F::E>) -> Self {
        assert!(!coeffs.is_empty(), "a series stores at least one coefficient");
        let lead = coeffs.iter().position(|c| !field.is_zero(c));
        let skip = lead.unwrap_or(coeffs.len() - 1);
        Series {
            offset: offset + skip as i64,
            coeffs: coeffs[skip..].to_vec(),
            field,
            var: var.to_string(),
        }
    }

    /// Series with `c_n` for `n = 0..len` from a closure.
    pub fn from_fn(field: F, var: &str, len: usize, mut g: impl FnMut(usize) -> F::E) -> Self {
        let c = (0..len).map(&mut g).collect();
        Series::new(field, var, 0, c)
    }

    /// Zero series known to `O(w^order)`.
    pub fn zero(field: F, var: &str, order: i64) -> Self {
        let z = field.zero();
        Series::new(field, var, order - 1, vec![z])
    }

    pub fn count(&self) -> usize {
        self.coeffs.len()
    }

    /// Exclusive truncation order: the series is known modulo `w^order`.
    pub fn order(&self) -> i64 {
        self.offset + self.coeffs.len() as i64
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| self.field.is_zero(c))
    }

    /// Coefficient of `w^n`; zero below the offset. Panics at or above the order.
    pub fn coeff(&self, n: i64) -> F::E {
        assert!(n < self.order(), "coefficient {n} beyond order {}", self.order());
        if n < self.offset {
            self.field.zero()
        } else {
            self.coeffs[(n - self.offset) as usize].clone()
        }
    }

    /// Dense coefficients `c_0 .. c_{order-1}` (requires offset >= 0).
    pub fn dense_from_zero(&self) -> Vec<F::E> {
        assert!(self.offset >= 0);
        (0..self.order()).map(|n| self.coeff(n)).collect()
    }

    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order());
        if order <= self.offset {
            return Series::zero(self.field.clone(), &self.var, order);
        }
        let keep = (order - self.offset) as usize;
        Series::new(self.field.clone(), &self.var, self.offset, self.coeffs[..keep].to_vec())
    }

    fn check(&self, o: &Self) -> Result<(), FfError> {
        if self.field != o.field || self.var != o.var {
            Err(FfError::FieldMismatch)
        } else {
            Ok(())
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self, FfError> {
        self.check(o)?;
        let f = &self.field;
        let order = self.order().min(o.order());
        let off = self.offset.min(o.offset);
        if off >= order {
            return Ok(Series::zero(f.clone(), &self.var, order));
        }
        let c = (off..order).map(|n| f.add(&self.coeff(n), &o.coeff(n))).collect();
        Ok(Series::new(f.clone(), &self.var, off, c))
    }

    pub fn neg(&self) -> Self {
        let c = self.coeffs.iter().map(|v| self.field.neg(v)).collect();
        Series::new(self.field.clone(), &self.var, self.offset, c)
    }

    pub fn sub(&self, o: &Self) -> Result<Self, FfError> {
        self.add(&o.neg())
    }

    pub fn scale(&self, s: &F::E) -> Self {
        let c = self.coeffs.iter().map(|v| self.field.mul(v, s)).collect();
        Series::new(self.field.clone(), &self.var, self.offset, c)
    }

    /// Multiplication by `w^k`.
    pub fn shift(&self, k: i64) -> Self {
        Series { offset: self.offset + k, ..self.clone() }
    }

    pub fn mul(&self, o: &Self) -> Result<Self, FfError> {
        self.check(o)?;
        let f = &self.field;
        let n = self.count().min(o.count());
        let mut c = vec![f.zero(); n];
        for (i, a) in self.coeffs.iter().take(n).enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(n - i).enumerate() {
                c[i + j] = f.add(&c[i + j], &f.mul(a, b));
            }
        }
        Ok(Series::new(f.clone(), &self.var, self.offset + o.offset, c))
    }

    /// Multiplicative inverse; the stored leading coefficient must be a unit.
    pub fn recip(&self) -> Result<Self, FfError> {
        let f = &self.field;
        let a0inv = f.inv(&self.coeffs[0]).ok_or(FfError::NonInvertibleLeadingTerm)?;
        let n = self.count();
        let mut r: Vec<F::E> = Vec::with_capacity(n);
        r.push(a0inv.clone());
        for k in 1..n {
            let mut s = f.zero();
            for j in 1..=k {
                s = f.add(&s, &f.mul(&self.coeffs[j], &r[k - j]));
            }
            r.push(f.neg(&f.mul(&s, &a0inv)));
        }
        Ok(Series::new(f.clone(), &self.var, -self.offset, r))
    }

    /// Integer power (negative powers through the reciprocal).
    pub fn powi(&self, e: i64) -> Result<Self, FfError> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let one = Series::new(self.field.clone(), &self.var, 0, vec![self.field.one(); 1])
            .pad_to(base.count());
        let mut acc = one;
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base)?;
        }
        Ok(acc)
    }

    /// Extends the relative precision of an exactly known finite series by
    /// appending zeros (used for polynomials viewed as series).
    pub fn pad_to(&self, count: usize) -> Self {
        let mut c = self.coeffs.clone();
        while c.len() < count {
            c.push(self.field.zero());
        }
        Series { coeffs: c, ..self.clone() }
    }

    /// `self(inner)`, where `inner` has offset >= 1. The result keeps only
    /// terms unaffected by the truncation of either input.
    pub fn compose(&self, inner: &Self) -> Result<Self, FfError> {
        self.check(inner)?;
        let kb = inner.offset;
        if kb < 1 || inner.is_zero() {
            return Err(FfError::BadCompose);
        }
        let f = &self.field;
        let ka = self.offset;
        let lowest = ka.max(1);
        let order = (self.order() * kb).min(inner.order() + (lowest - 1) * kb);
        if ka < 0 {
            let mut head = self.shift(-ka).compose(inner)?;
            let inv = inner.recip()?;
            for _ in 0..(-ka) {
                head = head.mul(&inv)?;
            }
            return Ok(head);
        }
        let mut acc = Series::zero(f.clone(), &self.var, order);
        // Horner over the stored coefficients, highest first
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_trunc(inner, order);
            acc = acc.add_const(c, order);
        }
        for _ in 0..ka {
            acc = acc.mul_trunc(inner, order);
        }
        Ok(acc.truncate(order))
    }

    fn mul_trunc(&self, o: &Self, order: i64) -> Self {
        let f = &self.field;
        let off = self.offset + o.offset;
        if off >= order {
            return Series::zero(f.clone(), &self.var, order);
        }
        let n = (order - off) as usize;
        let mut c = vec![f.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate().take(n - i) {
                c[i + j] = f.add(&c[i + j], &f.mul(a, b));
            }
        }
        Series::new(f.clone(), &self.var, off, c)
    }

    fn add_const(&self, v: &F::E, order: i64) -> Self {
        let f = &self.field;
        let off = self.offset.min(0);
        let c = (off..order)
            .map(|n| {
                let base = if n >= self.offset && n < self.order() { self.coeff(n) } else { f.zero() };
                if n == 0 {
                    f.add(&base, v)
                } else {
                    base
                }
            })
            .collect();
        Series::new(f.clone(), &self.var, off, c)
    }

    /// Formal derivative d/dw.
    pub fn derivative(&self) -> Self {
        let f = &self.field;
        let c: Vec<F::E> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, v)| f.mul(v, &f.from_i64(self.offset + k as i64)))
            .collect();
        let mut s = Series::new(f.clone(), &self.var, self.offset - 1, c);
        if s.order() > self.order() - 1 {
            s = s.truncate(self.order() - 1);
        }
        s
    }

    /// Bit-exact text form.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "series var={} prime={} offset={} count={}\n",
            self.var,
            self.field.tag(),
            self.offset,
            self.count()
        );
        for c in &self.coeffs {
            let _ = writeln!(out, "{}", self.field.format(c));
        }
        out
    }

    /// Parses the text form, checking that the `prime=` tag matches `field`.
    pub fn from_text(field: F, text: &str) -> Result<Self, FfError> {
        let header = parse_series_header(text)?;
        if header.prime != field.tag() {
            return Err(FfError::FieldMismatch);
        }
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        lines.next();
        let coeffs: Vec<F::E> = lines.map(|l| field.parse(l)).collect::<Result<_, _>>()?;
        if coeffs.len() != header.count || coeffs.is_empty() {
            return Err(FfError::Parse(format!(
                "header announces {} coefficients, found {}",
                header.count,
                coeffs.len()
            )));
        }
        Ok(Series::new(field, &header.var, header.offset, coeffs))
    }
}

/// Parsed `series` header line.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesHeader {
    pub var: String,
    pub prime: String,
    pub offset: i64,
    pub count: usize,
}

pub fn parse_series_header(text: &str) -> Result<SeriesHeader, FfError> {
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| FfError::Parse("empty series file".into()))?;
    let mut it = first.split_whitespace();
    if it.next() != Some("series") {
        return Err(FfError::Parse("missing `series` header".into()));
    }
    let mut h = SeriesHeader { var: String::new(), prime: String::new(), offset: 0, count: 0 };
    for kv in it {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| FfError::Parse(format!("bad header field `{kv}`")))?;
        let bad = |_| FfError::Parse(format!("bad header value `{kv}`"));
        match k {
            "var" => h.var = v.to_string(),
            "prime" => h.prime = v.to_string(),
            "offset" => h.offset = v.parse().map_err(bad)?,
            "count" => h.count = v.parse().map_err(bad)?,
            _ => return Err(FfError::Parse(format!("unknown header field `{k}`"))),
        }
    }
    if h.var.is_empty() || h.prime.is_empty() {
        return Err(FfError::Parse("header lacks var or prime".into()));
    }
    Ok(h)
}

/// A series read from text whose field is determined by its header.
#[derive(Clone, Debug, PartialEq)]
pub enum AnySeries {
    Prime(PrimeSeries),
    Exact(QSeries),
}

pub fn read_series(text: &str) -> Result<AnySeries, FfError> {
    let h = parse_series_header(text)?;
    if h.prime == "exact" {
        Ok(AnySeries::Exact(QSeries::from_text(Rationals, text)?))
    } else {
        let p: u64 = h.prime.parse().map_err(|_| FfError::Parse("bad prime".into()))?;
        Ok(AnySeries::Prime(PrimeSeries::from_text(PrimeField::new(p)?, text)?))
    }
}

/// Dispatches one of the four series operations.
pub fn series_arith<F: Field>(a: &Series<F>, b: &Series<F>, kind: SeriesOp) -> Result<Series<F>, FfError> {
    match kind {
        SeriesOp::Add => a.add(b),
        SeriesOp::Mul => a.mul(b),
        SeriesOp::Recip => a.recip(),
        SeriesOp::Compose => a.compose(b),
    }
}

impl QSeries {
    /// Reduction modulo p; `None` if a denominator vanishes.
    pub fn reduce(&self, f: PrimeField) -> Option<PrimeSeries> {
        let c: Option<Vec<u64>> = self.coeffs.iter().map(|v| f.from_rational(v)).collect();
        c.map(|c| Series::new(f, &self.var, self.offset, c))
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> num_bigint::BigInt {
        self.coeffs
            .iter()
            .fold(num_bigint::BigInt::from(1), |acc, c| acc.lcm(c.denom()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn ring_identity_mod_7() {
        let f = fp(7);
        let a = Series::new(f, "w", 0, vec![1, 1, 0, 0]);
        let b = Series::new(f, "w", 0, vec![1, 6, 0, 0]);
        let c = a.mul(&b).unwrap();
        assert_eq!(c.offset, 0);
        assert_eq!(c.coeffs, vec![1, 0, 6, 0]);
    }

    #[test]
    fn recip_of_one_minus_2w_is_geometric() {
        let f = fp(32749);
        let mut c = vec![0u64; 100];
        c[0] = 1;
        c[1] = f.from_i64(-2);
        let r = Series::new(f, "w", 0, c).recip().unwrap();
        let mut pow = 1u64;
        for n in 0..100 {
            assert_eq!(r.coeff(n), pow);
            pow = f.mulm(pow, 2);
        }
    }

    #[test]
    fn compose_geometric_with_square() {
        let q = Rationals;
        let geo = Series::from_fn(q, "y", 20, |_| q.one());
        let sq = Series::new(q, "y", 2, vec![q.one(); 1]).pad_to(19);
        let c = geo.compose(&sq).unwrap();
        assert_eq!(c.order(), 21);
        for n in 0..c.order() {
            let expect = if n % 2 == 0 { q.one() } else { q.zero() };
            assert_eq!(c.coeff(n), expect, "n={n}");
        }
    }

    #[test]
    fn offsets_are_exact() {
        let q = Rationals;
        let a = Series::new(q, "w", 0, vec![q.zero(), q.zero(), q.from_i64(2), q.from_i64(1)]);
        assert_eq!(a.offset, 2);
        assert_eq!(a.order(), 4);
        let r = a.recip().unwrap();
        assert_eq!(r.offset, -2);
        assert_eq!(r.count(), 2);
        assert_eq!(r.coeff(-2), BigRational::new(1.into(), 2.into()));
        assert_eq!(r.coeff(-1), BigRational::new((-1).into(), 4.into()));
    }

    #[test]
    fn text_roundtrip() {
        let q = Rationals;
        let s = Series::new(q, "w", -1, vec![q.from_i64(3), BigRational::new(1.into(), 7.into())]);
        let t = s.to_text();
        assert_eq!(t, "series var=w prime=exact offset=-1 count=2\n3\n1/7\n");
        assert_eq!(QSeries::from_text(q, &t).unwrap(), s);
        let f = fp(101);
        let m = Series::new(f, "x", 0, vec![5, 0, 100]);
        let mt = m.to_text();
        assert_eq!(mt, "series var=x prime=101 offset=0 count=3\n5\n0\n100\n");
        assert_eq!(read_series(&mt).unwrap(), AnySeries::Prime(m));
    }

    #[test]
    fn mismatched_fields_rejected() {
        let a = Series::new(fp(7), "w", 0, vec![1, 2]);
        let b = Series::new(fp(11), "w", 0, vec![1, 2]);
        assert_eq!(a.add(&b), Err(FfError::FieldMismatch));
        let c = Series::new(fp(7), "x", 0, vec![1, 2]);
        assert_eq!(a.mul(&c), Err(FfError::FieldMismatch));
    }
}
