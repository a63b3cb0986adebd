//! Dense univariate polynomials over a [`Field`], with root finding over F_p
//! (Cantor-Zassenhaus) and rational roots over Q (mod-p roots lifted by Hensel
//! iteration, then rational reconstruction).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::FfError;
use crate::field::{default_primes, parse_rational, Field, PrimeField, Rationals};

/// Coefficients are little-endian with no trailing zeros; the zero polynomial
/// has an empty coefficient list.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<F: Field> {
    pub field: F,
    pub c: Vec<F::E>,
}

impl<F: Field> Poly<F> {
    pub fn new(field: F, c: Vec<F::E>) -> Self {
        let mut p = Poly { field, c };
        p.trim();
        p
    }

    pub fn zero(field: F) -> Self {
        Poly { field, c: vec![] }
    }

    pub fn constant(field: F, v: F::E) -> Self {
        Poly::new(field, vec![v])
    }

    pub fn one(field: F) -> Self {
        let one = field.one();
        Poly::new(field, vec![one])
    }

    /// c·x^k
    pub fn monomial(field: F, k: usize, v: F::E) -> Self {
        let mut c = vec![field.zero(); k + 1];
        c[k] = v;
        Poly::new(field, c)
    }

    pub fn from_i64(field: F, c: &[i64]) -> Self {
        let c = c.iter().map(|&v| field.from_i64(v)).collect();
        Poly::new(field, c)
    }

    fn trim(&mut self) {
        while let Some(l) = self.c.last() {
            if self.field.is_zero(l) {
                self.c.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&F::E> {
        self.c.last()
    }

    pub fn coeff(&self, k: usize) -> F::E {
        self.c.get(k).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// Index of the lowest nonzero coefficient (the x-adic valuation).
    pub fn valuation(&self) -> Option<usize> {
        self.c.iter().position(|v| !self.field.is_zero(v))
    }

    pub fn add(&self, o: &Self) -> Self {
        let f = &self.field;
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|k| f.add(&self.coeff(k), &o.coeff(k))).collect();
        Poly::new(f.clone(), c)
    }

    pub fn sub(&self, o: &Self) -> Self {
        let f = &self.field;
        let n = self.c.len().max(o.c.len());
        let c = (0..n).map(|k| f.sub(&self.coeff(k), &o.coeff(k))).collect();
        Poly::new(f.clone(), c)
    }

    pub fn neg(&self) -> Self {
        let c = self.c.iter().map(|v| self.field.neg(v)).collect();
        Poly::new(self.field.clone(), c)
    }

    pub fn scale(&self, s: &F::E) -> Self {
        let c = self.c.iter().map(|v| self.field.mul(v, s)).collect();
        Poly::new(self.field.clone(), c)
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(self.field.clone());
        }
        let f = &self.field;
        let mut c = vec![f.zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = f.add(&c[i + j], &f.mul(a, b));
            }
        }
        Poly::new(f.clone(), c)
    }

    /// Multiplication by x^k.
    pub fn shift_up(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![self.field.zero(); k];
        c.extend(self.c.iter().cloned());
        Poly::new(self.field.clone(), c)
    }

    /// Exact division by x^k; the caller guarantees divisibility.
    pub fn shift_down(&self, k: usize) -> Self {
        Poly::new(self.field.clone(), self.c.iter().skip(k).cloned().collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Poly::one(self.field.clone());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let f = &self.field;
        let dl = f.inv(d.lead().expect("division by zero polynomial")).expect("leading coefficient invertible");
        let dd = d.c.len() - 1;
        let mut r = self.c.clone();
        if r.len() < d.c.len() {
            return (Poly::zero(f.clone()), self.clone());
        }
        let mut q = vec![f.zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let t = f.mul(&r[k + dd], &dl);
            if f.is_zero(&t) {
                continue;
            }
            for (j, dc) in d.c.iter().enumerate() {
                r[k + j] = f.sub(&r[k + j], &f.mul(&t, dc));
            }
            q[k] = t;
        }
        r.truncate(dd);
        (Poly::new(f.clone(), q), Poly::new(f.clone(), r))
    }

    pub fn rem(&self, d: &Self) -> Self {
        self.divrem(d).1
    }

    /// Exact quotient when `d` divides `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.divrem(d);
        if r.is_zero() {
            Some(q)
        } else {
            None
        }
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            None => self.clone(),
            Some(l) => self.scale(&self.field.inv(l).unwrap()),
        }
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        let f = &self.field;
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| f.mul(v, &f.from_u64(k as u64)))
            .collect();
        Poly::new(f.clone(), c)
    }

    pub fn eval(&self, x: &F::E) -> F::E {
        let f = &self.field;
        let mut acc = f.zero();
        for v in self.c.iter().rev() {
            acc = f.add(&f.mul(&acc, x), v);
        }
        acc
    }

    /// p(x + a) by repeated synthetic division (Taylor shift).
    pub fn taylor_shift(&self, a: &F::E) -> Self {
        let f = &self.field;
        let mut c = self.c.clone();
        let n = c.len();
        for i in 0..n {
            for k in (i..n.saturating_sub(1)).rev() {
                let t = f.mul(&c[k + 1], a);
                c[k] = f.add(&c[k], &t);
            }
        }
        Poly::new(f.clone(), c)
    }

    /// p(g(x)) by Horner.
    pub fn compose(&self, g: &Self) -> Self {
        let mut acc = Poly::zero(self.field.clone());
        for v in self.c.iter().rev() {
            acc = acc.mul(g).add(&Poly::constant(self.field.clone(), v.clone()));
        }
        acc
    }

    /// Largest k with d^k dividing self (self must be nonzero, d nonconstant).
    pub fn multiplicity_of(&self, d: &Self) -> usize {
        let mut k = 0;
        let mut cur = self.clone();
        if cur.is_zero() || d.deg().unwrap_or(0) == 0 {
            return 0;
        }
        while let Some(q) = cur.div_exact(d) {
            k += 1;
            cur = q;
        }
        k
    }

    pub fn map_field<G: Field>(&self, g: G, m: impl Fn(&F::E) -> G::E) -> Poly<G> {
        let c = self.c.iter().map(m).collect();
        Poly::new(g, c)
    }

    pub fn to_string_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, v) in self.c.iter().enumerate() {
            if self.field.is_zero(v) {
                continue;
            }
            let s = self.field.format(v);
            parts.push(match k {
                0 => format!("({s})"),
                1 => format!("({s})*{var}"),
                _ => format!("({s})*{var}^{k}"),
            });
        }
        parts.join(" + ")
    }
}

impl Poly<PrimeField> {
    /// x^e mod self.
    fn x_pow_mod(&self, e: u64) -> Self {
        let f = self.field;
        let x = Poly::monomial(f, 1, 1);
        let mut base = x.rem(self);
        let mut acc = Poly::one(f).rem(self);
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(self);
            }
            base = base.mul(&base).rem(self);
            e >>= 1;
        }
        acc
    }

    fn pow_mod(&self, b: &Self, mut e: u64) -> Self {
        let mut base = b.rem(self);
        let mut acc = Poly::one(self.field).rem(self);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).rem(self);
            }
            base = base.mul(&base).rem(self);
            e >>= 1;
        }
        acc
    }

    /// Distinct roots in F_p with their multiplicities, ascending by value.
    pub fn roots(&self) -> Vec<(u64, usize)> {
        if self.deg().unwrap_or(0) == 0 {
            return vec![];
        }
        let f = self.field;
        let p = f.p();
        let x = Poly::monomial(f, 1, 1);
        let m = self.monic();
        let xp = m.x_pow_mod(p);
        let g = m.gcd(&xp.sub(&x));
        let mut found = Vec::new();
        split_linear(&g, &mut found, 0);
        found.sort_unstable();
        found
            .into_iter()
            .map(|r| {
                let lin = Poly::new(f, vec![f.neg(&r), 1]);
                (r, self.multiplicity_of(&lin))
            })
            .collect()
    }
}

fn split_linear(g: &Poly<PrimeField>, out: &mut Vec<u64>, mut a: u64) {
    let f = g.field;
    match g.deg() {
        None | Some(0) => {}
        Some(1) => {
            let m = g.monic();
            out.push(f.neg(&m.c[0]));
        }
        Some(_) => {
            if f.p() == 2 {
                for r in 0..2 {
                    if g.eval(&r) == 0 {
                        out.push(r);
                    }
                }
                return;
            }
            loop {
                let shifted = Poly::new(f, vec![a % f.p(), 1]);
                let h = g.pow_mod(&shifted, (f.p() - 1) / 2).sub(&Poly::one(f));
                let d = g.gcd(&h);
                a += 1;
                if let Some(dd) = d.deg() {
                    if dd > 0 && dd < g.deg().unwrap() {
                        let other = g.div_exact(&d).unwrap();
                        split_linear(&d, out, a);
                        split_linear(&other, out, a);
                        return;
                    }
                }
            }
        }
    }
}

impl Poly<Rationals> {
    pub fn from_ints(c: &[i64]) -> Self {
        Poly::from_i64(Rationals, c)
    }

    /// Parses a sum of terms `c`, `c*v`, `v^k`, `c*v^k` such as
    /// `1 + 3*w - 1/2*w^2`, with rational `c`.
    pub fn parse(text: &str, var: &str) -> Result<Self, FfError> {
        let bad = || FfError::Parse(format!("bad polynomial `{text}`"));
        let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(bad());
        }
        let mut terms = Vec::new();
        let mut start = 0;
        for (i, ch) in compact.char_indices() {
            // a sign starts a new term unless it follows an exponent marker
            if i > start && (ch == '+' || ch == '-') && !compact[..i].ends_with(['e', 'E', '^']) {
                terms.push(&compact[start..i]);
                start = i;
            }
        }
        terms.push(&compact[start..]);
        let mut c: Vec<BigRational> = Vec::new();
        for t in terms {
            let (neg, body) = match t.strip_prefix('-') {
                Some(b) => (true, b),
                None => (false, t.strip_prefix('+').unwrap_or(t)),
            };
            let (coef, k) = match body.find(var) {
                None => (parse_rational(body)?, 0usize),
                Some(pos) => {
                    let head = body[..pos].trim_end_matches('*');
                    let coef = if head.is_empty() { BigRational::one() } else { parse_rational(head)? };
                    let tail = &body[pos + var.len()..];
                    let k = match tail.strip_prefix('^') {
                        Some(e) => e.parse().map_err(|_| bad())?,
                        None if tail.is_empty() => 1,
                        None => return Err(bad()),
                    };
                    (coef, k)
                }
            };
            if c.len() <= k {
                c.resize(k + 1, BigRational::zero());
            }
            c[k] += if neg { -coef } else { coef };
        }
        Ok(Poly::new(Rationals, c))
    }

    /// Primitive integer coefficients with positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        let refs: Vec<&BigRational> = self.c.iter().collect();
        let mut s = Rationals.canonical_scale(&refs);
        if let Some(l) = self.lead() {
            if (l * &s).is_negative() {
                s = -s;
            }
        }
        self.c.iter().map(|v| (v * &s).to_integer()).collect()
    }

    /// Rational roots with multiplicities.
    pub fn rational_roots(&self) -> Vec<(BigRational, usize)> {
        if self.deg().unwrap_or(0) == 0 {
            return vec![];
        }
        let mut out = Vec::new();
        let mut work = self.clone();
        let v = work.valuation().unwrap();
        if v > 0 {
            out.push((BigRational::zero(), v));
            work = work.shift_down(v);
        }
        if work.deg().unwrap_or(0) == 0 {
            return out;
        }
        let sqf = work.div_exact(&work.gcd(&work.derivative())).unwrap();
        let ints = sqf.primitive_integer();
        for r in integer_poly_rational_roots(&ints) {
            let lin = Poly::new(Rationals, vec![-r.clone(), BigRational::one()]);
            let m = work.multiplicity_of(&lin);
            if m > 0 {
                out.push((r, m));
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

fn eval_int(c: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for v in c.iter().rev() {
        acc = (acc * x + v).mod_floor(m);
    }
    acc
}

/// Rational roots of a squarefree primitive integer polynomial with nonzero
/// constant term.
fn integer_poly_rational_roots(c: &[BigInt]) -> Vec<BigRational> {
    let lead = c.last().unwrap().abs();
    let cst = c[0].abs();
    let big = if lead > cst { lead.clone() } else { cst.clone() };
    let bound = BigInt::from(2) * &big * &big + 1u32;
    let dc: Vec<BigInt> = c.iter().enumerate().skip(1).map(|(k, v)| v * BigInt::from(k)).collect();
    for p in default_primes(400) {
        let pb = BigInt::from(p);
        if (&lead % &pb).is_zero() {
            continue;
        }
        let f = PrimeField::new(p).unwrap();
        let pp = Poly::new(f, c.iter().map(|v| f.reduce_bigint(v)).collect());
        if pp.gcd(&pp.derivative()).deg() != Some(0) {
            continue;
        }
        let mut out = Vec::new();
        for (r0, _) in pp.roots() {
            let mut r = BigInt::from(r0);
            let mut m = pb.clone();
            while m <= bound {
                m = &m * &m;
                let fv = eval_int(c, &r, &m);
                let dv = eval_int(&dc, &r, &m);
                let inv = dv.extended_gcd(&m);
                let inv = inv.x.mod_floor(&m);
                r = (r - fv * inv).mod_floor(&m);
            }
            if let Some(q) = crate::reconstruct::ratrec(&r, &m) {
                let qv = Poly::new(Rationals, c.iter().map(|v| BigRational::from_integer(v.clone())).collect()).eval(&q);
                if qv.is_zero() {
                    out.push(q);
                }
            }
        }
        return out;
    }
    vec![]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_text() {
        assert_eq!(Poly::parse("1+3*w+4*w^2", "w").unwrap(), Poly::from_ints(&[1, 3, 4]));
        let p = Poly::parse(" -w^3 + 1/2*w - 2 ", "w").unwrap();
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(p, Poly::from_ints(&[-2, 0, 0, -1]).add(&Poly::monomial(Rationals, 1, half)));
        assert_eq!(Poly::parse("x", "x").unwrap(), Poly::from_ints(&[0, 1]));
        assert!(Poly::parse("1 + w^", "w").is_err());
        assert!(Poly::parse("", "w").is_err());
    }

    #[test]
    fn quadratic_splits_mod_32719() {
        let f = PrimeField::new(32719).unwrap();
        let h = Poly::from_i64(f, &[1, 3, 4]);
        let roots: Vec<u64> = h.roots().into_iter().map(|r| r.0).collect();
        assert_eq!(roots, vec![8973, 31925]);
        let lin1 = Poly::from_i64(f, &[-8973, 1]);
        let lin2 = Poly::from_i64(f, &[-31925, 1]);
        assert_eq!(lin1.mul(&lin2).scale(&4), h);
    }

    #[test]
    fn cubic_factorization_mod_32749() {
        let f = PrimeField::new(32749).unwrap();
        let h = Poly::from_i64(f, &[1, -7, 5, -4]);
        let rhs = Poly::from_i64(f, &[10836, 11821, 1])
            .mul(&Poly::from_i64(f, &[-3635, 1]))
            .scale(&32745);
        assert_eq!(h, rhs);
        assert_eq!(h.roots(), vec![(3635, 1)]);
    }

    #[test]
    fn roots_with_multiplicity() {
        let f = PrimeField::new(101).unwrap();
        let a = Poly::from_i64(f, &[-3, 1]);
        let b = Poly::from_i64(f, &[5, 1]);
        let p = a.pow(3).mul(&b).mul(&Poly::from_i64(f, &[1, 0, 1]));
        let r = p.roots();
        assert!(r.contains(&(3, 3)));
        assert!(r.contains(&(96, 1)));
        // x^2+1 splits mod 101 since 101 = 1 mod 4
        assert_eq!(r.len(), 4);
    }

    #[test]
    fn rational_roots_found_exactly() {
        // (4x+7)^2 (x-3/5) x
        let a = Poly::from_ints(&[7, 4]);
        let b = Poly::new(Rationals, vec![BigRational::new((-3).into(), 5.into()), BigRational::one()]);
        let p = a.mul(&a).mul(&b).mul(&Poly::from_ints(&[0, 1])).mul(&Poly::from_ints(&[1, 0, 1]));
        let r = p.rational_roots();
        assert_eq!(r.len(), 3);
        assert_eq!(r[0], (BigRational::new((-7).into(), 4.into()), 2));
        assert_eq!(r[1], (BigRational::zero(), 1));
        assert_eq!(r[2], (BigRational::new(3.into(), 5.into()), 1));
    }

    #[test]
    fn taylor_shift_matches_compose() {
        let p = Poly::from_ints(&[3, -1, 0, 2, 5]);
        let a = BigRational::new(2.into(), 3.into());
        let g = Poly::new(Rationals, vec![a.clone(), BigRational::one()]);
        assert_eq!(p.taylor_shift(&a), p.compose(&g));
    }
}
