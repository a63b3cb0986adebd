//! Linear differential operators `Σ a_{i,j} w^j θ^i` with `θ = w·d/dw`,
//! over F_p or Q.
//!
//! Applying the operator to `Σ c_n w^n` gives the recurrence
//! `Σ_i Σ_j a_{i,j} (n−j)^i c_{n−j}`, and composition follows
//! `θ·w^j = w^j·(θ + j)`.

use std::fmt::Write as _;

use num_rational::BigRational;

use crate::error::{FfError, OpError};
use crate::ffcore::{Poly, Series};
use crate::field::{Field, PrimeField, Rationals};

/// `rows[i]` is the polynomial in `w` multiplying `θ^i`. Trailing zero rows
/// are trimmed, so the last row is the head polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaOp<F: Field> {
    pub field: F,
    rows: Vec<Poly<F>>,
}

pub type ThetaOperatorP = ThetaOp<PrimeField>;
pub type ThetaOperatorX = ThetaOp<Rationals>;

impl<F: Field> ThetaOp<F> {
    pub fn new(field: F, mut rows: Vec<Poly<F>>) -> Self {
        while rows.last().is_some_and(|r| r.is_zero()) {
            rows.pop();
        }
        ThetaOp { field, rows }
    }

    /// Rows of integer coefficients, `rows[i][j]` multiplying `w^j θ^i`.
    pub fn from_ints(field: F, rows: &[&[i64]]) -> Self {
        let r = rows.iter().map(|c| Poly::from_i64(field.clone(), c)).collect();
        ThetaOp::new(field, r)
    }

    /// From `(M+1)(D+1)` coefficients in row-major (i, then j) order.
    pub fn from_flat(field: F, order: usize, degree: usize, flat: &[F::E]) -> Self {
        assert_eq!(flat.len(), (order + 1) * (degree + 1));
        let rows = flat
            .chunks(degree + 1)
            .map(|c| Poly::new(field.clone(), c.to_vec()))
            .collect();
        ThetaOp::new(field, rows)
    }

    pub fn zero(field: F) -> Self {
        ThetaOp { field, rows: vec![] }
    }

    /// `θ - c`
    pub fn theta_minus(field: F, c: F::E) -> Self {
        let rows = vec![Poly::constant(field.clone(), field.neg(&c)), Poly::one(field.clone())];
        ThetaOp::new(field, rows)
    }

    /// The operator `p(θ)` for a polynomial `p` with constant coefficients.
    pub fn from_theta_poly(p: &Poly<F>) -> Self {
        let rows = p.c.iter().map(|v| Poly::constant(p.field.clone(), v.clone())).collect();
        ThetaOp::new(p.field.clone(), rows)
    }

    /// Multiplication by a polynomial in `w` (order 0 operator).
    pub fn from_w_poly(p: &Poly<F>) -> Self {
        ThetaOp::new(p.field.clone(), vec![p.clone()])
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn order(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    pub fn degree(&self) -> usize {
        self.rows.iter().filter_map(|r| r.deg()).max().unwrap_or(0)
    }

    pub fn rows(&self) -> &[Poly<F>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Poly<F> {
        self.rows.get(i).cloned().unwrap_or_else(|| Poly::zero(self.field.clone()))
    }

    pub fn coeff(&self, i: usize, j: usize) -> F::E {
        self.rows.get(i).map_or_else(|| self.field.zero(), |r| r.coeff(j))
    }

    /// Coefficients in row-major (i, then j) order with the given shape.
    pub fn flat(&self, order: usize, degree: usize) -> Vec<F::E> {
        let mut v = Vec::with_capacity((order + 1) * (degree + 1));
        for i in 0..=order {
            for j in 0..=degree {
                v.push(self.coeff(i, j));
            }
        }
        v
    }

    /// The head polynomial (coefficient of the highest θ power).
    pub fn head(&self) -> Poly<F> {
        self.rows.last().cloned().unwrap_or_else(|| Poly::zero(self.field.clone()))
    }

    /// `P_j(ρ) = Σ_i a_{i,j} ρ^i`, the θ-polynomial attached to `w^j`.
    pub fn theta_poly(&self, j: usize) -> Poly<F> {
        let c = (0..self.rows.len()).map(|i| self.coeff(i, j)).collect();
        Poly::new(self.field.clone(), c)
    }

    /// Lowest power of `w` present.
    pub fn w_valuation(&self) -> usize {
        self.rows.iter().filter_map(|r| r.valuation()).min().unwrap_or(0)
    }

    /// Indicial polynomial at `w = 0`: `P_{j0}` for the lowest `j0` present.
    pub fn indicial_at_zero(&self) -> Poly<F> {
        self.theta_poly(self.w_valuation())
    }

    /// Divides out the common power of `w` (solutions are unchanged).
    pub fn strip_w(&self) -> Self {
        let v = self.w_valuation();
        let rows = self.rows.iter().map(|r| r.shift_down(v)).collect();
        ThetaOp::new(self.field.clone(), rows)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.rows.len().max(o.rows.len());
        let rows = (0..n).map(|i| self.row(i).add(&o.row(i))).collect();
        ThetaOp::new(self.field.clone(), rows)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&self.field.neg(&self.field.one())))
    }

    pub fn scale(&self, s: &F::E) -> Self {
        let rows = self.rows.iter().map(|r| r.scale(s)).collect();
        ThetaOp::new(self.field.clone(), rows)
    }

    /// Left multiplication by a polynomial in `w`.
    pub fn mul_w_poly(&self, p: &Poly<F>) -> Self {
        let rows = self.rows.iter().map(|r| p.mul(r)).collect();
        ThetaOp::new(self.field.clone(), rows)
    }

    /// Composition `self ∘ o`.
    pub fn mul(&self, o: &Self) -> Self {
        let f = &self.field;
        if self.is_zero() || o.is_zero() {
            return ThetaOp::zero(f.clone());
        }
        let m = self.order() + o.order();
        let mut rows = vec![Poly::zero(f.clone()); m + 1];
        let binom = binomial_table(f, self.order());
        // w^a θ^i · w^b θ^k = w^{a+b} (θ+b)^i θ^k
        for (i, ra) in self.rows.iter().enumerate() {
            for (k, rb) in o.rows.iter().enumerate() {
                for (b, cb) in rb.c.iter().enumerate() {
                    if f.is_zero(cb) {
                        continue;
                    }
                    let bf = f.from_u64(b as u64);
                    let wb = ra.shift_up(b).scale(cb);
                    if wb.is_zero() {
                        continue;
                    }
                    let mut bpow = f.one();
                    // (θ+b)^i = Σ_t C(i,t) b^{i-t} θ^t, visited from t = i down
                    for t in (0..=i).rev() {
                        let s = f.mul(&binom[i][t], &bpow);
                        if !f.is_zero(&s) {
                            rows[t + k] = rows[t + k].add(&wb.scale(&s));
                        }
                        bpow = f.mul(&bpow, &bf);
                    }
                }
            }
        }
        ThetaOp::new(f.clone(), rows)
    }

    /// `θ → θ + s`, i.e. the operator `x^{-s} ∘ L ∘ x^s`.
    pub fn theta_shift(&self, s: &F::E) -> Self {
        let f = &self.field;
        let binom = binomial_table(f, self.order());
        let mut rows = vec![Poly::zero(f.clone()); self.rows.len()];
        for (i, r) in self.rows.iter().enumerate() {
            let mut spow = f.one();
            for t in (0..=i).rev() {
                let c = f.mul(&binom[i][t], &spow);
                rows[t] = rows[t].add(&r.scale(&c));
                spow = f.mul(&spow, s);
            }
        }
        ThetaOp::new(f.clone(), rows)
    }

    /// Formal adjoint with `w* = w` and `(d/dw)* = -d/dw`, hence
    /// `θ* = -θ - 1` and `(w^j θ^i)* = w^j (-θ - 1 - j)^i`.
    pub fn adjoint(&self) -> Self {
        let f = &self.field;
        let mut out = ThetaOp::zero(f.clone());
        for (i, r) in self.rows.iter().enumerate() {
            for (j, c) in r.c.iter().enumerate() {
                if f.is_zero(c) {
                    continue;
                }
                let lin = Poly::new(f.clone(), vec![f.from_i64(-1 - j as i64), f.from_i64(-1)]);
                let tp = lin.pow(i as u32).scale(c);
                let term = ThetaOp::from_theta_poly(&tp).mul_w_poly(&Poly::monomial(f.clone(), j, f.one()));
                out = out.add(&term);
            }
        }
        out
    }

    /// Canonical scaling: first nonzero coefficient in (i, j) order is 1 over
    /// F_p; primitive integers with positive first entry over Q.
    pub fn normalize(&self) -> Self {
        let flat: Vec<&F::E> = self.rows.iter().flat_map(|r| r.c.iter()).collect();
        let s = self.field.canonical_scale(&flat);
        self.scale(&s)
    }

    /// `Σ_k b_k(w) (d/dw)^k` form via `θ^i = Σ_k S(i,k) w^k D^k`.
    pub fn to_d_form(&self) -> Vec<Poly<F>> {
        let f = &self.field;
        let st = stirling2(f, self.order());
        let mut out = vec![Poly::zero(f.clone()); self.rows.len()];
        for (i, r) in self.rows.iter().enumerate() {
            for (k, s) in st[i].iter().enumerate() {
                if !f.is_zero(s) {
                    out[k] = out[k].add(&r.shift_up(k).scale(s));
                }
            }
        }
        out
    }

    /// Inverse of [`to_d_form`](Self::to_d_form): returns `w^s · L` in θ-form
    /// with the smallest `s >= 0` making all coefficients polynomial, and `s`.
    pub fn from_d_form(field: F, d: &[Poly<F>]) -> (Self, usize) {
        let s = d
            .iter()
            .enumerate()
            .filter_map(|(k, b)| b.valuation().map(|v| k.saturating_sub(v)))
            .max()
            .unwrap_or(0);
        let mut rows = vec![Poly::zero(field.clone()); d.len()];
        for (k, b) in d.iter().enumerate() {
            if b.is_zero() {
                continue;
            }
            // D^k = w^{-k} θ(θ-1)...(θ-k+1)
            let coef = if s >= k { b.shift_up(s - k) } else { b.shift_down(k - s) };
            let ff = falling_factorial(&field, k);
            for (i, c) in ff.c.iter().enumerate() {
                if !field.is_zero(c) {
                    rows[i] = rows[i].add(&coef.scale(c));
                }
            }
        }
        (ThetaOp::new(field, rows), s)
    }

    /// The operator in the local variable `x = w - c`, as a θ_x operator with
    /// the common power of `x` removed.
    pub fn recenter(&self, c: &F::E) -> Self {
        let d: Vec<Poly<F>> = self.to_d_form().iter().map(|b| b.taylor_shift(c)).collect();
        ThetaOp::from_d_form(self.field.clone(), &d).0.strip_w()
    }

    /// The operator in `x = 1/w`: `θ_w = -θ_x` and `w^j → x^{D-j}`.
    pub fn at_infinity(&self) -> Self {
        let f = &self.field;
        let dd = self.degree();
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let c: Vec<F::E> = (0..=dd)
                    .map(|k| {
                        let v = r.coeff(dd - k);
                        if i % 2 == 1 {
                            f.neg(&v)
                        } else {
                            v
                        }
                    })
                    .collect();
                Poly::new(f.clone(), c)
            })
            .collect();
        ThetaOp::new(f.clone(), rows).strip_w()
    }

    /// Coefficient `n` of `L(Σ c_m w^m)` from the stored coefficients.
    pub fn apply_at(&self, s: &Series<F>, n: i64) -> F::E {
        let f = &self.field;
        let mut acc = f.zero();
        for j in 0..=self.degree() {
            let m = n - j as i64;
            if m < s.offset {
                continue;
            }
            let c = s.coeff(m);
            if f.is_zero(&c) {
                continue;
            }
            let pj = self.theta_poly(j);
            acc = f.add(&acc, &f.mul(&pj.eval(&f.from_i64(m)), &c));
        }
        acc
    }

    /// Applies the operator to a series. The result starts at the input
    /// offset and keeps `count - D` coefficients.
    pub fn apply(&self, s: &Series<F>) -> Result<Series<F>, OpError> {
        let d = self.degree();
        if s.count() <= d {
            return Err(OpError::SeriesTooShort { have: s.count(), degree: d });
        }
        let f = &self.field;
        let polys: Vec<Poly<F>> = (0..=d).map(|j| self.theta_poly(j)).collect();
        let n_out = s.count() - d;
        let out: Vec<F::E> = (0..n_out as i64)
            .map(|t| {
                let n = s.offset + t;
                let mut acc = f.zero();
                for (j, pj) in polys.iter().enumerate() {
                    let m = n - j as i64;
                    if m < s.offset || pj.is_zero() {
                        continue;
                    }
                    let c = &s.coeffs[(m - s.offset) as usize];
                    if f.is_zero(c) {
                        continue;
                    }
                    acc = f.add(&acc, &f.mul(&pj.eval(&f.from_i64(m)), c));
                }
                acc
            })
            .collect();
        Ok(Series::new(f.clone(), &s.var, s.offset, out))
    }

    pub fn map_field<G: Field>(&self, g: G, m: impl Fn(&F::E) -> G::E) -> ThetaOp<G> {
        let rows = self.rows.iter().map(|r| r.map_field(g.clone(), &m)).collect();
        ThetaOp::new(g, rows)
    }

    /// Text form: header, then `(M+1)(D+1)` coefficients row-major.
    pub fn to_text(&self) -> String {
        let (m, d) = (self.order(), self.degree());
        let mut s = format!("thetaop prime={} order={} degree={}\n", self.field.tag(), m, d);
        for v in self.flat(m, d) {
            let _ = writeln!(s, "{}", self.field.format(&v));
        }
        s
    }

    pub fn from_text(field: F, text: &str) -> Result<Self, FfError> {
        let h = parse_op_header(text)?;
        if h.prime != field.tag() {
            return Err(FfError::FieldMismatch);
        }
        let vals: Vec<F::E> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .skip(1)
            .map(|l| field.parse(l))
            .collect::<Result<_, _>>()?;
        if vals.len() != (h.order + 1) * (h.degree + 1) {
            return Err(FfError::Parse(format!(
                "expected {} coefficients, found {}",
                (h.order + 1) * (h.degree + 1),
                vals.len()
            )));
        }
        Ok(ThetaOp::from_flat(field, h.order, h.degree, &vals))
    }

    /// Human-readable form such as `(1 - 2*w)*θ + (-2*w)`.
    pub fn pretty(&self) -> String {
        let mut parts = Vec::new();
        for (i, r) in self.rows.iter().enumerate().rev() {
            if r.is_zero() {
                continue;
            }
            let t = match i {
                0 => String::new(),
                1 => "*θ".into(),
                _ => format!("*θ^{i}"),
            };
            parts.push(format!("[{}]{}", r.to_string_var("w"), t));
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Parsed `thetaop` header.
#[derive(Clone, Debug, PartialEq)]
pub struct OpHeader {
    pub prime: String,
    pub order: usize,
    pub degree: usize,
}

pub fn parse_op_header(text: &str) -> Result<OpHeader, FfError> {
    let first = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| FfError::Parse("empty operator file".into()))?;
    let mut it = first.split_whitespace();
    if it.next() != Some("thetaop") {
        return Err(FfError::Parse("missing `thetaop` header".into()));
    }
    let mut h = OpHeader { prime: String::new(), order: 0, degree: 0 };
    for kv in it {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| FfError::Parse(format!("bad header field `{kv}`")))?;
        let bad = |_| FfError::Parse(format!("bad header value `{kv}`"));
        match k {
            "prime" => h.prime = v.to_string(),
            "order" => h.order = v.parse().map_err(bad)?,
            "degree" => h.degree = v.parse().map_err(bad)?,
            _ => return Err(FfError::Parse(format!("unknown header field `{k}`"))),
        }
    }
    if h.prime.is_empty() {
        return Err(FfError::Parse("header lacks prime".into()));
    }
    Ok(h)
}

/// An operator read from text whose field is fixed by its header.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyOp {
    Prime(ThetaOperatorP),
    Exact(ThetaOperatorX),
}

pub fn read_op(text: &str) -> Result<AnyOp, FfError> {
    let h = parse_op_header(text)?;
    if h.prime == "exact" {
        Ok(AnyOp::Exact(ThetaOp::from_text(Rationals, text)?))
    } else {
        let p: u64 = h.prime.parse().map_err(|_| FfError::Parse("bad prime".into()))?;
        Ok(AnyOp::Prime(ThetaOp::from_text(PrimeField::new(p)?, text)?))
    }
}

fn binomial_table<F: Field>(f: &F, n: usize) -> Vec<Vec<F::E>> {
    let mut t = vec![vec![f.one()]];
    for i in 1..=n {
        let prev = &t[i - 1];
        let row = (0..=i)
            .map(|k| {
                if k == 0 || k == i {
                    f.one()
                } else {
                    f.add(&prev[k - 1], &prev[k])
                }
            })
            .collect();
        t.push(row);
    }
    t
}

/// Stirling numbers of the second kind `S(i, k)` for `i <= n`.
fn stirling2<F: Field>(f: &F, n: usize) -> Vec<Vec<F::E>> {
    let mut t: Vec<Vec<F::E>> = vec![vec![f.one()]];
    for i in 1..=n {
        let prev = &t[i - 1];
        let row = (0..=i)
            .map(|k| {
                let a = if k < prev.len() { f.mul(&f.from_u64(k as u64), &prev[k]) } else { f.zero() };
                let b = if k >= 1 && k - 1 < prev.len() { prev[k - 1].clone() } else { f.zero() };
                f.add(&a, &b)
            })
            .collect();
        t.push(row);
    }
    t
}

/// `θ(θ-1)...(θ-k+1)` as a polynomial in θ.
pub fn falling_factorial<F: Field>(f: &F, k: usize) -> Poly<F> {
    let mut p = Poly::one(f.clone());
    for t in 0..k {
        p = p.mul(&Poly::new(f.clone(), vec![f.from_i64(-(t as i64)), f.one()]));
    }
    p
}

impl ThetaOperatorX {
    /// Reduction modulo p; `None` when a denominator vanishes mod p.
    pub fn reduce(&self, f: PrimeField) -> Option<ThetaOperatorP> {
        let mut rows = Vec::with_capacity(self.rows.len());
        for r in &self.rows {
            let c: Option<Vec<u64>> = r.c.iter().map(|v| f.from_rational(v)).collect();
            rows.push(Poly::new(f, c?));
        }
        Some(ThetaOp::new(f, rows))
    }

    /// Integer operator with primitive content (first entry positive).
    pub fn primitive(&self) -> Self {
        self.normalize()
    }

    /// Scaling that makes the first nonzero (i, j) coefficient equal to 1.
    pub fn monic_lex(&self) -> Self {
        let first = self.rows.iter().flat_map(|r| r.c.iter()).find(|v| !num_traits::Zero::is_zero(*v));
        match first {
            Some(v) => self.scale(&v.recip()),
            None => self.clone(),
        }
    }

    pub fn from_rationals(rows: Vec<Vec<BigRational>>) -> Self {
        let r = rows.into_iter().map(|c| Poly::new(Rationals, c)).collect();
        ThetaOp::new(Rationals, r)
    }
}

impl ThetaOperatorP {
    /// Scaling that makes the first nonzero (i, j) coefficient equal to 1.
    pub fn monic_lex(&self) -> Self {
        self.normalize()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn q() -> Rationals {
        Rationals
    }

    #[test]
    fn theta_times_w_commutes() {
        let th = ThetaOp::from_ints(q(), &[&[0], &[1]]);
        let w = ThetaOp::from_ints(q(), &[&[0, 1]]);
        let p = th.mul(&w);
        assert_eq!(p, ThetaOp::from_ints(q(), &[&[0, 1], &[0, 1]]));
    }

    #[test]
    fn constant_coefficient_product() {
        let a = ThetaOp::from_ints(q(), &[&[-1], &[1]]);
        let b = ThetaOp::from_ints(q(), &[&[-2], &[1]]);
        assert_eq!(a.mul(&b), ThetaOp::from_ints(q(), &[&[2], &[-3], &[1]]));
    }

    #[test]
    fn annihilates_geometric_series() {
        let f = PrimeField::new(32749).unwrap();
        let op = ThetaOp::from_ints(f, &[&[0, -2], &[1, -2]]);
        let s = Series::from_fn(f, "w", 200, |n| f.pow(&2, n as u64));
        let r = op.apply(&s).unwrap();
        assert_eq!(r.order(), 199);
        assert!(r.is_zero());
    }

    #[test]
    fn adjoint_convention() {
        let th = ThetaOp::from_ints(q(), &[&[0], &[1]]);
        assert_eq!(th.adjoint(), ThetaOp::from_ints(q(), &[&[-1], &[-1]]));
    }

    #[test]
    fn d_form_roundtrip() {
        let op = ThetaOp::from_ints(q(), &[&[3, 1, 2], &[0, -1], &[1, 0, 5]]);
        let (back, s) = ThetaOp::from_d_form(q(), &op.to_d_form());
        assert_eq!(s, 0);
        assert_eq!(back, op);
    }

    #[test]
    fn recenter_moves_pole() {
        // (1-2w)θ - 2w annihilates 1/(1-2w); at w = 1/2 the exponent is -1
        let op = ThetaOp::from_ints(q(), &[&[0, -2], &[1, -2]]);
        let half = BigRational::new(1.into(), 2.into());
        let loc = op.recenter(&half);
        let ind = loc.indicial_at_zero();
        let roots = ind.rational_roots();
        assert_eq!(roots, vec![(-BigRational::one(), 1)]);
    }

    #[test]
    fn text_roundtrip() {
        let op = ThetaOp::from_ints(q(), &[&[0, -2], &[1, -2]]);
        let t = op.to_text();
        assert!(t.starts_with("thetaop prime=exact order=1 degree=1\n"));
        assert_eq!(read_op(&t).unwrap(), AnyOp::Exact(op));
    }
}
