//! Operator algebra: products, right division over the rational-function
//! field, adjoints, first-order annihilators of rational functions,
//! p-curvature, and the block bookkeeping of symmetric powers and products.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::OpError;
use crate::ffcore::{Poly, Series};
use crate::field::{Field, PrimeField, Rationals};
use crate::theta::{ThetaOp, ThetaOperatorP, ThetaOperatorX};

/// `L(s)` coefficientwise; see [`ThetaOp::apply`].
pub fn apply<F: Field>(op: &ThetaOp<F>, s: &Series<F>) -> Result<Series<F>, OpError> {
    op.apply(s)
}

/// Composition `a ∘ b`.
pub fn multiply<F: Field>(a: &ThetaOp<F>, b: &ThetaOp<F>) -> ThetaOp<F> {
    a.mul(b)
}

/// Formal adjoint with `θ* = −θ − 1`.
pub fn adjoint<F: Field>(op: &ThetaOp<F>) -> ThetaOp<F> {
    op.adjoint()
}

/// Reduced rational function `num/den` with monic denominator.
#[derive(Clone, Debug, PartialEq)]
pub struct RatFunc<F: Field> {
    pub num: Poly<F>,
    pub den: Poly<F>,
}

impl<F: Field> RatFunc<F> {
    pub fn new(num: Poly<F>, den: Poly<F>) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            let f = den.field.clone();
            return RatFunc { num, den: Poly::one(f) };
        }
        let g = num.gcd(&den);
        let (n, d) = (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap());
        let l = d.field.inv(d.lead().unwrap()).unwrap();
        RatFunc { num: n.scale(&l), den: d.scale(&l) }
    }

    pub fn from_poly(p: Poly<F>) -> Self {
        let f = p.field.clone();
        RatFunc { num: p, den: Poly::one(f) }
    }

    pub fn zero(f: F) -> Self {
        RatFunc { num: Poly::zero(f.clone()), den: Poly::one(f) }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.den == o.den {
            return RatFunc::new(self.num.add(&o.num), self.den.clone());
        }
        RatFunc::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }

    pub fn neg(&self) -> Self {
        RatFunc { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }

    pub fn div(&self, o: &Self) -> Self {
        RatFunc::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }

    pub fn scale(&self, s: &F::E) -> Self {
        RatFunc::new(self.num.scale(s), self.den.clone())
    }

    /// `w · d/dw`.
    pub fn theta(&self) -> Self {
        let n = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        RatFunc::new(n.shift_up(1), self.den.mul(&self.den))
    }
}

/// Operator in θ with rational-function coefficients (the Ore algebra used
/// for right division).
#[derive(Clone, Debug, PartialEq)]
pub struct RatOp<F: Field> {
    pub field: F,
    pub rows: Vec<RatFunc<F>>,
}

impl<F: Field> RatOp<F> {
    pub fn from_theta(op: &ThetaOp<F>) -> Self {
        let rows = op.rows().iter().map(|r| RatFunc::from_poly(r.clone())).collect();
        RatOp { field: op.field.clone(), rows }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.rows.last().is_some_and(|r| r.is_zero()) {
            self.rows.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn order(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    fn row(&self, i: usize) -> RatFunc<F> {
        self.rows.get(i).cloned().unwrap_or_else(|| RatFunc::zero(self.field.clone()))
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.rows.len().max(o.rows.len());
        let rows = (0..n).map(|i| self.row(i).add(&o.row(i))).collect();
        RatOp { field: self.field.clone(), rows }.trimmed()
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.rows.len().max(o.rows.len());
        let rows = (0..n).map(|i| self.row(i).sub(&o.row(i))).collect();
        RatOp { field: self.field.clone(), rows }.trimmed()
    }

    /// `(c θ^k) ∘ self` using `θ^k f = Σ_t C(k,t) θ^{k−t}(f) θ^t`.
    pub fn left_mul_term(&self, c: &RatFunc<F>, k: usize) -> Self {
        let f = &self.field;
        let mut rows = vec![RatFunc::zero(f.clone()); self.rows.len() + k];
        for (i, r) in self.rows.iter().enumerate() {
            let mut der = vec![r.clone()];
            for _ in 0..k {
                let last = der.last().unwrap().theta();
                der.push(last);
            }
            let mut binom: u128 = 1;
            for t in 0..=k {
                // C(k,t) θ^{k−t}(r) θ^{t+i}
                let bf = f.from_bigint(&num_bigint::BigInt::from(binom));
                let term = der[k - t].scale(&bf).mul(c);
                rows[t + i] = rows[t + i].add(&term);
                binom = binom * (k - t) as u128 / (t as u128 + 1);
            }
        }
        RatOp { field: f.clone(), rows }.trimmed()
    }

    /// Clears denominators: returns `(g, g·self)` with `g` the monic lcm.
    pub fn clear(&self) -> (Poly<F>, ThetaOp<F>) {
        let f = &self.field;
        let mut g = Poly::one(f.clone());
        for r in &self.rows {
            let d = g.gcd(&r.den);
            g = g.mul(&r.den.div_exact(&d).unwrap());
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.num.mul(&g.div_exact(&r.den).unwrap()))
            .collect();
        (g, ThetaOp::new(f.clone(), rows))
    }
}

/// `g · l = q ∘ r + rem` with polynomial `g`, `q`, `rem` and
/// `order(rem) < order(r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RightDivision<F: Field> {
    pub multiplier: Poly<F>,
    pub quotient: ThetaOp<F>,
    pub remainder: ThetaOp<F>,
}

impl<F: Field> RightDivision<F> {
    pub fn divides(&self) -> bool {
        self.remainder.is_zero()
    }
}

/// Right division over the rational-function field.
pub fn right_divide<F: Field>(l: &ThetaOp<F>, r: &ThetaOp<F>) -> Result<RightDivision<F>, OpError> {
    if r.order() < 1 || r.is_zero() {
        return Err(OpError::ZeroOrderDivisor);
    }
    let f = &l.field;
    let rr = RatOp::from_theta(r);
    let rlead = rr.rows.last().unwrap().clone();
    let mut rem = RatOp::from_theta(l);
    let mut q = RatOp { field: f.clone(), rows: vec![] };
    while !rem.is_zero() && rem.order() >= rr.order() {
        let k = rem.order() - rr.order();
        let c = rem.rows.last().unwrap().div(&rlead);
        let t = rr.left_mul_term(&c, k);
        rem = rem.sub(&t);
        let mut qt = vec![RatFunc::zero(f.clone()); k + 1];
        qt[k] = c;
        q = q.add(&RatOp { field: f.clone(), rows: qt });
    }
    let (gq, _) = q.clear();
    let (gr, _) = rem.clear();
    let g = gq.mul(&gr).div_exact(&gq.gcd(&gr)).unwrap();
    let gf = RatFunc::from_poly(g.clone());
    let scale = |op: &RatOp<F>| {
        let rows = op.rows.iter().map(|x| x.mul(&gf).num).collect();
        ThetaOp::new(f.clone(), rows)
    };
    Ok(RightDivision { multiplier: g, quotient: scale(&q), remainder: scale(&rem) })
}

/// First-order annihilator `N D θ − w (N' D − N D')` of `f = N/D` with common
/// factors removed, primitive content and positive head.
pub fn annihilator_of_rational(num: &Poly<Rationals>, den: &Poly<Rationals>) -> Result<ThetaOperatorX, OpError> {
    if num.is_zero() {
        return Err(OpError::ZeroFunction);
    }
    if den.is_zero() {
        return Err(OpError::Unsupported("zero denominator".into()));
    }
    let a1 = num.mul(den);
    let a0 = num.derivative().mul(den).sub(&num.mul(&den.derivative())).shift_up(1).neg();
    let g = a1.gcd(&a0);
    let g = if g.is_zero() { a1.clone() } else { g };
    let rows = vec![a0.div_exact(&g).unwrap(), a1.div_exact(&g).unwrap()];
    let op = ThetaOp::new(Rationals, rows).normalize();
    // sign convention: positive leading coefficient of the head
    if num_traits::Signed::is_negative(op.head().lead().unwrap()) {
        Ok(op.scale(&Rationals.from_i64(-1)))
    } else {
        Ok(op)
    }
}

/// Classification of the p-curvature.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PCurvature {
    Zero,
    /// `A_p^m = 0` with `m` the smallest such power.
    Nilpotent(usize),
    Neither,
}

impl fmt::Display for PCurvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PCurvature::Zero => write!(f, "zero"),
            PCurvature::Nilpotent(m) => write!(f, "nilpotent (index {m})"),
            PCurvature::Neither => write!(f, "neither"),
        }
    }
}

type PolyMat = Vec<Vec<Poly<PrimeField>>>;

fn pm_mul(a: &PolyMat, b: &PolyMat, f: PrimeField) -> PolyMat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(Poly::zero(f), |acc, k| acc.add(&a[i][k].mul(&b[k][j]))))
                .collect()
        })
        .collect()
}

fn pm_is_zero(a: &PolyMat) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

/// Iterates `A_{k+1} = A_k' + A_k A` for the companion system of `op` in
/// `d/dw`, to `k = p`, and classifies `A_p`. Numerators are kept over the
/// common denominator `b^k`, `b` the d-form head:
/// `N_{k+1} = b N_k' − k b' N_k + N_k N_1`.
pub fn p_curvature_nilpotent(op: &ThetaOperatorP) -> Result<PCurvature, OpError> {
    let f = op.field;
    if op.is_zero() {
        return Err(OpError::ZeroOperator);
    }
    if op.head().is_zero() {
        return Err(OpError::BadReduction(f.p()));
    }
    let m = op.order();
    if m == 0 {
        return Ok(PCurvature::Zero);
    }
    let d = op.to_d_form();
    let b = d[m].clone();
    let db = b.derivative();
    // companion numerators: y_i' = y_{i+1}; y_{m-1}' = −Σ (b_k/b) y_k
    let mut n1: PolyMat = vec![vec![Poly::zero(f); m]; m];
    for i in 0..m - 1 {
        n1[i][i + 1] = b.clone();
    }
    for k in 0..m {
        n1[m - 1][k] = d[k].neg();
    }
    let mut nk = n1.clone();
    for k in 1..f.p() as usize {
        let kk = f.from_u64(k as u64);
        let prod = pm_mul(&nk, &n1, f);
        nk = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        b.mul(&nk[i][j].derivative())
                            .sub(&db.mul(&nk[i][j]).scale(&kk))
                            .add(&prod[i][j])
                    })
                    .collect()
            })
            .collect();
    }
    if pm_is_zero(&nk) {
        return Ok(PCurvature::Zero);
    }
    let mut pw = nk.clone();
    for e in 2..=m {
        pw = pm_mul(&pw, &nk, f);
        if pm_is_zero(&pw) {
            return Ok(PCurvature::Nilpotent(e));
        }
    }
    Ok(PCurvature::Neither)
}

/// p-curvature classification of an exact operator reduced mod p.
pub fn p_curvature_exact(op: &ThetaOperatorX, p: u64) -> Result<PCurvature, OpError> {
    let f = PrimeField::new(p)?;
    let red = op.reduce(f).ok_or(OpError::BadReduction(p))?;
    if red.order() != op.order() {
        return Err(OpError::BadReduction(p));
    }
    p_curvature_nilpotent(&red)
}

/// Order of the symmetric n-th power of an order-q operator, `C(q+n−1, n)`.
pub fn symmetric_power_order(q: usize, n: usize) -> usize {
    let mut r: u128 = 1;
    for k in 0..n {
        r = r * (q + k) as u128 / (k + 1) as u128;
    }
    r as usize
}

/// `(q1 + q2 − 1, q1·q2)`.
pub fn symmetric_product_order_bounds(q1: usize, q2: usize) -> (usize, usize) {
    (q1 + q2 - 1, q1 * q2)
}

/// Multiset of log blocks at one point; `BL_n` owns `n + 1` solutions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockScheme {
    pub point: String,
    /// Sorted descending.
    pub blocks: Vec<usize>,
}

impl BlockScheme {
    pub fn new(point: &str, mut blocks: Vec<usize>) -> Self {
        blocks.sort_unstable_by(|a, b| b.cmp(a));
        BlockScheme { point: point.to_string(), blocks }
    }

    pub fn solution_count(&self) -> usize {
        self.blocks.iter().map(|n| n + 1).sum()
    }

    /// Parses `BL3,BL3,BL1` or `3,3,1`.
    pub fn parse(point: &str, text: &str) -> Result<Self, OpError> {
        let blocks = text
            .split([',', ' ', '+'])
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                let t = t.trim();
                let (mult, name) = match t.split_once('*') {
                    Some((m, n)) => (m.parse::<usize>().ok(), n),
                    None => (Some(1), t),
                };
                let n = name.trim_start_matches("BL").parse::<usize>().ok();
                match (mult, n) {
                    (Some(m), Some(n)) => Ok(vec![n; m]),
                    _ => Err(OpError::Unsupported(format!("bad block `{t}`"))),
                }
            })
            .collect::<Result<Vec<_>, _>>()?
            .concat();
        Ok(BlockScheme::new(point, blocks))
    }
}

impl fmt::Display for BlockScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|n| format!("BL{n}")).collect();
        write!(f, "{}: {{{}}}", self.point, parts.join(", "))
    }
}

/// sl2 weights of a block multiset: `BL_n` carries `n, n−2, …, −n`.
fn weights(blocks: &[usize]) -> Vec<i64> {
    blocks
        .iter()
        .flat_map(|&n| (0..=n).map(move |k| n as i64 - 2 * k as i64))
        .collect()
}

/// Decomposes a weight multiset into irreducible blocks (highest weight first).
fn decompose(ws: &[i64]) -> Vec<usize> {
    let mut count: BTreeMap<i64, i64> = BTreeMap::new();
    for &w in ws {
        *count.entry(w).or_default() += 1;
    }
    let mut out = Vec::new();
    loop {
        let Some((&top, _)) = count.iter().rev().find(|(_, &c)| c > 0) else {
            break;
        };
        debug_assert!(top >= 0, "weights are symmetric");
        let n = top as usize;
        for k in 0..=n {
            *count.get_mut(&(top - 2 * k as i64)).expect("symmetric weights") -= 1;
        }
        out.push(n);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Product rule `BL_a × BL_b → BL_{a+b} ⊕ BL_{a+b−2} ⊕ … ⊕ BL_{|a−b|}`,
/// applied to every pair of blocks.
pub fn block_product_scheme(f1: &BlockScheme, f2: &BlockScheme) -> Result<BlockScheme, OpError> {
    if f1.point != f2.point {
        return Err(OpError::PointMismatch(f1.point.clone(), f2.point.clone()));
    }
    let mut blocks = Vec::new();
    for &a in &f1.blocks {
        for &b in &f2.blocks {
            let lo = a.abs_diff(b);
            blocks.extend((lo..=a + b).rev().step_by(2));
        }
    }
    Ok(BlockScheme::new(&f1.point, blocks))
}

/// Blocks of the symmetric n-th power (weights of all degree-n monomials).
pub fn block_power_scheme(f: &BlockScheme, n: usize) -> BlockScheme {
    let ws = weights(&f.blocks);
    let mut sums = Vec::new();
    fn rec(ws: &[i64], start: usize, left: usize, acc: i64, out: &mut Vec<i64>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for i in start..ws.len() {
            rec(ws, i, left - 1, acc + ws[i], out);
        }
    }
    rec(&ws, 0, n, 0, &mut sums);
    BlockScheme::new(&f.point, decompose(&sums))
}

/// All block multisets with `Σ (n+1) = q`.
pub fn block_multisets(q: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, max_part: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=max_part.min(left)).rev() {
            cur.push(part - 1);
            rec(left - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(q, q, &mut Vec::new(), &mut out);
    out
}

/// How the target is meant to decompose.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymMode {
    /// Symmetric `n`-th power of one factor.
    Power(usize),
    /// Symmetric product of the listed factors.
    Product,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointVerdict {
    pub point: String,
    pub not_ruled_out: bool,
    /// Block multisets per factor that reproduce the target, if any.
    pub witness: Option<Vec<Vec<usize>>>,
    pub explanation: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymVerdict {
    pub not_ruled_out: bool,
    pub points: Vec<PointVerdict>,
}

impl fmt::Display for SymVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.points {
            writeln!(f, "{}: {} ({})", p.point, if p.not_ruled_out { "not ruled out" } else { "ruled out" }, p.explanation)?;
        }
        write!(f, "overall: {}", if self.not_ruled_out { "not ruled out" } else { "ruled out" })
    }
}

fn fmt_blocks(b: &[usize]) -> String {
    let v: Vec<String> = b.iter().map(|n| format!("BL{n}")).collect();
    format!("{{{}}}", v.join(","))
}

/// Tests whether the block structure at every point is compatible with the
/// requested symmetric decomposition. A positive verdict only means the
/// configuration is not excluded by block counting.
pub fn check_sym_decomposition(targets: &[BlockScheme], config: &[usize], mode: SymMode) -> SymVerdict {
    let mut points = Vec::new();
    for t in targets {
        let v = match mode {
            SymMode::Power(n) => {
                let q = config.first().copied().unwrap_or(0);
                let hit = block_multisets(q)
                    .into_iter()
                    .find(|b| block_power_scheme(&BlockScheme::new(&t.point, b.clone()), n).blocks == t.blocks);
                let explanation = match &hit {
                    Some(b) => format!("factor blocks {} reproduce {}", fmt_blocks(b), fmt_blocks(&t.blocks)),
                    None => {
                        let reach: Vec<String> = block_multisets(q)
                            .iter()
                            .map(|b| fmt_blocks(&block_power_scheme(&BlockScheme::new(&t.point, b.clone()), n).blocks))
                            .collect();
                        format!("symmetric power {n} of order {q} only yields {}", reach.join(" or "))
                    }
                };
                PointVerdict { point: t.point.clone(), not_ruled_out: hit.is_some(), witness: hit.map(|b| vec![b]), explanation }
            }
            SymMode::Product => {
                let hit = product_search(t, config);
                let explanation = match &hit {
                    Some(w) => {
                        let parts: Vec<String> = w.iter().map(|b| fmt_blocks(b)).collect();
                        format!("factor blocks {} reproduce {}", parts.join(" x "), fmt_blocks(&t.blocks))
                    }
                    None => format!(
                        "no block assignment for orders {:?} yields {}",
                        config,
                        fmt_blocks(&t.blocks)
                    ),
                };
                PointVerdict { point: t.point.clone(), not_ruled_out: hit.is_some(), witness: hit, explanation }
            }
        };
        points.push(v);
    }
    SymVerdict { not_ruled_out: points.iter().all(|p| p.not_ruled_out), points }
}

fn product_search(t: &BlockScheme, config: &[usize]) -> Option<Vec<Vec<usize>>> {
    fn rec(
        t: &BlockScheme,
        config: &[usize],
        acc: &BlockScheme,
        chosen: &mut Vec<Vec<usize>>,
    ) -> Option<Vec<Vec<usize>>> {
        let Some((&q, rest)) = config.split_first() else {
            return (acc.blocks == t.blocks).then(|| chosen.clone());
        };
        for b in block_multisets(q) {
            let next = block_product_scheme(acc, &BlockScheme::new(&t.point, b.clone())).ok()?;
            if next.solution_count() * rest.iter().product::<usize>() != t.solution_count() {
                continue;
            }
            chosen.push(b);
            if let Some(w) = rec(t, rest, &next, chosen) {
                return Some(w);
            }
            chosen.pop();
        }
        None
    }
    let unit = BlockScheme::new(&t.point, vec![0]);
    rec(t, config, &unit, &mut Vec::new())
}

/// Whether `op` annihilates `s` at every index the series determines.
pub fn annihilates<F: Field>(op: &ThetaOp<F>, s: &Series<F>) -> bool {
    (s.offset..s.order()).all(|n| op.field.is_zero(&op.apply_at(s, n)))
}
