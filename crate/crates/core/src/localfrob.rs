//! Local analysis at a point: indicial equations, Frobenius bases with
//! logarithms, series probes for right factors, and right factors extracted
//! at accidental roots modulo a prime.
//!
//! A local solution is stored in divided-power form while it is built,
//! `x^ρ Σ_n Σ_ℓ c_{n,ℓ} x^n ln^ℓ(x)/ℓ!`, because θ then acts on the log
//! vector of each `x^{ρ+n}` as `(ρ+n) + N` with `N` the down-shift.
//! [`LogSolution`] stores plain powers `ln^ℓ(x)`.

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{FfError, LocalError};
use crate::ffcore::{Matrix, Poly, Series};
use crate::field::{parse_rational, Field, PrimeField, Rationals};
use crate::guess::guess_ode;
use crate::opalgebra::BlockScheme;
use crate::theta::{ThetaOp, ThetaOperatorP};

/// Default cap on the logarithm power of a local solution.
pub const DEFAULT_DEPTH_BUDGET: usize = 4;

/// Expansion point of a local frame.
#[derive(Clone, Debug, PartialEq)]
pub enum Center {
    /// A rational point `w = c` (reduced mod p for mod-p operators).
    Point(BigRational),
    /// `w = ∞` with local variable `x = 1/w`.
    Infinity,
    /// A point `w = w_p` meaningful only modulo the operator's prime.
    ModP(u64),
    /// A root of an irreducible polynomial of degree > 1 over Q.
    Algebraic(Poly<Rationals>),
}

impl Center {
    /// Parses `0`, `1/4`, `inf` or `modp:<w_p>`.
    pub fn parse(s: &str) -> Result<Self, FfError> {
        let s = s.trim();
        if s == "inf" || s == "infinity" {
            return Ok(Center::Infinity);
        }
        if let Some(v) = s.strip_prefix("modp:") {
            return v
                .trim()
                .parse::<u64>()
                .map(Center::ModP)
                .map_err(|_| FfError::Parse(format!("bad mod-p point `{v}`")));
        }
        parse_rational(s).map(Center::Point)
    }
}

impl fmt::Display for Center {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Center::Point(c) => write!(f, "{c}"),
            Center::Infinity => write!(f, "inf"),
            Center::ModP(w) => write!(f, "modp:{w}"),
            Center::Algebraic(p) => write!(f, "root({})", p.to_string_var("w")),
        }
    }
}

/// Center plus the data read off the head polynomial there.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFrame {
    pub center: Center,
    /// Multiplicity of the center as a root of the `d/dw`-form head
    /// polynomial; `None` at infinity.
    pub head_multiplicity: Option<usize>,
    /// False only at finite points where the head does not vanish.
    pub singular: bool,
}

impl LocalFrame {
    pub fn of<F: LocalField>(op: &ThetaOp<F>, center: Center) -> Result<Self, LocalError> {
        let f = &op.field;
        let c = f.center_value(&center)?;
        let head_multiplicity = match &c {
            Some(c) => {
                let head = op.to_d_form().pop().unwrap_or_else(|| Poly::zero(f.clone()));
                Some(head.taylor_shift(c).valuation().unwrap_or(0))
            }
            None => None,
        };
        let singular = head_multiplicity.map_or(true, |m| m > 0);
        Ok(LocalFrame { center, head_multiplicity, singular })
    }

    pub fn label(&self) -> String {
        match &self.center {
            Center::Point(c) => format!("w={c}"),
            Center::Infinity => "w=inf".to_string(),
            Center::ModP(w) => format!("w={w} (mod p)"),
            Center::Algebraic(_) => self.center.to_string(),
        }
    }
}

/// Field-specific pieces of local analysis.
pub trait LocalField: Field {
    /// Center as a field element, `None` for infinity.
    fn center_value(&self, c: &Center) -> Result<Option<Self::E>, LocalError>;
    /// Roots of the indicial polynomial with multiplicities, in a fixed
    /// order, plus the degree left unresolved (irrational roots).
    fn exponent_roots(&self, p: &Poly<Self>) -> (Vec<(Self::E, usize)>, usize);
    /// `Some(k)` when `b - a = k` is an integer with `0 <= k < bound`.
    fn integer_gap(&self, a: &Self::E, b: &Self::E, bound: usize) -> Option<usize>;
}

impl LocalField for Rationals {
    fn center_value(&self, c: &Center) -> Result<Option<BigRational>, LocalError> {
        match c {
            Center::Point(v) => Ok(Some(v.clone())),
            Center::Infinity => Ok(None),
            Center::ModP(_) => Err(LocalError::FrameMismatch(c.to_string())),
            Center::Algebraic(_) => Err(LocalError::NotComputable),
        }
    }

    fn exponent_roots(&self, p: &Poly<Self>) -> (Vec<(BigRational, usize)>, usize) {
        let roots = p.rational_roots();
        let found: usize = roots.iter().map(|r| r.1).sum();
        (roots, p.deg().unwrap_or(0) - found)
    }

    fn integer_gap(&self, a: &BigRational, b: &BigRational, bound: usize) -> Option<usize> {
        let d = b - a;
        if !d.is_integer() || d.is_negative() {
            return None;
        }
        let k: usize = d.to_integer().try_into().ok()?;
        (k < bound).then_some(k)
    }
}

impl LocalField for PrimeField {
    fn center_value(&self, c: &Center) -> Result<Option<u64>, LocalError> {
        match c {
            Center::Point(v) => self
                .from_rational(v)
                .map(Some)
                .ok_or_else(|| LocalError::FrameMismatch(c.to_string())),
            Center::Infinity => Ok(None),
            Center::ModP(w) => Ok(Some(*w % self.p())),
            Center::Algebraic(_) => Err(LocalError::NotComputable),
        }
    }

    fn exponent_roots(&self, p: &Poly<Self>) -> (Vec<(u64, usize)>, usize) {
        let roots = p.roots();
        let found: usize = roots.iter().map(|r| r.1).sum();
        (roots, p.deg().unwrap_or(0) - found)
    }

    fn integer_gap(&self, a: &u64, b: &u64, bound: usize) -> Option<usize> {
        let k = self.subm(*b, *a) as usize;
        (k < bound).then_some(k)
    }
}

/// The operator in the frame's local variable, as a θ_x operator with the
/// common power of `x` removed.
pub fn localize<F: LocalField>(op: &ThetaOp<F>, center: &Center) -> Result<ThetaOp<F>, LocalError> {
    if op.is_zero() {
        return Err(LocalError::DegenerateFrame);
    }
    let f = &op.field;
    Ok(match f.center_value(center)? {
        Some(c) if f.is_zero(&c) => op.strip_w(),
        Some(c) => op.recenter(&c),
        None => op.at_infinity(),
    })
}

/// Indicial polynomial and exponents at a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Indicial<F: Field> {
    pub frame: LocalFrame,
    pub poly: Poly<F>,
    pub exponents: Vec<(F::E, usize)>,
    /// Degree of the indicial polynomial not accounted for by field roots.
    pub unresolved: usize,
}

pub fn indicial<F: LocalField>(op: &ThetaOp<F>, center: &Center) -> Result<Indicial<F>, LocalError> {
    let local = localize(op, center)?;
    let frame = LocalFrame::of(op, center.clone())?;
    let poly = local.theta_poly(0);
    let (exponents, unresolved) = op.field.exponent_roots(&poly);
    Ok(Indicial { frame, poly, exponents, unresolved })
}

/// A formal solution `x^q Σ_ℓ S_ℓ(x) ln^ℓ(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSolution<F: Field> {
    pub field: F,
    pub exponent: F::E,
    /// `parts[ℓ][n]` is the coefficient of `x^{q+n} ln^ℓ(x)`; all parts
    /// have the same length.
    pub parts: Vec<Vec<F::E>>,
    /// Parameter this solution is the unit vector of.
    pub name: String,
    /// Parameters of solutions that could be added without changing the
    /// leading term; their coefficients are set to zero here.
    pub free: Vec<String>,
}

impl<F: Field> LogSolution<F> {
    pub fn depth(&self) -> usize {
        self.parts.len().saturating_sub(1)
    }

    pub fn count(&self) -> usize {
        self.parts.first().map_or(0, Vec::len)
    }

    /// The part `S_ℓ` as a series in `x` starting at `x^0`.
    pub fn part(&self, l: usize) -> Series<F> {
        Series::new(self.field.clone(), "x", 0, self.parts[l].clone())
    }

    /// The coefficient of the highest log power, the part a probe uses.
    pub fn top(&self) -> Series<F> {
        self.part(self.depth())
    }

    pub fn to_text(&self) -> String {
        let f = &self.field;
        let mut out = format!(
            "logsol exponent={} depth={} count={} prime={} name={}",
            f.format(&self.exponent),
            self.depth(),
            self.count(),
            f.tag(),
            self.name
        );
        if !self.free.is_empty() {
            out.push_str(&format!(" free={}", self.free.join(",")));
        }
        out.push('\n');
        for (l, part) in self.parts.iter().enumerate() {
            out.push_str(&format!("log {l}\n"));
            for c in part {
                out.push_str(&f.format(c));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(field: F, text: &str) -> Result<Self, FfError> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| FfError::Parse("empty logsol".into()))?;
        let kv = header_fields(header, "logsol")?;
        let get = |k: &str| kv.iter().find(|(a, _)| a == k).map(|(_, v)| v.as_str());
        let need = |k: &str| get(k).ok_or_else(|| FfError::Parse(format!("logsol header lacks `{k}`")));
        let exponent = field.parse(need("exponent")?)?;
        let depth: usize = need("depth")?.parse().map_err(|_| FfError::Parse("bad depth".into()))?;
        let count: usize = need("count")?.parse().map_err(|_| FfError::Parse("bad count".into()))?;
        if let Some(tag) = get("prime") {
            if tag != field.tag() {
                return Err(FfError::Parse(format!("logsol is over {tag}, expected {}", field.tag())));
            }
        }
        let mut parts: Vec<Vec<F::E>> = Vec::new();
        for line in lines {
            if let Some(l) = line.strip_prefix("log ") {
                let l: usize = l.trim().parse().map_err(|_| FfError::Parse(format!("bad block `{line}`")))?;
                if l != parts.len() {
                    return Err(FfError::Parse(format!("log block {l} out of order")));
                }
                parts.push(Vec::with_capacity(count));
            } else {
                let part = parts.last_mut().ok_or_else(|| FfError::Parse("coefficient before `log 0`".into()))?;
                part.push(field.parse(line)?);
            }
        }
        if parts.len() != depth + 1 || parts.iter().any(|p| p.len() != count) {
            return Err(FfError::Parse("logsol blocks do not match the header".into()));
        }
        let free = get("free").map(|v| v.split(',').map(str::to_string).collect()).unwrap_or_default();
        Ok(LogSolution {
            field,
            exponent,
            parts,
            name: get("name").unwrap_or("alpha").to_string(),
            free,
        })
    }
}

impl<F: LocalField> LogSolution<F> {
    /// `self + α·other`, aligned when the exponents differ by an integer.
    pub fn combine(&self, other: &Self, alpha: &F::E) -> Option<Self> {
        let f = &self.field;
        let bound = self.count().max(other.count()) + 1;
        let (shift_self, shift_other, exponent) = if let Some(k) = f.integer_gap(&self.exponent, &other.exponent, bound) {
            (0, k, self.exponent.clone())
        } else if let Some(k) = f.integer_gap(&other.exponent, &self.exponent, bound) {
            (k, 0, other.exponent.clone())
        } else {
            return None;
        };
        let count = (self.count() + shift_self).min(other.count() + shift_other);
        let depth = self.depth().max(other.depth());
        let at = |s: &Self, shift: usize, l: usize, n: usize| -> F::E {
            if n < shift || l >= s.parts.len() {
                f.zero()
            } else {
                s.parts[l][n - shift].clone()
            }
        };
        let mut parts: Vec<Vec<F::E>> = (0..=depth)
            .map(|l| {
                (0..count)
                    .map(|n| f.add(&at(self, shift_self, l, n), &f.mul(alpha, &at(other, shift_other, l, n))))
                    .collect()
            })
            .collect();
        while parts.len() > 1 && parts.last().unwrap().iter().all(|c| f.is_zero(c)) {
            parts.pop();
        }
        Some(LogSolution {
            field: f.clone(),
            exponent,
            parts,
            name: format!("{}+a*{}", self.name, other.name),
            free: vec![],
        })
    }
}

/// A log solution read from text over whichever field its header names.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyLogSolution {
    Prime(LogSolution<PrimeField>),
    Exact(LogSolution<Rationals>),
}

pub fn read_logsol(text: &str) -> Result<AnyLogSolution, FfError> {
    let header = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| FfError::Parse("empty logsol".into()))?;
    let kv = header_fields(header, "logsol")?;
    match kv.iter().find(|(k, _)| k == "prime").map(|(_, v)| v.as_str()) {
        None | Some("exact") => LogSolution::from_text(Rationals, text).map(AnyLogSolution::Exact),
        Some(p) => {
            let p: u64 = p.parse().map_err(|_| FfError::Parse(format!("bad prime `{p}`")))?;
            LogSolution::from_text(PrimeField::new(p)?, text).map(AnyLogSolution::Prime)
        }
    }
}

fn header_fields(line: &str, kind: &str) -> Result<Vec<(String, String)>, FfError> {
    let mut it = line.split_whitespace();
    if it.next() != Some(kind) {
        return Err(FfError::Parse(format!("expected a `{kind}` header")));
    }
    it.map(|t| {
        t.split_once('=')
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .ok_or_else(|| FfError::Parse(format!("bad header field `{t}`")))
    })
    .collect()
}

/// Formal solution basis at a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusBasis<F: Field> {
    pub frame: LocalFrame,
    /// The operator in the local variable the solutions refer to.
    pub local_op: ThetaOp<F>,
    pub solutions: Vec<LogSolution<F>>,
    pub scheme: BlockScheme,
}

impl<F: Field> FrobeniusBasis<F> {
    /// Names of all parameters; the general solution is `Σ α_i y_i`.
    pub fn params(&self) -> Vec<String> {
        self.solutions.iter().map(|s| s.name.clone()).collect()
    }
}

/// One basis vector of a congruence class under construction.
struct Column<E> {
    start: usize,
    /// `c[n][ℓ]` in divided-power form.
    c: Vec<Vec<E>>,
}

/// `(P(a + N) v)_ℓ = Σ_k t_k v_{ℓ+k}` with `t` the Taylor coefficients of `P` at `a`.
fn taylor_apply<F: Field>(f: &F, t: &Poly<F>, v: &[F::E]) -> Vec<F::E> {
    (0..v.len())
        .map(|l| {
            let mut acc = f.zero();
            for (k, tk) in t.c.iter().enumerate() {
                if l + k >= v.len() {
                    break;
                }
                if !f.is_zero(tk) && !f.is_zero(&v[l + k]) {
                    acc = f.add(&acc, &f.mul(tk, &v[l + k]));
                }
            }
            acc
        })
        .collect()
}

/// Solves `Σ_k t_k c_{ℓ+k} = u_ℓ` for an upper-triangular Toeplitz system
/// with `t_0 ≠ 0`.
fn triangular_solve<F: Field>(f: &F, t: &[F::E], u: &[F::E]) -> Vec<F::E> {
    let len = u.len();
    let inv = f.inv(&t[0]).expect("nonzero diagonal");
    let mut c = vec![f.zero(); len];
    for l in (0..len).rev() {
        let mut acc = u[l].clone();
        for k in 1..t.len() {
            if l + k >= len {
                break;
            }
            acc = f.sub(&acc, &f.mul(&t[k], &c[l + k]));
        }
        c[l] = f.mul(&acc, &inv);
    }
    c
}

/// All solutions `x^ρ Σ c_n x^n` of one congruence class with base `ρ`.
fn solve_class<F: Field>(
    f: &F,
    polys: &[Poly<F>],
    rho: &F::E,
    n_max: usize,
    depth: usize,
) -> Result<Vec<Column<F::E>>, LocalError> {
    let levels = depth + 1;
    let mut cols: Vec<Column<F::E>> = Vec::new();
    for n in 0..n_max {
        let a = f.add(rho, &f.from_i64(n as i64));
        let shifted: Vec<Option<Poly<F>>> = (1..polys.len().min(n + 1))
            .map(|j| {
                (!polys[j].is_zero()).then(|| polys[j].taylor_shift(&f.sub(&a, &f.from_i64(j as i64))))
            })
            .collect();
        let t0 = polys[0].taylor_shift(&a);
        let t: Vec<F::E> = (0..t0.c.len()).map(|k| t0.coeff(k)).collect();
        let mu = t.iter().position(|v| !f.is_zero(v)).expect("indicial polynomial is nonzero");
        if mu > depth {
            return Err(LocalError::DepthBudgetExceeded(depth));
        }
        for col in cols.iter_mut() {
            let mut r = vec![f.zero(); levels];
            for (idx, tj) in shifted.iter().enumerate() {
                let j = idx + 1;
                let Some(tj) = tj else { continue };
                let prev = &col.c[n - j];
                for (l, v) in taylor_apply(f, tj, prev).into_iter().enumerate() {
                    r[l] = f.sub(&r[l], &v);
                }
            }
            let cn = if mu == 0 {
                triangular_solve(f, &t, &r)
            } else {
                if r[levels - mu..].iter().any(|v| !f.is_zero(v)) {
                    return Err(LocalError::DepthBudgetExceeded(depth));
                }
                let mut u = vec![f.zero(); levels];
                for l in 0..levels - mu {
                    u[l + mu] = r[l].clone();
                }
                triangular_solve(f, &t[mu..], &u)
            };
            col.c.push(cn);
        }
        for m in 0..mu {
            let mut u = vec![f.zero(); levels];
            u[m] = f.one();
            // P(a + N) e_m = 0 for m < μ
            let mut c = vec![vec![f.zero(); levels]; n];
            c.push(u);
            cols.push(Column { start: n, c });
        }
    }
    Ok(cols)
}

/// Jordan block sizes minus one of the log shift on the span of `cols`.
fn block_sizes<F: Field>(f: &F, cols: &[Column<F::E>], levels: usize) -> Vec<usize> {
    let flat = |col: &Column<F::E>, k: usize| -> Vec<F::E> {
        col.c
            .iter()
            .flat_map(|v| (0..levels).map(move |l| if l + k < levels { v[l + k].clone() } else { f.zero() }))
            .collect()
    };
    let rank = |k: usize| -> usize {
        let rows: Vec<Vec<F::E>> = cols.iter().map(|c| flat(c, k)).collect();
        if rows.is_empty() {
            0
        } else {
            Matrix::from_rows(f.clone(), rows).rank()
        }
    };
    let ranks: Vec<usize> = (0..=levels + 1).map(rank).collect();
    let mut blocks = Vec::new();
    for k in 0..levels {
        // blocks of size exactly k+1
        let at_least = |k: usize| ranks[k] - ranks[k + 1];
        let exact = at_least(k) - at_least(k + 1);
        blocks.extend(std::iter::repeat(k).take(exact));
    }
    blocks
}

/// Groups exponents into classes with integer differences; returns
/// `(base, largest gap)` per class.
fn classes<F: LocalField>(f: &F, exps: &[(F::E, usize)], bound: usize) -> Vec<(F::E, usize)> {
    let mut out: Vec<(F::E, usize)> = Vec::new();
    let mut used = vec![false; exps.len()];
    for (i, (r, _)) in exps.iter().enumerate() {
        if used[i] {
            continue;
        }
        let lower = exps
            .iter()
            .enumerate()
            .any(|(k, (s, _))| k != i && !used[k] && f.integer_gap(s, r, bound).is_some_and(|g| g > 0));
        if lower {
            continue;
        }
        let mut gap = 0;
        for (k, (s, _)) in exps.iter().enumerate() {
            if let Some(g) = f.integer_gap(r, s, bound) {
                used[k] = true;
                gap = gap.max(g);
            }
        }
        out.push((r.clone(), gap));
    }
    // cycles can only arise mod p with a bound near p; take what is left
    for (i, (r, _)) in exps.iter().enumerate() {
        if !used[i] {
            used[i] = true;
            out.push((r.clone(), 0));
        }
    }
    out
}

/// Formal solution basis at a frame. The recursion runs upward from the
/// smallest exponent of each class; a root of the indicial polynomial met at
/// `ρ + n` with multiplicity μ opens μ new parameters and shifts the log
/// vector up by μ levels. At a regular singular point the basis has as many
/// elements as the operator's order.
pub fn frobenius_solve<F: LocalField>(
    op: &ThetaOp<F>,
    center: &Center,
    depth_budget: usize,
    order_budget: usize,
) -> Result<FrobeniusBasis<F>, LocalError> {
    let f = &op.field;
    let ind = indicial(op, center)?;
    if ind.unresolved > 0 && (ind.exponents.is_empty() || f.tag() == "exact") {
        return Err(LocalError::IrrationalExponents(ind.unresolved));
    }
    let local = localize(op, center)?;
    let polys: Vec<Poly<F>> = (0..=local.degree()).map(|j| local.theta_poly(j)).collect();
    let bound = order_budget.max(ind.poly.deg().unwrap_or(0) + 1);
    let levels = depth_budget + 1;
    let mut solutions = Vec::new();
    let mut blocks = Vec::new();
    for (rho, gap) in classes(f, &ind.exponents, bound) {
        let n_max = order_budget.max(gap + 1);
        let cols = solve_class(f, &polys, &rho, n_max, depth_budget)?;
        blocks.extend(block_sizes(f, &cols, levels));
        let first = solutions.len();
        let names: Vec<String> = (0..cols.len()).map(|i| format!("alpha_{}", first + i)).collect();
        for (i, col) in cols.iter().enumerate() {
            let free = cols
                .iter()
                .enumerate()
                .filter(|(_, o)| o.start > col.start)
                .map(|(k, _)| names[k].clone())
                .collect();
            solutions.push(to_log_solution(f, &rho, col, levels, names[i].clone(), free));
        }
    }
    Ok(FrobeniusBasis {
        frame: ind.frame.clone(),
        local_op: local,
        solutions,
        scheme: BlockScheme::new(&ind.frame.label(), blocks),
    })
}

fn to_log_solution<F: Field>(
    f: &F,
    rho: &F::E,
    col: &Column<F::E>,
    levels: usize,
    name: String,
    free: Vec<String>,
) -> LogSolution<F> {
    let mut fact = f.one();
    let mut parts = Vec::with_capacity(levels);
    for l in 0..levels {
        if l > 0 {
            fact = f.mul(&fact, &f.from_i64(l as i64));
        }
        let inv = f.inv(&fact).expect("log depth below the characteristic");
        parts.push(col.c[col.start..].iter().map(|v| f.mul(&v[l], &inv)).collect::<Vec<_>>());
    }
    while parts.len() > 1 && parts.last().unwrap().iter().all(|c| f.is_zero(c)) {
        parts.pop();
    }
    LogSolution {
        field: f.clone(),
        exponent: f.add(rho, &f.from_i64(col.start as i64)),
        parts,
        name,
        free,
    }
}

/// Applies a local θ_x operator to a log solution by direct action of θ on
/// `x^{q+n} ln^ℓ(x)`. Returns the residual parts for the first
/// `count - degree` powers.
pub fn apply_log<F: Field>(op: &ThetaOp<F>, sol: &LogSolution<F>) -> Vec<Vec<F::E>> {
    let f = &op.field;
    let d = op.degree();
    let levels = sol.parts.len();
    let n_out = sol.count().saturating_sub(d);
    let mut out = vec![vec![f.zero(); n_out]; levels];
    for j in 0..=d {
        let pj = op.theta_poly(j);
        if pj.is_zero() {
            continue;
        }
        for n in j..n_out {
            let m = n - j;
            let e = f.add(&sol.exponent, &f.from_i64(m as i64));
            let mut v: Vec<F::E> = sol.parts.iter().map(|p| p[m].clone()).collect();
            let mut acc = vec![f.zero(); levels];
            for (i, a) in pj.c.iter().enumerate() {
                if i > 0 {
                    // θ(x^e ln^ℓ) = e x^e ln^ℓ + ℓ x^e ln^{ℓ-1}
                    v = (0..levels)
                        .map(|l| {
                            let mut t = f.mul(&e, &v[l]);
                            if l + 1 < levels {
                                t = f.add(&t, &f.mul(&f.from_i64(l as i64 + 1), &v[l + 1]));
                            }
                            t
                        })
                        .collect();
                }
                if !f.is_zero(a) {
                    for l in 0..levels {
                        acc[l] = f.add(&acc[l], &f.mul(a, &v[l]));
                    }
                }
            }
            for l in 0..levels {
                out[l][n] = f.add(&out[l][n], &acc[l]);
            }
        }
    }
    out
}

/// Annihilator of `x^q S(x)` for a series `S`, of order `<= max_order`.
pub fn probe_series<F: Field>(
    s: &Series<F>,
    exponent: &F::E,
    max_order: usize,
    max_degree: Option<usize>,
) -> Option<ThetaOp<F>> {
    if max_order == 0 {
        return None;
    }
    let fit = guess_ode(s, max_order, max_degree.unwrap_or(usize::MAX / 4)).ok()?;
    let f = &s.field;
    Some(fit.operator.theta_shift(&f.neg(exponent)).normalize())
}

/// Looks for an annihilator of the solution's highest-log part of order
/// below the operator's order (and `<= max_order`). The result is in the
/// local variable of the solution's frame.
pub fn probe_right_factor<F: Field>(
    op: &ThetaOp<F>,
    sol: &LogSolution<F>,
    max_order: usize,
    max_degree: Option<usize>,
) -> Option<ThetaOp<F>> {
    let m = max_order.min(op.order().saturating_sub(1));
    probe_series(&sol.top(), &sol.exponent, m, max_degree)
}

/// Probes `a + α b` for every `α ∈ F_p`, returning the first hit.
pub fn probe_sweep(
    op: &ThetaOperatorP,
    a: &LogSolution<PrimeField>,
    b: &LogSolution<PrimeField>,
    max_order: usize,
    max_degree: Option<usize>,
) -> Option<(u64, ThetaOperatorP)> {
    (0..op.field.p()).find_map(|alpha| {
        let s = a.combine(b, &alpha)?;
        probe_right_factor(op, &s, max_order, max_degree).map(|r| (alpha, r))
    })
}

/// Canonical representative of an operator up to left multiplication by
/// rational functions: polynomial content of the `d/dw` form removed, back
/// in θ-form with the least power of `w`, scaled so that the head's
/// constant term is 1 (first nonzero coefficient when it vanishes).
pub fn b2_normal_form<F: Field>(op: &ThetaOp<F>) -> ThetaOp<F> {
    let f = &op.field;
    let d = op.to_d_form();
    let content = d
        .iter()
        .filter(|b| !b.is_zero())
        .fold(Poly::zero(f.clone()), |g, b| if g.is_zero() { b.monic() } else { g.gcd(b) });
    let d: Vec<Poly<F>> = if content.deg().unwrap_or(0) > 0 {
        d.iter().map(|b| b.div_exact(&content).expect("content divides")).collect()
    } else {
        d
    };
    let (l, _) = ThetaOp::from_d_form(f.clone(), &d);
    let l = l.strip_w();
    let h0 = l.head().coeff(0);
    match f.inv(&h0) {
        Some(inv) if !f.is_zero(&h0) => l.scale(&inv),
        _ => l.normalize(),
    }
}

/// Right factor found at one accidental root.
#[derive(Clone, Debug, PartialEq)]
pub struct AccidentalFactor {
    pub w_p: u64,
    /// Multiplicity of `h(x + w_p)` in the local head `x^M f0(x)`.
    pub k: usize,
    pub local: ThetaOperatorP,
    /// The `w_p`-independent operator in `w`.
    pub operator: ThetaOperatorP,
}

/// Tunables of the accidental-root search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AcrootOptions {
    pub depth_budget: usize,
    pub order_budget: usize,
    pub max_degree: Option<usize>,
}

impl Default for AcrootOptions {
    fn default() -> Self {
        AcrootOptions { depth_budget: DEFAULT_DEPTH_BUDGET, order_budget: 240, max_degree: None }
    }
}

/// Simple roots of `h` modulo the prime.
pub fn split_roots(h: &Poly<Rationals>, f: PrimeField) -> Option<Vec<u64>> {
    let hp = h.map_field(f, |c| f.from_rational(c).unwrap_or(0));
    if hp.deg() != h.deg() {
        return None;
    }
    let roots: Vec<u64> = hp.roots().into_iter().filter(|r| r.1 == 1).map(|r| r.0).collect();
    (!roots.is_empty()).then_some(roots)
}

/// Right factor of `op` probed at every simple root of `h` mod p.
pub fn accidental_root_factors(
    op: &ThetaOperatorP,
    h: &Poly<Rationals>,
    opts: AcrootOptions,
) -> Result<Vec<Result<AccidentalFactor, LocalError>>, LocalError> {
    let f = op.field;
    let roots = split_roots(h, f).ok_or(LocalError::NoSplitRoot(f.p()))?;
    Ok(roots.into_iter().map(|w_p| factor_at_root(op, h, w_p, opts)).collect())
}

/// Right factor of `op` from the first accidental root of `h` mod p that
/// yields one.
pub fn accidental_root_factor(
    op: &ThetaOperatorP,
    h: &Poly<Rationals>,
    opts: AcrootOptions,
) -> Result<AccidentalFactor, LocalError> {
    let mut last = LocalError::NoAnnihilator(op.order().saturating_sub(1));
    for r in accidental_root_factors(op, h, opts)? {
        match r {
            Ok(a) => return Ok(a),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn factor_at_root(
    op: &ThetaOperatorP,
    h: &Poly<Rationals>,
    w_p: u64,
    opts: AcrootOptions,
) -> Result<AccidentalFactor, LocalError> {
    let f = op.field;
    let basis = frobenius_solve(op, &Center::ModP(w_p), opts.depth_budget, opts.order_budget)?;
    // solutions without free constants first: their probe series is unique
    let mut order: Vec<&LogSolution<PrimeField>> = basis.solutions.iter().collect();
    order.sort_by_key(|s| !s.free.is_empty());
    let max_order = op.order().saturating_sub(1);
    let local = order
        .iter()
        .find_map(|s| probe_right_factor(op, s, max_order, opts.max_degree))
        .ok_or(LocalError::NoAnnihilator(max_order))?;
    // (B1): head f0 with f0(0) = 1
    let f00 = local.head().coeff(0);
    let local = match f.inv(&f00) {
        Some(inv) if f00 != 0 => local.scale(&inv),
        _ => local.normalize(),
    };
    let m = local.order();
    let hp = h.map_field(f, |c| f.from_rational(c).unwrap_or(0));
    let h_loc = hp.taylor_shift(&w_p);
    let d = local.to_d_form();
    let d_head = d.last().cloned().unwrap_or_else(|| Poly::zero(f));
    let k = d_head.multiplicity_of(&h_loc);
    // divide by x^{M-K} and C = (x^K f0)(-w_p), then return to w = x + w_p;
    // f0 carries the power of w of the θ_w head, so C is the leading Taylor
    // coefficient at w = 0
    let neg_wp = f.neg(&w_p);
    let xk_f0 = local.head().shift_up(k).taylor_shift(&neg_wp);
    let c = xk_f0.valuation().map(|v| xk_f0.coeff(v)).ok_or(LocalError::NoAnnihilator(m))?;
    let c_inv = f.inv(&c).ok_or(LocalError::NoAnnihilator(m))?;
    let xk = Poly::monomial(f, m.saturating_sub(k), 1);
    let divided: Option<Vec<Poly<PrimeField>>> = d
        .iter()
        .map(|b| b.div_exact(&xk).map(|q| q.scale(&c_inv).taylor_shift(&neg_wp)))
        .collect();
    let operator = match divided {
        Some(dw) => ThetaOp::from_d_form(f, &dw).0.strip_w(),
        None => {
            let dw: Vec<_> = d.iter().map(|b| b.taylor_shift(&neg_wp)).collect();
            ThetaOp::from_d_form(f, &dw).0.strip_w()
        }
    };
    Ok(AccidentalFactor { w_p, k, local, operator: b2_normal_form(&operator) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalgebra::{multiply, right_divide};
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn check_zero<F: Field>(op: &ThetaOp<F>, s: &LogSolution<F>) -> bool {
        let local = op;
        apply_log(local, s).iter().all(|p| p.iter().all(|c| op.field.is_zero(c)))
    }

    #[test]
    fn double_root_theta_squared() {
        let op = ThetaOp::from_ints(Rationals, &[&[0], &[0], &[1]]);
        let ind = indicial(&op, &Center::Point(q(0, 1))).unwrap();
        assert_eq!(ind.exponents, vec![(q(0, 1), 2)]);
        let b = frobenius_solve(&op, &Center::Point(q(0, 1)), 4, 10).unwrap();
        assert_eq!(b.solutions.len(), 2);
        assert_eq!(b.scheme.blocks, vec![1]);
        let depths: Vec<usize> = b.solutions.iter().map(|s| s.depth()).collect();
        assert!(depths.contains(&1));
    }

    #[test]
    fn theta_cubed_is_bl2() {
        let op = ThetaOp::from_ints(Rationals, &[&[0], &[0], &[0], &[1]]);
        let b = frobenius_solve(&op, &Center::Point(q(0, 1)), 4, 10).unwrap();
        assert_eq!(b.scheme.blocks, vec![2]);
        let sol = b.solutions.iter().find(|s| s.depth() == 2).unwrap();
        // ln^2(x) with plain powers: S_2 = 1/2 from the divided-power unit
        assert_eq!(sol.parts[2][0], q(1, 2));
        assert!(check_zero(&b.local_op, sol));
        assert!(matches!(
            frobenius_solve(&op, &Center::Point(q(0, 1)), 1, 10),
            Err(LocalError::DepthBudgetExceeded(1))
        ));
    }

    #[test]
    fn pole_at_one_half() {
        // (1 - 2w)θ - 2w annihilates 1/(1 - 2w)
        let op = ThetaOp::from_ints(Rationals, &[&[0, -2], &[1, -2]]);
        let ind = indicial(&op, &Center::Point(q(1, 2))).unwrap();
        assert_eq!(ind.exponents, vec![(q(-1, 1), 1)]);
        assert!(ind.frame.singular);
    }

    #[test]
    fn planted_exponent_minus_seven_quarters() {
        // x = w - 1/4; annihilator of x^{-7/4}/(1 - x) in x, moved to w
        let x_op = ThetaOp::from_theta_poly(&Poly::from_ints(&[7, 4]))
            .mul_w_poly(&Poly::from_ints(&[1, -1]))
            .sub(&ThetaOp::from_w_poly(&Poly::from_ints(&[0, 4])));
        let w_op = x_op.recenter(&q(-1, 4));
        let ind = indicial(&w_op, &Center::Point(q(1, 4))).unwrap();
        assert!(ind.exponents.iter().any(|(e, _)| *e == q(-7, 4)));
    }

    #[test]
    fn irrational_center_not_computable() {
        let op = ThetaOp::from_ints(Rationals, &[&[0], &[1, 3, 4]]);
        let c = Center::Algebraic(Poly::from_ints(&[1, 3, 4]));
        assert_eq!(indicial(&op, &c).unwrap_err(), LocalError::NotComputable);
    }

    #[test]
    fn resonant_basis_annihilated() {
        // exponents 0 and 2 with a log forced at the resonance
        let op = ThetaOp::from_ints(Rationals, &[&[0, 3, 1], &[-2, 1], &[1, -1]]);
        let b = frobenius_solve(&op, &Center::Point(q(0, 1)), 4, 30).unwrap();
        assert_eq!(b.solutions.len(), 2);
        for s in &b.solutions {
            assert!(check_zero(&b.local_op, s), "{}", s.to_text());
        }
    }

    #[test]
    fn mod_p_basis_and_text_roundtrip() {
        let f = PrimeField::new(101).unwrap();
        let op = ThetaOp::from_ints(f, &[&[0, 3, 1], &[-2, 1], &[1, -1]]);
        let b = frobenius_solve(&op, &Center::ModP(0), 4, 40).unwrap();
        assert_eq!(b.solutions.len(), 2);
        for s in &b.solutions {
            assert!(check_zero(&b.local_op, s));
            let back = LogSolution::from_text(f, &s.to_text()).unwrap();
            assert_eq!(&back, s);
            assert_eq!(read_logsol(&s.to_text()).unwrap(), AnyLogSolution::Prime(s.clone()));
        }
    }

    #[test]
    fn product_keeps_right_factor_solutions() {
        // right factor with solution 1/(1-w)^2; left factor singular at 1/3 only
        let right = ThetaOp::from_ints(Rationals, &[&[0, -2], &[1, -1]]);
        let left = ThetaOp::from_ints(Rationals, &[&[0, 1], &[1, -3]]);
        let l = multiply(&left, &right);
        let b = frobenius_solve(&l, &Center::Point(q(0, 1)), 4, 40).unwrap();
        assert_eq!(b.solutions.len(), l.order());
        let found = b.solutions.iter().filter_map(|s| probe_right_factor(&l, s, 1, None)).next().unwrap();
        let div = right_divide(&l, &found).unwrap();
        assert!(div.divides());
        // at 1/3 the left factor carries the singularity
        let at = frobenius_solve(&l, &Center::Point(q(1, 3)), 4, 40).unwrap();
        let left_only = frobenius_solve(&left, &Center::Point(q(1, 3)), 4, 40).unwrap();
        let mut joined = left_only.scheme.blocks.clone();
        joined.extend(std::iter::repeat(0).take(l.order() - left.order()));
        assert_eq!(at.scheme.blocks, BlockScheme::new("", joined).blocks);
    }

    #[test]
    fn split_roots_at_32719() {
        let f = PrimeField::new(32719).unwrap();
        let h = Poly::from_ints(&[1, 3, 4]);
        assert_eq!(split_roots(&h, f).unwrap(), vec![8973, 31925]);
        // -7 is a non-residue mod 5, so h is irreducible there
        let f3 = PrimeField::new(5).unwrap();
        assert!(split_roots(&h, f3).is_none());
    }
}
