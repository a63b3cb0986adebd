//! Connection matching between local Frobenius frames and continuation
//! along paths with prescribed windings.
//!
//! A local solution `x^q Σ S_ℓ(x) ln^ℓ x`, with `x = w - c`, is evaluated at
//! a real `x` together with a chosen value of `ln x = ln|x| + iπh`; the
//! integer `h` (half-turns) fixes the branch. Arriving at a center from the
//! left uses `h = 1`, from the right `h = 0`. Winding `n` times around a
//! singular center subtracts `n` from `h`, which is the rule
//! `ln t → ln|t| - iπn` for `t = c - w`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ContError;
use crate::ffcore::{Matrix, Poly, QSeries};
use crate::field::{parse_rational, Rationals};
use crate::localfrob::{frobenius_solve, Center, FrobeniusBasis, LogSolution, DEFAULT_DEPTH_BUDGET};
use crate::theta::ThetaOp;

use super::bigfloat::{complex_solve, rational_to_f64 as ratio_to_f64, BigFloat, Complex};

/// Exact derivative of `x^q Σ_{n,ℓ} a_{n,ℓ} x^n ln^ℓ x`; the result has
/// exponent `q - 1` and the same layout.
pub fn derive_parts(q: &BigRational, parts: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let depth = parts.len();
    let count = parts.first().map_or(0, Vec::len);
    (0..depth)
        .map(|l| {
            (0..count)
                .map(|n| {
                    let mut v = &parts[l][n] * (q + BigRational::from_integer(BigInt::from(n)));
                    if l + 1 < depth {
                        v += &parts[l + 1][n] * BigRational::from_integer(BigInt::from(l + 1));
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// Values of `d^k/dx^k` of a log solution for `k < derivs` at the real point
/// `x`, with `ln x` taken as `log_x`. The truncation tail is estimated from
/// the last terms and added to the error tags.
pub fn eval_log_solution(
    sol: &LogSolution<Rationals>,
    x: &BigFloat,
    log_x: &Complex,
    derivs: usize,
) -> Vec<Complex> {
    let prec = x.prec();
    let mut q = sol.exponent.clone();
    let mut parts = sol.parts.clone();
    let mut out = Vec::with_capacity(derivs);
    let lx = x.abs().log10_abs();
    for k in 0..derivs {
        if k > 0 {
            parts = derive_parts(&q, &parts);
            q -= BigRational::one();
        }
        let count = parts.first().map_or(0, Vec::len);
        let mut acc = Complex::zero(prec);
        let mut lpow = Complex::one(prec);
        let mut tail = f64::NEG_INFINITY;
        for part in &parts {
            let mut s = BigFloat::zero(prec);
            for c in part.iter().rev() {
                s = s.mul(x).add(&BigFloat::from_rational(c, prec));
            }
            for n in count.saturating_sub(3)..count {
                let c = &part[n];
                if !c.is_zero() {
                    let t = BigFloat::from_rational(c, 16).log10_abs() + n as f64 * lx + lpow.log10_abs();
                    tail = tail.max(t);
                }
            }
            acc = acc.add(&lpow.mul(&Complex::real(s)));
            lpow = lpow.mul(log_x);
        }
        let xq = log_x.scale(&BigFloat::from_rational(&q, prec)).exp();
        let v = acc.mul(&xq);
        // geometric tail beyond the stored terms, with a safety factor of 10
        let t = tail + 1.0 + xq.log10_abs();
        out.push(Complex::new(v.re.add_error(t), v.im.add_error(t)));
    }
    out
}

/// Complex roots of a real polynomial (Durand-Kerner in `f64`).
pub fn poly_roots_f64(c: &[f64]) -> Vec<(f64, f64)> {
    let mut c: Vec<f64> = c.to_vec();
    while c.len() > 1 && c.last() == Some(&0.0) {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return vec![];
    }
    let lead = c[deg];
    let a: Vec<f64> = c.iter().map(|v| v / lead).collect();
    let mul = |x: (f64, f64), y: (f64, f64)| (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
    let eval = |z: (f64, f64)| {
        let mut acc = (0.0, 0.0);
        for v in a.iter().rev() {
            acc = mul(acc, z);
            acc.0 += v;
        }
        acc
    };
    let scale = 1.0 + a.iter().take(deg).map(|v| v.abs()).fold(0.0, f64::max);
    let mut z: Vec<(f64, f64)> = (0..deg)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            (scale * 0.5 * t.cos(), scale * 0.5 * t.sin())
        })
        .collect();
    for _ in 0..2000 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let mut den = (1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    den = mul(den, (z[i].0 - z[j].0, z[i].1 - z[j].1));
                }
            }
            let num = eval(z[i]);
            let d2 = den.0 * den.0 + den.1 * den.1;
            if d2 == 0.0 {
                continue;
            }
            let step = ((num.0 * den.0 + num.1 * den.1) / d2, (num.1 * den.0 - num.0 * den.1) / d2);
            z[i] = (z[i].0 - step.0, z[i].1 - step.1);
            moved = moved.max(step.0.hypot(step.1));
        }
        if moved < 1e-15 * scale {
            break;
        }
    }
    z
}

/// Finite singular points of an operator: roots of its `d/dw` head, the
/// rational ones exact and deflated before the numeric search.
pub fn singular_points(op: &ThetaOp<Rationals>) -> Vec<(f64, f64)> {
    let mut head = op.to_d_form().pop().unwrap_or_else(|| Poly::zero(Rationals));
    let mut out = Vec::new();
    for (r, mult) in head.rational_roots() {
        let lin = Poly::new(Rationals, vec![-r.clone(), BigRational::one()]);
        for _ in 0..mult {
            head = head.div_exact(&lin).expect("exact root");
        }
        out.push((ratio_to_f64(&r), 0.0));
    }
    let c: Vec<f64> = head.c.iter().map(ratio_to_f64).collect();
    out.extend(poly_roots_f64(&c));
    out
}

/// Distance from `c` to the nearest singular point other than `c` itself.
pub fn disk_radius(op: &ThetaOp<Rationals>, c: f64) -> f64 {
    singular_points(op)
        .into_iter()
        .map(|(re, im)| (re - c).hypot(im))
        .filter(|d| *d > 1e-9)
        .fold(f64::INFINITY, f64::min)
}

/// Connection data between two frames: `y_{A,i} = Σ_j matrix[i][j] y_{B,j}`
/// near the midpoint, with the stated log branches.
#[derive(Clone, Debug)]
pub struct Connection {
    pub names_a: Vec<String>,
    pub names_b: Vec<String>,
    pub matrix: Vec<Vec<Complex>>,
    pub midpoint: BigRational,
    /// Largest `|W_B c - v|` over all matched values and derivatives.
    pub residual: f64,
    /// Digits guaranteed by the error tags of the weakest entry.
    pub achieved_digits: f64,
}

/// Matching options.
#[derive(Clone, Debug)]
pub struct MatchOptions {
    pub digits: usize,
    /// Series terms per frame; chosen from the disk ratios when `None`.
    pub terms: Option<usize>,
    pub depth_budget: usize,
    pub midpoint: Option<BigRational>,
}

impl MatchOptions {
    pub fn new(digits: usize) -> Self {
        MatchOptions { digits, terms: None, depth_budget: DEFAULT_DEPTH_BUDGET, midpoint: None }
    }
}

/// Cap on automatically chosen series lengths.
pub const MAX_AUTO_TERMS: usize = 3000;

fn terms_for(ratio: f64, digits: usize) -> usize {
    let per = -ratio.log10();
    if !(per > 0.0) {
        return MAX_AUTO_TERMS;
    }
    (((digits + 15) as f64 / per).ceil() as usize + 10).min(MAX_AUTO_TERMS)
}

/// Point between `a` and `b` splitting the segment in the ratio of the disk
/// radii, so both expansions converge at the same geometric rate.
pub fn default_midpoint(a: &BigRational, b: &BigRational, ra: f64, rb: f64) -> BigRational {
    let frac = if ra.is_finite() && rb.is_finite() {
        ra / (ra + rb)
    } else if ra.is_finite() {
        0.5_f64.min(ra / (b - a).abs().to_f64().unwrap_or(1.0) * 0.5)
    } else {
        0.5
    };
    let frac = BigRational::from_float(frac).unwrap_or_else(|| BigRational::new(1.into(), 2.into()));
    // limit the height of the midpoint
    let frac = (frac * BigRational::from_integer(1_000_000.into())).round() / BigRational::from_integer(1_000_000.into());
    a + (b - a) * frac
}

fn check_branch(x: &BigRational, half_turns: i64) -> Result<(), ContError> {
    let odd = half_turns.rem_euclid(2) == 1;
    if x.is_negative() != odd {
        return Err(ContError::FrameOutOfRange(format!(
            "branch with {half_turns} half-turns does not fit the side of x = {x}"
        )));
    }
    Ok(())
}

/// Matches two exact bases at `m`. `particular` optionally adds one row:
/// the coefficients `c` with `p_A = p_B + Σ c_j y_{B,j}`.
#[allow(clippy::too_many_arguments)]
pub fn match_bases(
    basis_a: &FrobeniusBasis<Rationals>,
    a: &BigRational,
    half_turns_a: i64,
    basis_b: &FrobeniusBasis<Rationals>,
    b: &BigRational,
    half_turns_b: i64,
    m: &BigRational,
    digits: usize,
    particular: Option<(&LogSolution<Rationals>, &LogSolution<Rationals>)>,
) -> Result<Connection, ContError> {
    let r = basis_b.solutions.len();
    if basis_a.solutions.len() != r || r == 0 {
        return Err(ContError::DiskMismatch);
    }
    let (xa, xb) = (m - a, m - b);
    check_branch(&xa, half_turns_a)?;
    check_branch(&xb, half_turns_b)?;
    let wp = digits + 30;
    let (fa, fb) = (BigFloat::from_rational(&xa, wp), BigFloat::from_rational(&xb, wp));
    let (la, lb) = (Complex::ln_real(&fa, half_turns_a)?, Complex::ln_real(&fb, half_turns_b)?);
    // columns of W_B are the value-and-derivative vectors of y_{B,j}
    let cols_b: Vec<Vec<Complex>> = basis_b.solutions.iter().map(|s| eval_log_solution(s, &fb, &lb, r)).collect();
    let w: Vec<Vec<Complex>> = (0..r).map(|k| (0..r).map(|j| cols_b[j][k].clone()).collect()).collect();
    let mut rhs_cols: Vec<Vec<Complex>> = basis_a.solutions.iter().map(|s| eval_log_solution(s, &fa, &la, r)).collect();
    if let Some((pa, pb)) = particular {
        let va = eval_log_solution(pa, &fa, &la, r);
        let vb = eval_log_solution(pb, &fb, &lb, r);
        rhs_cols.push(va.iter().zip(&vb).map(|(x, y)| x.sub(y)).collect());
    }
    let rhs: Vec<Vec<Complex>> = (0..r).map(|k| rhs_cols.iter().map(|c| c[k].clone()).collect()).collect();
    let x = complex_solve(&w, &rhs).ok_or(ContError::IllConditioned { achieved: 0.0 })?;
    let mut residual: f64 = 0.0;
    for k in 0..r {
        for (i, col) in rhs_cols.iter().enumerate() {
            let mut acc = Complex::zero(wp);
            for j in 0..r {
                acc = acc.add(&w[k][j].mul(&x[j][i]));
            }
            let d = acc.sub(&col[k]);
            residual = residual.max(10f64.powf(d.log10_abs()));
        }
    }
    let matrix: Vec<Vec<Complex>> = (0..rhs_cols.len()).map(|i| (0..r).map(|j| x[j][i].clone()).collect()).collect();
    let achieved = matrix
        .iter()
        .flatten()
        .filter(|c| !c.is_negligible())
        .map(|c| {
            let scale = c.log10_abs();
            scale - c.err_log10()
        })
        .fold(f64::INFINITY, f64::min)
        .min(digits as f64 + 30.0);
    let achieved = if achieved.is_finite() { achieved } else { 0.0 };
    if achieved < digits as f64 || residual > 10f64.powf(-(digits as f64)) {
        return Err(ContError::IllConditioned { achieved });
    }
    let mut names_a: Vec<String> = basis_a.solutions.iter().map(|s| s.name.clone()).collect();
    if particular.is_some() {
        names_a.push("particular".into());
    }
    Ok(Connection {
        names_a,
        names_b: basis_b.solutions.iter().map(|s| s.name.clone()).collect(),
        matrix: matrix.into_iter().map(|row| row.into_iter().map(|c| round_complex(&c, digits)).collect()).collect(),
        midpoint: m.clone(),
        residual,
        achieved_digits: achieved,
    })
}

fn round_complex(c: &Complex, digits: usize) -> Complex {
    Complex::new(c.re.with_prec(digits + 10), c.im.with_prec(digits + 10))
}

fn basis_at(
    op: &ThetaOp<Rationals>,
    c: &BigRational,
    terms: usize,
    depth_budget: usize,
) -> Result<FrobeniusBasis<Rationals>, ContError> {
    let basis = frobenius_solve(op, &Center::Point(c.clone()), depth_budget, terms)?;
    if basis.solutions.len() != op.order() {
        return Err(ContError::DiskMismatch);
    }
    Ok(basis)
}

/// Connection matrix from the frame at `a` to the frame at `b`. The branches
/// default to the principal ones: `ln x` real on the positive side and
/// `ln|x| + iπ` on the negative side.
pub fn match_solutions(
    op: &ThetaOp<Rationals>,
    a: &BigRational,
    b: &BigRational,
    opts: &MatchOptions,
) -> Result<Connection, ContError> {
    let (af, bf) = (ratio_to_f64(a), ratio_to_f64(b));
    let (ra, rb) = (disk_radius(op, af), disk_radius(op, bf));
    let m = opts.midpoint.clone().unwrap_or_else(|| default_midpoint(a, b, ra, rb));
    let mf = ratio_to_f64(&m);
    let (da, db) = ((mf - af).abs(), (mf - bf).abs());
    if da >= ra || db >= rb || m == *a || m == *b {
        return Err(ContError::DiskMismatch);
    }
    let terms = opts.terms.unwrap_or_else(|| terms_for((da / ra).max(db / rb), opts.digits));
    let ba = basis_at(op, a, terms, opts.depth_budget)?;
    let bb = basis_at(op, b, terms, opts.depth_budget)?;
    let ha = i64::from((&m - a).is_negative());
    let hb = i64::from((&m - b).is_negative());
    match_bases(&ba, a, ha, &bb, b, hb, &m, opts.digits, None)
}

/// Exact coordinates of a series in `w - c` in a local basis at `c`; the
/// series must lie in the span of the basis.
pub fn coords_from_series(basis: &FrobeniusBasis<Rationals>, s: &QSeries) -> Result<Vec<BigRational>, ContError> {
    use std::collections::BTreeMap;
    let mut keys: BTreeMap<(usize, BigRational), ()> = BTreeMap::new();
    let limit = basis
        .solutions
        .iter()
        .map(|y| &y.exponent + BigRational::from_integer(BigInt::from(y.count())))
        .chain(std::iter::once(BigRational::from_integer(BigInt::from(s.order()))))
        .min()
        .unwrap_or_else(BigRational::zero);
    let entry = |y: &LogSolution<Rationals>, l: usize, e: &BigRational| -> BigRational {
        if l >= y.parts.len() {
            return BigRational::zero();
        }
        let d = e - &y.exponent;
        if !d.is_integer() || d.is_negative() {
            return BigRational::zero();
        }
        let n = d.to_integer().to_usize().unwrap_or(usize::MAX);
        y.parts[l].get(n).cloned().unwrap_or_else(BigRational::zero)
    };
    for y in &basis.solutions {
        for (l, part) in y.parts.iter().enumerate() {
            for (n, c) in part.iter().enumerate() {
                let e = &y.exponent + BigRational::from_integer(BigInt::from(n));
                if !c.is_zero() && e < limit {
                    keys.insert((l, e), ());
                }
            }
        }
    }
    for n in s.offset.max(0)..s.order() {
        let e = BigRational::from_integer(BigInt::from(n));
        if !s.coeff(n).is_zero() && e < limit {
            keys.insert((0, e), ());
        }
    }
    let rows: Vec<Vec<BigRational>> = keys
        .keys()
        .map(|(l, e)| {
            let mut row: Vec<BigRational> = basis.solutions.iter().map(|y| entry(y, *l, e)).collect();
            let sv = if *l == 0 && e.is_integer() {
                let n = e.to_integer().to_i64().unwrap_or(i64::MAX);
                if n >= 0 && n < s.order() {
                    s.coeff(n)
                } else {
                    BigRational::zero()
                }
            } else {
                BigRational::zero()
            };
            row.push(-sv);
            row
        })
        .collect();
    let ker = Matrix::from_rows(Rationals, rows).nullspace();
    if ker.len() != 1 || ker[0].last().map_or(true, |v| v.is_zero()) {
        return Err(ContError::DiskMismatch);
    }
    let last = ker[0].last().unwrap().clone();
    Ok(ker[0][..basis.solutions.len()].iter().map(|v| v / &last).collect())
}

/// One leg: a center visited with a winding count.
#[derive(Clone, Debug, PartialEq)]
pub struct PathLeg {
    pub center: BigRational,
    pub param: String,
    pub winding: i64,
}

/// Ordered legs such as `"1/4:n=3;0.381966:m=1"`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationPath {
    pub legs: Vec<PathLeg>,
}

impl ContinuationPath {
    pub fn parse(s: &str) -> Result<Self, ContError> {
        let mut legs = Vec::new();
        for item in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let (c, w) = item
                .split_once(':')
                .ok_or_else(|| ContError::FrameOutOfRange(format!("leg `{item}` needs `center:param=winding`")))?;
            let center = parse_rational(c.trim()).map_err(|e| ContError::FrameOutOfRange(e.to_string()))?;
            let (param, val) = w
                .split_once('=')
                .ok_or_else(|| ContError::FrameOutOfRange(format!("leg `{item}` needs `param=winding`")))?;
            let winding = val
                .trim()
                .parse::<i64>()
                .map_err(|_| ContError::FrameOutOfRange(format!("bad winding `{val}`")))?;
            legs.push(PathLeg { center, param: param.trim().to_string(), winding });
        }
        if legs.is_empty() {
            return Err(ContError::FrameOutOfRange("empty path".into()));
        }
        Ok(ContinuationPath { legs })
    }

    /// The same path with every winding negated.
    pub fn reversed_windings(&self) -> Self {
        ContinuationPath {
            legs: self.legs.iter().map(|l| PathLeg { winding: -l.winding, ..l.clone() }).collect(),
        }
    }

    /// The path with the winding of parameter `param` replaced.
    pub fn with_winding(&self, param: &str, value: i64) -> Self {
        ContinuationPath {
            legs: self
                .legs
                .iter()
                .map(|l| if l.param == param { PathLeg { winding: value, ..l.clone() } } else { l.clone() })
                .collect(),
        }
    }
}

impl fmt::Display for ContinuationPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.legs.iter().map(|l| format!("{}:{}={}", l.center, l.param, l.winding)).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Leading singular behaviour carried by one basis element at the final
/// center.
#[derive(Clone, Debug)]
pub struct SingularPart {
    pub name: String,
    pub exponent: BigRational,
    pub depth: usize,
    /// Coefficient of the basis element.
    pub coefficient: Complex,
    /// `coefficient · e^{iπqh}`: the factor of `|x|^q` on the arrival side.
    pub amplitude: Complex,
}

/// Result of [`continue_along_path`].
#[derive(Clone, Debug)]
pub struct PathResult {
    pub end: BigRational,
    /// Half-turns of `ln x` on the arrival side of the final center.
    pub arrival_half_turns: i64,
    pub basis: FrobeniusBasis<Rationals>,
    pub coefficients: Vec<Complex>,
    pub singular: Vec<SingularPart>,
    pub achieved_digits: f64,
    pub midpoints: Vec<BigRational>,
}

fn is_singular_center(op: &ThetaOp<Rationals>, c: &BigRational) -> bool {
    let head = op.to_d_form().pop().unwrap_or_else(|| Poly::zero(Rationals));
    head.eval(c).is_zero()
}

/// Continues the solution with coordinates `start_coords` in the basis at
/// `start` through the legs of `path` to the frame at `end`, matching at
/// disk-balanced midpoints. Winding `n` at a singular center subtracts `n`
/// half-turns from `ln x`; ordinary waypoints ignore their winding.
pub fn continue_along_path(
    op: &ThetaOp<Rationals>,
    start: &BigRational,
    start_coords: &[Complex],
    path: &ContinuationPath,
    end: &BigRational,
    digits: usize,
) -> Result<PathResult, ContError> {
    let mut centers: Vec<(BigRational, i64, bool)> = vec![(start.clone(), 0, is_singular_center(op, start))];
    for leg in &path.legs {
        let sing = is_singular_center(op, &leg.center);
        if sing && leg.winding % 2 == 0 {
            return Err(ContError::EvenWinding(leg.winding));
        }
        centers.push((leg.center.clone(), leg.winding, sing));
    }
    centers.push((end.clone(), 0, true));
    // per-hop precision grows with the number of hops
    let hop_digits = digits + 10 * centers.len();
    let mut coords: Vec<Complex> = start_coords.to_vec();
    let mut out_half_turns: i64 = 0;
    let mut basis = basis_at(op, start, terms_for(0.5, hop_digits), DEFAULT_DEPTH_BUDGET)?;
    let mut achieved = f64::INFINITY;
    let mut midpoints = Vec::new();
    let mut arrival = 0;
    for k in 1..centers.len() {
        let (a, _, _) = &centers[k - 1];
        let (b, winding, singular) = &centers[k];
        let (af, bf) = (ratio_to_f64(a), ratio_to_f64(b));
        let (ra, rb) = (disk_radius(op, af), disk_radius(op, bf));
        let m = default_midpoint(a, b, ra, rb);
        let mf = ratio_to_f64(&m);
        let ratio = ((mf - af).abs() / ra).max((mf - bf).abs() / rb);
        if ratio >= 1.0 {
            return Err(ContError::DiskMismatch);
        }
        let terms = terms_for(ratio, hop_digits);
        if basis.solutions.first().map_or(0, |s| s.count()) < terms {
            basis = basis_at(op, a, terms, DEFAULT_DEPTH_BUDGET)?;
        }
        let next = basis_at(op, b, terms, DEFAULT_DEPTH_BUDGET)?;
        // leaving a: the branch on the side of m
        let side_a = i64::from((&m - a).is_negative());
        let ha = if (out_half_turns - side_a).rem_euclid(2) == 0 { out_half_turns } else { out_half_turns + 1 };
        let hb = i64::from((&m - b).is_negative());
        let conn = match_bases(&basis, a, ha, &next, b, hb, &m, hop_digits, None)?;
        achieved = achieved.min(conn.achieved_digits);
        let r = next.solutions.len();
        coords = (0..r)
            .map(|j| {
                coords
                    .iter()
                    .zip(&conn.matrix)
                    .fold(Complex::zero(hop_digits + 10), |acc, (c, row)| acc.add(&c.mul(&row[j])))
            })
            .collect();
        arrival = hb;
        out_half_turns = if *singular { hb - winding } else { hb };
        basis = next;
        midpoints.push(m);
    }
    let prec = hop_digits + 10;
    let singular = basis
        .solutions
        .iter()
        .zip(&coords)
        .filter(|(s, _)| !s.exponent.is_integer() || s.depth() > 0)
        .map(|(s, c)| {
            let phase = Complex::new(
                BigFloat::zero(prec),
                BigFloat::pi(prec).mul(&BigFloat::from_rational(&s.exponent, prec)).mul_i64(arrival),
            )
            .exp();
            SingularPart {
                name: s.name.clone(),
                exponent: s.exponent.clone(),
                depth: s.depth(),
                coefficient: c.clone(),
                amplitude: c.mul(&phase),
            }
        })
        .collect();
    Ok(PathResult {
        end: end.clone(),
        arrival_half_turns: arrival,
        basis,
        coefficients: coords,
        singular,
        achieved_digits: achieved,
        midpoints,
    })
}

/// Runs [`continue_along_path`] for each value of the winding `param`.
pub fn winding_sweep(
    op: &ThetaOp<Rationals>,
    start: &BigRational,
    start_coords: &[Complex],
    path: &ContinuationPath,
    param: &str,
    values: &[i64],
    end: &BigRational,
    digits: usize,
) -> Result<Vec<(i64, PathResult)>, ContError> {
    values
        .iter()
        .map(|&n| continue_along_path(op, start, start_coords, &path.with_winding(param, n), end, digits).map(|r| (n, r)))
        .collect()
}

/// Text table of singular amplitudes per winding value. Values print only
/// their guaranteed digits (at most `digits`); negligible values print `0`.
pub fn sweep_table(param: &str, rows: &[(i64, PathResult)], digits: usize) -> String {
    let mut out = String::new();
    for (n, r) in rows {
        for s in &r.singular {
            out.push_str(&format!(
                "{param}={n}\t{}\texponent={}\tdepth={}\tamplitude={} {}i\n",
                s.name,
                s.exponent,
                s.depth,
                fmt_value(&s.amplitude.re, digits),
                signed(fmt_value(&s.amplitude.im, digits))
            ));
        }
    }
    out
}

/// Guaranteed digits of `x`, at most `digits`; `0` when negligible.
pub fn fmt_value(x: &BigFloat, digits: usize) -> String {
    if x.is_negligible() {
        return "0".to_string();
    }
    x.to_sci((x.digits().floor() as usize).clamp(1, digits.max(1)))
}

fn signed(s: String) -> String {
    if s.starts_with('-') {
        s
    } else {
        format!("+{s}")
    }
}

/// Least-squares fit of `Σ_k a_k n^k` (`k <= degree`) to `(n, value)` pairs.
pub fn fit_polynomial_in_n(points: &[(i64, Complex)], degree: usize) -> Option<Vec<Complex>> {
    let prec = points.first()?.1.re.prec();
    let k = degree + 1;
    let mut a = vec![vec![Complex::zero(prec); k]; k];
    let mut b = vec![vec![Complex::zero(prec)]; k];
    for (n, v) in points {
        let pw: Vec<BigFloat> = (0..k).map(|e| BigFloat::from_i64(n.pow(e as u32), prec)).collect();
        for i in 0..k {
            b[i][0] = b[i][0].add(&v.scale(&pw[i]));
            for j in 0..k {
                a[i][j] = a[i][j].add(&Complex::real(pw[i].mul(&pw[j])));
            }
        }
    }
    complex_solve(&a, &b).map(|x| x.into_iter().map(|r| r[0].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::elliptic::ellip_ke_quadrature;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn derivative_of_log_parts() {
        // x^{1/2}(1 + 2x) ln x
        let parts = vec![vec![q(0, 1), q(0, 1)], vec![q(1, 1), q(2, 1)]];
        let d = derive_parts(&q(1, 2), &parts);
        // d/dx = x^{-1/2}[(1/2 + 3x) ln x + (1 + 2x)]
        assert_eq!(d, vec![vec![q(1, 1), q(2, 1)], vec![q(1, 2), q(3, 1)]]);
    }

    #[test]
    fn roots_of_cubic() {
        let r = poly_roots_f64(&[-1.0, 7.0, -5.0, 4.0]);
        let real = r.iter().filter(|z| z.1.abs() < 1e-9).map(|z| z.0).next().unwrap();
        assert!((real - 0.158_53).abs() < 1e-4);
    }

    #[test]
    fn polynomial_solutions_connect_triangularly() {
        let op = ThetaOp::from_ints(Rationals, &[&[0], &[-1], &[1]]);
        let conn = match_solutions(&op, &q(0, 1), &q(1, 1), &MatchOptions { terms: Some(8), ..MatchOptions::new(30) })
            .unwrap();
        // 1 = y_B0 and w = y_B0 + y_B1 with y_B1 = w - 1
        let want = [[1, 0], [1, 1]];
        for i in 0..2 {
            for j in 0..2 {
                let c = &conn.matrix[i][j];
                assert!(c.re.agrees_with(&BigFloat::from_i64(want[i][j], 40), -30.0));
                assert!(c.im.is_negligible() || c.im.log10_abs() < -30.0);
            }
        }
    }

    #[test]
    fn gauss_log_coefficient_is_minus_one_over_pi() {
        // 4θ² - w(2θ+1)² annihilates 2F1(1/2,1/2;1;w)
        let op = ThetaOp::from_ints(Rationals, &[&[0, -1], &[0, -4], &[4, -4]]);
        let conn = match_solutions(&op, &q(0, 1), &q(1, 1), &MatchOptions::new(40)).unwrap();
        let basis_b = frobenius_solve(&op, &Center::Point(q(1, 1)), 4, 10).unwrap();
        let log_idx = basis_b.solutions.iter().position(|s| s.depth() == 1).unwrap();
        // the analytic solution at 0 is the first basis element
        let c = &conn.matrix[0][log_idx];
        let lead = &basis_b.solutions[log_idx].parts[1][0];
        let got = c.re.mul(&BigFloat::from_rational(lead, 60));
        let want = BigFloat::pi(60).recip().unwrap().neg();
        assert!(got.agrees_with(&want, -40.0), "{}", got.to_sci(45));
        // oracle value of F at the midpoint: (2/π) K(√w)
        let m = BigFloat::from_rational(&conn.midpoint, 60);
        let (k, _) = ellip_ke_quadrature(&m.sqrt().unwrap(), 600);
        let f = k.mul_i64(2).div(&BigFloat::pi(60)).unwrap();
        let basis_a = frobenius_solve(&op, &Center::Point(q(0, 1)), 4, 400).unwrap();
        let v = eval_log_solution(&basis_a.solutions[0], &m, &Complex::ln_real(&m, 0).unwrap(), 1);
        assert!(v[0].re.agrees_with(&f, -40.0));
    }

    #[test]
    fn path_parsing() {
        let p = ContinuationPath::parse("1/4:n=3;0.381966:m=1").unwrap();
        assert_eq!(p.legs.len(), 2);
        assert_eq!(p.legs[0], PathLeg { center: q(1, 4), param: "n".into(), winding: 3 });
        assert_eq!(p.legs[1].center, q(190983, 500000));
        assert_eq!(p.to_string(), "1/4:n=3;190983/500000:m=1");
        assert_eq!(p.reversed_windings().legs[0].winding, -3);
        assert!(ContinuationPath::parse("1/4").is_err());
        assert!(ContinuationPath::parse("").is_err());
    }
}
