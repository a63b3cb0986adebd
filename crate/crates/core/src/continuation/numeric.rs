//! Series diagnostics and transforms: Euler transforms, ratio tests,
//! continued-fraction detection of rational limits, amplitude fits,
//! matching-point balance, denominator growth and variable substitution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::ContError;
use crate::ffcore::{Poly, QSeries, Series};
use crate::field::{Field, Rationals};

use super::bigfloat::{complex_solve, BigFloat, Complex};

/// Composition with the Möbius map `y → y/(1 - βy)`:
/// `[y^m] = Σ_{n=1}^m c_n C(m-1, n-1) β^{m-n}` for `m >= 1`.
/// The inverse transform is the same call with `-β`.
pub fn euler_transform<F: Field>(s: &Series<F>, beta: &F::E) -> Result<Series<F>, ContError> {
    if s.offset < 0 {
        return Err(ContError::FrameOutOfRange("Euler transform needs a series without negative powers".into()));
    }
    let f = &s.field;
    let c = s.dense_from_zero();
    let len = c.len();
    let mut bpow = vec![f.one()];
    for k in 1..len {
        bpow.push(f.mul(&bpow[k - 1], beta));
    }
    let mut out = Vec::with_capacity(len);
    if len > 0 {
        out.push(c[0].clone());
    }
    // row[k] = C(m-1, k)
    let mut row: Vec<F::E> = vec![f.one()];
    for m in 1..len {
        if m > 1 {
            let mut next = vec![f.one(); m];
            for k in 1..m - 1 {
                next[k] = f.add(&row[k - 1], &row[k]);
            }
            row = next;
        }
        let mut acc = f.zero();
        for n in 1..=m {
            if f.is_zero(&c[n]) {
                continue;
            }
            let t = f.mul(&c[n], &f.mul(&row[n - 1], &bpow[m - n]));
            acc = f.add(&acc, &t);
        }
        out.push(acc);
    }
    Ok(Series::new(f.clone(), &s.var, 0, out))
}

/// `(log10 |c_n|, sign)` pairs from exact coefficients.
pub fn log_magnitudes(c: &[BigRational]) -> Vec<(f64, i8)> {
    c.iter()
        .map(|x| {
            if x.is_zero() {
                (f64::NEG_INFINITY, 0)
            } else {
                let l = crate::reconstruct::ln_abs(x.numer()) - crate::reconstruct::ln_abs(x.denom());
                (l / std::f64::consts::LN_10, if x.is_negative() { -1 } else { 1 })
            }
        })
        .collect()
}

/// `(log10 |c_n|, sign)` pairs from big floats.
pub fn log_magnitudes_float(c: &[BigFloat]) -> Vec<(f64, i8)> {
    c.iter()
        .map(|x| {
            if x.is_exact_zero() {
                (f64::NEG_INFINITY, 0)
            } else {
                (x.log10_abs(), if x.is_negative() { -1 } else { 1 })
            }
        })
        .collect()
}

/// Outcome of a ratio test.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusReport {
    pub radius: f64,
    /// Coefficient `a` of the `a/n` correction in the ratio fit.
    pub trend: f64,
    /// Raw last ratio `|c_n / c_{n+1}|`.
    pub last_ratio: f64,
    pub sign_changes: usize,
    /// Set for sign changes or non-monotone ratios (complex-pair or
    /// negative-axis singularities).
    pub oscillating: bool,
    pub samples: usize,
}

const MIN_RATIO_TERMS: usize = 20;

/// Ratio test on `(log10|c_n|, sign)` data over `window` (default: the
/// second half). Monotone ratios are fit by `R + a/n`; oscillating ratios
/// fall back to a fit of `log|c_n| = -n log R + b log n + c`.
pub fn radius_estimate(c: &[(f64, i8)], window: Option<(usize, usize)>) -> Result<RadiusReport, ContError> {
    let usable = c.iter().filter(|x| x.1 != 0).count();
    if usable < MIN_RATIO_TERMS {
        return Err(ContError::TooFewTerms { need: MIN_RATIO_TERMS, have: usable });
    }
    let (lo, hi) = window.unwrap_or((c.len() / 2, c.len()));
    let hi = hi.min(c.len());
    let mut ratios: Vec<(f64, f64)> = Vec::new();
    for n in lo..hi.saturating_sub(1) {
        let (a, b) = (c[n], c[n + 1]);
        if a.1 != 0 && b.1 != 0 {
            ratios.push((n as f64, 10f64.powf(a.0 - b.0)));
        }
    }
    if ratios.len() < 4 {
        return Err(ContError::TooFewTerms { need: 4, have: ratios.len() });
    }
    let sign_changes = (lo..hi.saturating_sub(1))
        .filter(|&n| c[n].1 != 0 && c[n + 1].1 != 0 && c[n].1 != c[n + 1].1)
        .count();
    let turns = ratios
        .windows(3)
        .filter(|w| {
            let tol = 1e-9 * w[1].1.abs();
            let (d0, d1) = (w[1].1 - w[0].1, w[2].1 - w[1].1);
            d0.abs() > tol && d1.abs() > tol && d0 * d1 < 0.0
        })
        .count();
    let erratic = turns * 4 > ratios.len();
    let (radius, trend) = if erratic {
        let pts: Vec<(f64, f64)> = (lo..hi)
            .filter(|&n| c[n].1 != 0 && n > 0)
            .map(|n| (n as f64, c[n].0 * std::f64::consts::LN_10))
            .collect();
        let basis = |n: f64| vec![n, n.ln(), 1.0];
        let coef = least_squares_f64(&pts, basis);
        ((-coef[0]).exp(), coef[1])
    } else {
        let coef = least_squares_f64(&ratios, |n| vec![1.0, 1.0 / n]);
        (coef[0], coef[1])
    };
    Ok(RadiusReport {
        radius,
        trend,
        last_ratio: ratios.last().unwrap().1,
        sign_changes,
        oscillating: sign_changes > 0 || erratic,
        samples: ratios.len(),
    })
}

/// Ordinary least squares for `y ≈ Σ_k β_k φ_k(x)` via normal equations.
pub fn least_squares_f64(pts: &[(f64, f64)], basis: impl Fn(f64) -> Vec<f64>) -> Vec<f64> {
    let k = basis(pts[0].0).len();
    let mut a = vec![vec![0.0; k]; k];
    let mut b = vec![0.0; k];
    for &(x, y) in pts {
        let phi = basis(x);
        for i in 0..k {
            b[i] += phi[i] * y;
            for j in 0..k {
                a[i][j] += phi[i] * phi[j];
            }
        }
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..k {
            if r != col && a[col][col] != 0.0 {
                let f = a[r][col] / a[col][col];
                for c in col..k {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    (0..k).map(|i| if a[i][i] != 0.0 { b[i] / a[i][i] } else { 0.0 }).collect()
}

/// Continued-fraction quotients of `[lo, hi]` that are common to both ends,
/// followed by a lower bound for the first undetermined quotient
/// (`None` when the expansion terminates). An interval containing exactly
/// one integer at some level is read as terminating at that integer.
fn cf_interval(lo: &BigRational, hi: &BigRational, max_terms: usize) -> (Vec<BigInt>, Option<BigInt>) {
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    let mut q = Vec::new();
    for _ in 0..max_terms {
        let (fl, fh) = (lo.floor(), hi.floor());
        if fl != fh {
            if &fh - &fl == BigRational::one() && (q.is_empty() || fh > BigRational::zero()) {
                q.push(fh.to_integer());
                return (q, None);
            }
            return (q, Some(fl.min(fh).to_integer()));
        }
        q.push(fl.to_integer());
        let (rl, rh) = (&lo - &fl, &hi - &fh);
        if rl.is_zero() || rh.is_zero() {
            if rl.is_zero() && rh.is_zero() {
                return (q, None);
            }
            // one end hits the convergent exactly: the next quotient is unbounded
            let other = if rl.is_zero() { rh } else { rl };
            return (q, Some(other.recip().floor().to_integer()));
        }
        // x → 1/(x - a) reverses the order of the endpoints
        lo = rh.recip();
        hi = rl.recip();
    }
    (q, Some(BigInt::zero()))
}

/// Convergents `[q_0; ..., q_{k-1}]` for `k >= 1`, each paired with the
/// partial quotient that follows it (`None`: the expansion terminates).
fn cf_convergents(lo: &BigRational, hi: &BigRational) -> Vec<(BigRational, Option<BigInt>)> {
    let (q, next) = cf_interval(lo, hi, 400);
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
    let mut out = Vec::with_capacity(q.len());
    for (k, a) in q.iter().enumerate() {
        let p2 = a * &p0 + &p1;
        let q2 = a * &q0 + &q1;
        (p1, q1, p0, q0) = (p0, q0, p2, q2);
        let follow = if k + 1 < q.len() { Some(q[k + 1].clone()) } else { next.clone() };
        out.push((BigRational::new(p0.clone(), q0.clone()), follow));
    }
    out
}

/// Result of [`detect_rational`].
#[derive(Clone, Debug, PartialEq)]
pub struct RationalDetection {
    pub value: BigRational,
    /// Index of the entry that completed the stability window.
    pub at: usize,
    /// Partial quotients following the value across the window (`None`: exact).
    pub quotients: Vec<Option<BigInt>>,
}

/// Entries required before detection is attempted.
pub const MIN_CF_ENTRIES: usize = 6;
/// Consecutive entries that must agree.
pub const CF_WINDOW: usize = 4;
/// Size the exploding quotient must reach at the end of the window.
pub const CF_MIN_QUOTIENT: u32 = 10;

/// Finds the rational limit of an exponentially converging sequence. A
/// convergent is accepted when it occurs in `CF_WINDOW` consecutive entries,
/// the partial quotient following it increases strictly across the window
/// and reaches `CF_MIN_QUOTIENT`, the distances to it shrink, and at least one
/// later entry exists and every later entry still carries it with a quotient
/// at least that large. Convergents
/// whose following quotient stays fixed are ordinary digits of the limit and
/// never qualify.
pub fn detect_rational(seq: &[(BigRational, BigRational)]) -> Result<RationalDetection, ContError> {
    if seq.len() < MIN_CF_ENTRIES {
        return Err(ContError::TooFewTerms { need: MIN_CF_ENTRIES, have: seq.len() });
    }
    let convs: Vec<Vec<(BigRational, Option<BigInt>)>> = seq.iter().map(|(lo, hi)| cf_convergents(lo, hi)).collect();
    let follow = |i: usize, v: &BigRational| -> Option<Option<BigInt>> {
        convs[i].iter().find(|(c, _)| c == v).map(|(_, q)| q.clone())
    };
    let big = |q: &Option<BigInt>| q.as_ref().map_or(true, |a| *a >= BigInt::from(CF_MIN_QUOTIENT));
    for end in CF_WINDOW - 1..seq.len() - 1 {
        let start = end + 1 - CF_WINDOW;
        'cand: for (value, last) in &convs[end] {
            if !big(last) {
                continue;
            }
            let mut quotients = Vec::with_capacity(CF_WINDOW);
            for i in start..=end {
                match follow(i, value) {
                    Some(q) => quotients.push(q),
                    None => continue 'cand,
                }
            }
            let growing = quotients.windows(2).all(|w| match (&w[0], &w[1]) {
                (Some(a), Some(b)) => b > a,
                (_, None) => true,
                (None, Some(_)) => false,
            });
            if !growing {
                continue;
            }
            let dist = |i: usize| -> BigRational {
                let (lo, hi) = &seq[i];
                let mid = (lo + hi) / BigRational::from_integer(2.into());
                (mid - value).abs()
            };
            let shrinking = (start..end).all(|i| {
                let (a, b) = (dist(i), dist(i + 1));
                b < a || b.is_zero()
            });
            if !shrinking {
                continue;
            }
            let later_agree = (end + 1..seq.len()).all(|i| matches!(follow(i, value), Some(q) if big(&q)));
            if later_agree {
                return Ok(RationalDetection { value: value.clone(), at: end, quotients });
            }
        }
    }
    Err(ContError::NoStableRational)
}

/// Interval `[x - err, x + err]` of a tagged float, as exact rationals.
pub fn float_interval(x: &BigFloat) -> (BigRational, BigRational) {
    let mid = x.to_rational();
    if x.err_log10() == f64::NEG_INFINITY {
        return (mid.clone(), mid);
    }
    let e = x.err_log10().ceil() as i32;
    let ten = BigRational::from_integer(10.into());
    let rad = if e >= 0 { num_traits::pow(ten, e as usize) } else { num_traits::pow(ten, (-e) as usize).recip() };
    (&mid - &rad, &mid + &rad)
}

/// [`detect_rational`] on exact rationals.
pub fn detect_rational_exact(seq: &[BigRational]) -> Result<RationalDetection, ContError> {
    let iv: Vec<_> = seq.iter().map(|x| (x.clone(), x.clone())).collect();
    detect_rational(&iv)
}

/// [`detect_rational`] on tagged floats.
pub fn detect_rational_float(seq: &[BigFloat]) -> Result<RationalDetection, ContError> {
    let iv: Vec<_> = seq.iter().map(float_interval).collect();
    detect_rational(&iv)
}

/// Balance condition of the matching-point choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchMode {
    /// `2 N_w y = N_y ln(r/y)`.
    Linear,
    /// `2 N_w √y = N_y ln(r/y)`.
    Sqrt,
}

/// Matching point `y_m` balancing the two truncation errors, and the
/// predicted digits `N_y ln(r/y_m) / ln 10`.
pub fn optimize_match_point(n_w: f64, n_y: f64, r: f64, mode: MatchMode) -> Result<(f64, f64), ContError> {
    if !(n_w > 0.0 && n_y > 0.0 && r > 0.0) || !(n_w.is_finite() && n_y.is_finite() && r.is_finite()) {
        return Err(ContError::NoRoot(format!("inputs must be positive (N_w={n_w}, N_y={n_y}, r={r})")));
    }
    let g = |y: f64| -> f64 {
        let lhs = match mode {
            MatchMode::Linear => 2.0 * n_w * y,
            MatchMode::Sqrt => 2.0 * n_w * y.sqrt(),
        };
        n_y * (r / y).ln() - lhs
    };
    // g decreases from +inf at 0+ to a negative value at r
    let (mut lo, mut hi) = (r * 1e-300, r);
    if g(lo) <= 0.0 || g(hi) >= 0.0 {
        return Err(ContError::NoRoot("no sign change on (0, r)".into()));
    }
    for _ in 0..2000 {
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-16 * hi {
            break;
        }
    }
    let y = 0.5 * (lo + hi);
    Ok((y, n_y * (r / y).ln() / std::f64::consts::LN_10))
}

/// Digits of the denominators of an exact series.
#[derive(Clone, Debug, PartialEq)]
pub struct DenomProfile {
    pub points: Vec<(i64, usize)>,
    /// Least-squares line `digits ≈ slope·N + intercept`.
    pub slope: f64,
    pub intercept: f64,
    /// Second-half slope clearly above the first-half slope.
    pub super_exponential: bool,
}

pub fn denom_profile(s: &QSeries) -> DenomProfile {
    let points: Vec<(i64, usize)> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let d = c.denom();
            let digits = if d.is_one() { 0 } else { d.to_string().len() };
            (s.offset + i as i64, digits)
        })
        .collect();
    let pts: Vec<(f64, f64)> = points.iter().map(|&(n, d)| (n as f64, d as f64)).collect();
    let (slope, intercept) = if pts.len() >= 2 {
        let c = least_squares_f64(&pts, |x| vec![x, 1.0]);
        (c[0], c[1])
    } else {
        (0.0, 0.0)
    };
    let half = pts.len() / 2;
    let super_exponential = if half >= 4 {
        let a = least_squares_f64(&pts[..half], |x| vec![x, 1.0])[0];
        let b = least_squares_f64(&pts[half..], |x| vec![x, 1.0])[0];
        b > 1.15 * a + 0.05
    } else {
        false
    };
    DenomProfile { points, slope, intercept, super_exponential }
}

/// SVG plot of a denominator profile with its fitted line.
pub fn denom_svg(p: &DenomProfile) -> String {
    let (w, h, m) = (640.0, 400.0, 40.0);
    let xmax = p.points.iter().map(|q| q.0).max().unwrap_or(1).max(1) as f64;
    let xmin = p.points.iter().map(|q| q.0).min().unwrap_or(0) as f64;
    let ymax = p.points.iter().map(|q| q.1).max().unwrap_or(1).max(1) as f64;
    let sx = |x: f64| m + (x - xmin) / (xmax - xmin).max(1.0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - y / ymax * (h - 2.0 * m);
    let mut out = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\">\n");
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - m,
        w - m,
        h - m
    ));
    out.push_str(&format!("<line x1=\"{m}\" y1=\"{m}\" x2=\"{m}\" y2=\"{}\" stroke=\"black\"/>\n", h - m));
    for &(n, d) in &p.points {
        out.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"1.5\" fill=\"steelblue\"/>\n",
            sx(n as f64),
            sy(d as f64)
        ));
    }
    let y0 = (p.slope * xmin + p.intercept).max(0.0);
    let y1 = (p.slope * xmax + p.intercept).max(0.0);
    out.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"crimson\"/>\n",
        sx(xmin),
        sy(y0),
        sx(xmax),
        sy(y1)
    ));
    out.push_str(&format!(
        "<text x=\"{m}\" y=\"20\" font-size=\"12\">denominator digits vs N; slope {:.4}</text>\n</svg>\n",
        p.slope
    ));
    out
}

/// Substitutes `w = num(s)/den(s)` into a series in `w`; the map must have
/// zero constant term and nonzero linear term.
pub fn substitute_variable<F: Field>(s: &Series<F>, num: &Poly<F>, den: &Poly<F>) -> Result<Series<F>, ContError> {
    let f = &s.field;
    if !f.is_zero(&num.coeff(0)) || den.is_zero() || f.is_zero(&den.coeff(0)) || f.is_zero(&num.coeff(1)) {
        return Err(ContError::BadMap);
    }
    let len = s.order().max(1) as usize + 1;
    let nser = Series::new(f.clone(), &s.var, 0, (0..len).map(|k| num.coeff(k)).collect());
    let dser = Series::new(f.clone(), &s.var, 0, (0..len).map(|k| den.coeff(k)).collect());
    let map = nser.mul(&dser.recip()?)?;
    let mut out = s.compose(&map)?;
    out.var = "s".to_string();
    Ok(out)
}

/// Numerator and denominator of a rational map from integer coefficients.
pub fn rational_map(num: &[i64], den: &[i64]) -> (Poly<Rationals>, Poly<Rationals>) {
    (Poly::from_ints(num), Poly::from_ints(den))
}

/// Fitted singular amplitude.
#[derive(Clone, Debug)]
pub struct AmplitudeFit {
    /// Coefficient of the leading model term.
    pub amplitude: BigFloat,
    /// Error bar from the spread between two fitting windows and the
    /// residual size.
    pub error: f64,
    /// All fitted coefficients, leading term first.
    pub coefficients: Vec<BigFloat>,
    pub rel_residual: f64,
}

/// Model of a singular part `A (1 - w/w_s)^γ ln^ℓ(1 - w/w_s)` with
/// `corrections` subleading `1/n^j` terms per log power.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeModel {
    pub gamma: BigRational,
    pub log_depth: usize,
    pub corrections: usize,
}

impl AmplitudeModel {
    pub fn new(gamma: BigRational) -> Self {
        AmplitudeModel { gamma, log_depth: 0, corrections: 3 }
    }
}

/// Relative residual above which non-decaying residuals count as a mismatch.
pub const MISMATCH_RESIDUAL: f64 = 1e-8;

/// `[w^n](1 - w)^γ` for `n < len`, exact.
pub fn binomial_asymptotic_weights(gamma: &BigRational, len: usize) -> Vec<BigRational> {
    let mut u = Vec::with_capacity(len);
    let mut cur = BigRational::one();
    for n in 0..len {
        if n > 0 {
            let nn = BigRational::from_integer(BigInt::from(n as i64));
            cur = cur * (&nn - BigRational::one() - gamma) / nn;
        }
        u.push(cur.clone());
    }
    u
}

/// Least-squares fit of `c_n w_s^n ≈ Σ_k Σ_j a_{kj} ln^k(n) u_n / n^j` over
/// the tail, with `u_n = [w^n](1-w)^γ`. The amplitude is `a_{ℓ0}` for the
/// top log power `ℓ`; with `ℓ = 0` it is the coefficient `A` of the model.
/// Fails with `ModelMismatch` when sizeable residuals do not decay along
/// the tail.
pub fn fit_amplitude(c: &[BigFloat], w_s: &BigFloat, model: &AmplitudeModel) -> Result<AmplitudeFit, ContError> {
    let n_tot = c.len();
    let kterms = (model.log_depth + 1) * (model.corrections + 1);
    if n_tot < 4 * kterms + 8 {
        return Err(ContError::TooFewTerms { need: 4 * kterms + 8, have: n_tot });
    }
    let gamma = &model.gamma;
    if gamma.is_integer() && !gamma.is_negative() && model.log_depth == 0 {
        return Err(ContError::ModelMismatch(f64::INFINITY));
    }
    let prec = c.iter().map(BigFloat::prec).max().unwrap_or(50).max(w_s.prec());
    let u = binomial_asymptotic_weights(gamma, n_tot);
    // scaled data d_n = c_n w_s^n / u_n
    let mut data = Vec::with_capacity(n_tot);
    let mut wpow = BigFloat::from_i64(1, prec);
    for n in 0..n_tot {
        let un = BigFloat::from_rational(&u[n], prec);
        data.push(if un.is_negligible() { None } else { c[n].mul(&wpow).div(&un).ok() });
        wpow = wpow.mul(w_s);
    }
    let basis = |n: usize| -> Vec<BigFloat> {
        let nf = BigFloat::from_i64(n as i64, prec);
        let ln = nf.ln().unwrap_or_else(|_| BigFloat::zero(prec));
        let mut out = Vec::with_capacity(kterms);
        for k in (0..=model.log_depth).rev() {
            let lk = ln.powi(k as i64).unwrap();
            for j in 0..=model.corrections {
                out.push(lk.div(&nf.powi(j as i64).unwrap()).unwrap());
            }
        }
        out
    };
    let solve = |lo: usize, hi: usize| -> Result<(Vec<BigFloat>, Vec<f64>, f64), ContError> {
        let mut a = vec![vec![Complex::zero(prec); kterms]; kterms];
        let mut b = vec![vec![Complex::zero(prec)]; kterms];
        let mut rows = Vec::new();
        for n in lo..hi {
            let Some(d) = &data[n] else { continue };
            let phi = basis(n);
            for i in 0..kterms {
                b[i][0] = b[i][0].add(&Complex::real(phi[i].mul(d)));
                for j in 0..kterms {
                    a[i][j] = a[i][j].add(&Complex::real(phi[i].mul(&phi[j])));
                }
            }
            rows.push((phi, d.clone()));
        }
        let x = complex_solve(&a, &b).ok_or(ContError::ModelMismatch(f64::INFINITY))?;
        let coef: Vec<BigFloat> = x.into_iter().map(|r| r[0].re.clone()).collect();
        let mut resid = Vec::new();
        let mut scale: f64 = 0.0;
        for (phi, d) in rows {
            let fit = phi.iter().zip(&coef).fold(BigFloat::zero(prec), |acc, (p, a)| acc.add(&p.mul(a)));
            resid.push(10f64.powf(fit.sub(&d).log10_abs()));
            scale = scale.max(10f64.powf(d.log10_abs()));
        }
        Ok((coef, resid, scale))
    };
    let hi = n_tot;
    let lo = n_tot / 2;
    let shift = (n_tot / 8).max(1);
    let (coef, resid, scale) = solve(lo, hi)?;
    let (coef_b, _, _) = solve(lo - shift, hi - shift)?;
    let q = resid.len() / 4;
    let rms = |r: &[f64]| (r.iter().map(|x| x * x).sum::<f64>() / r.len().max(1) as f64).sqrt();
    let (first, last) = (rms(&resid[..q.max(1)]), rms(&resid[resid.len() - q.max(1)..]));
    let floor = scale * 10f64.powf(-(prec as f64) + 10.0);
    let rel_residual = if scale > 0.0 { rms(&resid) / scale } else { 0.0 };
    // a correct model leaves residuals that decay along the tail
    // (truncated corrections, exponentially small background) or sit at
    // the precision floor
    if last > 0.5 * first && rel_residual > MISMATCH_RESIDUAL && last > floor {
        return Err(ContError::ModelMismatch(rel_residual));
    }
    let amp = coef[0].clone();
    let spread = 10f64.powf(amp.sub(&coef_b[0]).log10_abs());
    let error = spread.max(rms(&resid)).max(10f64.powf(amp.err_log10()));
    Ok(AmplitudeFit { amplitude: amp, error, coefficients: coef, rel_residual })
}

/// Exact rationals of a series as tagged floats.
pub fn to_floats(c: &[BigRational], prec: usize) -> Vec<BigFloat> {
    c.iter().map(|x| BigFloat::from_rational(x, prec)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn qs(c: Vec<BigRational>) -> QSeries {
        Series::new(Rationals, "y", 0, c)
    }

    #[test]
    fn euler_geometric() {
        let s = qs(vec![q(1, 1); 8]);
        let t = euler_transform(&s, &q(1, 1)).unwrap();
        let want = [1, 1, 2, 4, 8, 16, 32, 64];
        for (i, w) in want.iter().enumerate() {
            assert_eq!(t.coeff(i as i64), q(*w, 1));
        }
        assert_eq!(euler_transform(&s, &q(0, 1)).unwrap(), s);
        let back = euler_transform(&t, &q(-1, 1)).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn euler_matches_composition_oracle() {
        // compose with y/(1 - βy) through series arithmetic
        let f = PrimeField::new(10007).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c: Vec<u64> = (0..12).map(|_| rng.gen_range(0..10007)).collect();
        let s = Series::new(f, "y", 0, c);
        let beta = 17u64;
        let inner = Series::from_fn(f, "y", 12, |k| if k == 0 { 0 } else { f.pow(&beta, k as u64 - 1) });
        assert_eq!(euler_transform(&s, &beta).unwrap(), s.compose(&inner).unwrap());
    }

    #[test]
    fn ratio_test_radii() {
        let geo: Vec<BigRational> = (0..60).map(|n| BigRational::from_integer(BigInt::from(4).pow(n))).collect();
        let r = radius_estimate(&log_magnitudes(&geo), None).unwrap();
        assert!((r.radius - 0.25).abs() < 1e-6);
        assert!(!r.oscillating);
        // 1/(1 - 7w + 5w^2 - 4w^3)
        let mut c = vec![q(1, 1)];
        for n in 1..200usize {
            let g = |k: usize| if n >= k { c[n - k].clone() } else { q(0, 1) };
            c.push(g(1) * q(7, 1) - g(2) * q(5, 1) + g(3) * q(4, 1));
        }
        let r = radius_estimate(&log_magnitudes(&c), None).unwrap();
        assert!((r.radius - 0.15853).abs() < 5e-5, "{}", r.radius);
        // singularity at w = -1/3: alternating signs
        let alt: Vec<BigRational> = (0..80).map(|n| BigRational::from_integer(BigInt::from(-3).pow(n))).collect();
        let r = radius_estimate(&log_magnitudes(&alt), None).unwrap();
        assert!(r.oscillating);
        assert!((r.radius - 1.0 / 3.0).abs() < 1e-6);
        assert!(matches!(radius_estimate(&log_magnitudes(&geo[..10]), None), Err(ContError::TooFewTerms { .. })));
    }

    #[test]
    fn continued_fraction_detection() {
        let target = q(-637, 228);
        let prec = 80;
        let rate = BigFloat::from_rational(&q(634, 1000), prec);
        let seq: Vec<BigFloat> = (10..41)
            .map(|n| BigFloat::from_rational(&target, prec).add(&rate.powi(n).unwrap()))
            .collect();
        let d = detect_rational_float(&seq).unwrap();
        assert_eq!(d.value, target);
        assert!(d.at < 25, "{}", d.at);
        let consts = vec![q(3, 7); 8];
        assert_eq!(detect_rational_exact(&consts).unwrap().value, q(3, 7));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let noise: Vec<BigFloat> =
                (0..25).map(|_| BigFloat::from_f64(rng.gen_range(-5.0..5.0), 40)).collect();
            assert_eq!(detect_rational_float(&noise), Err(ContError::NoStableRational));
        }
    }

    #[test]
    fn match_point_balance() {
        let (y, d) = optimize_match_point(8000.0, 800.0, 0.183, MatchMode::Linear).unwrap();
        assert!((y - 0.0577).abs() < 0.00005, "{y}");
        assert!((d - 400.0).abs() <= 5.0, "{d}");
        assert!(((2.0 * 8000.0 * y) / (800.0 * (0.183 / y).ln()) - 1.0).abs() < 1e-12);
        let (y, d) = optimize_match_point(8000.0, 800.0, 0.183, MatchMode::Sqrt).unwrap();
        assert!((y - 0.01535).abs() < 0.000005, "{y}");
        assert!((d - 860.0).abs() <= 5.0, "{d}");
        let (y_big, _) = optimize_match_point(8000.0, 1e9, 0.183, MatchMode::Linear).unwrap();
        assert!(y_big > 0.18);
        assert!(optimize_match_point(0.0, 800.0, 0.183, MatchMode::Linear).is_err());
    }

    #[test]
    fn denominators() {
        let mut fact = BigInt::one();
        let c: Vec<BigRational> = (0..120)
            .map(|n| {
                if n > 0 {
                    fact *= n;
                }
                BigRational::new(BigInt::one(), fact.clone())
            })
            .collect();
        let p = denom_profile(&qs(c));
        assert!(p.super_exponential);
        assert!(denom_svg(&p).starts_with("<svg"));
        let ints = denom_profile(&qs(vec![q(5, 1); 30]));
        assert!(ints.points.iter().all(|x| x.1 == 0));
        assert!(!ints.super_exponential);
    }

    #[test]
    fn substitution() {
        let s = qs((0..20).map(|n| BigRational::from_integer(BigInt::from(4).pow(n))).collect());
        let (num, den) = rational_map(&[0, 1], &[2, 0, 2]);
        let t = substitute_variable(&s, &num, &den).unwrap();
        // (1 + s^2)/(1 - s)^2 = 1 + 2s + 4s^2 + 6s^3 + ...
        for n in 1..20i64 {
            assert_eq!(t.coeff(n), q(2 * n, 1));
        }
        let id = substitute_variable(&s, &Poly::from_ints(&[0, 1]), &Poly::from_ints(&[1])).unwrap();
        assert_eq!(id.coeffs, s.coeffs);
        assert_eq!(substitute_variable(&s, &Poly::from_ints(&[1, 1]), &Poly::from_ints(&[1])), Err(ContError::BadMap));
    }

    fn planted_amplitude(a: &BigRational, len: usize) -> Vec<BigRational> {
        // A (1-2w)^{7/2} + 1/(1-w)
        let u = binomial_asymptotic_weights(&q(7, 2), len);
        (0..len)
            .map(|n| a * &u[n] * BigRational::from_integer(BigInt::from(2).pow(n as u32)) + BigRational::one())
            .collect()
    }

    #[test]
    fn amplitude_fit() {
        let a = q(-3, 7);
        let c = to_floats(&planted_amplitude(&a, 400), 60);
        let ws = BigFloat::from_rational(&q(1, 2), 60);
        let fit = fit_amplitude(&c, &ws, &AmplitudeModel::new(q(7, 2))).unwrap();
        let want = BigFloat::from_rational(&a, 60);
        let rel = 10f64.powf(fit.amplitude.sub(&want).log10_abs() - want.log10_abs());
        assert!(rel < 1e-10, "{rel}");
        let zero = to_floats(&planted_amplitude(&q(0, 1), 400), 60);
        let fz = fit_amplitude(&zero, &ws, &AmplitudeModel::new(q(7, 2))).unwrap();
        assert!(10f64.powf(fz.amplitude.log10_abs()) <= fz.error.max(1e-40), "{} {}", fz.amplitude, fz.error);
        assert!(matches!(fit_amplitude(&c, &ws, &AmplitudeModel::new(q(9, 2))), Err(ContError::ModelMismatch(_))));
    }
}
