//! Lifting modular data to exact values: Chinese remaindering in the
//! symmetric range, power-of-two stripping, rational reconstruction,
//! normalizer guessing and prime-budget estimation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{FfError, ReconstructError};
use crate::field::{is_prime, PrimeField};
use crate::theta::{ThetaOperatorP, ThetaOperatorX};

/// Residues of one unknown modulo pairwise distinct primes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueSet {
    residues: Vec<(u64, u64)>,
}

impl ResidueSet {
    pub fn new(residues: Vec<(u64, u64)>) -> Result<Self, ReconstructError> {
        let mut seen = std::collections::HashSet::new();
        for &(p, r) in &residues {
            if !is_prime(p) {
                return Err(FfError::NotPrime(p).into());
            }
            if !seen.insert(p) {
                return Err(ReconstructError::DuplicatePrime(p));
            }
            if r >= p {
                return Err(FfError::Parse(format!("residue {r} not reduced mod {p}")).into());
            }
        }
        Ok(ResidueSet { residues })
    }

    /// Residues of an exact integer.
    pub fn of_integer(x: &BigInt, primes: &[u64]) -> Self {
        let residues = primes
            .iter()
            .map(|&p| (p, PrimeField::new(p).expect("prime").reduce_bigint(x)))
            .collect();
        ResidueSet { residues }
    }

    /// Residues of a rational; primes dividing the denominator are skipped.
    pub fn of_rational(x: &BigRational, primes: &[u64]) -> Self {
        let residues = primes
            .iter()
            .filter_map(|&p| {
                let f = PrimeField::new(p).expect("prime");
                crate::field::Field::from_rational(&f, x).map(|r| (p, r))
            })
            .collect();
        ResidueSet { residues }
    }

    pub fn residues(&self) -> &[(u64, u64)] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn modulus(&self) -> BigInt {
        self.residues.iter().map(|&(p, _)| BigInt::from(p)).product()
    }

    pub fn push(&mut self, p: u64, r: u64) -> Result<(), ReconstructError> {
        let mut v = self.residues.clone();
        v.push((p, r));
        *self = ResidueSet::new(v)?;
        Ok(())
    }
}

/// Non-negative CRT representative and the modulus.
pub fn crt_unsigned(rs: &ResidueSet) -> (BigInt, BigInt) {
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for &(p, r) in rs.residues() {
        let f = PrimeField::new(p).expect("prime");
        let xm = f.reduce_bigint(&x);
        let mm = f.reduce_bigint(&m);
        let t = f.mulm(f.subm(r, xm), f.invm(mm).expect("coprime moduli"));
        x += &m * BigInt::from(t);
        m *= BigInt::from(p);
    }
    (x, m)
}

fn symmetric(x: BigInt, m: &BigInt) -> BigInt {
    if &x * 2 > *m {
        x - m
    } else {
        x
    }
}

/// The unique `x` with `|x| < M/2` matching every residue.
pub fn crt_lift(rs: &ResidueSet) -> Result<BigInt, ReconstructError> {
    if rs.is_empty() {
        return Err(ReconstructError::Empty);
    }
    let (x, m) = crt_unsigned(rs);
    Ok(symmetric(x, &m))
}

/// Whether the symmetric lift over all primes coincides with the lift over
/// every subset missing `drop` primes. That holds exactly when `|x|` stays
/// below half the smallest such sub-modulus, i.e. the product with the
/// `drop` largest primes removed.
pub fn is_stable(x: &BigInt, rs: &ResidueSet, drop: usize) -> bool {
    if rs.len() <= drop {
        return x.is_zero() && rs.len() > 0;
    }
    let mut ps: Vec<u64> = rs.residues().iter().map(|&(p, _)| p).collect();
    ps.sort_unstable();
    let sub: BigInt = ps[..ps.len() - drop].iter().map(|&p| BigInt::from(p)).product();
    x.abs() * 2 < sub
}

/// Finds the largest `k <= k_max` for which the residues divided by `2^k`
/// lift to a value stable under dropping any `drop` primes.
pub fn strip_pow2_lift_with(
    rs: &ResidueSet,
    k_max: u32,
    drop: usize,
) -> Result<(u32, BigInt), ReconstructError> {
    if rs.is_empty() {
        return Err(ReconstructError::Empty);
    }
    if rs.residues().iter().any(|&(p, _)| p == 2) {
        return Err(FfError::Parse("power-of-two stripping needs odd primes".into()).into());
    }
    let mut scaled: Vec<(u64, u64, u64)> = rs
        .residues()
        .iter()
        .map(|&(p, r)| (p, r, PrimeField::new(p).unwrap().invm(2).unwrap()))
        .collect();
    let mut best = None;
    for k in 0..=k_max {
        let cur = ResidueSet { residues: scaled.iter().map(|&(p, r, _)| (p, r)).collect() };
        let x = crt_lift(&cur)?;
        if is_stable(&x, &cur, drop) {
            best = Some((k, x));
        }
        for e in scaled.iter_mut() {
            e.1 = PrimeField::new(e.0).unwrap().mulm(e.1, e.2);
        }
    }
    best.ok_or(ReconstructError::NoConsistentK { k_max })
}

/// [`strip_pow2_lift_with`] using the default redundancy of three primes.
pub fn strip_pow2_lift(rs: &ResidueSet, k_max: u32) -> Result<(u32, BigInt), ReconstructError> {
    strip_pow2_lift_with(rs, k_max, 3)
}

/// Rational reconstruction of `x mod m` with `|n|, d <= sqrt(m/2)`.
pub fn ratrec(x: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound: BigInt = Roots::sqrt(&(m / 2u32));
    let (mut r0, mut r1) = (m.clone(), x.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    if !t1.gcd(m).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

/// Rational reconstruction over all residues, verified against each one.
pub fn rational_lift(rs: &ResidueSet) -> Result<BigRational, ReconstructError> {
    if rs.is_empty() {
        return Err(ReconstructError::Empty);
    }
    let (x, m) = crt_unsigned(rs);
    let q = ratrec(&x, &m).ok_or(ReconstructError::NoRationalFound)?;
    for &(p, r) in rs.residues() {
        let f = PrimeField::new(p).unwrap();
        if crate::field::Field::from_rational(&f, &q) != Some(r) {
            return Err(ReconstructError::NoRationalFound);
        }
    }
    Ok(q)
}

/// Lifts a vector of coefficients given per prime; every prime must supply
/// the same number of entries.
pub fn rational_lift_vector(per_prime: &[(u64, Vec<u64>)]) -> Result<Vec<BigRational>, ReconstructError> {
    let n = per_prime.first().ok_or(ReconstructError::Empty)?.1.len();
    (0..n)
        .map(|i| {
            let rs = ResidueSet::new(per_prime.iter().map(|(p, v)| (*p, v[i])).collect())?;
            rational_lift(&rs)
        })
        .collect()
}

/// Exact operator from per-prime operators normalized by `monic_lex`.
/// Primes whose operator shape (order, degree, position of the leading
/// entry) differs from the majority are dropped as unlucky; the surviving
/// primes are returned alongside the lift.
pub fn lift_operator(per_prime: &[ThetaOperatorP]) -> Result<(ThetaOperatorX, Vec<u64>), ReconstructError> {
    let shape = |op: &ThetaOperatorP| {
        let lead = op.flat(op.order(), op.degree()).iter().position(|&v| v != 0);
        (op.order(), op.degree(), lead)
    };
    let normed: Vec<ThetaOperatorP> = per_prime.iter().map(|o| o.monic_lex()).collect();
    let mut counts: BTreeMap<(usize, usize, Option<usize>), usize> = BTreeMap::new();
    for o in &normed {
        *counts.entry(shape(o)).or_default() += 1;
    }
    let (&target, _) = counts.iter().max_by_key(|(k, c)| (**c, std::cmp::Reverse(**k))).ok_or(ReconstructError::Empty)?;
    let (m, d, _) = target;
    let keep: Vec<&ThetaOperatorP> = normed.iter().filter(|o| shape(o) == target).collect();
    let data: Vec<(u64, Vec<u64>)> = keep.iter().map(|o| (o.field.p(), o.flat(m, d))).collect();
    let flat = rational_lift_vector(&data)?;
    let rows = flat.chunks(d + 1).map(|c| c.to_vec()).collect();
    Ok((ThetaOperatorX::from_rationals(rows), data.iter().map(|x| x.0).collect()))
}

/// Least common multiple of the denominators: a candidate global normalizer.
pub fn guess_normalizer(coeffs: &[BigRational]) -> BigInt {
    coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
}

/// Natural logarithm of a big integer's absolute value (`-inf` for zero).
pub fn ln_abs(x: &BigInt) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let a = x.abs();
    let bits = a.bits();
    if bits < 1000 {
        return a.to_f64().unwrap().ln();
    }
    let shift = bits - 60;
    let top: BigInt = &a >> shift as usize;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Digit measure `ln|c| / ln 30000`; rationals use their height max(|n|, d).
pub fn r_measure(c: &BigRational) -> f64 {
    let h = if c.numer().abs() > *c.denom() { c.numer().abs() } else { c.denom().clone() };
    (ln_abs(&h) / 30000f64.ln()).max(0.0)
}

/// Quadratic fit of the digit measure against the coefficient index.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetFit {
    pub samples: Vec<(f64, f64)>,
    /// `r(n) ≈ c0 + c1·n + c2·n²`.
    pub quadratic: [f64; 3],
    pub fitted_max: f64,
    pub argmax: f64,
    pub predicted_max_primes: u64,
}

impl BudgetFit {
    pub fn eval(&self, n: f64) -> f64 {
        let [a, b, c] = self.quadratic;
        a + b * n + c * n * n
    }
}

/// Least-squares quadratic through `(n, r_n)` and the predicted prime count
/// over `[0, horizon]`.
pub fn fit_budget(samples: &[(f64, f64)], horizon: f64, headroom: u64) -> Result<BudgetFit, ReconstructError> {
    let mut xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    if xs.len() < 3 {
        return Err(ReconstructError::InsufficientSamples { need: 3, have: xs.len() });
    }
    // scale n to [0, 1] for conditioning
    let scale = horizon.max(xs[xs.len() - 1]).max(1.0);
    let mut ata = [[0f64; 3]; 3];
    let mut atb = [0f64; 3];
    for &(n, r) in samples {
        let t = n / scale;
        let row = [1.0, t, t * t];
        for i in 0..3 {
            atb[i] += row[i] * r;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let sol = solve3(ata, atb).ok_or(ReconstructError::InsufficientSamples { need: 3, have: xs.len() })?;
    let quadratic = [sol[0], sol[1] / scale, sol[2] / (scale * scale)];
    let mut fit = BudgetFit {
        samples: samples.to_vec(),
        quadratic,
        fitted_max: f64::NEG_INFINITY,
        argmax: 0.0,
        predicted_max_primes: 0,
    };
    let mut cands = vec![0.0, horizon];
    if quadratic[2] != 0.0 {
        let v = -quadratic[1] / (2.0 * quadratic[2]);
        if v > 0.0 && v < horizon {
            cands.push(v);
        }
    }
    for n in cands {
        let r = fit.eval(n);
        if r > fit.fitted_max {
            fit.fitted_max = r;
            fit.argmax = n;
        }
    }
    let observed = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let top = fit.fitted_max.max(observed);
    fit.predicted_max_primes = (top - 1e-9).ceil().max(0.0) as u64 + headroom;
    Ok(fit)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..3 {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in 0..3 {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]])
}

/// Prime budget from fully lifted coefficients `(n, c_n)`.
pub fn estimate_prime_budget(
    partial: &[(usize, BigRational)],
    horizon: usize,
    headroom: u64,
) -> Result<BudgetFit, ReconstructError> {
    let samples: Vec<(f64, f64)> = partial.iter().map(|(n, c)| (*n as f64, r_measure(c))).collect();
    fit_budget(&samples, horizon as f64, headroom)
}

/// SVG plot of the samples and the fitted quadratic.
pub fn budget_svg(fit: &BudgetFit, horizon: f64) -> String {
    let (w, h, pad) = (640.0, 400.0, 40.0);
    let ymax = fit.fitted_max.max(fit.samples.iter().map(|s| s.1).fold(1.0, f64::max)) * 1.1;
    let xmax = horizon.max(1.0);
    let px = |n: f64| pad + n / xmax * (w - 2.0 * pad);
    let py = |r: f64| h - pad - r / ymax * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">"#);
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{0}" stroke="black"/>"#,
        h - pad,
        w - pad
    );
    let mut path = String::new();
    for i in 0..=200 {
        let n = xmax * i as f64 / 200.0;
        let _ = write!(path, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, px(n), py(fit.eval(n)));
    }
    let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="blue"/>"#, path.trim_end());
    for &(n, r) in &fit.samples {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="red"/>"#, px(n), py(r));
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-size="14">predicted primes: {}</text>"#,
        pad, fit.predicted_max_primes
    );
    s.push_str("</svg>\n");
    s
}

/// Parses `coeff_index  prime  residue` lines (blank and `#` lines ignored).
pub fn parse_residue_tsv(text: &str) -> Result<BTreeMap<usize, ResidueSet>, ReconstructError> {
    let mut raw: BTreeMap<usize, Vec<(u64, u64)>> = BTreeMap::new();
    for line in text.lines() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if f.len() != 3 {
            return Err(FfError::Parse(format!("expected 3 columns: `{t}`")).into());
        }
        let parse = |s: &str| s.parse::<u64>().map_err(|_| FfError::Parse(format!("bad number `{s}`")));
        let idx = parse(f[0])? as usize;
        raw.entry(idx).or_default().push((parse(f[1])?, parse(f[2])?));
    }
    raw.into_iter().map(|(k, v)| Ok((k, ResidueSet::new(v)?))).collect()
}

pub fn write_residue_tsv(sets: &BTreeMap<usize, ResidueSet>) -> String {
    let mut s = String::new();
    for (i, rs) in sets {
        for (p, r) in rs.residues() {
            let _ = writeln!(s, "{i}\t{p}\t{r}");
        }
    }
    s
}

/// `2^k · mantissa` as a single integer.
pub fn pow2_times(k: u32, mantissa: &BigInt) -> BigInt {
    mantissa << k as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::default_primes;

    #[test]
    fn small_integer_lifts() {
        let rs = ResidueSet::new(vec![(7, 100 % 7), (11, 100 % 11), (13, 100 % 13)]).unwrap();
        assert_eq!(crt_lift(&rs).unwrap(), BigInt::from(100));
        let neg = ResidueSet::of_integer(&BigInt::from(-5), &[7, 11]);
        assert_eq!(crt_lift(&neg).unwrap(), BigInt::from(-5));
    }

    #[test]
    fn duplicate_prime_rejected() {
        assert_eq!(ResidueSet::new(vec![(7, 1), (7, 2)]), Err(ReconstructError::DuplicatePrime(7)));
    }

    #[test]
    fn ratrec_small_ratio() {
        let q = BigRational::new((-637).into(), 228.into());
        let rs = ResidueSet::of_rational(&q, &default_primes(6));
        assert_eq!(rational_lift(&rs).unwrap(), q);
        let three = ResidueSet::of_integer(&BigInt::from(3), &default_primes(2));
        assert_eq!(rational_lift(&three).unwrap(), BigRational::from_integer(3.into()));
    }

    #[test]
    fn pow2_stripping() {
        let m: BigInt = "12345678901234567891".parse().unwrap();
        let c = pow2_times(171, &m);
        let rs = ResidueSet::of_integer(&c, &default_primes(40));
        assert_eq!(strip_pow2_lift(&rs, 250).unwrap(), (171, m));
        let odd = ResidueSet::of_integer(&BigInt::from(987654321), &default_primes(10));
        assert_eq!(strip_pow2_lift(&odd, 60).unwrap().0, 0);
        let few = ResidueSet::of_integer(&pow2_times(50, &BigInt::from(12345)), &default_primes(2));
        assert_eq!(strip_pow2_lift(&few, 60), Err(ReconstructError::NoConsistentK { k_max: 60 }));
    }

    #[test]
    fn normalizer_is_lcm() {
        let c = vec![BigRational::new(1.into(), 6.into()), BigRational::new(5.into(), 4.into())];
        assert_eq!(guess_normalizer(&c), BigInt::from(12));
        let ints = vec![BigRational::from_integer(4.into())];
        assert_eq!(guess_normalizer(&ints), BigInt::one());
    }

    #[test]
    fn budget_quadratic_and_constant() {
        let s: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let n = i as f64 * 98.0 + 3.0;
                (n, 0.001 * n * (888.0 - n))
            })
            .collect();
        let fit = fit_budget(&s, 888.0, 0).unwrap();
        assert!((fit.argmax - 444.0).abs() < 1e-6);
        assert_eq!(fit.predicted_max_primes, 198);
        let c: Vec<(f64, f64)> = (0..5).map(|i| (i as f64 * 10.0, 5.0)).collect();
        assert_eq!(fit_budget(&c, 40.0, 0).unwrap().predicted_max_primes, 5);
        assert!(matches!(fit_budget(&c[..2], 40.0, 0), Err(ReconstructError::InsufficientSamples { .. })));
    }

    #[test]
    fn tsv_roundtrip() {
        let text = "0\t7\t3\n0\t11\t3\n1\t7\t6\n1\t11\t10\n";
        let sets = parse_residue_tsv(text).unwrap();
        assert_eq!(write_residue_tsv(&sets), text);
        assert_eq!(crt_lift(&sets[&1]).unwrap(), BigInt::from(-1));
    }
}
