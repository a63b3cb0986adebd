//! Guessing linear ODEs from truncated series, and extending series from a
//! known operator.
//!
//! The unknowns are the coefficients `a_{i,j}` of `Σ a_{i,j} w^j θ^i`
//! (plus, for inhomogeneous fits, the coefficients of multiplier polynomials
//! `Q_t` of known basis series). Each series coefficient gives one linear
//! equation; the fitted operator is read off the nullspace.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::GuessError;
use crate::ffcore::{Matrix, Poly, Series};
use crate::field::{Field, PrimeField};
use crate::theta::ThetaOp;

/// Extra equations beyond the unknown count used to confirm a kernel.
pub const DEFAULT_MARGIN: usize = 10;

/// Number of unknown scalars: `(M+1)(D+1) + n_bases·(D_rhs+1)`.
pub fn budget(order: usize, degree: usize, n_bases: usize, rhs_degree: usize) -> usize {
    (order + 1) * (degree + 1) + n_bases * (rhs_degree + 1)
}

/// Known basis series `B_t` with a shared degree bound for the multipliers.
#[derive(Clone, Debug, PartialEq)]
pub struct RhsAnsatz<F: Field> {
    pub bases: Vec<(String, Series<F>)>,
    pub rhs_degree: usize,
}

impl<F: Field> RhsAnsatz<F> {
    pub fn new(bases: Vec<(String, Series<F>)>, rhs_degree: usize) -> Result<Self, GuessError> {
        let first = bases
            .first()
            .ok_or_else(|| GuessError::SeedTooShort("ansatz needs at least one basis".into()))?;
        for (_, b) in &bases {
            if b.field != first.1.field || b.var != first.1.var {
                return Err(crate::error::FfError::FieldMismatch.into());
            }
        }
        Ok(RhsAnsatz { bases, rhs_degree })
    }

    /// Shortest available order among the bases.
    pub fn order(&self) -> i64 {
        self.bases.iter().map(|b| b.1.order()).min().unwrap_or(0)
    }

    /// `Σ_t Q_t · B_t` truncated to `order`.
    pub fn combine(&self, polys: &[Vec<F::E>], order: i64) -> Series<F> {
        let f = self.bases[0].1.field.clone();
        let var = self.bases[0].1.var.clone();
        let mut out = Series::zero(f.clone(), &var, order.min(self.order()));
        for ((_, b), q) in self.bases.iter().zip(polys) {
            let qs = Series::new(f.clone(), &var, 0, if q.is_empty() { vec![f.zero()] } else { q.clone() })
                .pad_to(b.order().max(1) as usize);
            out = out.add(&qs.mul(b).expect("same field")).expect("same field");
        }
        out.truncate(order)
    }
}

/// Outcome of a fit.
#[derive(Clone, Debug, PartialEq)]
pub struct FitReport<F: Field> {
    pub operator: ThetaOp<F>,
    /// Coefficient vectors of `Q_t` (inhomogeneous fits only).
    pub rhs_polys: Option<Vec<Vec<F::E>>>,
    pub kernel_dim: usize,
    pub unknowns: usize,
    pub equations_used: usize,
}

/// Tunables of the fitting loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GuessOptions {
    pub margin: usize,
}

impl Default for GuessOptions {
    fn default() -> Self {
        GuessOptions { margin: DEFAULT_MARGIN }
    }
}

/// Fitting matrix over equations `n ∈ [s.offset, s.offset + rows)`.
fn system<F: Field>(
    s: &Series<F>,
    order: usize,
    degree: usize,
    bases: &[&Series<F>],
    rhs_degree: usize,
    rows: usize,
) -> Matrix<F> {
    let f = &s.field;
    let cols = budget(order, degree, bases.len(), rhs_degree);
    let mut m = Matrix::zeros(f.clone(), rows, cols);
    for r in 0..rows {
        let n = s.offset + r as i64;
        for j in 0..=degree {
            let k = n - j as i64;
            if k < s.offset {
                continue;
            }
            let c = s.coeff(k);
            if f.is_zero(&c) {
                continue;
            }
            let kf = f.from_i64(k);
            let mut pw = c;
            for i in 0..=order {
                m.set(r, i * (degree + 1) + j, pw.clone());
                pw = f.mul(&pw, &kf);
            }
        }
        let base_col = (order + 1) * (degree + 1);
        for (t, b) in bases.iter().enumerate() {
            for k in 0..=rhs_degree {
                let idx = n - k as i64;
                if idx < b.offset || idx >= b.order() {
                    continue;
                }
                let v = f.neg(&b.coeff(idx));
                m.set(r, base_col + t * (rhs_degree + 1) + k, v);
            }
        }
    }
    m
}

/// Number of usable equations: indices known in the series and every basis.
fn equation_count<F: Field>(s: &Series<F>, bases: &[&Series<F>]) -> usize {
    let top = bases.iter().map(|b| b.order()).fold(s.order(), i64::min);
    (top - s.offset).max(0) as usize
}

/// Kernel at a fixed shape, confirmed by `margin` extra equations: the kernel
/// over all equations must equal the kernel over all but the last `margin`.
fn stable_kernel<F: Field>(
    s: &Series<F>,
    order: usize,
    degree: usize,
    bases: &[&Series<F>],
    rhs_degree: usize,
    margin: usize,
) -> Option<Vec<Vec<F::E>>> {
    let n_eq = equation_count(s, bases);
    let unknowns = budget(order, degree, bases.len(), rhs_degree);
    if n_eq < unknowns + margin {
        return None;
    }
    let full = system(s, order, degree, bases, rhs_degree, n_eq);
    let ker = full.nullspace();
    if ker.is_empty() {
        return Some(ker);
    }
    if margin > 0 {
        let part = system(s, order, degree, bases, rhs_degree, n_eq - margin);
        if part.nullspace().len() != ker.len() {
            return None;
        }
    }
    Some(ker)
}

fn op_from_vec<F: Field>(f: &F, order: usize, degree: usize, v: &[F::E]) -> ThetaOp<F> {
    ThetaOp::from_flat(f.clone(), order, degree, &v[..(order + 1) * (degree + 1)])
}

/// Largest operator degree with `budget + margin <= equations`.
fn max_fitting_degree(n_eq: usize, order: usize, extra: usize, margin: usize, cap: usize) -> Option<usize> {
    let avail = n_eq.checked_sub(margin + extra)?;
    let d = (avail / (order + 1)).checked_sub(1)?;
    Some(d.min(cap))
}

/// Minimal-order annihilator of `s` with the default margin.
pub fn guess_ode<F: Field>(s: &Series<F>, max_order: usize, max_degree: usize) -> Result<FitReport<F>, GuessError> {
    guess_ode_with(s, max_order, max_degree, GuessOptions::default())
}

/// Scans the order upward; at each order the largest degree fitting the
/// length budget is tried first, then the degree is minimized.
pub fn guess_ode_with<F: Field>(
    s: &Series<F>,
    max_order: usize,
    max_degree: usize,
    opts: GuessOptions,
) -> Result<FitReport<F>, GuessError> {
    let n_eq = equation_count(s, &[]);
    let need = budget(1, 0, 0, 0) + opts.margin;
    if n_eq < need {
        return Err(GuessError::InsufficientTerms { have: n_eq, need });
    }
    for m in 1..=max_order {
        let Some(mut d) = max_fitting_degree(n_eq, m, 0, opts.margin, max_degree) else {
            break;
        };
        loop {
            match stable_kernel(s, m, d, &[], 0, opts.margin) {
                Some(ker) if !ker.is_empty() => return Ok(minimize_degree(s, m, d, ker.len(), opts)),
                Some(_) => break,
                None if d > 0 => d -= 1,
                None => break,
            }
        }
    }
    Err(GuessError::NoAnnihilatorFound { max_order })
}

/// Kernel at degree `d` has dimension `dim`; the minimal operator then has
/// degree `d - dim + 1` when the order is minimal. Falls back to an upward
/// scan when that shortcut does not give a one-dimensional kernel.
fn minimize_degree<F: Field>(s: &Series<F>, m: usize, d: usize, dim: usize, opts: GuessOptions) -> FitReport<F> {
    let f = &s.field;
    let n_eq = equation_count(s, &[]);
    let try_at = |dd: usize| -> Option<FitReport<F>> {
        let ker = stable_kernel(s, m, dd, &[], 0, opts.margin)?;
        let v = ker.first()?;
        Some(FitReport {
            operator: op_from_vec(f, m, dd, v).normalize(),
            rhs_polys: None,
            kernel_dim: ker.len(),
            unknowns: budget(m, dd, 0, 0),
            equations_used: n_eq,
        })
    };
    let guess = d + 1 - dim;
    if let Some(r) = try_at(guess) {
        if r.kernel_dim == 1 {
            return r;
        }
    }
    for dd in 0..=d {
        if let Some(r) = try_at(dd) {
            return r;
        }
    }
    unreachable!("kernel at degree {d} was nonempty")
}

/// Joint fit of `L(s) = Σ Q_t B_t`. Orders are scanned from 0; a relation
/// whose operator part has order 0 means `s` is a polynomial-weighted
/// combination of the bases and is reported as [`GuessError::DegenerateFit`].
pub fn guess_inhom<F: Field>(
    s: &Series<F>,
    max_order: usize,
    max_degree: usize,
    rhs: &RhsAnsatz<F>,
) -> Result<FitReport<F>, GuessError> {
    guess_inhom_with(s, max_order, max_degree, rhs, GuessOptions::default())
}

pub fn guess_inhom_with<F: Field>(
    s: &Series<F>,
    max_order: usize,
    max_degree: usize,
    rhs: &RhsAnsatz<F>,
    opts: GuessOptions,
) -> Result<FitReport<F>, GuessError> {
    let f = &s.field;
    let bases: Vec<&Series<F>> = rhs.bases.iter().map(|b| &b.1).collect();
    let nb = bases.len();
    let dr = rhs.rhs_degree;
    let n_eq = equation_count(s, &bases);
    let need = budget(0, 0, nb, dr) + opts.margin;
    if n_eq < need {
        return Err(GuessError::InsufficientTerms { have: n_eq, need });
    }
    for m in 0..=max_order {
        let extra = nb * (dr + 1);
        let Some(dmax) = max_fitting_degree(n_eq, m, extra, opts.margin, max_degree) else {
            break;
        };
        // smallest degree with a confirmed kernel
        let mut found = None;
        for d in 0..=dmax {
            if let Some(ker) = stable_kernel(s, m, d, &bases, dr, opts.margin) {
                if !ker.is_empty() {
                    found = Some((d, ker));
                    break;
                }
            }
        }
        let Some((d, ker)) = found else { continue };
        let nop = (m + 1) * (d + 1);
        let v = prefer_homogeneous(f, &ker, nop);
        let op = op_from_vec(f, m, d, &v);
        if op.order() == 0 || op.is_zero() {
            return Err(GuessError::DegenerateFit);
        }
        // scale so the operator part is canonical
        let flat: Vec<&F::E> = v[..nop].iter().collect();
        let sc = f.canonical_scale(&flat);
        let v: Vec<F::E> = v.iter().map(|x| f.mul(x, &sc)).collect();
        let op = op_from_vec(f, m, d, &v);
        let polys: Vec<Vec<F::E>> = (0..nb).map(|t| v[nop + t * (dr + 1)..nop + (t + 1) * (dr + 1)].to_vec()).collect();
        // verify through every available index
        let order = n_eq as i64 + s.offset;
        let comb = rhs.combine(&polys, order);
        for n in s.offset..order {
            let lhs = op.apply_at(s, n);
            let r = if n >= comb.offset { comb.coeff(n) } else { f.zero() };
            if lhs != r {
                return Err(GuessError::NoSolutionFound { max_order });
            }
        }
        return Ok(FitReport {
            operator: op,
            rhs_polys: Some(polys),
            kernel_dim: ker.len(),
            unknowns: budget(m, d, nb, dr),
            equations_used: n_eq,
        });
    }
    Err(GuessError::NoSolutionFound { max_order })
}

/// A kernel vector whose right-hand-side part vanishes, if the kernel has one;
/// otherwise the first basis vector.
fn prefer_homogeneous<F: Field>(f: &F, ker: &[Vec<F::E>], nop: usize) -> Vec<F::E> {
    let nq = ker[0].len() - nop;
    if nq == 0 || ker.len() == 1 {
        return ker[0].clone();
    }
    // combinations Σ λ_k v_k with vanishing Q-part
    let rows: Vec<Vec<F::E>> = (0..nq).map(|r| ker.iter().map(|v| v[nop + r].clone()).collect()).collect();
    let combos = Matrix::from_rows(f.clone(), rows).nullspace();
    match combos.first() {
        Some(lam) => {
            let mut out = vec![f.zero(); ker[0].len()];
            for (l, v) in lam.iter().zip(ker) {
                for (o, x) in out.iter_mut().zip(v) {
                    *o = f.add(o, &f.mul(l, x));
                }
            }
            out
        }
        None => ker[0].clone(),
    }
}

/// Extends `seed` to `target_len` coefficients with the recurrence
/// `Σ_j P_j(n−j) c_{n−j} = e_n` of `op`.
pub fn extend_series<F: Field>(
    op: &ThetaOp<F>,
    seed: &Series<F>,
    rhs: Option<&Series<F>>,
    target_len: usize,
) -> Result<Series<F>, GuessError> {
    let f = &op.field;
    if op.is_zero() {
        return Err(GuessError::SeedTooShort("zero operator".into()));
    }
    if seed.offset < 0 {
        return Err(GuessError::SeedTooShort("seed must be a power series (offset >= 0)".into()));
    }
    let v = op.w_valuation();
    let dd = op.degree();
    let polys: Vec<Poly<F>> = (0..=dd).map(|j| op.theta_poly(j)).collect();
    let lead = &polys[v];
    let e_at = |n: i64| -> Result<F::E, GuessError> {
        match rhs {
            None => Ok(f.zero()),
            Some(e) if n < e.offset => Ok(f.zero()),
            Some(e) if n < e.order() => Ok(e.coeff(n)),
            Some(e) => Err(GuessError::SeedTooShort(format!(
                "right-hand side known to order {}, index {n} needed",
                e.order()
            ))),
        }
    };
    let seed_len = seed.order().max(0) as usize;
    let mut c: Vec<F::E> = (0..seed_len.min(target_len)).map(|n| seed.coeff(n as i64)).collect();
    // the seeded prefix must itself satisfy the recurrence
    for m in 0..c.len() {
        let n = (m + v) as i64;
        let mut acc = f.zero();
        for (j, pj) in polys.iter().enumerate() {
            let k = n - j as i64;
            if k < 0 || k as usize >= c.len() {
                continue;
            }
            acc = f.add(&acc, &f.mul(&pj.eval(&f.from_i64(k)), &c[k as usize]));
        }
        if acc != e_at(n)? {
            return Err(GuessError::SeedTooShort(format!(
                "seed of length {seed_len} violates the recurrence at n = {n}"
            )));
        }
    }
    for m in c.len()..target_len {
        let n = (m + v) as i64;
        let mut acc = e_at(n)?;
        for (j, pj) in polys.iter().enumerate().skip(v + 1) {
            let k = n - j as i64;
            if k < 0 {
                continue;
            }
            acc = f.sub(&acc, &f.mul(&pj.eval(&f.from_i64(k)), &c[k as usize]));
        }
        let a = lead.eval(&f.from_i64(m as i64));
        match f.inv(&a) {
            Some(ai) => c.push(f.mul(&acc, &ai)),
            None => return Err(GuessError::IndicialObstruction(m as i64)),
        }
    }
    if c.is_empty() {
        c.push(f.zero());
    }
    Ok(Series::new(f.clone(), &seed.var, 0, c))
}

/// `(2/π)K(4w) = Σ C(2n,n)² w^{2n}` to `len` coefficients.
pub fn elliptic_k_series<F: Field>(field: &F, len: usize) -> Series<F> {
    let mut c = vec![field.zero(); len.max(1)];
    let mut a = BigInt::one();
    let mut n = 0usize;
    while 2 * n < len {
        c[2 * n] = field.from_bigint(&a);
        n += 1;
        // C(2n,n)² / C(2n-2,n-1)² = 4(2n-1)²/n²
        let t = BigInt::from(2 * (2 * n - 1));
        a = a * &t * &t / BigInt::from(n * n);
    }
    Series::new(field.clone(), "w", 0, c)
}

/// `(2/π)E(4w) = Σ C(2n,n)² w^{2n} / (1 − 2n)` to `len` coefficients.
pub fn elliptic_e_series<F: Field>(field: &F, len: usize) -> Series<F> {
    let mut c = vec![field.zero(); len.max(1)];
    let mut a = BigInt::one();
    let mut n = 0usize;
    while 2 * n < len {
        // C(2n,n)²/(1-2n) is an integer: C(2n,n)/(2n-1) = 2·Catalan(n-1)
        let v = if n == 0 { a.clone() } else { -(&a / BigInt::from(2 * n - 1)) };
        c[2 * n] = field.from_bigint(&v);
        n += 1;
        let t = BigInt::from(2 * (2 * n - 1));
        a = a * &t * &t / BigInt::from(n * n);
    }
    Series::new(field.clone(), "w", 0, c)
}

/// The five elliptic basis series
/// `w (1−16w²)^{3−t} K^{4−t} E^t / ((1+4w)^6 (1−16w²)^κ)`, `t = 0..4`,
/// with `K, E` the `2/π`-normalized complete integrals at modulus `4w`.
pub fn elliptic_basis<F: Field>(field: &F, len: usize, kappa: usize, rhs_degree: usize) -> RhsAnsatz<F> {
    let k = elliptic_k_series(field, len);
    let e = elliptic_e_series(field, len);
    let poly_series = |p: &Poly<F>| {
        let mut c = p.c.clone();
        c.resize(len.max(c.len()), field.zero());
        c.truncate(len);
        Series::new(field.clone(), "w", 0, c).pad_to(len)
    };
    let one_m16 = Poly::from_i64(field.clone(), &[1, 0, -16]);
    let one_p4 = Poly::from_i64(field.clone(), &[1, 4]);
    let den = poly_series(&one_p4.pow(6).mul(&one_m16.pow(kappa as u32)));
    let den_inv = den.recip().expect("unit constant term");
    let mut bases = Vec::new();
    for t in 0..=4usize {
        let pre = poly_series(&one_m16.pow(3 - t.min(3) as u32));
        let mut s = pre.mul(&den_inv).expect("same field");
        if t == 4 {
            // exponent 3 − t is negative: divide once more by (1 − 16w²)
            s = s.mul(&poly_series(&one_m16).recip().expect("unit")).expect("same field");
        }
        for _ in 0..(4 - t) {
            s = s.mul(&k).expect("same field");
        }
        for _ in 0..t {
            s = s.mul(&e).expect("same field");
        }
        let s = s.shift(1).truncate(len as i64);
        bases.push((format!("K^{}E^{} kappa={} (2/pi normalized)", 4 - t, t, kappa), s));
    }
    RhsAnsatz { bases, rhs_degree }
}

/// Convenience: a planted solution for tests and pipelines mod p.
pub fn solution_mod_p(op: &ThetaOp<PrimeField>, seed: &[u64], len: usize) -> Result<Series<PrimeField>, GuessError> {
    let s = Series::new(op.field, "w", 0, seed.to_vec());
    extend_series(op, &s, None, len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;

    fn fp() -> PrimeField {
        PrimeField::new(32749).unwrap()
    }

    #[test]
    fn large_fit_budgets() {
        assert_eq!(budget(24, 888, 0, 0), 22225);
        assert_eq!(budget(32, 89, 5, 199), 3970);
        assert_eq!(budget(29, 1237, 0, 0), 37140);
    }

    #[test]
    fn geometric_series_annihilator() {
        let f = fp();
        let s = Series::from_fn(f, "w", 200, |n| f.pow(&2, n as u64));
        let r = guess_ode_with(&s, 1, 1, GuessOptions::default()).unwrap();
        assert_eq!(r.kernel_dim, 1);
        let expect = ThetaOp::from_ints(f, &[&[0, -2], &[1, -2]]).normalize();
        assert_eq!(r.operator, expect);
        assert!(r.operator.apply(&s).unwrap().is_zero());
    }

    #[test]
    fn constant_is_killed_by_theta() {
        let f = fp();
        let s = Series::new(f, "w", 0, vec![1]).pad_to(30);
        let r = guess_ode(&s, 2, 3).unwrap();
        assert_eq!(r.operator, ThetaOp::from_ints(f, &[&[0], &[1]]));
    }

    #[test]
    fn rational_function_has_first_order_annihilator() {
        let f = fp();
        // w^2/(1-4w)^2 = Σ (n-1) 4^{n-2} w^n
        let s = Series::from_fn(f, "w", 120, |n| if n < 2 { 0 } else { f.mul(&f.from_u64(n as u64 - 1), &f.pow(&4, n as u64 - 2)) });
        let r = guess_ode(&s, 3, 10).unwrap();
        assert_eq!(r.operator.order(), 1);
        let full = s.truncate(120);
        for n in full.offset..full.order() {
            assert_eq!(r.operator.apply_at(&full, n), 0);
        }
    }

    #[test]
    fn too_short_series() {
        let f = fp();
        let s = Series::new(f, "w", 0, vec![1, 2, 3]);
        assert!(matches!(guess_ode(&s, 2, 2), Err(GuessError::InsufficientTerms { .. })));
    }

    #[test]
    fn extend_geometric() {
        let f = fp();
        let op = ThetaOp::from_ints(f, &[&[0, -2], &[1, -2]]);
        let s = extend_series(&op, &Series::new(f, "w", 0, vec![1]), None, 50).unwrap();
        for n in 0..50 {
            assert_eq!(s.coeff(n), f.pow(&2, n as u64));
        }
        let th = ThetaOp::from_ints(f, &[&[0], &[1]]);
        let c = extend_series(&th, &Series::new(f, "w", 0, vec![1]), None, 10).unwrap();
        assert_eq!(c.order(), 10);
        assert_eq!(c.coeff(0), 1);
        assert!((1..10).all(|n| c.coeff(n) == 0));
    }

    #[test]
    fn planted_indicial_root_obstructs() {
        let f = fp();
        // indicial part θ(θ-7)(θ+3); the recursion breaks at n = 7
        let p0 = Poly::from_i64(f, &[0, 1]).mul(&Poly::from_i64(f, &[-7, 1])).mul(&Poly::from_i64(f, &[3, 1]));
        let rows: Vec<Poly<PrimeField>> = (0..=3)
            .map(|i| Poly::new(f, vec![p0.coeff(i), f.from_i64(i as i64 + 1), f.from_i64(2)]))
            .collect();
        let op = ThetaOp::new(f, rows);
        let seed = extend_series(&op, &Series::new(f, "w", 0, vec![1]), None, 6).unwrap();
        assert_eq!(seed.order(), 6);
        assert_eq!(extend_series(&op, &seed, None, 20), Err(GuessError::IndicialObstruction(7)));
    }

    #[test]
    fn elliptic_k_opening_terms() {
        let q = Rationals;
        let k = elliptic_k_series(&q, 8);
        let got: Vec<i64> = (0..8).map(|n| num_traits::ToPrimitive::to_i64(&k.coeff(n).to_integer()).unwrap()).collect();
        assert_eq!(got, vec![1, 0, 4, 0, 36, 0, 400, 0]);
        let e = elliptic_e_series(&q, 6);
        let got: Vec<i64> = (0..6).map(|n| num_traits::ToPrimitive::to_i64(&e.coeff(n).to_integer()).unwrap()).collect();
        assert_eq!(got, vec![1, 0, -4, 0, -12, 0]);
    }

    #[test]
    fn kappa_cancels() {
        let f = fp();
        let b0 = elliptic_basis(&f, 40, 0, 3);
        let b8 = elliptic_basis(&f, 40, 8, 3);
        let m = Series::new(f, "w", 0, Poly::from_i64(f, &[1, 0, -16]).pow(8).c).pad_to(40);
        assert_eq!(b8.bases[0].1.mul(&m).unwrap().truncate(40), b0.bases[0].1.truncate(40));
        // t = 1 basis is the product of its factors
        let k = elliptic_k_series(&f, 40);
        let e = elliptic_e_series(&f, 40);
        let direct = k.mul(&k).unwrap().mul(&k).unwrap().mul(&e).unwrap();
        let pre = Series::new(f, "w", 0, Poly::from_i64(f, &[1, 0, -16]).pow(2).c).pad_to(40);
        let den = Series::new(f, "w", 0, Poly::from_i64(f, &[1, 4]).pow(6).c).pad_to(40).recip().unwrap();
        let expect = direct.mul(&pre).unwrap().mul(&den).unwrap().shift(1).truncate(40);
        assert_eq!(b0.bases[1].1, expect);
    }

    #[test]
    fn degenerate_fit_on_basis() {
        let f = fp();
        let ans = elliptic_basis(&f, 80, 0, 2);
        let s = ans.bases[1].1.clone();
        let single = RhsAnsatz::new(vec![ans.bases[1].clone()], 2).unwrap();
        assert_eq!(guess_inhom(&s, 0, 2, &single), Err(GuessError::DegenerateFit));
    }
}
