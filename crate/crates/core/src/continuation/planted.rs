//! Planted problems with known branch structure, used to validate
//! continuation end to end.
//!
//! The branch problem is `f = (L² + π²) g` with `L = ln(1 - 4w)` and
//! `g = (1 - 2w)^{7/2}`. Its annihilator is guessed from the rational series
//! of `g(1 + L + L²)`. After `n` windings around `w = 1/4`, `L` becomes
//! `ln|1 - 4w| - iπn`, so at `w = 1/2` the factor of `|1/2 - w|^{7/2}` is
//! `2^{7/2} π² (1 - n²)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ContError;
use crate::ffcore::QSeries;
use crate::field::Rationals;
use crate::guess::guess_ode;
use crate::localfrob::{frobenius_solve, Center, DEFAULT_DEPTH_BUDGET};
use crate::theta::ThetaOp;

use super::bigfloat::{BigFloat, Complex};
use super::matching::{coords_from_series, continue_along_path, ContinuationPath, PathResult};
use super::numeric::binomial_asymptotic_weights;

/// Terms used to guess the planted operator.
pub const BRANCH_GUESS_TERMS: usize = 60;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `(1 - a w)^γ` to `len` terms.
pub fn binomial_series(a: &BigRational, gamma: &BigRational, len: usize) -> QSeries {
    let u = binomial_asymptotic_weights(gamma, len);
    let mut pw = BigRational::one();
    let c = u
        .into_iter()
        .map(|v| {
            let t = v * &pw;
            pw = &pw * a;
            t
        })
        .collect();
    QSeries::new(Rationals, "w", 0, c)
}

/// `ln(1 - a w)` to `len` terms.
pub fn log_series(a: &BigRational, len: usize) -> QSeries {
    let mut pw = BigRational::one();
    let c = (0..len)
        .map(|n| {
            if n == 0 {
                return BigRational::zero();
            }
            pw = &pw * a;
            -(&pw) / BigRational::from_integer(BigInt::from(n))
        })
        .collect();
    QSeries::new(Rationals, "w", 0, c)
}

/// Operator and start data of the planted branch problem.
#[derive(Clone, Debug)]
pub struct BranchProblem {
    pub op: ThetaOp<Rationals>,
    /// Coordinates of `g L²` in the basis at `w = 0`.
    pub coords_log2: Vec<BigRational>,
    /// Coordinates of `g L` in the basis at `w = 0`.
    pub coords_log1: Vec<BigRational>,
    /// Coordinates of `g` in the basis at `w = 0`.
    pub coords_plain: Vec<BigRational>,
}

pub fn branch_problem() -> Result<BranchProblem, ContError> {
    let len = BRANCH_GUESS_TERMS;
    let g = binomial_series(&q(2, 1), &q(7, 2), len);
    let l = log_series(&q(4, 1), len);
    let l2 = l.mul(&l)?;
    let one = QSeries::new(Rationals, "w", 0, vec![BigRational::one()]).pad_to(len);
    let s = g.mul(&one.add(&l)?.add(&l2)?)?;
    let op = guess_ode(&s, 3, 6).map_err(|e| ContError::FrameOutOfRange(format!("guessing: {e}")))?.operator;
    let basis = frobenius_solve(&op, &Center::Point(BigRational::zero()), DEFAULT_DEPTH_BUDGET, 8)?;
    let coords_log2 = coords_from_series(&basis, &g.mul(&l2)?)?;
    let coords_log1 = coords_from_series(&basis, &g.mul(&l)?)?;
    let coords_plain = coords_from_series(&basis, &g)?;
    Ok(BranchProblem { op, coords_log2, coords_log1, coords_plain })
}

impl BranchProblem {
    /// Coordinates of `(L² + π²) g` at working precision `prec`.
    pub fn start(&self, prec: usize) -> Vec<Complex> {
        let pi2 = BigFloat::pi(prec).mul(&BigFloat::pi(prec));
        self.coords_log2
            .iter()
            .zip(&self.coords_plain)
            .map(|(a, b)| Complex::real(BigFloat::from_rational(a, prec).add(&pi2.mul(&BigFloat::from_rational(b, prec)))))
            .collect()
    }

    /// Continues from `w = 0` around `1/4` with winding `n` to `w = 1/2`.
    pub fn continue_with(&self, n: i64, digits: usize) -> Result<PathResult, ContError> {
        let path = ContinuationPath::parse(&format!("1/4:n={n}"))?;
        continue_along_path(&self.op, &BigRational::zero(), &self.start(digits + 60), &path, &q(1, 2), digits)
    }

    /// Factor of `|1/2 - w|^{7/2}` after winding `n`, divided by `2^{7/2} π²`.
    pub fn normalized_amplitude(&self, n: i64, digits: usize) -> Result<Complex, ContError> {
        let r = self.continue_with(n, digits)?;
        let part = r
            .singular
            .iter()
            .find(|s| s.exponent == q(7, 2))
            .ok_or_else(|| ContError::FrameOutOfRange("no exponent 7/2 at w = 1/2".into()))?;
        let prec = part.amplitude.re.prec();
        let pi = BigFloat::pi(prec);
        let norm = pi.mul(&pi).mul(&BigFloat::from_i64(2, prec).powi(7).unwrap().sqrt()?);
        Ok(part.amplitude.scale(&norm.recip()?))
    }
}
