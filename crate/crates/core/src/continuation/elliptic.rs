//! Complete elliptic integrals and their continuation past `w = 1/4`.
//!
//! With `k = 4w`, `K(4w)` solves `θ² - 16w²(θ+1)²`. Beyond `w = 1/4` the
//! branch reached after winding `n` (odd) times around `1/4` is
//! `u[K(u) + i n K(u')]`, and `E - K` continues to `[E(u) - K(u) - i n E(u')]/u`,
//! where `u = 1/(4w)` and `u' = √(1 - u²)`.

use num_rational::BigRational;
use num_traits::One;

use crate::error::ContError;
use crate::ffcore::Series;
use crate::field::{Field, Rationals};
use crate::guess::extend_series;
use crate::theta::ThetaOp;

use super::bigfloat::{BigFloat, BigFloatField, Complex};

/// Extra digits carried internally.
const GUARD: usize = 20;

/// `(K(k), E(k))` for `0 <= k < 1` by the arithmetic-geometric mean.
pub fn ellip_ke(k: &BigFloat) -> Result<(BigFloat, BigFloat), ContError> {
    let prec = k.prec();
    let one = BigFloat::from_i64(1, prec);
    let kk = k.mul(k);
    if k.is_negative() || kk.cmp_checked(&one)? != std::cmp::Ordering::Less {
        return Err(ContError::FrameOutOfRange(format!("modulus {} outside [0, 1)", k.to_sci(12))));
    }
    let mut a = one.clone();
    let mut b = one.sub(&kk).sqrt()?;
    // Σ 2^{j-1} c_j² with c_0 = k
    let mut sum = kk.div_i64(2);
    let mut pow2 = BigFloat::from_i64(1, prec);
    for _ in 0..10_000 {
        let c = a.sub(&b).div_i64(2);
        if c.is_negligible() {
            break;
        }
        let an = a.add(&b).div_i64(2);
        b = a.mul(&b).sqrt()?;
        a = an;
        sum = sum.add(&c.mul(&c).mul(&pow2));
        pow2 = pow2.mul_i64(2);
    }
    let kv = BigFloat::pi(prec).div(&a.mul_i64(2))?;
    let ev = kv.mul(&one.sub(&sum));
    Ok((kv, ev))
}

/// `θ² - 16w²(θ+1)²`, annihilating `K(4w)`.
pub fn k_operator() -> ThetaOp<Rationals> {
    ThetaOp::from_ints(Rationals, &[&[0, 0, -16], &[0, 0, -32], &[1, 0, -16]])
}

/// Continued `K` and `E - K` about a rational center `w0 > 1/4`.
#[derive(Clone, Debug)]
pub struct EllipticBranch {
    pub n: i64,
    pub w0: BigRational,
    pub u: BigFloat,
    pub u_prime: BigFloat,
    /// Taylor coefficients in `x = w - w0` of the continued `K(4w)`.
    pub k: Vec<Complex>,
    /// Taylor coefficients of the continued `E(4w) - K(4w)`.
    pub e_minus_k: Vec<Complex>,
    pub prec: usize,
}

fn eval(c: &[Complex], x: &BigFloat) -> Complex {
    let mut acc = Complex::zero(x.prec());
    for a in c.iter().rev() {
        acc = acc.scale(x).add(a);
    }
    acc
}

impl EllipticBranch {
    /// Continued `K(4w)` at `w = w0 + x`.
    pub fn eval_k(&self, x: &BigFloat) -> Complex {
        eval(&self.k, x)
    }

    /// Continued `E(4w) - K(4w)` at `w = w0 + x`.
    pub fn eval_e_minus_k(&self, x: &BigFloat) -> Complex {
        eval(&self.e_minus_k, x)
    }

    /// Recovers `(K(u), K(u'), E(u), E(u'))` at `w = w0 + x` from the series
    /// values, inverting the branch formulas.
    pub fn principal_values(&self, x: &BigFloat) -> Result<[BigFloat; 4], ContError> {
        let w = BigFloat::from_rational(&self.w0, self.prec).add(x);
        let u = w.mul_i64(4).recip()?;
        let kc = self.eval_k(x);
        let ek = self.eval_e_minus_k(x).scale(&u);
        let k_u = kc.re.div(&u)?;
        let k_up = kc.im.div(&u)?.div_i64(self.n);
        let e_u = ek.re.add(&k_u);
        let e_up = ek.im.neg().div_i64(self.n);
        Ok([k_u, k_up, e_u, e_up])
    }
}

/// `(1 - 16w²)(wK' + K) - K` on a Taylor series about `w0`.
fn e_minus_k_series(k: &[Complex], w0: &BigFloat) -> Vec<Complex> {
    let len = k.len();
    let prec = w0.prec();
    let at = |i: usize| if i < len { k[i].clone() } else { Complex::zero(prec) };
    // wK' + K with w = w0 + x: Σ (w0 (n+1) k_{n+1} + n k_n + k_n) x^n
    let mut g = Vec::with_capacity(len);
    for n in 0..len.saturating_sub(1) {
        let t = at(n + 1).scale(&w0.mul_i64(n as i64 + 1)).add(&at(n).scale(&BigFloat::from_i64(n as i64 + 1, prec)));
        g.push(t);
    }
    // 1 - 16 w² = (1 - 16 w0²) - 32 w0 x - 16 x²
    let c0 = BigFloat::from_i64(1, prec).sub(&w0.mul(w0).mul_i64(16));
    let c1 = w0.mul_i64(-32);
    let c2 = BigFloat::from_i64(-16, prec);
    (0..g.len())
        .map(|n| {
            let mut acc = g[n].scale(&c0);
            if n >= 1 {
                acc = acc.add(&g[n - 1].scale(&c1));
            }
            if n >= 2 {
                acc = acc.add(&g[n - 2].scale(&c2));
            }
            acc.sub(&k[n])
        })
        .collect()
}

/// Branch of `K(4w)` and `E(4w) - K(4w)` after `n` (odd) windings around
/// `w = 1/4`, expanded to `order` terms about the rational `w0 > 1/4`.
pub fn elliptic_continue(n: i64, w0: &BigRational, order: usize, prec: usize) -> Result<EllipticBranch, ContError> {
    if n % 2 == 0 {
        return Err(ContError::EvenWinding(n));
    }
    let quarter = BigRational::new(1.into(), 4.into());
    if *w0 <= quarter {
        return Err(ContError::FrameOutOfRange(format!("center {w0} is not beyond 1/4")));
    }
    let order = order.max(2);
    let wp = prec + GUARD;
    let w = BigFloat::from_rational(w0, wp);
    let u = BigFloat::from_rational(&(BigRational::one() / (w0 * BigRational::from_integer(4.into()))), wp);
    let one = BigFloat::from_i64(1, wp);
    let up = one.sub(&u.mul(&u)).sqrt()?;
    let (k_u, e_u) = ellip_ke(&u)?;
    let (k_up, e_up) = ellip_ke(&up)?;
    let kc = Complex::new(u.mul(&k_u), u.mul(&k_up).mul_i64(n));
    let ekc = Complex::new(e_u.sub(&k_u), e_up.mul_i64(-n)).scale(&u.recip()?);
    // dK/dw = 4 [E / (k (1 - k²)) - K / k] at k = 4 w0
    let kmod = w.mul_i64(4);
    let ec = ekc.add(&kc);
    let denom = kmod.mul(&one.sub(&kmod.mul(&kmod)));
    let dk = ec.scale(&denom.recip()?).sub(&kc.scale(&kmod.recip()?)).scale(&BigFloat::from_i64(4, wp));
    // local series: real and imaginary parts separately, the operator being real
    let f = BigFloatField { digits: wp };
    let local = k_operator().recenter(w0).map_field(f.clone(), |c| BigFloat::from_rational(c, wp));
    let part = |v0: &BigFloat, v1: &BigFloat| -> Result<Vec<BigFloat>, ContError> {
        let seed = Series::new(f.clone(), "x", 0, vec![v0.clone(), v1.clone()]);
        let s = extend_series(&local, &seed, None, order + 1)
            .map_err(|e| ContError::FrameOutOfRange(format!("series at {w0}: {e}")))?;
        Ok((0..=order as i64).map(|i| if i < s.order() { s.coeff(i) } else { f.zero() }).collect())
    };
    let re = part(&kc.re, &dk.re)?;
    let im = part(&kc.im, &dk.im)?;
    let k: Vec<Complex> = re.into_iter().zip(im).map(|(a, b)| Complex::new(a, b)).collect();
    let e_minus_k = e_minus_k_series(&k, &w);
    let k = k[..order].to_vec();
    Ok(EllipticBranch { n, w0: w0.clone(), u, u_prime: up, k, e_minus_k, prec: wp })
}

/// Trapezoid-rule `(K(k), E(k))` with `m` nodes on `[0, π/2]`; the integrands
/// are smooth and periodic so the rule converges geometrically.
pub fn ellip_ke_quadrature(k: &BigFloat, m: usize) -> (BigFloat, BigFloat) {
    let prec = k.prec();
    let half_pi = BigFloat::pi(prec).div_i64(2);
    let h = half_pi.div_i64(m as i64);
    let kk = k.mul(k);
    let one = BigFloat::from_i64(1, prec);
    let (mut sk, mut se) = (BigFloat::zero(prec), BigFloat::zero(prec));
    for j in 0..=m {
        let (s, _) = h.mul_i64(j as i64).sin_cos();
        let r = one.sub(&kk.mul(&s).mul(&s)).sqrt().expect("positive radicand");
        let wgt = if j == 0 || j == m { BigFloat::from_i64(1, prec).div_i64(2) } else { one.clone() };
        sk = sk.add(&wgt.div(&r).expect("nonzero"));
        se = se.add(&wgt.mul(&r));
    }
    (sk.mul(&h), se.mul(&h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn agm_matches_quadrature() {
        for (a, b) in [(1, 3), (5, 6), (11, 20)] {
            let k = BigFloat::from_rational(&q(a, b), 70);
            let (k1, e1) = ellip_ke(&k).unwrap();
            let (k2, e2) = ellip_ke_quadrature(&k, 400);
            assert!(k1.agrees_with(&k2, -60.0), "{} {}", k1.to_sci(40), k2.to_sci(40));
            assert!(e1.agrees_with(&e2, -60.0));
        }
        assert!(ellip_ke(&BigFloat::from_i64(1, 30)).is_err());
    }

    #[test]
    fn continued_value_at_three_tenths() {
        let br = elliptic_continue(1, &q(3, 10), 40, 60).unwrap();
        let u = BigFloat::from_rational(&q(5, 6), 80);
        let up = BigFloat::from_i64(1, 80).sub(&u.mul(&u)).sqrt().unwrap();
        let (ku, _) = ellip_ke_quadrature(&u, 500);
        let (kup, _) = ellip_ke_quadrature(&up, 500);
        let want = Complex::new(u.mul(&ku), u.mul(&kup));
        let got = &br.k[0];
        assert!(got.re.agrees_with(&want.re, -50.0));
        assert!(got.im.agrees_with(&want.im, -50.0));
        let conj = elliptic_continue(-1, &q(3, 10), 40, 60).unwrap();
        for (a, b) in br.k.iter().zip(&conj.k) {
            assert!(a.re.agrees_with(&b.re, -55.0) && a.im.agrees_with(&b.im.neg(), -55.0));
        }
    }

    #[test]
    fn series_values_satisfy_legendre_relation() {
        let br = elliptic_continue(3, &q(3, 10), 160, 50).unwrap();
        let x = BigFloat::from_rational(&q(1, 50), br.prec);
        let [ku, kup, eu, eup] = br.principal_values(&x).unwrap();
        let lhs = eu.mul(&kup).add(&eup.mul(&ku)).sub(&ku.mul(&kup));
        let half_pi = BigFloat::pi(br.prec).div_i64(2);
        assert!(lhs.agrees_with(&half_pi, -45.0), "{}", lhs.to_sci(50));
        // the series value agrees with a direct evaluation at the new point
        let u1 = BigFloat::from_rational(&q(25, 32), br.prec);
        let (k1, _) = ellip_ke(&u1).unwrap();
        assert!(ku.agrees_with(&k1, -45.0));
    }

    #[test]
    fn frame_checks() {
        assert!(matches!(elliptic_continue(1, &q(1, 5), 10, 30), Err(ContError::FrameOutOfRange(_))));
        assert!(matches!(elliptic_continue(2, &q(3, 10), 10, 30), Err(ContError::EvenWinding(2))));
    }
}
