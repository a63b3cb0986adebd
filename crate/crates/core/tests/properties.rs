//! Randomized invariant suites, 1000 cases each.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use odeforge_core::continuation::bigfloat::BigFloat;
use odeforge_core::continuation::numeric::{euler_transform, optimize_match_point, MatchMode};
use odeforge_core::ffcore::{Poly, Series};
use odeforge_core::localfrob::{apply_log, frobenius_solve, Center};
use odeforge_core::opalgebra::{adjoint, multiply, right_divide};
use odeforge_core::reconstruct::{crt_lift, is_stable, rational_lift, ResidueSet};
use odeforge_core::{default_primes, PrimeField, Rationals, ThetaOp, ThetaOperatorP};
use proptest::prelude::*;

const P: u64 = 32749;

fn fp() -> PrimeField {
    PrimeField::new(P).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 1000, ..ProptestConfig::default() }
}

/// Operator mod P of order `1..=max_order` and degree `0..=max_degree`.
fn op_strategy(max_order: usize, max_degree: usize) -> impl Strategy<Value = ThetaOperatorP> {
    (1..=max_order, 0..=max_degree)
        .prop_flat_map(|(m, d)| proptest::collection::vec(proptest::collection::vec(0..P, d + 1), m + 1))
        .prop_map(|rows| {
            let f = fp();
            ThetaOp::new(f, rows.into_iter().map(|r| Poly::new(f, r)).collect())
        })
}

fn series_strategy(len: usize) -> impl Strategy<Value = Series<PrimeField>> {
    proptest::collection::vec(0..P, len).prop_map(|c| Series::new(fp(), "w", 0, c))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn multiplication_is_associative(a in op_strategy(3, 3), b in op_strategy(3, 3), c in op_strategy(3, 3)) {
        prop_assert_eq!(multiply(&multiply(&a, &b), &c), multiply(&a, &multiply(&b, &c)));
    }

    #[test]
    fn product_acts_as_composition(a in op_strategy(3, 3), b in op_strategy(3, 3), s in series_strategy(24)) {
        let ab = multiply(&a, &b).apply(&s).unwrap();
        let a_b = a.apply(&b.apply(&s).unwrap()).unwrap();
        let n = ab.count().min(a_b.count());
        prop_assert_eq!(ab.truncate(n as i64), a_b.truncate(n as i64));
    }

    #[test]
    fn right_division_identity(l in op_strategy(4, 3), r in op_strategy(2, 3)) {
        prop_assume!(!r.row(r.order()).is_zero() && r.order() >= 1);
        let d = right_divide(&l, &r).unwrap();
        prop_assert!(d.remainder.is_zero() || d.remainder.order() < r.order());
        let lhs = l.mul_w_poly(&d.multiplier);
        let rhs = multiply(&d.quotient, &r).add(&d.remainder);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn product_is_exactly_divisible(q in op_strategy(2, 3), r in op_strategy(2, 3)) {
        prop_assume!(!q.is_zero());
        let d = right_divide(&multiply(&q, &r), &r).unwrap();
        prop_assert!(d.divides());
    }

    #[test]
    fn adjoint_is_an_anti_involution(a in op_strategy(3, 3), b in op_strategy(3, 3)) {
        prop_assert_eq!(adjoint(&adjoint(&a)), a.clone());
        prop_assert_eq!(adjoint(&multiply(&a, &b)), multiply(&adjoint(&b), &adjoint(&a)));
    }

    #[test]
    fn frobenius_solutions_apply_to_zero(op in op_strategy(3, 3)) {
        // w = 0 regular singular: the θ^order row must not vanish there
        prop_assume!(op.coeff(op.order(), 0) != 0);
        let basis = frobenius_solve(&op, &Center::Point(BigRational::zero()), 4, 16);
        prop_assume!(basis.is_ok());
        let basis = basis.unwrap();
        prop_assert!(basis.solutions.len() <= op.order());
        for sol in &basis.solutions {
            for part in apply_log(&basis.local_op, sol) {
                prop_assert!(part.iter().all(|&v| v == 0), "{}", sol.name);
            }
        }
    }

    #[test]
    fn crt_lift_is_monotone_stable(digits in proptest::collection::vec(0u64..P, 1..8), neg in any::<bool>()) {
        let mut x = digits.iter().fold(BigInt::zero(), |a, &d| a * P + d);
        if neg {
            x = -x;
        }
        let primes = default_primes(12);
        let mut m = BigInt::from(1);
        for k in 1..=primes.len() {
            m *= primes[k - 1];
            let rs = ResidueSet::of_integer(&x, &primes[..k]);
            let got = crt_lift(&rs).unwrap();
            if x.abs() * 2 < m {
                prop_assert_eq!(&got, &x);
            }
            if is_stable(&got, &rs, 1) {
                prop_assert_eq!(&got, &x);
            }
        }
    }

    #[test]
    fn rational_lift_stays_once_found(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
        let q = BigRational::new(n.into(), d.into());
        let primes = default_primes(10);
        let mut found = false;
        for k in 1..=primes.len() {
            let rs = ResidueSet::of_rational(&q, &primes[..k]);
            match rational_lift(&rs) {
                Ok(v) if v == q => found = true,
                Ok(v) => prop_assert!(!found, "lift moved to {} after finding {}", v, q),
                Err(_) => prop_assert!(!found),
            }
        }
        prop_assert!(found);
    }

    #[test]
    fn precision_tags_bound_the_error(a in -1000i64..1000, b in 1i64..1000, prec in 20usize..60) {
        let value = |p: usize| {
            let x = BigFloat::from_rational(&BigRational::new(a.into(), b.into()), p);
            let y = x.mul(&x).add(&BigFloat::from_i64(1, p)).sqrt().unwrap();
            let z = y.ln().unwrap().mul(&BigFloat::pi(p)).add(&x.div(&y).unwrap().exp());
            z.div(&y.add(&BigFloat::from_i64(3, p))).unwrap()
        };
        let lo = value(prec);
        let hi = value(prec + 50);
        prop_assert!(lo.err_log10() < -(prec as f64) + 5.0);
        let diff = lo.sub(&hi);
        prop_assert!(diff.is_negligible(), "diff {} err {}", diff.log10_abs(), lo.err_log10());
        prop_assert!(lo.with_prec(prec + 50).agrees_with(&hi, f64::NEG_INFINITY));
    }

    #[test]
    fn euler_transform_inverts(c in proptest::collection::vec(-50i64..50, 1..20), bn in -5i64..5, bd in 1i64..5) {
        let mut coeffs: Vec<BigRational> = c.iter().map(|&v| BigRational::from_integer(v.into())).collect();
        coeffs.insert(0, BigRational::zero());
        let s = Series::new(Rationals, "y", 0, coeffs);
        let beta = BigRational::new(bn.into(), bd.into());
        let t = euler_transform(&s, &beta).unwrap();
        let back = euler_transform(&t, &-beta).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn match_point_satisfies_its_equation(n_w in 10.0f64..20000.0, n_y in 10.0f64..5000.0, r in 0.01f64..2.0, sqrt in any::<bool>()) {
        let mode = if sqrt { MatchMode::Sqrt } else { MatchMode::Linear };
        let (y, _) = optimize_match_point(n_w, n_y, r, mode).unwrap();
        let lhs = if sqrt { 2.0 * n_w * y.sqrt() } else { 2.0 * n_w * y };
        let rhs = n_y * (r / y).ln();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()));
    }
}

#[test]
fn frobenius_suite_is_not_vacuous() {
    // a fixed operator with a full indicial polynomial at 0 gives a full basis
    let f = fp();
    let op = ThetaOp::from_ints(f, &[&[0, 3], &[-2, 1], &[1, 5]]);
    let basis = frobenius_solve(&op, &Center::Point(BigRational::zero()), 4, 16).unwrap();
    assert_eq!(basis.solutions.len(), 2);
    for sol in &basis.solutions {
        assert!(apply_log(&basis.local_op, sol).iter().flatten().all(|&v| v == 0));
    }
}
