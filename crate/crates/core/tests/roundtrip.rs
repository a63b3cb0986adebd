//! Guess, extend and lift: random exact operators are recovered from
//! planted modular solutions.

use num_rational::BigRational;
use odeforge_core::ffcore::{Poly, QSeries};
use odeforge_core::guess::{extend_series, guess_ode, solution_mod_p};
use odeforge_core::opalgebra::{annihilates, right_divide};
use odeforge_core::reconstruct::lift_operator;
use odeforge_core::{default_primes, GuessError, PrimeField, Rationals, ThetaOp, ThetaOperatorX};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRIMES_PER_OP: usize = 8;

/// Random operator of the given shape with a power-series solution starting
/// at 1: the indicial polynomial at 0 is `θ Q(θ)` with `Q(n) ≠ 0` for
/// `1 <= n < len`, and the `θ^0` row is nonzero so `1` alone is no solution.
fn random_operator(rng: &mut ChaCha8Rng, order: usize, degree: usize, len: usize) -> ThetaOperatorX {
    loop {
        let mut rows: Vec<Vec<i64>> =
            (0..=order).map(|_| (0..=degree).map(|_| rng.gen_range(-20..=20)).collect()).collect();
        rows[0][0] = 0;
        let indicial: Vec<i64> = rows.iter().map(|r| r[0]).collect();
        let ok_indicial = (1..len as i64).all(|n| indicial.iter().rev().fold(0i128, |a, &c| a * n as i128 + c as i128) != 0);
        let ok_shape = rows[order].iter().any(|&c| c != 0)
            && rows.iter().any(|r| r[degree] != 0)
            && rows[0].iter().any(|&c| c != 0);
        if ok_indicial && ok_shape {
            let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
            return ThetaOp::from_ints(Rationals, &refs);
        }
    }
}

/// Guesses the annihilator of the planted solution modulo each prime and
/// lifts the normalized operators.
fn recover(op: &ThetaOperatorX, len: usize, pool: &[u64]) -> Option<ThetaOperatorX> {
    let mut per_prime = Vec::new();
    for &p in pool {
        let f = PrimeField::new(p).unwrap();
        let Some(opp) = op.reduce(f) else { continue };
        let s = match solution_mod_p(&opp, &[1], len) {
            Ok(s) => s,
            Err(GuessError::IndicialObstruction(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        per_prime.push(guess_ode(&s, 4, 6).ok()?.operator);
        if per_prime.len() == PRIMES_PER_OP {
            break;
        }
    }
    let (lifted, used) = lift_operator(&per_prime).ok()?;
    (used.len() >= PRIMES_PER_OP).then_some(lifted)
}

/// A lower-order result is a genuine right factor annihilating the exact
/// planted series: the plant itself was reducible.
fn is_reducible_plant(op: &ThetaOperatorX, got: &ThetaOperatorX, len: usize) -> bool {
    let seed = QSeries::new(Rationals, "w", 0, vec![BigRational::from_integer(1.into())]);
    let exact = extend_series(op, &seed, None, len).unwrap();
    got.order() < op.order()
        && right_divide(op, got).map(|d| d.divides()).unwrap_or(false)
        && annihilates(got, &exact)
}

#[test]
fn hundred_random_operators_roundtrip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let pool = default_primes(40);
    let (mut recovered, mut reducible, mut failures) = (0, 0, Vec::new());
    while recovered + failures.len() < 100 {
        let order = rng.gen_range(1..=4);
        let degree = rng.gen_range(1..=6);
        let len = (order + 1) * (degree + 1) + 40;
        let op = random_operator(&mut rng, order, degree, len);
        match recover(&op, len, &pool) {
            Some(got) if got == op.monic_lex() => recovered += 1,
            Some(got) if is_reducible_plant(&op, &got, len) => reducible += 1,
            got => failures.push((op.pretty(), got.map(|g| g.pretty()))),
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
    assert!(reducible <= 5, "{reducible} reducible plants");
}

#[test]
fn lift_drops_minority_shape() {
    let op = ThetaOperatorX::from_rationals(vec![
        vec![BigRational::from_integer(0.into()), BigRational::new(3.into(), 7.into())],
        vec![BigRational::from_integer(1.into()), BigRational::from_integer((-2).into())],
    ]);
    let mut per_prime: Vec<_> = default_primes(6).into_iter().map(|p| op.reduce(PrimeField::new(p).unwrap()).unwrap()).collect();
    let f = PrimeField::new(101).unwrap();
    per_prime.push(ThetaOp::new(f, vec![Poly::from_i64(f, &[1])]));
    let (lifted, used) = lift_operator(&per_prime).unwrap();
    assert_eq!(lifted, op.monic_lex());
    assert_eq!(used.len(), 6);
}
