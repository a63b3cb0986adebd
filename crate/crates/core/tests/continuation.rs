//! End-to-end continuation on planted problems with known branch structure.

use num_rational::BigRational;
use num_traits::Zero;
use odeforge_core::continuation::bigfloat::{BigFloat, Complex};
use odeforge_core::continuation::matching::{
    continue_along_path, coords_from_series, fit_polynomial_in_n, sweep_table, winding_sweep, ContinuationPath,
};
use odeforge_core::continuation::numeric::detect_rational_float;
use odeforge_core::continuation::planted::{binomial_series, branch_problem, log_series};
use odeforge_core::guess::guess_ode;
use odeforge_core::localfrob::{frobenius_solve, Center};
use odeforge_core::ContError;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[test]
fn branch_amplitude_is_quadratic_in_winding() {
    let bp = branch_problem().unwrap();
    let windings = [-3i64, -1, 1, 3, 5];
    let mut seqs: Vec<Vec<BigFloat>> = vec![Vec::new(); 3];
    for digits in [4usize, 6, 8, 10, 12, 14] {
        let pts: Vec<(i64, Complex)> =
            windings.iter().map(|&n| (n, bp.normalized_amplitude(n, digits).unwrap())).collect();
        let c = fit_polynomial_in_n(&pts, 2).unwrap();
        for k in 0..3 {
            assert!(c[k].im.is_negligible() || c[k].im.log10_abs() < -(digits as f64));
            seqs[k].push(c[k].re.clone());
        }
    }
    let got: Vec<BigRational> = seqs.iter().map(|s| detect_rational_float(s).unwrap().value).collect();
    assert_eq!(got, vec![q(1, 1), q(0, 1), q(-1, 1)]);
}

#[test]
fn reversed_windings_conjugate_amplitudes() {
    let bp = branch_problem().unwrap();
    // g L continues to g (ln|1 - 4w| - iπn): a purely imaginary 7/2 amplitude
    let prec = 80;
    let start: Vec<Complex> = bp.coords_log1.iter().map(|c| Complex::from_rational(c, prec)).collect();
    let path = ContinuationPath::parse("1/4:n=3").unwrap();
    let a = continue_along_path(&bp.op, &BigRational::zero(), &start, &path, &q(1, 2), 20).unwrap();
    let b = continue_along_path(&bp.op, &BigRational::zero(), &start, &path.reversed_windings(), &q(1, 2), 20).unwrap();
    assert!(!a.singular.is_empty());
    for (x, y) in a.singular.iter().zip(&b.singular) {
        assert!(x.amplitude.re.agrees_with(&y.amplitude.re, -20.0));
        assert!(x.amplitude.im.agrees_with(&y.amplitude.im.neg(), -20.0));
    }
    let lead = a.singular.iter().find(|s| s.exponent == q(7, 2)).unwrap();
    // -3πi · 2^{7/2}
    let want = BigFloat::pi(60).mul_i64(-3).mul(&BigFloat::from_i64(128, 60).sqrt().unwrap());
    assert!(lead.amplitude.im.agrees_with(&want, -20.0), "{}", lead.amplitude.im.to_sci(25));
    assert!(lead.amplitude.re.is_negligible() || lead.amplitude.re.log10_abs() < -20.0);
}

#[test]
fn analytic_function_has_no_singular_amplitude() {
    // annihilator of span{1, L, (1 - 2w)^{1/2}}; continue f = L
    let len = 60;
    let l = log_series(&q(4, 1), len);
    let s = binomial_series(&q(2, 1), &q(1, 2), len);
    let op = guess_ode(&l.add(&s).unwrap(), 3, 8).unwrap().operator;
    let basis = frobenius_solve(&op, &Center::Point(BigRational::zero()), 4, 8).unwrap();
    let coords = coords_from_series(&basis, &l).unwrap();
    let start: Vec<Complex> = coords.iter().map(|c| Complex::from_rational(c, 80)).collect();
    for n in [-1i64, 1] {
        let path = ContinuationPath::parse(&format!("1/4:n={n};3/8:m={n}")).unwrap();
        let r = continue_along_path(&op, &BigRational::zero(), &start, &path, &q(1, 2), 25).unwrap();
        let half = r.singular.iter().find(|p| p.exponent == q(1, 2)).expect("exponent 1/2 at w = 1/2");
        assert!(half.amplitude.abs().is_negligible() || half.amplitude.log10_abs() < -25.0);
    }
}

#[test]
fn even_windings_are_rejected() {
    let bp = branch_problem().unwrap();
    let path = ContinuationPath::parse("1/4:n=2").unwrap();
    let r = continue_along_path(&bp.op, &BigRational::zero(), &bp.start(40), &path, &q(1, 2), 10);
    assert!(matches!(r, Err(ContError::EvenWinding(2))));
}

#[test]
fn winding_sweep_table_snapshot() {
    let bp = branch_problem().unwrap();
    let path = ContinuationPath::parse("1/4:n=1").unwrap();
    let rows = winding_sweep(&bp.op, &BigRational::zero(), &bp.start(60), &path, "n", &[-1, 1, 3], &q(1, 2), 12).unwrap();
    let table = sweep_table("n", &rows, 12);
    let golden = include_str!("golden/sweep_table.txt");
    assert_eq!(table, golden, "\n{table}");
}
