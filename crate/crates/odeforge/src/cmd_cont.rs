//! Numeric and continuation commands.

use anyhow::{bail, Context, Result};
use odeforge_core::continuation::bigfloat::{BigFloat, Complex};
use odeforge_core::continuation::matching::{
    continue_along_path, coords_from_series, fmt_value, match_solutions, sweep_table, winding_sweep,
    ContinuationPath, MatchOptions, PathResult,
};
use odeforge_core::continuation::numeric::{
    denom_profile, denom_svg, detect_rational_float, euler_transform, fit_amplitude, log_magnitudes,
    log_magnitudes_float, optimize_match_point, radius_estimate, AmplitudeModel, MatchMode,
};
use odeforge_core::ffcore::{AnySeries, Series};
use odeforge_core::localfrob::{frobenius_solve, Center, DEFAULT_DEPTH_BUDGET};
use odeforge_core::{ContError, Field};

use crate::cli::{
    AmplitudeArgs, CfArgs, ContinueArgs, DenomArgs, EulerArgs, MatchArgs, Mode, OptmatchArgs, Outcome, RadiusArgs,
};
use crate::io::{emit, load_exact_op, load_series, parse_q, read_values, series_floats, Loaded};

fn fmt_complex(z: &Complex, digits: usize) -> String {
    let im = fmt_value(&z.im, digits);
    let sign = if im.starts_with('-') { "" } else { "+" };
    format!("{} {sign}{im}i", fmt_value(&z.re, digits))
}

pub fn matching(a: MatchArgs) -> Result<Outcome> {
    let op = load_exact_op(&a.op)?;
    let mut opts = MatchOptions::new(a.digits);
    opts.terms = a.terms;
    opts.midpoint = a.midpoint.as_deref().map(parse_q).transpose()?;
    let c = match_solutions(&op, &parse_q(&a.from)?, &parse_q(&a.to)?, &opts)?;
    println!("midpoint {} residual 1e{:.1} digits {:.1}", c.midpoint, c.residual, c.achieved_digits);
    for (i, row) in c.matrix.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            println!("{} -> {}\t{}", c.names_a[j], c.names_b[i], fmt_complex(z, a.digits));
        }
    }
    Ok(Outcome::Done)
}

fn start_coords(a: &ContinueArgs, op: &odeforge_core::ThetaOperatorX) -> Result<Vec<Complex>> {
    let prec = a.digits + 60;
    if let Some(p) = &a.series {
        let Loaded::Any(AnySeries::Exact(s)) = load_series(p)? else { bail!("--series must be exact") };
        let basis = frobenius_solve(op, &Center::Point(parse_q(&a.start)?), DEFAULT_DEPTH_BUDGET, s.count())?;
        let coords = coords_from_series(&basis, &s)?;
        return Ok(coords.iter().map(|c| Complex::from_rational(c, prec)).collect());
    }
    let Some(p) = &a.coords else { bail!("give --series or --coords") };
    Ok(read_values(p)?.into_iter().map(|v| Complex::real(v.with_prec(prec))).collect())
}

fn print_result(r: &PathResult, digits: usize) {
    println!("end w={} achieved {:.1} digits", r.end, r.achieved_digits);
    for (name, c) in r.basis.params().iter().zip(&r.coefficients) {
        println!("coefficient {name}\t{}", fmt_complex(c, digits));
    }
    for s in &r.singular {
        println!(
            "singular {}\texponent={}\tdepth={}\tamplitude={}",
            s.name,
            s.exponent,
            s.depth,
            fmt_complex(&s.amplitude, digits)
        );
    }
}

pub fn continuation(a: ContinueArgs) -> Result<Outcome> {
    let op = load_exact_op(&a.op)?;
    let coords = start_coords(&a, &op)?;
    let path = ContinuationPath::parse(&a.path)?;
    let (start, end) = (parse_q(&a.start)?, parse_q(&a.to)?);
    match &a.sweep {
        Some(param) => {
            let rows = winding_sweep(&op, &start, &coords, &path, param, &a.values, &end, a.digits)?;
            print!("{}", sweep_table(param, &rows, a.digits));
        }
        None => print_result(&continue_along_path(&op, &start, &coords, &path, &end, a.digits)?, a.digits),
    }
    Ok(Outcome::Done)
}

fn euler_in<F: Field>(s: &Series<F>, beta: &str) -> Result<String> {
    let b = s.field.parse(beta)?;
    Ok(euler_transform(s, &b)?.to_text())
}

pub fn euler(a: EulerArgs) -> Result<Outcome> {
    let text = match load_series(&a.series)? {
        Loaded::Any(AnySeries::Exact(s)) => euler_in(&s, &a.beta)?,
        Loaded::Any(AnySeries::Prime(s)) => euler_in(&s, &a.beta)?,
        Loaded::Float(s) => euler_in(&s, &a.beta)?,
    };
    emit(a.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

pub fn radius(a: RadiusArgs) -> Result<Outcome> {
    let mags = match load_series(&a.series)? {
        Loaded::Any(AnySeries::Exact(s)) => log_magnitudes(&s.coeffs),
        Loaded::Float(s) => log_magnitudes_float(&s.coeffs),
        Loaded::Any(AnySeries::Prime(_)) => bail!("a mod-p series has no magnitudes"),
    };
    let window = match &a.window {
        Some(w) => {
            let (lo, hi) = w.split_once(':').context("window must be `a:b`")?;
            Some((lo.trim().parse()?, hi.trim().parse()?))
        }
        None => None,
    };
    let r = radius_estimate(&mags, window)?;
    println!("radius {:.10}", r.radius);
    println!("trend {:.4e} last_ratio {:.10} samples {}", r.trend, r.last_ratio, r.samples);
    println!("sign_changes {} oscillating {}", r.sign_changes, r.oscillating);
    Ok(Outcome::Done)
}

pub fn cf_detect(a: CfArgs) -> Result<Outcome> {
    match detect_rational_float(&read_values(&a.input)?) {
        Ok(d) => {
            println!("{} (stable from entry {})", d.value, d.at);
            Ok(Outcome::Done)
        }
        Err(ContError::NoStableRational) => {
            println!("no stable rational");
            Ok(Outcome::Undecided)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn amplitude(a: AmplitudeArgs) -> Result<Outcome> {
    let c = series_floats(&load_series(&a.series)?, a.prec)?;
    let prec = c.iter().map(BigFloat::prec).max().unwrap_or(a.prec);
    let w_s = BigFloat::from_rational(&parse_q(&a.at)?, prec);
    let model = AmplitudeModel { gamma: parse_q(&a.exponent)?, log_depth: a.log_depth, corrections: a.corrections };
    let fit = fit_amplitude(&c, &w_s, &model)?;
    println!("amplitude {}", fit.amplitude);
    println!("error 1e{:.1} rel_residual {:.3e}", fit.error, fit.rel_residual);
    Ok(Outcome::Done)
}

pub fn optmatch(a: OptmatchArgs) -> Result<Outcome> {
    let mode = match a.mode {
        Mode::Linear => MatchMode::Linear,
        Mode::Sqrt => MatchMode::Sqrt,
    };
    let (y, digits) = optimize_match_point(a.n_w, a.n_y, a.r, mode)?;
    println!("y_m {y:.6}");
    println!("digits {digits:.1}");
    Ok(Outcome::Done)
}

pub fn denom(a: DenomArgs) -> Result<Outcome> {
    let Loaded::Any(AnySeries::Exact(s)) = load_series(&a.series)? else { bail!("an exact series is needed") };
    let p = denom_profile(&s);
    for (n, d) in &p.points {
        println!("{n}\t{d}");
    }
    println!("# slope {:.6} intercept {:.3} super_exponential {}", p.slope, p.intercept, p.super_exponential);
    if let Some(path) = &a.plot {
        emit(Some(path), &denom_svg(&p))?;
    }
    Ok(Outcome::Done)
}
