//! Guessing, series extension and modular lifting commands.

use std::path::Path;

use anyhow::{bail, Context, Result};
use odeforge_core::ffcore::{AnySeries, Series};
use odeforge_core::guess::{
    elliptic_basis, extend_series, guess_inhom_with, guess_ode_with, FitReport, GuessOptions, RhsAnsatz,
};
use odeforge_core::reconstruct::{
    budget_svg, crt_lift, estimate_prime_budget, parse_residue_tsv, rational_lift, strip_pow2_lift,
};
use odeforge_core::theta::AnyOp;
use odeforge_core::{Field, ThetaOp};

use crate::cli::{CrtArgs, EstimateArgs, ExtendArgs, GuessArgs, GuessInhomArgs, Outcome, ResidueArgs};
use crate::io::{emit, load_op, parse_q, read_text};

fn report<F: Field>(r: &FitReport<F>) {
    eprintln!(
        "order={} degree={} unknowns={} equations={} kernel_dim={}",
        r.operator.order(),
        r.operator.degree(),
        r.unknowns,
        r.equations_used,
        r.kernel_dim
    );
}

fn exact_series(path: &Path) -> Result<AnySeries> {
    Ok(odeforge_core::ffcore::read_series(&read_text(path)?)?)
}

pub fn guess(a: GuessArgs) -> Result<Outcome> {
    let opts = GuessOptions { margin: a.margin };
    let text = match exact_series(&a.series)? {
        AnySeries::Prime(s) => fit(guess_ode_with(&s, a.max_order, a.max_degree, opts)?),
        AnySeries::Exact(s) => fit(guess_ode_with(&s, a.max_order, a.max_degree, opts)?),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

fn fit<F: Field>(r: FitReport<F>) -> String {
    report(&r);
    r.operator.to_text()
}

fn inhom<F: Field>(s: &Series<F>, a: &GuessInhomArgs) -> Result<String> {
    let f = &s.field;
    let rhs = if let Some(spec) = a.bases.strip_prefix("elliptic:") {
        let kappa: usize = spec
            .strip_prefix("kappa=")
            .and_then(|k| k.parse().ok())
            .context("expected `elliptic:kappa=<k>`")?;
        elliptic_basis(f, s.order().max(0) as usize, kappa, a.rhs_degree)
    } else {
        let mut bases = Vec::new();
        for p in a.bases.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let b = Series::from_text(f.clone(), &read_text(Path::new(p))?).with_context(|| format!("basis {p}"))?;
            bases.push((p.to_string(), b));
        }
        RhsAnsatz::new(bases, a.rhs_degree)?
    };
    let r = guess_inhom_with(s, a.max_order, a.max_degree, &rhs, GuessOptions { margin: a.margin })?;
    report(&r);
    if let Some(polys) = &r.rhs_polys {
        for ((name, _), q) in rhs.bases.iter().zip(polys) {
            let p = odeforge_core::ffcore::Poly::new(f.clone(), q.clone());
            eprintln!("Q[{name}] = {}", p.to_string_var("w"));
        }
    }
    Ok(r.operator.to_text())
}

pub fn guess_inhom(a: GuessInhomArgs) -> Result<Outcome> {
    let text = match exact_series(&a.series)? {
        AnySeries::Prime(s) => inhom(&s, &a)?,
        AnySeries::Exact(s) => inhom(&s, &a)?,
    };
    emit(a.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

fn extend_in<F: Field>(op: &ThetaOp<F>, a: &ExtendArgs) -> Result<String> {
    let seed = Series::from_text(op.field.clone(), &read_text(&a.seed)?).context("seed series")?;
    let rhs = match &a.rhs {
        Some(p) => Some(Series::from_text(op.field.clone(), &read_text(p)?).context("rhs series")?),
        None => None,
    };
    Ok(extend_series(op, &seed, rhs.as_ref(), a.to)?.to_text())
}

pub fn extend(a: ExtendArgs) -> Result<Outcome> {
    let text = match load_op(&a.op)? {
        AnyOp::Prime(op) => extend_in(&op, &a)?,
        AnyOp::Exact(op) => extend_in(&op, &a)?,
    };
    emit(a.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

pub fn crt(a: CrtArgs) -> Result<Outcome> {
    for (idx, rs) in parse_residue_tsv(&read_text(&a.input)?)? {
        match a.pow2 {
            Some(k) => {
                let (k, m) = strip_pow2_lift(&rs, k)?;
                println!("{idx}\t2^{k}*{m}");
            }
            None => println!("{idx}\t{}", crt_lift(&rs)?),
        }
    }
    Ok(Outcome::Done)
}

pub fn ratrec(a: ResidueArgs) -> Result<Outcome> {
    for (idx, rs) in parse_residue_tsv(&read_text(&a.input)?)? {
        println!("{idx}\t{}", rational_lift(&rs)?);
    }
    Ok(Outcome::Done)
}

pub fn estimate(a: EstimateArgs) -> Result<Outcome> {
    if a.fit != "quadratic" {
        bail!("only the quadratic fit is available");
    }
    let mut partial = Vec::new();
    for line in read_text(&a.input)?.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let mut it = line.split_whitespace();
        let (Some(n), Some(c)) = (it.next(), it.next()) else { bail!("expected `n c_n`, got `{line}`") };
        partial.push((n.parse::<usize>().context("index")?, parse_q(c)?));
    }
    let fit = estimate_prime_budget(&partial, a.horizon, a.headroom)?;
    let [c0, c1, c2] = fit.quadratic;
    println!("r(n) = {c0:.6} + {c1:.6e} n + {c2:.6e} n^2");
    println!("fitted max {:.3} at n = {:.1}", fit.fitted_max, fit.argmax);
    println!("predicted primes: {}", fit.predicted_max_primes);
    if let Some(p) = &a.plot {
        emit(Some(p), &budget_svg(&fit, a.horizon as f64))?;
    }
    Ok(Outcome::Done)
}
