//! Local analysis commands: Frobenius bases, right-factor probes and
//! accidental-root factors.

use anyhow::{bail, Result};
use odeforge_core::ffcore::Poly;
use odeforge_core::localfrob::{
    accidental_root_factors, b2_normal_form, frobenius_solve, probe_series, read_logsol, split_roots,
    AcrootOptions, AnyLogSolution, Center, FrobeniusBasis, LocalField, LogSolution,
};
use odeforge_core::reconstruct::lift_operator;
use odeforge_core::theta::AnyOp;
use odeforge_core::{default_primes, Field, PrimeField, ThetaOp, ThetaOperatorP};

use crate::cli::{AcrootArgs, FrobeniusArgs, Outcome, ProbeArgs};
use crate::io::{emit, load_op, read_text};

fn basis_of<F: LocalField>(op: &ThetaOp<F>, a: &FrobeniusArgs) -> Result<FrobeniusBasis<F>> {
    Ok(frobenius_solve(op, &Center::parse(&a.at)?, a.depth, a.terms)?)
}

fn write_basis<F: Field>(b: &FrobeniusBasis<F>, a: &FrobeniusArgs) -> Result<()> {
    eprintln!("{} scheme {}", b.frame.label(), b.scheme);
    let mut all = String::new();
    for s in &b.solutions {
        match &a.out_dir {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                let file: String = s.name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
                emit(Some(&dir.join(format!("{file}.lsol"))), &s.to_text())?;
            }
            None => {
                all.push_str(&s.to_text());
                all.push('\n');
            }
        }
    }
    if a.out_dir.is_none() {
        emit(None, &all)?;
    }
    Ok(())
}

pub fn frobenius(a: FrobeniusArgs) -> Result<Outcome> {
    match load_op(&a.op)? {
        AnyOp::Prime(op) => write_basis(&basis_of(&op, &a)?, &a)?,
        AnyOp::Exact(op) => write_basis(&basis_of(&op, &a)?, &a)?,
    }
    Ok(Outcome::Done)
}

fn probe_of<F: Field>(s: &LogSolution<F>, a: &ProbeArgs) -> Result<()> {
    match probe_series(&s.top(), &s.exponent, a.max_order, a.max_degree) {
        Some(op) => emit(a.out.as_deref(), &op.to_text()),
        None => {
            println!("no annihilator of order <= {}", a.max_order);
            Ok(())
        }
    }
}

pub fn probe(a: ProbeArgs) -> Result<Outcome> {
    match read_logsol(&read_text(&a.sol)?)? {
        AnyLogSolution::Prime(s) => probe_of(&s, &a)?,
        AnyLogSolution::Exact(s) => probe_of(&s, &a)?,
    }
    Ok(Outcome::Done)
}

/// Factors found at the accidental roots of `h` modulo one prime.
fn acroot_at(op: &ThetaOperatorP, h: &Poly<odeforge_core::Rationals>, opts: AcrootOptions) -> Option<ThetaOperatorP> {
    let p = op.field.p();
    let roots = split_roots(h, op.field);
    println!("p={p}: split roots {roots:?}");
    let results = accidental_root_factors(op, h, opts).ok()?;
    let mut found = None;
    for r in results {
        match r {
            Ok(f) => {
                println!("  w_p={} k={} factor order {} degree {}", f.w_p, f.k, f.operator.order(), f.operator.degree());
                found.get_or_insert(f.operator);
            }
            Err(e) => println!("  {e}"),
        }
    }
    found
}

pub fn acroot(a: AcrootArgs) -> Result<Outcome> {
    let h = Poly::parse(&a.h, "w")?;
    let opts = AcrootOptions { order_budget: a.order_budget, ..AcrootOptions::default() };
    let per_prime: Vec<ThetaOperatorP> = match load_op(&a.op)? {
        AnyOp::Prime(op) => acroot_at(&op, &h, opts).into_iter().collect(),
        AnyOp::Exact(op) => {
            let primes = if a.primes.is_empty() { default_primes(8) } else { a.primes.clone() };
            let mut out = Vec::new();
            for p in primes {
                let Some(red) = op.reduce(PrimeField::new(p)?) else { continue };
                out.extend(acroot_at(&red, &h, opts));
            }
            out
        }
    };
    match per_prime.len() {
        0 => bail!("no accidental-root factor found"),
        1 => print!("{}", per_prime[0].to_text()),
        _ => {
            let (exact, used) = lift_operator(&per_prime)?;
            eprintln!("lifted from {} primes", used.len());
            print!("{}", b2_normal_form(&exact).to_text());
        }
    }
    Ok(Outcome::Done)
}
