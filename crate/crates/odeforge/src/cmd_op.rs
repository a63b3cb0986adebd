//! `odeforge op ...`: operator algebra on operator files.

use anyhow::{bail, Context, Result};
use odeforge_core::ffcore::{Poly, Series};
use odeforge_core::opalgebra::{
    adjoint, annihilator_of_rational, check_sym_decomposition, multiply, p_curvature_exact, p_curvature_nilpotent,
    right_divide, BlockScheme, SymMode,
};
use odeforge_core::theta::AnyOp;
use odeforge_core::{Field, ThetaOp};

use crate::cli::{OpCommand, Outcome};
use crate::io::{load_op, read_text};

fn divr_text<F: Field>(l: &ThetaOp<F>, r: &ThetaOp<F>) -> Result<String> {
    let d = right_divide(l, r)?;
    Ok(format!(
        "# multiplier {}\n# divides {}\n# quotient\n{}# remainder\n{}",
        d.multiplier.to_string_var("w"),
        d.divides(),
        d.quotient.to_text(),
        d.remainder.to_text()
    ))
}

fn apply_text<F: Field>(op: &ThetaOp<F>, text: &str) -> Result<String> {
    let s = Series::from_text(op.field.clone(), text).context("series must share the operator's field")?;
    Ok(op.apply(&s)?.to_text())
}

fn parse_mode(mode: &str) -> Result<SymMode> {
    if mode == "product" {
        return Ok(SymMode::Product);
    }
    match mode.strip_prefix("power:").map(str::parse::<usize>) {
        Some(Ok(n)) => Ok(SymMode::Power(n)),
        _ => bail!("mode must be `product` or `power:<n>`"),
    }
}

pub fn run(c: OpCommand) -> Result<Outcome> {
    match c {
        OpCommand::Mul { a, b } => {
            let text = match (load_op(&a)?, load_op(&b)?) {
                (AnyOp::Exact(x), AnyOp::Exact(y)) => multiply(&x, &y).to_text(),
                (AnyOp::Prime(x), AnyOp::Prime(y)) if x.field == y.field => multiply(&x, &y).to_text(),
                _ => bail!("operators live in different fields"),
            };
            print!("{text}");
        }
        OpCommand::Divr { l, r } => {
            let text = match (load_op(&l)?, load_op(&r)?) {
                (AnyOp::Exact(x), AnyOp::Exact(y)) => divr_text(&x, &y)?,
                (AnyOp::Prime(x), AnyOp::Prime(y)) if x.field == y.field => divr_text(&x, &y)?,
                _ => bail!("operators live in different fields"),
            };
            print!("{text}");
        }
        OpCommand::Adjoint { op } => {
            let text = match load_op(&op)? {
                AnyOp::Exact(x) => adjoint(&x).to_text(),
                AnyOp::Prime(x) => adjoint(&x).to_text(),
            };
            print!("{text}");
        }
        OpCommand::Apply { op, series } => {
            let s = read_text(&series)?;
            let text = match load_op(&op)? {
                AnyOp::Exact(x) => apply_text(&x, &s)?,
                AnyOp::Prime(x) => apply_text(&x, &s)?,
            };
            print!("{text}");
        }
        OpCommand::Pcurv { op, primes } => match load_op(&op)? {
            AnyOp::Prime(x) => println!("p={}: {}", x.field.p(), p_curvature_nilpotent(&x)?),
            AnyOp::Exact(x) => {
                if primes.is_empty() {
                    bail!("an exact operator needs --primes");
                }
                for p in primes {
                    match p_curvature_exact(&x, p) {
                        Ok(c) => println!("p={p}: {c}"),
                        Err(e) => println!("p={p}: skipped ({e})"),
                    }
                }
            }
        },
        OpCommand::AnnRational { num, den } => {
            let n = Poly::parse(&num, "w")?;
            let d = Poly::parse(&den, "w")?;
            print!("{}", annihilator_of_rational(&n, &d)?.to_text());
        }
        OpCommand::Blocks { schemes, config, mode } => {
            let targets = schemes
                .iter()
                .map(|s| {
                    let (pt, text) = s.split_once('=').context("scheme must be `point=blocks`")?;
                    Ok(BlockScheme::parse(pt.trim(), text)?)
                })
                .collect::<Result<Vec<_>>>()?;
            let v = check_sym_decomposition(&targets, &config, parse_mode(&mode)?);
            println!("{v}");
        }
    }
    Ok(Outcome::Done)
}
