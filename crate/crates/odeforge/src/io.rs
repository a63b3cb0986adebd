//! File helpers: reading inputs by path (`-` is stdin) and writing outputs
//! to a file or stdout.

use std::io::Read;
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_rational::BigRational;
use odeforge_core::continuation::bigfloat::{BigFloat, BigFloatField};
use odeforge_core::ffcore::series::parse_series_header;
use odeforge_core::ffcore::{read_series, AnySeries, Series};
use odeforge_core::field::parse_rational;
use odeforge_core::theta::{read_op, AnyOp};
use odeforge_core::ThetaOperatorX;

pub fn read_text(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn load_op(path: &Path) -> Result<AnyOp> {
    Ok(read_op(&read_text(path)?)?)
}

pub fn load_exact_op(path: &Path) -> Result<ThetaOperatorX> {
    match load_op(path)? {
        AnyOp::Exact(op) => Ok(op),
        AnyOp::Prime(_) => bail!("{} holds a mod-p operator; an exact one is needed", path.display()),
    }
}

/// A series in any of the three coefficient domains.
pub enum Loaded {
    Any(AnySeries),
    Float(Series<BigFloatField>),
}

pub fn load_series(path: &Path) -> Result<Loaded> {
    let text = read_text(path)?;
    let h = parse_series_header(&text)?;
    if let Some(d) = h.prime.strip_prefix("float") {
        let digits: usize = d.parse().context("bad float precision in series header")?;
        return Ok(Loaded::Float(Series::from_text(BigFloatField { digits }, &text)?));
    }
    Ok(Loaded::Any(read_series(&text)?))
}

/// Coefficients as big floats (exact series are converted at `prec`).
pub fn series_floats(l: &Loaded, prec: usize) -> Result<Vec<BigFloat>> {
    match l {
        Loaded::Float(s) => Ok(s.coeffs.clone()),
        Loaded::Any(AnySeries::Exact(s)) => Ok(s.coeffs.iter().map(|c| BigFloat::from_rational(c, prec)).collect()),
        Loaded::Any(AnySeries::Prime(_)) => bail!("a mod-p series has no magnitudes; use an exact or float series"),
    }
}

/// One value per line: a rational, a decimal, or a tagged `x@digits`.
pub fn read_values(path: &Path) -> Result<Vec<BigFloat>> {
    read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| BigFloat::parse_tagged(l).with_context(|| format!("bad value `{l}`")))
        .collect()
}

pub fn parse_q(s: &str) -> Result<BigRational> {
    Ok(parse_rational(s)?)
}
