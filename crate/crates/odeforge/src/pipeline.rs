//! Reconstruction and factoring pipelines.
//!
//! Reconstruction: per prime, guess an annihilator, extend the series with
//! it, re-guess the minimal operator on the longer series; then lift the
//! normalized operators to Q and verify the result from the artifact files
//! alone. Factoring: probe Frobenius solutions for right factors at 0, at the
//! head roots and at accidental roots, recursing into quotient and factor.
//!
//! Every run writes `manifest.json` with the config, input hashes and
//! artifact hashes. Runs are deterministic: per-prime jobs execute on a
//! pool of configured width and are merged in prime order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use odeforge_core::ffcore::{Poly, Series};
use odeforge_core::guess::{extend_series, guess_ode_with, GuessOptions, DEFAULT_MARGIN};
use odeforge_core::localfrob::{
    accidental_root_factors, frobenius_solve, indicial, probe_right_factor, probe_sweep, AcrootOptions, Center,
    DEFAULT_DEPTH_BUDGET,
};
use odeforge_core::opalgebra::{p_curvature_exact, right_divide, PCurvature};
use odeforge_core::reconstruct::{
    estimate_prime_budget, lift_operator, pow2_times, rational_lift, strip_pow2_lift, ResidueSet,
};
use odeforge_core::theta::AnyOp;
use odeforge_core::{
    field::{parse_rational, prime_pool},
    Field, PrimeField, Rationals, ThetaOperatorP, ThetaOperatorX,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cli::{Outcome, PipelineKind};
use crate::io::read_text;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub primes: PrimeSpec,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub lift: LiftSpec,
    pub input: InputSpec,
    pub output: OutputSpec,
    #[serde(default)]
    pub jobs: Jobs,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub factor: FactorSpec,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PrimeSpec {
    /// Primes used for lifting.
    pub count: usize,
    /// Extra primes used only to check the lifted operator.
    #[serde(default = "one")]
    pub check: usize,
    /// Pool of descending primes below this bound.
    #[serde(default = "default_below")]
    pub below: u64,
    /// Explicit pool, overriding `below`.
    #[serde(default)]
    pub pool: Vec<u64>,
}

fn one() -> usize {
    1
}

fn default_below() -> u64 {
    1 << 15
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub max_order: usize,
    pub max_degree: usize,
    pub margin: usize,
    /// Length of the extended series; no extension when absent.
    pub extend_to: Option<usize>,
    /// Degree cap of the minimal re-guess; `max_degree` when absent.
    pub reguess_max_degree: Option<usize>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_order: 4, max_degree: 8, margin: DEFAULT_MARGIN, extend_to: None, reguess_max_degree: None }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct LiftSpec {
    /// `rational` or `integer` (power-of-two stripping after a normalizer).
    pub mode: String,
    pub normalizer: String,
    pub k_max: u32,
    pub headroom: u64,
}

impl Default for LiftSpec {
    fn default() -> Self {
        LiftSpec { mode: "rational".into(), normalizer: "1".into(), k_max: 64, headroom: 2 }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    /// Per-prime series files.
    #[serde(default)]
    pub series: Vec<PathBuf>,
    /// Planted problem generating the series.
    pub plant: Option<Plant>,
    /// Operator file for the factor pipeline.
    pub operator: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Plant {
    pub operator: PathBuf,
    pub seed: Vec<String>,
    pub terms: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Jobs {
    pub width: usize,
}

impl Default for Jobs {
    fn default() -> Self {
        Jobs { width: 1 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySpec {
    /// Small primes for the p-curvature spot check.
    pub pcurv_primes: Vec<u64>,
    /// Operators that must divide the result on the right.
    pub right_factors: Vec<PathBuf>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec { pcurv_primes: vec![5, 7, 11], right_factors: vec![] }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FactorSpec {
    pub depth_budget: usize,
    /// Series terms per probe solution.
    pub order_budget: usize,
    pub max_degree: Option<usize>,
    /// Irreducible head factor for accidental roots; by default the part of
    /// the head without rational roots.
    pub h: Option<String>,
    /// Free coefficients are swept over F_p only for p up to this bound.
    pub sweep_limit: u64,
}

impl Default for FactorSpec {
    fn default() -> Self {
        FactorSpec { depth_budget: DEFAULT_DEPTH_BUDGET, order_budget: 120, max_degree: None, h: None, sweep_limit: 1000 }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).context("parsing pipeline config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.primes.count == 0 {
            bail!("primes.count must be positive");
        }
        if self.jobs.width == 0 {
            bail!("jobs.width must be positive");
        }
        if !matches!(self.lift.mode.as_str(), "rational" | "integer") {
            bail!("lift.mode must be `rational` or `integer`");
        }
        if self.input.series.is_empty() == self.input.plant.is_none() && self.input.operator.is_none() {
            bail!("give exactly one of input.series and input.plant");
        }
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Manifest: config, input hashes and artifact hashes, all in sorted maps.
#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
pub struct Manifest {
    pub kind: String,
    pub config: Option<PipelineConfig>,
    pub inputs: BTreeMap<String, String>,
    pub artifacts: BTreeMap<String, String>,
    pub status: String,
}

struct Run {
    base: PathBuf,
    out: PathBuf,
    manifest: Manifest,
}

impl Run {
    fn new(kind: &str, cfg: &PipelineConfig, base: &Path) -> Result<Self> {
        let out = base.join(&cfg.output.dir);
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let manifest = Manifest { kind: kind.into(), config: Some(cfg.clone()), ..Manifest::default() };
        Ok(Run { base: base.to_path_buf(), out, manifest })
    }

    fn input(&mut self, rel: &Path) -> Result<String> {
        let text = read_text(&self.base.join(rel))?;
        self.manifest.inputs.insert(rel.display().to_string(), sha256_hex(text.as_bytes()));
        Ok(text)
    }

    fn artifact(&mut self, name: &str, text: &str) -> Result<()> {
        std::fs::write(self.out.join(name), text).with_context(|| format!("writing {name}"))?;
        self.manifest.artifacts.insert(name.into(), sha256_hex(text.as_bytes()));
        Ok(())
    }

    fn finish(mut self, status: &str) -> Result<()> {
        self.manifest.status = status.into();
        let json = serde_json::to_string_pretty(&self.manifest)? + "\n";
        std::fs::write(self.out.join("manifest.json"), json)?;
        Ok(())
    }
}

pub fn run_from_file(kind: PipelineKind, path: &Path) -> Result<Outcome> {
    let cfg = PipelineConfig::parse(&read_text(path)?)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    match kind {
        PipelineKind::Reconstruct => run_reconstruction_pipeline(&cfg, &base).map(|_| Outcome::Done),
        PipelineKind::Factor => run_factor_probe_pipeline(&cfg, &base).map(|r| r.outcome),
    }
}

/// Runs `jobs` on a pool of `width` threads; results keep the input order.
fn run_jobs<T: Sync, R: Send>(items: &[T], width: usize, job: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let mut out = Vec::with_capacity(items.len());
    for chunk in items.chunks(width.max(1)) {
        let part: Vec<R> = std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|it| s.spawn(|| job(it))).collect();
            handles.into_iter().map(|h| h.join().expect("job panicked")).collect()
        });
        out.extend(part);
    }
    out
}

/// Outcome of one per-prime job.
struct PrimeJob {
    prime: u64,
    series: Series<PrimeField>,
    first: ThetaOperatorP,
    minimal: ThetaOperatorP,
}

fn prime_job(series: Series<PrimeField>, b: &Budget) -> Result<PrimeJob> {
    let p = series.field.p();
    let opts = GuessOptions { margin: b.margin };
    let first = guess_ode_with(&series, b.max_order, b.max_degree, opts).with_context(|| format!("guess mod {p}"))?.operator;
    let series = match b.extend_to {
        Some(n) if n > series.count() => extend_series(&first, &series, None, n).with_context(|| format!("extend mod {p}"))?,
        _ => series,
    };
    let deg = b.reguess_max_degree.unwrap_or(b.max_degree);
    let minimal = guess_ode_with(&series, b.max_order, deg, opts).with_context(|| format!("re-guess mod {p}"))?.operator;
    Ok(PrimeJob { prime: p, series, first, minimal })
}

fn plant_series(plant: &ThetaOperatorX, seed: &[BigRational], terms: usize, p: u64) -> Result<Series<PrimeField>> {
    let f = PrimeField::new(p)?;
    let op = plant.reduce(f).ok_or_else(|| anyhow!("plant has a denominator divisible by {p}"))?;
    let seed: Option<Vec<u64>> = seed.iter().map(|c| f.from_rational(c)).collect();
    let seed = Series::new(f, "w", 0, seed.ok_or_else(|| anyhow!("seed not defined mod {p}"))?);
    Ok(extend_series(&op, &seed, None, terms)?)
}

/// Lifted operator plus the per-coefficient failure, if any.
fn lift(jobs: &[&PrimeJob], spec: &LiftSpec) -> Result<(ThetaOperatorX, Vec<u64>)> {
    let ops: Vec<ThetaOperatorP> = jobs.iter().map(|j| j.minimal.clone()).collect();
    if spec.mode == "rational" {
        return lift_operator(&ops).map_err(|e| advise(e.into(), &ops, spec));
    }
    let n: BigInt = spec.normalizer.parse().context("lift.normalizer must be an integer")?;
    let normed: Vec<ThetaOperatorP> = ops
        .iter()
        .map(|o| {
            let f = o.field;
            o.monic_lex().scale(&f.reduce_bigint(&n))
        })
        .collect();
    let (m, d) = (normed[0].order(), normed[0].degree());
    if normed.iter().any(|o| o.order() != m || o.degree() != d) {
        bail!("per-prime operators disagree in shape");
    }
    let flats: Vec<Vec<u64>> = normed.iter().map(|o| o.flat(m, d)).collect();
    let mut vals = Vec::new();
    for i in 0..flats[0].len() {
        let rs = ResidueSet::new(normed.iter().zip(&flats).map(|(o, v)| (o.field.p(), v[i])).collect())?;
        let (k, mant) = strip_pow2_lift(&rs, spec.k_max).map_err(|e| advise(e.into(), &ops, spec))?;
        vals.push(BigRational::new(pow2_times(k, &mant), n.clone()));
    }
    let rows = vals.chunks(d + 1).map(|c| c.to_vec()).collect();
    Ok((ThetaOperatorX::from_rationals(rows), normed.iter().map(|o| o.field.p()).collect()))
}

/// Attaches a prime-budget estimate from the coefficients that do lift.
fn advise(e: anyhow::Error, ops: &[ThetaOperatorP], spec: &LiftSpec) -> anyhow::Error {
    let op = ops[0].monic_lex();
    let (m, d) = (op.order(), op.degree());
    let normed: Vec<Vec<u64>> = ops.iter().map(|o| o.monic_lex().flat(m, d)).collect();
    let mut partial = Vec::new();
    for i in 0..normed[0].len() {
        let Ok(rs) = ResidueSet::new(ops.iter().zip(&normed).map(|(o, v)| (o.field.p(), v[i])).collect()) else {
            continue;
        };
        if let Ok(q) = rational_lift(&rs) {
            partial.push((i, q));
        }
    }
    let advice = match estimate_prime_budget(&partial, normed[0].len(), spec.headroom) {
        Ok(fit) => format!("estimated prime budget {} (have {})", fit.predicted_max_primes, ops.len()),
        Err(_) => format!("too few lifted coefficients to estimate a budget; add primes beyond {}", ops.len()),
    };
    e.context(advice)
}

/// Files produced by a reconstruction run.
#[derive(Clone, Debug)]
pub struct ReconstructionReport {
    pub operator: ThetaOperatorX,
    pub lift_primes: Vec<u64>,
    pub check_primes: Vec<u64>,
    pub verification: Vec<(String, bool)>,
    pub out_dir: PathBuf,
}

pub fn run_reconstruction_pipeline(cfg: &PipelineConfig, base: &Path) -> Result<ReconstructionReport> {
    let mut run = Run::new("reconstruct", cfg, base)?;
    let series: Vec<Series<PrimeField>> = if let Some(plant) = &cfg.input.plant {
        let text = run.input(&plant.operator)?;
        let op = match odeforge_core::theta::read_op(&text)? {
            AnyOp::Exact(op) => op,
            AnyOp::Prime(_) => bail!("the plant must be an exact operator"),
        };
        let seed: Vec<BigRational> = plant.seed.iter().map(|s| parse_rational(s)).collect::<Result<_, _>>()?;
        let pool = if cfg.primes.pool.is_empty() {
            prime_pool(cfg.primes.count + cfg.primes.check, cfg.primes.below)
        } else {
            cfg.primes.pool.clone()
        };
        pool.iter().map(|&p| plant_series(&op, &seed, plant.terms, p)).collect::<Result<_>>()?
    } else {
        let mut v = Vec::new();
        for path in &cfg.input.series {
            let text = run.input(path)?;
            match odeforge_core::ffcore::read_series(&text)? {
                odeforge_core::ffcore::AnySeries::Prime(s) => v.push(s),
                _ => bail!("{} is not a mod-p series", path.display()),
            }
        }
        v
    };
    let need = cfg.primes.count + cfg.primes.check;
    if series.len() < need {
        bail!("{} primes available, {} needed ({} lift + {} check)", series.len(), need, cfg.primes.count, cfg.primes.check);
    }
    let results = run_jobs(&series[..need], cfg.jobs.width, |s| prime_job(s.clone(), &cfg.budget));
    let mut jobs = Vec::new();
    let mut log = String::new();
    for r in results {
        let job = r?;
        let _ = writeln!(
            log,
            "p={} first order={} degree={} minimal order={} degree={} terms={}",
            job.prime,
            job.first.order(),
            job.first.degree(),
            job.minimal.order(),
            job.minimal.degree(),
            job.series.count()
        );
        run.artifact(&format!("p{}.ser", job.prime), &job.series.to_text())?;
        run.artifact(&format!("p{}.op", job.prime), &job.minimal.to_text())?;
        jobs.push(job);
    }
    run.artifact("jobs.log", &log)?;
    let (lift_jobs, check_jobs) = jobs.split_at(cfg.primes.count);
    let lift_refs: Vec<&PrimeJob> = lift_jobs.iter().collect();
    let (exact, used) = match lift(&lift_refs, &cfg.lift) {
        Ok(x) => x,
        Err(e) => {
            run.finish("error: lift")?;
            return Err(e);
        }
    };
    run.artifact("exact.op", &exact.to_text())?;
    for rf in &cfg.verify.right_factors {
        run.input(rf)?;
    }
    let check_primes: Vec<u64> = check_jobs.iter().map(|j| j.prime).collect();
    let plant = cfg.input.plant.as_ref().map(|p| p.operator.clone());
    let verification = verify_artifacts(&run.out, &base.to_path_buf(), &used, &check_primes, plant.as_deref(), &cfg.verify)?;
    let mut vlog = String::new();
    for (name, ok) in &verification {
        let _ = writeln!(vlog, "{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    run.artifact("verify.log", &vlog)?;
    let all_ok = verification.iter().all(|v| v.1);
    let out_dir = run.out.clone();
    run.finish(if all_ok { "verified" } else { "error: verification" })?;
    if !all_ok {
        bail!("verification failed:\n{vlog}");
    }
    Ok(ReconstructionReport { operator: exact, lift_primes: used, check_primes, verification, out_dir })
}

/// Re-reads `exact.op` and the per-prime series from `dir` and runs the
/// correctness battery: apply-to-zero modulo every prime, right
/// divisibility, rational local exponents, and p-curvature nilpotence.
pub fn verify_artifacts(
    dir: &Path,
    base: &Path,
    lift_primes: &[u64],
    check_primes: &[u64],
    plant: Option<&Path>,
    spec: &VerifySpec,
) -> Result<Vec<(String, bool)>> {
    let op = match odeforge_core::theta::read_op(&read_text(&dir.join("exact.op"))?)? {
        AnyOp::Exact(op) => op,
        AnyOp::Prime(_) => bail!("exact.op holds a mod-p operator"),
    };
    let mut out = Vec::new();
    for &p in lift_primes.iter().chain(check_primes) {
        let f = PrimeField::new(p)?;
        let s = Series::from_text(f, &read_text(&dir.join(format!("p{p}.ser")))?)?;
        let ok = op.reduce(f).map_or(false, |r| r.apply(&s).map_or(false, |v| v.is_zero()));
        let role = if check_primes.contains(&p) { "check" } else { "lift" };
        out.push((format!("apply-to-zero mod {p} ({role})"), ok));
    }
    if let Some(plant) = plant {
        if let AnyOp::Exact(pl) = odeforge_core::theta::read_op(&read_text(&base.join(plant))?)? {
            let ok = right_divide(&pl, &op).map_or(false, |d| d.divides());
            out.push(("plant is right-divisible by the result".into(), ok));
        }
    }
    for rf in &spec.right_factors {
        if let AnyOp::Exact(r) = odeforge_core::theta::read_op(&read_text(&base.join(rf))?)? {
            let ok = right_divide(&op, &r).map_or(false, |d| d.divides());
            out.push((format!("right-divisible by {}", rf.display()), ok));
        }
    }
    let mut points = vec![BigRational::zero()];
    let head = op.to_d_form().pop().unwrap_or_else(|| Poly::zero(Rationals));
    points.extend(head.rational_roots().into_iter().map(|r| r.0).filter(|c| !c.is_zero()));
    for c in points {
        let ok = indicial(&op, &Center::Point(c.clone())).map_or(false, |ind| ind.unresolved == 0);
        out.push((format!("rational exponents at w={c}"), ok));
    }
    for &p in &spec.pcurv_primes {
        let ok = matches!(p_curvature_exact(&op, p), Ok(PCurvature::Zero | PCurvature::Nilpotent(_)));
        out.push((format!("p-curvature nilpotent mod {p}"), ok));
    }
    Ok(out)
}

/// How one probe solution was resolved.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbeStatus {
    Factor { order: usize, alpha: Option<u64> },
    /// No annihilator of lower order: the solution carries the operator's
    /// singularities.
    Excluded,
    /// Free coefficients left unswept.
    Undecided { free: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRecord {
    pub point: String,
    pub solution: String,
    pub status: ProbeStatus,
}

/// Node of the factor tree: `op = left · right` when split.
#[derive(Clone, Debug)]
pub struct FactorNode {
    pub op: ThetaOperatorP,
    pub probes: Vec<ProbeRecord>,
    pub split: Option<Box<(FactorNode, FactorNode)>>,
}

impl FactorNode {
    fn undecided(&self) -> bool {
        match &self.split {
            Some(b) => b.0.undecided() || b.1.undecided(),
            None => self.probes.iter().any(|p| matches!(p.status, ProbeStatus::Undecided { .. })),
        }
    }

    /// Irreducible leaves, left to right.
    pub fn leaves(&self) -> Vec<&ThetaOperatorP> {
        match &self.split {
            Some(b) => {
                let mut v = b.0.leaves();
                v.extend(b.1.leaves());
                v
            }
            None => vec![&self.op],
        }
    }

    fn render(&self, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        let _ = writeln!(out, "{pad}order {} degree {}: {}", self.op.order(), self.op.degree(), self.op.pretty());
        for p in &self.probes {
            let s = match &p.status {
                ProbeStatus::Factor { order, alpha: None } => format!("right factor of order {order}"),
                ProbeStatus::Factor { order, alpha: Some(a) } => format!("right factor of order {order} at alpha={a}"),
                ProbeStatus::Excluded => "excluded (needs the full order)".into(),
                ProbeStatus::Undecided { free } => format!("undecided ({free} free coefficient(s))"),
            };
            let _ = writeln!(out, "{pad}  {} {}: {s}", p.point, p.solution);
        }
        match &self.split {
            Some(b) => {
                let _ = writeln!(out, "{pad}  = left · right");
                b.0.render(indent + 1, out);
                b.1.render(indent + 1, out);
            }
            None if self.op.order() > 1 && !self.undecided() => {
                let sing: Vec<String> = head_roots(&self.op).iter().map(u64::to_string).collect();
                let _ = writeln!(out, "{pad}  no factors; all probe solutions singular at w in {{{}}}", sing.join(", "));
            }
            None => {}
        }
    }
}

fn head_roots(op: &ThetaOperatorP) -> Vec<u64> {
    let head = op.to_d_form().pop().unwrap_or_else(|| Poly::zero(op.field));
    head.roots().into_iter().map(|r| r.0).filter(|&r| r != 0).collect()
}

/// Centers to probe: 0 and the nonzero head roots in F_p.
fn probe_centers(op: &ThetaOperatorP) -> Vec<(Center, u64)> {
    let mut v = vec![(Center::Point(BigRational::zero()), 0)];
    v.extend(head_roots(op).into_iter().map(|r| (Center::ModP(r), r)));
    v
}

/// First right factor of `op` found by probing, with the probe log.
fn find_right_factor(
    op: &ThetaOperatorP,
    spec: &FactorSpec,
    accidental: Option<&Poly<Rationals>>,
) -> (Option<ThetaOperatorP>, Vec<ProbeRecord>) {
    let f = op.field;
    let m = op.order();
    let mut log = Vec::new();
    if m <= 1 {
        return (None, log);
    }
    let accepts = |r: &ThetaOperatorP| r.order() >= 1 && r.order() < m && right_divide(op, r).map_or(false, |d| d.divides());
    for (center, c) in probe_centers(op) {
        let label = if c == 0 { "w=0".to_string() } else { format!("w={c}") };
        let Ok(basis) = frobenius_solve(op, &center, spec.depth_budget, spec.order_budget) else {
            continue;
        };
        let back = |r: ThetaOperatorP| if c == 0 { r } else { r.recenter(&f.neg(&c)) };
        for sol in &basis.solutions {
            let probe = probe_right_factor(&basis.local_op, sol, m - 1, spec.max_degree).map(back);
            if let Some(r) = probe.filter(|r| accepts(r)) {
                log.push(ProbeRecord { point: label.clone(), solution: sol.name.clone(), status: ProbeStatus::Factor { order: r.order(), alpha: None } });
                return (Some(r.normalize()), log);
            }
            if sol.free.is_empty() {
                log.push(ProbeRecord { point: label.clone(), solution: sol.name.clone(), status: ProbeStatus::Excluded });
                continue;
            }
            if sol.free.len() == 1 && f.p() <= spec.sweep_limit {
                let other = basis.solutions.iter().find(|s| s.name == sol.free[0]);
                let hit = other.and_then(|b| probe_sweep(&basis.local_op, sol, b, m - 1, spec.max_degree));
                if let Some((alpha, r)) = hit.map(|(a, r)| (a, back(r))).filter(|(_, r)| accepts(r)) {
                    log.push(ProbeRecord {
                        point: label.clone(),
                        solution: sol.name.clone(),
                        status: ProbeStatus::Factor { order: r.order(), alpha: Some(alpha) },
                    });
                    return (Some(r.normalize()), log);
                }
                log.push(ProbeRecord { point: label.clone(), solution: sol.name.clone(), status: ProbeStatus::Excluded });
                continue;
            }
            log.push(ProbeRecord { point: label.clone(), solution: sol.name.clone(), status: ProbeStatus::Undecided { free: sol.free.len() } });
        }
    }
    if let Some(h) = accidental {
        let opts = AcrootOptions { depth_budget: spec.depth_budget, order_budget: spec.order_budget, max_degree: spec.max_degree };
        if let Ok(all) = accidental_root_factors(op, h, opts) {
            for r in all {
                match r {
                    Ok(a) if accepts(&a.operator) => {
                        log.push(ProbeRecord {
                            point: format!("accidental root w_p={}", a.w_p),
                            solution: "probe".into(),
                            status: ProbeStatus::Factor { order: a.operator.order(), alpha: None },
                        });
                        return (Some(a.operator.normalize()), log);
                    }
                    Ok(a) => log.push(ProbeRecord { point: format!("accidental root w_p={}", a.w_p), solution: "probe".into(), status: ProbeStatus::Excluded }),
                    Err(_) => {}
                }
            }
        }
    }
    (None, log)
}

fn factor_node(op: &ThetaOperatorP, spec: &FactorSpec, accidental: Option<&Poly<Rationals>>) -> FactorNode {
    let (found, probes) = find_right_factor(op, spec, accidental);
    let split = found.and_then(|r| {
        let d = right_divide(op, &r).ok()?;
        let left = d.quotient.normalize();
        Some(Box::new((factor_node(&left, spec, accidental), factor_node(&r, spec, accidental))))
    });
    FactorNode { op: op.clone(), probes, split }
}

#[derive(Clone, Debug)]
pub struct FactorReport {
    pub prime: u64,
    pub tree: FactorNode,
    pub text: String,
    pub outcome: Outcome,
}

/// Part of the exact head with the rational roots removed.
fn irrational_head_part(op: &ThetaOperatorX) -> Option<Poly<Rationals>> {
    let mut head = op.to_d_form().pop()?;
    for (c, mult) in head.rational_roots() {
        let lin = Poly::new(Rationals, vec![-c, BigRational::one()]);
        for _ in 0..mult {
            head = head.div_exact(&lin)?;
        }
    }
    (head.deg().unwrap_or(0) >= 2).then_some(head)
}

pub fn run_factor_probe_pipeline(cfg: &PipelineConfig, base: &Path) -> Result<FactorReport> {
    let mut run = Run::new("factor", cfg, base)?;
    let path = cfg.input.operator.as_ref().ok_or_else(|| anyhow!("input.operator is required"))?;
    let text = run.input(path)?;
    let (op, h) = match odeforge_core::theta::read_op(&text)? {
        AnyOp::Prime(op) => (op, cfg.factor.h.as_deref().map(|t| Poly::parse(t, "w")).transpose()?),
        AnyOp::Exact(x) => {
            let p = cfg.primes.pool.first().copied().unwrap_or_else(|| prime_pool(1, cfg.primes.below)[0]);
            let red = x.reduce(PrimeField::new(p)?).ok_or_else(|| anyhow!("operator does not reduce mod {p}"))?;
            let h = match &cfg.factor.h {
                Some(t) => Some(Poly::parse(t, "w")?),
                None => irrational_head_part(&x),
            };
            (red, h)
        }
    };
    let tree = factor_node(&op, &cfg.factor, h.as_ref());
    let mut text = format!("factor tree mod {}\n", op.field.p());
    tree.render(0, &mut text);
    let outcome = if tree.undecided() { Outcome::Undecided } else { Outcome::Done };
    let _ = writeln!(text, "status: {}", if outcome == Outcome::Done { "decided" } else { "undecided" });
    run.artifact("factor_report.txt", &text)?;
    for (i, leaf) in tree.leaves().iter().enumerate() {
        run.artifact(&format!("factor{i}.op"), &leaf.to_text())?;
    }
    run.finish(if outcome == Outcome::Done { "decided" } else { "undecided" })?;
    Ok(FactorReport { prime: op.field.p(), tree, text, outcome })
}

/// Checks `manifest.json` against the files in its directory.
pub fn check_manifest(dir: &Path) -> Result<Vec<(String, bool)>> {
    let m: Manifest = serde_json::from_str(&read_text(&dir.join("manifest.json"))?)?;
    m.artifacts
        .iter()
        .map(|(name, hash)| {
            let bytes = std::fs::read(dir.join(name)).with_context(|| format!("reading {name}"))?;
            Ok((name.clone(), &sha256_hex(&bytes) == hash))
        })
        .collect()
}

/// Exposed for callers that build configs programmatically.
pub fn write_config(cfg: &PipelineConfig) -> Result<String> {
    Ok(toml::to_string(cfg)?)
}
