//! Randomized verification: parameter sampling with pole rejection, suite
//! execution and the JSON report.
//!
//! Every draw is keyed by `(seed, id, n, trial)` through SHA-256, so a
//! draw does not depend on execution order or thread count.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::identities::{
    self, catalog, edges, evaluate, find, numeric_sides, reduce_chain_check, DegenerationEdge, EvalError, Mode,
    ParamMap, ParamSpec, Sampling, SideValue, VerificationResult,
};
use crate::qexact::{LaurentPoly, RationalFn};
use crate::theta::{ThetaConfig, DEFAULT_POLE_TOL};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_STABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("no admissible draw for {id} at n = {n}, trial {trial} after {attempts} attempts")]
    ResamplingExhausted { id: String, n: i64, trial: u64, attempts: u32 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Rectangle for complex parameters, with a small disk around zero removed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub exclude_radius: f64,
}

impl Default for ParamBox {
    fn default() -> Self {
        Self { re: (-1.0, 1.0), im: (-1.0, 1.0), exclude_radius: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub trials: u64,
    pub p_radius: f64,
    pub q_annulus: (f64, f64),
    pub param_box: ParamBox,
    pub pole_tol: f64,
    /// Largest accepted result of the stability probe.
    pub stability_tol: f64,
    pub max_resamples: u32,
    pub theta_terms: usize,
    pub tail_tol: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        let theta = ThetaConfig::default();
        Self {
            seed: 0,
            trials: 10,
            p_radius: 0.5,
            q_annulus: (0.3, 0.9),
            param_box: ParamBox::default(),
            pole_tol: DEFAULT_POLE_TOL,
            stability_tol: DEFAULT_STABILITY_TOL,
            max_resamples: 1000,
            theta_terms: theta.max_terms,
            tail_tol: theta.tail_tol,
        }
    }
}

impl SampleConfig {
    pub fn theta(&self) -> Result<ThetaConfig, HarnessError> {
        ThetaConfig::new(self.theta_terms, self.tail_tol)
            .and_then(|c| c.with_pole_tol(self.pole_tol))
            .map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if !(0.0..=0.9).contains(&self.p_radius) {
            return bad("p_radius must lie in [0, 0.9]");
        }
        let (lo, hi) = self.q_annulus;
        if !(lo > 0.0 && lo <= hi) {
            return bad("q annulus must satisfy 0 < r_min <= r_max");
        }
        let b = self.param_box;
        if !(b.re.0 < b.re.1 && b.im.0 < b.im.1) {
            return bad("parameter box is empty");
        }
        let corner = b.re.0.abs().max(b.re.1.abs()).hypot(b.im.0.abs().max(b.im.1.abs()));
        if b.exclude_radius < 0.0 || b.exclude_radius >= corner {
            return bad("excluded disk covers the parameter box");
        }
        if !(self.stability_tol > 0.0) {
            return bad("stability_tol must be positive");
        }
        if self.max_resamples == 0 {
            return bad("max_resamples must be positive");
        }
        self.theta().map(|_| ())
    }
}

fn trial_rng(seed: u64, key: &str, n: i64, trial: u64) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((key.len() as u64).to_le_bytes());
    h.update(key.as_bytes());
    h.update(n.to_le_bytes());
    h.update(trial.to_le_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha20Rng::from_seed(digest)
}

fn draw(specs: &[ParamSpec], cfg: &SampleConfig, rng: &mut ChaCha20Rng) -> ParamMap {
    let tau = std::f64::consts::TAU;
    let mut out = ParamMap::new();
    let mut q = None;
    for s in specs {
        let v = match s.sampling {
            Sampling::Base => {
                let (lo, hi) = cfg.q_annulus;
                let r = if lo == hi { lo } else { rng.random_range(lo..hi) };
                let v = C64::from_polar(r, rng.random_range(0.0..tau) - tau / 2.0);
                q = Some(v);
                v
            }
            Sampling::Nome => {
                if cfg.p_radius == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    let r = cfg.p_radius * rng.random::<f64>().sqrt();
                    C64::from_polar(r, rng.random_range(0.0..tau) - tau / 2.0)
                }
            }
            Sampling::Box => {
                let b = cfg.param_box;
                loop {
                    let v = C64::new(rng.random_range(b.re.0..b.re.1), rng.random_range(b.im.0..b.im.1));
                    if v.norm() >= b.exclude_radius {
                        break v;
                    }
                }
            }
            Sampling::Int { lo, hi } => C64::new(rng.random_range(lo..=hi) as f64, 0.0),
            Sampling::BasePower(_) => continue,
        };
        out.insert(s.name.to_string(), v);
    }
    for s in specs {
        if let Sampling::BasePower(k) = s.sampling {
            let q = q.expect("a base-power parameter needs a base");
            out.insert(s.name.to_string(), (q.ln() * k as f64).exp());
        }
    }
    out
}

/// An accepted parameter draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub params: ParamMap,
    /// Stability probe at `params`.
    pub stability: f64,
    /// Draws rejected before this one.
    pub rejected: u32,
}

fn sample_with<F>(
    key: &str,
    specs: &[ParamSpec],
    cfg: &SampleConfig,
    n: i64,
    trial: u64,
    sides: F,
) -> Result<Draw, HarnessError>
where
    F: Fn(&ParamMap) -> Result<(C64, C64), EvalError>,
{
    let mut rng = trial_rng(cfg.seed, key, n, trial);
    for rejected in 0..cfg.max_resamples {
        let params = draw(specs, cfg, &mut rng);
        match admissible(&sides, specs, &params, cfg.stability_tol) {
            Ok(stability) => return Ok(Draw { params, stability, rejected }),
            Err(EvalError::DomainRejected(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(HarnessError::ResamplingExhausted { id: key.to_string(), n, trial, attempts: cfg.max_resamples })
}

/// Relative size of the parameter perturbations of the stability probe:
/// far above the unit roundoff, so rounding errors decorrelate, and far
/// below any tolerance, so the true change of the sides is negligible.
const PROBE_DELTA: f64 = 1e-13;

/// `params` with every continuous parameter scaled by `1 + delta e^{i phi_j}`
/// for distinct angles. Powers of the base follow the perturbed base.
fn perturbed(specs: &[ParamSpec], params: &ParamMap, delta: f64, offset: f64) -> ParamMap {
    const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
    let mut out = params.clone();
    let mut base = None;
    for (j, s) in specs.iter().enumerate() {
        if matches!(s.sampling, Sampling::Base | Sampling::Nome | Sampling::Box) {
            let f = C64::new(1.0, 0.0) + C64::from_polar(delta, offset + GOLDEN_ANGLE * (j + 1) as f64);
            let v = params[s.name] * f;
            if s.sampling == Sampling::Base {
                base = Some(v);
            }
            out.insert(s.name.to_string(), v);
        }
    }
    for s in specs {
        if let (Sampling::BasePower(k), Some(q)) = (s.sampling, base) {
            out.insert(s.name.to_string(), (q.ln() * k as f64).exp());
        }
    }
    out
}

/// Estimated rounding error of both sides at a draw, relative to the
/// scale used by the relative error.
///
/// The sides are recomputed at two perturbations of relative size
/// [`PROBE_DELTA`]; the largest change of either side is returned. Each
/// side is probed on its own, so the estimate never compares LHS with RHS.
pub fn stability_probe<F>(sides: F, specs: &[ParamSpec], params: &ParamMap) -> Result<f64, EvalError>
where
    F: Fn(&ParamMap) -> Result<(C64, C64), EvalError>,
{
    let (l, r) = sides(params)?;
    let scale = l.norm().max(r.norm()).max(1.0);
    let mut worst = 0.0f64;
    for offset in [0.0, 1.0] {
        let (l2, r2) = sides(&perturbed(specs, params, PROBE_DELTA, offset))?;
        worst = worst.max((l2 - l).norm()).max((r2 - r).norm());
    }
    Ok(worst / scale)
}

fn admissible<F>(sides: F, specs: &[ParamSpec], params: &ParamMap, tol: f64) -> Result<f64, EvalError>
where
    F: Fn(&ParamMap) -> Result<(C64, C64), EvalError>,
{
    let probe = stability_probe(sides, specs, params)?;
    if !(probe <= tol) {
        return Err(EvalError::DomainRejected(format!("stability probe {probe:.1e} exceeds {tol:.1e}")));
    }
    Ok(probe)
}

/// The first admissible draw for `(id, n, trial)`.
///
/// A draw is admissible when both sides evaluate without a pole hit, are
/// finite, and the stability probe is at most `cfg.stability_tol`.
pub fn sample_params(id: &str, cfg: &SampleConfig, n: i64, trial: u64) -> Result<ParamMap, HarnessError> {
    sample_identity(id, cfg, n, trial).map(|d| d.params)
}

pub fn sample_identity(id: &str, cfg: &SampleConfig, n: i64, trial: u64) -> Result<Draw, HarnessError> {
    let d = find(id)?;
    let theta = cfg.theta()?;
    sample_with(id, &d.params, cfg, n, trial, |x| numeric_sides(id, x, n, &theta))
}

fn edge_sides(edge: &DegenerationEdge, p: &ParamMap, n: i64, theta: &ThetaConfig) -> Result<(C64, C64), EvalError> {
    reduce_chain_check(edge.parent, edge.child, p, n, Mode::NumericElliptic, theta, f64::INFINITY)
        .map(|r| (r.lhs.approx(), r.rhs.approx()))
}

/// The first admissible draw for a degeneration edge.
pub fn sample_edge_params(
    edge: &DegenerationEdge,
    cfg: &SampleConfig,
    n: i64,
    trial: u64,
) -> Result<ParamMap, HarnessError> {
    sample_edge(edge, cfg, n, trial).map(|d| d.params)
}

pub fn sample_edge(edge: &DegenerationEdge, cfg: &SampleConfig, n: i64, trial: u64) -> Result<Draw, HarnessError> {
    let theta = cfg.theta()?;
    let key = format!("{}->{}", edge.parent, edge.child);
    sample_with(&key, &edge.params, cfg, n, trial, |x| edge_sides(edge, x, n, &theta))
}

/// A reported side: a complex number, a Laurent polynomial as a map from
/// exponent to rational string, or a quotient of two such maps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportValue {
    Complex([f64; 2]),
    Fraction { num: Coeffs, den: Coeffs },
    Poly(Coeffs),
}

/// Coefficients by exponent. JSON object keys are strings, so they are
/// parsed back explicitly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<String, String>")]
pub struct Coeffs(pub BTreeMap<i64, String>);

impl TryFrom<BTreeMap<String, String>> for Coeffs {
    type Error = std::num::ParseIntError;

    fn try_from(m: BTreeMap<String, String>) -> Result<Self, Self::Error> {
        m.into_iter().map(|(k, v)| Ok((k.parse()?, v))).collect::<Result<_, _>>().map(Coeffs)
    }
}

fn coeff_map(p: &LaurentPoly) -> Coeffs {
    Coeffs(p.terms().map(|(e, c)| (e, c.to_string())).collect())
}

fn canonical(f: &RationalFn) -> ReportValue {
    if let Some((c, e)) = f.den().as_monomial() {
        return ReportValue::Poly(coeff_map(&f.num().scale(&c.recip(), -e)));
    }
    ReportValue::Fraction { num: coeff_map(f.num()), den: coeff_map(f.den()) }
}

impl From<&SideValue> for ReportValue {
    fn from(v: &SideValue) -> Self {
        match v {
            SideValue::Complex(z) => ReportValue::Complex([z.re, z.im]),
            SideValue::Exact(f) => canonical(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub id: String,
    pub mode: Mode,
    pub n: i64,
    pub trial: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<ReportValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<ReportValue>,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
    pub params: BTreeMap<String, [f64; 2]>,
    /// Stability probe of a sampled draw.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability: Option<f64>,
    /// Draws rejected before the sampled one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rejected: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn param_dump(p: &ParamMap) -> BTreeMap<String, [f64; 2]> {
    p.iter().map(|(k, v)| (k.clone(), [v.re, v.im])).collect()
}

impl ReportEntry {
    fn from_result(r: &VerificationResult, trial: u64) -> Self {
        Self {
            id: r.id.clone(),
            mode: r.mode,
            n: r.n,
            trial,
            lhs: Some((&r.lhs).into()),
            rhs: Some((&r.rhs).into()),
            abs_err: r.abs_err,
            rel_err: r.rel_err,
            pass: r.pass,
            params: param_dump(&r.params),
            stability: None,
            rejected: None,
            error: None,
        }
    }

    fn sampled(mut self, d: &Draw) -> Self {
        self.stability = Some(d.stability);
        self.rejected = Some(d.rejected);
        self
    }

    fn failed(id: &str, mode: Mode, n: i64, trial: u64, params: &ParamMap, e: impl ToString) -> Self {
        Self {
            id: id.to_string(),
            mode,
            n,
            trial,
            lhs: None,
            rhs: None,
            abs_err: f64::MAX,
            rel_err: f64::MAX,
            pass: false,
            params: param_dump(params),
            stability: None,
            rejected: None,
            error: Some(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    pub failures: u64,
    pub max_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub ids: Vec<String>,
    pub n_max: i64,
    pub tol: f64,
    pub sample: SampleConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: RunConfig,
    pub results: Vec<ReportEntry>,
    pub summary: BTreeMap<String, Summary>,
    pub timings: Timings,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.results.iter().filter(|r| !r.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are finite")
    }

    /// JSON with the timing fields zeroed, for reproducibility comparisons.
    pub fn to_json_without_timings(&self) -> String {
        Self { timings: Timings::default(), ..self.clone() }.to_json()
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    fn new(config: RunConfig, results: Vec<ReportEntry>, started: Instant) -> Self {
        let mut summary: BTreeMap<String, Summary> = BTreeMap::new();
        for r in &results {
            let s = summary.entry(r.id.clone()).or_default();
            s.trials += 1;
            s.failures += u64::from(!r.pass);
            s.max_rel_err = s.max_rel_err.max(r.rel_err);
        }
        Self { config, results, summary, timings: Timings { total_seconds: started.elapsed().as_secs_f64() } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// Which kinds of checks a suite includes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub numeric: bool,
    pub exact: bool,
    pub chains: bool,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { numeric: true, exact: true, chains: false, execution: Execution::Parallel }
    }
}

#[derive(Debug, Clone)]
enum Job {
    Numeric { id: &'static str, n: i64, trial: u64 },
    Exact { id: &'static str, mode: Mode, n: i64, point: u64, params: ParamMap },
    Chain { edge: usize, n: i64, trial: u64 },
}

fn run_job(job: &Job, cfg: &SampleConfig, theta: &ThetaConfig, tol: f64) -> ReportEntry {
    match job {
        Job::Numeric { id, n, trial } => match sample_identity(id, cfg, *n, *trial) {
            Ok(d) => match evaluate(id, &d.params, *n, Mode::NumericElliptic, theta, tol) {
                Ok(r) => ReportEntry::from_result(&r, *trial).sampled(&d),
                Err(e) => ReportEntry::failed(id, Mode::NumericElliptic, *n, *trial, &d.params, e),
            },
            Err(e) => ReportEntry::failed(id, Mode::NumericElliptic, *n, *trial, &ParamMap::new(), e),
        },
        Job::Exact { id, mode, n, point, params } => match evaluate(id, params, *n, *mode, theta, tol) {
            Ok(r) => ReportEntry::from_result(&r, *point),
            Err(e) => ReportEntry::failed(id, *mode, *n, *point, params, e),
        },
        Job::Chain { edge, n, trial } => {
            let e = &edges()[*edge];
            let key = format!("{}->{}", e.parent, e.child);
            match sample_edge(e, cfg, *n, *trial) {
                Ok(d) => {
                    match reduce_chain_check(e.parent, e.child, &d.params, *n, Mode::NumericElliptic, theta, tol) {
                        Ok(r) => ReportEntry::from_result(&r, *trial).sampled(&d),
                        Err(err) => ReportEntry::failed(&key, Mode::NumericElliptic, *n, *trial, &d.params, err),
                    }
                }
                Err(err) => ReportEntry::failed(&key, Mode::NumericElliptic, *n, *trial, &ParamMap::new(), err),
            }
        }
    }
}

/// Integer grid points of an exact identity, skipping points where its
/// normalizer vanishes.
fn exact_points(d: &identities::IdentityDescriptor) -> Vec<ParamMap> {
    d.exact_grid
        .points()
        .into_iter()
        .filter(|p| identities::exact_sides(d.id, d.n_min, p).is_ok())
        .map(|p| p.into_iter().map(|(k, v)| (k, C64::new(v as f64, 0.0))).collect())
        .collect()
}

fn jobs(ids: &[String], n_max: i64, cfg: &SampleConfig, opts: RunOptions) -> Result<Vec<Job>, HarnessError> {
    let mut out = Vec::new();
    for id in ids {
        let d = find(id).map_err(|_| HarnessError::Config(format!("unknown identity {id:?}")))?;
        if opts.numeric {
            for n in d.n_min..=n_max {
                out.extend((0..cfg.trials).map(|trial| Job::Numeric { id: d.id, n, trial }));
            }
        }
        if let (true, Some(mode)) = (opts.exact, d.exact_mode()) {
            let points = exact_points(d);
            for n in d.n_min..=n_max {
                for (i, p) in points.iter().enumerate() {
                    out.push(Job::Exact { id: d.id, mode, n, point: i as u64, params: p.clone() });
                }
            }
        }
    }
    if opts.chains {
        for (i, e) in edges().iter().enumerate() {
            for n in e.n_min..=n_max {
                out.extend((0..cfg.trials).map(|trial| Job::Chain { edge: i, n, trial }));
            }
        }
    }
    Ok(out)
}

/// Runs every check for `ids` with `n` up to `n_max`.
///
/// Per-trial failures are recorded in the report; only configuration
/// problems abort.
pub fn run_suite_with(
    ids: &[String],
    n_max: i64,
    cfg: &SampleConfig,
    tol: f64,
    opts: RunOptions,
) -> Result<SuiteReport, HarnessError> {
    let started = Instant::now();
    cfg.validate()?;
    if !(tol >= 0.0) {
        return Err(HarnessError::Config("tolerance must be non-negative".into()));
    }
    let theta = cfg.theta()?;
    let jobs = jobs(ids, n_max, cfg, opts)?;
    let results: Vec<ReportEntry> = match opts.execution {
        Execution::Serial => jobs.iter().map(|j| run_job(j, cfg, &theta, tol)).collect(),
        Execution::Parallel => jobs.par_iter().map(|j| run_job(j, cfg, &theta, tol)).collect(),
    };
    let config = RunConfig { ids: ids.to_vec(), n_max, tol, sample: cfg.clone() };
    Ok(SuiteReport::new(config, results, started))
}

pub fn run_suite(ids: &[String], n_max: i64, cfg: &SampleConfig, tol: f64) -> Result<SuiteReport, HarnessError> {
    run_suite_with(ids, n_max, cfg, tol, RunOptions::default())
}

/// Every registered identity id.
pub fn all_ids() -> Vec<String> {
    catalog().iter().map(|d| d.id.to_string()).collect()
}

/// Which evaluation modes a single verification uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeChoice {
    /// Numeric, plus exact where supported.
    Auto,
    Exact,
    Numeric,
}

/// Checks one identity at one `n`. Parameters in `fixed` override the
/// sampled ones; for exact checks they select the integer grid point.
pub fn run_verify(
    id: &str,
    n: i64,
    choice: ModeChoice,
    fixed: &ParamMap,
    cfg: &SampleConfig,
    tol: f64,
) -> Result<SuiteReport, HarnessError> {
    let started = Instant::now();
    cfg.validate()?;
    let theta = cfg.theta()?;
    let d = find(id).map_err(|_| HarnessError::Config(format!("unknown identity {id:?}")))?;
    if n < d.n_min {
        return Err(HarnessError::Config(format!("n must be at least {} for {id}", d.n_min)));
    }
    for name in fixed.keys() {
        if !d.params.iter().any(|p| p.name == name) {
            return Err(HarnessError::Config(format!("{id} has no parameter {name:?}")));
        }
    }
    let exact = d.exact_mode();
    if choice == ModeChoice::Exact && exact.is_none() {
        return Err(HarnessError::Config(format!("{id} has no exact mode")));
    }
    let mut results = Vec::new();
    if choice != ModeChoice::Exact {
        let all_fixed = d.params.iter().all(|p| fixed.contains_key(p.name));
        let trials = if all_fixed { 1 } else { cfg.trials };
        let run = |trial: u64| {
            let sampled = if all_fixed { Ok(ParamMap::new()) } else { sample_params(id, cfg, n, trial) };
            match sampled {
                Ok(mut p) => {
                    p.extend(fixed.iter().map(|(k, v)| (k.clone(), *v)));
                    let stability = stability_probe(|x| numeric_sides(id, x, n, &theta), &d.params, &p).ok();
                    match evaluate(id, &p, n, Mode::NumericElliptic, &theta, tol) {
                        Ok(r) => ReportEntry { stability, ..ReportEntry::from_result(&r, trial) },
                        Err(e) => ReportEntry::failed(id, Mode::NumericElliptic, n, trial, &p, e),
                    }
                }
                Err(e) => ReportEntry::failed(id, Mode::NumericElliptic, n, trial, fixed, e),
            }
        };
        results.extend((0..trials).into_par_iter().map(run).collect::<Vec<_>>());
    }
    if let (true, Some(mode)) = (choice != ModeChoice::Numeric, exact) {
        let points: Vec<ParamMap> = exact_points(d)
            .into_iter()
            .filter(|p| fixed.iter().all(|(k, v)| p.get(k).is_none_or(|x| x == v)))
            .collect();
        if points.is_empty() {
            return Err(HarnessError::Config("fixed parameters match no exact grid point".into()));
        }
        results.extend(points.iter().enumerate().map(|(i, p)| match evaluate(id, p, n, mode, &theta, tol) {
            Ok(r) => ReportEntry::from_result(&r, i as u64),
            Err(e) => ReportEntry::failed(id, mode, n, i as u64, p, e),
        }));
    }
    let config = RunConfig { ids: vec![id.to_string()], n_max: n, tol, sample: cfg.clone() };
    Ok(SuiteReport::new(config, results, started))
}
