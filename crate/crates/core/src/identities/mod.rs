//! Registry of identities, each a pair of independently evaluated sides.
//!
//! [`catalog`] lists the descriptors; [`evaluate`] checks one identity at
//! one parameter point in a chosen [`Mode`]; [`reduce_chain_check`] checks
//! that a parent identity degenerates to a child under a limit.

mod chain;
pub mod closed;
pub mod families;
pub mod hyper;
pub mod multibasic;
pub mod qseries;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::elliptic::{EllipticError, EllipticParams, EllipticSystem, Specialization};
use crate::qexact::{exact_exponent, ExactQ, LaurentPoly, NumericQ, ProductFrac, QExactError, RationalFn};
use crate::theta::{ThetaConfig, ThetaError};

pub use chain::{edges, reduce_chain_check, DegenerationEdge};
use closed::ClosedSystem;
use families::Lines;

/// Parameter values by name. Integer parameters are stored as real parts.
pub type ParamMap = BTreeMap<String, C64>;

/// Base used to report a numeric error for a failed exact check.
pub const EXACT_PROBE_Q: f64 = 0.37;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ExactQ,
    NumericElliptic,
    ExactRational,
}

impl Mode {
    pub fn tag(self) -> &'static str {
        match self {
            Mode::ExactQ => "exact-q",
            Mode::NumericElliptic => "numeric-elliptic",
            Mode::ExactRational => "exact-rational",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        [Mode::ExactQ, Mode::NumericElliptic, Mode::ExactRational].into_iter().find(|m| m.tag() == tag)
    }

    pub fn is_exact(self) -> bool {
        self != Mode::NumericElliptic
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    Complex,
    Integer,
    NonNegativeInteger,
}

/// How the harness draws a parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sampling {
    /// A base in the configured annulus.
    Base,
    /// A nome in the configured disk.
    Nome,
    /// A point in the configured box.
    Box,
    /// A uniform integer in `lo..=hi`.
    Int { lo: i64, hi: i64 },
    /// `q^k` for the sampled base `q`.
    BasePower(i64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub sampling: Sampling,
}

impl ParamSpec {
    const fn new(name: &'static str, kind: ParamKind, sampling: Sampling) -> Self {
        Self { name, kind, sampling }
    }

    pub const fn base(name: &'static str) -> Self {
        Self::new(name, ParamKind::Complex, Sampling::Base)
    }

    pub const fn nome(name: &'static str) -> Self {
        Self::new(name, ParamKind::Complex, Sampling::Nome)
    }

    pub const fn complex(name: &'static str) -> Self {
        Self::new(name, ParamKind::Complex, Sampling::Box)
    }

    pub const fn base_power(name: &'static str, k: i64) -> Self {
        Self::new(name, ParamKind::Complex, Sampling::BasePower(k))
    }

    pub const fn count(name: &'static str, lo: i64, hi: i64) -> Self {
        Self::new(name, ParamKind::NonNegativeInteger, Sampling::Int { lo, hi })
    }
}

/// An integer grid for exact checks: every combination of the listed ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactGrid {
    pub axes: Vec<(&'static str, i64, i64)>,
}

impl ExactGrid {
    pub fn points(&self) -> Vec<BTreeMap<String, i64>> {
        let mut out = vec![BTreeMap::new()];
        for &(name, lo, hi) in &self.axes {
            let mut next = Vec::new();
            for point in &out {
                for v in lo..=hi {
                    let mut p = point.clone();
                    p.insert(name.to_string(), v);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Family {
    BasicG,
    BigId,
    TelC,
    TelA,
    SumEven,
    M3Rising,
    TelB,
}

/// Where a family's numbers and weights come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Route {
    Theta,
    Closed(Specialization),
}

type ExactFn = fn(&ExactQ, i64) -> Result<(ProductFrac, ProductFrac), QExactError>;
type NumericFn = fn(&NumericQ, i64) -> Result<(C64, C64), QExactError>;

#[derive(Clone, Copy)]
pub(crate) enum Eval {
    Family(Family, Route),
    Q { exact: ExactFn, numeric: NumericFn },
    Spc2,
    LineSum,
    SumCubes,
    Indef1,
    EIndef1,
    WarnaarCubesElliptic,
    CubicOdds,
    ThreeBase,
}

/// One registered identity.
#[derive(Clone)]
pub struct IdentityDescriptor {
    pub id: &'static str,
    pub title: &'static str,
    pub anchor: &'static str,
    pub params: Vec<ParamSpec>,
    pub modes: Vec<Mode>,
    pub n_min: i64,
    /// Integer parameter points for exact checks; a single empty point when
    /// the identity has no parameters besides `n`.
    pub exact_grid: ExactGrid,
    pub(crate) eval: Eval,
}

impl fmt::Debug for IdentityDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IdentityDescriptor")
            .field("id", &self.id)
            .field("params", &self.params)
            .field("modes", &self.modes)
            .field("n_min", &self.n_min)
            .finish()
    }
}

impl IdentityDescriptor {
    pub fn supports(&self, mode: Mode) -> bool {
        self.modes.contains(&mode)
    }

    /// The exact mode this identity supports, if any.
    pub fn exact_mode(&self) -> Option<Mode> {
        self.modes.iter().copied().find(|m| m.is_exact())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown identity {0:?}")]
    UnknownIdentity(String),
    #[error("parameters rejected: {0}")]
    DomainRejected(String),
    #[error("identity {id} does not support mode {mode}")]
    ModeUnsupported { id: String, mode: Mode },
    #[error("missing parameter {0:?}")]
    MissingParameter(String),
    #[error("parameter {name} = {value} must be an integer")]
    NonIntegerParameter { name: String, value: C64 },
    #[error("n = {n} is below the minimum {n_min}")]
    BelowMinimum { n: i64, n_min: i64 },
    #[error("no degeneration edge {parent} -> {child}")]
    UnknownEdge { parent: String, child: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl From<EllipticError> for EvalError {
    fn from(e: EllipticError) -> Self {
        match e {
            EllipticError::Theta(t) => t.into(),
            other => EvalError::DomainRejected(other.to_string()),
        }
    }
}

impl From<ThetaError> for EvalError {
    fn from(e: ThetaError) -> Self {
        match e {
            ThetaError::InvalidConfig(_) => EvalError::Config(e.to_string()),
            other => EvalError::DomainRejected(other.to_string()),
        }
    }
}

impl From<QExactError> for EvalError {
    fn from(e: QExactError) -> Self {
        EvalError::DomainRejected(e.to_string())
    }
}

/// One side of an evaluated identity.
#[derive(Debug, Clone, PartialEq)]
pub enum SideValue {
    Complex(C64),
    Exact(RationalFn),
}

impl SideValue {
    /// Numeric value; exact sides are evaluated at [`EXACT_PROBE_Q`].
    pub fn approx(&self) -> C64 {
        match self {
            SideValue::Complex(z) => *z,
            SideValue::Exact(f) => f.eval(C64::new(EXACT_PROBE_Q, 0.0)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationResult {
    pub id: String,
    pub mode: Mode,
    pub n: i64,
    pub lhs: SideValue,
    pub rhs: SideValue,
    pub abs_err: f64,
    pub rel_err: f64,
    pub pass: bool,
    pub params: ParamMap,
}

/// `|l - r| / max(|l|, |r|, 1)`.
pub fn rel_err(l: C64, r: C64) -> f64 {
    (l - r).norm() / l.norm().max(r.norm()).max(1.0)
}

fn finite_or_max(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        f64::MAX
    }
}

const Q: &[ParamSpec] = &[ParamSpec::base("q")];

fn elliptic_params() -> Vec<ParamSpec> {
    vec![ParamSpec::complex("a"), ParamSpec::complex("b"), ParamSpec::base("q"), ParamSpec::nome("p")]
}

fn line_params() -> Vec<ParamSpec> {
    ["c", "d", "g", "h"].into_iter().map(ParamSpec::complex).collect()
}

fn closed_params(spec: Specialization) -> Vec<ParamSpec> {
    let mut v = Vec::new();
    if matches!(spec, Specialization::Abq | Specialization::Aq) {
        v.push(ParamSpec::complex("a"));
    }
    if matches!(spec, Specialization::Abq | Specialization::Bq) {
        v.push(ParamSpec::complex("b"));
    }
    v.push(ParamSpec::base("q"));
    v
}

fn numeric_only() -> Vec<Mode> {
    vec![Mode::NumericElliptic]
}

fn exact_q() -> Vec<Mode> {
    vec![Mode::ExactQ, Mode::NumericElliptic]
}

struct Builder(Vec<IdentityDescriptor>);

impl Builder {
    fn add(
        &mut self,
        id: &'static str,
        title: &'static str,
        anchor: &'static str,
        params: Vec<ParamSpec>,
        eval: Eval,
    ) -> &mut IdentityDescriptor {
        let modes = match eval {
            Eval::Q { .. } | Eval::Spc2 => exact_q(),
            Eval::LineSum | Eval::SumCubes => vec![Mode::ExactRational, Mode::NumericElliptic],
            _ => numeric_only(),
        };
        self.0.push(IdentityDescriptor {
            id,
            title,
            anchor,
            params,
            modes,
            n_min: 0,
            exact_grid: ExactGrid { axes: Vec::new() },
            eval,
        });
        self.0.last_mut().unwrap()
    }

    fn q(&mut self, id: &'static str, title: &'static str, anchor: &'static str, exact: ExactFn, numeric: NumericFn) {
        self.add(id, title, anchor, Q.to_vec(), Eval::Q { exact, numeric });
    }

    fn family(
        &mut self,
        id: &'static str,
        title: &'static str,
        anchor: &'static str,
        family: Family,
        route: Route,
    ) -> &mut IdentityDescriptor {
        let mut params = match route {
            Route::Theta => elliptic_params(),
            Route::Closed(spec) => closed_params(spec),
        };
        match family {
            Family::BigId => params.extend(line_params()),
            Family::TelA => params.push(ParamSpec::count("m", 0, 3)),
            Family::TelB => params.push(ParamSpec::count("m", 1, 3)),
            _ => {}
        }
        self.add(id, title, anchor, params, Eval::Family(family, route))
    }
}

fn build_catalog() -> Vec<IdentityDescriptor> {
    use qseries as qs;
    use Family::*;
    use Specialization::{Abq, Aq, Bq};
    let mut b = Builder(Vec::new());

    b.q("geo", "Geometric sum", "finite geometric series summed to a q-number", qs::geo, qs::geo);
    b.family(
        "basic-g",
        "Iterated weight sum",
        "sum of elliptic weights gives an elliptic number",
        BasicG,
        Route::Theta,
    );

    b.family("bigid", "Line summation", "two-line elliptic summation in c, d, g, h", BigId, Route::Theta);
    let d = b.add(
        "bigid-hyper",
        "Line summation at q = 1",
        "hypergeometric form of the line summation",
        line_params(),
        Eval::LineSum,
    );
    d.exact_grid = ExactGrid { axes: vec![("c", 1, 3), ("d", 1, 3), ("g", 0, 3), ("h", 0, 3)] };
    b.add("sum-cubes", "Sum of cubes", "cubes summed via the cleared line summation", Vec::new(), Eval::SumCubes);
    b.family("spc-1", "Line summation, a;q case", "line summation with p and b sent to zero", BigId, Route::Closed(Aq));
    let mut params = Q.to_vec();
    params.extend(line_params());
    let d = b.add("spc-2", "Line summation, q case", "line summation with a then sent to zero", params, Eval::Spc2);
    d.exact_grid = ExactGrid { axes: vec![("c", 0, 3), ("d", 0, 3), ("g", 0, 3), ("h", 0, 3)] };
    b.q(
        "spc-4i",
        "Even q-numbers",
        "q-analogue of the sum of even numbers from the line summation",
        qs::spc_4i,
        qs::spc_4i,
    );
    b.q(
        "spc-4ii",
        "q-cubes from squares",
        "q-analogue of the sum of cubes with quadratic exponents",
        qs::spc_4ii,
        qs::spc_4ii,
    );

    b.family("tel-c", "Odd elliptic numbers", "telescoping sum over odd elliptic numbers", TelC, Route::Theta);
    b.family("tel-c-ab", "Odd numbers, a,b;q case", "odd-number sum at zero nome", TelC, Route::Closed(Abq));
    b.family("tel-c-a", "Odd numbers, a;q case", "odd-number sum with b removed", TelC, Route::Closed(Aq));
    b.family("tel-c-b", "Odd numbers, (b;q) case", "odd-number sum with a removed", TelC, Route::Closed(Bq));
    b.q("sp1", "Odd q-numbers, first form", "q-analogue of the odd-number sum with rising powers", qs::sp1, qs::sp1);
    b.q("sp2", "Odd q-numbers, second form", "q-analogue of the odd-number sum with falling powers", qs::sp2, qs::sp2);
    b.q(
        "tel-c-a-at-1",
        "Odd numbers at a = 1",
        "odd-number sum in the a;q case at a equal to one",
        qs::tel_c_a_at_1,
        qs::tel_c_a_at_1,
    );
    b.q(
        "tel-c-b-at-1",
        "Odd numbers at b = 1",
        "odd-number sum in the (b;q) case at b equal to one",
        qs::tel_c_b_at_1,
        qs::tel_c_b_at_1,
    );
    b.q(
        "tel-c-a-at-q",
        "Odd numbers at a = q",
        "odd-number sum in the a;q case at a equal to q",
        qs::tel_c_a_at_q,
        qs::tel_c_a_at_q,
    );
    b.q(
        "tel-c-b-at-q",
        "Odd numbers at b = q",
        "odd-number sum in the (b;q) case at b equal to q",
        qs::tel_c_b_at_q,
        qs::tel_c_b_at_q,
    );

    b.family("tel-a", "Rising products", "telescoping sum of rising products of elliptic numbers", TelA, Route::Theta);
    b.family("sum-even", "Even elliptic numbers", "elliptic sum of the first n even numbers", SumEven, Route::Theta);
    b.family("even-abq", "Even numbers, a,b;q case", "even-number sum at zero nome", SumEven, Route::Closed(Abq));
    b.family("even-aq", "Even numbers, a;q case", "even-number sum with b removed", SumEven, Route::Closed(Aq));
    b.family("even-bq", "Even numbers, (b;q) case", "even-number sum with a removed", SumEven, Route::Closed(Bq));
    b.q("even-q", "Triangular q-numbers", "q-triangular numbers with rising powers", qs::even_q, qs::even_q);
    b.q(
        "warnaar-triangular",
        "Triangular q-numbers, falling powers",
        "q-triangular numbers with falling powers",
        qs::warnaar_triangular,
        qs::warnaar_triangular,
    );
    b.q(
        "warnaar-cubes",
        "q-cubes",
        "q-analogue of the sum of cubes as a squared q-triangular number",
        qs::warnaar_cubes,
        qs::warnaar_cubes,
    );
    b.q(
        "even-b-at-1",
        "Even numbers at b = 1",
        "even-number sum in the (b;q) case at b equal to one",
        qs::even_b_at_1,
        qs::even_b_at_1,
    );
    b.q(
        "even-a-at-q",
        "Even numbers at a = q",
        "even-number sum in the a;q case at a equal to q",
        qs::even_a_at_q,
        qs::even_a_at_q,
    );
    b.q(
        "even-b-at-q",
        "Even numbers at b = q",
        "even-number sum in the (b;q) case at b equal to q",
        qs::even_b_at_q,
        qs::even_b_at_q,
    );

    b.family(
        "m3rising",
        "Products of two consecutive numbers",
        "rising products of length two summed",
        M3Rising,
        Route::Theta,
    );
    b.family(
        "m3rising-aq",
        "Two consecutive numbers, a;q case",
        "length-two rising products with p and b removed",
        M3Rising,
        Route::Closed(Aq),
    );
    b.q(
        "m3-a-at-0",
        "Two consecutive, a = 0",
        "length-two rising products at a equal to zero",
        qs::m3_a_at_0,
        qs::m3_a_at_0,
    );
    b.q(
        "m3-a-at-1",
        "Two consecutive, a = 1",
        "length-two rising products at a equal to one",
        qs::m3_a_at_1,
        qs::m3_a_at_1,
    );
    b.q(
        "m3-a-at-q",
        "Two consecutive, a = q",
        "length-two rising products at a equal to q",
        qs::m3_a_at_q,
        qs::m3_a_at_q,
    );
    b.q(
        "m3-q2-a-at-q",
        "Two consecutive, base q^2, a = q",
        "length-two rising products in base q squared at a equal to q",
        qs::m3_q2_a_at_q,
        qs::m3_q2_a_at_q,
    );
    b.q(
        "m3-q2-a-at-qinv",
        "Two consecutive, base q^2, a = 1/q",
        "length-two rising products in base q squared at a equal to 1/q",
        qs::m3_q2_a_at_qinv,
        qs::m3_q2_a_at_qinv,
    );

    b.family(
        "tel-b",
        "Reciprocal rising products",
        "elliptic analogue of a factorial reciprocal sum",
        TelB,
        Route::Theta,
    );

    let abq = vec![ParamSpec::complex("a"), ParamSpec::complex("b"), ParamSpec::base("q")];
    b.add("indef-1", "Indefinite q-sum", "indefinite summation with q-shifted factorials", abq, Eval::Indef1);
    let e = vec![
        ParamSpec::complex("a"),
        ParamSpec::complex("b"),
        ParamSpec::complex("c"),
        ParamSpec::base("q"),
        ParamSpec::nome("p"),
    ];
    b.add(
        "e-indef-1",
        "Elliptic indefinite sum",
        "elliptic indefinite summation with nome p squared",
        e,
        Eval::EIndef1,
    );
    let w = vec![ParamSpec::complex("c"), ParamSpec::base("q"), ParamSpec::nome("p")];
    let d = b.add(
        "warnaar-cubes-elliptic",
        "Elliptic q-cubes",
        "elliptic extension of the q-cubes sum",
        w,
        Eval::WarnaarCubesElliptic,
    );
    d.n_min = 1;
    b.q("qodds", "Odd q-numbers", "q-analogue of the sum of odd numbers", qs::qodds, qs::qodds);
    let aq = vec![ParamSpec::complex("a"), ParamSpec::base("q")];
    b.add("cubic-odds", "Cubic odd sum", "odd-number sum with base q cubed factorials", aq, Eval::CubicOdds);
    let m = vec![
        ParamSpec::complex("a"),
        ParamSpec::complex("b"),
        ParamSpec::complex("c"),
        ParamSpec::complex("d"),
        ParamSpec::base("q"),
        ParamSpec::base_power("r", 2),
        ParamSpec::base_power("s", 3),
        ParamSpec::nome("p"),
    ];
    b.add("m00", "Three-base theta sum", "multibasic theta function summation in bases q, r, s", m, Eval::ThreeBase);

    b.0
}

/// Every registered identity, in a fixed order.
pub fn catalog() -> &'static [IdentityDescriptor] {
    static CATALOG: OnceLock<Vec<IdentityDescriptor>> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

pub fn find(id: &str) -> Result<&'static IdentityDescriptor, EvalError> {
    catalog().iter().find(|d| d.id == id).ok_or_else(|| EvalError::UnknownIdentity(id.to_string()))
}

pub(crate) fn get(params: &ParamMap, name: &str) -> Result<C64, EvalError> {
    params.get(name).copied().ok_or_else(|| EvalError::MissingParameter(name.to_string()))
}

fn get_int(params: &ParamMap, name: &str) -> Result<i64, EvalError> {
    let value = get(params, name)?;
    exact_exponent(value).map_err(|_| EvalError::NonIntegerParameter { name: name.to_string(), value })
}

fn finite(v: C64) -> Result<C64, EvalError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::DomainRejected("non-finite value".into()))
    }
}

pub(crate) fn run_family<S: crate::elliptic::NumberSystem>(
    s: &S,
    family: Family,
    params: &ParamMap,
    n: i64,
) -> Result<(C64, C64), EvalError> {
    let r = match family {
        Family::BasicG => families::basic_g(s, n),
        Family::TelC => families::tel_c(s, n),
        Family::SumEven => families::sum_even(s, n),
        Family::M3Rising => families::m3_rising(s, n),
        Family::TelA => families::tel_a(s, get_int(params, "m")?, n),
        Family::TelB => families::tel_b(s, get_int(params, "m")?, n),
        Family::BigId => {
            let x = Lines { c: get(params, "c")?, d: get(params, "d")?, g: get(params, "g")?, h: get(params, "h")? };
            families::bigid(s, x, n)
        }
    }?;
    Ok(r)
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Numeric `(LHS, RHS)` of an identity. Any pole hit or non-finite value
/// is reported as [`EvalError::DomainRejected`].
pub fn numeric_sides(id: &str, params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<(C64, C64), EvalError> {
    let d = find(id)?;
    if n < d.n_min {
        return Err(EvalError::BelowMinimum { n, n_min: d.n_min });
    }
    let p = |name| get(params, name);
    let (l, r) = match d.eval {
        Eval::Family(family, Route::Theta) => {
            let ep = EllipticParams::new(p("a")?, p("b")?, p("q")?, p("p")?)?;
            run_family(&EllipticSystem::new(ep, Specialization::FullElliptic, *cfg), family, params, n)?
        }
        Eval::Family(family, Route::Closed(spec)) => {
            let a = if matches!(spec, Specialization::Abq | Specialization::Aq) { p("a")? } else { zero() };
            let b = if matches!(spec, Specialization::Abq | Specialization::Bq) { p("b")? } else { zero() };
            run_family(&ClosedSystem::new(spec, a, b, p("q")?, cfg.pole_tol), family, params, n)?
        }
        Eval::Q { numeric, .. } => numeric(&NumericQ::new(p("q")?, cfg.pole_tol), n)?,
        Eval::Spc2 => {
            let x = [p("c")?, p("d")?, p("g")?, p("h")?];
            qseries::spc_2(&NumericQ::new(p("q")?, cfg.pole_tol), x, n, false)?
        }
        Eval::LineSum => hyper::line_sum(p("c")?, p("d")?, p("g")?, p("h")?, n)
            .ok_or_else(|| EvalError::DomainRejected("vanishing normalizer".into()))?,
        Eval::SumCubes => hyper::sum_cubes(n),
        Eval::Indef1 => multibasic::indef_1(p("a")?, p("b")?, p("q")?, n, cfg)?,
        Eval::EIndef1 => multibasic::e_indef_1(p("a")?, p("b")?, p("c")?, p("q")?, p("p")?, n, cfg)?,
        Eval::WarnaarCubesElliptic => multibasic::warnaar_cubes_elliptic(p("c")?, p("q")?, p("p")?, n, cfg)?,
        Eval::CubicOdds => multibasic::cubic_odds(p("a")?, p("q")?, n, cfg)?,
        Eval::ThreeBase => {
            let x = multibasic::ThreeBase {
                a: p("a")?,
                b: p("b")?,
                c: p("c")?,
                d: p("d")?,
                q: p("q")?,
                r: p("r")?,
                s: p("s")?,
                p: p("p")?,
            };
            multibasic::three_base(x, n, cfg)?
        }
    };
    Ok((finite(l)?, finite(r)?))
}

fn spc_2_exact(ints: &BTreeMap<String, i64>, n: i64) -> Result<(ProductFrac, ProductFrac), EvalError> {
    let v = |name: &str| ints.get(name).copied().ok_or_else(|| EvalError::MissingParameter(name.to_string()));
    let (c, d, g, h) = (v("c")?, v("d")?, v("g")?, v("h")?);
    let cleared = c * d == 0 || c * h + d * g == 0;
    let x = [c, d, g, h].map(|t| C64::new(t as f64, 0.0));
    Ok(qseries::spc_2(&ExactQ, x, n, cleared)?)
}

fn constant(x: BigRational) -> ProductFrac {
    ProductFrac::from_poly(LaurentPoly::monomial(x, 0))
}

/// Exact `(LHS, RHS)` of an identity at integer parameters.
///
/// For the line summation at `q`, the normalizer `[2cd][ch+dg]` is cleared
/// from both sides whenever it vanishes.
pub fn exact_sides(
    id: &str,
    n: i64,
    int_params: &BTreeMap<String, i64>,
) -> Result<(ProductFrac, ProductFrac), EvalError> {
    let d = find(id)?;
    if n < d.n_min {
        return Err(EvalError::BelowMinimum { n, n_min: d.n_min });
    }
    let v = |name: &str| {
        int_params
            .get(name)
            .map(|&x| BigRational::from_integer(x.into()))
            .ok_or_else(|| EvalError::MissingParameter(name.to_string()))
    };
    match d.eval {
        Eval::Q { exact, .. } => Ok(exact(&ExactQ, n)?),
        Eval::Spc2 => spc_2_exact(int_params, n),
        Eval::LineSum => {
            let (l, r) = hyper::line_sum(v("c")?, v("d")?, v("g")?, v("h")?, n)
                .ok_or_else(|| EvalError::DomainRejected("vanishing normalizer".into()))?;
            Ok((constant(l), constant(r)))
        }
        Eval::SumCubes => {
            let (l, r) = hyper::sum_cubes::<BigRational>(n);
            Ok((constant(l), constant(r)))
        }
        _ => Err(EvalError::ModeUnsupported { id: id.to_string(), mode: d.exact_mode().unwrap_or(Mode::ExactQ) }),
    }
}

fn int_params(d: &IdentityDescriptor, params: &ParamMap) -> Result<BTreeMap<String, i64>, EvalError> {
    d.exact_grid.axes.iter().map(|&(name, _, _)| Ok((name.to_string(), get_int(params, name)?))).collect()
}

/// Evaluates one identity at one point and compares the sides.
///
/// Numeric mode passes when the relative error is at most `tol`; exact
/// modes pass on exact equality and report the error at [`EXACT_PROBE_Q`].
pub fn evaluate(
    id: &str,
    params: &ParamMap,
    n: i64,
    mode: Mode,
    cfg: &ThetaConfig,
    tol: f64,
) -> Result<VerificationResult, EvalError> {
    let d = find(id)?;
    if !d.supports(mode) {
        return Err(EvalError::ModeUnsupported { id: id.to_string(), mode });
    }
    if mode == Mode::NumericElliptic {
        let (l, r) = numeric_sides(id, params, n, cfg)?;
        let rel = rel_err(l, r);
        return Ok(VerificationResult {
            id: id.to_string(),
            mode,
            n,
            lhs: SideValue::Complex(l),
            rhs: SideValue::Complex(r),
            abs_err: (l - r).norm(),
            rel_err: rel,
            pass: rel <= tol,
            params: params.clone(),
        });
    }
    let ints = int_params(d, params)?;
    let (l, r) = exact_sides(id, n, &ints)?;
    let pass = (l.clone() - r.clone()).is_zero();
    let (l, r) = (l.to_rational_fn(), r.to_rational_fn());
    let (lv, rv) = (SideValue::Exact(l), SideValue::Exact(r));
    let (la, ra) = (lv.approx(), rv.approx());
    let (abs_err, rel) =
        if pass { (0.0, 0.0) } else { (finite_or_max((la - ra).norm()), finite_or_max(rel_err(la, ra))) };
    Ok(VerificationResult {
        id: id.to_string(),
        mode,
        n,
        lhs: lv,
        rhs: rv,
        abs_err,
        rel_err: rel,
        pass,
        params: params.clone(),
    })
}
