//! Degeneration edges: a parent identity taken to a limit must reproduce a
//! child identity up to an explicit normalizing factor.
//!
//! Limits such as `a -> infinity` are never approached numerically. The
//! parent is evaluated through the closed form of the limiting case and
//! multiplied by the factor that turns its sides into the child's.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use super::qseries::{b, qp, spc_2, spc_4i, spc_4ii};
use super::{
    families::Lines, get, numeric_sides, rel_err, run_family, EvalError, Family, Mode, ParamMap, ParamSpec, SideValue,
    VerificationResult,
};
use crate::elliptic::{EllipticParams, EllipticSystem, Specialization};
use crate::identities::closed::ClosedSystem;
use crate::qexact::{ExactQ, NumericQ, QAlg, QExactError};
use crate::theta::{Nome, ThetaConfig};

type Pair = (C64, C64);
type FactorFn = fn(&NumericQ, i64) -> Result<C64, QExactError>;
type CustomFn = fn(&ParamMap, i64, &ThetaConfig) -> Result<[Pair; 2], EvalError>;

/// A special value of `a` or `b` in terms of the base.
#[derive(Debug, Clone, Copy)]
enum Point {
    One,
    Q,
    QInv,
}

/// The `p = 0` closed form a parent is evaluated in.
#[derive(Debug, Clone, Copy)]
enum Limit {
    /// Both parameters gone, base `q`.
    BaseQ,
    /// Both parameters gone, base `1/q`.
    BaseQInv,
    A(Point),
    B(Point),
    /// The `a;q` form in base `q^2`.
    ASquared(Point),
}

#[derive(Clone, Copy)]
enum Kind {
    /// Parent family in a limiting closed form, child a q-series identity.
    ToQ {
        family: Family,
        limit: Limit,
        factor: FactorFn,
    },
    /// Parent family through the theta route at `spec` with `p = 0`, child
    /// the same family in value-space closed form.
    Route {
        family: Family,
        spec: Specialization,
    },
    Custom(CustomFn),
}

#[derive(Clone)]
pub struct DegenerationEdge {
    pub parent: &'static str,
    pub child: &'static str,
    pub limit: &'static str,
    pub params: Vec<ParamSpec>,
    pub n_min: i64,
    /// Whether the edge can also be checked in exact arithmetic.
    pub exact: bool,
    kind: Kind,
}

impl std::fmt::Debug for DegenerationEdge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -> {} ({})", self.parent, self.child, self.limit)
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn point(pt: Point, q: C64) -> C64 {
    match pt {
        Point::One => c(1.0),
        Point::Q => q,
        Point::QInv => q.inv(),
    }
}

fn limit_system(limit: Limit, q: C64, cfg: &ThetaConfig) -> Result<EllipticSystem, EvalError> {
    let zero = c(0.0);
    let lq = q.ln();
    let (a, b, log_q, spec) = match limit {
        Limit::BaseQ => (zero, zero, lq, Specialization::Q),
        Limit::BaseQInv => (zero, zero, -lq, Specialization::Q),
        Limit::A(pt) => (point(pt, q), zero, lq, Specialization::Aq),
        Limit::B(pt) => (zero, point(pt, q), lq, Specialization::Bq),
        Limit::ASquared(pt) => (point(pt, q), zero, lq * 2.0, Specialization::Aq),
    };
    let params = EllipticParams::with_log_q(a, b, log_q, Nome::zero())?;
    Ok(EllipticSystem::new(params, spec, *cfg))
}

fn param_or_zero(params: &ParamMap, name: &str) -> C64 {
    params.get(name).copied().unwrap_or(c(0.0))
}

fn q_only() -> Vec<ParamSpec> {
    vec![ParamSpec::base("q")]
}

fn closed_params(spec: Specialization) -> Vec<ParamSpec> {
    let mut v = Vec::new();
    if matches!(spec, Specialization::FullElliptic | Specialization::Abq | Specialization::Aq) {
        v.push(ParamSpec::complex("a"));
    }
    if matches!(spec, Specialization::FullElliptic | Specialization::Abq | Specialization::Bq) {
        v.push(ParamSpec::complex("b"));
    }
    v.push(ParamSpec::base("q"));
    v
}

fn scale(pair: Pair, f: C64) -> Pair {
    (pair.0 * f, pair.1 * f)
}

fn with(params: &ParamMap, name: &str, v: C64) -> ParamMap {
    let mut p = params.clone();
    p.insert(name.to_string(), v);
    p
}

fn spc1_to_spc2(params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<[Pair; 2], EvalError> {
    let q = get(params, "q")?;
    let lines = Lines { c: get(params, "c")?, d: get(params, "d")?, g: get(params, "g")?, h: get(params, "h")? };
    let s = ClosedSystem::new(Specialization::Aq, c(0.0), c(0.0), q, cfg.pole_tol);
    let parent = super::families::bigid(&s, lines, n)?;
    Ok([parent, numeric_sides("spc-2", params, n, cfg)?])
}

/// Parent and child sides.
type SidePairs<V> = [(V, V); 2];

/// `(c, d, g, h) = (1, 1, 1, h)` at `n - 1`, times the matching power of `q`.
fn spc2_to_4<A: QAlg>(alg: &A, h: i64, n: i64) -> Result<SidePairs<A::V>, QExactError> {
    let x = [1, 1, 1, h].map(|t| c(t as f64));
    let (l, r) = spc_2(alg, x, n - 1, false)?;
    let e = if h == 0 { n - 1 } else { n * n + n - 2 };
    let f = qp(alg, e)?;
    let child = if h == 0 { spc_4i(alg, n)? } else { spc_4ii(alg, n)? };
    Ok([(l * f.clone(), r * f), child])
}

fn spc2_to_4i(params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<[Pair; 2], EvalError> {
    Ok(spc2_to_4(&NumericQ::new(get(params, "q")?, cfg.pole_tol), 0, n)?)
}

fn spc2_to_4ii(params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<[Pair; 2], EvalError> {
    Ok(spc2_to_4(&NumericQ::new(get(params, "q")?, cfg.pole_tol), 1, n)?)
}

fn tel_a_to(params: &ParamMap, n: i64, cfg: &ThetaConfig, m: i64, child: &str) -> Result<[Pair; 2], EvalError> {
    let parent = numeric_sides("tel-a", &with(params, "m", c(m as f64)), n - 1, cfg)?;
    Ok([parent, numeric_sides(child, params, n, cfg)?])
}

fn tel_a_to_sum_even(params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<[Pair; 2], EvalError> {
    tel_a_to(params, n, cfg, 1, "sum-even")
}

fn tel_a_to_m3rising(params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<[Pair; 2], EvalError> {
    tel_a_to(params, n, cfg, 2, "m3rising")
}

fn e_indef_to_indef(params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<[Pair; 2], EvalError> {
    let parent = numeric_sides("e-indef-1", &with(params, "p", c(0.0)), n, cfg)?;
    Ok([parent, numeric_sides("indef-1", params, n, cfg)?])
}

fn e_indef_to_cubes(params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<[Pair; 2], EvalError> {
    let q = get(params, "q")?;
    let shifted = with(&with(params, "a", q * q), "b", q * q);
    let parent = numeric_sides("e-indef-1", &shifted, n - 1, cfg)?;
    Ok([parent, numeric_sides("warnaar-cubes-elliptic", params, n, cfg)?])
}

fn elliptic_cubes_to_cubes(params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<[Pair; 2], EvalError> {
    let parent = numeric_sides("warnaar-cubes-elliptic", &with(params, "p", c(0.0)), n, cfg)?;
    Ok([parent, numeric_sides("warnaar-cubes", params, n, cfg)?])
}

fn cubic_odds_to_qodds(params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<[Pair; 2], EvalError> {
    let parent = numeric_sides("cubic-odds", &with(params, "a", c(0.0)), n, cfg)?;
    Ok([parent, numeric_sides("qodds", params, n, cfg)?])
}

fn build_edges() -> Vec<DegenerationEdge> {
    use Family::*;
    use Limit::*;
    use Specialization::{Abq, Aq, Bq, FullElliptic};
    let mut v = Vec::new();
    let mut add = |parent, child, limit, params, n_min, kind| {
        v.push(DegenerationEdge { parent, child, limit, params, n_min, exact: false, kind });
    };
    let lines = |mut p: Vec<ParamSpec>| {
        p.extend(["c", "d", "g", "h"].map(ParamSpec::complex));
        p
    };
    let to_q = |family, limit, factor: FactorFn| Kind::ToQ { family, limit, factor };

    add("bigid", "spc-1", "p -> 0, b -> 0", lines(closed_params(Aq)), 0, Kind::Route { family: BigId, spec: Aq });
    add("spc-1", "spc-2", "a -> 0", lines(q_only()), 0, Kind::Custom(spc1_to_spc2));
    add("spc-2", "spc-4i", "c = d = g = 1, h = 0", q_only(), 1, Kind::Custom(spc2_to_4i));
    add("spc-2", "spc-4ii", "c = d = g = h = 1", q_only(), 1, Kind::Custom(spc2_to_4ii));

    add("tel-c", "tel-c-ab", "p -> 0", closed_params(Abq), 0, Kind::Route { family: TelC, spec: FullElliptic });
    add("tel-c-ab", "tel-c-a", "b -> 0", closed_params(Aq), 0, Kind::Route { family: TelC, spec: Aq });
    add("tel-c-ab", "tel-c-b", "a -> 0", closed_params(Bq), 0, Kind::Route { family: TelC, spec: Bq });
    add("tel-c-a", "sp1", "a -> infinity", q_only(), 0, to_q(TelC, BaseQ, |a, _| qp(a, -1)));
    add("tel-c-b", "sp1", "b -> 0", q_only(), 0, to_q(TelC, BaseQ, |a, _| qp(a, -1)));
    add("tel-c-a", "sp2", "a -> 0", q_only(), 0, to_q(TelC, BaseQInv, |a, n| qp(a, 2 * n + 1)));
    add("tel-c-b", "sp2", "b -> infinity", q_only(), 0, to_q(TelC, BaseQInv, |a, n| qp(a, 2 * n + 1)));
    add("tel-c-a", "tel-c-a-at-1", "a -> 1", q_only(), 0, to_q(TelC, A(Point::One), |a, n| qp(a, 2 * n + 1)));
    add(
        "tel-c-b",
        "tel-c-b-at-1",
        "b -> 1",
        q_only(),
        0,
        to_q(TelC, B(Point::One), |a, _| a.div(&qp(a, -1)?, &b(a, 2)?)),
    );
    add(
        "tel-c-a",
        "tel-c-a-at-q",
        "a -> q",
        q_only(),
        0,
        to_q(TelC, A(Point::Q), |a, n| Ok(qp(a, 2 * n + 1)? * b(a, 2)?)),
    );
    add(
        "tel-c-b",
        "tel-c-b-at-q",
        "b -> q",
        q_only(),
        0,
        to_q(TelC, B(Point::Q), |a, _| a.div(&qp(a, -1)?, &(b(a, 2)? * b(a, 3)?))),
    );

    add(
        "tel-a",
        "sum-even",
        "m = 1, shifted index",
        closed_params(FullElliptic).into_iter().chain([ParamSpec::nome("p")]).collect(),
        1,
        Kind::Custom(tel_a_to_sum_even),
    );
    add(
        "tel-a",
        "m3rising",
        "m = 2, shifted index",
        closed_params(FullElliptic).into_iter().chain([ParamSpec::nome("p")]).collect(),
        1,
        Kind::Custom(tel_a_to_m3rising),
    );

    add("sum-even", "even-abq", "p -> 0", closed_params(Abq), 0, Kind::Route { family: SumEven, spec: FullElliptic });
    add("even-abq", "even-aq", "b -> 0", closed_params(Aq), 0, Kind::Route { family: SumEven, spec: Aq });
    add("even-abq", "even-bq", "a -> 0", closed_params(Bq), 0, Kind::Route { family: SumEven, spec: Bq });
    let half = |a: &NumericQ, _| a.div(&c(1.0), &b(a, 2)?);
    let tri = |a: &NumericQ, n: i64| a.div(&qp(a, 2 * n - 1)?, &b(a, 2)?);
    add("even-aq", "even-q", "a -> infinity", q_only(), 0, to_q(SumEven, BaseQ, half));
    add("even-bq", "even-q", "b -> 0", q_only(), 0, to_q(SumEven, BaseQ, half));
    add("even-aq", "warnaar-triangular", "a -> 0", q_only(), 0, to_q(SumEven, BaseQInv, tri));
    add("even-bq", "warnaar-triangular", "b -> infinity", q_only(), 0, to_q(SumEven, BaseQInv, tri));
    add(
        "even-aq",
        "warnaar-cubes",
        "a -> 1",
        q_only(),
        0,
        to_q(SumEven, A(Point::One), |a, n| a.div(&qp(a, 2 * n - 1)?, &(b(a, 2)? * b(a, 2)?))),
    );
    add(
        "even-bq",
        "even-b-at-1",
        "b -> 1",
        q_only(),
        0,
        to_q(SumEven, B(Point::One), |a, _| a.div(&c(1.0), &(b(a, 2)? * b(a, 2)?))),
    );
    add(
        "even-aq",
        "even-a-at-q",
        "a -> q",
        q_only(),
        0,
        to_q(SumEven, A(Point::Q), |a, n| Ok(qp(a, 2 * n - 1)? * b(a, 2)?)),
    );
    add(
        "even-bq",
        "even-b-at-q",
        "b -> q",
        q_only(),
        0,
        to_q(SumEven, B(Point::Q), |a, _| a.div(&c(1.0), &(b(a, 3)? * b(a, 3)?))),
    );

    add("m3rising", "m3rising-aq", "p -> 0, b -> 0", closed_params(Aq), 0, Kind::Route { family: M3Rising, spec: Aq });
    add(
        "m3rising-aq",
        "m3-a-at-0",
        "a -> 0",
        q_only(),
        0,
        to_q(M3Rising, BaseQInv, |a, n| a.div(&qp(a, 3 * n)?, &b(a, 3)?)),
    );
    add(
        "m3rising-aq",
        "m3-a-at-1",
        "a -> 1",
        q_only(),
        0,
        to_q(M3Rising, A(Point::One), |a, n| a.div(&qp(a, 3 * n)?, &b(a, 3)?)),
    );
    add(
        "m3rising-aq",
        "m3-a-at-q",
        "a -> q",
        q_only(),
        0,
        to_q(M3Rising, A(Point::Q), |a, n| {
            let two = b(a, 2)?;
            a.div(&(qp(a, 3 * n)? * two * two * two), &b(a, 3)?)
        }),
    );
    add(
        "m3rising-aq",
        "m3-q2-a-at-q",
        "q -> q^2, a -> q",
        q_only(),
        0,
        to_q(M3Rising, ASquared(Point::Q), |a, n| {
            let (two, three) = (b(a, 2)?, b(a, 3)?);
            a.div(&(qp(a, 6 * n)? * (two * two * two) * (three * three * three)), &b(a, 6)?)
        }),
    );
    add(
        "m3rising-aq",
        "m3-q2-a-at-qinv",
        "q -> q^2, a -> 1/q",
        q_only(),
        0,
        to_q(M3Rising, ASquared(Point::QInv), |a, n| {
            let two = b(a, 2)?;
            a.div(&(qp(a, 6 * n)? * two * two * two), &b(a, 6)?)
        }),
    );

    let e_params =
        vec![ParamSpec::complex("a"), ParamSpec::complex("b"), ParamSpec::complex("c"), ParamSpec::base("q")];
    add("e-indef-1", "indef-1", "p -> 0", e_params, 0, Kind::Custom(e_indef_to_indef));
    let w_params = vec![ParamSpec::complex("c"), ParamSpec::base("q"), ParamSpec::nome("p")];
    add("e-indef-1", "warnaar-cubes-elliptic", "a = b = q^2, n -> n - 1", w_params, 1, Kind::Custom(e_indef_to_cubes));
    let w0_params = vec![ParamSpec::complex("c"), ParamSpec::base("q")];
    add("warnaar-cubes-elliptic", "warnaar-cubes", "p -> 0", w0_params, 1, Kind::Custom(elliptic_cubes_to_cubes));
    add("cubic-odds", "qodds", "a -> 0", q_only(), 0, Kind::Custom(cubic_odds_to_qodds));
    add("basic-g", "geo", "p -> 0, a -> infinity, b -> 0", q_only(), 0, to_q(BasicG, BaseQ, |_, _| Ok(c(1.0))));

    for e in v.iter_mut() {
        e.exact = e.parent == "spc-2";
    }
    v
}

/// Every registered degeneration edge.
pub fn edges() -> &'static [DegenerationEdge] {
    static EDGES: OnceLock<Vec<DegenerationEdge>> = OnceLock::new();
    EDGES.get_or_init(build_edges)
}

fn numeric_edge(e: &DegenerationEdge, params: &ParamMap, n: i64, cfg: &ThetaConfig) -> Result<[Pair; 2], EvalError> {
    match e.kind {
        Kind::ToQ { family, limit, factor } => {
            let q = get(params, "q")?;
            let sys = limit_system(limit, q, cfg)?;
            let parent = run_family(&sys, family, params, n)?;
            let f = factor(&NumericQ::new(q, cfg.pole_tol), n)?;
            Ok([scale(parent, f), numeric_sides(e.child, params, n, cfg)?])
        }
        Kind::Route { family, spec } => {
            let ep =
                EllipticParams::new(param_or_zero(params, "a"), param_or_zero(params, "b"), get(params, "q")?, c(0.0))?;
            let parent = run_family(&EllipticSystem::new(ep, spec, *cfg), family, params, n)?;
            Ok([parent, numeric_sides(e.child, params, n, cfg)?])
        }
        Kind::Custom(f) => f(params, n, cfg),
    }
}

/// Checks that `parent` degenerates to `child` at the given point.
///
/// The reported `lhs` is the normalized parent left side and `rhs` the
/// child left side; the error is the larger of the two side-by-side errors.
pub fn reduce_chain_check(
    parent: &str,
    child: &str,
    params: &ParamMap,
    n: i64,
    mode: Mode,
    cfg: &ThetaConfig,
    tol: f64,
) -> Result<VerificationResult, EvalError> {
    let e = edges()
        .iter()
        .find(|e| e.parent == parent && e.child == child)
        .ok_or_else(|| EvalError::UnknownEdge { parent: parent.to_string(), child: child.to_string() })?;
    if n < e.n_min {
        return Err(EvalError::BelowMinimum { n, n_min: e.n_min });
    }
    let id = format!("{parent}->{child}");
    match mode {
        Mode::NumericElliptic => {
            let [(lp, rp), (lc, rc)] = numeric_edge(e, params, n, cfg)?;
            for v in [lp, rp, lc, rc] {
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(EvalError::DomainRejected("non-finite value".into()));
                }
            }
            let rel = rel_err(lp, lc).max(rel_err(rp, rc));
            Ok(VerificationResult {
                id,
                mode,
                n,
                lhs: SideValue::Complex(lp),
                rhs: SideValue::Complex(lc),
                abs_err: (lp - lc).norm().max((rp - rc).norm()),
                rel_err: rel,
                pass: rel <= tol,
                params: params.clone(),
            })
        }
        Mode::ExactQ if e.exact => {
            let h = if child == "spc-4i" { 0 } else { 1 };
            let [(lp, rp), (lc, rc)] = spc2_to_4(&ExactQ, h, n)?;
            let pass = (lp.clone() - lc.clone()).is_zero() && (rp - rc).is_zero();
            let (lv, rv) = (SideValue::Exact(lp.to_rational_fn()), SideValue::Exact(lc.to_rational_fn()));
            let (abs_err, rel) = if pass {
                (0.0, 0.0)
            } else {
                let (a, b) = (lv.approx(), rv.approx());
                ((a - b).norm(), rel_err(a, b))
            };
            Ok(VerificationResult {
                id,
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
        _ => Err(EvalError::ModeUnsupported { id, mode }),
    }
}
