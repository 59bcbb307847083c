//! Euler's telescoping lemma.
//!
//! For sequences `u_k`, `v_k` and `t_k = u_k - v_k`,
//!
//! ```text
//! sum_{k=0}^{n} (t_k / t_0) (u_0 ... u_{k-1}) / (v_1 ... v_k)
//!     = (u_0 / t_0) ((u_1 ... u_n) / (v_1 ... v_n) - v_0 / u_0)
//! ```
//!
//! [`telescope_both_sides`] evaluates both sides with running products.
//! [`builder`] returns the `u`, `v` pairs behind the elliptic telescoping
//! theorems, together with the closed form each proof gives for `t_k`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::elliptic::{EllipticError, EllipticSystem, NumberSystem};

/// Relative threshold below which a numeric denominator counts as zero.
pub const NUMERIC_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TelescopeError {
    #[error("degenerate denominator: {what} at k = {index}")]
    DegenerateDenominator { what: &'static str, index: i64 },
    #[error("unknown theorem id {0:?}")]
    UnknownTheorem(String),
    #[error("missing builder parameter {0:?}")]
    MissingParameter(&'static str),
    #[error("builder parameter {0:?} must be a non-negative integer")]
    BadParameter(&'static str),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

/// Values the lemma can be evaluated over.
pub trait TelescopeField: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn one() -> Self;
    fn div(&self, d: &Self) -> Self;
    /// `|x|` for numeric values; exact values report 0 or 1.
    fn magnitude(&self) -> f64;
    fn is_exact() -> bool;
}

impl TelescopeField for C64 {
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn div(&self, d: &Self) -> Self {
        self.fdiv(*d)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_exact() -> bool {
        false
    }
}

impl TelescopeField for BigRational {
    fn one() -> Self {
        One::one()
    }
    fn div(&self, d: &Self) -> Self {
        self / d
    }
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.abs().to_f64().unwrap_or(1.0).max(f64::MIN_POSITIVE)
        }
    }
    fn is_exact() -> bool {
        true
    }
}

pub type Sequence<V> = Arc<dyn Fn(i64) -> Result<V, TelescopeError> + Send + Sync>;

/// A pair `(u_k, v_k)` and, optionally, the closed form of `t_k = u_k - v_k`.
#[derive(Clone)]
pub struct TelescopePair<V> {
    pub u: Sequence<V>,
    pub v: Sequence<V>,
    pub t: Option<Sequence<V>>,
    pub label: String,
}

impl<V> TelescopePair<V> {
    pub fn new(
        label: impl Into<String>,
        u: impl Fn(i64) -> Result<V, TelescopeError> + Send + Sync + 'static,
        v: impl Fn(i64) -> Result<V, TelescopeError> + Send + Sync + 'static,
    ) -> Self {
        Self { u: Arc::new(u), v: Arc::new(v), t: None, label: label.into() }
    }

    pub fn with_t(mut self, t: impl Fn(i64) -> Result<V, TelescopeError> + Send + Sync + 'static) -> Self {
        self.t = Some(Arc::new(t));
        self
    }
}

/// Both sides of the lemma for `0 <= k <= n`.
pub fn telescope_both_sides<V: TelescopeField>(pair: &TelescopePair<V>, n: u32) -> Result<(V, V), TelescopeError> {
    let n = n as i64;
    let u: Vec<V> = (0..=n).map(|k| (pair.u)(k)).collect::<Result<_, _>>()?;
    let v: Vec<V> = (0..=n).map(|k| (pair.v)(k)).collect::<Result<_, _>>()?;
    let scale = u.iter().chain(v.iter()).map(|x| x.magnitude()).fold(0.0, f64::max);
    let degenerate = |x: &V| {
        if V::is_exact() {
            x.magnitude() == 0.0
        } else {
            !(x.magnitude() > NUMERIC_ZERO_TOL * scale)
        }
    };
    let t0 = u[0].clone() - v[0].clone();
    if degenerate(&t0) {
        return Err(TelescopeError::DegenerateDenominator { what: "t_0", index: 0 });
    }
    for (k, x) in u.iter().enumerate().take(n as usize) {
        if degenerate(x) {
            return Err(TelescopeError::DegenerateDenominator { what: "u", index: k as i64 });
        }
    }
    if degenerate(&u[0]) {
        return Err(TelescopeError::DegenerateDenominator { what: "u", index: 0 });
    }
    for (k, x) in v.iter().enumerate().skip(1) {
        if degenerate(x) {
            return Err(TelescopeError::DegenerateDenominator { what: "v", index: k as i64 });
        }
    }
    let mut lhs = V::one();
    let mut run = V::one();
    for k in 1..=n as usize {
        run = run * u[k - 1].div(&v[k]);
        let tk = u[k].clone() - v[k].clone();
        lhs = lhs + tk.div(&t0) * run.clone();
    }
    let mut ratio = V::one();
    for k in 1..=n as usize {
        ratio = ratio * u[k].div(&v[k]);
    }
    let rhs = u[0].div(&t0) * (ratio - v[0].div(&u[0]));
    Ok((lhs, rhs))
}

fn extra_int(extra: &BTreeMap<String, C64>, name: &'static str) -> Result<i64, TelescopeError> {
    let v = extra.get(name).ok_or(TelescopeError::MissingParameter(name))?;
    if v.im != 0.0 || v.re.fract() != 0.0 || v.re < 0.0 {
        return Err(TelescopeError::BadParameter(name));
    }
    Ok(v.re as i64)
}

fn extra_c(extra: &BTreeMap<String, C64>, name: &'static str) -> Result<C64, TelescopeError> {
    extra.get(name).copied().ok_or(TelescopeError::MissingParameter(name))
}

fn re(x: i64) -> C64 {
    C64::new(x as f64, 0.0)
}

/// Product `[k+lo] [k+lo+1] ... [k+hi]` at unshifted parameters.
fn run<S: NumberSystem>(s: &S, k: i64, lo: i64, hi: i64) -> Result<C64, EllipticError> {
    let zero = C64::new(0.0, 0.0);
    (lo..=hi).try_fold(C64::new(1.0, 0.0), |acc, i| Ok(acc * s.number(re(k + i), zero)?))
}

/// The `u`, `v` (and `t`) sequences used in the telescoping proofs.
///
/// * `"tel-c"`: `u_k = [k+1] [k+1]_{aq^2,bq}`
/// * `"tel-a"` (needs `m`): `u_k = [k+1] ... [k+m+1]`
/// * `"tel-b"` (needs `m`): `u_k = 1 / ([k+2] ... [k+m+1])`
/// * `"bigid"` (needs `c`, `d`, `g`, `h`): the triple from the difference equation
///   obtained with `x = (gk-g+c)(hk+d)`, `y = -(gk+c)(hk-h+d)`, `r = 2ghk+ch+dg`.
pub fn builder(
    theorem_id: &str,
    system: EllipticSystem,
    extra: &BTreeMap<String, C64>,
) -> Result<TelescopePair<C64>, TelescopeError> {
    let s = Arc::new(system);
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match theorem_id {
        "tel-c" => {
            let (s1, s2, s3) = (s.clone(), s.clone(), s);
            Ok(TelescopePair::new(
                "tel-c",
                move |k| Ok(s1.number(re(k + 1), zero)? * s1.number(re(k + 1), one)?),
                move |k| Ok(s2.number(re(k), zero)? * s2.number(re(k), one)?),
            )
            .with_t(move |k| {
                let w = s3.weight(re(k - 1), one)?;
                Ok(w * (s3.number(re(k + 1), zero)? * s3.number(re(2), re(k))? - one))
            }))
        }
        "tel-a" => {
            let m = extra_int(extra, "m")?;
            let (s1, s2, s3) = (s.clone(), s.clone(), s);
            Ok(TelescopePair::new(
                format!("tel-a(m={m})"),
                move |k| Ok(run(&*s1, k, 1, m + 1)?),
                move |k| Ok(run(&*s2, k, 0, m)?),
            )
            .with_t(move |k| Ok(s3.weight(re(k), zero)? * s3.number(re(m + 1), re(k))? * run(&*s3, k, 1, m)?)))
        }
        "tel-b" => {
            let m = extra_int(extra, "m")?;
            let (s1, s2, s3) = (s.clone(), s.clone(), s);
            Ok(TelescopePair::new(
                format!("tel-b(m={m})"),
                move |k| Ok(run(&*s1, k, 2, m + 1)?.finv()),
                move |k| Ok(run(&*s2, k, 1, m)?.finv()),
            )
            .with_t(move |k| {
                let num = s3.weight(re(k + 1), zero)? * s3.number(re(m), re(k + 1))?;
                Ok((-num).fdiv(run(&*s3, k, 1, m + 1)?))
            }))
        }
        "bigid" => {
            let (c, d, g, h) = (extra_c(extra, "c")?, extra_c(extra, "d")?, extra_c(extra, "g")?, extra_c(extra, "h")?);
            let x = move |k: C64| (g * k - g + c) * (h * k + d);
            let y = move |k: C64| (g * k + c) * (h * k + h + d);
            let r = move |k: C64| g * h * k * 2.0 + c * h + d * g;
            let (s1, s2, s3) = (s.clone(), s.clone(), s);
            Ok(TelescopePair::new(
                "bigid",
                move |k| {
                    let k = re(k);
                    Ok(s1.number(y(k), zero)? * s1.number((g * k + g + c) * (h * k + d), x(k))?)
                },
                move |k| {
                    let k = re(k);
                    Ok(s2.number(x(k), zero)?
                        * s2.number((g * k + c) * (h * k - h + d), y(k))?
                        * s2.weight(r(k), x(k))?)
                },
            )
            .with_t(move |k| {
                let k = re(k);
                Ok(s3.number((g * k + c) * (h * k + d) * 2.0, zero)? * s3.number(r(k), x(k))?)
            }))
        }
        other => Err(TelescopeError::UnknownTheorem(other.to_string())),
    }
}
