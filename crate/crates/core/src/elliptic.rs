//! Elliptic numbers and elliptic weights.
//!
//! ```text
//! [z]_{a,b;q,p} = theta(q^z, a q^z, b q^2, a/b) / theta(q, a q, b q^{z+1}, a q^{z-1}/b)
//! W_{a,b;q,p}(k) = theta(a q^{2k+1}, b q, b q^2, a/(q b), a/b)
//!                / theta(a q, b q^{k+1}, b q^{k+2}, a q^{k-1}/b, a q^k/b) * q^k
//! ```
//!
//! Every theta argument is carried as a logarithm, so exponents such as
//! `2 (gk + c)(hk + d)` may be large without overflowing. The degenerate
//! cases `p = 0` with `b -> 0` (the `a;q` numbers), `a -> 0` (the `(b;q)`
//! numbers) and both (the plain `q` numbers) are separate closed forms
//! selected by [`Specialization`].

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::theta::{log_theta, Nome, ThetaConfig, ThetaError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EllipticError {
    #[error(
        "denominator factor {factor} is within pole tolerance: |theta| = {magnitude:e} at argument exp({log_argument})"
    )]
    PoleProximity { factor: usize, log_argument: C64, magnitude: f64 },
    #[error("parameter {0} must be nonzero for this specialization")]
    ZeroParameter(&'static str),
    #[error("base q must be nonzero")]
    ZeroBase,
    #[error("non-finite intermediate value")]
    NonFinite,
    #[error(transparent)]
    Theta(#[from] ThetaError),
}

/// Which closed form evaluates the numbers and weights.
///
/// Every tag other than `FullElliptic` describes a `p = 0` case and ignores the nome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Specialization {
    FullElliptic,
    /// `p = 0`.
    Abq,
    /// `p = 0`, `b -> 0` (equivalently `b -> infinity`).
    Aq,
    /// `p = 0`, `a -> 0`.
    Bq,
    /// `p = 0`, `a -> 0`, `b -> 0`.
    Q,
}

impl Specialization {
    pub const ALL: [Specialization; 5] = [Self::FullElliptic, Self::Abq, Self::Aq, Self::Bq, Self::Q];

    pub fn tag(self) -> &'static str {
        match self {
            Self::FullElliptic => "full-elliptic",
            Self::Abq => "abq",
            Self::Aq => "aq",
            Self::Bq => "bq",
            Self::Q => "q",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.tag() == tag)
    }
}

/// A complex exponent `z`, with `q^z := exp(z Log q)` on the principal branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexExponent(pub C64);

impl ComplexExponent {
    pub fn z(self) -> C64 {
        self.0
    }

    /// `z Log q`, the logarithm of `q^z`.
    pub fn log_power(self, log_q: C64) -> C64 {
        self.0 * log_q
    }

    pub fn power(self, log_q: C64) -> C64 {
        self.log_power(log_q).exp()
    }
}

impl From<C64> for ComplexExponent {
    fn from(z: C64) -> Self {
        Self(z)
    }
}

impl From<f64> for ComplexExponent {
    fn from(z: f64) -> Self {
        Self(C64::new(z, 0.0))
    }
}

impl From<i64> for ComplexExponent {
    fn from(z: i64) -> Self {
        Self(C64::new(z as f64, 0.0))
    }
}

/// The parameters `(a, b, q, p)` of an elliptic number.
///
/// Shifts are accumulated as an exponent offset `s`, so the effective
/// parameters are `a q^{2s}` and `b q^s`; `shift(x).shift(y)` and
/// `shift(x + y)` therefore hold the same offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticParams {
    a: C64,
    b: C64,
    log_q: C64,
    nome: Nome,
    offset: C64,
}

fn is_zero(z: C64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

impl EllipticParams {
    pub fn new(a: C64, b: C64, q: C64, p: C64) -> Result<Self, EllipticError> {
        if is_zero(q) {
            return Err(EllipticError::ZeroBase);
        }
        Self::with_log_q(a, b, q.ln(), Nome::new(p)?)
    }

    /// Constructs the parameters from `Log q` directly, for bases such as
    /// `q^x` whose logarithm is `x Log q` rather than the principal one.
    pub fn with_log_q(a: C64, b: C64, log_q: C64, nome: Nome) -> Result<Self, EllipticError> {
        if !nome.is_zero() {
            if is_zero(a) {
                return Err(EllipticError::ZeroParameter("a"));
            }
            if is_zero(b) {
                return Err(EllipticError::ZeroParameter("b"));
            }
        }
        Ok(Self { a, b, log_q, nome, offset: C64::new(0.0, 0.0) })
    }

    /// Replaces `(a, b)` by `(a q^{2x}, b q^x)`.
    pub fn shift(&self, x: impl Into<ComplexExponent>) -> Self {
        Self { offset: self.offset + x.into().z(), ..*self }
    }

    pub fn offset(&self) -> C64 {
        self.offset
    }

    /// Same `a`, `b` and `p`, base `1/q` with `Log(1/q) = -Log q`.
    pub fn inverted_base(&self) -> Self {
        Self { log_q: -self.log_q, offset: -self.offset, ..*self }
    }

    pub fn log_q(&self) -> C64 {
        self.log_q
    }

    pub fn q(&self) -> C64 {
        self.log_q.exp()
    }

    pub fn nome(&self) -> Nome {
        self.nome
    }

    pub fn p(&self) -> C64 {
        self.nome.p()
    }

    /// Logarithm of the effective `a`, or `None` when `a = 0`.
    pub fn a_log(&self) -> Option<C64> {
        (!is_zero(self.a)).then(|| self.a.ln() + self.offset * self.log_q * 2.0)
    }

    pub fn b_log(&self) -> Option<C64> {
        (!is_zero(self.b)).then(|| self.b.ln() + self.offset * self.log_q)
    }

    pub fn a(&self) -> C64 {
        self.a_log().map_or(C64::new(0.0, 0.0), |l| l.exp())
    }

    pub fn b(&self) -> C64 {
        self.b_log().map_or(C64::new(0.0, 0.0), |l| l.exp())
    }
}

/// A theta argument: `exp(log)`, or exactly zero (only meaningful at `p = 0`).
#[derive(Debug, Clone, Copy)]
enum Arg {
    Zero,
    Log(C64),
}

fn arg(base: Option<C64>, offset: C64) -> Arg {
    base.map_or(Arg::Zero, |l| Arg::Log(l + offset))
}

/// `exp(extra) * prod theta(num) / prod theta(den)`, combined in log space.
fn quotient(num: &[Arg], den: &[Arg], extra: C64, nome: Nome, cfg: &ThetaConfig) -> Result<C64, EllipticError> {
    let mut den_rest = C64::new(0.0, 0.0);
    let mut p_power = 0i64;
    let mut half_turns = 0i64;
    for (factor, d) in den.iter().enumerate() {
        if let Arg::Log(w) = *d {
            let lt = log_theta(w, nome, cfg)?;
            if lt.reduced_abs < cfg.pole_tol {
                return Err(EllipticError::PoleProximity { factor, log_argument: w, magnitude: lt.reduced_abs });
            }
            den_rest += lt.rest;
            p_power -= lt.p_power;
            half_turns -= lt.half_turns;
        }
    }
    let mut num_rest = extra;
    for n in num {
        if let Arg::Log(w) = *n {
            let lt = log_theta(w, nome, cfg)?;
            if lt.is_zero() {
                return Ok(C64::new(0.0, 0.0));
            }
            num_rest += lt.rest;
            p_power += lt.p_power;
            half_turns += lt.half_turns;
        }
    }
    let mut total = num_rest - den_rest;
    if half_turns.rem_euclid(2) == 1 {
        total.im += std::f64::consts::PI;
    }
    if p_power != 0 {
        total += nome.log() * (p_power as f64);
    }
    Ok(total.exp())
}

fn need(l: Option<C64>, name: &'static str) -> Result<C64, EllipticError> {
    l.ok_or(EllipticError::ZeroParameter(name))
}

fn full_nome(params: &EllipticParams, spec: Specialization) -> Nome {
    match spec {
        Specialization::FullElliptic => params.nome,
        _ => Nome::zero(),
    }
}

/// `[z]_{a,b;q,p}` or its specialized closed form.
pub fn elliptic_number(
    z: impl Into<ComplexExponent>,
    params: &EllipticParams,
    spec: Specialization,
    cfg: &ThetaConfig,
) -> Result<C64, EllipticError> {
    let lq = params.log_q;
    number_from_log_power(z.into().log_power(lq), params, spec, cfg)
}

/// The elliptic number with `q^z` given by its logarithm `zl`.
///
/// Useful when `q^z` should be replaced by something that is not a power of
/// `q`, such as `p q^z`.
pub fn number_from_log_power(
    zl: C64,
    params: &EllipticParams,
    spec: Specialization,
    cfg: &ThetaConfig,
) -> Result<C64, EllipticError> {
    use Arg::Log;
    let lq = params.log_q;
    let zero = C64::new(0.0, 0.0);
    let nome = full_nome(params, spec);
    match spec {
        Specialization::FullElliptic | Specialization::Abq => {
            let a = need(params.a_log(), "a")?;
            let b = need(params.b_log(), "b")?;
            quotient(
                &[Log(zl), Log(a + zl), Log(b + lq * 2.0), Log(a - b)],
                &[Log(lq), Log(a + lq), Log(b + zl + lq), Log(a + zl - lq - b)],
                zero,
                nome,
                cfg,
            )
        }
        Specialization::Aq => {
            let a = params.a_log();
            quotient(&[Log(zl), arg(a, zl)], &[Log(lq), arg(a, lq)], lq - zl, nome, cfg)
        }
        Specialization::Bq => {
            let b = params.b_log();
            quotient(&[Log(zl), arg(b, lq * 2.0)], &[Log(lq), arg(b, zl + lq)], zero, nome, cfg)
        }
        Specialization::Q => quotient(&[Log(zl)], &[Log(lq)], zero, nome, cfg),
    }
}

/// `W_{a,b;q,p}(k)` or its specialized closed form.
pub fn elliptic_weight(
    k: impl Into<ComplexExponent>,
    params: &EllipticParams,
    spec: Specialization,
    cfg: &ThetaConfig,
) -> Result<C64, EllipticError> {
    use Arg::Log;
    let lq = params.log_q;
    let kl = k.into().log_power(lq);
    let nome = full_nome(params, spec);
    match spec {
        Specialization::FullElliptic | Specialization::Abq => {
            let a = need(params.a_log(), "a")?;
            let b = need(params.b_log(), "b")?;
            quotient(
                &[Log(a + kl * 2.0 + lq), Log(b + lq), Log(b + lq * 2.0), Log(a - lq - b), Log(a - b)],
                &[Log(a + lq), Log(b + kl + lq), Log(b + kl + lq * 2.0), Log(a + kl - lq - b), Log(a + kl - b)],
                kl,
                nome,
                cfg,
            )
        }
        Specialization::Aq => {
            let a = params.a_log();
            quotient(&[arg(a, kl * 2.0 + lq)], &[arg(a, lq)], -kl, nome, cfg)
        }
        Specialization::Bq => {
            let b = params.b_log();
            quotient(&[arg(b, lq), arg(b, lq * 2.0)], &[arg(b, kl + lq), arg(b, kl + lq * 2.0)], kl, nome, cfg)
        }
        Specialization::Q => quotient(&[], &[], kl, nome, cfg),
    }
}

/// `[m]! = [1][2]...[m]`.
pub fn elliptic_factorial(
    m: u32,
    params: &EllipticParams,
    spec: Specialization,
    cfg: &ThetaConfig,
) -> Result<C64, EllipticError> {
    (1..=m as i64).try_fold(C64::new(1.0, 0.0), |acc, j| Ok(acc * elliptic_number(j, params, spec, cfg)?))
}

/// The three terms `(A, B, C)` of the quadratic relation `A - B = C`:
///
/// ```text
/// A = [x] [y]_{s},   B = [x+r] [y-r]_{s},   C = [r+x-y] [r]_{x} W_{s}(y-r)
/// ```
///
/// where a subscript `s` means parameters shifted by `s = r + x - y`.
pub fn quad_rel_terms(
    x: impl Into<ComplexExponent>,
    y: impl Into<ComplexExponent>,
    r: impl Into<ComplexExponent>,
    params: &EllipticParams,
    cfg: &ThetaConfig,
) -> Result<[C64; 3], EllipticError> {
    let (x, y, r) = (x.into().z(), y.into().z(), r.into().z());
    let spec = Specialization::FullElliptic;
    let s = params.shift(r + x - y);
    let num = |z: C64, p: &EllipticParams| elliptic_number(z, p, spec, cfg);
    let a = num(x, params)? * num(y, &s)?;
    let b = num(x + r, params)? * num(y - r, &s)?;
    let c = num(r + x - y, params)? * num(r, &params.shift(x))? * elliptic_weight(y - r, &s, spec, cfg)?;
    Ok([a, b, c])
}

/// `A - B - C` for the terms of [`quad_rel_terms`].
pub fn quad_rel_residual(
    x: impl Into<ComplexExponent>,
    y: impl Into<ComplexExponent>,
    r: impl Into<ComplexExponent>,
    params: &EllipticParams,
    cfg: &ThetaConfig,
) -> Result<C64, EllipticError> {
    let [a, b, c] = quad_rel_terms(x, y, r, params, cfg)?;
    Ok(a - b - c)
}

/// Anything that can produce elliptic-type numbers and weights at shifted parameters.
///
/// `number(z, s)` is `[z]` with `(a, b)` replaced by `(a q^{2s}, b q^s)`, and
/// likewise for `weight`.
pub trait NumberSystem: Sync {
    fn number(&self, z: C64, shift: C64) -> Result<C64, EllipticError>;
    fn weight(&self, k: C64, shift: C64) -> Result<C64, EllipticError>;
}

/// [`NumberSystem`] backed by the log-space evaluation above.
#[derive(Debug, Clone, Copy)]
pub struct EllipticSystem {
    pub params: EllipticParams,
    pub spec: Specialization,
    pub cfg: ThetaConfig,
}

impl EllipticSystem {
    pub fn new(params: EllipticParams, spec: Specialization, cfg: ThetaConfig) -> Self {
        Self { params, spec, cfg }
    }
}

impl NumberSystem for EllipticSystem {
    fn number(&self, z: C64, shift: C64) -> Result<C64, EllipticError> {
        elliptic_number(z, &self.params.shift(shift), self.spec, &self.cfg)
    }

    fn weight(&self, k: C64, shift: C64) -> Result<C64, EllipticError> {
        elliptic_weight(k, &self.params.shift(shift), self.spec, &self.cfg)
    }
}
