//! The modified Jacobi theta function
//!
//! ```text
//! theta(a; p) = prod_{j >= 0} (1 - a p^j) (1 - p^{j+1} / a)
//! ```
//!
//! together with its products and the theta shifted factorials
//! `(a; base, p)_k`. With `p = 0` every routine collapses to the ordinary
//! `(1 - a)` factors without running a product loop.
//!
//! Two evaluation paths are provided. [`theta`] returns the value directly.
//! [`log_theta`] takes the *logarithm* of the argument and returns the
//! logarithm of the value. It first moves the argument into the fundamental
//! annulus `|p| < |y| <= 1` using `theta(p x) = -theta(x) / x`, so arguments
//! such as `q^z` with `|z|` in the hundreds neither overflow nor need
//! hundreds of product terms.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Default magnitude below which a divisor counts as a pole hit.
pub const DEFAULT_POLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThetaError {
    #[error("theta argument is zero")]
    ZeroArgument,
    #[error("nome must satisfy |p| < 1, got |p| = {0}")]
    InvalidNome(f64),
    #[error("invalid theta configuration: {0}")]
    InvalidConfig(String),
    #[error("geometric grid base must be nonzero")]
    ZeroBase,
    #[error("theta product did not reach tail bound {tail_tol:e} within {max_terms} terms")]
    TruncationNotConverged { max_terms: usize, tail_tol: f64 },
    #[error("factor {index} of a reciprocal shifted factorial is (nearly) zero: |theta| = {magnitude:e}")]
    DivisionByZeroFactor { index: i64, magnitude: f64 },
}

/// The fixed nome `p` of a theta function, `|p| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nome {
    p: C64,
}

impl Nome {
    pub fn new(p: C64) -> Result<Self, ThetaError> {
        let r = p.norm();
        if !(r < 1.0) {
            return Err(ThetaError::InvalidNome(r));
        }
        Ok(Self { p })
    }

    pub fn zero() -> Self {
        Self { p: C64::new(0.0, 0.0) }
    }

    pub fn p(&self) -> C64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.p.re == 0.0 && self.p.im == 0.0
    }

    /// Principal logarithm of `p`; only meaningful for `p != 0`.
    pub fn log(&self) -> C64 {
        self.p.ln()
    }
}

/// Truncation policy for the infinite product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaConfig {
    pub max_terms: usize,
    pub tail_tol: f64,
    /// Divisors with magnitude below this are reported as poles.
    pub pole_tol: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        Self { max_terms: 64, tail_tol: 1e-14, pole_tol: DEFAULT_POLE_TOL }
    }
}

impl ThetaConfig {
    pub fn new(max_terms: usize, tail_tol: f64) -> Result<Self, ThetaError> {
        Self { max_terms, tail_tol, ..Self::default() }.validated()
    }

    pub fn with_pole_tol(mut self, pole_tol: f64) -> Result<Self, ThetaError> {
        self.pole_tol = pole_tol;
        self.validated()
    }

    pub fn validated(self) -> Result<Self, ThetaError> {
        if self.max_terms == 0 {
            return Err(ThetaError::InvalidConfig("max_terms must be >= 1".into()));
        }
        if !(self.tail_tol > 0.0) {
            return Err(ThetaError::InvalidConfig("tail_tol must be > 0".into()));
        }
        if !(self.pole_tol >= 0.0) {
            return Err(ThetaError::InvalidConfig("pole_tol must be >= 0".into()));
        }
        Ok(self)
    }
}

/// Geometric progression `a, a*base, a*base^2, ...` of theta arguments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricGrid {
    base: C64,
    nome: Nome,
}

impl GeometricGrid {
    pub fn new(base: C64, nome: Nome) -> Result<Self, ThetaError> {
        if base.re == 0.0 && base.im == 0.0 {
            return Err(ThetaError::ZeroBase);
        }
        Ok(Self { base, nome })
    }

    pub fn base(&self) -> C64 {
        self.base
    }

    pub fn nome(&self) -> Nome {
        self.nome
    }
}

/// Plain truncated product for `p != 0`, stopping once the geometric tail
/// bound `(|a| + 1/|a| + 2) |p|^J / (1 - |p|)` drops below `tail_tol`.
fn truncated_product(a: C64, p: C64, cfg: &ThetaConfig) -> Result<C64, ThetaError> {
    let rp = p.norm();
    let ra = a.norm();
    let lead = (ra + 1.0 / ra + 2.0) / (1.0 - rp);
    let inv_a = a.inv();
    let mut acc = C64::new(1.0, 0.0);
    let mut pj = C64::new(1.0, 0.0);
    let mut tail = lead;
    for _ in 0..cfg.max_terms {
        let next = pj * p;
        acc *= (C64::new(1.0, 0.0) - a * pj) * (C64::new(1.0, 0.0) - next * inv_a);
        pj = next;
        tail *= rp;
        if tail < cfg.tail_tol {
            return Ok(acc);
        }
    }
    Err(ThetaError::TruncationNotConverged { max_terms: cfg.max_terms, tail_tol: cfg.tail_tol })
}

/// Splits `log_arg` as `m * Log p + w` with `Re w` in `(ln|p|, 0]` and
/// `Im w` in `[-pi, pi]`.
fn reduce(log_arg: C64, log_p: C64) -> (i64, C64) {
    let m = (log_arg.re / log_p.re).floor();
    let mut w = log_arg - log_p * m;
    w.im -= TAU * (w.im / TAU).round();
    (m as i64, w)
}

/// `theta(a; p)`.
pub fn theta(a: C64, nome: Nome, cfg: &ThetaConfig) -> Result<C64, ThetaError> {
    let one = C64::new(1.0, 0.0);
    if nome.is_zero() {
        return Ok(one - a);
    }
    if a.re == 0.0 && a.im == 0.0 {
        return Err(ThetaError::ZeroArgument);
    }
    let lp = nome.log();
    let (m, w) = reduce(a.ln(), lp);
    if m == 0 {
        return truncated_product(a, nome.p, cfg);
    }
    let t = truncated_product(w.exp(), nome.p, cfg)?;
    if t.re == 0.0 && t.im == 0.0 {
        return Ok(t);
    }
    Ok(LogTheta::from_reduced(t, w, m).to_log(lp).exp())
}

/// `theta(a_1, ..., a_r; p)`; the empty product is 1.
pub fn theta_prod(args: &[C64], nome: Nome, cfg: &ThetaConfig) -> Result<C64, ThetaError> {
    args.iter().try_fold(C64::new(1.0, 0.0), |acc, &a| Ok(acc * theta(a, nome, cfg)?))
}

/// Theta shifted factorial `(a; base, p)_k`.
///
/// For `k < 0` the reciprocal convention `1 / prod_{j=1}^{|k|} theta(a base^{-j})`
/// is used. Powers of `base` are built by repeated multiplication.
pub fn shifted_factorial(a: C64, grid: &GeometricGrid, k: i64, cfg: &ThetaConfig) -> Result<C64, ThetaError> {
    let one = C64::new(1.0, 0.0);
    let mut acc = one;
    if k >= 0 {
        let mut x = a;
        for _ in 0..k {
            acc *= theta(x, grid.nome, cfg)?;
            x *= grid.base;
        }
        return Ok(acc);
    }
    let inv = grid.base.inv();
    let mut x = a;
    for j in 1..=(-k) {
        x *= inv;
        let t = theta(x, grid.nome, cfg)?;
        let magnitude = t.norm();
        if magnitude < cfg.pole_tol {
            return Err(ThetaError::DivisionByZeroFactor { index: -j, magnitude });
        }
        acc *= t;
    }
    Ok(acc.finv())
}

/// Logarithm of a theta value, split so that the large integer multiple of
/// `Log p` produced by the quasi-periodic reduction can be combined exactly
/// across a quotient before it is multiplied out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogTheta {
    /// `ln theta(y) - m * ln y`, where `y` is the reduced argument.
    pub rest: C64,
    /// Coefficient of `Log p`.
    pub p_power: i64,
    /// Coefficient of `i*pi`.
    pub half_turns: i64,
    /// `|theta(y)|` (or `|1 - x|` when `p = 0`): the scale-free distance of
    /// the argument from a zero of theta. Zero means an exact zero.
    pub reduced_abs: f64,
}

impl LogTheta {
    fn from_reduced(t: C64, w: C64, m: i64) -> Self {
        Self { rest: t.ln() - w * (m as f64), p_power: -(m * (m - 1) / 2), half_turns: m, reduced_abs: t.norm() }
    }

    pub fn is_zero(&self) -> bool {
        self.reduced_abs == 0.0
    }

    /// Collapses to a single complex logarithm.
    pub fn to_log(&self, log_p: C64) -> C64 {
        let turns = if self.half_turns.rem_euclid(2) == 1 { PI } else { 0.0 };
        let mut out = self.rest + C64::new(0.0, turns);
        if self.p_power != 0 {
            out += log_p * (self.p_power as f64);
        }
        out
    }
}

/// `ln(1 - e^w)` evaluated without overflowing for large `Re w`.
pub fn log_one_minus_exp(w: C64) -> LogTheta {
    let one = C64::new(1.0, 0.0);
    let (rest, reduced_abs) = if w.re > 0.0 {
        let v = (-w).exp() - one;
        (w + v.ln(), v.norm())
    } else {
        let v = one - w.exp();
        (v.ln(), v.norm())
    };
    LogTheta { rest, p_power: 0, half_turns: 0, reduced_abs }
}

/// `ln theta(e^log_arg; p)` for an argument given by its logarithm.
pub fn log_theta(log_arg: C64, nome: Nome, cfg: &ThetaConfig) -> Result<LogTheta, ThetaError> {
    if !(log_arg.re.is_finite() && log_arg.im.is_finite()) {
        return Err(ThetaError::ZeroArgument);
    }
    if nome.is_zero() {
        return Ok(log_one_minus_exp(log_arg));
    }
    let (m, w) = reduce(log_arg, nome.log());
    let t = truncated_product(w.exp(), nome.p, cfg)?;
    if t.re == 0.0 && t.im == 0.0 {
        return Ok(LogTheta { rest: C64::new(f64::NEG_INFINITY, 0.0), p_power: 0, half_turns: 0, reduced_abs: 0.0 });
    }
    Ok(LogTheta::from_reduced(t, w, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(x: C64, y: C64) -> f64 {
        (x - y).norm() / x.norm().max(y.norm()).max(1e-300)
    }

    #[test]
    fn p_zero_reduces_to_linear_factor() {
        let cfg = ThetaConfig::default();
        assert_eq!(theta(c(0.5, 0.0), Nome::zero(), &cfg).unwrap(), c(0.5, 0.0));
        assert_eq!(theta_prod(&[c(0.5, 0.0)], Nome::zero(), &cfg).unwrap(), c(0.5, 0.0));
    }

    #[test]
    fn zero_at_unit_argument() {
        let cfg = ThetaConfig::default();
        let nome = Nome::new(c(0.3, 0.0)).unwrap();
        assert_eq!(theta(c(1.0, 0.0), nome, &cfg).unwrap().norm(), 0.0);
    }

    #[test]
    fn inversion_p_over_a() {
        let cfg = ThetaConfig::default();
        let nome = Nome::new(c(0.2, 0.0)).unwrap();
        let a = c(0.3, 0.1);
        let lhs = theta(a, nome, &cfg).unwrap();
        let rhs = theta(nome.p() / a, nome, &cfg).unwrap();
        assert!(rel(lhs, rhs) <= 1e-12, "{lhs} vs {rhs}");
    }

    #[test]
    fn empty_product_is_one() {
        let cfg = ThetaConfig::default();
        let nome = Nome::new(c(0.4, 0.1)).unwrap();
        assert_eq!(theta_prod(&[], nome, &cfg).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn product_with_inverted_partner_squares() {
        let cfg = ThetaConfig::default();
        let nome = Nome::new(c(0.2, 0.0)).unwrap();
        let x = c(0.4, 0.0);
        let prod = theta_prod(&[x, nome.p() / x], nome, &cfg).unwrap();
        let single = theta(x, nome, &cfg).unwrap();
        assert!(rel(prod, single * single) <= 1e-12);
    }

    #[test]
    fn zero_argument_rejected_for_nonzero_nome() {
        let cfg = ThetaConfig::default();
        let nome = Nome::new(c(0.2, 0.0)).unwrap();
        assert_eq!(theta(c(0.0, 0.0), nome, &cfg), Err(ThetaError::ZeroArgument));
        // p = 0 has no second factor, so a = 0 is harmless there.
        assert_eq!(theta(c(0.0, 0.0), Nome::zero(), &cfg), Ok(c(1.0, 0.0)));
    }

    #[test]
    fn invalid_nome_and_config() {
        assert!(matches!(Nome::new(c(1.0, 0.0)), Err(ThetaError::InvalidNome(_))));
        assert!(ThetaConfig::new(0, 1e-14).is_err());
        assert!(ThetaConfig::new(8, 0.0).is_err());
        assert!(GeometricGrid::new(c(0.0, 0.0), Nome::zero()).is_err());
    }

    #[test]
    fn truncation_fails_near_unit_nome() {
        let cfg = ThetaConfig::default();
        let nome = Nome::new(c(0.97, 0.0)).unwrap();
        assert!(matches!(theta(c(0.5, 0.2), nome, &cfg), Err(ThetaError::TruncationNotConverged { .. })));
    }

    #[test]
    fn shifted_factorial_examples() {
        let cfg = ThetaConfig::default();
        let g = GeometricGrid::new(c(0.5, 0.0), Nome::zero()).unwrap();
        assert_eq!(shifted_factorial(c(0.7, 0.2), &g, 0, &cfg).unwrap(), c(1.0, 0.0));
        let v = shifted_factorial(c(0.5, 0.0), &g, 2, &cfg).unwrap();
        assert!((v - c(0.375, 0.0)).norm() < 1e-15);
        // base q^{-1} = 2 with a = q^2 = 0.25
        let g = GeometricGrid::new(c(2.0, 0.0), Nome::zero()).unwrap();
        let v = shifted_factorial(c(0.25, 0.0), &g, 2, &cfg).unwrap();
        assert!((v - c(0.375, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn negative_index_pole_detected() {
        let cfg = ThetaConfig::default();
        let g = GeometricGrid::new(c(0.5, 0.0), Nome::zero()).unwrap();
        // a * base^{-1} = 1 makes the first reciprocal factor vanish.
        let err = shifted_factorial(c(0.5, 0.0), &g, -1, &cfg).unwrap_err();
        assert!(matches!(err, ThetaError::DivisionByZeroFactor { index: -1, .. }));
    }

    #[test]
    fn log_theta_matches_direct_value() {
        let cfg = ThetaConfig::default();
        let nome = Nome::new(c(0.35, -0.2)).unwrap();
        for a in [c(0.6, 0.3), c(3.0, -1.0), c(0.01, 0.02), c(-40.0, 7.0)] {
            let direct = theta(a, nome, &cfg).unwrap();
            let via_log = log_theta(a.ln(), nome, &cfg).unwrap().to_log(nome.log()).exp();
            assert!(rel(direct, via_log) < 1e-12, "a = {a}: {direct} vs {via_log}");
        }
    }

    #[test]
    fn log_theta_survives_huge_arguments() {
        // q^z with Re(z Log q) ~ 900 would overflow as a plain value.
        let cfg = ThetaConfig::default();
        let nome = Nome::new(c(0.3, 0.1)).unwrap();
        let w = c(900.0, 12.0);
        let lt = log_theta(w, nome, &cfg).unwrap();
        assert!(lt.rest.re.is_finite());
        // theta(p x) = -theta(x)/x in log form
        let shifted = log_theta(w + nome.log(), nome, &cfg).unwrap();
        let lhs = shifted.to_log(nome.log());
        let rhs = lt.to_log(nome.log()) + c(0.0, PI) - w;
        let d = lhs - rhs;
        assert!(d.re.abs() < 1e-9);
        let phase = d.im - TAU * (d.im / TAU).round();
        assert!(phase.abs() < 1e-9, "{d}");
    }

    #[test]
    fn log_one_minus_exp_both_branches() {
        for w in [c(-3.0, 0.4), c(2.5, -1.0), c(0.0, 2.0)] {
            let lt = log_one_minus_exp(w);
            let direct = C64::new(1.0, 0.0) - w.exp();
            assert!(rel(lt.rest.exp(), direct) < 1e-14);
        }
    }

    fn polar(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
        (lo..hi, -3.1f64..3.1).prop_map(|(r, t)| C64::from_polar(r, t))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn inversion(a in polar(0.2, 5.0), p in polar(0.0, 0.85)) {
            let cfg = ThetaConfig::new(600, 1e-14).unwrap();
            let nome = Nome::new(p).unwrap();
            let x = theta(a, nome, &cfg).unwrap();
            let y = theta(nome.p() / a, nome, &cfg).unwrap();
            let z = -a * theta(a.inv(), nome, &cfg).unwrap();
            let scale = x.norm().max(y.norm()).max(z.norm());
            prop_assert!((x - y).norm() <= 1e-10 * scale && (x - z).norm() <= 1e-10 * scale, "{x} {y} {z}");
        }

        #[test]
        fn weierstrass_addition(
            x in polar(0.3, 3.0), y in polar(0.3, 3.0), u in polar(0.3, 3.0), v in polar(0.3, 3.0),
            p in polar(0.0, 0.85),
        ) {
            let cfg = ThetaConfig::new(600, 1e-14).unwrap();
            let nome = Nome::new(p).unwrap();
            let a = theta_prod(&[x * y, x / y, u * v, u / v], nome, &cfg).unwrap();
            let b = theta_prod(&[x * v, x / v, u * y, u / y], nome, &cfg).unwrap();
            let c = u / y * theta_prod(&[y * v, y / v, x * u, x / u], nome, &cfg).unwrap();
            let scale = a.norm().max(b.norm()).max(c.norm());
            prop_assert!((a - b - c).norm() <= 1e-10 * scale);
        }

        #[test]
        fn factorial_splicing(a in polar(0.2, 2.0), q in polar(0.3, 1.5), p in polar(0.0, 0.5), m in -5i64..6, n in -5i64..6) {
            let cfg = ThetaConfig::default();
            let g = GeometricGrid::new(q, Nome::new(p).unwrap()).unwrap();
            let whole = shifted_factorial(a, &g, m + n, &cfg);
            let parts = shifted_factorial(a, &g, m, &cfg)
                .and_then(|x| Ok(x * shifted_factorial(a * q.powi(m as i32), &g, n, &cfg)?));
            if let (Ok(w), Ok(s)) = (whole, parts) {
                prop_assert!(rel(w, s) <= 1e-12, "{w} vs {s}");
            }
        }

        #[test]
        fn zero_nome_factorial_is_plain_product(a in polar(0.1, 3.0), q in polar(0.3, 1.5), k in 0i64..20) {
            let cfg = ThetaConfig::default();
            let g = GeometricGrid::new(q, Nome::zero()).unwrap();
            let mut direct = C64::new(1.0, 0.0);
            let mut x = a;
            for _ in 0..k {
                direct *= C64::new(1.0, 0.0) - x;
                x *= q;
            }
            prop_assert!(rel(shifted_factorial(a, &g, k, &cfg).unwrap(), direct) <= 1e-14);
        }
    }
}
