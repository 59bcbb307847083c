//! Indefinite summations built from theta shifted factorials, including
//! multibasic ones whose factorials run over several bases.

use num_complex::Complex64 as C64;

use crate::theta::{shifted_factorial, theta, theta_prod, GeometricGrid, Nome, ThetaConfig, ThetaError};

type Sides = Result<(C64, C64), ThetaError>;

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn finite(v: C64) -> Result<C64, ThetaError> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(ThetaError::DivisionByZeroFactor { index: 0, magnitude: f64::INFINITY })
    }
}

fn div(a: C64, b: C64, cfg: &ThetaConfig) -> Result<C64, ThetaError> {
    let magnitude = b.norm();
    if !(magnitude >= cfg.pole_tol) {
        return Err(ThetaError::DivisionByZeroFactor { index: 0, magnitude });
    }
    finite(a.fdiv(b))
}

/// Product of `(x; base, p)_k` over `xs`.
fn sfs(xs: &[C64], base: C64, nome: Nome, k: i64, cfg: &ThetaConfig) -> Result<C64, ThetaError> {
    let grid = GeometricGrid::new(base, nome)?;
    xs.iter().try_fold(one(), |acc, &x| Ok(acc * shifted_factorial(x, &grid, k, cfg)?))
}

/// `(x; q)_k` by direct multiplication, without the theta module.
fn plain(xs: &[C64], q: C64, k: i64) -> C64 {
    let mut acc = one();
    for &x in xs {
        let mut y = x;
        for _ in 0..k {
            acc *= one() - y;
            y *= q;
        }
    }
    acc
}

/// The basic indefinite sum in `(a, b)` with plain q-factorials.
pub fn indef_1(a: C64, b: C64, q: C64, n: i64, cfg: &ThetaConfig) -> Sides {
    let mut l = C64::new(0.0, 0.0);
    for k in 0..=n {
        let w = div(one() - a * q.powi(2 * k as i32), one() - a, cfg)?;
        let t = div(plain(&[a, b], q, k), plain(&[q, a * q / b], q, k), cfg)?;
        l += w * t * b.powi((n - k) as i32);
    }
    let r = div(plain(&[a * q, b * q], q, n), plain(&[q, a * q / b], q, n), cfg)?;
    Ok((finite(l)?, r))
}

/// The elliptic indefinite sum in `(a, b, c)`, nome `p^2` throughout.
pub fn e_indef_1(a: C64, b: C64, c: C64, q: C64, p: C64, n: i64, cfg: &ThetaConfig) -> Sides {
    let nome = Nome::new(p * p)?;
    let qi = q.inv();
    let cp = c * p;
    let mut l = C64::new(0.0, 0.0);
    let th_a = theta(a, nome, cfg)?;
    for k in 0..=n {
        let w = div(theta(a * q.powi(2 * k as i32), nome, cfg)?, th_a, cfg)?;
        let up = sfs(&[a, b, cp], q, nome, k, cfg)? * sfs(&[b * cp / a], qi, nome, k, cfg)?;
        let down = sfs(&[q, a * q / b, b * cp * q], q, nome, k, cfg)? * sfs(&[cp / (a * q)], qi, nome, k, cfg)?;
        l += w * div(up, down, cfg)? * b.powi((n - k) as i32);
    }
    let up = sfs(&[a * q, b * q, cp * q], q, nome, n, cfg)? * sfs(&[b * cp / (a * q)], qi, nome, n, cfg)?;
    let down = sfs(&[q, a * q / b, b * cp * q], q, nome, n, cfg)? * sfs(&[cp / (a * q)], qi, nome, n, cfg)?;
    Ok((finite(l)?, div(up, down, cfg)?))
}

/// The base-inversion step used to rewrite the elliptic indefinite sum:
/// `(a/(bcp); q, P)_k / (aq/(cp); q, P)_k` against its `q^{-1}` form.
pub fn base_inversion(a: C64, b: C64, c: C64, q: C64, p: C64, k: i64, cfg: &ThetaConfig) -> Sides {
    let nome = Nome::new(p * p)?;
    let cp = c * p;
    let l = div(sfs(&[a / (b * cp)], q, nome, k, cfg)?, sfs(&[a * q / cp], q, nome, k, cfg)?, cfg)?;
    let r = div(sfs(&[b * cp / a], q.inv(), nome, k, cfg)?, sfs(&[cp / (a * q)], q.inv(), nome, k, cfg)?, cfg)?;
    Ok((l, finite(r.fdiv(b.powi(k as i32) * q.powi(k as i32)))?))
}

/// The elliptic extension of the q-cubes sum, `n >= 1`.
pub fn warnaar_cubes_elliptic(c: C64, q: C64, p: C64, n: i64, cfg: &ThetaConfig) -> Sides {
    let nome = Nome::new(p * p)?;
    let qi = q.inv();
    let cp = c * p;
    let q2 = q * q;
    let q3 = q2 * q;
    let th = theta(q2, nome, cfg)?;
    let mut l = C64::new(0.0, 0.0);
    for k in 1..=n {
        let w = div(theta(q.powi(2 * k as i32), nome, cfg)?, th, cfg)?;
        let up = sfs(&[q2, q2, cp], q, nome, k - 1, cfg)? * sfs(&[cp], qi, nome, k - 1, cfg)?;
        let down = sfs(&[q, q, cp * q3], q, nome, k - 1, cfg)? * sfs(&[cp / q3], qi, nome, k - 1, cfg)?;
        l += w * div(up, down, cfg)? * q.powi((2 * (n - k)) as i32);
    }
    let up = sfs(&[q3, q3, cp * q], q, nome, n - 1, cfg)? * sfs(&[cp / q], qi, nome, n - 1, cfg)?;
    let down = sfs(&[q, q, cp * q3], q, nome, n - 1, cfg)? * sfs(&[cp / q3], qi, nome, n - 1, cfg)?;
    Ok((finite(l)?, div(up, down, cfg)?))
}

/// A cubic-base sum over odd q-numbers.
pub fn cubic_odds(a: C64, q: C64, n: i64, cfg: &ThetaConfig) -> Sides {
    let nome = Nome::zero();
    let q3 = q * q * q;
    let aq = one() - a * q;
    let mut l = C64::new(0.0, 0.0);
    for k in 0..n {
        let f = div(sfs(&[a * q], q3, nome, k, cfg)?, sfs(&[a * q.powi(5)], q3, nome, k, cfg)?, cfg)?;
        let odd = div(one() - q.powi((2 * k + 1) as i32), one() - q, cfg)?;
        let sq = div(one() - a * q.powi((2 * k + 1) as i32), aq, cfg)?;
        l += q.powi(-k as i32) * f * odd * sq * sq;
    }
    let head = div((one() - q.powi(n as i32)).powi(2) * (one() - a * q.powi(n as i32)), (one() - q).powi(2) * aq, cfg)?;
    let f = div(sfs(&[a * q.powi(4)], q3, nome, n - 1, cfg)?, sfs(&[a * q.powi(5)], q3, nome, n - 1, cfg)?, cfg)?;
    Ok((finite(l)?, finite(head * f * q.powi((1 - n) as i32))?))
}

/// Parameters of the three-base summation.
#[derive(Debug, Clone, Copy)]
pub struct ThreeBase {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub q: C64,
    pub r: C64,
    pub s: C64,
    pub p: C64,
}

/// A summation with factorials in bases `q`, `r`, `s` and `rs/q`.
pub fn three_base(x: ThreeBase, n: i64, cfg: &ThetaConfig) -> Sides {
    let ThreeBase { a, b, c, d, q, r, s, p } = x;
    let nome = Nome::new(p)?;
    let t = |xs: &[C64]| theta_prod(xs, nome, cfg);
    let f = |y: C64, base: C64, k: i64| sfs(&[y], base, nome, k, cfg);
    let rsq = r * s / q;
    let ad2 = a * d * d / (b * c);
    let base_w = t(&[a * d, b / d, c / d])?;
    let mut l = C64::new(0.0, 0.0);
    for k in 0..=n {
        let ki = k as i32;
        let w = div(
            t(&[a * d * (r * s).powi(ki), b * r.powi(ki) / (d * q.powi(ki)), c * s.powi(ki) / (d * q.powi(ki))])?,
            base_w,
            cfg,
        )?;
        let up = f(ad2, q, k)? * f(b, r, k)? * f(c, s, k)? * f(a, rsq, k)?;
        let down =
            f(d * q, q, k)? * f(a * d * r / c, r, k)? * f(a * d * s / b, s, k)? * f(b * c * r * s / (d * q), rsq, k)?;
        l += w * div(up, down, cfg)? * q.powi(ki);
    }
    let big = d * t(&[a * d, b / d, c / d, a * d / (b * c)])?;
    let up = f(ad2 * q, q, n)? * f(b * r, r, n)? * f(c * s, s, n)? * f(a * rsq, rsq, n)?;
    let down =
        f(d * q, q, n)? * f(a * d * r / c, r, n)? * f(a * d * s / b, s, n)? * f(b * c * r * s / (d * q), rsq, n)?;
    let head = div(t(&[a, b, c, ad2])? * div(up, down, cfg)?, big, cfg)?;
    let tail = div(t(&[d, a * d / b, a * d / c, b * c / d])?, big, cfg)?;
    Ok((finite(l)?, finite(head - tail)?))
}
