//! Summation families written once over any [`NumberSystem`].
//!
//! Each function returns `(LHS, RHS)` for the given upper limit.

use num_complex::Complex64 as C64;

use crate::elliptic::{EllipticError, NumberSystem};

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn ri(x: i64) -> C64 {
    re(x as f64)
}

/// `[z]` at shift `s`.
fn num<S: NumberSystem>(s: &S, z: C64, sh: C64) -> Result<C64, EllipticError> {
    s.number(z, sh)
}

fn checked_div(a: C64, b: C64) -> Result<C64, EllipticError> {
    let q = a.fdiv(b);
    if q.re.is_finite() && q.im.is_finite() {
        Ok(q)
    } else {
        Err(EllipticError::NonFinite)
    }
}

/// `prod_{i=0}^{count-1} [start + i]`.
fn rising<S: NumberSystem>(s: &S, start: i64, count: i64) -> Result<C64, EllipticError> {
    let zero = re(0.0);
    (0..count).try_fold(re(1.0), |acc, i| Ok::<_, EllipticError>(acc * num(s, ri(start + i), zero)?))
}

/// `sum_{k=0}^{n-1} W(k) = [n]`.
pub fn basic_g<S: NumberSystem>(s: &S, n: i64) -> Result<(C64, C64), EllipticError> {
    let zero = re(0.0);
    let l = (0..n).try_fold(re(0.0), |acc, k| Ok::<_, EllipticError>(acc + s.weight(ri(k), zero)?))?;
    Ok((l, num(s, ri(n), zero)?))
}

/// `sum_{k=0}^n W(k) ([k+1] [2]_k - 1) = W(1) [n+1] [n+1]_1`.
pub fn tel_c<S: NumberSystem>(s: &S, n: i64) -> Result<(C64, C64), EllipticError> {
    let zero = re(0.0);
    let one = re(1.0);
    let mut l = re(0.0);
    for k in 0..=n {
        let kk = ri(k);
        l += s.weight(kk, zero)? * (num(s, kk + 1.0, zero)? * num(s, re(2.0), kk)? - 1.0);
    }
    let r = s.weight(one, zero)? * num(s, ri(n + 1), zero)? * num(s, ri(n + 1), one)?;
    Ok((l, r))
}

/// `sum_{k=0}^n W(k) [m+1]_k prod_{i=1}^m [k+i] = prod_{i=1}^{m+1} [n+i]`.
pub fn tel_a<S: NumberSystem>(s: &S, m: i64, n: i64) -> Result<(C64, C64), EllipticError> {
    let zero = re(0.0);
    let mut l = re(0.0);
    for k in 0..=n {
        let kk = ri(k);
        l += s.weight(kk, zero)? * num(s, ri(m + 1), kk)? * rising(s, k + 1, m)?;
    }
    Ok((l, rising(s, n + 1, m + 1)?))
}

/// `sum_{k=1}^n W(k-1) [2]_{k-1} [k] = [n] [n+1]`.
pub fn sum_even<S: NumberSystem>(s: &S, n: i64) -> Result<(C64, C64), EllipticError> {
    let zero = re(0.0);
    let mut l = re(0.0);
    for k in 1..=n {
        let j = ri(k - 1);
        l += s.weight(j, zero)? * num(s, re(2.0), j)? * num(s, ri(k), zero)?;
    }
    Ok((l, rising(s, n, 2)?))
}

/// `sum_{k=1}^n W(k-1) [3]_{k-1} [k] [k+1] = [n] [n+1] [n+2]`.
pub fn m3_rising<S: NumberSystem>(s: &S, n: i64) -> Result<(C64, C64), EllipticError> {
    let zero = re(0.0);
    let mut l = re(0.0);
    for k in 1..=n {
        let j = ri(k - 1);
        l += s.weight(j, zero)? * num(s, re(3.0), j)? * rising(s, k, 2)?;
    }
    Ok((l, rising(s, n, 3)?))
}

/// `sum_{k=1}^n W(k) [m]_k / prod_{i=0}^m [k+i] = 1/[m]! - 1/prod_{i=1}^m [n+i]`.
pub fn tel_b<S: NumberSystem>(s: &S, m: i64, n: i64) -> Result<(C64, C64), EllipticError> {
    let zero = re(0.0);
    let one = re(1.0);
    let mut l = re(0.0);
    for k in 1..=n {
        let kk = ri(k);
        l += checked_div(s.weight(kk, zero)? * num(s, ri(m), kk)?, rising(s, k, m + 1)?)?;
    }
    let r = checked_div(one, rising(s, 1, m)?)? - checked_div(one, rising(s, n + 1, m)?)?;
    Ok((l, r))
}

/// Parameters `(c, d, g, h)` of the two-parameter-line summation.
#[derive(Debug, Clone, Copy)]
pub struct Lines {
    pub c: C64,
    pub d: C64,
    pub g: C64,
    pub h: C64,
}

/// The bilateral-line summation with `(c, d, g, h)`, normalized by
/// `[2cd] [ch+dg]_{(c-g)d}`. Products are accumulated term by term.
pub fn bigid<S: NumberSystem>(s: &S, x: Lines, n: i64) -> Result<(C64, C64), EllipticError> {
    let Lines { c, d, g, h } = x;
    let zero = re(0.0);
    let norm = num(s, c * d * 2.0, zero)? * num(s, c * h + d * g, (c - g) * d)?;
    let mut l = re(0.0);
    let mut prod = re(1.0);
    for k in 0..=n {
        let kk = ri(k);
        let t = num(s, (g * kk + c) * (h * kk + d) * 2.0, zero)?
            * num(s, g * h * kk * 2.0 + c * h + d * g, (g * kk - g + c) * (h * kk + d))?;
        l += checked_div(t * prod, norm)?;
        let top = num(s, (g * kk + g + c) * (h * kk + d), (g * kk - g + c) * (h * kk + d))?;
        let bottom = num(s, (g * kk + g + c) * (h * kk + d), (g * kk + g + c) * (h * kk + h * 2.0 + d))?
            * s.weight(g * h * kk * 2.0 + g * h * 2.0 + c * h + d * g, (g * kk + c) * (h * kk + h + d))?;
        prod = checked_div(prod * top, bottom)?;
    }
    let nn = ri(n);
    let mut r = checked_div(num(s, (g * nn + c) * (h * nn + h + d), zero)? * num(s, (g + c) * d, (c - g) * d)?, norm)?;
    for j in 1..=n {
        let jj = ri(j);
        let top = num(s, (g * jj + g + c) * (h * jj + d), (g * jj - g + c) * (h * jj + d))?;
        let bottom = num(s, (g * jj + c) * (h * jj - h + d), (g * jj + c) * (h * jj + h + d))?
            * s.weight(g * h * jj * 2.0 + c * h + d * g, (g * jj - g + c) * (h * jj + d))?;
        r = checked_div(r * top, bottom)?;
    }
    let tail = checked_div(num(s, (c - g) * d, zero)? * num(s, c * (d - h), c * (h + d))?, norm)?
        * s.weight(c * h + d * g, (c - g) * d)?;
    let r = r - tail;
    for v in [l, r] {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(EllipticError::NonFinite);
        }
    }
    Ok((l, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{EllipticParams, EllipticSystem, Specialization};
    use crate::theta::ThetaConfig;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(x: C64, y: C64) -> f64 {
        (x - y).norm() / x.norm().max(y.norm()).max(1.0)
    }

    fn sys(spec: Specialization) -> EllipticSystem {
        let p = EllipticParams::new(c(0.31, -0.2), c(-0.45, 0.27), c(0.55, 0.3), c(0.12, 0.21)).unwrap();
        EllipticSystem::new(p, spec, ThetaConfig::default())
    }

    #[test]
    fn basic_g_q_example() {
        let p = EllipticParams::new(c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.0)).unwrap();
        let s = EllipticSystem::new(p, Specialization::Q, ThetaConfig::default());
        let (l, r) = basic_g(&s, 4).unwrap();
        assert!((l - c(1.875, 0.0)).norm() < 1e-14);
        assert!((r - c(1.875, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn families_hold_in_every_specialization() {
        for spec in Specialization::ALL {
            let s = sys(spec);
            for n in 0..6 {
                let mut pairs = vec![basic_g(&s, n), tel_c(&s, n), sum_even(&s, n), m3_rising(&s, n)];
                for m in 0..4 {
                    pairs.push(tel_a(&s, m, n));
                }
                for m in 1..4 {
                    pairs.push(tel_b(&s, m, n));
                }
                let lines = Lines { c: c(0.4, 0.1), d: c(-0.3, 0.5), g: c(0.7, -0.2), h: c(0.2, 0.6) };
                pairs.push(bigid(&s, lines, n));
                for (i, pair) in pairs.into_iter().enumerate() {
                    let (l, r) = pair.unwrap();
                    assert!(rel(l, r) < 1e-9, "{spec:?} n={n} #{i}: {l} vs {r}");
                }
            }
        }
    }
}
