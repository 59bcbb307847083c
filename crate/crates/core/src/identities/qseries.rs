//! q-series identities written once over [`QAlg`], so each can be checked
//! exactly in `Q(q)` or numerically at a sampled base.

use num_complex::Complex64 as C64;

use crate::qexact::{QAlg, QExactError};

type Sides<V> = Result<(V, V), QExactError>;

fn re(x: i64) -> C64 {
    C64::new(x as f64, 0.0)
}

/// `[z]` for integer `z`.
pub(crate) fn b<A: QAlg>(alg: &A, z: i64) -> Result<A::V, QExactError> {
    alg.q_num(re(z))
}

pub(crate) fn qp<A: QAlg>(alg: &A, e: i64) -> Result<A::V, QExactError> {
    alg.q_pow(re(e))
}

/// Product of `[z]` over `zs`.
pub(crate) fn bs<A: QAlg>(alg: &A, zs: &[i64]) -> Result<A::V, QExactError> {
    zs.iter().try_fold(alg.int(1), |acc, &z| Ok(acc * b(alg, z)?))
}

fn sum<A: QAlg, F>(alg: &A, lo: i64, hi: i64, mut term: F) -> Result<A::V, QExactError>
where
    F: FnMut(i64) -> Result<A::V, QExactError>,
{
    (lo..=hi).try_fold(alg.int(0), |acc, k| Ok(acc + term(k)?))
}

pub fn geo<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    Ok((sum(alg, 0, n - 1, |k| qp(alg, k))?, b(alg, n)?))
}

/// Odd q-numbers against a square.
pub fn qodds<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 0, n - 1, |k| Ok(b(alg, 2 * k + 1)? * qp(alg, -k)?))?;
    Ok((l, bs(alg, &[n, n])? * qp(alg, 1 - n)?))
}

pub fn sp1<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 0, n, |k| Ok(qp(alg, k - 1)? * (bs(alg, &[2, k + 1])? - alg.int(1))))?;
    Ok((l, bs(alg, &[n + 1, n + 1])?))
}

pub fn sp2<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 0, n, |k| Ok(qp(alg, 2 * n - 2 * k)? * (bs(alg, &[2, k + 1])? - qp(alg, k + 1)?)))?;
    Ok((l, bs(alg, &[n + 1, n + 1])?))
}

pub fn tel_c_a_at_1<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 0, n, |k| {
        let t = bs(alg, &[2, k + 1, k + 1, 2 * k + 2])? - qp(alg, k + 1)? * b(alg, 2 * k + 1)?;
        Ok(qp(alg, 2 * n - 2 * k)? * t)
    })?;
    Ok((l, bs(alg, &[n + 1, n + 1, n + 1, n + 3])?))
}

pub fn tel_c_b_at_1<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 0, n, |k| {
        let inner = alg.div(&bs(alg, &[k + 1, 2, 2])?, &b(alg, k + 3)?)? - alg.int(1);
        alg.div(&(qp(alg, k - 1)? * inner), &bs(alg, &[k + 1, k + 2])?)
    })?;
    Ok((l, alg.div(&bs(alg, &[n + 1, n + 1])?, &bs(alg, &[n + 2, n + 3])?)?))
}

pub fn tel_c_a_at_q<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 0, n, |k| {
        let t = bs(alg, &[k + 1, k + 2, 2 * k + 3])? - qp(alg, k + 1)? * b(alg, 2 * k + 2)?;
        Ok(qp(alg, 2 * n - 2 * k)? * t)
    })?;
    Ok((l, alg.div(&bs(alg, &[n + 1, n + 1, n + 2, n + 4])?, &b(alg, 2)?)?))
}

pub fn tel_c_b_at_q<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 0, n, |k| {
        let inner = alg.div(&bs(alg, &[k + 1, 2, 3])?, &b(alg, k + 4)?)? - alg.int(1);
        alg.div(&(qp(alg, k - 1)? * inner), &bs(alg, &[k + 2, k + 3])?)
    })?;
    Ok((l, alg.div(&bs(alg, &[n + 1, n + 1])?, &bs(alg, &[n + 3, n + 4])?)?))
}

fn triangular<A: QAlg>(alg: &A, n: i64) -> Result<A::V, QExactError> {
    alg.div(&bs(alg, &[n, n + 1])?, &b(alg, 2)?)
}

pub fn even_q<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| Ok(qp(alg, k - 1)? * b(alg, k)?))?;
    Ok((l, triangular(alg, n)?))
}

pub fn warnaar_triangular<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| Ok(qp(alg, 2 * n - 2 * k)? * b(alg, k)?))?;
    Ok((l, triangular(alg, n)?))
}

pub fn warnaar_cubes<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| alg.div(&(qp(alg, 2 * n - 2 * k)? * bs(alg, &[k, k, 2 * k])?), &b(alg, 2)?))?;
    let t = triangular(alg, n)?;
    Ok((l, t.clone() * t))
}

pub fn even_b_at_1<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| alg.div(&(qp(alg, k - 1)? * b(alg, 2)?), &bs(alg, &[k + 1, k + 2])?))?;
    Ok((l, alg.div(&b(alg, n)?, &b(alg, n + 2)?)?))
}

pub fn even_a_at_q<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| Ok(qp(alg, 2 * n - 2 * k)? * bs(alg, &[k, k + 1, 2 * k + 1])?))?;
    Ok((l, alg.div(&bs(alg, &[n, n + 1, n + 1, n + 2])?, &b(alg, 2)?)?))
}

pub fn even_b_at_q<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| alg.div(&(qp(alg, k - 1)? * bs(alg, &[2, 2, k])?), &bs(alg, &[k + 1, k + 2, k + 3])?))?;
    Ok((l, alg.div(&bs(alg, &[n, n + 1])?, &bs(alg, &[n + 2, n + 3])?)?))
}

pub fn m3_a_at_0<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| Ok(qp(alg, 3 * n - 3 * k)? * bs(alg, &[k, k + 1])?))?;
    Ok((l, alg.div(&bs(alg, &[n, n + 1, n + 2])?, &b(alg, 3)?)?))
}

pub fn m3_a_at_1<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| Ok(qp(alg, 3 * n - 3 * k)? * bs(alg, &[k, k, k + 1, k + 1, 2 * k + 1])?))?;
    Ok((l, alg.div(&bs(alg, &[n, n, n + 1, n + 1, n + 2, n + 2])?, &b(alg, 3)?)?))
}

pub fn m3_a_at_q<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| Ok(qp(alg, 3 * n - 3 * k)? * bs(alg, &[k, k + 1, k + 1, k + 2, 2 * k + 2])?))?;
    Ok((l, alg.div(&bs(alg, &[n, n + 1, n + 1, n + 2, n + 2, n + 3])?, &b(alg, 3)?)?))
}

pub fn m3_q2_a_at_q<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| {
        Ok(qp(alg, 6 * n - 6 * k)? * bs(alg, &[2 * k, 2 * k + 1, 2 * k + 2, 2 * k + 3, 4 * k + 3])?)
    })?;
    let r = bs(alg, &[2 * n, 2 * n + 1, 2 * n + 2, 2 * n + 3, 2 * n + 4, 2 * n + 5])?;
    Ok((l, alg.div(&r, &b(alg, 6)?)?))
}

/// The right side ends at `[2n+4]`; the six factors are consecutive.
pub fn m3_q2_a_at_qinv<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| {
        Ok(qp(alg, 6 * n - 6 * k)? * bs(alg, &[2 * k - 1, 2 * k, 2 * k + 1, 2 * k + 2, 4 * k + 1])?)
    })?;
    let r = bs(alg, &[2 * n - 1, 2 * n, 2 * n + 1, 2 * n + 2, 2 * n + 3, 2 * n + 4])?;
    Ok((l, alg.div(&r, &b(alg, 6)?)?))
}

pub fn spc_4i<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let l = sum(alg, 1, n, |k| alg.div(&(qp(alg, n - k)? * b(alg, 2 * k)?), &b(alg, 2)?))?;
    Ok((l, triangular(alg, n)?))
}

pub fn spc_4ii<A: QAlg>(alg: &A, n: i64) -> Sides<A::V> {
    let two2 = bs(alg, &[2, 2])?;
    let l = sum(alg, 1, n, |k| alg.div(&(qp(alg, n * n - k * k + n - k)? * bs(alg, &[2 * k * k, 2 * k])?), &two2))?;
    let t = alg.div(&b(alg, n * (n + 1))?, &b(alg, 2)?)?;
    Ok((l, t.clone() * t))
}

/// The `a = 0` line summation in `(c, d, g, h)`.
///
/// With `cleared` both sides are multiplied by `[2cd] [ch+dg]` instead of
/// divided by it, which keeps the identity meaningful when that product vanishes.
pub fn spc_2<A: QAlg>(alg: &A, x: [C64; 4], n: i64, cleared: bool) -> Sides<A::V> {
    let [c, d, g, h] = x;
    let num = |z: C64| alg.q_num(z);
    let pw = |e: C64| alg.q_pow(e);
    let norm = num(c * d * 2.0)? * num(c * h + d * g)?;
    let scale = |v: A::V| if cleared { Ok(v) } else { alg.div(&v, &norm) };
    let mut l = alg.int(0);
    for k in 0..=n {
        let kk = re(k);
        let t = num((g * kk + c) * (h * kk + d) * 2.0)? * num(g * h * kk * 2.0 + c * h + d * g)?;
        let e = -(g * h * kk * kk + (c * h + d * g + g * h) * kk);
        l = l + scale(t * pw(e)?)?;
    }
    let nn = re(n);
    let head = num((g * nn + c) * (h * nn + h + d))?
        * num((g * nn + g + c) * (h * nn + d))?
        * pw(-(g * h * nn * nn + (c * h + d * g + g * h) * nn))?;
    let tail = num(c * (d - h))? * num((c - g) * d)? * pw(c * h + d * g)?;
    Ok((l, scale(head)? - scale(tail)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qexact::{ExactQ, LaurentPoly, NumericQ, ProductFrac};

    type Fn = fn(&ExactQ, i64) -> Sides<ProductFrac>;
    type NFn = fn(&NumericQ, i64) -> Sides<C64>;

    fn all() -> Vec<(&'static str, Fn, NFn)> {
        vec![
            ("geo", geo, geo),
            ("qodds", qodds, qodds),
            ("sp1", sp1, sp1),
            ("sp2", sp2, sp2),
            ("tca1", tel_c_a_at_1, tel_c_a_at_1),
            ("tcb1", tel_c_b_at_1, tel_c_b_at_1),
            ("tcaq", tel_c_a_at_q, tel_c_a_at_q),
            ("tcbq", tel_c_b_at_q, tel_c_b_at_q),
            ("evenq", even_q, even_q),
            ("wtri", warnaar_triangular, warnaar_triangular),
            ("wcubes", warnaar_cubes, warnaar_cubes),
            ("eb1", even_b_at_1, even_b_at_1),
            ("eaq", even_a_at_q, even_a_at_q),
            ("ebq", even_b_at_q, even_b_at_q),
            ("m30", m3_a_at_0, m3_a_at_0),
            ("m31", m3_a_at_1, m3_a_at_1),
            ("m3q", m3_a_at_q, m3_a_at_q),
            ("m3q2q", m3_q2_a_at_q, m3_q2_a_at_q),
            ("m3q2qi", m3_q2_a_at_qinv, m3_q2_a_at_qinv),
            ("4i", spc_4i, spc_4i),
            ("4ii", spc_4ii, spc_4ii),
        ]
    }

    #[test]
    fn exact_and_numeric_agree() {
        let alg = NumericQ::new(C64::new(0.4, 0.5), 1e-9);
        for (name, ex, nu) in all() {
            for n in 0..7 {
                let (l, r) = ex(&ExactQ, n).unwrap();
                assert!((l - r).is_zero(), "{name} n={n}");
                let (l, r) = nu(&alg, n).unwrap();
                assert!((l - r).norm() < 1e-10 * r.norm().max(1.0), "{name} n={n}: {l} vs {r}");
            }
        }
    }

    #[test]
    fn printed_last_factor_fails() {
        // Replacing [2n+4] by [2n+5] breaks the q^2-base a = q^{-1} case.
        let n = 2;
        let (l, _) = m3_q2_a_at_qinv(&ExactQ, n).unwrap();
        let wrong = bs(&ExactQ, &[3, 4, 5, 6, 7, 9]).unwrap().checked_div(&b(&ExactQ, 6).unwrap()).unwrap();
        assert!(!(l - wrong).is_zero());
    }

    #[test]
    fn small_polynomials() {
        let (l, r) = spc_4i(&ExactQ, 2).unwrap();
        let expect = LaurentPoly::from_terms([(0, 1), (1, 1), (2, 1)].map(|(e, c)| (e, crate::qexact::rat(c))));
        assert_eq!(l.to_rational_fn().to_poly(), Some(expect.clone()));
        assert_eq!(r.to_rational_fn().to_poly(), Some(expect));
    }

    #[test]
    fn spc_2_forms_agree() {
        let alg = NumericQ::new(C64::new(0.5, -0.3), 1e-9);
        let x = [C64::new(0.3, 0.2), C64::new(-0.4, 0.1), C64::new(0.6, 0.5), C64::new(0.2, -0.7)];
        for n in 0..6 {
            let (l, r) = spc_2(&alg, x, n, false).unwrap();
            assert!((l - r).norm() < 1e-10 * r.norm().max(1.0));
        }
        for c in 0..4 {
            for d in 0..4 {
                for g in 0..4 {
                    for h in 0..4 {
                        let x = [c, d, g, h].map(re);
                        let (l, r) = spc_2(&ExactQ, x, 3, true).unwrap();
                        assert!((l - r).is_zero(), "{c} {d} {g} {h}");
                    }
                }
            }
        }
    }
}
