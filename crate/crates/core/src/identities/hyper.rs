//! The `q = 1` limit of the line summation, over any field.

use num_traits::{Num, Zero};

/// Field operations needed here: embedding of integers and a checked division.
pub trait Field: Num + Clone {
    fn from_int(n: i64) -> Self;
    fn try_div(&self, other: &Self) -> Option<Self>;
}

impl Field for num_rational::BigRational {
    fn from_int(n: i64) -> Self {
        Self::from_integer(n.into())
    }

    fn try_div(&self, other: &Self) -> Option<Self> {
        (!other.is_zero()).then(|| self / other)
    }
}

impl Field for num_complex::Complex64 {
    fn from_int(n: i64) -> Self {
        Self::new(n as f64, 0.0)
    }

    fn try_div(&self, other: &Self) -> Option<Self> {
        let v = self.fdiv(*other);
        (v.re.is_finite() && v.im.is_finite() && !other.is_zero()).then_some(v)
    }
}

/// `sum_{k=0}^n (gk+c)(hk+d)(2ghk+ch+dg) / (cd(ch+dg))` and its closed form.
/// `None` when `cd(ch+dg)` vanishes.
pub fn line_sum<T: Field>(c: T, d: T, g: T, h: T, n: i64) -> Option<(T, T)> {
    let two = T::from_int(2);
    let w = c.clone() * h.clone() + d.clone() * g.clone();
    let norm = c.clone() * d.clone() * w.clone();
    let mut l = T::zero();
    for k in 0..=n {
        let k = T::from_int(k);
        l = l
            + (g.clone() * k.clone() + c.clone())
                * (h.clone() * k.clone() + d.clone())
                * (two.clone() * g.clone() * h.clone() * k + w.clone());
    }
    let l = l.try_div(&norm)?;
    let nn = T::from_int(n);
    let head = (g.clone() * nn.clone() + c.clone())
        * (h.clone() * nn.clone() + h.clone() + d.clone())
        * (g.clone() * nn.clone() + g.clone() + c.clone())
        * (h.clone() * nn + d.clone());
    let head = head.try_div(&(two.clone() * norm))?;
    let tail = ((d - h) * (c - g)).try_div(&(two * w))?;
    Some((l, head - tail))
}

/// Sum of cubes `0^3 + ... + n^3`, written as the line summation at
/// `c = d = 0`, `g = h = 1` with the normalizer cleared.
pub fn sum_cubes<T: Field>(n: i64) -> (T, T) {
    let mut l = T::zero();
    for k in 0..=n {
        let k = T::from_int(k);
        l = l + k.clone() * k.clone() * (T::from_int(2) * k) / T::from_int(2);
    }
    let nn = T::from_int(n);
    let r = nn.clone() * (nn.clone() + T::one()) * (nn.clone() + T::one()) * nn / T::from_int(4);
    (l, r)
}
