//! Exact arithmetic in `Q(q)`.
//!
//! [`LaurentPoly`] is a sparse Laurent polynomial with rational
//! coefficients and [`RationalFn`] an unreduced quotient of two of them,
//! compared by cross-multiplication.
//!
//! Sums of q-number quotients produce denominators that are products of
//! binomials `1 - q^m`. [`ProductFrac`] keeps those binomials factored,
//! cancels them by key and brings sums to a least common denominator. The
//! exact identity checks use it and convert to [`RationalFn`] at the end.
//!
//! The [`QAlg`] trait lets a q-series identity be written once and
//! evaluated either exactly ([`ExactQ`]) or at a numeric base ([`NumericQ`]).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QExactError {
    #[error("q-binomial index out of range: n = {n}, k = {k}")]
    OutOfRange { n: i64, k: i64 },
    #[error("exponent {0} is not an integer")]
    NonIntegerExponent(C64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("divisor magnitude {0:e} is within pole tolerance")]
    PoleProximity(f64),
    #[error("non-finite value")]
    NonFinite,
    #[error("zero denominator")]
    ZeroDenominator,
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn add_exp(a: i64, b: i64) -> i64 {
    a.checked_add(b).expect("Laurent exponent overflow")
}

/// Sparse Laurent polynomial in `q` over the rationals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LaurentPoly {
    coeffs: BTreeMap<i64, BigRational>,
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})q^{e}")?;
        }
        Ok(())
    }
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(rat(1), 0)
    }

    pub fn from_int(c: i64) -> Self {
        Self::monomial(rat(c), 0)
    }

    pub fn monomial(c: BigRational, e: i64) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(e, c);
        }
        Self { coeffs }
    }

    /// `q^e`.
    pub fn q_pow(e: i64) -> Self {
        Self::monomial(rat(1), e)
    }

    /// `1 - q^m`.
    pub fn binomial(m: i64) -> Self {
        Self::one() - Self::q_pow(m)
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I: IntoIterator<Item = (i64, BigRational)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (e, c) in terms {
            out.add_term(e, c);
        }
        out
    }

    fn add_term(&mut self, e: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(e).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, e: i64) -> BigRational {
        self.coeffs.get(&e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.coeffs.iter().map(|(e, c)| (*e, c))
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// `Some((c, e))` when the polynomial is the single term `c q^e`.
    pub fn as_monomial(&self) -> Option<(&BigRational, i64)> {
        if self.coeffs.len() == 1 {
            self.coeffs.iter().next().map(|(e, c)| (c, *e))
        } else {
            None
        }
    }

    pub fn scale(&self, c: &BigRational, shift: i64) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self { coeffs: self.coeffs.iter().map(|(e, v)| (add_exp(*e, shift), v * c)).collect() }
    }

    /// Value at `q = 1`.
    pub fn eval_at_one(&self) -> BigRational {
        self.coeffs.values().fold(BigRational::zero(), |acc, c| acc + c)
    }

    pub fn eval(&self, q: C64) -> C64 {
        let lq = q.ln();
        self.coeffs.iter().map(|(e, c)| (lq * (*e as f64)).exp() * c.to_f64().unwrap_or(f64::NAN)).sum()
    }

    /// `self / (1 - q^m)` if the division is exact.
    pub fn div_binomial(&self, m: i64) -> Option<Self> {
        assert!(m > 0, "div_binomial needs m > 0");
        let (lo, hi) = match (self.min_exp(), self.max_exp()) {
            (Some(l), Some(h)) => (l, h),
            _ => return Some(Self::zero()),
        };
        // g_e = f_e + g_{e-m}; the quotient stops at hi - m.
        let mut out: BTreeMap<i64, BigRational> = BTreeMap::new();
        let mut e = lo;
        while e <= hi - m {
            let mut g = self.coeff(e);
            if let Some(prev) = out.get(&(e - m)) {
                g += prev;
            }
            if !g.is_zero() {
                out.insert(e, g);
            }
            e += 1;
        }
        let q = Self { coeffs: out };
        (&q * &Self::binomial(m) == *self).then_some(q)
    }

    /// Exact division by an arbitrary nonzero polynomial, if it divides.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (d_lo, d_hi) = (d.min_exp()?, d.max_exp()?);
        if self.is_zero() {
            return Some(Self::zero());
        }
        let lead = d.coeff(d_lo);
        let max_shift = self.max_exp()? - d_hi;
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some(e) = rem.min_exp() {
            let shift = e - d_lo;
            if shift > max_shift {
                return None;
            }
            let c = rem.coeff(e) / &lead;
            rem = &rem - &d.scale(&c, shift);
            quot.add_term(shift, c);
        }
        Some(quot)
    }

    fn all_integer(&self) -> bool {
        self.coeffs.values().all(|c| c.is_integer())
    }

    fn mul_ref(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        if self.all_integer() && other.all_integer() {
            // integer fast path; rational additions normalize on every step
            let mut acc: HashMap<i64, BigInt> = HashMap::with_capacity(self.len() * other.len());
            for (ea, ca) in &self.coeffs {
                let ca = ca.numer();
                for (eb, cb) in &other.coeffs {
                    *acc.entry(add_exp(*ea, *eb)).or_insert_with(BigInt::zero) += ca * cb.numer();
                }
            }
            let coeffs =
                acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|(e, c)| (e, BigRational::from_integer(c))).collect();
            return Self { coeffs };
        }
        let mut out = Self::zero();
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                out.add_term(add_exp(*ea, *eb), ca * cb);
            }
        }
        out
    }

    fn add_ref(&self, other: &Self, sign: i64) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            out.add_term(*e, if sign < 0 { -c.clone() } else { c.clone() });
        }
        out
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.add_ref(rhs, 1)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.add_ref(rhs, -1)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.mul_ref(rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { coeffs: self.coeffs.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: LaurentPoly) -> LaurentPoly {
        &self + &rhs
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

/// `num / den` with `den != 0`, kept unreduced.
#[derive(Clone, Debug)]
pub struct RationalFn {
    num: LaurentPoly,
    den: LaurentPoly,
}

impl RationalFn {
    pub fn new(num: LaurentPoly, den: LaurentPoly) -> Result<Self, QExactError> {
        if den.is_zero() {
            return Err(QExactError::ZeroDenominator);
        }
        Ok(Self { num, den })
    }

    pub fn from_poly(p: LaurentPoly) -> Self {
        Self { num: p, den: LaurentPoly::one() }
    }

    pub fn num(&self) -> &LaurentPoly {
        &self.num
    }

    pub fn den(&self) -> &LaurentPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `self.num * other.den == other.num * self.den`.
    pub fn cross_eq(&self, other: &Self) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }

    /// The polynomial this function equals, if the denominator divides exactly.
    pub fn to_poly(&self) -> Option<LaurentPoly> {
        self.num.div_exact(&self.den)
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, QExactError> {
        if other.num.is_zero() {
            return Err(QExactError::DivisionByZero);
        }
        Ok(Self { num: &self.num * &other.den, den: &self.den * &other.num })
    }

    pub fn eval(&self, q: C64) -> C64 {
        self.num.eval(q).fdiv(self.den.eval(q))
    }
}

impl PartialEq for RationalFn {
    fn eq(&self, other: &Self) -> bool {
        self.cross_eq(other)
    }
}

impl Add for &RationalFn {
    type Output = RationalFn;
    fn add(self, rhs: &RationalFn) -> RationalFn {
        if self.den == rhs.den {
            return RationalFn { num: &self.num + &rhs.num, den: self.den.clone() };
        }
        RationalFn { num: &(&self.num * &rhs.den) + &(&rhs.num * &self.den), den: &self.den * &rhs.den }
    }
}

impl Sub for &RationalFn {
    type Output = RationalFn;
    fn sub(self, rhs: &RationalFn) -> RationalFn {
        let neg = RationalFn { num: -&rhs.num, den: rhs.den.clone() };
        self + &neg
    }
}

impl Mul for &RationalFn {
    type Output = RationalFn;
    fn mul(self, rhs: &RationalFn) -> RationalFn {
        RationalFn { num: &self.num * &rhs.num, den: &self.den * &rhs.den }
    }
}

/// `[n]_q = (1 - q^n) / (1 - q)`, stored in that sparse form.
pub fn q_number(n: i64) -> RationalFn {
    RationalFn { num: LaurentPoly::binomial(n), den: LaurentPoly::binomial(1) }
}

/// Gaussian binomial `[n choose k]_q` as a ratio of q-factorials.
pub fn q_binomial(n: i64, k: i64) -> Result<RationalFn, QExactError> {
    if k < 0 || k > n {
        return Err(QExactError::OutOfRange { n, k });
    }
    let mut num = LaurentPoly::one();
    let mut den = LaurentPoly::one();
    for i in 0..k {
        num = &num * &LaurentPoly::binomial(n - i);
        den = &den * &LaurentPoly::binomial(i + 1);
    }
    Ok(RationalFn { num, den })
}

type Factors = BTreeMap<i64, u32>;

fn expand(f: &Factors) -> LaurentPoly {
    f.iter().fold(LaurentPoly::one(), |acc, (m, e)| (0..*e).fold(acc, |acc, _| &acc * &LaurentPoly::binomial(*m)))
}

fn merge(a: &mut Factors, b: &Factors) {
    for (m, e) in b {
        *a.entry(*m).or_insert(0) += e;
    }
}

/// `coef * prod (1 - q^m)^{e_m} / (den_coef * prod (1 - q^m)^{f_m})`, all `m >= 1`.
#[derive(Clone, Debug)]
pub struct ProductFrac {
    coef: LaurentPoly,
    num: Factors,
    den_coef: LaurentPoly,
    den: Factors,
}

impl ProductFrac {
    pub fn from_poly(p: LaurentPoly) -> Self {
        Self { coef: p, num: Factors::new(), den_coef: LaurentPoly::one(), den: Factors::new() }
    }

    pub fn from_int(c: i64) -> Self {
        Self::from_poly(LaurentPoly::from_int(c))
    }

    pub fn q_pow(e: i64) -> Self {
        Self::from_poly(LaurentPoly::q_pow(e))
    }

    /// `[n]_q`, with `1 - q^n = -q^n (1 - q^{-n})` for negative `n`.
    pub fn q_number(n: i64) -> Self {
        if n == 0 {
            return Self::from_int(0);
        }
        let (coef, m) = if n > 0 { (LaurentPoly::one(), n) } else { (LaurentPoly::monomial(rat(-1), n), -n) };
        let mut out = Self::from_poly(coef);
        if m != 1 {
            out.num.insert(m, 1);
            out.den.insert(1, 1);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero()
    }

    fn normalized(mut self) -> Self {
        if self.coef.is_zero() {
            return Self::from_int(0);
        }
        let keys: Vec<i64> = self.num.keys().copied().collect();
        for m in keys {
            if let Some(d) = self.den.get_mut(&m) {
                let n = self.num.get_mut(&m).unwrap();
                let c = (*n).min(*d);
                *n -= c;
                *d -= c;
            }
        }
        self.num.retain(|_, e| *e > 0);
        self.den.retain(|_, e| *e > 0);
        // absorb a monomial denominator coefficient into the numerator
        if let Some((c, e)) = self.den_coef.as_monomial() {
            if !(c.is_one() && e == 0) {
                let inv = c.recip();
                self.coef = self.coef.scale(&inv, -e);
                self.den_coef = LaurentPoly::one();
            }
        }
        self
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, QExactError> {
        if other.is_zero() {
            return Err(QExactError::DivisionByZero);
        }
        let mut num = self.num.clone();
        merge(&mut num, &other.den);
        let mut den = self.den.clone();
        merge(&mut den, &other.num);
        Ok(Self { coef: &self.coef * &other.den_coef, num, den_coef: &self.den_coef * &other.coef, den }.normalized())
    }

    fn add_signed(&self, other: &Self, sign: i64) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if sign < 0 { -other.clone() } else { other.clone() };
        }
        // least common multiple of the binomial denominators
        let mut lcm = self.den.clone();
        for (m, e) in &other.den {
            let slot = lcm.entry(*m).or_insert(0);
            *slot = (*slot).max(*e);
        }
        // numerator factors of each side over the common denominator
        let lift = |x: &Self| {
            let mut f = x.num.clone();
            for (m, e) in &lcm {
                let have = x.den.get(m).copied().unwrap_or(0);
                if *e > have {
                    *f.entry(*m).or_insert(0) += e - have;
                }
            }
            f
        };
        let (fa, fb) = (lift(self), lift(other));
        let mut common = Factors::new();
        for (m, e) in &fa {
            let c = (*e).min(fb.get(m).copied().unwrap_or(0));
            if c > 0 {
                common.insert(*m, c);
            }
        }
        let rest = |f: &Factors| {
            let mut r = f.clone();
            for (m, c) in &common {
                *r.get_mut(m).unwrap() -= c;
            }
            r.retain(|_, e| *e > 0);
            expand(&r)
        };
        let (mut pa, mut pb) = (&self.coef * &rest(&fa), &other.coef * &rest(&fb));
        let den_coef = if self.den_coef == other.den_coef {
            self.den_coef.clone()
        } else {
            pa = &pa * &other.den_coef;
            pb = &pb * &self.den_coef;
            &self.den_coef * &other.den_coef
        };
        let coef = if sign < 0 { &pa - &pb } else { &pa + &pb };
        Self { coef, num: common, den_coef, den: lcm }.normalized()
    }

    /// Cancels remaining denominator binomials that divide the coefficient polynomial.
    pub fn reduced(&self) -> Self {
        let mut out = self.clone();
        let keys: Vec<i64> = out.den.keys().copied().collect();
        for m in keys {
            while out.den.get(&m).copied().unwrap_or(0) > 0 {
                match out.coef.div_binomial(m) {
                    Some(q) => {
                        out.coef = q;
                        *out.den.get_mut(&m).unwrap() -= 1;
                    }
                    None => break,
                }
            }
        }
        out.den.retain(|_, e| *e > 0);
        out
    }

    pub fn to_rational_fn(&self) -> RationalFn {
        RationalFn { num: &self.coef * &expand(&self.num), den: &self.den_coef * &expand(&self.den) }
    }

    pub fn eval(&self, q: C64) -> C64 {
        self.to_rational_fn().eval(q)
    }
}

impl Add for ProductFrac {
    type Output = ProductFrac;
    fn add(self, rhs: ProductFrac) -> ProductFrac {
        self.add_signed(&rhs, 1)
    }
}

impl Sub for ProductFrac {
    type Output = ProductFrac;
    fn sub(self, rhs: ProductFrac) -> ProductFrac {
        self.add_signed(&rhs, -1)
    }
}

impl Mul for ProductFrac {
    type Output = ProductFrac;
    fn mul(self, rhs: ProductFrac) -> ProductFrac {
        let mut num = self.num;
        merge(&mut num, &rhs.num);
        let mut den = self.den;
        merge(&mut den, &rhs.den);
        ProductFrac { coef: &self.coef * &rhs.coef, num, den_coef: &self.den_coef * &rhs.den_coef, den }.normalized()
    }
}

impl Neg for ProductFrac {
    type Output = ProductFrac;
    fn neg(mut self) -> ProductFrac {
        self.coef = -self.coef;
        self
    }
}

/// Arithmetic for q-series identities written once for both evaluation modes.
///
/// `+`, `-` and `*` come from the value type; division goes through
/// [`QAlg::div`] so that each mode can apply its own zero test.
pub trait QAlg: Sync {
    type V: Clone + Send + Add<Output = Self::V> + Sub<Output = Self::V> + Mul<Output = Self::V>;

    fn int(&self, c: i64) -> Self::V;
    /// `q^e`.
    fn q_pow(&self, e: C64) -> Result<Self::V, QExactError>;
    /// `[z]_q`.
    fn q_num(&self, z: C64) -> Result<Self::V, QExactError>;
    fn div(&self, a: &Self::V, b: &Self::V) -> Result<Self::V, QExactError>;
}

/// Exact evaluation; every exponent must be an integer.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactQ;

/// `e` as an integer, if it is one.
pub fn exact_exponent(e: C64) -> Result<i64, QExactError> {
    if e.im == 0.0 && e.re.fract() == 0.0 && e.re.abs() < 9.0e15 {
        Ok(e.re as i64)
    } else {
        Err(QExactError::NonIntegerExponent(e))
    }
}

impl QAlg for ExactQ {
    type V = ProductFrac;

    fn int(&self, c: i64) -> ProductFrac {
        ProductFrac::from_int(c)
    }

    fn q_pow(&self, e: C64) -> Result<ProductFrac, QExactError> {
        Ok(ProductFrac::q_pow(exact_exponent(e)?))
    }

    fn q_num(&self, z: C64) -> Result<ProductFrac, QExactError> {
        Ok(ProductFrac::q_number(exact_exponent(z)?))
    }

    fn div(&self, a: &ProductFrac, b: &ProductFrac) -> Result<ProductFrac, QExactError> {
        a.checked_div(b)
    }
}

/// Evaluation at a numeric base with `q^z = exp(z Log q)`.
#[derive(Debug, Clone, Copy)]
pub struct NumericQ {
    pub log_q: C64,
    pub pole_tol: f64,
}

impl NumericQ {
    pub fn new(q: C64, pole_tol: f64) -> Self {
        Self { log_q: q.ln(), pole_tol }
    }
}

impl QAlg for NumericQ {
    type V = C64;

    fn int(&self, c: i64) -> C64 {
        C64::new(c as f64, 0.0)
    }

    fn q_pow(&self, e: C64) -> Result<C64, QExactError> {
        let v = (e * self.log_q).exp();
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(QExactError::NonFinite)
        }
    }

    fn q_num(&self, z: C64) -> Result<C64, QExactError> {
        let one = C64::new(1.0, 0.0);
        let d = one - self.log_q.exp();
        if d.norm() < self.pole_tol {
            return Err(QExactError::PoleProximity(d.norm()));
        }
        Ok((one - self.q_pow(z)?).fdiv(d))
    }

    fn div(&self, a: &C64, b: &C64) -> Result<C64, QExactError> {
        let m = b.norm();
        if !(m >= self.pole_tol) {
            return Err(QExactError::PoleProximity(m));
        }
        Ok(a.fdiv(*b))
    }
}

/// Exact evaluation of a registered identity: `(LHS, RHS)` as rational functions.
pub fn eval_exact(
    id: &str,
    n: i64,
    int_params: &BTreeMap<String, i64>,
) -> Result<(RationalFn, RationalFn), crate::identities::EvalError> {
    let (l, r) = crate::identities::exact_sides(id, n, int_params)?;
    Ok((l.to_rational_fn(), r.to_rational_fn()))
}
