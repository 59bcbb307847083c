//! Closed forms of the `p = 0` numbers and weights, computed directly in
//! value space. These are independent of the theta-based evaluation and
//! serve both as the registered specialized identities and as an oracle
//! for it.

use num_complex::Complex64 as C64;

use crate::elliptic::{EllipticError, NumberSystem, Specialization};

#[derive(Debug, Clone, Copy)]
pub struct ClosedSystem {
    pub spec: Specialization,
    pub a: C64,
    pub b: C64,
    pub log_q: C64,
    pub pole_tol: f64,
}

impl ClosedSystem {
    /// `spec` must be one of the `p = 0` specializations.
    pub fn new(spec: Specialization, a: C64, b: C64, q: C64, pole_tol: f64) -> Self {
        debug_assert!(spec != Specialization::FullElliptic);
        Self { spec, a, b, log_q: q.ln(), pole_tol }
    }

    fn pow(&self, e: C64) -> C64 {
        (e * self.log_q).exp()
    }

    fn quotient(&self, num: &[C64], den: &[C64], factor: C64) -> Result<C64, EllipticError> {
        let one = C64::new(1.0, 0.0);
        let mut v = factor;
        for (factor, x) in den.iter().enumerate() {
            let d = one - x;
            let magnitude = d.norm();
            if !(magnitude >= self.pole_tol) {
                return Err(EllipticError::PoleProximity { factor, log_argument: x.ln(), magnitude });
            }
            v = v.fdiv(d);
        }
        for x in num {
            v *= one - x;
        }
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(EllipticError::NonFinite)
        }
    }
}

impl NumberSystem for ClosedSystem {
    fn number(&self, z: C64, shift: C64) -> Result<C64, EllipticError> {
        let q = self.log_q.exp();
        let qz = self.pow(z);
        let a = self.a * self.pow(shift * 2.0);
        let b = self.b * self.pow(shift);
        let one = C64::new(1.0, 0.0);
        match self.spec {
            Specialization::Abq => {
                self.quotient(&[qz, a * qz, b * q * q, a.fdiv(b)], &[q, a * q, b * qz * q, (a * qz).fdiv(q * b)], one)
            }
            Specialization::Aq => self.quotient(&[qz, a * qz], &[q, a * q], q.fdiv(qz)),
            Specialization::Bq => self.quotient(&[qz, b * q * q], &[q, b * qz * q], one),
            Specialization::Q | Specialization::FullElliptic => self.quotient(&[qz], &[q], one),
        }
    }

    fn weight(&self, k: C64, shift: C64) -> Result<C64, EllipticError> {
        let q = self.log_q.exp();
        let qk = self.pow(k);
        let a = self.a * self.pow(shift * 2.0);
        let b = self.b * self.pow(shift);
        match self.spec {
            Specialization::Abq => self.quotient(
                &[a * qk * qk * q, b * q, b * q * q, a.fdiv(q * b), a.fdiv(b)],
                &[a * q, b * qk * q, b * qk * q * q, (a * qk).fdiv(q * b), (a * qk).fdiv(b)],
                qk,
            ),
            Specialization::Aq => self.quotient(&[a * qk * qk * q], &[a * q], qk.finv()),
            Specialization::Bq => self.quotient(&[b * q, b * q * q], &[b * qk * q, b * qk * q * q], qk),
            Specialization::Q | Specialization::FullElliptic => Ok(qk),
        }
    }
}
