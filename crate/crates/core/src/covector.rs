//! Unipotent Witt covectors `(..., a_{-2}, a_{-1}, a_0)` with finite support.
//!
//! The covector group is the colimit of `W_1 -> W_2 -> ...` along `V`, so a
//! covector of support `s` is the image of the Witt vector
//! `(a_{-(s-1)}, ..., a_0)` in `W_s`.

use std::fmt;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Fq, Limits};
use crate::galois::WittRing;
use crate::witt::WittVector;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Covector {
    field: FieldSpec,
    /// `a_{-(s-1)}, ..., a_0`; the first entry is nonzero unless `s = 1`.
    comps: Vec<Fq>,
}

impl fmt::Debug for Covector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .comps
            .iter()
            .map(|c| format!("{:?}", self.field.coeffs(c)))
            .collect();
        write!(f, "(..., {})", parts.join(", "))
    }
}

#[derive(Clone, Debug)]
pub enum CovectorOp<'a> {
    Add(&'a Covector),
    F,
    V,
    Scalar(Fq),
}

impl Covector {
    pub fn new(field: FieldSpec, comps: Vec<Fq>) -> Self {
        let mut c = Covector { field, comps };
        c.normalize();
        c
    }

    pub fn zero(field: FieldSpec) -> Self {
        Covector {
            field,
            comps: vec![field.zero()],
        }
    }

    fn normalize(&mut self) {
        let first = self
            .comps
            .iter()
            .position(|c| !self.field.is_zero(c))
            .unwrap_or(self.comps.len());
        self.comps.drain(..first);
        if self.comps.is_empty() {
            self.comps.push(self.field.zero());
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn support(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Fq] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.len() == 1 && self.field.is_zero(&self.comps[0])
    }

    /// The component `a_{-j}`.
    pub fn get(&self, j: usize) -> Fq {
        let s = self.comps.len();
        if j < s {
            self.comps[s - 1 - j]
        } else {
            self.field.zero()
        }
    }

    /// Image in `W_len` under the colimit embedding; needs `len >= support`.
    pub fn to_witt(&self, len: usize) -> Result<WittVector> {
        if len < self.support() {
            return Err(Error::BadTarget {
                len: self.support(),
                target: len,
            });
        }
        let mut comps = vec![self.field.zero(); len - self.support()];
        comps.extend_from_slice(&self.comps);
        WittVector::with_limits(self.field, comps, &Limits::relaxed())
    }

    pub fn from_witt(w: &WittVector) -> Self {
        Covector::new(w.field(), w.components().to_vec())
    }

    pub fn add(&self, other: &Covector) -> Result<Covector> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        // V is additive, so any common level of the colimit works.
        let n = self.support().max(other.support());
        let r = WittRing::get(self.field, n as u32)?;
        let a = self.to_witt(n)?.to_ring(&r);
        let b = other.to_witt(n)?.to_ring(&r);
        Ok(Covector::new(self.field, r.to_components(&r.add(&a, &b))))
    }

    pub fn neg(&self) -> Result<Covector> {
        let n = self.support();
        let r = WittRing::get(self.field, n as u32)?;
        let a = self.to_witt(n)?.to_ring(&r);
        Ok(Covector::new(self.field, r.to_components(&r.neg(&a))))
    }

    pub fn frobenius(&self) -> Covector {
        let k = self.field;
        Covector::new(k, self.comps.iter().map(|c| k.frob(c, 1)).collect())
    }

    pub fn verschiebung(&self) -> Covector {
        let mut comps = self.comps.clone();
        comps.pop();
        Covector::new(self.field, comps)
    }

    /// `x . (..., a_{-1}, a_0) = (..., sigma^{-1}(x) a_{-1}, x a_0)`.
    pub fn scalar(&self, x: &Fq) -> Covector {
        let k = self.field;
        let s = self.comps.len();
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(idx, a)| {
                let j = (s - 1 - idx) as i64;
                k.mul(&k.frob(x, -j), a)
            })
            .collect();
        Covector::new(k, comps)
    }
}

pub fn covector_ops(a: &Covector, op: CovectorOp<'_>) -> Result<Covector> {
    match op {
        CovectorOp::Add(b) => a.add(b),
        CovectorOp::F => Ok(a.frobenius()),
        CovectorOp::V => Ok(a.verschiebung()),
        CovectorOp::Scalar(x) => Ok(a.scalar(&x)),
    }
}
