//! Truncated p-typical Witt vectors over `F_q`.
//!
//! Values carry their Witt components. Arithmetic runs through the
//! Galois-ring model in [`crate::galois`]; the integer structure polynomials
//! from [`witt_poly`] give an independent evaluation path.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Fq, Limits};
use crate::galois::{WittRing, W};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WittVector {
    field: FieldSpec,
    comps: Vec<Fq>,
}

impl fmt::Debug for WittVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .comps
            .iter()
            .map(|c| format!("{:?}", self.field.coeffs(c)))
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StructureMap {
    F,
    V,
    R,
}

impl WittVector {
    pub fn new(field: FieldSpec, comps: Vec<Fq>) -> Result<Self> {
        Self::with_limits(field, comps, &Limits::default())
    }

    pub fn with_limits(field: FieldSpec, comps: Vec<Fq>, limits: &Limits) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::BadParameter("Witt vector of length 0".into()));
        }
        if comps.len() > limits.max_m {
            return Err(Error::Envelope(format!(
                "Witt length {} exceeds {}",
                comps.len(),
                limits.max_m
            )));
        }
        Ok(WittVector { field, comps })
    }

    pub fn zero(field: FieldSpec, m: usize) -> Self {
        WittVector {
            field,
            comps: vec![field.zero(); m],
        }
    }

    pub fn one(field: FieldSpec, m: usize) -> Self {
        teichmuller(field, &field.one(), m)
    }

    /// Image of an integer in `W_m(k)`.
    pub fn from_int(field: FieldSpec, m: usize, a: i64) -> Result<Self> {
        let r = WittRing::get(field, m as u32)?;
        Ok(Self::from_ring(&r, &r.from_int(a)))
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn components(&self) -> &[Fq] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| self.field.is_zero(c))
    }

    pub fn ring(&self) -> Result<Arc<WittRing>> {
        WittRing::get(self.field, self.len() as u32)
    }

    pub fn to_ring(&self, ring: &WittRing) -> W {
        ring.from_components(&self.comps)
    }

    pub fn from_ring(ring: &WittRing, a: &W) -> Self {
        WittVector {
            field: ring.field(),
            comps: ring.to_components(a),
        }
    }

    fn check_pair(&self, other: &Self) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch);
        }
        if self.len() != other.len() {
            return Err(Error::LengthMismatch(self.len(), other.len()));
        }
        Ok(())
    }

    fn binop(&self, other: &Self, op: impl Fn(&WittRing, &W, &W) -> W) -> Result<Self> {
        self.check_pair(other)?;
        let r = self.ring()?;
        let c = op(&r, &self.to_ring(&r), &other.to_ring(&r));
        Ok(Self::from_ring(&r, &c))
    }
}

pub fn witt_add(u: &WittVector, v: &WittVector) -> Result<WittVector> {
    u.binop(v, |r, a, b| r.add(a, b))
}

pub fn witt_sub(u: &WittVector, v: &WittVector) -> Result<WittVector> {
    u.binop(v, |r, a, b| r.sub(a, b))
}

pub fn witt_mul(u: &WittVector, v: &WittVector) -> Result<WittVector> {
    u.binop(v, |r, a, b| r.mul(a, b))
}

pub fn witt_neg(u: &WittVector) -> Result<WittVector> {
    let r = u.ring()?;
    Ok(WittVector::from_ring(&r, &r.neg(&u.to_ring(&r))))
}

pub fn teichmuller(field: FieldSpec, x: &Fq, m: usize) -> WittVector {
    let mut comps = vec![field.zero(); m.max(1)];
    comps[0] = *x;
    WittVector { field, comps }
}

/// Frobenius, Verschiebung or restriction.
pub fn witt_structure(
    u: &WittVector,
    map: StructureMap,
    target: Option<usize>,
) -> Result<WittVector> {
    let m = u.len();
    let k = u.field;
    match map {
        StructureMap::F => {
            if let Some(t) = target {
                if t != m {
                    return Err(Error::BadTarget { len: m, target: t });
                }
            }
            Ok(WittVector {
                field: k,
                comps: u.comps.iter().map(|c| k.frob(c, 1)).collect(),
            })
        }
        StructureMap::V => {
            let t = target.unwrap_or(m + 1);
            if t != m + 1 {
                return Err(Error::BadTarget { len: m, target: t });
            }
            let mut comps = Vec::with_capacity(t);
            comps.push(k.zero());
            comps.extend_from_slice(&u.comps);
            Ok(WittVector { field: k, comps })
        }
        StructureMap::R => {
            let t = target.unwrap_or(m.saturating_sub(1));
            if t == 0 || t > m {
                return Err(Error::BadTarget { len: m, target: t });
            }
            Ok(WittVector {
                field: k,
                comps: u.comps[..t].to_vec(),
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolyKind {
    Sum,
    Product,
}

/// Bound on the size of the integer polynomials met during the ghost
/// recursion.
#[derive(Clone, Copy, Debug)]
pub struct PolyBudget {
    pub max_terms: usize,
    pub max_coeff_bits: u64,
}

impl Default for PolyBudget {
    fn default() -> Self {
        PolyBudget {
            max_terms: 200_000,
            max_coeff_bits: 1 << 14,
        }
    }
}

/// Exponent vector over `X_0..X_i, Y_0..Y_i`.
type Mono = Vec<u32>;
type IntPoly = HashMap<Mono, BigInt>;

/// A Witt structure polynomial reduced mod p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittPoly {
    pub p: u32,
    pub index: usize,
    pub kind: PolyKind,
    /// Monomial exponents `(X_0..X_i, Y_0..Y_i)` with coefficient in `[1, p)`.
    pub terms: BTreeMap<Mono, u32>,
}

impl WittPoly {
    pub fn num_vars(&self) -> usize {
        2 * (self.index + 1)
    }

    /// Value at `X = xs`, `Y = ys` in `F_q`.
    pub fn eval(&self, k: &FieldSpec, xs: &[Fq], ys: &[Fq]) -> Fq {
        let nv = self.index + 1;
        let mut acc = k.zero();
        for (mono, &c) in &self.terms {
            let mut t = k.from_int(c as i64);
            for (v, &e) in mono.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = if v < nv { &xs[v] } else { &ys[v - nv] };
                t = k.mul(&t, &k.pow(base, e as u128));
            }
            acc = k.add(&acc, &t);
        }
        acc
    }
}

impl fmt::Display for WittPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nv = self.index + 1;
        let mut terms = Vec::new();
        // ascending total degree, ties in reverse lexicographic order
        let mut keys: Vec<&Mono> = self.terms.keys().collect();
        keys.sort_by(|a, b| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            da.cmp(&db).then(b.cmp(a))
        });
        for mono in keys {
            let c = self.terms[mono];
            let mut factors = Vec::new();
            if c != 1 {
                factors.push(c.to_string());
            }
            for (v, &e) in mono.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = if v < nv {
                    format!("X{}", v)
                } else {
                    format!("Y{}", v - nv)
                };
                if e == 1 {
                    factors.push(name);
                } else {
                    factors.push(format!("{name}^{e}"));
                }
            }
            if factors.is_empty() {
                factors.push("1".into());
            }
            terms.push(factors.join("*"));
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

type PolyMemo = RwLock<HashMap<(u32, usize, PolyKind), Arc<IntPoly>>>;

fn poly_memo() -> &'static PolyMemo {
    static MEMO: OnceLock<PolyMemo> = OnceLock::new();
    MEMO.get_or_init(Default::default)
}

fn check_budget(poly: &IntPoly, budget: &PolyBudget) -> Result<()> {
    if poly.len() > budget.max_terms {
        return Err(Error::OverflowGuard(format!("{} terms", poly.len())));
    }
    for c in poly.values() {
        if c.bits() > budget.max_coeff_bits {
            return Err(Error::OverflowGuard(format!(
                "{}-bit coefficient",
                c.bits()
            )));
        }
    }
    Ok(())
}

fn poly_add_into(acc: &mut IntPoly, other: &IntPoly, scale: &BigInt) {
    for (mono, c) in other {
        let e = acc.entry(mono.clone()).or_default();
        *e += c * scale;
    }
    acc.retain(|_, c| c.sign() != num_bigint::Sign::NoSign);
}

fn poly_mul(a: &IntPoly, b: &IntPoly, budget: &PolyBudget) -> Result<IntPoly> {
    let mut out = IntPoly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let mono: Mono = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            *out.entry(mono).or_default() += ca * cb;
        }
        if out.len() > budget.max_terms {
            return Err(Error::OverflowGuard(format!("{} terms", out.len())));
        }
    }
    out.retain(|_, c| c.sign() != num_bigint::Sign::NoSign);
    Ok(out)
}

fn poly_pow(a: &IntPoly, mut e: u64, nvars: usize, budget: &PolyBudget) -> Result<IntPoly> {
    let mut result: IntPoly = [(vec![0; nvars], BigInt::from(1))].into_iter().collect();
    let mut base = a.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mul(&result, &base, budget)?;
            check_budget(&result, budget)?;
        }
        e >>= 1;
        if e > 0 {
            base = poly_mul(&base, &base, budget)?;
            check_budget(&base, budget)?;
        }
    }
    Ok(result)
}

/// Re-embeds a polynomial in variables of index `< i_from + 1` into the
/// layout for index `i_to`.
fn widen(poly: &IntPoly, i_from: usize, i_to: usize) -> IntPoly {
    let (nf, nt) = (i_from + 1, i_to + 1);
    poly.iter()
        .map(|(mono, c)| {
            let mut m = vec![0; 2 * nt];
            m[..nf].copy_from_slice(&mono[..nf]);
            m[nt..nt + nf].copy_from_slice(&mono[nf..]);
            (m, c.clone())
        })
        .collect()
}

/// Ghost component `w_i` in `X` (`offset = 0`) or `Y` (`offset = i + 1`).
fn ghost(p: u32, i: usize, offset: usize) -> IntPoly {
    let nvars = 2 * (i + 1);
    let mut out = IntPoly::new();
    for j in 0..=i {
        let mut mono = vec![0u32; nvars];
        mono[offset + j] = p.pow((i - j) as u32);
        out.insert(mono, BigInt::from(p).pow(j as u32));
    }
    out
}

fn integer_poly(p: u32, i: usize, kind: PolyKind, budget: &PolyBudget) -> Result<Arc<IntPoly>> {
    if let Some(hit) = poly_memo()
        .read()
        .expect("memo poisoned")
        .get(&(p, i, kind))
    {
        return Ok(hit.clone());
    }
    let nvars = 2 * (i + 1);
    let gx = ghost(p, i, 0);
    let gy = ghost(p, i, i + 1);
    let one = BigInt::from(1);
    let mut acc = match kind {
        PolyKind::Sum => {
            let mut s = gx;
            poly_add_into(&mut s, &gy, &one);
            s
        }
        PolyKind::Product => poly_mul(&gx, &gy, budget)?,
    };
    for j in 0..i {
        let prev = integer_poly(p, j, kind, budget)?;
        let prev = widen(&prev, j, i);
        let powered = poly_pow(&prev, (p as u64).pow((i - j) as u32), nvars, budget)?;
        let scale = -BigInt::from(p).pow(j as u32);
        poly_add_into(&mut acc, &powered, &scale);
    }
    let denom = BigInt::from(p).pow(i as u32);
    for c in acc.values_mut() {
        debug_assert_eq!(&*c % &denom, BigInt::from(0));
        *c /= &denom;
    }
    check_budget(&acc, budget)?;
    let acc = Arc::new(acc);
    poly_memo()
        .write()
        .expect("memo poisoned")
        .entry((p, i, kind))
        .or_insert_with(|| acc.clone());
    Ok(acc)
}

/// The `i`-th Witt sum or product polynomial for the prime `p`, reduced mod `p`.
pub fn witt_poly(p: u32, i: usize, kind: PolyKind) -> Result<WittPoly> {
    witt_poly_with_budget(p, i, kind, &PolyBudget::default())
}

pub fn witt_poly_with_budget(
    p: u32,
    i: usize,
    kind: PolyKind,
    budget: &PolyBudget,
) -> Result<WittPoly> {
    if !crate::field::is_prime(p as u64) {
        return Err(Error::NonPrime(p as u64));
    }
    let ip = integer_poly(p, i, kind, budget)?;
    let pb = BigInt::from(p);
    let mut terms = BTreeMap::new();
    for (mono, c) in ip.iter() {
        let r: BigInt = ((c % &pb) + &pb) % &pb;
        let r: u32 = r.try_into().expect("residue below p");
        if r != 0 {
            terms.insert(mono.clone(), r);
        }
    }
    Ok(WittPoly {
        p,
        index: i,
        kind,
        terms,
    })
}

/// Sum or product evaluated component by component through the structure
/// polynomials.
pub fn witt_eval_polys(u: &WittVector, v: &WittVector, kind: PolyKind) -> Result<WittVector> {
    u.check_pair(v)?;
    let k = u.field;
    let mut comps = Vec::with_capacity(u.len());
    for i in 0..u.len() {
        let poly = witt_poly(k.p(), i, kind)?;
        comps.push(poly.eval(&k, &u.comps[..=i], &v.comps[..=i]));
    }
    Ok(WittVector { field: k, comps })
}
