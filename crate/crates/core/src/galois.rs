//! `W_m(F_q)` realised as the Galois ring `(Z/p^m)[x]/(f~)`, where `f~` is the
//! lift of the field modulus with coefficients in `[0, p)`.
//!
//! Witt components and ring elements are related by the Teichmuller
//! expansion `(a_0, a_1, ...) = sum_i p^i [a_i^{p^{-i}}]`. The Frobenius
//! `sigma` is the unique ring automorphism lifting `x -> x^p`; it is stored
//! as a `Z/p^m`-linear matrix on the coefficient basis.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{FieldSpec, Fq, MAX_DEGREE};

/// An element of `W_m(F_q)` in Galois-ring coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct W {
    c: [u64; MAX_DEGREE],
}

impl fmt::Debug for W {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.c.iter().rposition(|&d| d != 0).unwrap_or(0);
        write!(f, "{:?}", &self.c[..=last])
    }
}

impl W {
    pub fn coeffs(&self) -> &[u64; MAX_DEGREE] {
        &self.c
    }
}

pub struct WittRing {
    field: FieldSpec,
    m: u32,
    pm: u64,
    /// `sigma_pows[k]` is the matrix of `sigma^k` for `0 <= k < n`; column `j`
    /// holds the coordinates of `sigma^k(x^j)`.
    sigma_pows: Vec<Vec<Vec<u64>>>,
}

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W_{}({})", self.m, self.field)
    }
}

impl PartialEq for WittRing {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.m == other.m
    }
}

impl Eq for WittRing {}

type RingCache = RwLock<HashMap<(FieldSpec, u32), Arc<WittRing>>>;

fn cache() -> &'static RingCache {
    static CACHE: OnceLock<RingCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

impl WittRing {
    /// Shared instance of `W_m(k)`. Rings are immutable and memoized.
    pub fn get(field: FieldSpec, m: u32) -> Result<Arc<WittRing>> {
        if m == 0 {
            return Err(Error::BadParameter("Witt length must be >= 1".into()));
        }
        let p = field.p() as u128;
        let mut pm: u128 = 1;
        for _ in 0..m {
            pm *= p;
            if pm >= 1 << 62 {
                return Err(Error::Envelope(format!("p^{m} does not fit the ring word")));
            }
        }
        if let Some(r) = cache()
            .read()
            .expect("ring cache poisoned")
            .get(&(field, m))
        {
            return Ok(r.clone());
        }
        let ring = Arc::new(Self::build(field, m, pm as u64));
        // racing initialisations compute identical values
        cache()
            .write()
            .expect("ring cache poisoned")
            .entry((field, m))
            .or_insert_with(|| ring.clone());
        Ok(ring)
    }

    fn build(field: FieldSpec, m: u32, pm: u64) -> WittRing {
        let n = field.n();
        let mut ring = WittRing {
            field,
            m,
            pm,
            sigma_pows: Vec::new(),
        };
        let ident: Vec<Vec<u64>> = (0..n)
            .map(|i| (0..n).map(|j| u64::from(i == j)).collect())
            .collect();
        if n == 1 {
            ring.sigma_pows = vec![ident];
            return ring;
        }
        // Newton iteration for the root of f~ congruent to x^p.
        let x = ring.gen_x();
        let mut xi = ring.pow(&x, field.p() as u128);
        for _ in 0..=m {
            let fx = ring.eval_lift(&xi);
            let dfx = ring.eval_lift_derivative(&xi);
            let inv = ring.inv(&dfx).expect("modulus is separable");
            xi = ring.sub(&xi, &ring.mul(&fx, &inv));
        }
        let mut sigma = vec![vec![0u64; n]; n];
        let mut power = ring.one();
        for j in 0..n {
            for i in 0..n {
                sigma[i][j] = power.c[i];
            }
            power = ring.mul(&power, &xi);
        }
        let mut pows = vec![ident];
        for k in 1..n {
            let next = ring.mat_mul_z(&sigma, &pows[k - 1]);
            pows.push(next);
        }
        ring.sigma_pows = pows;
        ring
    }

    fn mat_mul_z(&self, a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
        let n = a.len();
        let mut out = vec![vec![0u64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0u64;
                for k in 0..n {
                    acc = self.add_z(acc, self.mul_z(a[i][k], b[k][j]));
                }
                out[i][j] = acc;
            }
        }
        out
    }

    fn gen_x(&self) -> W {
        if self.field.n() == 1 {
            return self.from_int(-(self.field.modulus()[0] as i64));
        }
        let mut c = [0u64; MAX_DEGREE];
        c[1] = 1;
        W { c }
    }

    fn eval_lift(&self, x: &W) -> W {
        let mut acc = W::default();
        for &coef in self.field.modulus().iter().rev() {
            acc = self.add(&self.mul(&acc, x), &self.from_int(coef as i64));
        }
        acc
    }

    fn eval_lift_derivative(&self, x: &W) -> W {
        let md = self.field.modulus();
        let mut acc = W::default();
        for k in (1..md.len()).rev() {
            let coef = self.from_int(md[k] as i64 * k as i64);
            acc = self.add(&self.mul(&acc, x), &coef);
        }
        acc
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn n(&self) -> usize {
        self.field.n()
    }

    /// Witt length `m`.
    pub fn len(&self) -> u32 {
        self.m
    }

    pub fn modulus_pm(&self) -> u64 {
        self.pm
    }

    #[inline]
    fn add_z(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.pm {
            s - self.pm
        } else {
            s
        }
    }

    #[inline]
    fn mul_z(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.pm as u128) as u64
    }

    pub fn zero(&self) -> W {
        W::default()
    }

    pub fn one(&self) -> W {
        self.from_int(1)
    }

    pub fn from_int(&self, a: i64) -> W {
        let mut c = [0u64; MAX_DEGREE];
        c[0] = (a as i128).rem_euclid(self.pm as i128) as u64;
        W { c }
    }

    /// `p^e` (zero when `e >= m`).
    pub fn p_pow(&self, e: u32) -> W {
        if e >= self.m {
            return self.zero();
        }
        self.from_int((self.p() as i64).pow(e))
    }

    pub fn from_coeffs(&self, coeffs: &[u64]) -> W {
        let mut c = [0u64; MAX_DEGREE];
        for (dst, &src) in c.iter_mut().zip(coeffs.iter().take(self.n())) {
            *dst = src % self.pm;
        }
        W { c }
    }

    pub fn is_zero(&self, a: &W) -> bool {
        a.c.iter().all(|&d| d == 0)
    }

    pub fn add(&self, a: &W, b: &W) -> W {
        let mut c = [0u64; MAX_DEGREE];
        for i in 0..self.n() {
            c[i] = self.add_z(a.c[i], b.c[i]);
        }
        W { c }
    }

    pub fn neg(&self, a: &W) -> W {
        let mut c = [0u64; MAX_DEGREE];
        for i in 0..self.n() {
            c[i] = if a.c[i] == 0 { 0 } else { self.pm - a.c[i] };
        }
        W { c }
    }

    pub fn sub(&self, a: &W, b: &W) -> W {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &W, b: &W) -> W {
        let n = self.n();
        if n == 1 {
            return W {
                c: {
                    let mut c = [0u64; MAX_DEGREE];
                    c[0] = self.mul_z(a.c[0], b.c[0]);
                    c
                },
            };
        }
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..n {
            if a.c[i] == 0 {
                continue;
            }
            for j in 0..n {
                prod[i + j] = self.add_z(prod[i + j], self.mul_z(a.c[i], b.c[j]));
            }
        }
        let md = self.field.modulus();
        for d in (n..2 * n - 1).rev() {
            let top = prod[d];
            if top == 0 {
                continue;
            }
            let neg_top = self.pm - top;
            for j in 0..n {
                prod[d - n + j] = self.add_z(prod[d - n + j], self.mul_z(neg_top, md[j] as u64));
            }
            prod[d] = 0;
        }
        let mut c = [0u64; MAX_DEGREE];
        c[..n].copy_from_slice(&prod[..n]);
        W { c }
    }

    pub fn scale_int(&self, a: &W, k: i64) -> W {
        self.mul(a, &self.from_int(k))
    }

    pub fn pow(&self, a: &W, mut e: u128) -> W {
        let mut result = self.one();
        let mut base = *a;
        while e > 0 {
            if e & 1 == 1 {
                result = self.mul(&result, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        result
    }

    /// p-adic valuation; `m` for zero.
    pub fn val(&self, a: &W) -> u32 {
        let p = self.p() as u64;
        let mut v = self.m;
        for &d in a.c.iter().take(self.n()) {
            if d == 0 {
                continue;
            }
            let mut x = d;
            let mut k = 0;
            while x % p == 0 {
                x /= p;
                k += 1;
            }
            v = v.min(k);
        }
        v
    }

    pub fn is_unit(&self, a: &W) -> bool {
        self.val(a) == 0
    }

    /// Exact division by `p^e`; the caller guarantees `val(a) >= e`.
    pub fn div_p_pow(&self, a: &W, e: u32) -> W {
        let pe = (self.p() as u64).pow(e);
        let mut c = [0u64; MAX_DEGREE];
        for i in 0..self.n() {
            debug_assert_eq!(a.c[i] % pe, 0);
            c[i] = a.c[i] / pe;
        }
        W { c }
    }

    /// Splits `a = p^v u` with `u` a unit (`u = 1` for zero).
    pub fn split_val(&self, a: &W) -> (u32, W) {
        let v = self.val(a);
        if v >= self.m {
            return (self.m, self.one());
        }
        (v, self.div_p_pow(a, v))
    }

    /// Canonical representative of `a` modulo `p^e` (coefficientwise).
    pub fn reduce(&self, a: &W, e: u32) -> W {
        if e >= self.m {
            return *a;
        }
        let pe = (self.p() as u64).pow(e);
        let mut c = [0u64; MAX_DEGREE];
        for i in 0..self.n() {
            c[i] = a.c[i] % pe;
        }
        W { c }
    }

    /// Quotient of the canonical division `a = reduce(a, e) + p^e * q`.
    pub fn quot_p_pow(&self, a: &W, e: u32) -> W {
        if e >= self.m {
            return self.zero();
        }
        let pe = (self.p() as u64).pow(e);
        let mut c = [0u64; MAX_DEGREE];
        for i in 0..self.n() {
            c[i] = a.c[i] / pe;
        }
        W { c }
    }

    pub fn inv(&self, a: &W) -> Option<W> {
        if !self.is_unit(a) {
            return None;
        }
        let k = self.field;
        let r = k.inv(&self.residue(a))?;
        let mut y = self.lift(&r);
        let two = self.from_int(2);
        let mut prec = 1;
        while prec < self.m {
            y = self.mul(&y, &self.sub(&two, &self.mul(a, &y)));
            prec *= 2;
        }
        Some(y)
    }

    /// Reduction to the residue field.
    pub fn residue(&self, a: &W) -> Fq {
        let p = self.p() as i64;
        let coeffs: Vec<i64> = (0..self.n()).map(|i| (a.c[i] % p as u64) as i64).collect();
        self.field.from_coeffs(&coeffs).expect("n coefficients")
    }

    /// Coefficientwise lift with digits in `[0, p)`.
    pub fn lift(&self, x: &Fq) -> W {
        let coeffs: Vec<u64> = self.field.coeffs(x).iter().map(|&d| d as u64).collect();
        self.from_coeffs(&coeffs)
    }

    /// Multiplicative representative `[x]`.
    pub fn teichmuller(&self, x: &Fq) -> W {
        let q = self.field.q() as u128;
        let mut t = self.lift(x);
        for _ in 1..self.m {
            t = self.pow(&t, q);
        }
        t
    }

    /// `sigma^a(x)`; `a` may be negative.
    pub fn sigma(&self, x: &W, a: i64) -> W {
        let n = self.n();
        let k = a.rem_euclid(n as i64) as usize;
        if k == 0 {
            return *x;
        }
        let mat = &self.sigma_pows[k];
        let mut c = [0u64; MAX_DEGREE];
        for i in 0..n {
            let mut acc = 0u64;
            for j in 0..n {
                if x.c[j] != 0 {
                    acc = self.add_z(acc, self.mul_z(mat[i][j], x.c[j]));
                }
            }
            c[i] = acc;
        }
        W { c }
    }

    /// `Z/p^m`-linear matrix of `sigma^a` on the coefficient basis.
    pub fn sigma_matrix(&self, a: i64) -> &[Vec<u64>] {
        let k = a.rem_euclid(self.n() as i64) as usize;
        &self.sigma_pows[k]
    }

    /// `Z/p^m`-linear matrix of multiplication by `g` on the coefficient basis.
    pub fn mult_matrix(&self, g: &W) -> Vec<Vec<u64>> {
        let n = self.n();
        let mut out = vec![vec![0u64; n]; n];
        let mut basis = self.one();
        let x = self.gen_x();
        for j in 0..n {
            let col = self.mul(g, &basis);
            for i in 0..n {
                out[i][j] = col.c[i];
            }
            basis = self.mul(&basis, &x);
        }
        out
    }

    /// Witt components `(a_0, ..., a_{m-1})` of a ring element.
    pub fn to_components(&self, a: &W) -> Vec<Fq> {
        let k = self.field;
        let mut rest = *a;
        let mut out = Vec::with_capacity(self.m as usize);
        for i in 0..self.m {
            let digit = self.residue(&rest);
            out.push(k.frob(&digit, i as i64));
            let t = self.teichmuller(&digit);
            rest = self.div_p_pow(&self.sub(&rest, &t), 1);
        }
        out
    }

    /// Ring element with the given Witt components; missing trailing
    /// components are zero.
    pub fn from_components(&self, comps: &[Fq]) -> W {
        let k = self.field;
        let mut acc = self.zero();
        for (i, a) in comps.iter().enumerate().take(self.m as usize) {
            let digit = k.frob(a, -(i as i64));
            let term = self.mul(&self.p_pow(i as u32), &self.teichmuller(&digit));
            acc = self.add(&acc, &term);
        }
        acc
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> W {
        let mut c = [0u64; MAX_DEGREE];
        for slot in c.iter_mut().take(self.n()) {
            *slot = rng.gen_range(0..self.pm);
        }
        W { c }
    }

    /// Reinterprets an element of another precision of the same field:
    /// canonical coefficient representatives are reduced or carried over.
    pub fn coerce(&self, a: &W) -> W {
        self.from_coeffs(&a.c[..self.n()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn components_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (p, n, m) in [(2, 1, 3), (2, 2, 3), (3, 2, 2), (5, 1, 3)] {
            let k = FieldSpec::new(p, n, None).unwrap();
            let r = WittRing::get(k, m).unwrap();
            for _ in 0..50 {
                let a = r.random(&mut rng);
                let comps = r.to_components(&a);
                assert_eq!(r.from_components(&comps), a);
            }
        }
    }

    #[test]
    fn sigma_is_ring_automorphism_lifting_frobenius() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = FieldSpec::new(3, 2, None).unwrap();
        let r = WittRing::get(k, 3).unwrap();
        for _ in 0..50 {
            let a = r.random(&mut rng);
            let b = r.random(&mut rng);
            assert_eq!(
                r.sigma(&r.mul(&a, &b), 1),
                r.mul(&r.sigma(&a, 1), &r.sigma(&b, 1))
            );
            assert_eq!(r.residue(&r.sigma(&a, 1)), k.frob(&r.residue(&a), 1));
            assert_eq!(r.sigma(&r.sigma(&a, 1), -1), a);
        }
    }

    #[test]
    fn witt_two_plus_one_is_p() {
        // (1,0) + (1,0) = (0,1) in W_2(F_2)
        let k = FieldSpec::new(2, 1, None).unwrap();
        let r = WittRing::get(k, 2).unwrap();
        assert_eq!(r.to_components(&r.from_int(2)), vec![k.zero(), k.one()]);
    }
}
