//! Finite fields `F_{p^n}` presented as `F_p[x]/(f)`.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Hard cap on the extension degree; elements are fixed-size arrays.
pub const MAX_DEGREE: usize = 8;

/// Soft parameter envelope. The defaults keep the structure-polynomial
/// tables and search spaces small; callers may relax them explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_p: u32,
    pub max_n: usize,
    pub max_m: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_p: 97,
            max_n: 4,
            max_m: 8,
        }
    }
}

impl Limits {
    pub fn relaxed() -> Self {
        Limits {
            max_p: 1 << 15,
            max_n: MAX_DEGREE,
            max_m: 16,
        }
    }
}

/// The field `F_p[x]/(modulus)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldSpec {
    p: u32,
    n: usize,
    /// Monic, `modulus[n] == 1`.
    modulus: [u32; MAX_DEGREE + 1],
}

/// An element of `F_{p^n}`: coefficients of its polynomial representative.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Fq {
    c: [u32; MAX_DEGREE],
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Checks irreducibility of a monic polynomial over `F_p` (coefficients low
/// to high, leading 1 included) with Rabin's test.
pub fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let n = poly.len() - 1;
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let f: Vec<u32> = poly.to_vec();
    let x = vec![0, 1];
    let mut power = x.clone();
    for i in 1..=n {
        power = poly_powmod(&power, p as u64, &f, p);
        let mut diff = power.clone();
        poly_sub_assign(&mut diff, &x, p);
        trim(&mut diff);
        let prime_divisor = n.is_multiple_of(i) && is_prime((n / i) as u64);
        if i == n {
            // x^{p^n} == x mod f
            if !diff.is_empty() {
                return false;
            }
        } else if prime_divisor {
            let g = poly_gcd(&f, &diff, p);
            if g.len() > 1 {
                return false;
            }
        }
    }
    true
}

fn trim(a: &mut Vec<u32>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_sub_assign(a: &mut Vec<u32>, b: &[u32], p: u32) {
    if a.len() < b.len() {
        a.resize(b.len(), 0);
    }
    for (i, &bi) in b.iter().enumerate() {
        a[i] = (a[i] + p - bi % p) % p;
    }
}

fn poly_rem(a: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    trim(&mut r);
    let df = f.len() - 1;
    let lead_inv = inv_mod(f[df], p);
    while r.len() > df {
        let d = r.len() - 1;
        let c = (r[d] as u64 * lead_inv as u64 % p as u64) as u32;
        if c != 0 {
            for j in 0..=df {
                let idx = d - df + j;
                r[idx] = ((r[idx] as u64 + (p - c) as u64 * f[j] as u64) % p as u64) as u32;
            }
        }
        trim(&mut r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], f: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai as u64 * bj as u64) % p as u64;
        }
    }
    let out: Vec<u32> = out.into_iter().map(|c| c as u32).collect();
    poly_rem(&out, f, p)
}

fn poly_powmod(a: &[u32], mut e: u64, f: &[u32], p: u32) -> Vec<u32> {
    let mut result = vec![1u32];
    let mut base = poly_rem(a, f, p);
    while e > 0 {
        if e & 1 == 1 {
            result = poly_mulmod(&result, &base, f, p);
        }
        base = poly_mulmod(&base, &base, f, p);
        e >>= 1;
    }
    result
}

fn poly_gcd(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p as i64, (a % p) as i64);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    t.rem_euclid(p as i64) as u32
}

impl FieldSpec {
    /// Builds `F_{p^n}` within the default envelope.
    pub fn new(p: u32, n: usize, modulus: Option<&[u32]>) -> Result<Self> {
        Self::with_limits(p, n, modulus, &Limits::default())
    }

    pub fn with_limits(p: u32, n: usize, modulus: Option<&[u32]>, limits: &Limits) -> Result<Self> {
        if !is_prime(p as u64) {
            return Err(Error::NonPrime(p as u64));
        }
        if p > limits.max_p {
            return Err(Error::Envelope(format!("p = {p} exceeds {}", limits.max_p)));
        }
        if n == 0 || n > limits.max_n.min(MAX_DEGREE) {
            return Err(Error::Envelope(format!("extension degree {n}")));
        }
        let poly: Vec<u32> = match modulus {
            Some(m) => {
                if m.len() != n + 1 || m[n] % p != 1 {
                    return Err(Error::BadParameter(format!(
                        "modulus must be monic of degree {n}"
                    )));
                }
                let poly: Vec<u32> = m.iter().map(|c| c % p).collect();
                if !is_irreducible(&poly, p) {
                    return Err(Error::ReducibleModulus { p });
                }
                poly
            }
            None => Self::default_modulus(p, n),
        };
        let mut modulus = [0u32; MAX_DEGREE + 1];
        modulus[..=n].copy_from_slice(&poly);
        Ok(FieldSpec { p, n, modulus })
    }

    /// Smallest irreducible monic polynomial, comparing coefficient tuples
    /// lexicographically from the `x^{n-1}` coefficient down.
    fn default_modulus(p: u32, n: usize) -> Vec<u32> {
        let mut low_first = vec![0u32; n];
        loop {
            let mut poly = low_first.clone();
            poly.push(1);
            if is_irreducible(&poly, p) {
                return poly;
            }
            // increment with the constant term as the least significant digit
            let mut i = 0;
            loop {
                low_first[i] += 1;
                if low_first[i] < p {
                    break;
                }
                low_first[i] = 0;
                i += 1;
                assert!(i < n, "an irreducible polynomial always exists");
            }
        }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u64 {
        (self.p as u64).pow(self.n as u32)
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus[..=self.n]
    }

    pub fn zero(&self) -> Fq {
        Fq::default()
    }

    pub fn one(&self) -> Fq {
        self.from_int(1)
    }

    pub fn from_int(&self, a: i64) -> Fq {
        let mut c = [0u32; MAX_DEGREE];
        c[0] = a.rem_euclid(self.p as i64) as u32;
        Fq { c }
    }

    /// The class of `x`.
    pub fn generator(&self) -> Fq {
        if self.n == 1 {
            // x = -modulus[0]
            return self.from_int(-(self.modulus[0] as i64));
        }
        let mut c = [0u32; MAX_DEGREE];
        c[1] = 1;
        Fq { c }
    }

    pub fn from_coeffs(&self, coeffs: &[i64]) -> Result<Fq> {
        if coeffs.len() > self.n {
            return Err(Error::Shape(format!(
                "field element has {} coefficients, expected at most {}",
                coeffs.len(),
                self.n
            )));
        }
        let mut c = [0u32; MAX_DEGREE];
        for (dst, &src) in c.iter_mut().zip(coeffs) {
            *dst = src.rem_euclid(self.p as i64) as u32;
        }
        Ok(Fq { c })
    }

    pub fn coeffs(&self, x: &Fq) -> Vec<u32> {
        x.c[..self.n].to_vec()
    }

    /// Index in `0..q` (base-p digits, constant term least significant).
    pub fn index_of(&self, x: &Fq) -> u64 {
        x.c[..self.n]
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * self.p as u64 + d as u64)
    }

    pub fn from_index(&self, mut idx: u64) -> Fq {
        let mut c = [0u32; MAX_DEGREE];
        for slot in c.iter_mut().take(self.n) {
            *slot = (idx % self.p as u64) as u32;
            idx /= self.p as u64;
        }
        Fq { c }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fq> + '_ {
        (0..self.q()).map(move |i| self.from_index(i))
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Fq {
        let mut c = [0u32; MAX_DEGREE];
        for slot in c.iter_mut().take(self.n) {
            *slot = rng.gen_range(0..self.p);
        }
        Fq { c }
    }

    pub fn is_zero(&self, x: &Fq) -> bool {
        x.c.iter().all(|&d| d == 0)
    }

    pub fn add(&self, a: &Fq, b: &Fq) -> Fq {
        let mut c = [0u32; MAX_DEGREE];
        for i in 0..self.n {
            c[i] = (a.c[i] + b.c[i]) % self.p;
        }
        Fq { c }
    }

    pub fn sub(&self, a: &Fq, b: &Fq) -> Fq {
        let mut c = [0u32; MAX_DEGREE];
        for i in 0..self.n {
            c[i] = (a.c[i] + self.p - b.c[i]) % self.p;
        }
        Fq { c }
    }

    pub fn neg(&self, a: &Fq) -> Fq {
        self.sub(&self.zero(), a)
    }

    pub fn mul(&self, a: &Fq, b: &Fq) -> Fq {
        let n = self.n;
        let p = self.p as u64;
        let mut prod = [0u64; 2 * MAX_DEGREE];
        for i in 0..n {
            if a.c[i] == 0 {
                continue;
            }
            for j in 0..n {
                prod[i + j] = (prod[i + j] + a.c[i] as u64 * b.c[j] as u64) % p;
            }
        }
        for d in (n..2 * n - 1).rev() {
            let top = prod[d];
            if top == 0 {
                continue;
            }
            for j in 0..n {
                prod[d - n + j] = (prod[d - n + j] + (p - top) * self.modulus[j] as u64) % p;
            }
            prod[d] = 0;
        }
        let mut c = [0u32; MAX_DEGREE];
        for i in 0..n {
            c[i] = prod[i] as u32;
        }
        Fq { c }
    }

    pub fn pow(&self, a: &Fq, mut e: u128) -> Fq {
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

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: &Fq) -> Option<Fq> {
        if self.is_zero(a) {
            None
        } else {
            Some(self.pow(a, self.q() as u128 - 2))
        }
    }

    /// `sigma^a(x) = x^{p^a}`; `a` may be negative.
    pub fn frob(&self, x: &Fq, a: i64) -> Fq {
        let k = a.rem_euclid(self.n as i64);
        let mut y = *x;
        for _ in 0..k {
            y = self.pow(&y, self.p as u128);
        }
        y
    }

    pub fn describe(&self) -> String {
        format!("F_{}", self.q())
    }
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}[{:?}]", self.p, self.n, self.modulus())
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^{}", self.p, self.n)
        }
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let last = self.c.iter().rposition(|&d| d != 0).unwrap_or(0);
        write!(f, "{:?}", &self.c[..=last])
    }
}
