//! Oracles shared by the integration tests. Nothing here calls into the
//! library's arithmetic.

#![allow(dead_code)]

use std::collections::HashSet;

use num_bigint::BigInt;

// ---- integer ghost oracle ----

/// Element of `Z[x]/(g)` for a monic integer lift `g` of the field modulus.
type ZPoly = Vec<BigInt>;

pub struct GhostOracle {
    p: u32,
    /// Monic, constant term first, length `n + 1`.
    g: Vec<BigInt>,
}

impl GhostOracle {
    pub fn new(p: u32, modulus: &[u32]) -> Self {
        GhostOracle {
            p,
            g: modulus.iter().map(|&c| BigInt::from(c)).collect(),
        }
    }

    fn n(&self) -> usize {
        self.g.len() - 1
    }

    fn add(&self, a: &ZPoly, b: &ZPoly) -> ZPoly {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn scale(&self, a: &ZPoly, c: &BigInt) -> ZPoly {
        a.iter().map(|x| x * c).collect()
    }

    fn mul(&self, a: &ZPoly, b: &ZPoly) -> ZPoly {
        let n = self.n();
        let mut prod = vec![BigInt::from(0); 2 * n];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                prod[i + j] += x * y;
            }
        }
        for d in (n..2 * n).rev() {
            let c = std::mem::take(&mut prod[d]);
            for i in 0..n {
                prod[d - n + i] -= &c * &self.g[i];
            }
        }
        prod.truncate(n);
        prod
    }

    fn pow(&self, a: &ZPoly, e: u64) -> ZPoly {
        let mut one = vec![BigInt::from(0); self.n()];
        one[0] = BigInt::from(1);
        let (mut acc, mut base, mut e) = (one, a.clone(), e);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }

    fn ghost(&self, comps: &[ZPoly]) -> Vec<ZPoly> {
        let p = BigInt::from(self.p);
        (0..comps.len())
            .map(|k| {
                let mut w = vec![BigInt::from(0); self.n()];
                for (i, a) in comps.iter().enumerate().take(k + 1) {
                    let t = self.pow(a, (self.p as u64).pow((k - i) as u32));
                    w = self.add(&w, &self.scale(&t, &p.pow(i as u32)));
                }
                w
            })
            .collect()
    }

    /// Exact integer components with the given ghost vector.
    fn unghost(&self, w: &[ZPoly]) -> Vec<ZPoly> {
        let p = BigInt::from(self.p);
        let mut out: Vec<ZPoly> = Vec::new();
        for k in 0..w.len() {
            let mut rest = w[k].clone();
            for (i, s) in out.iter().enumerate() {
                let t = self.pow(s, (self.p as u64).pow((k - i) as u32));
                rest = self.add(&rest, &self.scale(&t, &-p.pow(i as u32)));
            }
            let d = p.pow(k as u32);
            out.push(
                rest.iter()
                    .map(|c| {
                        assert_eq!(c % &d, BigInt::from(0), "ghost component not divisible");
                        c / &d
                    })
                    .collect(),
            );
        }
        out
    }

    fn lift(&self, v: &[Vec<u32>]) -> Vec<ZPoly> {
        v.iter()
            .map(|c| c.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    fn reduce(&self, v: &[ZPoly]) -> Vec<Vec<u32>> {
        let p = BigInt::from(self.p);
        v.iter()
            .map(|c| {
                c.iter()
                    .map(|x| {
                        let r = ((x % &p) + &p) % &p;
                        u32::try_from(r).unwrap()
                    })
                    .collect()
            })
            .collect()
    }

    /// Components (coefficient vectors mod p) of `a + b` and `a * b`.
    pub fn sum_and_product(
        &self,
        a: &[Vec<u32>],
        b: &[Vec<u32>],
    ) -> (Vec<Vec<u32>>, Vec<Vec<u32>>) {
        let (ga, gb) = (self.ghost(&self.lift(a)), self.ghost(&self.lift(b)));
        let s: Vec<ZPoly> = ga.iter().zip(&gb).map(|(x, y)| self.add(x, y)).collect();
        let m: Vec<ZPoly> = ga.iter().zip(&gb).map(|(x, y)| self.mul(x, y)).collect();
        (
            self.reduce(&self.unghost(&s)),
            self.reduce(&self.unghost(&m)),
        )
    }
}

// ---- small finite fields for point counts ----

/// `F_p[x]/(f)` with elements stored by index (base-p digits).
pub struct Gf {
    pub p: u64,
    pub k: usize,
    /// Monic, constant term first.
    f: Vec<u64>,
}

fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let inv_lead = (1..p).find(|x| x * b[db] % p == 1).unwrap();
    while r.len() > db && !r.is_empty() {
        let lead = r[r.len() - 1] * inv_lead % p;
        let shift = r.len() - 1 - db;
        for (i, &c) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p * p - lead * c % p) % p;
        }
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    r
}

fn digits(mut idx: u64, p: u64, k: usize) -> Vec<u64> {
    (0..k)
        .map(|_| {
            let d = idx % p;
            idx /= p;
            d
        })
        .collect()
}

impl Gf {
    /// A field of order `p^k`, with the first irreducible modulus found.
    pub fn new(p: u64, k: usize) -> Self {
        for idx in 0..p.pow(k as u32) {
            let mut f = digits(idx, p, k);
            f.push(1);
            let reducible = (1..=k / 2).any(|d| {
                (0..p.pow(d as u32)).any(|j| {
                    let mut g = digits(j, p, d);
                    g.push(1);
                    poly_rem(&f, &g, p).is_empty()
                })
            });
            if !reducible {
                return Gf { p, k, f };
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.k as u32)
    }

    fn vec(&self, a: u64) -> Vec<u64> {
        digits(a, self.p, self.k)
    }

    fn idx(&self, v: &[u64]) -> u64 {
        v.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        let (x, y) = (self.vec(a), self.vec(b));
        self.idx(
            &x.iter()
                .zip(&y)
                .map(|(u, v)| (u + v) % self.p)
                .collect::<Vec<_>>(),
        )
    }

    pub fn neg(&self, a: u64) -> u64 {
        self.idx(
            &self
                .vec(a)
                .iter()
                .map(|u| (self.p - u) % self.p)
                .collect::<Vec<_>>(),
        )
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let (x, y) = (self.vec(a), self.vec(b));
        let mut prod = vec![0u64; 2 * self.k];
        for (i, u) in x.iter().enumerate() {
            for (j, v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % self.p;
            }
        }
        while prod.last() == Some(&0) {
            prod.pop();
        }
        let mut r = poly_rem(&prod, &self.f, self.p);
        r.resize(self.k, 0);
        self.idx(&r)
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let (mut acc, mut base) = (1u64, a);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Image of `F_p[y]/(g)` in this field: a root of `g` (constant term
    /// first), used to embed coefficient vectors.
    pub fn root_of(&self, g: &[u32]) -> u64 {
        (0..self.order())
            .find(|&r| {
                let mut acc = 0u64;
                for &c in g.iter().rev() {
                    acc = self.add(self.mul(acc, r), c as u64 % self.p);
                }
                acc == 0
            })
            .expect("the extension contains a root")
    }

    pub fn embed(&self, root: u64, coeffs: &[u32]) -> u64 {
        let mut acc = 0u64;
        for &c in coeffs.iter().rev() {
            acc = self.add(self.mul(acc, root), c as u64 % self.p);
        }
        acc
    }
}

/// `x -> A x^(p) - shift * x` on `L^d`, with `A` given by embedded entries.
fn apply(l: &Gf, a: &[Vec<u64>], x: &[u64], shift: bool) -> Vec<u64> {
    a.iter()
        .enumerate()
        .map(|(i, row)| {
            let mut acc = 0;
            for (j, &e) in row.iter().enumerate() {
                acc = l.add(acc, l.mul(e, l.pow(x[j], l.p)));
            }
            if shift {
                acc = l.add(acc, l.neg(x[i]));
            }
            acc
        })
        .collect()
}

fn points(l: &Gf, d: usize) -> impl Iterator<Item = Vec<u64>> + '_ {
    let q = l.order();
    (0..q.pow(d as u32)).map(move |mut i| {
        (0..d)
            .map(|_| {
                let c = i % q;
                i /= q;
                c
            })
            .collect()
    })
}

/// `(|ker|, |coker|)` of `x -> A x^(p) [- x]` on `L^d` (`A` square).
pub fn kernel_cokernel(l: &Gf, a: &[Vec<u64>], shift: bool) -> (u64, u64) {
    let d = a.len();
    let mut ker = 0u64;
    let mut image = HashSet::new();
    for x in points(l, d) {
        let y = apply(l, a, &x, shift);
        if y.iter().all(|&c| c == 0) {
            ker += 1;
        }
        image.insert(y);
    }
    (ker, l.order().pow(d as u32) / image.len() as u64)
}
