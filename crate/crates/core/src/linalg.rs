//! Linear and semilinear algebra over the chain ring `W_m(F_q)`.
//!
//! Vectors are columns. A module `(+)_i W_{e_i}(k)` is described by its
//! exponent list `e`; an element is a vector whose entry `i` is read modulo
//! `p^{e_i}`. Maps between such modules are matrices whose column `j` is the
//! image of basis vector `j`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::galois::{WittRing, W};
use crate::matrix::{reduce_vec, Matrix};

/// Exponents of a module `(+)_i W_{e_i}(k)`. Results of the standardizing
/// routines list them in descending order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModuleProfile {
    pub field: FieldSpec,
    pub exps: Vec<u32>,
}

impl ModuleProfile {
    pub fn new(field: FieldSpec, exps: Vec<u32>) -> Self {
        ModuleProfile { field, exps }
    }

    pub fn length(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn sorted(&self) -> Vec<u32> {
        let mut e = self.exps.clone();
        e.sort_unstable_by(|a, b| b.cmp(a));
        e
    }
}

pub fn length(exps: &[u32]) -> u32 {
    exps.iter().sum()
}

fn p_diag(ring: &Arc<WittRing>, exps: &[u32]) -> Matrix {
    let d: Vec<W> = exps.iter().map(|&e| ring.p_pow(e)).collect();
    Matrix::diagonal(ring, &d)
}

/// Canonical row form of the row span.
pub fn howell_form(a: &Matrix) -> Matrix {
    let r = a.ring().clone();
    let m = r.len();
    let cols = a.cols();
    let mut rows: Vec<Vec<W>> = (0..a.rows()).map(|i| a.row(i)).collect();
    let mut pivots: Vec<(usize, u32)> = Vec::new();
    let mut top = 0;
    for col in 0..cols {
        let best = (top..rows.len()).map(|i| (r.val(&rows[i][col]), i)).min();
        let Some((v, bi)) = best else { break };
        if v >= m {
            continue;
        }
        rows.swap(top, bi);
        let (_, u) = r.split_val(&rows[top][col]);
        let uinv = r.inv(&u).expect("unit");
        for x in rows[top].iter_mut() {
            *x = r.mul(x, &uinv);
        }
        for i in top + 1..rows.len() {
            let e = rows[i][col];
            if r.is_zero(&e) {
                continue;
            }
            let c = r.div_p_pow(&e, v);
            for j in col..cols {
                let t = r.mul(&c, &rows[top][j]);
                rows[i][j] = r.sub(&rows[i][j], &t);
            }
        }
        if v > 0 {
            let sat = r.p_pow(m - v);
            let extra: Vec<W> = rows[top].iter().map(|x| r.mul(&sat, x)).collect();
            if extra.iter().any(|x| !r.is_zero(x)) {
                rows.push(extra);
            }
        }
        pivots.push((col, v));
        top += 1;
    }
    rows.truncate(top);
    for k in 0..pivots.len() {
        let (col, v) = pivots[k];
        for i in 0..k {
            let e = rows[i][col];
            let q = r.quot_p_pow(&e, v);
            if r.is_zero(&q) {
                continue;
            }
            for j in col..cols {
                let t = r.mul(&q, &rows[k][j]);
                rows[i][j] = r.sub(&rows[i][j], &t);
            }
        }
    }
    Matrix::from_rows(&r, &rows, cols)
}

/// `U A V = D` with `D` diagonal of entries `p^{d_t}` (nondecreasing `d_t`).
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: Matrix,
    pub u_inv: Matrix,
    pub v: Matrix,
    pub v_inv: Matrix,
    /// Valuations of the diagonal, length `min(rows, cols)`; `m` marks zero.
    pub d: Vec<u32>,
}

pub fn smith(a: &Matrix) -> Smith {
    let r = a.ring().clone();
    let m = r.len();
    let (nr, nc) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut u = Matrix::identity(&r, nr);
    let mut u_inv = Matrix::identity(&r, nr);
    let mut v = Matrix::identity(&r, nc);
    let mut v_inv = Matrix::identity(&r, nc);
    let k = nr.min(nc);
    let mut d = vec![m; k];
    for t in 0..k {
        let mut best = (m, t, t);
        'search: for i in t..nr {
            for j in t..nc {
                let val = r.val(&w.get(i, j));
                if val < best.0 {
                    best = (val, i, j);
                    if val == 0 {
                        break 'search;
                    }
                }
            }
        }
        let (val, bi, bj) = best;
        if val >= m {
            break;
        }
        d[t] = val;
        if bi != t {
            swap_rows(&mut w, t, bi);
            swap_rows(&mut u, t, bi);
            swap_cols(&mut u_inv, t, bi);
        }
        if bj != t {
            swap_cols(&mut w, t, bj);
            swap_cols(&mut v, t, bj);
            swap_rows(&mut v_inv, t, bj);
        }
        let (_, unit) = r.split_val(&w.get(t, t));
        let uinv = r.inv(&unit).expect("unit");
        scale_row(&mut w, t, &uinv);
        scale_row(&mut u, t, &uinv);
        scale_col(&mut u_inv, t, &unit);
        for i in t + 1..nr {
            let e = w.get(i, t);
            if r.is_zero(&e) {
                continue;
            }
            let c = r.div_p_pow(&e, val);
            row_axpy(&mut w, i, t, &r.neg(&c));
            row_axpy(&mut u, i, t, &r.neg(&c));
            col_axpy(&mut u_inv, t, i, &c);
        }
        for j in t + 1..nc {
            let e = w.get(t, j);
            if r.is_zero(&e) {
                continue;
            }
            let c = r.div_p_pow(&e, val);
            col_axpy(&mut w, j, t, &r.neg(&c));
            col_axpy(&mut v, j, t, &r.neg(&c));
            row_axpy(&mut v_inv, t, j, &c);
        }
    }
    Smith {
        u,
        u_inv,
        v,
        v_inv,
        d,
    }
}

fn swap_rows(a: &mut Matrix, i: usize, j: usize) {
    for c in 0..a.cols() {
        let (x, y) = (a.get(i, c), a.get(j, c));
        a.set(i, c, y);
        a.set(j, c, x);
    }
}

fn swap_cols(a: &mut Matrix, i: usize, j: usize) {
    for r in 0..a.rows() {
        let (x, y) = (a.get(r, i), a.get(r, j));
        a.set(r, i, y);
        a.set(r, j, x);
    }
}

fn scale_row(a: &mut Matrix, i: usize, c: &W) {
    let r = a.ring().clone();
    for j in 0..a.cols() {
        a.set(i, j, r.mul(c, &a.get(i, j)));
    }
}

fn scale_col(a: &mut Matrix, j: usize, c: &W) {
    let r = a.ring().clone();
    for i in 0..a.rows() {
        a.set(i, j, r.mul(c, &a.get(i, j)));
    }
}

/// `row_dst += c * row_src`
fn row_axpy(a: &mut Matrix, dst: usize, src: usize, c: &W) {
    let r = a.ring().clone();
    for j in 0..a.cols() {
        let t = r.mul(c, &a.get(src, j));
        a.set(dst, j, r.add(&a.get(dst, j), &t));
    }
}

/// `col_dst += c * col_src`
fn col_axpy(a: &mut Matrix, dst: usize, src: usize, c: &W) {
    let r = a.ring().clone();
    for i in 0..a.rows() {
        let t = r.mul(c, &a.get(i, src));
        a.set(i, dst, r.add(&a.get(i, dst), &t));
    }
}

/// Sorted valuations of the Smith diagonal; `m` stands for a zero entry.
pub fn elementary_divisors(a: &Matrix) -> Vec<u32> {
    smith(a).d
}

/// Rank of the reduction mod `p` over `F_q`.
pub fn rank_mod_p(a: &Matrix) -> usize {
    smith(a).d.iter().filter(|&&d| d == 0).count()
}

/// Inverse of a square matrix, if it is invertible.
pub fn inverse(a: &Matrix) -> Option<Matrix> {
    if a.rows() != a.cols() {
        return None;
    }
    let s = smith(a);
    if s.d.iter().any(|&d| d != 0) {
        return None;
    }
    Some(s.v.mul(&s.u))
}

/// Generators (as columns) of `{x : A x = 0}`.
pub fn nullspace(a: &Matrix) -> Matrix {
    let r = a.ring().clone();
    let m = r.len();
    let s = smith(a);
    let mut gens = Vec::new();
    for t in 0..a.cols() {
        let dt = s.d.get(t).copied().unwrap_or(m);
        if dt == 0 {
            continue;
        }
        let scale = r.p_pow(m - dt);
        let g: Vec<W> = s.v.column(t).iter().map(|x| r.mul(&scale, x)).collect();
        gens.push(g);
    }
    Matrix::from_columns(&r, &gens, a.cols())
}

/// Some `x` with `A x = b`, if one exists.
pub fn solve(a: &Matrix, b: &[W]) -> Option<Vec<W>> {
    let r = a.ring().clone();
    let m = r.len();
    let s = smith(a);
    let ub = s.u.apply(b);
    let mut y = vec![r.zero(); a.cols()];
    for (t, val) in ub.iter().enumerate() {
        let dt = s.d.get(t).copied().unwrap_or(m);
        if t >= a.cols() || dt >= m {
            if !r.is_zero(val) {
                return None;
            }
            continue;
        }
        if r.val(val) < dt {
            return None;
        }
        y[t] = r.div_p_pow(val, dt);
    }
    Some(s.v.apply(&y))
}

/// Standardized quotient `R^k / span(relations)`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub profile: Vec<u32>,
    /// `r x k`: coordinates of the image of `x` are `proj * x` (reduced).
    pub proj: Matrix,
    /// `k x r`: column `i` lifts basis vector `i`.
    pub section: Matrix,
}

impl Quotient {
    pub fn project(&self, x: &[W]) -> Vec<W> {
        reduce_vec(self.proj.ring(), &self.proj.apply(x), &self.profile)
    }

    pub fn len(&self) -> u32 {
        length(&self.profile)
    }
}

/// Quotient of the free module `R^k` by the span of the columns of `rel`.
pub fn standardize(rel: &Matrix) -> Quotient {
    let r = rel.ring().clone();
    let m = r.len();
    let k = rel.rows();
    let s = smith(rel);
    let mut keep: Vec<(u32, usize)> = (0..k)
        .map(|i| (s.d.get(i).copied().unwrap_or(m), i))
        .filter(|&(d, _)| d > 0)
        .collect();
    // descending exponents, stable in the index
    keep.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let idx: Vec<usize> = keep.iter().map(|&(_, i)| i).collect();
    let profile: Vec<u32> = keep.iter().map(|&(d, _)| d).collect();
    let proj = s.u.select_rows(&idx).reduce_rows(&profile);
    let section = s.u_inv.select_cols(&idx);
    Quotient {
        profile,
        proj,
        section,
    }
}

/// Quotient of the module with exponents `exps` by the columns of `gens`.
pub fn quotient(exps: &[u32], gens: &Matrix) -> Quotient {
    let r = gens.ring().clone();
    standardize(&p_diag(&r, exps).hstack(gens))
}

/// A submodule of `(+) W_{e_i}` in standard form, with its embedding.
#[derive(Clone, Debug)]
pub struct Submodule {
    pub profile: Vec<u32>,
    /// `k x r`: column `i` is the image of basis vector `i`.
    pub embed: Matrix,
    ambient: Vec<u32>,
    gens: Matrix,
    proj: Matrix,
}

impl Submodule {
    pub fn len(&self) -> u32 {
        length(&self.profile)
    }

    pub fn ambient(&self) -> &[u32] {
        &self.ambient
    }

    /// Coordinates of `x` in the standard basis, or `None` if `x` is outside.
    pub fn coords(&self, x: &[W]) -> Option<Vec<W>> {
        let r = self.gens.ring().clone();
        let g = self.gens.cols();
        let sys = self.gens.hstack(&p_diag(&r, &self.ambient));
        let z = solve(&sys, x)?;
        let y = self.proj.apply(&z[..g]);
        Some(reduce_vec(&r, &y, &self.profile))
    }
}

/// Submodule generated by the columns of `gens` inside `(+) W_{e_i}`.
pub fn submodule(exps: &[u32], gens: &Matrix) -> Submodule {
    let r = gens.ring().clone();
    let g = gens.cols();
    let sys = gens.hstack(&p_diag(&r, exps));
    let null = nullspace(&sys);
    let rel = null.select_rows(&(0..g).collect::<Vec<_>>());
    let q = standardize(&rel);
    let embed = gens.mul(&q.section).reduce_rows(exps);
    Submodule {
        profile: q.profile,
        embed,
        ambient: exps.to_vec(),
        gens: gens.clone(),
        proj: q.proj,
    }
}

/// Kernel of the linear map `A` from exponents `src` to exponents `tgt`.
pub fn kernel(a: &Matrix, src: &[u32], tgt: &[u32]) -> Submodule {
    let r = a.ring().clone();
    let s = a.cols();
    let sys = a.hstack(&p_diag(&r, tgt));
    let null = nullspace(&sys);
    let xs = null.select_rows(&(0..s).collect::<Vec<_>>());
    submodule(src, &xs)
}

pub fn image(a: &Matrix, tgt: &[u32]) -> Submodule {
    submodule(tgt, a)
}

pub fn cokernel(a: &Matrix, tgt: &[u32]) -> Quotient {
    quotient(tgt, a)
}

/// `x -> A sigma^a(x)` between modules with the given exponent lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemilinearMap {
    pub matrix: Matrix,
    pub twist: i64,
    pub src: Vec<u32>,
    pub tgt: Vec<u32>,
}

impl SemilinearMap {
    pub fn new(matrix: Matrix, twist: i64, src: Vec<u32>, tgt: Vec<u32>) -> Result<Self> {
        if matrix.rows() != tgt.len() || matrix.cols() != src.len() {
            return Err(Error::Shape(format!(
                "{}x{} matrix between modules of rank {} and {}",
                matrix.rows(),
                matrix.cols(),
                src.len(),
                tgt.len()
            )));
        }
        check_annihilators(&matrix, &src, &tgt)?;
        let matrix = matrix.reduce_rows(&tgt);
        Ok(SemilinearMap {
            matrix,
            twist,
            src,
            tgt,
        })
    }

    pub fn apply(&self, x: &[W]) -> Vec<W> {
        let r = self.matrix.ring().clone();
        let sx: Vec<W> = x.iter().map(|v| r.sigma(v, self.twist)).collect();
        reduce_vec(&r, &self.matrix.apply(&sx), &self.tgt)
    }

    /// `self o other`.
    pub fn compose(&self, other: &SemilinearMap) -> Result<SemilinearMap> {
        if self.src != other.tgt {
            return Err(Error::Shape("maps do not compose".into()));
        }
        let m = self.matrix.mul(&other.matrix.sigma(self.twist));
        SemilinearMap::new(
            m,
            self.twist + other.twist,
            other.src.clone(),
            self.tgt.clone(),
        )
    }
}

/// Checks `p^{src_j} A_{ij} = 0 mod p^{tgt_i}`.
pub fn check_annihilators(a: &Matrix, src: &[u32], tgt: &[u32]) -> Result<()> {
    let r = a.ring();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let x = a.get(i, j);
            if r.val(&x) + src[j] < tgt[i] && !r.is_zero(&r.reduce(&x, tgt[i])) {
                return Err(Error::AnnihilatorViolation(format!(
                    "entry ({i},{j}) does not respect p^{} -> p^{}",
                    src[j], tgt[i]
                )));
            }
        }
    }
    Ok(())
}

/// Kernel of `T`: the kernel of the linear part, twisted back by `sigma^{-a}`.
pub fn semilinear_kernel(t: &SemilinearMap) -> (ModuleProfile, Submodule) {
    let r = t.matrix.ring().clone();
    let lin = kernel(&t.matrix, &t.src, &t.tgt);
    let gens = lin.embed.sigma(-t.twist);
    let sub = submodule(&t.src, &gens);
    (ModuleProfile::new(r.field(), sub.profile.clone()), sub)
}

pub fn semilinear_image(t: &SemilinearMap) -> (ModuleProfile, Submodule) {
    let sub = image(&t.matrix, &t.tgt);
    (
        ModuleProfile::new(t.matrix.ring().field(), sub.profile.clone()),
        sub,
    )
}

pub fn semilinear_cokernel(t: &SemilinearMap) -> (ModuleProfile, Quotient) {
    let q = cokernel(&t.matrix, &t.tgt);
    (
        ModuleProfile::new(t.matrix.ring().field(), q.profile.clone()),
        q,
    )
}
