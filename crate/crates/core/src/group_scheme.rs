//! Finite commutative group schemes over `F_q`: a Dieudonne module for the
//! p-part and invariant factors for the prime-to-p constant part.

use std::fmt;

use crate::dieudonne::{dm_dual, dm_fourway, dm_word_kernel, DieudonneModule, Word};
use crate::error::{Error, Result};
use crate::field::{FieldSpec, Fq};
use crate::galois::WittRing;
use crate::iso::{module_iso_test, IsoOutcome};
use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupScheme {
    pub p_part: DieudonneModule,
    /// Invariant factors `d_1 | d_2 | ...` of the constant prime-to-p part.
    pub etale_coprime: Vec<u64>,
    pub label: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Atom {
    Mu(u32),
    Zmod(u32),
    Alpha(u32),
    ZmodCoprime(u64),
    SsKernel,
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Mu(a) => write!(f, "mu(p^{a})"),
            Atom::Zmod(a) => write!(f, "zmod(p^{a})"),
            Atom::Alpha(a) => write!(f, "alpha(p^{a})"),
            Atom::ZmodCoprime(d) => write!(f, "zmod({d})"),
            Atom::SsKernel => write!(f, "ss_kernel"),
        }
    }
}

/// `(d, rho)`: a sigma-linear endomorphism of `k^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightOneData {
    pub field: FieldSpec,
    pub rho: Vec<Vec<Fq>>,
}

impl HeightOneData {
    pub fn dim(&self) -> usize {
        self.rho.len()
    }
}

fn k_matrix(field: FieldSpec, rows: &[Vec<Fq>]) -> Result<Matrix> {
    let ring = WittRing::get(field, 1)?;
    let d = rows.len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(Error::Shape(format!(
                "row {i} of rho has {} entries, expected {d}",
                r.len()
            )));
        }
    }
    Ok(Matrix::from_fn(&ring, d, d, |i, j| ring.lift(&rows[i][j])))
}

fn mu_module(field: FieldSpec, a: u32) -> Result<DieudonneModule> {
    let ring = WittRing::get(field, a)?;
    let f = Matrix::identity(&ring, 1);
    let v = Matrix::diagonal(&ring, &[ring.p_pow(1)]);
    DieudonneModule::new(field, vec![a], &f, &v)
}

fn alpha_module(field: FieldSpec, a: u32) -> Result<DieudonneModule> {
    let ring = WittRing::get(field, 1)?;
    let n = a as usize;
    let f = Matrix::zeros(&ring, n, n);
    let v = Matrix::from_fn(&ring, n, n, |i, j| {
        if i == j + 1 {
            ring.one()
        } else {
            ring.zero()
        }
    });
    DieudonneModule::new(field, vec![1; n], &f, &v)
}

fn ss_module(field: FieldSpec) -> Result<DieudonneModule> {
    let ring = WittRing::get(field, 1)?;
    let shift = Matrix::from_fn(&ring, 2, 2, |i, j| {
        if i == 1 && j == 0 {
            ring.one()
        } else {
            ring.zero()
        }
    });
    DieudonneModule::new(field, vec![1, 1], &shift, &shift)
}

fn atom_label(field: FieldSpec, atom: Atom) -> String {
    let p = field.p();
    match atom {
        Atom::Mu(a) => format!("mu_{p}^{a}"),
        Atom::Zmod(a) => format!("Z/{p}^{a}"),
        Atom::Alpha(a) => format!("alpha_{p}^{a}"),
        Atom::ZmodCoprime(d) => format!("Z/{d}"),
        Atom::SsKernel => "M11".to_string(),
    }
}

pub fn gs_atom(field: FieldSpec, atom: Atom) -> Result<GroupScheme> {
    let exponent_ok = |a: u32| {
        if a == 0 {
            Err(Error::BadParameter("exponent must be >= 1".into()))
        } else {
            Ok(())
        }
    };
    let (p_part, coprime) = match atom {
        Atom::Mu(a) => {
            exponent_ok(a)?;
            (mu_module(field, a)?, vec![])
        }
        Atom::Zmod(a) => {
            exponent_ok(a)?;
            (dm_dual(&mu_module(field, a)?), vec![])
        }
        Atom::Alpha(a) => {
            exponent_ok(a)?;
            (alpha_module(field, a)?, vec![])
        }
        Atom::SsKernel => (ss_module(field)?, vec![]),
        Atom::ZmodCoprime(d) => {
            if d == 0 || d % field.p() as u64 == 0 {
                return Err(Error::BadParameter(format!(
                    "{d} is not prime to p = {}",
                    field.p()
                )));
            }
            let f = if d == 1 { vec![] } else { vec![d] };
            (DieudonneModule::zero(field), f)
        }
    };
    Ok(GroupScheme {
        p_part,
        etale_coprime: coprime,
        label: Some(atom_label(field, atom)),
    })
}

/// `G_p(V, rho)`: Dieudonne module `(k^d, F = rho, V = 0)`.
pub fn gs_height_one(data: &HeightOneData) -> Result<GroupScheme> {
    let f = k_matrix(data.field, &data.rho)?;
    let d = data.dim();
    let v = Matrix::zeros(f.ring(), d, d);
    let p_part = DieudonneModule::new(data.field, vec![1; d], &f, &v)?;
    Ok(GroupScheme {
        p_part,
        etale_coprime: vec![],
        label: None,
    })
}

pub fn gs_dual(g: &GroupScheme) -> GroupScheme {
    let label = g.label.as_ref().map(|l| {
        if let Some(rest) = l.strip_prefix("mu_") {
            format!("Z/{rest}")
        } else if let Some(rest) = l.strip_prefix("Z/").filter(|r| r.contains('^')) {
            format!("mu_{rest}")
        } else if l.starts_with("alpha_") || l == "M11" || l.starts_with("Z/") {
            l.clone()
        } else {
            format!("dual({l})")
        }
    });
    GroupScheme {
        p_part: dm_dual(&g.p_part),
        etale_coprime: g.etale_coprime.clone(),
        label,
    }
}

pub fn gs_frobenius_kernel(g: &GroupScheme, a: u32) -> Result<GroupScheme> {
    Ok(GroupScheme {
        p_part: dm_word_kernel(&g.p_part, Word::V(a))?,
        etale_coprime: vec![],
        label: None,
    })
}

pub fn gs_verschiebung_kernel(g: &GroupScheme, a: u32) -> Result<GroupScheme> {
    Ok(GroupScheme {
        p_part: dm_word_kernel(&g.p_part, Word::F(a))?,
        etale_coprime: vec![],
        label: None,
    })
}

impl GroupScheme {
    pub fn field(&self) -> FieldSpec {
        self.p_part.field()
    }

    /// `(p-exponent, prime-to-p order)`: the order is `p^e * c`.
    pub fn order(&self) -> (u32, u64) {
        (self.p_part.order().1, self.etale_coprime.iter().product())
    }

    /// Least `a` with `V^a = 0`; `Some(0)` for a trivial p-part and `None`
    /// when `V` is not nilpotent.
    pub fn height(&self) -> Option<u32> {
        let m = &self.p_part;
        if m.is_zero() {
            return Some(0);
        }
        for a in 1..=m.length() {
            if m.word_map(0, a).matrix.is_zero() {
                return Some(a);
            }
        }
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub order_p_exponent: u32,
    pub order_coprime: u64,
    pub height: Option<u32>,
    /// Lengths of the four cells, in the order of [`crate::dieudonne::Cell::ALL`].
    pub cells: [u32; 4],
    /// Atom display names when the decomposition was resolved.
    pub atoms: Option<Vec<String>>,
    pub height_one: Option<HeightOneData>,
}

const ATOM_SEARCH_MAX_LENGTH: u32 = 6;

fn candidates(cell: usize, len: u32) -> Vec<Atom> {
    let mut out = Vec::new();
    for a in 1..=len {
        match cell {
            0 => out.push(Atom::Alpha(a)),
            1 => out.push(Atom::Mu(a)),
            2 => out.push(Atom::Zmod(a)),
            _ => {}
        }
    }
    if cell == 0 && len >= 2 {
        out.push(Atom::SsKernel);
    }
    out
}

fn atom_len(a: Atom) -> u32 {
    match a {
        Atom::Mu(x) | Atom::Zmod(x) | Atom::Alpha(x) => x,
        Atom::SsKernel => 2,
        Atom::ZmodCoprime(_) => 0,
    }
}

/// Multisets of candidates (nonincreasing index) with total length `len`.
fn multisets(
    cands: &[Atom],
    len: u32,
    start: usize,
    acc: &mut Vec<Atom>,
    out: &mut Vec<Vec<Atom>>,
) {
    if len == 0 {
        out.push(acc.clone());
        return;
    }
    for i in start..cands.len() {
        let l = atom_len(cands[i]);
        if l <= len {
            acc.push(cands[i]);
            multisets(cands, len - l, i, acc, out);
            acc.pop();
        }
    }
}

fn decompose_cell(field: FieldSpec, cell: usize, m: &DieudonneModule) -> Result<Option<Vec<Atom>>> {
    let len = m.length();
    if len == 0 {
        return Ok(Some(vec![]));
    }
    if len > ATOM_SEARCH_MAX_LENGTH {
        return Ok(None);
    }
    let cands = candidates(cell, len);
    let mut combos = Vec::new();
    multisets(&cands, len, 0, &mut Vec::new(), &mut combos);
    for combo in combos {
        let mut sum = DieudonneModule::zero(field);
        for a in &combo {
            sum = sum.direct_sum(&gs_atom(field, *a)?.p_part)?;
        }
        if module_iso_test(&sum, m)? == IsoOutcome::Iso {
            return Ok(Some(combo));
        }
    }
    Ok(None)
}

pub fn gs_classify(g: &GroupScheme) -> Result<Classification> {
    let field = g.field();
    let (pe, c) = g.order();
    let height = g.height();
    let split = dm_fourway(&g.p_part)?;
    let mut atoms = Some(Vec::new());
    for (idx, part) in split.parts.iter().enumerate() {
        match decompose_cell(field, idx, part)? {
            Some(list) => {
                if let Some(acc) = atoms.as_mut() {
                    acc.extend(list.into_iter().map(|a| atom_label(field, a)));
                }
            }
            None => atoms = None,
        }
    }
    if let Some(acc) = atoms.as_mut() {
        for &d in &g.etale_coprime {
            acc.push(atom_label(field, Atom::ZmodCoprime(d)));
        }
    }
    let height_one = if height == Some(1) {
        let m = &g.p_part;
        let r = m.ring();
        let rho = (0..m.rank())
            .map(|i| {
                (0..m.rank())
                    .map(|j| r.residue(&m.f_matrix().get(i, j)))
                    .collect()
            })
            .collect();
        Some(HeightOneData { field, rho })
    } else {
        None
    };
    Ok(Classification {
        order_p_exponent: pe,
        order_coprime: c,
        height,
        cells: split.lengths(),
        atoms,
        height_one,
    })
}

/// A random module of length at most `max_length`: a sum of atoms and
/// height-one pieces, possibly divided by the D-submodule spanned by a random
/// vector, in a random basis. Used by property tests.
pub fn random_module<R: rand::Rng + ?Sized>(
    field: FieldSpec,
    max_length: u32,
    rng: &mut R,
) -> Result<DieudonneModule> {
    let budget = max_length + rng.gen_range(0..=2u32);
    let mut m = DieudonneModule::zero(field);
    let mut left = budget;
    while left > 0 {
        let piece = match rng.gen_range(0..5) {
            0 => gs_atom(field, Atom::Mu(rng.gen_range(1..=left.min(3))))?.p_part,
            1 => gs_atom(field, Atom::Zmod(rng.gen_range(1..=left.min(3))))?.p_part,
            2 => gs_atom(field, Atom::Alpha(rng.gen_range(1..=left.min(3))))?.p_part,
            3 if left >= 2 => gs_atom(field, Atom::SsKernel)?.p_part,
            _ => {
                let d = rng.gen_range(1..=left.min(2)) as usize;
                let rho = (0..d)
                    .map(|_| (0..d).map(|_| field.random(rng)).collect())
                    .collect();
                gs_height_one(&HeightOneData { field, rho })?.p_part
            }
        };
        left -= piece.length();
        m = m.direct_sum(&piece)?;
    }
    if m.length() > max_length || rng.gen_bool(0.5) {
        m = quotient_by_random_cyclic(&m, max_length, rng)?;
    }
    random_basis(&m, rng)
}

fn quotient_by_random_cyclic<R: rand::Rng + ?Sized>(
    m: &DieudonneModule,
    max_length: u32,
    rng: &mut R,
) -> Result<DieudonneModule> {
    let r = m.ring().clone();
    for _ in 0..16 {
        let x = m.reduce(&(0..m.rank()).map(|_| r.random(rng)).collect::<Vec<_>>());
        let mut g = Matrix::from_columns(&r, &[x], m.rank());
        let mut len = u32::MAX;
        loop {
            let sub = crate::linalg::submodule(m.profile(), &g);
            let l: u32 = sub.profile.iter().sum();
            if l == len {
                break;
            }
            len = l;
            let mut cols = Vec::new();
            for i in 0..sub.embed.cols() {
                let y = sub.embed.column(i);
                cols.push(m.apply_f(&y));
                cols.push(m.apply_v(&y));
                cols.push(y);
            }
            g = Matrix::from_columns(&r, &cols, m.rank());
        }
        let (sub, _) = m.submodule(&g)?;
        if m.length() - sub.length() <= max_length {
            return Ok(m.quotient(&g)?.0);
        }
    }
    // the quotient by everything is zero
    Ok(DieudonneModule::zero(m.field()))
}

/// The same module in a random profile-respecting basis.
pub fn random_basis<R: rand::Rng + ?Sized>(
    m: &DieudonneModule,
    rng: &mut R,
) -> Result<DieudonneModule> {
    let r = m.ring().clone();
    let e = m.profile();
    let n = e.len();
    for _ in 0..16 {
        // entry (i, j) maps W_{e_j} to W_{e_i}: divisible by p^{e_i - e_j}
        let g = Matrix::from_fn(&r, n, n, |i, j| {
            let shift = e[i].saturating_sub(e[j]);
            r.reduce(&r.mul(&r.random(rng), &r.p_pow(shift)), e[i])
        });
        if let Some(g_inv) = crate::linalg::inverse(&g) {
            return m.change_basis(&g, &g_inv);
        }
    }
    Ok(m.clone())
}
