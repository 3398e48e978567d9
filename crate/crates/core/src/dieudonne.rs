//! Finite-length Dieudonne modules `(M, F, V)` with `F` sigma-linear,
//! `V` sigma^{-1}-linear and `FV = VF = p`.
//!
//! The underlying module is `(+)_i W_{e_i}(k)` on a fixed basis. `F` and `V`
//! are stored as matrices (column `j` is the image of basis vector `j`) with
//! entries reduced modulo `p^{e_row}`. Every module lives over `W_m(k)` with
//! `m = max(e_i)`, so the same module has a single representation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::galois::{WittRing, W};
use crate::linalg::{self, check_annihilators, ModuleProfile, SemilinearMap};
use crate::matrix::{reduce_vec, Matrix};

#[derive(Clone, PartialEq, Eq)]
pub struct DieudonneModule {
    ring: Arc<WittRing>,
    profile: Vec<u32>,
    f: Matrix,
    v: Matrix,
}

impl fmt::Debug for DieudonneModule {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("DieudonneModule")
            .field("field", &self.field())
            .field("profile", &self.profile)
            .field("F", &self.f)
            .field("V", &self.v)
            .finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Word {
    F(u32),
    V(u32),
}

fn precision_of(profile: &[u32]) -> u32 {
    profile.iter().copied().max().unwrap_or(1).max(1)
}

pub fn dm_new(
    profile: &ModuleProfile,
    f: &SemilinearMap,
    v: &SemilinearMap,
) -> Result<DieudonneModule> {
    if f.twist != 1 {
        return Err(Error::TwistViolation(format!(
            "F has twist {}, expected 1",
            f.twist
        )));
    }
    if v.twist != -1 {
        return Err(Error::TwistViolation(format!(
            "V has twist {}, expected -1",
            v.twist
        )));
    }
    DieudonneModule::new(profile.field, profile.exps.clone(), &f.matrix, &v.matrix)
}

impl DieudonneModule {
    /// Validates and normalizes `(profile, F, V)`.
    pub fn new(field: FieldSpec, profile: Vec<u32>, f: &Matrix, v: &Matrix) -> Result<Self> {
        let r = profile.len();
        if let Some(&e) = profile.iter().find(|&&e| e == 0) {
            return Err(Error::Shape(format!("profile entry {e} must be >= 1")));
        }
        for (name, mat) in [("F", f), ("V", v)] {
            if mat.rows() != r || mat.cols() != r {
                return Err(Error::Shape(format!(
                    "{name} is {}x{}, expected {r}x{r}",
                    mat.rows(),
                    mat.cols()
                )));
            }
            if mat.ring().field() != field {
                return Err(Error::FieldMismatch);
            }
        }
        let ring = WittRing::get(field, precision_of(&profile))?;
        let f = f.coerce(&ring);
        let v = v.coerce(&ring);
        check_annihilators(&f, &profile, &profile)
            .map_err(|e| Error::AnnihilatorViolation(format!("F: {e}")))?;
        check_annihilators(&v, &profile, &profile)
            .map_err(|e| Error::AnnihilatorViolation(format!("V: {e}")))?;
        let f = f.reduce_rows(&profile);
        let v = v.reduce_rows(&profile);
        let p_id = Matrix::identity(&ring, r).scale(&ring.p_pow(1));
        let p_id = p_id.reduce_rows(&profile);
        let fv = f.mul(&v.sigma(1)).reduce_rows(&profile);
        if fv != p_id {
            return Err(Error::RelationViolation("FV != p".into()));
        }
        let vf = v.mul(&f.sigma(-1)).reduce_rows(&profile);
        if vf != p_id {
            return Err(Error::RelationViolation("VF != p".into()));
        }
        Ok(DieudonneModule {
            ring,
            profile,
            f,
            v,
        })
    }

    pub fn zero(field: FieldSpec) -> Self {
        let ring = WittRing::get(field, 1).expect("W_1 always fits");
        DieudonneModule {
            f: Matrix::zeros(&ring, 0, 0),
            v: Matrix::zeros(&ring, 0, 0),
            ring,
            profile: Vec::new(),
        }
    }

    pub fn ring(&self) -> &Arc<WittRing> {
        &self.ring
    }

    pub fn field(&self) -> FieldSpec {
        self.ring.field()
    }

    pub fn profile(&self) -> &[u32] {
        &self.profile
    }

    pub fn module_profile(&self) -> ModuleProfile {
        ModuleProfile::new(self.field(), self.profile.clone())
    }

    pub fn rank(&self) -> usize {
        self.profile.len()
    }

    pub fn f_matrix(&self) -> &Matrix {
        &self.f
    }

    pub fn v_matrix(&self) -> &Matrix {
        &self.v
    }

    pub fn f_map(&self) -> SemilinearMap {
        self.endo(self.f.clone(), 1)
    }

    pub fn v_map(&self) -> SemilinearMap {
        self.endo(self.v.clone(), -1)
    }

    fn endo(&self, m: Matrix, twist: i64) -> SemilinearMap {
        SemilinearMap {
            matrix: m,
            twist,
            src: self.profile.clone(),
            tgt: self.profile.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.profile.is_empty()
    }

    pub fn length(&self) -> u32 {
        linalg::length(&self.profile)
    }

    /// Order as `(p, exponent)`.
    pub fn order(&self) -> (u32, u32) {
        (self.ring.p(), self.ring.n() as u32 * self.length())
    }

    /// `F^i V^j` as a semilinear endomorphism.
    pub fn word_map(&self, i: u32, j: u32) -> SemilinearMap {
        let mut acc = self.endo(Matrix::identity(&self.ring, self.rank()), 0);
        let f = self.f_map();
        let v = self.v_map();
        for _ in 0..j {
            acc = v.compose(&acc).expect("endomorphisms compose");
        }
        for _ in 0..i {
            acc = f.compose(&acc).expect("endomorphisms compose");
        }
        acc
    }

    pub fn word(&self, w: Word) -> SemilinearMap {
        match w {
            Word::F(a) => self.word_map(a, 0),
            Word::V(a) => self.word_map(0, a),
        }
    }

    pub fn apply_f(&self, x: &[W]) -> Vec<W> {
        self.f_map().apply(x)
    }

    pub fn apply_v(&self, x: &[W]) -> Vec<W> {
        self.v_map().apply(x)
    }

    pub fn reduce(&self, x: &[W]) -> Vec<W> {
        reduce_vec(&self.ring, x, &self.profile)
    }

    /// The D-submodule spanned by the columns of `gens` (which must be
    /// stable under F and V), with its embedding.
    pub fn submodule(&self, gens: &Matrix) -> Result<(DieudonneModule, Matrix)> {
        let sub = linalg::submodule(&self.profile, gens);
        let r = sub.profile.len();
        let mut fcols = Vec::with_capacity(r);
        let mut vcols = Vec::with_capacity(r);
        for i in 0..r {
            let b = sub.embed.column(i);
            let fb = sub
                .coords(&self.apply_f(&b))
                .ok_or_else(|| Error::RelationViolation("submodule not stable under F".into()))?;
            let vb = sub
                .coords(&self.apply_v(&b))
                .ok_or_else(|| Error::RelationViolation("submodule not stable under V".into()))?;
            fcols.push(fb);
            vcols.push(vb);
        }
        let f = Matrix::from_columns(&self.ring, &fcols, r);
        let v = Matrix::from_columns(&self.ring, &vcols, r);
        let dm = DieudonneModule::new(self.field(), sub.profile.clone(), &f, &v)?;
        Ok((dm, sub.embed))
    }

    /// `M / <gens>` with the projection matrix (rows give coordinates).
    pub fn quotient(&self, gens: &Matrix) -> Result<(DieudonneModule, Matrix)> {
        let q = linalg::quotient(&self.profile, gens);
        let r = q.profile.len();
        let mut fcols = Vec::with_capacity(r);
        let mut vcols = Vec::with_capacity(r);
        for i in 0..r {
            let s = q.section.column(i);
            fcols.push(q.project(&self.apply_f(&s)));
            vcols.push(q.project(&self.apply_v(&s)));
        }
        let f = Matrix::from_columns(&self.ring, &fcols, r);
        let v = Matrix::from_columns(&self.ring, &vcols, r);
        let dm = DieudonneModule::new(self.field(), q.profile.clone(), &f, &v)?;
        Ok((dm, q.proj))
    }

    pub fn direct_sum(&self, other: &DieudonneModule) -> Result<DieudonneModule> {
        if self.field() != other.field() {
            return Err(Error::FieldMismatch);
        }
        let mut profile = self.profile.clone();
        profile.extend_from_slice(&other.profile);
        let ring = WittRing::get(self.field(), precision_of(&profile))?;
        let (a, b) = (self.rank(), other.rank());
        let block = |x: &Matrix, y: &Matrix| {
            let (x, y) = (x.coerce(&ring), y.coerce(&ring));
            Matrix::from_fn(&ring, a + b, a + b, |i, j| match (i < a, j < a) {
                (true, true) => x.get(i, j),
                (false, false) => y.get(i - a, j - a),
                _ => ring.zero(),
            })
        };
        DieudonneModule::new(
            self.field(),
            profile,
            &block(&self.f, &other.f),
            &block(&self.v, &other.v),
        )
    }

    /// Changes basis by the invertible matrix `g` (columns are the new basis
    /// vectors in old coordinates); the profile must be preserved.
    pub fn change_basis(&self, g: &Matrix, g_inv: &Matrix) -> Result<DieudonneModule> {
        let f = g_inv.mul(&self.f).mul(&g.sigma(1));
        let v = g_inv.mul(&self.v).mul(&g.sigma(-1));
        DieudonneModule::new(self.field(), self.profile.clone(), &f, &v)
    }
}

pub fn dm_direct_sum(ms: &[DieudonneModule], field: FieldSpec) -> Result<DieudonneModule> {
    ms.iter()
        .try_fold(DieudonneModule::zero(field), |acc, m| acc.direct_sum(m))
}

/// Dual module `Hom_W(M, K/W)` on the dual basis.
pub fn dm_dual(m: &DieudonneModule) -> DieudonneModule {
    let r = &m.ring;
    let e = &m.profile;
    let n = m.rank();
    let shift = |x: W, from: u32, to: u32| -> W {
        // multiply by p^{to - from}, dividing exactly when negative
        if to >= from {
            r.mul(&x, &r.p_pow(to - from))
        } else if r.val(&x) >= from - to {
            r.div_p_pow(&x, from - to)
        } else {
            r.zero()
        }
    };
    let fd = Matrix::from_fn(r, n, n, |i, l| {
        shift(r.sigma(&m.v.get(l, i), 1), e[l], e[i])
    });
    let vd = Matrix::from_fn(r, n, n, |i, l| {
        shift(r.sigma(&m.f.get(l, i), -1), e[l], e[i])
    });
    DieudonneModule::new(m.field(), e.clone(), &fd, &vd).expect("dual of a valid module is valid")
}

pub fn dm_word_kernel(m: &DieudonneModule, w: Word) -> Result<DieudonneModule> {
    Ok(dm_word_kernel_embedded(m, w)?.0)
}

pub fn dm_word_kernel_embedded(m: &DieudonneModule, w: Word) -> Result<(DieudonneModule, Matrix)> {
    check_word(w)?;
    let (_, sub) = linalg::semilinear_kernel(&m.word(w));
    m.submodule(&sub.embed)
}

pub fn dm_word_image_embedded(m: &DieudonneModule, w: Word) -> Result<(DieudonneModule, Matrix)> {
    check_word(w)?;
    let t = m.word(w);
    m.submodule(&t.matrix)
}

pub fn dm_word_cokernel(m: &DieudonneModule, w: Word) -> Result<DieudonneModule> {
    check_word(w)?;
    let t = m.word(w);
    Ok(m.quotient(&t.matrix)?.0)
}

fn check_word(w: Word) -> Result<()> {
    match w {
        Word::F(0) | Word::V(0) => Err(Error::BadParameter("word exponent must be >= 1".into())),
        _ => Ok(()),
    }
}

pub fn dm_length(m: &DieudonneModule) -> u32 {
    m.length()
}

pub fn dm_order(m: &DieudonneModule) -> (u32, u32) {
    m.order()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cell {
    ConnectedUnipotent,
    ConnectedMultiplicative,
    EtaleUnipotent,
    EtaleMultiplicative,
}

impl Cell {
    pub const ALL: [Cell; 4] = [
        Cell::ConnectedUnipotent,
        Cell::ConnectedMultiplicative,
        Cell::EtaleUnipotent,
        Cell::EtaleMultiplicative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Cell::ConnectedUnipotent => "connected-unipotent",
            Cell::ConnectedMultiplicative => "connected-multiplicative",
            Cell::EtaleUnipotent => "etale-unipotent",
            Cell::EtaleMultiplicative => "etale-multiplicative",
        }
    }

    /// Cell of the dual: connected and etale swap, as do unipotent and
    /// multiplicative.
    pub fn dual(self) -> Cell {
        match self {
            Cell::ConnectedUnipotent => Cell::EtaleMultiplicative,
            Cell::ConnectedMultiplicative => Cell::EtaleUnipotent,
            Cell::EtaleUnipotent => Cell::ConnectedMultiplicative,
            Cell::EtaleMultiplicative => Cell::ConnectedUnipotent,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FourWaySplit {
    /// Summands in the order of [`Cell::ALL`].
    pub parts: [DieudonneModule; 4],
    /// Column `j` of `embeddings[c]` is basis vector `j` of part `c` in the
    /// coordinates of the input.
    pub embeddings: [Matrix; 4],
}

impl FourWaySplit {
    pub fn part(&self, c: Cell) -> &DieudonneModule {
        &self.parts[c as usize]
    }

    pub fn lengths(&self) -> [u32; 4] {
        [0, 1, 2, 3].map(|i| self.parts[i].length())
    }
}

fn fitting(m: &DieudonneModule, use_v: bool) -> Result<[(DieudonneModule, Matrix); 2]> {
    let l = m.length().max(1);
    let w = if use_v { Word::V(l) } else { Word::F(l) };
    Ok([
        dm_word_kernel_embedded(m, w)?,
        dm_word_image_embedded(m, w)?,
    ])
}

/// Connected/etale split by `V`, each refined by the unipotent/multiplicative
/// split by `F`.
pub fn dm_fourway(m: &DieudonneModule) -> Result<FourWaySplit> {
    let [conn, et] = fitting(m, true)?;
    let mut parts = Vec::with_capacity(4);
    let mut embeds = Vec::with_capacity(4);
    for (outer, outer_emb) in [conn, et] {
        for (inner, inner_emb) in fitting(&outer, false)? {
            let emb = outer_emb.mul(&inner_emb.coerce(outer_emb.ring()));
            embeds.push(emb.reduce_rows(m.profile()));
            parts.push(inner);
        }
    }
    let parts: [DieudonneModule; 4] = parts.try_into().expect("four parts");
    let embeddings: [Matrix; 4] = embeds.try_into().expect("four embeddings");
    Ok(FourWaySplit { parts, embeddings })
}

/// A `W`-linear map between Dieudonne modules, as a matrix from the source
/// basis to the target basis.
#[derive(Clone, Debug)]
pub struct DmMap {
    pub matrix: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactReport {
    /// `(position, len ker - len im)` for every interior position.
    pub defects: Vec<(usize, i64)>,
    pub exact: bool,
}

/// Checks that a map is well defined and commutes with `F` and `V`.
pub fn check_dm_map(src: &DieudonneModule, tgt: &DieudonneModule, phi: &Matrix) -> Result<Matrix> {
    if src.field() != tgt.field() || phi.ring().field() != src.field() {
        return Err(Error::FieldMismatch);
    }
    if phi.rows() != tgt.rank() || phi.cols() != src.rank() {
        return Err(Error::Shape("map shape does not match modules".into()));
    }
    let m = precision_of(src.profile()).max(precision_of(tgt.profile()));
    let ring = WittRing::get(src.field(), m)?;
    let phi = phi.coerce(&ring);
    check_annihilators(&phi, src.profile(), tgt.profile())?;
    let (fs, vs) = (src.f.coerce(&ring), src.v.coerce(&ring));
    let (ft, vt) = (tgt.f.coerce(&ring), tgt.v.coerce(&ring));
    let e = tgt.profile();
    let lhs = phi.mul(&fs).reduce_rows(e);
    let rhs = ft.mul(&phi.sigma(1)).reduce_rows(e);
    let lhs_v = phi.mul(&vs).reduce_rows(e);
    let rhs_v = vt.mul(&phi.sigma(-1)).reduce_rows(e);
    if lhs != rhs || lhs_v != rhs_v {
        return Err(Error::NotEquivariant(0));
    }
    Ok(phi.reduce_rows(e))
}

/// Exactness of `M_0 -> M_1 -> ... -> M_k`; `maps[i]` goes from `modules[i]`
/// to `modules[i + 1]`.
pub fn dm_exact_check(modules: &[DieudonneModule], maps: &[Matrix]) -> Result<ExactReport> {
    if maps.len() + 1 != modules.len() {
        return Err(Error::NotComposable(maps.len()));
    }
    let mut checked = Vec::with_capacity(maps.len());
    for (i, phi) in maps.iter().enumerate() {
        let (a, b) = (&modules[i], &modules[i + 1]);
        if phi.rows() != b.rank() || phi.cols() != a.rank() || a.field() != b.field() {
            return Err(Error::NotComposable(i));
        }
        let phi = check_dm_map(a, b, phi).map_err(|e| match e {
            Error::NotEquivariant(_) => Error::NotEquivariant(i),
            other => other,
        })?;
        checked.push(phi);
    }
    let mut defects = Vec::new();
    for pos in 1..modules.len().saturating_sub(1) {
        let mid = modules[pos].profile();
        let dst = modules[pos + 1].profile();
        let ker = linalg::kernel(&checked[pos], mid, dst).len() as i64;
        let im = linalg::image(&checked[pos - 1].coerce(checked[pos].ring()), mid).len() as i64;
        defects.push((pos, ker - im));
    }
    let exact = defects.iter().all(|&(_, d)| d == 0);
    Ok(ExactReport { defects, exact })
}
