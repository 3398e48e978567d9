//! V-adically truncated Cartier modules built from standard summands.
//!
//! * `unit(r, U)`: `W(k)^r` with `F = U sigma`, `V = p F^{-1}`;
//! * `additive(s)`: `k[[V]]^s` with `F = 0`;
//! * `formal(h)`: `E g / (F - V^h) g`, a one-dimensional formal group of
//!   height `h + 1`;
//! * `finite(M)`: a finite-length Dieudonne module.

use crate::dieudonne::{
    dm_direct_sum, dm_word_cokernel, dm_word_kernel, dm_word_kernel_embedded, DieudonneModule, Word,
};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::galois::WittRing;
use crate::iso::{module_iso_test, IsoOutcome};
use crate::linalg::{self, inverse, rank_mod_p, SemilinearMap};
use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CartierSummand {
    Unit { f_unit: Matrix },
    Additive { rank: usize },
    Formal { h: u32, mult: usize },
    Finite(DieudonneModule),
}

impl CartierSummand {
    pub fn unit(f_unit: Matrix) -> Result<Self> {
        if f_unit.rows() != f_unit.cols() || f_unit.rows() == 0 {
            return Err(Error::Shape(
                "unit summand needs a nonempty square F matrix".into(),
            ));
        }
        if rank_mod_p(&f_unit) != f_unit.rows() {
            return Err(Error::BadParameter(
                "unit summand F matrix is not invertible mod p".into(),
            ));
        }
        Ok(CartierSummand::Unit { f_unit })
    }

    /// `unit(r)` with `U = 1`.
    pub fn trivial_unit(field: FieldSpec, witt_precision: u32, rank: usize) -> Result<Self> {
        let ring = WittRing::get(field, witt_precision)?;
        Self::unit(Matrix::identity(&ring, rank))
    }

    pub fn formal(h: u32, mult: usize) -> Result<Self> {
        if h == 0 {
            return Err(Error::BadParameter("formal summand needs h >= 1".into()));
        }
        Ok(CartierSummand::Formal { h, mult })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CartierSummand::Unit { .. } => "unit",
            CartierSummand::Additive { .. } => "additive",
            CartierSummand::Formal { .. } => "formal",
            CartierSummand::Finite(_) => "finite",
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, CartierSummand::Finite(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartierModule {
    pub field: FieldSpec,
    pub summands: Vec<CartierSummand>,
    pub v_precision: u32,
    pub witt_precision: u32,
}

pub const DEFAULT_PRECISION: u32 = 6;

impl CartierModule {
    pub fn new(
        field: FieldSpec,
        summands: Vec<CartierSummand>,
        witt_precision: u32,
        v_precision: u32,
    ) -> Result<Self> {
        if v_precision == 0 || witt_precision == 0 {
            return Err(Error::BadParameter("precisions must be >= 1".into()));
        }
        for s in &summands {
            match s {
                CartierSummand::Unit { f_unit } => {
                    if f_unit.ring().field() != field {
                        return Err(Error::FieldMismatch);
                    }
                }
                CartierSummand::Finite(m)
                    if m.field() != field => {
                        return Err(Error::FieldMismatch);
                    }
                _ => {}
            }
        }
        Ok(CartierModule {
            field,
            summands,
            v_precision,
            witt_precision,
        })
    }

    pub fn zero(field: FieldSpec, witt_precision: u32, v_precision: u32) -> Self {
        CartierModule {
            field,
            summands: Vec::new(),
            v_precision,
            witt_precision,
        }
    }

    pub fn single(&self, s: CartierSummand) -> CartierModule {
        CartierModule {
            summands: vec![s],
            ..self.clone()
        }
    }

    /// Same summands at other precisions.
    pub fn with_precision(&self, witt_precision: u32, v_precision: u32) -> Result<CartierModule> {
        let ring = WittRing::get(self.field, witt_precision)?;
        let summands = self
            .summands
            .iter()
            .map(|s| match s {
                CartierSummand::Unit { f_unit } => CartierSummand::Unit {
                    f_unit: f_unit.coerce(&ring),
                },
                other => other.clone(),
            })
            .collect();
        CartierModule::new(self.field, summands, witt_precision, v_precision)
    }

    pub fn is_zero(&self) -> bool {
        self.summands.iter().all(|s| match s {
            CartierSummand::Unit { .. } => false,
            CartierSummand::Additive { rank } => *rank == 0,
            CartierSummand::Formal { mult, .. } => *mult == 0,
            CartierSummand::Finite(m) => m.is_zero(),
        })
    }

    pub fn unit_rank(&self) -> usize {
        self.summands
            .iter()
            .map(|s| match s {
                CartierSummand::Unit { f_unit } => f_unit.rows(),
                _ => 0,
            })
            .sum()
    }

    pub fn additive_rank(&self) -> usize {
        self.summands
            .iter()
            .map(|s| match s {
                CartierSummand::Additive { rank } => *rank,
                _ => 0,
            })
            .sum()
    }

    /// `(h, mult)` of the formal summands.
    pub fn formal_parts(&self) -> Vec<(u32, usize)> {
        self.summands
            .iter()
            .filter_map(|s| match s {
                CartierSummand::Formal { h, mult } => Some((*h, *mult)),
                _ => None,
            })
            .collect()
    }
}

fn unit_trunc(field: FieldSpec, f_unit: &Matrix, n: u32) -> Result<DieudonneModule> {
    let ring = WittRing::get(field, n)?;
    let u = f_unit.coerce(&ring);
    let r = u.rows();
    let u_inv =
        inverse(&u).ok_or_else(|| Error::BadParameter("unit matrix not invertible".into()))?;
    let v = u_inv.sigma(-1).scale(&ring.p_pow(1));
    DieudonneModule::new(field, vec![n; r], &u, &v)
}

fn additive_trunc(field: FieldSpec, n: u32) -> Result<DieudonneModule> {
    let ring = WittRing::get(field, 1)?;
    let n = n as usize;
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

/// `formal(h) / V^n` on the basis `V^i g`, `i < min(n, h + 1)`.
fn formal_trunc(field: FieldSpec, h: u32, n: u32) -> Result<DieudonneModule> {
    let b = n.min(h + 1) as usize;
    let profile: Vec<u32> = (0..b as u32).map(|i| (n - i).div_ceil(h + 1)).collect();
    let ring = WittRing::get(field, profile[0])?;
    let h = h as usize;
    let mut f = Matrix::zeros(&ring, b, b);
    let mut v = Matrix::zeros(&ring, b, b);
    if h < b {
        f.set(h, 0, ring.one());
        v.set(0, h, ring.p_pow(1));
    }
    for i in 1..b.min(h + 1) {
        f.set(i - 1, i, ring.p_pow(1));
    }
    for i in 0..b.saturating_sub(1) {
        v.set(i + 1, i, ring.one());
    }
    DieudonneModule::new(field, profile, &f, &v)
}

fn precision_error(what: &str, need: u32, have: u32) -> Error {
    Error::PrecisionExceeded(format!("{what} needs {need}, have {have}"))
}

/// Truncation of one summand at `V`-level `n`.
pub fn summand_trunc(
    field: FieldSpec,
    s: &CartierSummand,
    n: u32,
    witt_precision: u32,
) -> Result<DieudonneModule> {
    if n == 0 {
        return Ok(DieudonneModule::zero(field));
    }
    match s {
        CartierSummand::Unit { f_unit } => {
            if n > witt_precision {
                return Err(precision_error(
                    "unit truncation Witt length",
                    n,
                    witt_precision,
                ));
            }
            unit_trunc(field, f_unit, n)
        }
        CartierSummand::Additive { rank } => {
            let one = additive_trunc(field, n)?;
            dm_direct_sum(&vec![one; *rank], field)
        }
        CartierSummand::Formal { h, mult } => {
            let need = n.div_ceil(h + 1);
            if need > witt_precision {
                return Err(precision_error(
                    "formal truncation Witt length",
                    need,
                    witt_precision,
                ));
            }
            let one = formal_trunc(field, *h, n)?;
            dm_direct_sum(&vec![one; *mult], field)
        }
        CartierSummand::Finite(m) => {
            if m.is_zero() {
                Ok(m.clone())
            } else {
                dm_word_cokernel(m, Word::V(n))
            }
        }
    }
}

/// `M / V^n M` as a Dieudonne module.
pub fn cm_trunc(m: &CartierModule, n: u32) -> Result<DieudonneModule> {
    if n > m.v_precision {
        return Err(precision_error("truncation level", n, m.v_precision));
    }
    let parts = m
        .summands
        .iter()
        .map(|s| summand_trunc(m.field, s, n, m.witt_precision))
        .collect::<Result<Vec<_>>>()?;
    dm_direct_sum(&parts, m.field)
}

fn stable_exponent(m: &DieudonneModule) -> u32 {
    m.length().max(1)
}

/// `M[V^infinity]`: only finite summands carry V-torsion.
pub fn cm_v_torsion(m: &CartierModule) -> Result<DieudonneModule> {
    let mut parts = Vec::new();
    for s in &m.summands {
        if let CartierSummand::Finite(dm) = s {
            if !dm.is_zero() {
                parts.push(dm_word_kernel(dm, Word::V(stable_exponent(dm)))?);
            }
        }
    }
    dm_direct_sum(&parts, m.field)
}

/// `M / M[V^infinity]`.
pub fn cm_mod_v_torsion(m: &CartierModule) -> Result<CartierModule> {
    let mut summands = Vec::new();
    for s in &m.summands {
        match s {
            CartierSummand::Finite(dm) => {
                if dm.is_zero() {
                    continue;
                }
                let (_, tors) = dm_word_kernel_embedded(dm, Word::V(stable_exponent(dm)))?;
                let (q, _) = dm.quotient(&tors)?;
                if !q.is_zero() {
                    summands.push(CartierSummand::Finite(q));
                }
            }
            other => summands.push(other.clone()),
        }
    }
    Ok(CartierModule {
        summands,
        ..m.clone()
    })
}

/// Description of `colim_V M / V^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectedDm {
    pub labels: Vec<String>,
    pub unipotent_dim: usize,
    pub mult_corank: usize,
    /// `(height, multiplicity)` of one-dimensional formal summands.
    pub formal: Vec<(u32, usize)>,
    pub finite_leftover: u32,
    /// Set when some finite summand has V-torsion (which dies in the colimit).
    pub torsion_flag: bool,
    source: CartierModule,
}

impl ConnectedDm {
    /// The level-`n` term `M / V^n` of the colimit system.
    pub fn level(&self, n: u32) -> Result<DieudonneModule> {
        cm_trunc(&self.source, n)
    }
}

pub fn cm_connected_dm(m: &CartierModule) -> Result<ConnectedDm> {
    let mut labels = Vec::new();
    let (mut uni, mut mult) = (0usize, 0usize);
    let mut formal = Vec::new();
    let mut torsion_flag = false;
    for s in &m.summands {
        match s {
            CartierSummand::Unit { f_unit } => {
                mult += f_unit.rows();
                labels.push(format!("μ_{{p^∞}}-type of corank {}", f_unit.rows()));
            }
            CartierSummand::Additive { rank } => {
                uni += rank;
                labels.push(format!("Ĝ_a-type of dimension {rank}"));
            }
            CartierSummand::Formal { h, mult: c } => {
                uni += c;
                formal.push((h + 1, *c));
                labels.push(format!(
                    "1-dimensional formal group of height {} (x{c})",
                    h + 1
                ));
            }
            CartierSummand::Finite(dm) => {
                if !dm.is_zero() && !dm_word_kernel(dm, Word::V(stable_exponent(dm)))?.is_zero() {
                    torsion_flag = true;
                }
                labels.push("finite (eventually zero)".to_string());
            }
        }
    }
    Ok(ConnectedDm {
        labels,
        unipotent_dim: uni,
        mult_corank: mult,
        formal,
        finite_leftover: 0,
        torsion_flag,
        source: m.clone(),
    })
}

/// `TC_n = DM[V^n]`, computed at level `n + 1` and checked at `n + 2`.
pub fn cm_tc_n(m: &CartierModule, n: u32) -> Result<DieudonneModule> {
    if n == 0 {
        return Err(Error::BadParameter("TC_n needs n >= 1".into()));
    }
    if n + 1 > m.v_precision {
        return Err(precision_error("TC_n level", n + 1, m.v_precision));
    }
    let k1 = dm_word_kernel(&cm_trunc(m, n + 1)?, Word::V(n))?;
    if n + 2 > m.v_precision {
        return Err(Error::UnstableTruncation(format!(
            "cannot confirm TC_{n} at level {} with v_precision {}",
            n + 2,
            m.v_precision
        )));
    }
    let k2 = dm_word_kernel(&cm_trunc(m, n + 2)?, Word::V(n))?;
    match module_iso_test(&k1, &k2)? {
        IsoOutcome::Iso => Ok(k1),
        _ => Err(Error::UnstableTruncation(format!(
            "TC_{n} changes between levels"
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endo {
    MultP(u32),
    FPow(u32),
    VPow(u32),
}

impl Endo {
    fn power(self) -> u32 {
        match self {
            Endo::MultP(n) | Endo::FPow(n) | Endo::VPow(n) => n,
        }
    }

    /// The endomorphism on a Dieudonne module.
    pub fn on(self, m: &DieudonneModule) -> SemilinearMap {
        match self {
            Endo::FPow(n) => m.word_map(n, 0),
            Endo::VPow(n) => m.word_map(0, n),
            Endo::MultP(n) => {
                let r = m.ring();
                let mat = Matrix::identity(r, m.rank()).scale(&r.p_pow(n));
                SemilinearMap {
                    matrix: mat.reduce_rows(m.profile()),
                    twist: 0,
                    src: m.profile().to_vec(),
                    tgt: m.profile().to_vec(),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtensionPolicy {
    Split,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExtensionStatus {
    Canonical,
    SplitAssumed,
    Undetermined,
}

impl ExtensionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ExtensionStatus::Canonical => "canonical",
            ExtensionStatus::SplitAssumed => "split-assumed",
            ExtensionStatus::Undetermined => "undetermined",
        }
    }
}

/// Kernel of an endomorphism commuting with `F` and `V`.
pub fn endo_kernel(m: &DieudonneModule, e: Endo) -> Result<DieudonneModule> {
    if m.is_zero() {
        return Ok(m.clone());
    }
    let (_, sub) = linalg::semilinear_kernel(&e.on(m));
    Ok(m.submodule(&sub.embed)?.0)
}

pub fn endo_cokernel(m: &DieudonneModule, e: Endo) -> Result<DieudonneModule> {
    if m.is_zero() {
        return Ok(m.clone());
    }
    Ok(m.quotient(&e.on(m).matrix)?.0)
}

/// Graded pieces of `H(C(f))` and their assembly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexH {
    pub coker: DieudonneModule,
    pub ker: DieudonneModule,
    pub assembled: Option<DieudonneModule>,
    pub status: ExtensionStatus,
}

pub fn assemble(
    sub: &DieudonneModule,
    quot: &DieudonneModule,
    policy: ExtensionPolicy,
) -> Result<(Option<DieudonneModule>, ExtensionStatus)> {
    if sub.is_zero() {
        return Ok((Some(quot.clone()), ExtensionStatus::Canonical));
    }
    if quot.is_zero() {
        return Ok((Some(sub.clone()), ExtensionStatus::Canonical));
    }
    match policy {
        ExtensionPolicy::Split => Ok((Some(sub.direct_sum(quot)?), ExtensionStatus::SplitAssumed)),
        ExtensionPolicy::Undetermined => Ok((None, ExtensionStatus::Undetermined)),
    }
}

/// `0 -> coker(f on M_prev) -> H(C(f)) -> ker(f on M_cur) -> 0`, computed on
/// the truncations at the stored `V`-precision.
pub fn cm_complex_h(
    f: Endo,
    m_prev: &CartierModule,
    m_cur: &CartierModule,
    policy: ExtensionPolicy,
) -> Result<ComplexH> {
    if f.power() == 0 {
        return Err(Error::BadParameter(
            "endomorphism power must be >= 1".into(),
        ));
    }
    let coker = endo_cokernel(&cm_trunc(m_prev, m_prev.v_precision)?, f)?;
    let ker = endo_kernel(&cm_trunc(m_cur, m_cur.v_precision)?, f)?;
    let (assembled, status) = assemble(&coker, &ker, policy)?;
    Ok(ComplexH {
        coker,
        ker,
        assembled,
        status,
    })
}

/// `H^j(X, CW O_X)`: the colimit part of `wo_j` modulo torsion together with
/// the torsion `wo_{j+1}[V^infinity]`.
#[derive(Clone, Debug)]
pub struct CwLevel {
    pub colim: CartierModule,
    pub torsion: DieudonneModule,
}

impl CwLevel {
    pub fn new(wo_j: &CartierModule, wo_next: Option<&CartierModule>) -> Result<Self> {
        let colim = cm_mod_v_torsion(wo_j)?;
        let colim = CartierModule {
            summands: colim
                .summands
                .into_iter()
                .filter(|s| !s.is_finite())
                .collect(),
            ..colim
        };
        let torsion = match wo_next {
            Some(w) => cm_v_torsion(w)?,
            None => DieudonneModule::zero(wo_j.field),
        };
        Ok(CwLevel { colim, torsion })
    }
}

/// A finite Dieudonne module plus the dimension of a vector-group part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Piece {
    pub dm: DieudonneModule,
    pub vector_dim: usize,
}

fn colim_kernel(level: &CwLevel, f: Endo) -> Result<Piece> {
    let c = &level.colim;
    let n = f.power();
    let mut parts = Vec::new();
    let mut vector_dim = 0;
    for s in &c.summands {
        let trunc_at = |k: u32| summand_trunc(c.field, s, k, c.witt_precision);
        let check = |k: u32| {
            if k > c.v_precision {
                Err(precision_error("colimit kernel level", k, c.v_precision))
            } else {
                Ok(k)
            }
        };
        match (s, f) {
            (CartierSummand::Unit { .. }, Endo::FPow(_)) => {}
            (CartierSummand::Unit { .. }, _) => parts.push(trunc_at(check(n)?)?),
            (CartierSummand::Additive { rank }, Endo::VPow(_)) => {
                let _ = rank;
                parts.push(trunc_at(check(n)?)?);
            }
            (CartierSummand::Additive { rank }, _) => vector_dim += rank,
            (CartierSummand::Formal { h, .. }, Endo::FPow(_)) => {
                parts.push(trunc_at(check(h * n)?)?)
            }
            (CartierSummand::Formal { .. }, Endo::VPow(_)) => parts.push(trunc_at(check(n)?)?),
            (CartierSummand::Formal { h, .. }, Endo::MultP(_)) => {
                parts.push(trunc_at(check(n * (h + 1))?)?)
            }
            (CartierSummand::Finite(_), _) => {}
        }
    }
    parts.push(endo_kernel(&level.torsion, f)?);
    Ok(Piece {
        dm: dm_direct_sum(&parts, c.field)?,
        vector_dim,
    })
}

fn colim_cokernel(level: &CwLevel, f: Endo) -> Result<Piece> {
    let c = &level.colim;
    let mut vector_dim = 0;
    for s in &c.summands {
        if let (CartierSummand::Additive { rank }, Endo::FPow(_) | Endo::MultP(_)) = (s, f) {
            vector_dim += rank;
        }
    }
    Ok(Piece {
        dm: endo_cokernel(&level.torsion, f)?,
        vector_dim,
    })
}

/// Graded pieces of `H^j(X, CW O_X(f))` from the CW levels `j - 1` and `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CwComplexH {
    pub coker: Piece,
    pub ker: Piece,
    pub assembled: Option<DieudonneModule>,
    pub status: ExtensionStatus,
}

pub fn cw_complex_h(
    f: Endo,
    prev: Option<&CwLevel>,
    cur: &CwLevel,
    policy: ExtensionPolicy,
) -> Result<CwComplexH> {
    if f.power() == 0 {
        return Err(Error::BadParameter(
            "endomorphism power must be >= 1".into(),
        ));
    }
    let field = cur.colim.field;
    let coker = match prev {
        Some(p) => colim_cokernel(p, f)?,
        None => Piece {
            dm: DieudonneModule::zero(field),
            vector_dim: 0,
        },
    };
    let ker = colim_kernel(cur, f)?;
    let (assembled, status) = assemble(&coker.dm, &ker.dm, policy)?;
    Ok(CwComplexH {
        coker,
        ker,
        assembled,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_scheme::{gs_atom, Atom};

    fn k(p: u32, n: usize) -> FieldSpec {
        FieldSpec::new(p, n, None).unwrap()
    }

    fn atom(f: FieldSpec, a: Atom) -> DieudonneModule {
        gs_atom(f, a).unwrap().p_part
    }

    fn cm(f: FieldSpec, s: Vec<CartierSummand>) -> CartierModule {
        CartierModule::new(f, s, DEFAULT_PRECISION, DEFAULT_PRECISION).unwrap()
    }

    fn iso(a: &DieudonneModule, b: &DieudonneModule) -> bool {
        module_iso_test(a, b).unwrap() == IsoOutcome::Iso
    }

    #[test]
    fn additive_truncation_is_shift() {
        let f = k(3, 1);
        let m = cm(f, vec![CartierSummand::Additive { rank: 1 }]);
        let t = cm_trunc(&m, 3).unwrap();
        assert_eq!(t.profile(), &[1, 1, 1]);
        assert!(t.f_matrix().is_zero());
        let r = t.ring();
        assert_eq!(t.v_matrix().get(1, 0), r.one());
        assert_eq!(t.v_matrix().get(2, 1), r.one());
        assert!(r.is_zero(&t.v_matrix().get(0, 2)));
    }

    #[test]
    fn unit_truncation_is_mu_p2() {
        let f = k(2, 2);
        let u = CartierSummand::trivial_unit(f, DEFAULT_PRECISION, 1).unwrap();
        let t = cm_trunc(&cm(f, vec![u]), 2).unwrap();
        assert!(iso(&t, &atom(f, Atom::Mu(2))));
    }

    #[test]
    fn formal_one_truncation_is_ss_kernel() {
        for p in [2, 3] {
            let f = k(p, 1);
            let m = cm(f, vec![CartierSummand::formal(1, 1).unwrap()]);
            let t = cm_trunc(&m, 2).unwrap();
            assert_eq!(t.profile(), &[1, 1]);
            assert!(iso(&t, &atom(f, Atom::SsKernel)));
        }
    }

    #[test]
    fn truncation_beyond_precision() {
        let f = k(2, 1);
        let u = CartierSummand::trivial_unit(f, 2, 1).unwrap();
        let m = CartierModule::new(f, vec![u], 2, 4).unwrap();
        assert!(matches!(cm_trunc(&m, 3), Err(Error::PrecisionExceeded(_))));
        assert!(matches!(cm_trunc(&m, 5), Err(Error::PrecisionExceeded(_))));
    }

    #[test]
    fn torsion_is_summandwise() {
        let f = k(3, 1);
        let a = cm(f, vec![CartierSummand::Additive { rank: 1 }]);
        assert!(cm_v_torsion(&a).unwrap().is_zero());
        let mu = atom(f, Atom::Mu(1));
        let m = cm(f, vec![CartierSummand::Finite(mu.clone())]);
        assert!(iso(&cm_v_torsion(&m).unwrap(), &mu));
        assert!(cm_mod_v_torsion(&m).unwrap().is_zero());
        let al = atom(f, Atom::Alpha(1));
        let u = CartierSummand::trivial_unit(f, DEFAULT_PRECISION, 1).unwrap();
        let m = cm(f, vec![u, CartierSummand::Finite(al.clone())]);
        assert!(iso(&cm_v_torsion(&m).unwrap(), &al));
        assert_eq!(cm_mod_v_torsion(&m).unwrap().unit_rank(), 1);
    }

    #[test]
    fn connected_descriptions() {
        let f = k(2, 1);
        let u = CartierSummand::trivial_unit(f, DEFAULT_PRECISION, 1).unwrap();
        let c = cm_connected_dm(&cm(f, vec![u])).unwrap();
        assert_eq!(
            (c.mult_corank, c.unipotent_dim, c.finite_leftover),
            (1, 0, 0)
        );
        let c = cm_connected_dm(&cm(f, vec![CartierSummand::Additive { rank: 1 }])).unwrap();
        assert_eq!((c.mult_corank, c.unipotent_dim), (0, 1));
        let c = cm_connected_dm(&cm(f, vec![CartierSummand::formal(1, 1).unwrap()])).unwrap();
        assert_eq!(c.formal, vec![(2, 1)]);
        assert_eq!(c.unipotent_dim, 1);
        assert!(!c.torsion_flag);
    }

    #[test]
    fn tc_n_examples() {
        let f = k(3, 1);
        let u = CartierSummand::trivial_unit(f, DEFAULT_PRECISION, 1).unwrap();
        let m = cm(f, vec![u]);
        assert!(iso(&cm_tc_n(&m, 1).unwrap(), &atom(f, Atom::Mu(1))));
        assert!(matches!(cm_tc_n(&m, 0), Err(Error::BadParameter(_))));
        let a = cm(f, vec![CartierSummand::Additive { rank: 1 }]);
        let t = cm_tc_n(&a, 2).unwrap();
        assert!(iso(&t, &additive_trunc(f, 2).unwrap()));
        // margin level n + 2 unavailable
        let short = CartierModule::new(f, a.summands.clone(), 6, 3).unwrap();
        assert!(matches!(
            cm_tc_n(&short, 2),
            Err(Error::UnstableTruncation(_))
        ));
        assert!(matches!(
            cm_tc_n(&short, 3),
            Err(Error::PrecisionExceeded(_))
        ));
    }

    #[test]
    fn colimit_level_matches_tc_n() {
        let f = k(2, 1);
        let u = CartierSummand::trivial_unit(f, DEFAULT_PRECISION, 1).unwrap();
        let m = cm(f, vec![u]);
        let c = cm_connected_dm(&m).unwrap();
        for n in 1..=3 {
            assert!(iso(&c.level(n).unwrap(), &cm_tc_n(&m, n).unwrap()));
        }
    }

    #[test]
    fn complex_h_examples() {
        let f = k(2, 1);
        let zero = CartierModule::zero(f, DEFAULT_PRECISION, DEFAULT_PRECISION);
        let u = cm(
            f,
            vec![CartierSummand::trivial_unit(f, DEFAULT_PRECISION, 1).unwrap()],
        );
        let h = cm_complex_h(Endo::VPow(1), &zero, &u, ExtensionPolicy::Undetermined).unwrap();
        assert_eq!(h.status, ExtensionStatus::Canonical);
        assert!(iso(h.assembled.as_ref().unwrap(), &atom(f, Atom::Mu(1))));

        let a = cm(f, vec![CartierSummand::Additive { rank: 1 }]);
        let h = cm_complex_h(Endo::FPow(1), &zero, &a, ExtensionPolicy::Split).unwrap();
        assert_eq!(h.ker.length(), DEFAULT_PRECISION);

        let h = cm_complex_h(Endo::MultP(1), &u, &u, ExtensionPolicy::Undetermined).unwrap();
        assert_eq!((h.coker.length(), h.ker.length()), (1, 1));
        assert_eq!(h.status, ExtensionStatus::Undetermined);
        assert!(h.assembled.is_none());
        let h = cm_complex_h(Endo::MultP(1), &u, &u, ExtensionPolicy::Split).unwrap();
        assert_eq!(h.status, ExtensionStatus::SplitAssumed);
        assert_eq!(h.assembled.unwrap().length(), 2);
    }

    #[test]
    fn truncation_compatibility() {
        let f = k(2, 1);
        let summands = vec![
            CartierSummand::trivial_unit(f, DEFAULT_PRECISION, 1).unwrap(),
            CartierSummand::Additive { rank: 1 },
            CartierSummand::formal(1, 1).unwrap(),
            CartierSummand::formal(2, 1).unwrap(),
            CartierSummand::Finite(atom(f, Atom::SsKernel)),
        ];
        for s in summands {
            let m = cm(f, vec![s]);
            for n in 1..=4 {
                let lower = cm_trunc(&m, n).unwrap();
                let upper = cm_trunc(&m, n + 1).unwrap();
                let red = dm_word_cokernel(&upper, Word::V(n)).unwrap();
                assert!(iso(&lower, &red), "{} at {n}", m.summands[0].kind());
            }
        }
    }

    #[test]
    fn cw_kernels_of_formal_summand() {
        let f = k(2, 1);
        let m = cm(f, vec![CartierSummand::formal(1, 1).unwrap()]);
        let level = CwLevel::new(&m, None).unwrap();
        let h = cw_complex_h(Endo::VPow(1), None, &level, ExtensionPolicy::Split).unwrap();
        assert!(iso(&h.ker.dm, &atom(f, Atom::Alpha(1))));
        let h = cw_complex_h(Endo::MultP(1), None, &level, ExtensionPolicy::Split).unwrap();
        assert!(iso(&h.ker.dm, &atom(f, Atom::SsKernel)));
    }
}
