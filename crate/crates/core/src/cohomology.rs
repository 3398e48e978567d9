//! Flat cohomology calculators driven by a geometric packet: Witt vector
//! cohomology as Cartier modules, coherent cohomology with Frobenius, and
//! `B_inf Omega^1` cohomology with the Cartier operator and boundary `d`.

use std::collections::BTreeMap;

use crate::cartier::{
    cm_connected_dm, cm_mod_v_torsion, cm_v_torsion, cw_complex_h, CartierModule, CwLevel, Endo,
    ExtensionPolicy, ExtensionStatus,
};
use crate::dieudonne::{check_dm_map, dm_direct_sum, DieudonneModule};
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::galois::{WittRing, W};
use crate::linalg::{self, rank_mod_p};
use crate::matrix::Matrix;

/// `H^i(X, O_X)` with its p-linear Frobenius (matrix `A`, twist `+1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OData {
    pub f: Matrix,
}

/// `H^i(X, B_inf Omega^1)` with the Cartier operator (twist `-1`). When not
/// `stabilized` the data is the `C`-torsion of level `dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BData {
    pub c: Matrix,
    pub stabilized: bool,
}

impl OData {
    pub fn dim(&self) -> usize {
        self.f.rows()
    }
}

impl BData {
    pub fn dim(&self) -> usize {
        self.c.rows()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeData {
    pub wo: CartierModule,
    pub o: Option<OData>,
    pub b: Option<BData>,
    /// `d : H^i(O) -> H^i(B_inf)`, shape `dim b x dim o`.
    pub d: Option<Matrix>,
    pub etale_corank: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometricPacket {
    pub field: FieldSpec,
    pub witt_precision: u32,
    pub v_precision: u32,
    pub degrees: BTreeMap<i64, DegreeData>,
    pub extension_policy: ExtensionPolicy,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub warnings: Vec<String>,
}

impl GeometricPacket {
    /// `None` for negative degrees and degrees above the top declared one
    /// (zero groups); a gap below the top is an error.
    pub fn degree(&self, i: i64) -> Result<Option<&DegreeData>> {
        let top = self.degrees.keys().next_back().copied().unwrap_or(-1);
        if i < 0 || i > top {
            return Ok(None);
        }
        self.degrees
            .get(&i)
            .map(Some)
            .ok_or(Error::MissingDegree(i))
    }

    pub fn with_precision(&self, witt_precision: u32, v_precision: u32) -> Result<GeometricPacket> {
        let mut degrees = BTreeMap::new();
        for (&i, d) in &self.degrees {
            let wo = d.wo.with_precision(witt_precision, v_precision)?;
            degrees.insert(i, DegreeData { wo, ..d.clone() });
        }
        Ok(GeometricPacket {
            witt_precision,
            v_precision,
            degrees,
            ..self.clone()
        })
    }

    fn wo(&self, i: i64) -> Result<CartierModule> {
        Ok(match self.degree(i)? {
            Some(d) => d.wo.clone(),
            None => CartierModule::zero(self.field, self.witt_precision, self.v_precision),
        })
    }

    fn a_matrix(&self, i: i64) -> Result<Matrix> {
        let ring = WittRing::get(self.field, 1)?;
        Ok(match self.degree(i)? {
            Some(d) => match &d.o {
                Some(o) => o.f.clone(),
                None => Matrix::zeros(&ring, 0, 0),
            },
            None => Matrix::zeros(&ring, 0, 0),
        })
    }

    fn cw_level(&self, j: i64) -> Result<Option<CwLevel>> {
        if j < 0 {
            return Ok(None);
        }
        let cur = self.wo(j)?;
        let next = self.wo(j + 1)?;
        Ok(Some(CwLevel::new(&cur, Some(&next))?))
    }
}

fn square(m: &Matrix, what: &str, i: i64) -> Result<()> {
    if m.rows() != m.cols() {
        return Err(Error::Shape(format!(
            "degree {i}: {what} is {}x{}, expected square",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Structural checks are fatal; cross-checks against the Witt data only warn.
pub fn packet_validate(p: &GeometricPacket) -> Result<Validation> {
    let mut warnings = Vec::new();
    for (&i, deg) in &p.degrees {
        if i < 0 {
            return Err(Error::schema(format!("degrees.{i}"), "negative degree"));
        }
        if deg.wo.field != p.field {
            return Err(Error::FieldMismatch);
        }
        let o_dim = match &deg.o {
            Some(o) => {
                square(&o.f, "o.F", i)?;
                o.dim()
            }
            None => 0,
        };
        let b_dim = match &deg.b {
            Some(b) => {
                square(&b.c, "b.C", i)?;
                b.dim()
            }
            None => 0,
        };
        if let Some(d) = &deg.d {
            if d.rows() != b_dim || d.cols() != o_dim {
                return Err(Error::Shape(format!(
                    "degree {i}: d is {}x{}, expected {b_dim}x{o_dim}",
                    d.rows(),
                    d.cols()
                )));
            }
        }
        // CW O / F = B_inf: a Ga-type part in H^i or H^{i+1} of W O makes
        // H^i(B_inf) infinite.
        let ga = |w: &CartierModule| w.additive_rank() > 0;
        let next_ga = p.degrees.get(&(i + 1)).map(|d| ga(&d.wo)).unwrap_or(false);
        if let Some(b) = &deg.b {
            let expect_infinite = ga(&deg.wo) || next_ga;
            if expect_infinite && b.stabilized && b.dim() > 0 {
                warnings.push(format!(
                    "degree {i}: b is stabilized but W O data has a Ga-type part"
                ));
            }
            if !expect_infinite && !b.stabilized {
                warnings.push(format!(
                    "degree {i}: b is a truncation but W O data has no Ga-type part"
                ));
            }
        }
    }
    Ok(Validation { warnings })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Coefficient {
    AlphaP,
    ZP,
    MuP(u32),
    Omega(u32),
    Nu(u32),
    MuPBundle,
}

impl Coefficient {
    pub fn tag(self) -> String {
        match self {
            Coefficient::AlphaP => "alpha_p".into(),
            Coefficient::ZP => "z_p".into(),
            Coefficient::MuP(1) => "mu_p".into(),
            Coefficient::MuP(n) => format!("mu_p^{n}"),
            Coefficient::Omega(n) => format!("omega_{n}"),
            Coefficient::Nu(n) => format!("nu_{n}"),
            Coefficient::MuPBundle => "mu_p(bundle)".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CohomReport {
    pub coeff: Coefficient,
    pub degree: i64,
    /// `None` when the extension of the graded pieces is undetermined.
    pub finite_part: Option<DieudonneModule>,
    /// Graded finite pieces, sub first.
    pub pieces: Vec<DieudonneModule>,
    pub vector_dim: usize,
    pub etale_rank: Option<u32>,
    pub extension_status: ExtensionStatus,
}

impl CohomReport {
    fn zero_dm(field: FieldSpec) -> DieudonneModule {
        DieudonneModule::zero(field)
    }
}

/// `(k^d, F, V)` with all exponents 1.
fn k_module(field: FieldSpec, f: &Matrix, v: &Matrix) -> Result<DieudonneModule> {
    DieudonneModule::new(field, vec![1; f.rows()], f, v)
}

fn o_module(field: FieldSpec, o: &OData) -> Result<DieudonneModule> {
    k_module(field, &o.f, &Matrix::zeros(o.f.ring(), o.dim(), o.dim()))
}

fn b_module(field: FieldSpec, b: &BData) -> Result<DieudonneModule> {
    k_module(field, &Matrix::zeros(b.c.ring(), b.dim(), b.dim()), &b.c)
}

fn alpha_power(field: FieldSpec, r: usize) -> Result<DieudonneModule> {
    let ring = WittRing::get(field, 1)?;
    let z = Matrix::zeros(&ring, r, r);
    k_module(field, &z, &z)
}

/// Graded pieces and the status for a sub/quotient pair where either side may
/// also carry a vector part.
fn status_for(sub_zero: bool, quot_zero: bool, policy: ExtensionPolicy) -> ExtensionStatus {
    if sub_zero || quot_zero {
        ExtensionStatus::Canonical
    } else {
        match policy {
            ExtensionPolicy::Split => ExtensionStatus::SplitAssumed,
            ExtensionPolicy::Undetermined => ExtensionStatus::Undetermined,
        }
    }
}

fn finite_from(
    field: FieldSpec,
    pieces: &[DieudonneModule],
    status: ExtensionStatus,
) -> Result<Option<DieudonneModule>> {
    if status == ExtensionStatus::Undetermined {
        return Ok(None);
    }
    Ok(Some(dm_direct_sum(pieces, field)?))
}

/// `R^i f_* alpha_p` from `alpha_p -> G_a -F-> G_a`.
pub fn h_alpha_p(p: &GeometricPacket, i: i64) -> Result<CohomReport> {
    p.degree(i - 1)?;
    p.degree(i)?;
    let prev = p.a_matrix(i - 1)?;
    let cur = p.a_matrix(i)?;
    let coker_dim = prev.rows() - rank_mod_p(&prev);
    let r = rank_mod_p(&cur);
    let ker_vec = cur.rows() - r;
    let fin = alpha_power(p.field, r)?;
    let status = status_for(coker_dim == 0, ker_vec == 0 && r == 0, p.extension_policy);
    let pieces = if r > 0 { vec![fin] } else { vec![] };
    Ok(CohomReport {
        coeff: Coefficient::AlphaP,
        degree: i,
        finite_part: finite_from(p.field, &pieces, status)?,
        pieces,
        vector_dim: coker_dim + ker_vec,
        etale_rank: Some(0),
        extension_status: status,
    })
}

/// Rank of `A sigma(A) ... sigma^{t-1}(A)`, `t = dim`.
pub fn stable_rank(a: &Matrix) -> usize {
    let t = a.rows();
    let mut acc = Matrix::identity(a.ring(), t);
    for k in 0..t {
        acc = acc.mul(&a.sigma(k as i64));
    }
    rank_mod_p(&acc)
}

/// `R^i f_* Z/p` from `Z/p -> G_a -(1-F)-> G_a`.
pub fn h_z_p(p: &GeometricPacket, i: i64) -> Result<CohomReport> {
    p.degree(i)?;
    let a = p.a_matrix(i)?;
    Ok(CohomReport {
        coeff: Coefficient::ZP,
        degree: i,
        finite_part: Some(CohomReport::zero_dm(p.field)),
        pieces: vec![],
        vector_dim: 0,
        etale_rank: Some(stable_rank(&a) as u32),
        extension_status: ExtensionStatus::Canonical,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OmegaNu {
    Omega,
    Nu,
}

/// Completions of `R^i f_* omega_n` (`V^n` at degree `i`) and `R^i f_* nu_n`
/// (`F^n` at degree `i + 1`).
pub fn h_omega_nu(p: &GeometricPacket, i: i64, n: u32, which: OmegaNu) -> Result<CohomReport> {
    if n == 0 {
        return Err(Error::BadParameter("n must be >= 1".into()));
    }
    if n + 2 > p.v_precision {
        return Err(Error::PrecisionExceeded(format!(
            "n = {n} needs v_precision >= {}, have {}",
            n + 2,
            p.v_precision
        )));
    }
    let (f, j, coeff) = match which {
        OmegaNu::Omega => (Endo::VPow(n), i, Coefficient::Omega(n)),
        OmegaNu::Nu => (Endo::FPow(n), i + 1, Coefficient::Nu(n)),
    };
    cw_report(p, f, j, i, coeff, None)
}

fn cw_report(
    p: &GeometricPacket,
    f: Endo,
    j: i64,
    degree: i64,
    coeff: Coefficient,
    etale_rank: Option<u32>,
) -> Result<CohomReport> {
    let prev = p.cw_level(j - 1)?;
    let cur = p.cw_level(j)?.ok_or(Error::MissingDegree(j))?;
    let h = cw_complex_h(f, prev.as_ref(), &cur, p.extension_policy)?;
    let sub_zero = h.coker.dm.is_zero() && h.coker.vector_dim == 0;
    let quot_zero = h.ker.dm.is_zero() && h.ker.vector_dim == 0;
    let status = status_for(sub_zero, quot_zero, p.extension_policy);
    let pieces: Vec<_> = [h.coker.dm, h.ker.dm]
        .into_iter()
        .filter(|m| !m.is_zero())
        .collect();
    Ok(CohomReport {
        coeff,
        degree,
        finite_part: finite_from(p.field, &pieces, status)?,
        pieces,
        vector_dim: h.coker.vector_dim + h.ker.vector_dim,
        etale_rank,
        extension_status: status,
    })
}

/// Finite part and vector dimension of `X / im(d)` for `X = H^{i-1}(B_inf)`.
/// For a truncation of level `L` the divisible part is spanned by the
/// `C`-chains `y, C y, ..., C^{L-1} y` with `C^{L-1} y != 0`.
fn b_cokernel(field: FieldSpec, b: &BData, d: &Matrix) -> Result<(DieudonneModule, usize)> {
    let bm = b_module(field, b)?;
    let dim = b.dim();
    let mut gens: Vec<Vec<W>> = (0..d.cols()).map(|j| d.column(j)).collect();
    let mut chains = 0;
    if !b.stabilized && dim > 0 {
        let top = if dim > 1 {
            bm.word_map(0, dim as u32 - 1).matrix
        } else {
            Matrix::identity(bm.ring(), dim)
        };
        let mut chosen: Vec<Vec<W>> = Vec::new();
        for l in 0..dim {
            let mut trial = chosen.clone();
            trial.push(top.column(l));
            let rank = rank_mod_p(&Matrix::from_columns(bm.ring(), &trial, dim));
            if rank == trial.len() {
                chosen = trial;
                let mut y: Vec<_> = (0..dim)
                    .map(|k| {
                        if k == l {
                            bm.ring().one()
                        } else {
                            bm.ring().zero()
                        }
                    })
                    .collect();
                for _ in 0..dim {
                    gens.push(y.clone());
                    y = bm.apply_v(&y);
                }
            }
        }
        chains = chosen.len();
    }
    if dim == 0 {
        return Ok((DieudonneModule::zero(field), 0));
    }
    let g = Matrix::from_columns(bm.ring(), &gens, dim);
    Ok((bm.quotient(&g)?.0, chains))
}

/// `(o_j, b_j, d_j)` with an empty `d` allowed when `b_j` is zero.
fn de_rham_at(
    p: &GeometricPacket,
    j: i64,
) -> Result<Option<(Option<&OData>, Option<&BData>, Option<&Matrix>)>> {
    let Some(deg) = p.degree(j)? else {
        return Ok(None);
    };
    let b_dim = deg.b.as_ref().map(|b| b.dim()).unwrap_or(0);
    let o_dim = deg.o.as_ref().map(|o| o.dim()).unwrap_or(0);
    if deg.d.is_none() && b_dim > 0 && o_dim > 0 {
        return Err(Error::MissingDeRhamData(j));
    }
    Ok(Some((deg.o.as_ref(), deg.b.as_ref(), deg.d.as_ref())))
}

fn empty_d(field: FieldSpec, rows: usize, cols: usize) -> Result<Matrix> {
    Ok(Matrix::zeros(&WittRing::get(field, 1)?, rows, cols))
}

/// The two graded pieces of `H^i(X, [O -d-> B_inf])`: `coker(d_{i-1})` with
/// `(F, V) = (0, C)` and `ker(d_i)` with `(F, V) = (F, 0)`.
pub struct DeRhamPieces {
    pub coker: DieudonneModule,
    pub vector_dim: usize,
    pub ker: DieudonneModule,
    pub ker_embed: Matrix,
}

pub fn de_rham_pieces(p: &GeometricPacket, i: i64) -> Result<DeRhamPieces> {
    let field = p.field;
    let (coker, vector_dim) = match de_rham_at(p, i - 1)? {
        Some((o, Some(b), d)) if b.dim() > 0 => {
            let o_dim = o.map(|o| o.dim()).unwrap_or(0);
            let d = match d {
                Some(d) => d.clone(),
                None => empty_d(field, b.dim(), o_dim)?,
            };
            if let Some(o) = o {
                check_dm_map(&o_module(field, o)?, &b_module(field, b)?, &d)?;
            }
            b_cokernel(field, b, &d)?
        }
        _ => (DieudonneModule::zero(field), 0),
    };
    let (ker, ker_embed) = match de_rham_at(p, i)? {
        Some((Some(o), b, d)) => {
            let om = o_module(field, o)?;
            match (b, d) {
                (Some(b), Some(d)) if b.dim() > 0 => {
                    let bm = b_module(field, b)?;
                    check_dm_map(&om, &bm, d)?;
                    let sub = linalg::kernel(d, om.profile(), bm.profile());
                    om.submodule(&sub.embed)?
                }
                _ => {
                    let id = Matrix::identity(om.ring(), om.rank());
                    (om, id)
                }
            }
        }
        Some((None, _, _)) => return Err(Error::MissingDeRhamData(i)),
        None => (DieudonneModule::zero(field), empty_d(field, 0, 0)?),
    };
    Ok(DeRhamPieces {
        coker,
        vector_dim,
        ker,
        ker_embed,
    })
}

/// `R^i f_* mu_{p^n}`: de Rham pieces for `n = 1`, CW data with `p^n` otherwise.
pub fn h_mu_p(p: &GeometricPacket, i: i64, n: u32) -> Result<CohomReport> {
    if n == 0 {
        return Err(Error::BadParameter("n must be >= 1".into()));
    }
    let etale = match p.degree(i)? {
        Some(d) => d.etale_corank,
        None => None,
    };
    if n > 1 {
        if n + 2 > p.v_precision {
            return Err(Error::PrecisionExceeded(format!(
                "n = {n} needs v_precision >= {}, have {}",
                n + 2,
                p.v_precision
            )));
        }
        return cw_report(p, Endo::MultP(n), i, i, Coefficient::MuP(n), etale);
    }
    p.degree(i - 1)?;
    let pieces = de_rham_pieces(p, i)?;
    let sub_zero = pieces.coker.is_zero() && pieces.vector_dim == 0;
    let status = status_for(sub_zero, pieces.ker.is_zero(), p.extension_policy);
    let graded: Vec<_> = [pieces.coker, pieces.ker]
        .into_iter()
        .filter(|m| !m.is_zero())
        .collect();
    Ok(CohomReport {
        coeff: Coefficient::MuP(1),
        degree: i,
        finite_part: finite_from(p.field, &graded, status)?,
        pieces: graded,
        vector_dim: pieces.vector_dim,
        etale_rank: etale,
        extension_status: status,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormalKind {
    PhiFl,
    Psi,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalGroupReport {
    pub kind: FormalKind,
    pub degree: i64,
    pub labels: Vec<String>,
    pub mult_corank: usize,
    pub unipotent_dim: usize,
    /// `(height, multiplicity)` of one-dimensional formal summands.
    pub formal: Vec<(u32, usize)>,
    pub inf_obstruction: DieudonneModule,
    pub etale_corank: Option<u32>,
    pub extension_status: ExtensionStatus,
}

/// `Phi^i_fl(X, G_m)`: reduced part from `H^i(W O)` mod V-torsion, infinitesimal
/// part from the V-torsion of `H^{i+1}(W O)`.
pub fn phi_fl_report(p: &GeometricPacket, i: i64) -> Result<FormalGroupReport> {
    p.degree(i)?;
    p.degree(i + 1)?;
    let red = cm_mod_v_torsion(&p.wo(i)?)?;
    let c = cm_connected_dm(&red)?;
    let inf = cm_v_torsion(&p.wo(i + 1)?)?;
    let status = status_for(red.is_zero(), inf.is_zero(), p.extension_policy);
    Ok(FormalGroupReport {
        kind: FormalKind::PhiFl,
        degree: i,
        labels: c.labels,
        mult_corank: c.mult_corank,
        unipotent_dim: c.unipotent_dim,
        formal: c.formal,
        inf_obstruction: inf,
        etale_corank: None,
        extension_status: status,
    })
}

/// V-torsion of `H^i(W O)`; zero exactly when `Phi^i(X, G_m)` is prorepresentable.
pub fn phi_obstruction(p: &GeometricPacket, i: i64) -> Result<DieudonneModule> {
    p.degree(i)?;
    cm_v_torsion(&p.wo(i)?)
}

/// `Psi^i`: `Phi^i_fl` plus the etale quotient; the unipotent part also
/// receives the Ga-type part of degree `i - 1` through `nu_inf`.
pub fn psi_report(p: &GeometricPacket, i: i64) -> Result<FormalGroupReport> {
    p.degree(i - 1)?;
    let phi = phi_fl_report(p, i)?;
    let prev_ga = cm_mod_v_torsion(&p.wo(i - 1)?)?.additive_rank();
    let etale = p.degree(i)?.and_then(|d| d.etale_corank);
    let mut labels = phi.labels.clone();
    if prev_ga > 0 {
        labels.push(format!(
            "Ĝ_a-type of dimension {prev_ga} from degree {}",
            i - 1
        ));
    }
    if !phi.inf_obstruction.is_zero() {
        labels.push(format!(
            "infinitesimal part of length {}",
            phi.inf_obstruction.length()
        ));
    }
    if let Some(e) = etale {
        labels.push(format!("étale quotient of corank {e}"));
    }
    Ok(FormalGroupReport {
        kind: FormalKind::Psi,
        unipotent_dim: phi.unipotent_dim + prev_ga,
        labels,
        etale_corank: etale,
        ..phi
    })
}

/// `R^i` of `mu_p` on a projective bundle of rank 1 over `X`:
/// `h_mu_p(i)` merged with `h_z_p(i - 2)`.
pub fn projective_bundle_mu(p: &GeometricPacket, i: i64) -> Result<CohomReport> {
    let base = h_mu_p(p, i, 1)?;
    if i < 2 {
        return Ok(CohomReport {
            coeff: Coefficient::MuPBundle,
            ..base
        });
    }
    let tw = h_z_p(p, i - 2)?;
    let mut pieces = base.pieces.clone();
    pieces.extend(tw.pieces);
    let finite_part = match (base.finite_part, tw.finite_part) {
        (Some(a), Some(b)) => Some(a.direct_sum(&b)?),
        _ => None,
    };
    let etale_rank = match (base.etale_rank, tw.etale_rank) {
        (None, None) => None,
        (a, b) => Some(a.unwrap_or(0) + b.unwrap_or(0)),
    };
    Ok(CohomReport {
        coeff: Coefficient::MuPBundle,
        degree: i,
        finite_part,
        pieces,
        vector_dim: base.vector_dim + tw.vector_dim,
        etale_rank,
        extension_status: base.extension_status.max(tw.extension_status),
    })
}

/// The de Rham window `o_{i-1} -> b_{i-1}`, `o_i -> b_i` as k-modules.
struct Window {
    o_prev: DieudonneModule,
    b_prev: DieudonneModule,
    d_prev: Matrix,
    o_cur: DieudonneModule,
    b_cur: DieudonneModule,
    d_cur: Matrix,
}

fn window_at(p: &GeometricPacket, j: i64) -> Result<(DieudonneModule, DieudonneModule, Matrix)> {
    let field = p.field;
    let zero = || DieudonneModule::zero(field);
    let Some(deg) = p.degree(j)? else {
        return Ok((zero(), zero(), empty_d(field, 0, 0)?));
    };
    let o = match &deg.o {
        Some(o) => o_module(field, o)?,
        None => return Err(Error::MissingDeRhamData(j)),
    };
    let b = match &deg.b {
        Some(b) => b_module(field, b)?,
        None => zero(),
    };
    let d = match &deg.d {
        Some(d) => d.clone(),
        None if o.rank() > 0 && b.rank() > 0 => return Err(Error::MissingDeRhamData(j)),
        None => empty_d(field, b.rank(), o.rank())?,
    };
    Ok((o, b, d))
}

fn window(p: &GeometricPacket, i: i64) -> Result<Window> {
    let (o_prev, b_prev, d_prev) = window_at(p, i - 1)?;
    let (o_cur, b_cur, d_cur) = window_at(p, i)?;
    Ok(Window {
        o_prev,
        b_prev,
        d_prev,
        o_cur,
        b_cur,
        d_cur,
    })
}

/// `H^i(X, [O -> B_inf])` assembled as `coker(d_{i-1}) + ker(d_i)` together
/// with `iota : H^{i-1}(B) -> H` and `pi : H -> H^i(O)`.
struct Assembled {
    h: DieudonneModule,
    iota: Matrix,
    pi: Matrix,
    section: Matrix,
    ker_embed: Matrix,
    coker_rank: usize,
}

fn assemble_window(w: &Window) -> Result<Assembled> {
    let field = w.o_cur.field();
    let ring = WittRing::get(field, 1)?;
    let q = linalg::quotient(w.b_prev.profile(), &w.d_prev.coerce(&ring));
    let (coker, _) = w.b_prev.quotient(&w.d_prev.coerce(&ring))?;
    let (ker, ker_embed) = if w.b_cur.rank() > 0 && w.o_cur.rank() > 0 {
        let sub = linalg::kernel(&w.d_cur.coerce(&ring), w.o_cur.profile(), w.b_cur.profile());
        w.o_cur.submodule(&sub.embed)?
    } else {
        (w.o_cur.clone(), Matrix::identity(&ring, w.o_cur.rank()))
    };
    let (qr, kr) = (coker.rank(), ker.rank());
    let h = coker.direct_sum(&ker)?;
    let proj = q.proj.coerce(&ring);
    let iota = Matrix::from_fn(&ring, qr + kr, w.b_prev.rank(), |a, b| {
        if a < qr {
            proj.get(a, b)
        } else {
            ring.zero()
        }
    });
    let emb = ker_embed.coerce(&ring);
    let pi = Matrix::from_fn(&ring, w.o_cur.rank(), qr + kr, |a, b| {
        if b < qr {
            ring.zero()
        } else {
            emb.get(a, b - qr)
        }
    });
    Ok(Assembled {
        h,
        iota,
        pi,
        section: q.section.coerce(&ring),
        ker_embed: emb,
        coker_rank: qr,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LesReport {
    pub degree: i64,
    pub exact: bool,
    /// `(position, len ker - len im)` in
    /// `H^{i-1}(O) -> H^{i-1}(B) -> H^i -> H^i(O) -> H^i(B)`.
    pub defects: Vec<(usize, i64)>,
    pub failures: Vec<String>,
}

/// Exactness of `H^{i-1}(O) -d-> H^{i-1}(B) -iota-> H^i -pi-> H^i(O) -d-> H^i(B)`.
pub fn les_check(p: &GeometricPacket, i: i64) -> Result<LesReport> {
    let w = window(p, i)?;
    let mut failures = Vec::new();
    for (pos, (src, tgt, d), name) in [
        (
            0usize,
            (&w.o_prev, &w.b_prev, &w.d_prev),
            format!("d_{}", i - 1),
        ),
        (3, (&w.o_cur, &w.b_cur, &w.d_cur), format!("d_{i}")),
    ] {
        match check_dm_map(src, tgt, d) {
            Ok(_) => {}
            Err(Error::NotEquivariant(_)) => failures.push(format!(
                "position {pos}: {name} does not commute with F and C"
            )),
            Err(e) => return Err(e),
        }
    }
    if !failures.is_empty() {
        return Ok(LesReport {
            degree: i,
            exact: false,
            defects: vec![],
            failures,
        });
    }
    let a = assemble_window(&w)?;
    let modules = [
        w.o_prev.clone(),
        w.b_prev.clone(),
        a.h.clone(),
        w.o_cur.clone(),
        w.b_cur.clone(),
    ];
    let ring = WittRing::get(p.field, 1)?;
    let maps = [w.d_prev.coerce(&ring), a.iota, a.pi, w.d_cur.coerce(&ring)];
    let rep = crate::dieudonne::dm_exact_check(&modules, &maps)?;
    for &(pos, d) in &rep.defects {
        if d != 0 {
            failures.push(format!("position {pos}: defect {d}"));
        }
    }
    Ok(LesReport {
        degree: i,
        exact: rep.exact,
        defects: rep.defects,
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelogramReport {
    pub degree: i64,
    pub commutes: bool,
    pub checks: Vec<(String, bool)>,
}

/// Commutativity of the F/C parallelogram around `H^i`:
/// `F_H = F o pi`, `V_H = iota o C`, and the zero composites.
pub fn parallelogram_check(p: &GeometricPacket, i: i64) -> Result<ParallelogramReport> {
    let w = window(p, i)?;
    let ring = WittRing::get(p.field, 1)?;
    let a_o = w.o_cur.f_matrix().coerce(&ring);
    let c_b = w.b_prev.v_matrix().coerce(&ring);
    let d_prev = w.d_prev.coerce(&ring);
    let d_cur = w.d_cur.coerce(&ring);
    let mut checks = Vec::new();
    let d_f = d_cur.mul(&a_o).is_zero();
    let c_d = c_b.mul(&d_prev.sigma(-1)).is_zero();
    checks.push((format!("d_{i} F = 0"), d_f));
    checks.push((format!("C d_{} = 0", i - 1), c_d));
    if !(d_f && c_d) {
        return Ok(ParallelogramReport {
            degree: i,
            commutes: false,
            checks,
        });
    }
    let asm = assemble_window(&w)?;
    let (hr, qr) = (asm.h.rank(), asm.coker_rank);
    // F : H^i(O) -> H, x -> (0, A x)
    let mut fmap = Matrix::zeros(&ring, hr, w.o_cur.rank());
    let mut f_ok = true;
    for j in 0..w.o_cur.rank() {
        match linalg::solve(&asm.ker_embed, &a_o.column(j)) {
            Some(c) => {
                for (k, x) in c.iter().enumerate() {
                    fmap.set(qr + k, j, *x);
                }
            }
            None => f_ok = false,
        }
    }
    checks.push(("F(H^i(O)) lies in ker d".into(), f_ok));
    // C : H -> H^{i-1}(B), zero on the split ker part
    let mut cmap = Matrix::zeros(&ring, w.b_prev.rank(), hr);
    for k in 0..qr {
        let s: Vec<W> = asm
            .section
            .column(k)
            .iter()
            .map(|x| ring.sigma(x, -1))
            .collect();
        let img = c_b.apply(&s);
        for (r, x) in img.iter().enumerate() {
            cmap.set(r, k, *x);
        }
    }
    let fh = asm.h.f_matrix().coerce(&ring);
    let vh = asm.h.v_matrix().coerce(&ring);
    let eq = |x: &Matrix, y: &Matrix| x == y;
    checks.push(("pi iota = 0".into(), asm.pi.mul(&asm.iota).is_zero()));
    checks.push(("F_H = F pi".into(), eq(&fh, &fmap.mul(&asm.pi.sigma(1)))));
    checks.push(("V_H = iota C".into(), eq(&vh, &asm.iota.mul(&cmap))));
    checks.push(("pi F = F_O".into(), eq(&asm.pi.mul(&fmap), &a_o)));
    checks.push((
        "C iota = C_B".into(),
        eq(&cmap.mul(&asm.iota.sigma(-1)), &c_b),
    ));
    checks.push(("C F = 0".into(), cmap.mul(&fmap.sigma(-1)).is_zero()));
    checks.push(("F_H V_H = 0".into(), fh.mul(&vh.sigma(1)).is_zero()));
    checks.push(("V_H F_H = 0".into(), vh.mul(&fh.sigma(-1)).is_zero()));
    let commutes = checks.iter().all(|(_, ok)| *ok);
    Ok(ParallelogramReport {
        degree: i,
        commutes,
        checks,
    })
}
