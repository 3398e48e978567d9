//! Isomorphism testing for Dieudonne modules.
//!
//! After cheap invariant screening, `Hom_D(M, N)` is computed exactly as a
//! `Z/p^m`-module (the kernel of the intertwining constraints on the
//! coefficients of a matrix `Phi`). An isomorphism is then searched for among
//! its elements; `Phi` is bijective iff its reduction mod `p` has full rank.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dieudonne::DieudonneModule;
use crate::error::{Error, Result};
use crate::field::FieldSpec;
use crate::galois::{WittRing, W};
use crate::linalg::{self, rank_mod_p};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoOutcome {
    Iso,
    NotIso,
    Indeterminate,
}

impl IsoOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            IsoOutcome::Iso => "isomorphic",
            IsoOutcome::NotIso => "not-isomorphic",
            IsoOutcome::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IsoConfig {
    pub max_length: u32,
    /// Enumerate `Hom` exhaustively when its order is at most this.
    pub enum_budget: u64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for IsoConfig {
    fn default() -> Self {
        IsoConfig {
            max_length: 8,
            enum_budget: 4096,
            samples: 2048,
            seed: 0x5eed,
        }
    }
}

/// `Hom_D(M, N)` as a `Z/p^m`-module with explicit generators.
#[derive(Clone, Debug)]
pub struct HomSpace {
    /// Exponents of the generators.
    pub profile: Vec<u32>,
    gens: Matrix,
    ring: Arc<WittRing>,
    rows: usize,
    cols: usize,
    shifts: Vec<u32>,
}

impl HomSpace {
    pub fn length(&self) -> u32 {
        self.profile.iter().sum()
    }

    /// `Phi` for the coefficient vector `c` (entry `k` read mod `p^{profile_k}`).
    pub fn element(&self, c: &[u64]) -> Matrix {
        let zr = self.gens.ring();
        let coeffs: Vec<W> = c.iter().map(|&x| zr.from_int(x as i64)).collect();
        let flat = self.gens.apply(&coeffs);
        self.assemble(&flat)
    }

    fn assemble(&self, flat: &[W]) -> Matrix {
        let r = &self.ring;
        let n = r.n();
        Matrix::from_fn(r, self.rows, self.cols, |i, j| {
            let base = (i * self.cols + j) * n;
            let co: Vec<u64> = (0..n).map(|c| flat[base + c].coeffs()[0]).collect();
            r.mul(
                &r.from_coeffs(&co),
                &r.p_pow(self.shifts[i * self.cols + j]),
            )
        })
    }
}

/// Computes `Hom_D(M, N)`.
pub fn dm_hom(m: &DieudonneModule, nmod: &DieudonneModule) -> Result<HomSpace> {
    if m.field() != nmod.field() {
        return Err(Error::FieldMismatch);
    }
    let k = m.field();
    let n = k.n();
    let (em, en) = (m.profile(), nmod.profile());
    let (rm, rn) = (em.len(), en.len());
    let prec = em.iter().chain(en).copied().max().unwrap_or(1).max(1);
    let ring = WittRing::get(k, prec)?;
    let zring = WittRing::get(FieldSpec::new(k.p(), 1, None)?, prec)?;
    let (fm, vm) = (m.f_matrix().coerce(&ring), m.v_matrix().coerce(&ring));
    let (fn_, vn) = (nmod.f_matrix().coerce(&ring), nmod.v_matrix().coerce(&ring));

    let mut shifts = vec![0u32; rn * rm];
    let mut src = Vec::with_capacity(rn * rm * n);
    for i in 0..rn {
        for j in 0..rm {
            let f = en[i].min(em[j]);
            shifts[i * rm + j] = en[i] - f;
            src.extend(std::iter::repeat_n(f, n));
        }
    }
    let mut tgt = Vec::with_capacity(2 * rn * rm * n);
    for _ in 0..2 {
        for &e in en.iter() {
            tgt.extend(std::iter::repeat_n(e, rm * n));
        }
    }
    let unknowns = src.len();
    let mut cols = Vec::with_capacity(unknowns);
    let mut basis_coeffs = vec![0u64; n];
    for i in 0..rn {
        for j in 0..rm {
            for c in 0..n {
                basis_coeffs.iter_mut().for_each(|x| *x = 0);
                basis_coeffs[c] = 1;
                let entry = ring.mul(
                    &ring.from_coeffs(&basis_coeffs),
                    &ring.p_pow(shifts[i * rm + j]),
                );
                let mut phi = Matrix::zeros(&ring, rn, rm);
                phi.set(i, j, entry);
                let df = phi.mul(&fm).sub(&fn_.mul(&phi.sigma(1)));
                let dv = phi.mul(&vm).sub(&vn.mul(&phi.sigma(-1)));
                let mut col = Vec::with_capacity(tgt.len());
                for d in [df, dv] {
                    for a in 0..rn {
                        for b in 0..rm {
                            let w = ring.reduce(&d.get(a, b), en[a]);
                            for cc in 0..n {
                                col.push(zring.from_int(w.coeffs()[cc] as i64));
                            }
                        }
                    }
                }
                cols.push(col);
            }
        }
    }
    let cmat = Matrix::from_columns(&zring, &cols, tgt.len());
    let sub = linalg::kernel(&cmat, &src, &tgt);
    Ok(HomSpace {
        profile: sub.profile.clone(),
        gens: sub.embed,
        ring,
        rows: rn,
        cols: rm,
        shifts,
    })
}

fn screen(m: &DieudonneModule, n: &DieudonneModule) -> bool {
    let sorted = |x: &[u32]| {
        let mut v = x.to_vec();
        v.sort_unstable();
        v
    };
    if sorted(m.profile()) != sorted(n.profile()) {
        return false;
    }
    for total in 1..=4u32 {
        for i in 0..=total {
            let (wm, wn) = (m.word_map(i, total - i), n.word_map(i, total - i));
            let im = linalg::semilinear_image(&wm).0.sorted();
            let iin = linalg::semilinear_image(&wn).0.sorted();
            if im != iin {
                return false;
            }
        }
    }
    true
}

pub fn module_iso_test(m: &DieudonneModule, n: &DieudonneModule) -> Result<IsoOutcome> {
    module_iso_test_with(m, n, &IsoConfig::default())
}

pub fn module_iso_test_with(
    m: &DieudonneModule,
    n: &DieudonneModule,
    cfg: &IsoConfig,
) -> Result<IsoOutcome> {
    if m.field() != n.field() {
        return Err(Error::FieldMismatch);
    }
    if m == n {
        return Ok(IsoOutcome::Iso);
    }
    if !screen(m, n) {
        return Ok(IsoOutcome::NotIso);
    }
    if m.length() > cfg.max_length {
        return Ok(IsoOutcome::Indeterminate);
    }
    let hom = dm_hom(m, n)?;
    let rank = m.rank();
    let p = m.field().p() as u64;
    let bound: Vec<u64> = hom.profile.iter().map(|&e| p.pow(e)).collect();
    let total = bound.iter().try_fold(1u64, |acc, &b| {
        acc.checked_mul(b).filter(|&x| x <= cfg.enum_budget)
    });
    let is_iso = |c: &[u64]| rank_mod_p(&hom.element(c)) == rank;
    match total {
        Some(_) => {
            let mut c = vec![0u64; bound.len()];
            loop {
                if is_iso(&c) {
                    return Ok(IsoOutcome::Iso);
                }
                let mut k = 0;
                loop {
                    if k == c.len() {
                        return Ok(IsoOutcome::NotIso);
                    }
                    c[k] += 1;
                    if c[k] < bound[k] {
                        break;
                    }
                    c[k] = 0;
                    k += 1;
                }
            }
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for _ in 0..cfg.samples {
                let c: Vec<u64> = bound.iter().map(|&b| rng.gen_range(0..b)).collect();
                if is_iso(&c) {
                    return Ok(IsoOutcome::Iso);
                }
            }
            Ok(IsoOutcome::Indeterminate)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group_scheme::{gs_atom, Atom};

    fn atom(k: FieldSpec, a: Atom) -> DieudonneModule {
        gs_atom(k, a).unwrap().p_part
    }

    #[test]
    fn self_and_distinct() {
        let k = FieldSpec::new(2, 1, None).unwrap();
        let mu = atom(k, Atom::Mu(1));
        let al = atom(k, Atom::Alpha(1));
        assert_eq!(module_iso_test(&mu, &mu).unwrap(), IsoOutcome::Iso);
        assert_eq!(module_iso_test(&mu, &al).unwrap(), IsoOutcome::NotIso);
    }

    #[test]
    fn base_change_is_detected() {
        let k = FieldSpec::new(3, 2, None).unwrap();
        let m = atom(k, Atom::Mu(1))
            .direct_sum(&atom(k, Atom::Zmod(1)))
            .unwrap();
        let r = m.ring().clone();
        let x = r.teichmuller(&k.generator());
        let g = Matrix::from_fn(&r, 2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => r.one(),
            (0, 1) => x,
            _ => r.zero(),
        });
        let g_inv = Matrix::from_fn(&r, 2, 2, |i, j| match (i, j) {
            (0, 0) | (1, 1) => r.one(),
            (0, 1) => r.neg(&x),
            _ => r.zero(),
        });
        let n = m.change_basis(&g, &g_inv).unwrap();
        assert_ne!(n, m);
        assert_eq!(module_iso_test(&m, &n).unwrap(), IsoOutcome::Iso);
    }

    #[test]
    fn twisted_unit_root_module_is_mu() {
        // F = c sigma on k: by Lang's theorem c = sigma(u)/u for some unit u
        let k = FieldSpec::new(2, 2, None).unwrap();
        let r = WittRing::get(k, 1).unwrap();
        let c = r.lift(&k.generator());
        let f = Matrix::diagonal(&r, &[c]);
        let v = Matrix::zeros(&r, 1, 1);
        let twisted = DieudonneModule::new(k, vec![1], &f, &v).unwrap();
        let mu = atom(k, Atom::Mu(1));
        assert_eq!(module_iso_test(&twisted, &mu).unwrap(), IsoOutcome::Iso);
    }

    #[test]
    fn hom_of_mu_p2_with_itself() {
        let k = FieldSpec::new(2, 1, None).unwrap();
        let mu2 = atom(k, Atom::Mu(2));
        // End(mu_{p^2}) = Z/p^2
        assert_eq!(dm_hom(&mu2, &mu2).unwrap().profile, vec![2]);
        let z2 = atom(k, Atom::Zmod(2));
        assert_eq!(dm_hom(&mu2, &z2).unwrap().length(), 0);
    }
}
