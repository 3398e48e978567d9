//! Acceptance suite: one pass/fail line per criterion.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ffgs::cartier::{cm_tc_n, cm_trunc, summand_trunc, CartierModule, CartierSummand};
use ffgs::cli::examples::{all_examples, example_packet};
use ffgs::cohomology::*;
use ffgs::dieudonne::{dm_dual, dm_fourway, dm_word_kernel, DieudonneModule, Word};
use ffgs::field::FieldSpec;
use ffgs::galois::WittRing;
use ffgs::group_scheme::{gs_atom, gs_classify, gs_height_one, random_module, Atom, HeightOneData};
use ffgs::iso::{module_iso_test, IsoOutcome};
use ffgs::matrix::Matrix;
use ffgs::witt::{witt_add, witt_mul, witt_structure, StructureMap, WittVector};

use common::{kernel_cokernel, Gf, GhostOracle};

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn k(p: u32, n: usize) -> FieldSpec {
    FieldSpec::new(p, n, None).unwrap()
}

fn packet(name: &str) -> GeometricPacket {
    example_packet(name).unwrap().unwrap()
}

fn iso(a: &DieudonneModule, b: &DieudonneModule) -> IsoOutcome {
    module_iso_test(a, b).unwrap()
}

fn atom(f: FieldSpec, a: Atom) -> DieudonneModule {
    gs_atom(f, a).unwrap().p_part
}

// 1. Witt ring laws against the integer ghost oracle.
fn witt_ghost_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases = 0;
    for p in [2u32, 3, 5] {
        for n in [1usize, 2] {
            let f = k(p, n);
            let oracle = GhostOracle::new(p, f.modulus());
            for m in 1..=3usize {
                for _ in 0..200 {
                    let u =
                        WittVector::new(f, (0..m).map(|_| f.random(&mut rng)).collect()).unwrap();
                    let v =
                        WittVector::new(f, (0..m).map(|_| f.random(&mut rng)).collect()).unwrap();
                    let co = |w: &WittVector| {
                        w.components()
                            .iter()
                            .map(|c| f.coeffs(c))
                            .collect::<Vec<_>>()
                    };
                    let (s, pr) = oracle.sum_and_product(&co(&u), &co(&v));
                    let (ls, lp) = (
                        co(&witt_add(&u, &v).unwrap()),
                        co(&witt_mul(&u, &v).unwrap()),
                    );
                    ensure!(
                        ls == s && lp == pr,
                        "mismatch p={p} n={n} m={m}: {u:?} {v:?}"
                    );
                    cases += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 10.0, "took {secs:.2}s");
    Ok(format!(
        "{cases} cases, 0 mismatches, {secs:.2}s (limit 10s)"
    ))
}

fn fv_violations(m: &DieudonneModule) -> usize {
    let r = m.ring();
    let n = m.rank();
    let mut bad = 0;
    for j in 0..n {
        let e: Vec<_> = (0..n)
            .map(|i| if i == j { r.one() } else { r.zero() })
            .collect();
        let pe = m.reduce(&e.iter().map(|x| r.mul(x, &r.p_pow(1))).collect::<Vec<_>>());
        if m.apply_f(&m.apply_v(&e)) != pe {
            bad += 1;
        }
        if m.apply_v(&m.apply_f(&e)) != pe {
            bad += 1;
        }
    }
    bad
}

/// Every module the suite constructs: atoms, random modules, truncations of
/// all summand kinds and of packet terms, and report pieces.
fn module_corpus() -> Vec<DieudonneModule> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (p, n) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
        let f = k(p, n);
        for a in 1..=3 {
            out.extend([Atom::Mu(a), Atom::Zmod(a), Atom::Alpha(a)].map(|x| atom(f, x)));
        }
        out.push(atom(f, Atom::SsKernel));
        for _ in 0..10 {
            out.push(random_module(f, 5, &mut rng).unwrap());
        }
        for s in summand_kinds(f) {
            for lvl in 1..=4 {
                out.push(summand_trunc(f, &s, lvl, 6).unwrap());
            }
        }
    }
    for (_, pk) in all_examples() {
        for (&i, d) in &pk.degrees {
            for lvl in 1..=pk.v_precision {
                out.push(cm_trunc(&d.wo, lvl).unwrap());
            }
            out.extend(h_mu_p(&pk, i, 1).unwrap().pieces);
            out.extend(h_mu_p(&pk, i, 2).unwrap().pieces);
        }
    }
    out
}

fn summand_kinds(f: FieldSpec) -> Vec<CartierSummand> {
    let r = WittRing::get(f, 6).unwrap();
    let u = Matrix::from_fn(&r, 2, 2, |i, j| match (i, j) {
        (0, 1) | (1, 0) => r.one(),
        (1, 1) => r.from_int(f.p() as i64 - 1),
        _ => r.zero(),
    });
    vec![
        CartierSummand::unit(u).unwrap(),
        CartierSummand::Additive { rank: 1 },
        CartierSummand::formal(1, 1).unwrap(),
        CartierSummand::formal(2, 1).unwrap(),
        CartierSummand::Finite(
            atom(f, Atom::SsKernel)
                .direct_sum(&atom(f, Atom::Mu(2)))
                .unwrap(),
        ),
    ]
}

// 2. FV = VF = p.
fn operator_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut witt_bad = 0;
    let mut witt_cases = 0;
    for (p, n) in [(2, 1), (3, 2), (5, 1)] {
        let f = k(p, n);
        for m in 2..=4usize {
            for _ in 0..50 {
                let u = WittVector::new(f, (0..m).map(|_| f.random(&mut rng)).collect()).unwrap();
                let short = witt_structure(&u, StructureMap::R, Some(m - 1)).unwrap();
                let pu = witt_mul(&u, &WittVector::from_int(f, m, p as i64).unwrap()).unwrap();
                let fv = witt_structure(
                    &witt_structure(&short, StructureMap::V, None).unwrap(),
                    StructureMap::F,
                    None,
                );
                let vf = witt_structure(
                    &witt_structure(&short, StructureMap::F, None).unwrap(),
                    StructureMap::V,
                    None,
                );
                if fv.unwrap() != pu || vf.unwrap() != pu {
                    witt_bad += 1;
                }
                witt_cases += 1;
            }
        }
    }
    let corpus = module_corpus();
    let dm_bad: usize = corpus.iter().map(fv_violations).sum();
    ensure!(
        witt_bad == 0 && dm_bad == 0,
        "{witt_bad} Witt and {dm_bad} module violations"
    );
    Ok(format!(
        "{witt_cases} Witt vectors, {} modules, 0 violations",
        corpus.len()
    ))
}

// 3. Atom values.
fn atom_fidelity() -> Check {
    for (p, n) in [(2, 1), (3, 1), (2, 2), (3, 2)] {
        let f = k(p, n);
        let r1 = WittRing::get(f, 1).unwrap();
        let mu = atom(f, Atom::Mu(1));
        ensure!(mu.profile() == [1], "mu_p profile {:?}", mu.profile());
        ensure!(
            mu.f_matrix().get(0, 0) == r1.one() && mu.v_matrix().is_zero(),
            "mu_p is not (k, sigma, 0)"
        );
        for m in 1..=3u32 {
            let rm = WittRing::get(f, m).unwrap();
            let wm = DieudonneModule::new(
                f,
                vec![m],
                &Matrix::identity(&rm, 1),
                &Matrix::diagonal(&rm, &[rm.p_pow(1)]),
            )
            .unwrap();
            ensure!(
                iso(&atom(f, Atom::Mu(m)), &wm) == IsoOutcome::Iso,
                "mu_p^{m} is not W_{m}(k)"
            );
        }
        for lvl in 1..=4u32 {
            let t = summand_trunc(f, &CartierSummand::Additive { rank: 1 }, lvl, 1).unwrap();
            let shift = Matrix::from_fn(&r1, lvl as usize, lvl as usize, |i, j| {
                if i == j + 1 {
                    r1.one()
                } else {
                    r1.zero()
                }
            });
            ensure!(
                t.profile() == vec![1; lvl as usize]
                    && t.f_matrix().is_zero()
                    && *t.v_matrix() == shift,
                "additive truncation at {lvl} is not k[V]/V^{lvl} with F=0"
            );
        }
        let unit = CartierModule::new(
            f,
            vec![CartierSummand::trivial_unit(f, 6, 1).unwrap()],
            6,
            6,
        )
        .unwrap();
        let tc = cm_tc_n(&unit, 1).unwrap();
        ensure!(tc.v_matrix().is_zero(), "unit report has V != 0");
        ensure!(
            ffgs::linalg::rank_mod_p(tc.f_matrix()) == tc.rank() && tc.rank() == 1,
            "F not bijective"
        );
    }
    Ok("mu_p = (k, sigma, 0); mu_p^m = W_m(k), m<=3; k[V]/V^n with F=0; unit report V=0, F bijective".into())
}

// 4. Duality.
fn duality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut indeterminate = 0;
    let mut count = 0;
    let fields = [k(2, 1), k(3, 1), k(2, 2), k(5, 1)];
    for f in fields {
        let atoms = [
            Atom::Mu(1),
            Atom::Mu(2),
            Atom::Zmod(1),
            Atom::Zmod(3),
            Atom::Alpha(1),
            Atom::Alpha(2),
            Atom::SsKernel,
        ];
        for a in atoms {
            let m = atom(f, a);
            match iso(&dm_dual(&dm_dual(&m)), &m) {
                IsoOutcome::Iso => {}
                IsoOutcome::Indeterminate => indeterminate += 1,
                IsoOutcome::NotIso => return Err(format!("dual^2 of {a} over {f}")),
            }
            count += 1;
        }
        ensure!(
            iso(&dm_dual(&atom(f, Atom::Mu(1))), &atom(f, Atom::Zmod(1))) == IsoOutcome::Iso,
            "dual(mu_p) != Z/p"
        );
        ensure!(
            iso(&dm_dual(&atom(f, Atom::Alpha(1))), &atom(f, Atom::Alpha(1))) == IsoOutcome::Iso,
            "alpha_p not self-dual"
        );
    }
    for i in 0..100 {
        let f = fields[i % fields.len()];
        let m = random_module(f, 5, &mut rng).unwrap();
        match iso(&dm_dual(&dm_dual(&m)), &m) {
            IsoOutcome::Iso => {}
            IsoOutcome::Indeterminate => indeterminate += 1,
            IsoOutcome::NotIso => return Err(format!("dual^2 differs for random module {i}")),
        }
        count += 1;
    }
    ensure!(indeterminate == 0, "{indeterminate} indeterminate outcomes");
    Ok(format!(
        "{count} modules, dual^2 = id, dual(mu_p) = Z/p, alpha_p self-dual, 0 indeterminate"
    ))
}

// 5. TC_n(M) = ker(V^n | M/V^{n+2}).
fn bracket_identity() -> Check {
    let mut checked = 0;
    for f in [k(2, 1), k(3, 1), k(2, 2)] {
        for s in summand_kinds(f) {
            let kind = s.kind();
            let m = CartierModule::new(f, vec![s], 6, 6).unwrap();
            for n in 1..=3u32 {
                let tc = cm_tc_n(&m, n).map_err(|e| format!("{kind} n={n}: {e}"))?;
                let direct = dm_word_kernel(&cm_trunc(&m, n + 2).unwrap(), Word::V(n)).unwrap();
                ensure!(
                    iso(&tc, &direct) == IsoOutcome::Iso,
                    "{kind} over {f}, n={n}"
                );
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (summand, n) pairs isomorphic"))
}

// 6. Height-one dictionary.
fn height_one() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for f in [k(2, 1), k(3, 1), k(2, 2)] {
        let g = |rho: Vec<Vec<_>>| {
            gs_height_one(&HeightOneData { field: f, rho })
                .unwrap()
                .p_part
        };
        ensure!(
            iso(&g(vec![vec![f.one()]]), &atom(f, Atom::Mu(1))) == IsoOutcome::Iso,
            "rho = 1 is not mu_p"
        );
        ensure!(
            iso(&g(vec![vec![f.zero()]]), &atom(f, Atom::Alpha(1))) == IsoOutcome::Iso,
            "rho = 0 is not alpha_p"
        );
    }
    for i in 0..50 {
        let f = [k(2, 1), k(3, 1), k(2, 2), k(5, 1)][i % 4];
        let d = rng.gen_range(1..=3);
        let rho: Vec<Vec<_>> = (0..d)
            .map(|_| (0..d).map(|_| f.random(&mut rng)).collect())
            .collect();
        let data = HeightOneData { field: f, rho };
        let c = gs_classify(&gs_height_one(&data).unwrap()).unwrap();
        ensure!(
            c.height_one.as_ref() == Some(&data),
            "rho {i} did not round-trip"
        );
    }
    Ok("rho=1 -> mu_p, rho=0 -> alpha_p, 50 random rho recovered exactly".into())
}

// 7. Supersingular elliptic curve.
fn supersingular_elliptic() -> Check {
    let start = Instant::now();
    let e = packet("elliptic_supersingular");
    let a = h_alpha_p(&e, 1).unwrap();
    ensure!(a.vector_dim == 1, "vector_dim {}", a.vector_dim);
    ensure!(
        a.finite_part.as_ref().is_some_and(|m| m.is_zero()),
        "finite part not 0"
    );
    let om = h_omega_nu(&e, 1, 1, OmegaNu::Omega)
        .unwrap()
        .finite_part
        .unwrap();
    let wo1 = &e.degrees[&1].wo;
    let formal =
        CartierModule::new(e.field, vec![CartierSummand::formal(1, 1).unwrap()], 6, 6).unwrap();
    ensure!(*wo1 == formal, "degree 1 Witt term is not formal(1)");
    let vker = dm_word_kernel(&cm_trunc(&formal, 3).unwrap(), Word::V(1)).unwrap();
    ensure!(
        iso(&om, &vker) == IsoOutcome::Iso,
        "omega is not the V-kernel of formal(1)"
    );
    let split = dm_fourway(&om).unwrap().lengths();
    ensure!(split == [1, 0, 0, 0], "omega cells {split:?}");
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 1.0, "took {secs:.3}s");
    Ok(format!("H^1(alpha_p) = G_a (vector_dim 1, finite 0); omega = ker V on formal(1), length 1 local-local; {secs:.3}s"))
}

// 8. Ordinary elliptic curve.
fn ordinary_elliptic() -> Check {
    let e = packet("elliptic_ordinary");
    let f = e.field;
    let mu = h_mu_p(&e, 1, 1).unwrap();
    let fin = mu.finite_part.clone().unwrap();
    ensure!(
        iso(&fin, &atom(f, Atom::Mu(1))) == IsoOutcome::Iso,
        "finite part is not mu_p"
    );
    ensure!(
        mu.etale_rank == Some(1) && mu.vector_dim == 0,
        "etale {:?} vector {}",
        mu.etale_rank,
        mu.vector_dim
    );
    let order = fin.order().1 + mu.etale_rank.unwrap();
    ensure!(order == 2, "order p^{order}");
    let phi = phi_fl_report(&e, 1).unwrap();
    ensure!(phi.mult_corank == 1, "phi mult corank {}", phi.mult_corank);
    let psi = psi_report(&e, 1).unwrap();
    ensure!(
        (psi.mult_corank, psi.etale_corank, psi.unipotent_dim) == (1, Some(1), 0),
        "psi = ({}, {:?}, {})",
        psi.mult_corank,
        psi.etale_corank,
        psi.unipotent_dim
    );
    Ok("H^1(mu_p) = mu_p + Z/p (order p^2); Phi mult corank 1; Psi = (1, 1, 0)".into())
}

// 9. Supersingular K3 surface.
fn supersingular_k3() -> Check {
    let x = packet("k3_supersingular");
    let phi = phi_fl_report(&x, 2).unwrap();
    ensure!(
        phi.unipotent_dim == 1,
        "unipotent dim {}",
        phi.unipotent_dim
    );
    ensure!(phi.inf_obstruction.is_zero(), "obstruction nonzero");
    let mu = h_mu_p(&x, 2, 1).unwrap();
    ensure!(mu.vector_dim == 1, "vector_dim {}", mu.vector_dim);
    Ok(format!(
        "Phi^2 unipotent dim 1, obstruction 0; H^2(mu_p) vector_dim 1, etale {:?}",
        mu.etale_rank
    ))
}

// 10. Prorepresentability obstruction.
fn obstruction() -> Check {
    for (name, p) in all_examples() {
        for i in [1, 2] {
            ensure!(
                phi_obstruction(&p, i).unwrap().is_zero(),
                "{name} degree {i}"
            );
        }
    }
    let mut injected = 0;
    for base in ["elliptic_ordinary", "k3_ordinary", "k3_supersingular"] {
        for t in [Atom::Alpha(1), Atom::Alpha(2), Atom::SsKernel] {
            let mut p = packet(base);
            let m = atom(p.field, t);
            let deg = p.degrees.get_mut(&2).unwrap();
            deg.wo.summands.push(CartierSummand::Finite(m.clone()));
            let obs = phi_obstruction(&p, 2).unwrap();
            ensure!(
                iso(&obs, &m) == IsoOutcome::Iso,
                "{base} + {t}: obstruction differs"
            );
            injected += 1;
        }
    }
    Ok(format!(
        "0 on 4 packets at i = 1, 2; {injected} injected V-torsion modules recovered"
    ))
}

/// Ordinary elliptic packet with a one-dimensional `H^1(B)` and `d_1 = 0`,
/// so that `d_1` has an entry to corrupt.
fn corruptible_packet() -> GeometricPacket {
    let mut e = packet("elliptic_ordinary");
    let r = WittRing::get(e.field, 1).unwrap();
    let deg = e.degrees.get_mut(&1).unwrap();
    deg.b = Some(BData {
        c: Matrix::zeros(&r, 1, 1),
        stabilized: true,
    });
    deg.d = Some(Matrix::zeros(&r, 1, 1));
    e
}

// 11. LES exactness and parallelogram commutativity.
fn les_and_parallelogram() -> Check {
    let mut checked = 0;
    for (name, p) in all_examples() {
        for &i in p.degrees.keys() {
            let les = les_check(&p, i).unwrap();
            ensure!(
                les.exact,
                "{name} degree {i}: {:?} {:?}",
                les.defects,
                les.failures
            );
            let par = parallelogram_check(&p, i).unwrap();
            ensure!(par.commutes, "{name} degree {i}: {:?}", par.checks);
            checked += 1;
        }
    }
    let good = corruptible_packet();
    ensure!(
        les_check(&good, 1).unwrap().exact,
        "uncorrupted synthetic packet fails les"
    );
    ensure!(
        parallelogram_check(&good, 1).unwrap().commutes,
        "uncorrupted synthetic packet fails parallelogram"
    );
    let mut bad = good.clone();
    let r = WittRing::get(bad.field, 1).unwrap();
    bad.degrees.get_mut(&1).unwrap().d = Some(Matrix::diagonal(&r, &[r.one()]));
    let les = les_check(&bad, 1).unwrap();
    let par = parallelogram_check(&bad, 1).unwrap();
    ensure!(
        !les.exact || !par.commutes,
        "corruption of d_1 not detected"
    );
    Ok(format!(
        "{checked} (packet, degree) pairs pass; corrupted d_1 caught (les exact: {}, parallelogram: {})",
        les.exact, par.commutes
    ))
}

// 12. Projective bundle formula.
fn projective_bundle() -> Check {
    let e = packet("elliptic_ordinary");
    let b = projective_bundle_mu(&e, 2).unwrap();
    let mu = h_mu_p(&e, 2, 1).unwrap();
    let z = h_z_p(&e, 0).unwrap();
    let sum = mu
        .finite_part
        .clone()
        .unwrap()
        .direct_sum(&z.finite_part.clone().unwrap())
        .unwrap();
    ensure!(
        iso(b.finite_part.as_ref().unwrap(), &sum) == IsoOutcome::Iso,
        "finite parts differ"
    );
    ensure!(
        b.vector_dim == mu.vector_dim + z.vector_dim,
        "vector dims differ"
    );
    ensure!(
        b.etale_rank == Some(mu.etale_rank.unwrap() + 1),
        "etale {:?} vs {:?} + 1",
        b.etale_rank,
        mu.etale_rank
    );
    Ok(format!(
        "H^2(P(E), mu_p) = H^2(E, mu_p) + H^0(E, Z/p); etale {} -> {}",
        mu.etale_rank.unwrap(),
        b.etale_rank.unwrap()
    ))
}

struct Counter {
    reports: usize,
}

impl Counter {
    fn o_matrix(&self, p: &GeometricPacket, i: i64) -> Vec<Vec<ffgs::field::Fq>> {
        let Ok(Some(d)) = p.degree(i) else {
            return vec![];
        };
        let Some(o) = &d.o else { return vec![] };
        let r = o.f.ring();
        (0..o.dim())
            .map(|a| (0..o.dim()).map(|b| r.residue(&o.f.get(a, b))).collect())
            .collect()
    }

    /// Compares the alpha_p and Z/p reports at degree `i` with brute-force
    /// counts over `F_{q^t}`, `t <= 3`.
    fn check(&mut self, label: &str, p: &GeometricPacket, i: i64) -> Check {
        let f = p.field;
        let a_prev = self.o_matrix(p, i - 1);
        let a_cur = self.o_matrix(p, i);
        let alpha = h_alpha_p(p, i).unwrap();
        let zp = h_z_p(p, i).unwrap();
        let fin = alpha.finite_part.as_ref().unwrap();
        ensure!(
            dm_fourway(fin).unwrap().lengths()[2..] == [0, 0],
            "{label}: alpha_p finite part not connected"
        );
        ensure!(
            zp.vector_dim == 0 && zp.finite_part.as_ref().is_some_and(|m| m.is_zero()),
            "{label}: Z/p report not etale"
        );
        let q = f.q();
        let mut best = 0u64;
        for t in 1..=3usize {
            let l = Gf::new(f.p() as u64, f.n() * t);
            let root = l.root_of(f.modulus());
            let emb = |a: &Vec<Vec<ffgs::field::Fq>>| -> Vec<Vec<u64>> {
                a.iter()
                    .map(|row| row.iter().map(|x| l.embed(root, &f.coeffs(x))).collect())
                    .collect()
            };
            let coker = if a_prev.is_empty() {
                1
            } else {
                kernel_cokernel(&l, &emb(&a_prev), false).1
            };
            let ker = if a_cur.is_empty() {
                1
            } else {
                kernel_cokernel(&l, &emb(&a_cur), false).0
            };
            // the finite part is connected, so it has one rational point
            let predicted = q.pow((t * alpha.vector_dim) as u32);
            ensure!(
                coker * ker == predicted,
                "{label} t={t}: alpha_p count {} vs {predicted}",
                coker * ker
            );
            let fixed = if a_cur.is_empty() {
                1
            } else {
                kernel_cokernel(&l, &emb(&a_cur), true).0
            };
            best = best.max(fixed);
        }
        let et = zp.etale_rank.unwrap();
        ensure!(
            best == (f.p() as u64).pow(et),
            "{label}: Z/p count {best} vs p^{et}"
        );
        self.reports += 2;
        Ok(String::new())
    }
}

fn one_degree_packet(f: FieldSpec, prev: Option<Matrix>, cur: Matrix) -> GeometricPacket {
    let mut degrees = std::collections::BTreeMap::new();
    let deg = |m: Matrix| DegreeData {
        wo: CartierModule::zero(f, 6, 6),
        o: Some(OData { f: m }),
        b: None,
        d: None,
        etale_corank: None,
    };
    let r = WittRing::get(f, 1).unwrap();
    degrees.insert(0, deg(prev.unwrap_or_else(|| Matrix::zeros(&r, 0, 0))));
    degrees.insert(1, deg(cur));
    GeometricPacket {
        field: f,
        witt_precision: 6,
        v_precision: 6,
        degrees,
        extension_policy: ffgs::cartier::ExtensionPolicy::Split,
    }
}

fn all_matrices(f: FieldSpec, d: usize) -> Vec<Matrix> {
    let r = WittRing::get(f, 1).unwrap();
    let els: Vec<_> = f.elements().collect();
    let total = els.len().pow((d * d) as u32);
    (0..total)
        .map(|mut idx| {
            let mut m = Matrix::zeros(&r, d, d);
            for a in 0..d {
                for b in 0..d {
                    m.set(a, b, r.lift(&els[idx % els.len()]));
                    idx /= els.len();
                }
            }
            m
        })
        .collect()
}

// 13. Point counts.
fn point_counts() -> Check {
    let mut c = Counter { reports: 0 };
    for (name, p) in all_examples() {
        for &i in p.degrees.keys() {
            c.check(&format!("{name} degree {i}"), &p, i)?;
        }
    }
    for q in [(2, 1), (3, 1), (2, 2), (3, 2)] {
        let f = k(q.0, q.1);
        let ms = all_matrices(f, 1);
        for a in &ms {
            for b in &ms {
                c.check(
                    &format!("1x1 over {f}"),
                    &one_degree_packet(f, Some(a.clone()), b.clone()),
                    1,
                )?;
            }
        }
    }
    let f = k(2, 1);
    let ms = all_matrices(f, 2);
    for a in &ms {
        for b in &ms {
            c.check(
                "2x2 over F_2",
                &one_degree_packet(f, Some(a.clone()), b.clone()),
                1,
            )?;
        }
    }
    Ok(format!(
        "{} alpha_p / Z/p reports match brute-force counts over F_(q^t), t <= 3",
        c.reports
    ))
}

/// Every report the library produces for a packet, as comparable text.
fn all_reports(p: &GeometricPacket) -> Vec<(String, Option<String>)> {
    let mut out = Vec::new();
    let mut push = |label: String, r: Option<String>| out.push((label, r));
    for &i in p.degrees.keys() {
        let fmt = |r: ffgs::error::Result<CohomReport>| r.ok().map(|r| format!("{r:?}"));
        push(format!("alpha {i}"), fmt(h_alpha_p(p, i)));
        push(format!("z_p {i}"), fmt(h_z_p(p, i)));
        push(format!("bundle {i}"), fmt(projective_bundle_mu(p, i)));
        for n in 1..=2 {
            push(format!("mu^{n} {i}"), fmt(h_mu_p(p, i, n)));
            push(
                format!("omega_{n} {i}"),
                fmt(h_omega_nu(p, i, n, OmegaNu::Omega)),
            );
            push(format!("nu_{n} {i}"), fmt(h_omega_nu(p, i, n, OmegaNu::Nu)));
        }
        push(
            format!("phi {i}"),
            phi_fl_report(p, i).ok().map(|r| format!("{r:?}")),
        );
        push(
            format!("psi {i}"),
            psi_report(p, i).ok().map(|r| format!("{r:?}")),
        );
        push(
            format!("obstruction {i}"),
            phi_obstruction(p, i).ok().map(|r| format!("{r:?}")),
        );
        push(
            format!("les {i}"),
            les_check(p, i).ok().map(|r| format!("{r:?}")),
        );
        push(
            format!("parallelogram {i}"),
            parallelogram_check(p, i).ok().map(|r| format!("{r:?}")),
        );
        for n in 1..=3 {
            let wo = &p.degrees[&i].wo;
            push(
                format!("tc_{n} {i}"),
                cm_tc_n(wo, n).ok().map(|r| format!("{r:?}")),
            );
        }
    }
    out
}

// 14. Precision stability.
fn precision_stability() -> Check {
    let mut compared = 0;
    for (name, p) in all_examples() {
        let lo = all_reports(&p.with_precision(6, 6).unwrap());
        let hi = all_reports(&p.with_precision(7, 7).unwrap());
        for ((label, a), (_, b)) in lo.iter().zip(&hi) {
            if let Some(a) = a {
                ensure!(
                    Some(a) == b.as_ref(),
                    "{name} {label} changed under (6,6) -> (7,7)"
                );
                compared += 1;
            }
        }
    }
    ensure!(compared > 0, "nothing compared");
    Ok(format!(
        "{compared} reports identical under (m,N) = (6,6) -> (7,7)"
    ))
}

fn reserialize(text: &str) -> std::result::Result<String, String> {
    use ffgs::cli::commands::*;
    use ffgs::cli::serial::{parse, serialize, FieldClassification, FieldReport};
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let schema = v["schema"].as_str().ok_or("no schema")?.to_string();
    macro_rules! rt {
        ($t:ty) => {
            parse::<$t>(text)
                .map(|x| serialize(&x))
                .map_err(|e| e.to_string())
        };
    }
    match schema.as_str() {
        "ffgs_dm_v1" => rt!(DieudonneModule),
        "ffgs_gs_v1" => rt!(ffgs::group_scheme::GroupScheme),
        "ffgs_classification_v1" => rt!(FieldClassification),
        "ffgs_cartier_v1" => rt!(CartierModule),
        "ffgs_packet_v1" => rt!(GeometricPacket),
        "ffgs_cohom_report_v1" => rt!(FieldReport<CohomReport>),
        "ffgs_formal_report_v1" => rt!(FieldReport<FormalGroupReport>),
        "ffgs_les_report_v1" => rt!(LesReport),
        "ffgs_parallelogram_report_v1" => rt!(ParallelogramReport),
        "ffgs_iso_v1" => rt!(IsoDoc),
        "ffgs_validation_v1" => rt!(ValidationDoc),
        "ffgs_example_list_v1" => rt!(ExampleListDoc),
        "ffgs_connected_v1" => rt!(ConnectedDoc),
        "ffgs_fourway_v1" => rt!(FourWayParts),
        "ffgs_batch_v1" => rt!(BatchDoc),
        "ffgs_error_v1" => rt!(ErrorDoc),
        other => Err(format!("unknown schema {other}")),
    }
}

fn cli_commands() -> Vec<Vec<&'static str>> {
    let mut cmds: Vec<Vec<&str>> = vec![
        vec!["atom", "mu_p", "--p", "3"],
        vec!["atom", "M11", "--p", "2", "--n", "2"],
        vec!["atom", "Z/p^2", "--p", "5"],
        vec!["dm", "dual", "--atom", "alpha_p^2", "--p", "3"],
        vec!["dm", "fourway", "--atom", "M11", "--p", "3"],
        vec![
            "dm", "kernel", "--atom", "mu_p^3", "--p", "2", "--word", "V1",
        ],
        vec!["gs", "classify", "--atom", "mu_p^2", "--p", "2"],
        vec![
            "gs",
            "height-one",
            "--p",
            "2",
            "--n",
            "2",
            "--rho",
            "0:1,1;0,0",
        ],
        vec!["gs", "frobenius-kernel", "--atom", "M11", "--p", "2"],
        vec!["examples", "list"],
        vec!["examples", "show", "k3_supersingular"],
        vec!["atom", "mu_p", "--p", "4"],
    ];
    for pk in [
        "examples/elliptic_ordinary.json",
        "examples/elliptic_supersingular.json",
        "examples/k3_ordinary.json",
        "examples/k3_supersingular.json",
    ] {
        for coeff in [
            "alpha_p",
            "z_p",
            "mu_p",
            "mu_p^2",
            "omega_1",
            "nu_1",
            "mu_p_bundle",
        ] {
            cmds.push(vec![
                "cohom",
                "report",
                "--packet",
                pk,
                "--all-degrees",
                "--coeff",
                coeff,
            ]);
        }
        cmds.push(vec!["formal", "phi-fl", "--packet", pk, "--all-degrees"]);
        cmds.push(vec!["formal", "psi", "--packet", pk, "--deg", "1"]);
        cmds.push(vec!["formal", "obstruction", "--packet", pk, "--deg", "2"]);
        cmds.push(vec!["check", "les", "--packet", pk, "--all-degrees"]);
        cmds.push(vec![
            "check",
            "parallelogram",
            "--packet",
            pk,
            "--all-degrees",
        ]);
        cmds.push(vec!["check", "validate", "--packet", pk]);
        cmds.push(vec!["cartier", "connected", "--packet", pk, "--deg", "1"]);
        cmds.push(vec![
            "cartier", "tc", "--packet", pk, "--deg", "2", "--level", "2",
        ]);
        cmds.push(vec!["cartier", "show", "--packet", pk, "--deg", "1"]);
    }
    cmds
}

// 15. CLI determinism and parse/serialize identity.
fn cli_round_trip() -> Check {
    use ffgs::cli::serial::{parse, serialize, Serial};
    let cmds = cli_commands();
    for c in &cmds {
        let argv: Vec<&str> = std::iter::once("ffgs")
            .chain(c.iter().copied())
            .chain(["--json"])
            .collect();
        let a = ffgs::cli::run(argv.clone());
        let b = ffgs::cli::run(argv.clone());
        ensure!(a.machine == b.machine, "{c:?}: output differs between runs");
        let want = if c[..] == ["atom", "mu_p", "--p", "4"] {
            1
        } else {
            0
        };
        ensure!(
            a.exit_code == want,
            "{c:?}: exit {} (expected {want})",
            a.exit_code
        );
        ensure!(
            a.text() == a.machine,
            "{c:?}: --json did not select the machine block"
        );
        let again = reserialize(&a.machine).map_err(|e| format!("{c:?}: {e}"))?;
        ensure!(
            again == a.machine,
            "{c:?}: machine block does not round-trip"
        );
    }
    fn rt<T: Serial + PartialEq + std::fmt::Debug>(x: &T) -> bool {
        parse::<T>(&serialize(x)).as_ref() == Ok(x)
    }
    let mut objects = 0;
    let corpus = module_corpus();
    for m in &corpus {
        ensure!(rt(m), "module does not round-trip: {m:?}");
        objects += 1;
    }
    for (_, p) in all_examples() {
        ensure!(rt(&p), "packet does not round-trip");
        objects += 1;
        for d in p.degrees.values() {
            ensure!(rt(&d.wo), "Cartier module does not round-trip");
            objects += 1;
        }
    }
    for f in [k(2, 1), k(3, 2)] {
        let m = CartierModule::new(f, summand_kinds(f), 6, 6).unwrap();
        ensure!(
            rt(&m),
            "Cartier module with all summand kinds does not round-trip"
        );
        objects += 1;
    }
    Ok(format!(
        "{} commands byte-identical across runs and round-trip; {objects} objects round-trip",
        cmds.len()
    ))
}

fn report(line: String) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}").unwrap();
    out.flush().unwrap();
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("Witt ring laws + ghost oracle", witt_ghost_oracle),
        ("operator identities FV = VF = p", operator_identities),
        ("atom fidelity", atom_fidelity),
        ("duality involution", duality),
        (
            "bracket identity TC_n = ker V^n on M/V^(n+2)",
            bracket_identity,
        ),
        ("height-one dictionary", height_one),
        ("supersingular elliptic packet", supersingular_elliptic),
        ("ordinary elliptic packet", ordinary_elliptic),
        ("supersingular K3 packet", supersingular_k3),
        ("prorepresentability obstruction", obstruction),
        ("LES and parallelogram", les_and_parallelogram),
        ("projective bundle formula", projective_bundle),
        ("brute-force point counts", point_counts),
        ("precision stability", precision_stability),
        ("CLI round-trip and determinism", cli_round_trip),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            // written past the test harness capture so the lines always show
            Ok(detail) => report(format!("[PASS] {:>2}. {name}: {detail} ({secs:.2}s)", i + 1)),
            Err(why) => {
                report(format!("[FAIL] {:>2}. {name}: {why} ({secs:.2}s)", i + 1));
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
