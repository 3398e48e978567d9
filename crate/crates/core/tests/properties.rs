//! Property tests for ring laws, operator identities, duality and serialization.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ffgs::cli::serial::{parse, serialize};
use ffgs::dieudonne::{dm_dual, dm_fourway, DieudonneModule};
use ffgs::field::{FieldSpec, Fq};
use ffgs::group_scheme::{random_basis, random_module};
use ffgs::iso::{module_iso_test, IsoOutcome};
use ffgs::witt::{witt_add, witt_mul, witt_neg, witt_structure, StructureMap, WittVector};

const FIELDS: [(u32, usize); 5] = [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2)];

fn field(i: usize) -> FieldSpec {
    let (p, n) = FIELDS[i % FIELDS.len()];
    FieldSpec::new(p, n, None).unwrap()
}

fn vector(k: FieldSpec, m: usize, rng: &mut ChaCha8Rng) -> WittVector {
    WittVector::new(k, (0..m).map(|_| k.random(rng)).collect()).unwrap()
}

fn module(seed: u64, fi: usize, len: u32) -> DieudonneModule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_module(field(fi), len, &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witt_ring_laws(seed: u64, fi in 0usize..5, m in 1usize..5) {
        let k = field(fi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (vector(k, m, &mut rng), vector(k, m, &mut rng), vector(k, m, &mut rng));
        let add = |x: &WittVector, y: &WittVector| witt_add(x, y).unwrap();
        let mul = |x: &WittVector, y: &WittVector| witt_mul(x, y).unwrap();
        prop_assert_eq!(add(&a, &b), add(&b, &a));
        prop_assert_eq!(mul(&a, &b), mul(&b, &a));
        prop_assert_eq!(add(&add(&a, &b), &c), add(&a, &add(&b, &c)));
        prop_assert_eq!(mul(&mul(&a, &b), &c), mul(&a, &mul(&b, &c)));
        prop_assert_eq!(mul(&a, &add(&b, &c)), add(&mul(&a, &b), &mul(&a, &c)));
        prop_assert!(add(&a, &witt_neg(&a).unwrap()).is_zero());
        prop_assert_eq!(mul(&a, &WittVector::one(k, m)), a.clone());
    }

    #[test]
    fn witt_vf_is_p(seed: u64, fi in 0usize..5, m in 1usize..5) {
        let k = field(fi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = vector(k, m, &mut rng);
        // any lift of x to length m + 1 has the same p-multiple
        let mut comps = x.components().to_vec();
        comps.push(k.random(&mut rng));
        let lift = WittVector::new(k, comps).unwrap();
        let p = WittVector::from_int(k, m + 1, k.p() as i64).unwrap();
        let px = witt_mul(&p, &lift).unwrap();
        let vf = witt_structure(&witt_structure(&x, StructureMap::F, None).unwrap(), StructureMap::V, None).unwrap();
        let fv = witt_structure(&witt_structure(&x, StructureMap::V, None).unwrap(), StructureMap::F, None).unwrap();
        prop_assert_eq!(&vf, &px);
        prop_assert_eq!(&fv, &px);
    }

    #[test]
    fn module_fv_is_p(seed: u64, fi in 0usize..5, len in 1u32..5) {
        let m = module(seed, fi, len);
        let r = m.ring().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let x = m.reduce(&(0..m.rank()).map(|_| r.random(&mut rng)).collect::<Vec<_>>());
        let px = m.reduce(&x.iter().map(|c| r.scale_int(c, m.field().p() as i64)).collect::<Vec<_>>());
        prop_assert_eq!(m.apply_f(&m.apply_v(&x)), px.clone());
        prop_assert_eq!(m.apply_v(&m.apply_f(&x)), px);
    }

    #[test]
    fn dual_is_an_involution(seed: u64, fi in 0usize..5, len in 1u32..5) {
        let m = module(seed, fi, len);
        let dd = dm_dual(&dm_dual(&m));
        prop_assert_eq!(dd.length(), m.length());
        prop_assert_eq!(module_iso_test(&dd, &m).unwrap(), IsoOutcome::Iso);
    }

    #[test]
    fn invariants_survive_base_change(seed: u64, fi in 0usize..5, len in 1u32..5) {
        let m = module(seed, fi, len);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let n = random_basis(&m, &mut rng).unwrap();
        prop_assert_eq!(module_iso_test(&m, &n).unwrap(), IsoOutcome::Iso);
        prop_assert_eq!(dm_fourway(&m).unwrap().lengths(), dm_fourway(&n).unwrap().lengths());
        prop_assert_eq!(module_iso_test(&dm_dual(&m), &dm_dual(&n)).unwrap(), IsoOutcome::Iso);
    }

    #[test]
    fn serialization_round_trip(seed: u64, fi in 0usize..5, len in 0u32..6) {
        let m = module(seed, fi, len);
        let text = serialize(&m);
        prop_assert_eq!(parse::<DieudonneModule>(&text).unwrap(), m);
        prop_assert_eq!(serialize(&parse::<DieudonneModule>(&text).unwrap()), text);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let len = rng.gen_range(1..5);
        let w = vector(field(fi), len, &mut rng);
        prop_assert_eq!(parse::<WittVector>(&serialize(&w)).unwrap(), w);
    }

    #[test]
    fn field_arithmetic(seed: u64, fi in 0usize..5) {
        let k = field(fi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b): (Fq, Fq) = (k.random(&mut rng), k.random(&mut rng));
        prop_assert_eq!(k.frob(&k.add(&a, &b), 1), k.add(&k.frob(&a, 1), &k.frob(&b, 1)));
        prop_assert_eq!(k.frob(&a, k.n() as i64), a);
        if let Some(inv) = k.inv(&a) {
            prop_assert_eq!(k.mul(&a, &inv), k.one());
        }
    }
}
