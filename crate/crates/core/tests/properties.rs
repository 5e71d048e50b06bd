use partial_repair::exact::{verify_with_generic_repair, ExactSecureSystem};
use partial_repair::galois::{vandermonde_on, FieldMatrix, PrimeField};
use partial_repair::repair::{
    allocate_transmissions, check_feasible, functional_repair, gamma_min_bruteforce,
};
use partial_repair::secrecy::oracle::leakage_bruteforce;
use partial_repair::secrecy::{
    audit, audit_universal, construct_precoder, eavesdropper_view, strong_leakage, weak_flags,
    EavesdropperView, Scope, SecretPartition, SecurityMode, Universe,
};
use partial_repair::{seeded_rng, CachingSystem, ErasurePattern, RepairPlan, SystemConfig};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn field() -> impl Strategy<Value = PrimeField> {
    prop::sample::select(vec![2u64, 3, 5, 7, 65537]).prop_map(|p| PrimeField::new(p).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn field_axioms(f in field(), a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (f.reduce(a), f.reduce(b), f.reduce(c));
        prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn rank_iff_inverse(f in field(), n in 1usize..6, seed in any::<u64>()) {
        let m = FieldMatrix::random(f, n, n, &mut seeded_rng(seed));
        let full = m.rank() == n;
        prop_assert_eq!(full, m.inverse().is_ok());
        if full {
            prop_assert_eq!(m.mul(&m.inverse().unwrap()).unwrap(), FieldMatrix::identity(f, n));
        }
    }

    #[test]
    fn rowspace_agrees_with_rank(f in field(), r in 0usize..5, c in 1usize..6, seed in any::<u64>()) {
        let mut rng = seeded_rng(seed);
        let m = FieldMatrix::random(f, r, c, &mut rng);
        let v: Vec<u64> = (0..c).map(|_| f.random(&mut rng)).collect();
        let mut stacked = m.clone();
        stacked.push_row(&v).unwrap();
        prop_assert_eq!(m.rowspace_contains(&v).unwrap(), stacked.rank() == m.rank());
    }

    #[test]
    fn collect_inverts_encode(seed in any::<u64>(), q in prop::sample::select(vec![11u64, 13, 257])) {
        let sys = CachingSystem::build(SystemConfig::new(5, 3, 2, q).unwrap(), seed).unwrap();
        let mut rng = seeded_rng(seed ^ 1);
        let f = sys.field();
        let src: Vec<u64> = (0..6).map(|_| f.random(&mut rng)).collect();
        let sys = sys.with_payload(src.clone()).unwrap();
        let mut nodes: Vec<usize> = (0..5).collect();
        nodes.shuffle(&mut rng);
        nodes.truncate(3);
        prop_assert_eq!(sys.collect(&nodes).unwrap(), src);
        prop_assert_eq!(sys.coding_matrix().rows(), 10);
        prop_assert!(sys.verify_caching_mds());
    }

    #[test]
    fn feasibility_is_monotone(counts in prop::collection::vec(0usize..=2, 4), r in prop::collection::vec(0usize..=2, 4), bump in 0usize..4) {
        prop_assume!(counts.iter().sum::<usize>() >= 4);
        let p = ErasurePattern::from_counts(2, 2, &counts).unwrap();
        let mut r2 = r.clone();
        r2[bump] += 1;
        if check_feasible(&p, &r) {
            prop_assert!(check_feasible(&p, &r2));
        }
    }

    #[test]
    fn extra_erasure_never_lowers_budget(counts in prop::collection::vec(0usize..=3, 5), node in 0usize..5) {
        prop_assume!(counts.iter().sum::<usize>() > 6 && counts[node] > 0);
        let p = ErasurePattern::from_counts(2, 3, &counts).unwrap();
        let mut fewer = counts.clone();
        fewer[node] -= 1;
        let p2 = ErasurePattern::from_counts(2, 3, &fewer).unwrap();
        prop_assert!(gamma_min_bruteforce(&p2).unwrap() >= gamma_min_bruteforce(&p).unwrap());
    }

    #[test]
    fn allocation_is_minimal_and_feasible(counts in prop::collection::vec(0usize..=2, 5)) {
        prop_assume!(counts.iter().sum::<usize>() >= 6);
        let p = ErasurePattern::from_counts(3, 2, &counts).unwrap();
        let plan = allocate_transmissions(&p).unwrap();
        prop_assert!(check_feasible(&p, plan.counts()));
        prop_assert_eq!(plan.gamma(), gamma_min_bruteforce(&p).unwrap());
    }

    #[test]
    fn functional_repair_restores_mds(seed in any::<u64>(), prob in 0.0f64..0.6) {
        let sys = CachingSystem::build(SystemConfig::new(5, 2, 2, 65537).unwrap(), seed).unwrap();
        let p = ErasurePattern::random(5, 2, 2, prob, &mut seeded_rng(seed)).unwrap();
        let plan = allocate_transmissions(&p).unwrap();
        let out = functional_repair(&sys, &p, &plan, seed).unwrap();
        prop_assert!(out.system.verify_caching_mds());
        prop_assert_eq!(out.system.coding_matrix().rows(), 10);
        prop_assert_eq!(out.plan.gamma(), plan.gamma());
    }

    #[test]
    fn rank_leakage_matches_enumeration(
        q in prop::sample::select(vec![2u64, 3]),
        m in 1usize..=5,
        rows in 0usize..4,
        seed in any::<u64>(),
    ) {
        let f = PrimeField::new(q).unwrap();
        let mut rng = seeded_rng(seed);
        let w = FieldMatrix::random(f, rows, m, &mut rng);
        let mut idx: Vec<usize> = (0..m).collect();
        idx.shuffle(&mut rng);
        let split = (seed % (m as u64 + 1)) as usize;
        let part = SecretPartition::new(m, idx[..split].to_vec(), idx[split..].to_vec()).unwrap();
        let view = EavesdropperView::new(w);
        let oracle = leakage_bruteforce(&view, &part).unwrap();
        let leak = strong_leakage(&view, &part).unwrap();
        prop_assert!((oracle.mutual_information() - leak as f64).abs() < 1e-9);
        prop_assert_eq!(weak_flags(&view, &part).unwrap(), oracle.secret_uniform);
        let a = audit(&view, &part).unwrap();
        if a.strong_secure {
            prop_assert!(a.weakly_secure());
        }
        prop_assert!(leak <= rows.min(split));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn precoders_meet_their_scope(seed in any::<u64>(), weak in any::<bool>()) {
        let f = PrimeField::new(11).unwrap();
        let cfg = SystemConfig::with_field(4, 2, 2, f).unwrap();
        let sys = CachingSystem::build(cfg, seed).unwrap();
        let p = ErasurePattern::from_counts(2, 2, &[2, 2, 1, 1]).unwrap();
        let plan = functional_repair(&sys, &p, &allocate_transmissions(&p).unwrap(), seed).unwrap().plan;
        let (mode, part) = if weak {
            (SecurityMode::Weak, SecretPartition::trailing_keys(4, 0).unwrap())
        } else {
            (SecurityMode::Strong, SecretPartition::trailing_keys(4, 2).unwrap())
        };
        for scope in [Scope::Fixed, Scope::Universal(Universe::SourceSymbols)] {
            let found = construct_precoder(&sys, &plan, mode, scope, &part, seed).unwrap();
            let a = match scope {
                Scope::Fixed => {
                    let view = eavesdropper_view(&sys, &plan, Some(&found.precoder)).unwrap();
                    audit(&view, &part).unwrap()
                }
                Scope::Universal(u) => audit_universal(&sys, &found.precoder, &part, plan.gamma(), u).unwrap(),
            };
            match mode {
                SecurityMode::Strong => prop_assert!(a.strong_secure),
                SecurityMode::Weak => prop_assert!(a.weakly_secure()),
            }
        }
    }
}

#[test]
fn vandermonde_full_rank_small_fields() {
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        let f = PrimeField::new(p).unwrap();
        for k in 1..=8usize.min(p as usize) {
            let points: Vec<u64> = (0..k as u64).collect();
            assert_eq!(
                vandermonde_on(&points, k, f).unwrap().rank(),
                k,
                "p={p} k={k}"
            );
        }
    }
}

#[test]
fn mds_check_ignores_payload() {
    let sys = CachingSystem::build(SystemConfig::new(4, 2, 2, 13).unwrap(), 4).unwrap();
    let a = sys.clone().with_payload(vec![1, 2, 3, 4]).unwrap();
    let b = sys.with_payload(vec![0, 0, 0, 0]).unwrap();
    assert_eq!(a.verify_caching_mds(), b.verify_caching_mds());
}

fn exact_pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=k).flat_map(move |u| (1..=k).filter(move |&v| v != u).map(move |v| (u, v)))
}

#[test]
fn exact_repair_is_exact_over_seeds() {
    for k in 3..=5 {
        let f = PrimeField::smallest_above(k as u64).unwrap();
        for seed in 0..50 {
            let sys = ExactSecureSystem::random(k, f, seed).unwrap();
            for (u, v) in exact_pairs(k) {
                let rep = sys.repair_exact(u, v).unwrap();
                assert!(rep.exact, "k={k} seed={seed} u={u} v={v}");
                assert_eq!(rep.gamma(), 2 * k);
                if seed < 3 {
                    assert!(verify_with_generic_repair(&sys, u, v).unwrap());
                }
            }
        }
    }
}

#[test]
fn exact_security_characterization() {
    for k in 3..=5 {
        let f = PrimeField::smallest_above(k as u64).unwrap();
        let sys = ExactSecureSystem::random(k, f, 17).unwrap();
        for (u, v) in exact_pairs(k) {
            let a = sys.audit_exact(u, v).unwrap();
            let safe = u.min(v) <= 2;
            assert_eq!(a.audit.leakage_qary == 0, safe, "k={k} u={u} v={v}");
            assert_eq!(a.audit.leakage_qary == 0, a.audit.key_rank == a.gamma);
            assert_eq!(a.discrepancy.is_some(), !safe);
            if safe {
                assert_eq!(a.secret_count, k * k - a.gamma);
            }
        }
    }
}

#[test]
fn exact_mds_holds_in_a_larger_field() {
    // The parity block is MDS-compatible once every square minor of Φ is
    // nonzero; at q = 7 this holds for k = 3.
    let f = PrimeField::new(7).unwrap();
    assert!(ExactSecureSystem::random(3, f, 2)
        .unwrap()
        .is_mds()
        .unwrap());
}

#[test]
fn empty_plan_is_secure() {
    let sys = CachingSystem::build(SystemConfig::new(4, 2, 2, 7).unwrap(), 0).unwrap();
    let plan = RepairPlan::from_counts(vec![0; 4]);
    let view = eavesdropper_view(&sys, &plan, None).unwrap();
    let part = SecretPartition::trailing_keys(4, 0).unwrap();
    assert_eq!(strong_leakage(&view, &part).unwrap(), 0);
}
