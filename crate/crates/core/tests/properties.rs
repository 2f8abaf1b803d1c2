use std::sync::Arc;

use proptest::prelude::*;

use kzmono::fusion::FusionRing;
use kzmono::kz::KZForm;
use kzmono::tensor::TensorSystem;
use kzmono::{LieAlgebra, Series, Weight};

const ALGEBRAS: [(Series, usize); 9] = [
    (Series::A, 1),
    (Series::A, 3),
    (Series::B, 3),
    (Series::C, 2),
    (Series::D, 4),
    (Series::E, 6),
    (Series::F, 4),
    (Series::G, 2),
    (Series::E, 8),
];

fn algebra() -> impl Strategy<Value = LieAlgebra> {
    (0..ALGEBRAS.len()).prop_map(|i| LieAlgebra::new(ALGEBRAS[i].0, ALGEBRAS[i].1).unwrap())
}

fn weight(rank: usize) -> impl Strategy<Value = Weight> {
    prop::collection::vec(-4i64..=4, rank).prop_map(Weight)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_symmetric_and_weyl_invariant(
        (alg, a, b, i) in algebra().prop_flat_map(|alg| {
            let r = alg.rank();
            (Just(alg), weight(r), weight(r), 0..r)
        })
    ) {
        let p = alg.pairing(&a, &b).unwrap();
        prop_assert_eq!(&p, &alg.pairing(&b, &a).unwrap());
        let (sa, sb) = (alg.reflect(&a, i), alg.reflect(&b, i));
        prop_assert_eq!(&p, &alg.pairing(&sa, &sb).unwrap());
        prop_assert_eq!(alg.reflect(&sa, i), a);
    }

    #[test]
    fn root_lattice_closed(
        (alg, a, b, i) in algebra().prop_flat_map(|alg| {
            let r = alg.rank();
            (Just(alg), weight(r), weight(r), 0..r)
        })
    ) {
        prop_assert!(alg.in_root_lattice(&alg.simple_root(i)).unwrap());
        let (ra, rb) = (alg.in_root_lattice(&a).unwrap(), alg.in_root_lattice(&b).unwrap());
        if ra && rb {
            prop_assert!(alg.in_root_lattice(&a.add(&b)).unwrap());
        }
        prop_assert_eq!(alg.in_root_lattice(&alg.reflect(&a, i)).unwrap(), ra);
        prop_assert_eq!(alg.in_root_lattice(&a.add(&alg.simple_root(i))).unwrap(), ra);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_systems_are_flat(labels in prop::collection::vec(0i64..=2, 3..=5), k in 1i64..=3) {
        let alg = Arc::new(LieAlgebra::new(Series::A, 1).unwrap());
        let ws: Vec<Weight> = labels.iter().map(|l| Weight(vec![*l])).collect();
        let sys = Arc::new(TensorSystem::new(alg, &ws).unwrap());
        let report = KZForm::new(sys, k).unwrap().flatness_check().unwrap();
        prop_assert!(report.holds(), "{:?}", report);
    }

    #[test]
    fn random_rank_two_systems_are_flat(labels in prop::collection::vec((0i64..=1, 0i64..=1), 3)) {
        let alg = Arc::new(LieAlgebra::new(Series::A, 2).unwrap());
        let ws: Vec<Weight> = labels.iter().map(|(a, b)| Weight(vec![*a, *b])).collect();
        let sys = Arc::new(TensorSystem::new(alg, &ws).unwrap());
        prop_assert!(KZForm::new(sys, 2).unwrap().flatness_check().unwrap().holds());
    }

    #[test]
    fn fusion_associative(k in 1i64..=4, i in 0usize..5, j in 0usize..5, l in 0usize..5) {
        let alg = Arc::new(LieAlgebra::new(Series::A, 1).unwrap());
        let ring = FusionRing::new(alg, k).unwrap();
        let w = ring.weights().to_vec();
        let (a, b, c) = (&w[i % w.len()], &w[j % w.len()], &w[l % w.len()]);
        for d in &w {
            let left: u64 = w.iter().map(|x| ring.coefficient(a, b, x).unwrap() * ring.coefficient(x, c, d).unwrap()).sum();
            let right: u64 = w.iter().map(|x| ring.coefficient(b, c, x).unwrap() * ring.coefficient(a, x, d).unwrap()).sum();
            prop_assert_eq!(left, right);
        }
    }
}
