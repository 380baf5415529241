use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subadd_core::cone::{
    apply_f, apply_f_inv, check_subadditive_pair, make_generators, sample_element, ConeElement,
    GeneratorId, GeneratorTable, PairCase,
};

fn table() -> GeneratorTable {
    make_generators(20, 5).unwrap()
}

fn rational() -> impl Strategy<Value = BigRational> {
    (1i64..10_000, 1i64..1_000).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// `f_n(x) >= x` on every base ray.
    #[test]
    fn map_dominates_on_rays(n in 1u32..=20, r in rational()) {
        let t = table();
        let x = ConeElement::ray(GeneratorId::base(n), r.clone()).unwrap();
        let fx = apply_f(&t, &x).unwrap();
        prop_assert!(fx.coeff(GeneratorId::base(n)).unwrap() >= &r);
    }

    #[test]
    fn inverse_round_trip(seed in any::<u64>()) {
        let t = table();
        let x = sample_element(&t, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(&apply_f_inv(&t, &apply_f(&t, &x).unwrap()).unwrap(), &x);
        prop_assert_eq!(&apply_f(&t, &apply_f_inv(&t, &x).unwrap()).unwrap(), &x);
    }
}

#[test]
fn ten_thousand_pairs_are_subadditive() {
    let t = table();
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let mut seen = std::collections::BTreeSet::new();
    for _ in 0..10_000 {
        let x = sample_element(&t, &mut rng);
        let y = sample_element(&t, &mut rng);
        let w = check_subadditive_pair(&t, &x, &y).unwrap();
        seen.insert(format!("{:?}", w.case));
    }
    assert_eq!(seen.len(), 4, "cases covered: {seen:?}");
}

#[test]
fn same_ray_pairs_across_the_knee() {
    let t = table();
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    for n in 1..=20 {
        let id = GeneratorId::base(n);
        for (a, b) in [
            (q(1, 3), q(1, 3)),
            (q(1, 2), q(3, 4)),
            (q(2, 1), q(5, 1)),
            (q(1, 1), q(1, 1)),
        ] {
            let x = ConeElement::ray(id, a).unwrap();
            let y = ConeElement::ray(id, b).unwrap();
            let w = check_subadditive_pair(&t, &x, &y).unwrap();
            assert_eq!(w.case, PairCase::SameRay);
        }
    }
    // two knee points: f(2 p_n) = (q_n + 1) p_n against 2 q_n p_n
    let x = ConeElement::ray(GeneratorId::base(3), BigRational::one()).unwrap();
    let w = check_subadditive_pair(&t, &x, &x).unwrap();
    let q3 = BigRational::from_integer(t.q_of(3).unwrap().clone());
    assert_eq!(w.slack[&GeneratorId::base(3)], q3 - BigRational::one());
}
