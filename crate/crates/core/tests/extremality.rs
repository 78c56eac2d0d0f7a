use limbsys_core::acceptance::{random_coupling, witness_is_valid};
use limbsys_core::extremality::{brute_force_oracle, enumerate_vertices, forest_certificate, rank_certificate, witness_violation, Evidence};
use limbsys_core::{check_extremal, solve, CostMatrix, Coupling, DiscreteMeasure, Error, Method, Rational, Scalar};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

#[test]
fn full_2x2_support_is_not_extremal() {
    let c = Coupling::new(2, 2, [(0, 0, r(1, 4)), (0, 1, r(1, 4)), (1, 0, r(1, 4)), (1, 1, r(1, 4))]).unwrap();
    let v = check_extremal(&c, &Method::ALL, 36);
    assert!(v.agree);
    assert_eq!(v.extremal(), Some(false));
    for verdict in &v.verdicts {
        let w = verdict.witness.as_ref().unwrap();
        assert!(witness_is_valid(&c, w));
        assert_eq!(witness_violation(&c, w), None);
    }
}

#[test]
fn brute_force_refuses_large_instances() {
    let c: Coupling<Rational> = Coupling::new(7, 7, (0..7).map(|i| (i, i, r(1, 7)))).unwrap();
    assert!(matches!(brute_force_oracle(&c, 36), Err(Error::TooLarge { .. })));
    let v = check_extremal(&c, &Method::ALL, 36);
    assert_eq!(v.skipped.len(), 1);
    assert_eq!(v.extremal(), Some(true));
}

#[test]
fn two_point_marginals_have_two_vertices() {
    let h = vec![r(1, 2), r(1, 2)];
    let vs = enumerate_vertices(&h, &h, 36).unwrap();
    assert_eq!(vs.len(), 2);
}

#[test]
fn solver_outputs_are_extremal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (m, n) = (rng.gen_range(1..7), rng.gen_range(1..7));
        let mu = DiscreteMeasure::dense(vec![r(1, m as i64); m]).unwrap();
        let nu = DiscreteMeasure::dense(vec![r(1, n as i64); n]).unwrap();
        let cost = CostMatrix::from_fn(m, n, |_, _| Rational::from_i64(rng.gen_range(0..5))).unwrap();
        let s = solve(&mu, &nu, &cost).unwrap();
        let v = check_extremal(&s.coupling, &Method::ALL, 36);
        assert!(v.agree);
        assert_eq!(v.extremal(), Some(true));
    }
}

proptest! {
    #[test]
    fn certificates_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_coupling(&mut rng, 5, 3);
        let f = forest_certificate(&c);
        let k = rank_certificate(&c);
        let b = brute_force_oracle(&c, 36).unwrap();
        prop_assert_eq!(f.extremal, k.extremal);
        prop_assert_eq!(f.extremal, b.extremal);
        if let (Evidence::Forest { nodes, components, .. }, Evidence::Rank { rank, support_size, deficit, .. }) = (&f.evidence, &k.evidence) {
            prop_assert_eq!(*rank, nodes - components);
            prop_assert_eq!(*deficit, support_size - rank);
        }
        for v in [&f, &k, &b] {
            match &v.witness {
                Some(w) => {
                    prop_assert!(!v.extremal);
                    prop_assert!(witness_is_valid(&c, w));
                }
                None => prop_assert!(v.extremal),
            }
        }
    }

    #[test]
    fn float_and_exact_verdicts_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_coupling(&mut rng, 6, 2);
        let cf: Coupling<f64> = c.convert();
        prop_assert_eq!(forest_certificate(&c).extremal, forest_certificate(&cf).extremal);
        prop_assert_eq!(rank_certificate(&c).extremal, rank_certificate(&cf).extremal);
        prop_assert!(f64::is_finite_value(&cf.mass().as_f64()));
    }
}
