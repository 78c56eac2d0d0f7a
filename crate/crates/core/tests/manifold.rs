use std::collections::BTreeSet;

use limbsys_core::kantorovich::Pricing;
use limbsys_core::manifold::{circle_demo, cross_difference, h_values, twist_census, Classification, CircleDemoParams};
use limbsys_core::{build_support_graph, decompose, solve, solve_with, CostFunction, CostMatrix, DiscreteMeasure, GridManifold, Rational, Scalar, SolverOptions};
use num_traits::Signed;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn positive_weights(rng: &mut ChaCha8Rng, n: usize) -> DiscreteMeasure<Rational> {
    let ints: Vec<i64> = (0..n).map(|_| rng.gen_range(1..20)).collect();
    let t: i64 = ints.iter().sum();
    DiscreteMeasure::dense(ints.into_iter().map(|w| Rational::from_ratio(w, t)).collect()).unwrap()
}

#[test]
fn interval_costs_classify() {
    for (cost, want) in [
        (CostFunction::NegativeProduct, Classification::Twisted),
        (CostFunction::Quadratic, Classification::Twisted),
        (CostFunction::Constant, Classification::Neither),
    ] {
        let r = twist_census(&GridManifold::interval(16).unwrap(), cost).unwrap();
        assert_eq!(r.classification, want, "{}", cost.name());
    }
}

#[test]
fn coincident_peaks_give_one_limb() {
    let mut p = CircleDemoParams::new(32, 4.0);
    p.nu_peak = p.mu_peak;
    p.reorderings = 1;
    let r = circle_demo::<f64>(&p).unwrap();
    assert_eq!(r.limb_count, Some(1));
    assert!(r.solution.coupling.support().all(|(i, j)| i == j));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn circle_census_has_one_min_and_one_max(n in 8usize..48) {
        let r = twist_census(&GridManifold::circle(n).unwrap(), CostFunction::CircleCos).unwrap();
        prop_assert_eq!(r.pairs.len(), n * (n - 1));
        for p in &r.pairs {
            prop_assert_eq!((p.minima, p.maxima), (1, 1));
        }
        prop_assert_eq!(r.classification, Classification::Subtwisted);
    }

    #[test]
    fn zero_set_is_c_monotone(seed in any::<u64>(), circle in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..14);
        let (grid, f) = if circle {
            (GridManifold::circle(n).unwrap(), CostFunction::CircleCos)
        } else {
            (GridManifold::interval(n).unwrap(), CostFunction::Quadratic)
        };
        let cost: CostMatrix<Rational> = f.matrix(&grid, &grid).unwrap();
        let (mu, nu) = (positive_weights(&mut rng, n), positive_weights(&mut rng, n));
        let s = solve(&mu, &nu, &cost).unwrap();
        for &(x, y) in &s.zero_set {
            for &(xp, yp) in &s.zero_set {
                prop_assert!(!cross_difference(&cost, x, y, xp, yp).is_positive());
            }
        }
        for (_, h) in h_values(&s.zero_set, &cost) {
            prop_assert!(!h.is_positive());
        }
    }

    #[test]
    fn twisted_cost_gives_monotone_unique_support(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..16);
        let grid = GridManifold::interval(n).unwrap();
        let cost: CostMatrix<Rational> = CostFunction::NegativeProduct.matrix(&grid, &grid).unwrap();
        let (mu, nu) = (positive_weights(&mut rng, n), positive_weights(&mut rng, n));
        let s = solve(&mu, &nu, &cost).unwrap();
        let cells: Vec<_> = s.coupling.support().collect();
        for &(i, j) in &cells {
            for &(i2, j2) in &cells {
                prop_assert!(!(i < i2 && j > j2));
            }
        }
        for order in 1..=3u64 {
            let opts = SolverOptions { pricing: Pricing::Shuffled(order), ..Default::default() };
            prop_assert_eq!(&solve_with(&mu, &nu, &cost, &opts).unwrap().coupling, &s.coupling);
        }
    }
}

/// Subtwisted cost with everywhere-positive densities should leave at most
/// two limbs. Staircase plans on the grid split fibers and exceed this.
#[test]
#[ignore = "fails at grid scale: discrete optimal plans split fibers into many limbs"]
fn subtwisted_supports_have_at_most_two_limbs() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for n in [32usize, 64, 128] {
        let grid = GridManifold::circle(n).unwrap();
        let cost: CostMatrix<f64> = CostFunction::CircleCos.matrix(&grid, &grid).unwrap();
        let kappa = rng.gen_range(1.0..6.0);
        let (a, b) = (rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.0..std::f64::consts::TAU));
        let mu = limbsys_core::manifold::von_mises_weights::<f64>(&grid, kappa, a).unwrap();
        let nu = limbsys_core::manifold::von_mises_weights::<f64>(&grid, kappa, b).unwrap();
        let s = solve(&mu, &nu, &cost).unwrap();
        let limbs = decompose(&build_support_graph(&s.coupling)).unwrap().num_limbs();
        assert!(limbs <= 2, "n={n}: {limbs} limbs");
    }
}

/// Twisted cost should give a single graph.
#[test]
#[ignore = "fails at grid scale: a monotone staircase is a graph only when the marginals match"]
fn twisted_supports_are_one_limb() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let grid = GridManifold::interval(16).unwrap();
    let cost: CostMatrix<Rational> = CostFunction::NegativeProduct.matrix(&grid, &grid).unwrap();
    let (mu, nu) = (positive_weights(&mut rng, 16), positive_weights(&mut rng, 16));
    let s = solve(&mu, &nu, &cost).unwrap();
    let system = decompose(&build_support_graph(&s.coupling)).unwrap();
    let fibers: BTreeSet<usize> = s.coupling.support().map(|e| e.0).collect();
    assert_eq!(fibers.len(), s.coupling.nnz());
    assert_eq!(system.num_limbs(), 1);
}
