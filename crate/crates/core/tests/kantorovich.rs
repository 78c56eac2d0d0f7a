use limbsys_core::kantorovich::{zero_set, InitialBasis, Pricing};
use limbsys_core::{solve, solve_with, verify_certificate, CostMatrix, DiscreteMeasure, Error, Rational, Scalar, SolverOptions};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<Rational> {
    let mut ints: Vec<i64> = (0..k).map(|_| rng.gen_range(0..8)).collect();
    ints[0] += 1;
    let t: i64 = ints.iter().sum();
    ints.into_iter().map(|w| r(w, t)).collect()
}

type Instance = (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>, CostMatrix<Rational>);

fn instance(seed: u64, max: usize, cmax: i64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (m, n) = (rng.gen_range(1..=max), rng.gen_range(1..=max));
    let mu = DiscreteMeasure::dense(weights(&mut rng, m)).unwrap();
    let nu = DiscreteMeasure::dense(weights(&mut rng, n)).unwrap();
    let cost = CostMatrix::from_fn(m, n, |_, _| Rational::from_i64(rng.gen_range(0..cmax))).unwrap();
    (mu, nu, cost)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn mismatched_masses_are_rejected() {
    let mu = DiscreteMeasure::dense(vec![r(1, 2), r(1, 2)]).unwrap();
    let nu = DiscreteMeasure::dense(vec![r(1, 1), r(1, 3)]).unwrap();
    let cost = CostMatrix::from_fn(2, 2, |_, _| Rational::zero()).unwrap();
    assert!(matches!(solve(&mu, &nu, &cost), Err(Error::MassMismatch { .. })));
}

#[test]
fn potentials_are_normalized() {
    for seed in 0..20 {
        let (mu, nu, cost) = instance(seed, 6, 10);
        let s = solve(&mu, &nu, &cost).unwrap();
        assert!(s.potentials.r[0].is_zero());
    }
}

#[test]
fn float_backend_matches_exact_value() {
    for seed in 0..30 {
        let (mu, nu, cost) = instance(seed, 8, 20);
        let exact = solve(&mu, &nu, &cost).unwrap();
        let (fm, fn_, fc) = (
            DiscreteMeasure::dense(mu.weights().iter().map(Scalar::as_f64).collect()).unwrap(),
            DiscreteMeasure::dense(nu.weights().iter().map(Scalar::as_f64).collect()).unwrap(),
            CostMatrix::from_fn(cost.rows(), cost.cols(), |i, j| cost.get(i, j).as_f64()).unwrap(),
        );
        let float = solve(&fm, &fn_, &fc).unwrap();
        assert!((float.primal_value - exact.primal_value.as_f64()).abs() < 1e-9);
        assert!(verify_certificate(&float, &fm, &fn_, &fc).passed());
    }
}

proptest! {
    #[test]
    fn certificate_holds_and_support_is_tight(seed in any::<u64>()) {
        let (mu, nu, cost) = instance(seed, 7, 10);
        let s = solve(&mu, &nu, &cost).unwrap();
        let report = verify_certificate(&s, &mu, &nu, &cost);
        prop_assert!(report.passed(), "{:?}", report);
        prop_assert_eq!(&s.primal_value, &s.dual_value);
        let z = zero_set(&s, &cost, &Rational::zero());
        for e in s.coupling.support() {
            prop_assert!(z.contains(&e));
        }
        prop_assert!(s.coupling.nnz() < mu.len() + nu.len());
    }

    #[test]
    fn cost_shift_moves_value_only(seed in any::<u64>()) {
        let (mu, nu, cost) = instance(seed, 6, 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let a: Vec<Rational> = (0..cost.rows()).map(|_| r(rng.gen_range(-9..10), 4)).collect();
        let b: Vec<Rational> = (0..cost.cols()).map(|_| r(rng.gen_range(-9..10), 3)).collect();
        let shifted = cost.shifted(&a, &b);
        let offset = (0..a.len()).fold(Rational::zero(), |s, i| s + &a[i] * mu.weight_of(i))
            + (0..b.len()).fold(Rational::zero(), |s, j| s + &b[j] * nu.weight_of(j));
        let s0 = solve(&mu, &nu, &cost).unwrap();
        let s1 = solve(&mu, &nu, &shifted).unwrap();
        prop_assert_eq!(s1.primal_value.clone(), s0.primal_value.clone() + &offset);
        // From a cost-blind start the pivot path depends only on reduced
        // costs, so the support is identical even with ties.
        let nw = SolverOptions { initial: InitialBasis::NorthWest, ..Default::default() };
        let t0 = solve_with(&mu, &nu, &cost, &nw).unwrap();
        let t1 = solve_with(&mu, &nu, &shifted, &nw).unwrap();
        prop_assert_eq!(t0.coupling.support_set(), t1.coupling.support_set());
        prop_assert_eq!(t1.primal_value, t0.primal_value + offset);
    }

    #[test]
    fn uniform_marginals_match_permutation_oracle(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cost = CostMatrix::from_fn(n, n, |_, _| Rational::from_i64(rng.gen_range(0..20))).unwrap();
        let u = DiscreteMeasure::dense(vec![r(1, n as i64); n]).unwrap();
        let best = permutations(n)
            .into_iter()
            .map(|p| p.iter().enumerate().fold(Rational::zero(), |s, (i, &j)| s + cost.get(i, j)))
            .min()
            .unwrap()
            / Rational::from_i64(n as i64);
        let s = solve(&u, &u, &cost).unwrap();
        prop_assert_eq!(s.primal_value, best);
    }

    #[test]
    fn pivot_orders_agree_on_value(seed in any::<u64>(), order in 1u64..100) {
        let (mu, nu, cost) = instance(seed, 6, 6);
        let a = solve(&mu, &nu, &cost).unwrap();
        let opts = SolverOptions { pricing: Pricing::Shuffled(order), ..Default::default() };
        let b = solve_with(&mu, &nu, &cost, &opts).unwrap();
        prop_assert_eq!(a.primal_value, b.primal_value);
    }
}
