//! The acceptance suite: nine numbered criteria, each with pinned sizes,
//! seeds, tolerances and time budgets. Used by the `acceptance` test target
//! and by `limbsys selftest`.
//!
//! Checkers here recompute what they verify from raw entries instead of
//! calling the routine under test.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::extremality::{self, Method, Witness};
use crate::kantorovich::{self, InitialBasis, Pricing, SolverOptions};
use crate::limbs::{self, NumberedLimbSystem};
use crate::manifold::{self, Classification, CircleDemoParams, CostFunction, GridManifold};
use crate::measures::{Coupling, CostMatrix, Direction, DiscreteMeasure};
use crate::scalar::{Rational, Scalar};
use crate::support::build_support_graph;

pub const SEED: u64 = 20_240_917;

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let budget = self
            .budget
            .map(|b| format!(" / {}s", b.as_secs_f64()))
            .unwrap_or_default();
        write!(
            f,
            "criterion {} {} {} ({:.2}s{}): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.elapsed.as_secs_f64(),
            budget,
            self.detail
        )
    }
}

fn timed(
    id: u8,
    title: &'static str,
    budget: Option<Duration>,
    body: impl FnOnce() -> (bool, String),
) -> CriterionResult {
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let detail = if in_time {
        detail
    } else {
        format!("{detail}; over time budget")
    };
    CriterionResult {
        id,
        title,
        passed: ok && in_time,
        detail,
        elapsed,
        budget,
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ]
}

pub fn run(id: u8) -> Option<CriterionResult> {
    Some(match id {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        _ => return None,
    })
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

// ---------------------------------------------------------------- generators

/// Random spanning tree of `K_{m,n}` (Kruskal over shuffled cells), each
/// edge then kept with probability `keep`.
pub fn random_forest(rng: &mut impl Rng, m: usize, n: usize, keep: f64) -> Vec<(usize, usize)> {
    let mut cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    cells.shuffle(rng);
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut out = Vec::new();
    for (i, j) in cells {
        let (a, b) = (find(&mut parent, i), find(&mut parent, m + j));
        if a != b {
            parent[a] = b;
            if rng.gen_bool(keep) {
                out.push((i, j));
            }
        }
    }
    out
}

fn random_masses(rng: &mut impl Rng, cells: &[(usize, usize)], m: usize, n: usize, den: i64) -> Coupling<Rational> {
    Coupling::new(m, n, cells.iter().map(|&(i, j)| (i, j, q(rng.gen_range(1..=den), den))))
        .expect("distinct cells with positive masses")
}

/// Coupling on a random forest plus up to `extra` random cells.
pub fn random_coupling(rng: &mut impl Rng, max_side: usize, extra: usize) -> Coupling<Rational> {
    let m = rng.gen_range(1..=max_side);
    let n = rng.gen_range(1..=max_side);
    let mut cells: BTreeSet<(usize, usize)> = random_forest(rng, m, n, 0.8).into_iter().collect();
    for _ in 0..rng.gen_range(0..=extra) {
        cells.insert((rng.gen_range(0..m), rng.gen_range(0..n)));
    }
    let cells: Vec<_> = cells.into_iter().collect();
    random_masses(rng, &cells, m, n, 12)
}

/// Smooth positive weights `exp(a sin(2πx + p) + b sin(4πx + s))`, quantized
/// to integers in `1..=1000` and normalized exactly.
pub fn smooth_density(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (p, s) = (rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI));
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 / (n - 1) as f64;
            (a * (2.0 * PI * x + p).sin() + b * (4.0 * PI * x + s).sin()).exp()
        })
        .collect();
    let max = raw.iter().copied().fold(0.0, f64::max);
    let ints: Vec<i64> = raw.iter().map(|w| ((1000.0 * w / max).round() as i64).max(1)).collect();
    let total: i64 = ints.iter().sum();
    ints.into_iter().map(|k| q(k, total)).collect()
}

// ------------------------------------------------------------- independent checks

fn sums(c: &Coupling<Rational>) -> (BTreeMap<usize, Rational>, BTreeMap<usize, Rational>) {
    let mut rows: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut cols: BTreeMap<usize, Rational> = BTreeMap::new();
    for (i, j, m) in c.entries() {
        *rows.entry(i).or_insert_with(Rational::zero) += m;
        *cols.entry(j).or_insert_with(Rational::zero) += m;
    }
    (rows, cols)
}

fn same_map(a: &BTreeMap<usize, Rational>, b: &BTreeMap<usize, Rational>) -> bool {
    let keys: BTreeSet<usize> = a.keys().chain(b.keys()).copied().collect();
    keys.into_iter().all(|k| {
        let z = Rational::zero();
        a.get(&k).unwrap_or(&z) == b.get(&k).unwrap_or(&z)
    })
}

/// Distinct halves, identical marginals, exact average.
pub fn witness_is_valid(gamma: &Coupling<Rational>, w: &Witness<Rational>) -> bool {
    let (g0, g1) = (&w.gamma0, &w.gamma1);
    if g0.canonical_key() == g1.canonical_key() || g0.shape() != gamma.shape() || g1.shape() != gamma.shape() {
        return false;
    }
    if g0.entries().chain(g1.entries()).any(|(_, _, m)| m.is_negative()) {
        return false;
    }
    let target = sums(gamma);
    let (s0, s1) = (sums(g0), sums(g1));
    if !same_map(&s0.0, &target.0) || !same_map(&s0.1, &target.1) || !same_map(&s1.0, &target.0) || !same_map(&s1.1, &target.1) {
        return false;
    }
    let mut cells: BTreeSet<(usize, usize)> = gamma.support_set();
    cells.extend(g0.support());
    cells.extend(g1.support());
    cells
        .into_iter()
        .all(|(i, j)| (g0.get(i, j) + g1.get(i, j)) / Rational::from_i64(2) == gamma.get(i, j))
}

/// Re-evaluates both recursion equations for every limb from raw entries and
/// returns the largest absolute violation.
pub fn recursion_violation(
    system: &NumberedLimbSystem,
    mu: &DiscreteMeasure<Rational>,
    nu: &DiscreteMeasure<Rational>,
    rec: &limbs::LimbReconstruction<Rational>,
) -> Rational {
    let mut worst = Rational::zero();
    let mut bump = |v: Rational| {
        if v.abs() > worst {
            worst = v.abs();
        }
    };
    let n = system.num_limbs();
    if rec.gammas.len() != n || rec.etas.len() != n {
        return Rational::from_i64(1);
    }
    for k in (1..=n).rev() {
        let f = &system.limbs[k - 1];
        let eta = &rec.etas[k - 1];
        let gamma = &rec.gammas[k - 1];
        // η_k(s) = base(s) - (mass of γ_{k+1} on the line through s).
        let next: Option<&Coupling<Rational>> = rec.gammas.get(k);
        for &s in f.assignments().keys() {
            let base = match f.direction {
                Direction::XToY => mu.weight_of(s),
                Direction::YToX => nu.weight_of(s),
            };
            let used = next
                .map(|g| {
                    g.entries()
                        .filter(|&(i, j, _)| match f.direction {
                            Direction::XToY => i == s,
                            Direction::YToX => j == s,
                        })
                        .fold(Rational::zero(), |a, (_, _, m)| a + m)
                })
                .unwrap_or_else(Rational::zero);
            bump(eta.weight_of(s) - (base - used));
        }
        for (p, _) in eta.iter() {
            if f.get(p).is_none() {
                bump(eta.weight_of(p));
            }
        }
        // γ_k is the push-forward of η_k through id × f_k (or f_k × id).
        let mut want: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (&s, &t) in f.assignments() {
            let w = eta.weight_of(s);
            if !w.is_zero() {
                let cell = match f.direction {
                    Direction::XToY => (s, t),
                    Direction::YToX => (t, s),
                };
                want.insert(cell, w);
            }
        }
        let cells: BTreeSet<(usize, usize)> = want.keys().copied().chain(gamma.support()).collect();
        for (i, j) in cells {
            let w = want.get(&(i, j)).cloned().unwrap_or_else(Rational::zero);
            bump(gamma.get(i, j) - w);
        }
    }
    let cells: BTreeSet<(usize, usize)> = rec.gammas.iter().flat_map(|g| g.support()).chain(rec.total.support()).collect();
    for (i, j) in cells {
        let s = rec.gammas.iter().fold(Rational::zero(), |a, g| a + g.get(i, j));
        bump(rec.total.get(i, j) - s);
    }
    worst
}

// ------------------------------------------------------------------ criteria

pub fn criterion_1() -> CriterionResult {
    timed(1, "3x3 Birkhoff vertex count", Some(Duration::from_secs(1)), || {
        let u = vec![q(1, 3); 3];
        let vs = match extremality::enumerate_vertices(&u, &u, 36) {
            Ok(v) => v,
            Err(e) => return (false, e.to_string()),
        };
        let perms: BTreeSet<Vec<usize>> = vs
            .iter()
            .filter(|v| v.nnz() == 3 && v.entries().all(|(_, _, m)| *m == q(1, 3)))
            .filter_map(|v| {
                let cols: Vec<usize> = (0..3).filter_map(|i| (0..3).find(|&j| v.contains(i, j))).collect();
                let distinct: BTreeSet<usize> = cols.iter().copied().collect();
                (cols.len() == 3 && distinct.len() == 3).then_some(cols)
            })
            .collect();
        let ok = vs.len() == 6 && perms.len() == 6;
        (ok, format!("{} vertices, {} distinct permutation matrices", vs.len(), perms.len()))
    })
}

pub const C2_INSTANCES: usize = 10_000;

pub fn criterion_2() -> CriterionResult {
    timed(2, "forest = rank = brute agreement", Some(Duration::from_secs(60)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
        let mut disagreements = 0;
        let mut skipped = 0;
        let mut extremal = 0;
        let mut bound_violations = 0;
        for _ in 0..C2_INSTANCES {
            let c = random_coupling(&mut rng, 6, 3);
            let v = extremality::check_extremal(&c, &Method::ALL, 36);
            if !v.skipped.is_empty() || v.verdicts.len() != 3 {
                skipped += 1;
                continue;
            }
            if !v.agree {
                disagreements += 1;
            }
            if v.extremal() == Some(true) {
                extremal += 1;
                if c.nnz() > c.rows() + c.cols() - 1 {
                    bound_violations += 1;
                }
            }
        }
        let ok = disagreements == 0 && skipped == 0 && bound_violations == 0;
        (
            ok,
            format!(
                "{C2_INSTANCES} couplings up to 6x6, {extremal} extremal, {disagreements} disagreements, {skipped} not run by all methods, {bound_violations} edge-bound violations"
            ),
        )
    })
}

pub const C3_INSTANCES: usize = 1_000;

pub fn criterion_3() -> CriterionResult {
    timed(3, "reconstruction round trip", Some(Duration::from_secs(60)), || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
        let mut mismatches = 0;
        let mut errors = 0;
        let mut max_limbs = 0;
        for _ in 0..C3_INSTANCES {
            let m = rng.gen_range(1..=20);
            let n = rng.gen_range(1..=20);
            let cells = random_forest(&mut rng, m, n, 0.9);
            let gamma = random_masses(&mut rng, &cells, m, n, 60);
            let (mu, nu) = (gamma.row_marginal(), gamma.col_marginal());
            let result = limbs::decompose(&build_support_graph(&gamma)).and_then(|s| {
                max_limbs = max_limbs.max(s.num_limbs());
                limbs::reconstruct(&s, &mu, &nu)
            });
            match result {
                Ok(r) if r.total == gamma => {}
                Ok(_) => mismatches += 1,
                Err(_) => errors += 1,
            }
        }
        (
            mismatches == 0 && errors == 0,
            format!("{C3_INSTANCES} forests up to 20x20, up to {max_limbs} limbs, {mismatches} mismatches, {errors} errors"),
        )
    })
}

pub fn criterion_4() -> CriterionResult {
    timed(4, "backward recursion equations", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
        let mut worst = Rational::zero();
        let mut by_depth: BTreeMap<usize, usize> = BTreeMap::new();
        let mut errors = 0;
        for _ in 0..500 {
            let m = rng.gen_range(2..=12);
            let n = rng.gen_range(2..=12);
            let cells = random_forest(&mut rng, m, n, 1.0);
            let gamma = random_masses(&mut rng, &cells, m, n, 30);
            let (mu, nu) = (gamma.row_marginal(), gamma.col_marginal());
            let Ok(system) = limbs::decompose(&build_support_graph(&gamma)) else {
                errors += 1;
                continue;
            };
            match limbs::reconstruct(&system, &mu, &nu) {
                Ok(rec) => {
                    *by_depth.entry(system.num_limbs()).or_default() += 1;
                    let v = recursion_violation(&system, &mu, &nu, &rec);
                    if v > worst {
                        worst = v;
                    }
                }
                Err(_) => errors += 1,
            }
        }
        let deep = by_depth.range(3..).map(|(_, c)| c).sum::<usize>();
        (
            worst.is_zero() && errors == 0 && deep > 0,
            format!("500 systems, {deep} with N >= 3 limbs, max violation {worst}, {errors} errors"),
        )
    })
}

/// Grid site nearest to angle `a` on an `n`-site circle, with the distance
/// in units of the spacing.
fn nearest_sites(n: usize, a: f64) -> BTreeSet<usize> {
    let h = 2.0 * PI / n as f64;
    let t = a.rem_euclid(2.0 * PI) / h;
    let lo = t.floor();
    let mut out = BTreeSet::new();
    for cand in [lo, lo + 1.0] {
        if ((cand - t).abs() - 0.5).abs() < 1e-9 || (cand - t).abs() < 0.5 {
            out.insert((cand as usize) % n);
        }
    }
    out
}

pub fn criterion_5() -> CriterionResult {
    timed(5, "circle cost subtwist census", Some(Duration::from_secs(10)), || {
        let mut notes = Vec::new();
        let mut ok = true;
        for n in [8usize, 64, 256] {
            let grid = GridManifold::circle(n).expect("valid grid");
            let report = match manifold::twist_census(&grid, CostFunction::CircleCos) {
                Ok(r) => r,
                Err(e) => return (false, e.to_string()),
            };
            let exact_counts = report.pairs.iter().filter(|p| p.minima == 1 && p.maxima == 1).count();
            // cos(θ-φ₂) - cos(θ-φ₁) = R cos(θ - ψ): the max sits at the
            // grid site nearest ψ, the min at the one nearest ψ + π.
            let mut oracle_misses = 0;
            for p in &report.pairs {
                let (a, b) = (grid.coord(p.y1), grid.coord(p.y2));
                let s = ((a - b) / 2.0).sin();
                let mid = (a + b) / 2.0;
                let psi = if s > 0.0 { mid - PI / 2.0 } else { mid + PI / 2.0 };
                let max_ok = p.max_sites.len() == 1 && nearest_sites(n, psi).contains(&p.max_sites[0]);
                let min_ok = p.min_sites.len() == 1 && nearest_sites(n, psi + PI).contains(&p.min_sites[0]);
                if !(max_ok && min_ok) {
                    oracle_misses += 1;
                }
            }
            let good = exact_counts == report.pairs.len()
                && report.pairs.len() == n * (n - 1)
                && report.classification == Classification::Subtwisted
                && oracle_misses == 0;
            ok &= good;
            notes.push(format!(
                "n={n}: {exact_counts}/{} pairs with (1 min, 1 max), {}, oracle misses {oracle_misses}",
                report.pairs.len(),
                report.classification.as_str()
            ));
        }
        (ok, notes.join("; "))
    })
}

fn is_monotone(c: &Coupling<Rational>) -> bool {
    let cells: Vec<(usize, usize)> = c.support().collect();
    cells
        .iter()
        .all(|&(i, j)| cells.iter().all(|&(i2, j2)| !(i < i2 && j > j2)))
}

pub fn criterion_6() -> CriterionResult {
    timed(6, "twisted cost gives one limb", Some(Duration::from_secs(10)), || {
        let n = 64;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
        let grid = GridManifold::interval(n).expect("valid grid");
        let cost: CostMatrix<Rational> = CostFunction::NegativeProduct.matrix(&grid, &grid).expect("finite");
        let mu = DiscreteMeasure::dense(smooth_density(&mut rng, n)).expect("valid");
        let nu = DiscreteMeasure::dense(smooth_density(&mut rng, n)).expect("valid");
        let s = match kantorovich::solve(&mu, &nu, &cost) {
            Ok(s) => s,
            Err(e) => return (false, e.to_string()),
        };
        let monotone = is_monotone(&s.coupling);
        let graph = build_support_graph(&s.coupling);
        let max_fiber = graph
            .x_nodes()
            .iter()
            .map(|&x| graph.degree(crate::support::Node::X(x)))
            .max()
            .unwrap_or(0);
        let limbs = limbs::decompose(&graph).map(|s| s.num_limbs());
        let mut same = 0;
        for seed in 1..=5u64 {
            let opts = SolverOptions {
                pricing: Pricing::Shuffled(seed),
                initial: if seed % 2 == 0 { InitialBasis::NorthWest } else { InitialBasis::LeastCost },
                ..Default::default()
            };
            if let Ok(o) = kantorovich::solve_with(&mu, &nu, &cost, &opts) {
                same += usize::from(o.coupling == s.coupling);
            }
        }
        let ok = monotone && max_fiber == 1 && limbs == Ok(1) && same == 5;
        (
            ok,
            format!(
                "n={n}: monotone support {monotone}, largest x-fiber {max_fiber}, limbs {}, identical under {same}/5 pivot orders",
                limbs.map(|l| l.to_string()).unwrap_or_else(|e| e.to_string())
            ),
        )
    })
}

pub fn criterion_7() -> CriterionResult {
    timed(7, "circular lake structure", Some(Duration::from_secs(30)), || {
        let r = match manifold::circle_demo::<f64>(&CircleDemoParams::new(128, 4.0)) {
            Ok(r) => r,
            Err(e) => return (false, e.to_string()),
        };
        let gap_ok = r.relative_gap <= 1e-9 && r.certificate_passed;
        let limbs = r.limb_count;
        let cross = r.cross_lake_mass;
        let ok = gap_ok
            && limbs == Some(2)
            && r.max_fiber <= 2
            && cross > 0.0
            && r.marked_matches_graph_limb;
        (
            ok,
            format!(
                "n=128 kappa=4 float: relative gap {:.1e}, limbs {:?}, largest x-fiber {}, cross-lake mass {cross:.4}, marked set equals graph limbs {} ({} marked support points vs {} graph-limb edges)",
                r.relative_gap,
                limbs,
                r.max_fiber,
                r.marked_matches_graph_limb,
                r.marked_on_support.len(),
                r.graph_limb_edges.len()
            ),
        )
    })
}

/// Counts violations of slack ≥ 0, support ⊆ Z, Δ ≤ 0 on Z × Z and h ≤ 0 on
/// Z, all evaluated exactly.
pub fn zero_set_violations(
    mu: &DiscreteMeasure<Rational>,
    nu: &DiscreteMeasure<Rational>,
    cost: &CostMatrix<Rational>,
) -> Result<[usize; 4], String> {
    let s = kantorovich::solve(mu, nu, cost).map_err(|e| e.to_string())?;
    let (m, n) = (cost.rows(), cost.cols());
    let slack = |i: usize, j: usize| cost.get(i, j).clone() - &s.potentials.q[i] - &s.potentials.r[j];
    let mut out = [0usize; 4];
    let mut z = Vec::new();
    for i in 0..m {
        for j in 0..n {
            let v = slack(i, j);
            if v.is_negative() {
                out[0] += 1;
            }
            if v.is_zero() {
                z.push((i, j));
            }
        }
    }
    let zs: BTreeSet<(usize, usize)> = z.iter().copied().collect();
    out[1] = s.coupling.support().filter(|e| !zs.contains(e)).count();
    let c = |i: usize, j: usize| cost.get(i, j).clone();
    for &(x, y) in &z {
        for &(xp, yp) in &z {
            let delta = c(x, y) + c(xp, yp) - c(x, yp) - c(xp, y);
            if delta.is_positive() {
                out[2] += 1;
            }
        }
    }
    for (_, h) in manifold::h_values(&z, cost) {
        if h.is_positive() {
            out[3] += 1;
        }
    }
    Ok(out)
}

pub fn criterion_8() -> CriterionResult {
    timed(8, "zero-set inequalities", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
        let mut total = [0usize; 4];
        let mut errors = 0;
        let mut instances = 0;
        let mut record = |r: Result<[usize; 4], String>| {
            instances += 1;
            match r {
                Ok(v) => (0..4).for_each(|k| total[k] += v[k]),
                Err(_) => errors += 1,
            }
        };
        for _ in 0..300 {
            let m = rng.gen_range(1..=8);
            let n = rng.gen_range(1..=8);
            let weights = |rng: &mut ChaCha8Rng, k: usize| {
                let ints: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=9)).collect();
                let mut ints = ints;
                if ints.iter().all(|&w| w == 0) {
                    ints[0] = 1;
                }
                let t: i64 = ints.iter().sum();
                ints.into_iter().map(|w| q(w, t)).collect::<Vec<_>>()
            };
            let mu = DiscreteMeasure::dense(weights(&mut rng, m)).expect("valid");
            let nu = DiscreteMeasure::dense(weights(&mut rng, n)).expect("valid");
            let cost = CostMatrix::from_fn(m, n, |_, _| Rational::from_i64(rng.gen_range(0..=9))).expect("finite");
            record(zero_set_violations(&mu, &nu, &cost));
        }
        for (kind, cost_fn, n) in [
            (GridManifold::interval(24), CostFunction::NegativeProduct, 24),
            (GridManifold::interval(24), CostFunction::Quadratic, 24),
            (GridManifold::circle(24), CostFunction::CircleCos, 24),
        ] {
            let grid = kind.expect("valid grid");
            let cost = cost_fn.matrix::<Rational>(&grid, &grid).expect("finite");
            let mu = DiscreteMeasure::dense(smooth_density(&mut rng, n)).expect("valid");
            let nu = DiscreteMeasure::dense(smooth_density(&mut rng, n)).expect("valid");
            record(zero_set_violations(&mu, &nu, &cost));
        }
        let ok = total == [0; 4] && errors == 0;
        (
            ok,
            format!(
                "{instances} exact solves: negative slacks {}, support outside Z {}, positive Δ on Z×Z {}, positive h on Z {}, errors {errors}",
                total[0], total[1], total[2], total[3]
            ),
        )
    })
}

pub fn criterion_9() -> CriterionResult {
    timed(9, "non-extremal witnesses", None, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
        let mut checked = 0;
        let mut invalid = 0;
        let mut missing = 0;
        for _ in 0..3_000 {
            let c = random_coupling(&mut rng, 6, 4);
            let v = extremality::check_extremal(&c, &Method::ALL, 36);
            for verdict in v.verdicts.iter().filter(|v| !v.extremal) {
                match &verdict.witness {
                    Some(w) => {
                        checked += 1;
                        if !witness_is_valid(&c, w) {
                            invalid += 1;
                        }
                    }
                    None => missing += 1,
                }
            }
        }
        (
            invalid == 0 && missing == 0 && checked > 0,
            format!("{checked} witnesses from forest, rank and brute verdicts, {invalid} invalid, {missing} missing"),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_sites_handles_ties() {
        let n = 8;
        let h = 2.0 * PI / n as f64;
        assert_eq!(nearest_sites(n, 0.5 * h), BTreeSet::from([0, 1]));
        assert_eq!(nearest_sites(n, 7.9 * h), BTreeSet::from([0]));
    }

    #[test]
    fn witness_checker_rejects_equal_halves() {
        let g = Coupling::new(1, 1, [(0, 0, q(1, 1))]).unwrap();
        let w = Witness {
            gamma0: g.clone(),
            gamma1: g.clone(),
        };
        assert!(!witness_is_valid(&g, &w));
    }

    #[test]
    fn random_forest_is_a_forest() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let f = random_forest(&mut rng, 5, 4, 1.0);
            assert_eq!(f.len(), 8);
            assert!(crate::support::acyclicity_test(&crate::support::SupportGraph::from_edges(f)).is_forest);
        }
    }
}
