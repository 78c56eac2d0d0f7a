//! Exact primal–dual solver for the discrete transportation problem.
//!
//! Network simplex on the complete bipartite graph `K_{m,n}`: the basis is a
//! spanning tree of `m + n - 1` cells, dual potentials are read off the tree
//! (normalized by `r_0 = 0`), and a pivot pushes flow around the unique cycle
//! the entering cell closes. Optimal couplings are therefore always vertices
//! of the transportation polytope, with forest supports.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Coupling, CostMatrix, DiscreteMeasure};
use crate::scalar::Scalar;

/// Relative support threshold applied to float solutions.
pub const FLOAT_SUPPORT_THRESHOLD: f64 = 1e-12;
/// Default float zero-set tolerance, relative to `max |c|`.
pub const FLOAT_ZERO_SET_TOL: f64 = 1e-9;
/// Float mass balance tolerance, relative to the larger total.
pub const FLOAT_MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DualPotentials<T> {
    pub q: Vec<T>,
    pub r: Vec<T>,
}

impl<T: Scalar> DualPotentials<T> {
    /// `c_ij - q_i - r_j`.
    pub fn slack(&self, cost: &CostMatrix<T>, i: usize, j: usize) -> T {
        cost.get(i, j).clone() - &self.q[i] - &self.r[j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub coupling: Coupling<T>,
    pub potentials: DualPotentials<T>,
    pub primal_value: T,
    pub dual_value: T,
    /// Cells whose slack vanishes, at the default tolerance of the backend.
    pub zero_set: Vec<(usize, usize)>,
    /// Final spanning-tree basis, including degenerate (zero-flow) cells.
    pub basis: Vec<(usize, usize)>,
    pub pivots: usize,
}

/// Entering-cell rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pricing {
    /// Most negative reduced cost; ties go to the lowest `(i, j)`.
    Dantzig,
    /// First negative reduced cost in lexicographic order.
    Bland,
    /// First negative reduced cost in a seeded random cell order.
    Shuffled(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialBasis {
    LeastCost,
    NorthWest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub pricing: Pricing,
    pub initial: InitialBasis,
    /// After this many pivots the solver switches to Bland's rule.
    pub bland_after: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            pricing: Pricing::Dantzig,
            initial: InitialBasis::LeastCost,
            bland_after: 50_000,
        }
    }
}

pub fn solve<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    cost: &CostMatrix<T>,
) -> Result<Solution<T>> {
    solve_with(mu, nu, cost, &SolverOptions::default())
}

pub fn solve_with<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    cost: &CostMatrix<T>,
    options: &SolverOptions,
) -> Result<Solution<T>> {
    let (m, n) = (cost.rows(), cost.cols());
    if mu.extent() > m || nu.extent() > n {
        return Err(Error::ShapeMismatch {
            expected: (m, n),
            found: (mu.extent(), nu.extent()),
        });
    }
    check_balance(mu, nu)?;
    let supply = mu.to_dense(m);
    let mut demand = nu.to_dense(n);
    if !T::is_exact() && !nu.total_mass().is_zero() {
        // Float totals agree to FLOAT_MASS_TOL; make them agree exactly enough
        // for the initial allocation to close.
        let ratio = T::from_f64(mu.total_mass().as_f64() / nu.total_mass().as_f64());
        demand = demand.into_iter().map(|d| d * &ratio).collect();
    }
    if m == 0 || n == 0 {
        return Ok(finish(
            mu,
            nu,
            cost,
            Vec::new(),
            DualPotentials {
                q: vec![T::zero(); m],
                r: vec![T::zero(); n],
            },
            0,
        ));
    }

    let mut simplex = Simplex::new(cost, &supply, &demand, options.initial);
    let pivots = simplex.run(options)?;
    let mut potentials = simplex.potentials();
    simplex.relax_degenerate(&mut potentials, &(T::tolerance(FLOAT_SUPPORT_THRESHOLD) * mu.total_mass()));
    let flows = simplex.cells.iter().cloned().zip(simplex.flow.iter().cloned()).collect();
    Ok(finish(mu, nu, cost, flows, potentials, pivots))
}

fn check_balance<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<()> {
    let (a, b) = (mu.total_mass(), nu.total_mass());
    let balanced = if T::is_exact() {
        a == b
    } else {
        let scale = T::max_of(a, b);
        (a.clone() - b).abs() <= T::tolerance(FLOAT_MASS_TOL) * &scale
    };
    if balanced {
        Ok(())
    } else {
        Err(Error::MassMismatch {
            mu: a.to_string(),
            nu: b.to_string(),
        })
    }
}

fn finish<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    cost: &CostMatrix<T>,
    flows: Vec<((usize, usize), T)>,
    potentials: DualPotentials<T>,
    pivots: usize,
) -> Solution<T> {
    let (m, n) = (cost.rows(), cost.cols());
    let basis: Vec<(usize, usize)> = flows.iter().map(|(c, _)| *c).collect();
    let threshold = T::tolerance(FLOAT_SUPPORT_THRESHOLD) * mu.total_mass();
    let coupling = Coupling::new(
        m,
        n,
        flows
            .into_iter()
            .filter(|(_, f)| *f > threshold)
            .map(|((i, j), f)| (i, j, f)),
    )
    .expect("basic flows are nonnegative and distinct");
    let primal_value = coupling.cost(cost);
    let dual_value = dual_objective(&potentials, mu, nu);
    let mut solution = Solution {
        coupling,
        potentials,
        primal_value,
        dual_value,
        zero_set: Vec::new(),
        basis,
        pivots,
    };
    solution.zero_set = zero_set(&solution, cost, &default_zero_tol(cost));
    solution
}

/// `Σ q_i μ_i + Σ r_j ν_j`.
pub fn dual_objective<T: Scalar>(
    potentials: &DualPotentials<T>,
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
) -> T {
    let a = mu
        .iter()
        .fold(T::zero(), |acc, (i, w)| acc + &(potentials.q[i].clone() * w));
    nu.iter()
        .fold(a, |acc, (j, w)| acc + &(potentials.r[j].clone() * w))
}

/// Zero in exact mode, `1e-9 · max|c|` in float mode.
pub fn default_zero_tol<T: Scalar>(cost: &CostMatrix<T>) -> T {
    T::tolerance(FLOAT_ZERO_SET_TOL) * &cost.max_abs()
}

/// All cells whose slack `c - q - r` is at most `tol`.
pub fn zero_set<T: Scalar>(solution: &Solution<T>, cost: &CostMatrix<T>, tol: &T) -> Vec<(usize, usize)> {
    let p = &solution.potentials;
    let mut out = Vec::new();
    for i in 0..cost.rows() {
        for j in 0..cost.cols() {
            if p.slack(cost, i, j) <= *tol {
                out.push((i, j));
            }
        }
    }
    out
}

struct Simplex<'a, T> {
    cost: &'a CostMatrix<T>,
    m: usize,
    n: usize,
    cells: Vec<(usize, usize)>,
    flow: Vec<T>,
    is_basic: Vec<bool>,
    entering_tol: T,
}

struct Tree {
    parent: Vec<Option<(usize, usize)>>, // (parent node, basis slot)
    depth: Vec<usize>,
}

impl<'a, T: Scalar> Simplex<'a, T> {
    fn new(cost: &'a CostMatrix<T>, supply: &[T], demand: &[T], initial: InitialBasis) -> Self {
        let (m, n) = (cost.rows(), cost.cols());
        let mut s = Simplex {
            cost,
            m,
            n,
            cells: Vec::with_capacity(m + n - 1),
            flow: Vec::with_capacity(m + n - 1),
            is_basic: vec![false; m * n],
            entering_tol: T::tolerance(1e-12) * &T::max_of(&cost.max_abs(), &T::one()),
        };
        match initial {
            InitialBasis::NorthWest => s.north_west(supply.to_vec(), demand.to_vec()),
            InitialBasis::LeastCost => s.least_cost(supply.to_vec(), demand.to_vec()),
        }
        debug_assert_eq!(s.cells.len(), m + n - 1);
        s
    }

    fn push(&mut self, i: usize, j: usize, f: T) {
        self.cells.push((i, j));
        self.flow.push(f);
        self.is_basic[i * self.n + j] = true;
    }

    fn north_west(&mut self, mut s: Vec<T>, mut d: Vec<T>) {
        let (mut i, mut j) = (0, 0);
        while i < self.m && j < self.n {
            let a = exhaust(&mut s[i], &mut d[j]);
            self.push(i, j, a);
            if i == self.m - 1 {
                j += 1;
            } else if j == self.n - 1 || !s[i].gt_zero() {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    /// Greedy cheapest-cell allocation. Every positive allocation exhausts a
    /// line that never receives mass again, so the allocated cells form a
    /// forest; zero-flow cells then join it into a spanning tree.
    fn least_cost(&mut self, mut s: Vec<T>, mut d: Vec<T>) {
        let (m, n) = (self.m, self.n);
        let mut order: Vec<(usize, usize)> =
            (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        let cost = self.cost;
        order.sort_by(|a, b| {
            cost.get(a.0, a.1)
                .partial_cmp(cost.get(b.0, b.1))
                .expect("finite costs")
                .then(a.cmp(b))
        });
        let mut uf = UnionFind::new(m + n);
        for &(i, j) in &order {
            if s[i].gt_zero() && d[j].gt_zero() {
                // Only float round-off residues can close a cycle here; they
                // are dropped.
                if !uf.union(i, m + j) {
                    debug_assert!(!T::is_exact(), "greedy allocation closed a cycle");
                    continue;
                }
                let a = exhaust(&mut s[i], &mut d[j]);
                self.push(i, j, a);
            }
        }
        for &(i, j) in &order {
            if self.cells.len() == m + n - 1 {
                break;
            }
            if uf.union(i, m + j) {
                self.push(i, j, T::zero());
            }
        }
    }

    fn tree(&self) -> Tree {
        let nodes = self.m + self.n;
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
        for (slot, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push((self.m + j, slot));
            adj[self.m + j].push((i, slot));
        }
        let mut parent = vec![None; nodes];
        let mut depth = vec![0; nodes];
        let mut seen = vec![false; nodes];
        let root = self.m;
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(w, slot) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((u, slot));
                    depth[w] = depth[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        Tree { parent, depth }
    }

    fn potentials_from(&self, tree: &Tree) -> DualPotentials<T> {
        let mut q = vec![T::zero(); self.m];
        let mut r = vec![T::zero(); self.n];
        // Visit nodes by depth so parents are always set first.
        let mut order: Vec<usize> = (0..self.m + self.n).collect();
        order.sort_by_key(|&v| tree.depth[v]);
        for v in order {
            let Some((p, slot)) = tree.parent[v] else { continue };
            let (i, j) = self.cells[slot];
            let c = self.cost.get(i, j).clone();
            if v < self.m {
                q[i] = c - &r[j];
            } else {
                debug_assert_eq!(p, i);
                r[j] = c - &q[i];
            }
        }
        DualPotentials { q, r }
    }

    fn potentials(&self) -> DualPotentials<T> {
        self.potentials_from(&self.tree())
    }

    /// Degenerate basic cells carry no flow but are tight under tree
    /// potentials. For each such cell the subtree hanging below it is
    /// balanced, so shifting `q` up and `r` down on that subtree keeps the
    /// dual value and every support slack. Shifting by half the smallest
    /// blocking slack makes the cell strictly positive whenever possible.
    fn relax_degenerate(&self, p: &mut DualPotentials<T>, flow_tol: &T) {
        let tree = self.tree();
        let nodes = self.m + self.n;
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes];
        for v in 0..nodes {
            if let Some((u, _)) = tree.parent[v] {
                children[u].push(v);
            }
        }
        let mut order: Vec<usize> = (0..nodes).collect();
        order.sort_by_key(|&v| tree.depth[v]);
        let half = T::from_ratio(1, 2);
        for v in order {
            let Some((_, slot)) = tree.parent[v] else { continue };
            if self.flow[slot] > *flow_tol {
                continue;
            }
            let mut in_sub = vec![false; nodes];
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                in_sub[u] = true;
                stack.extend(children[u].iter().copied());
            }
            // Cells whose slack shrinks under the shift.
            let y_child = v >= self.m;
            let mut bound: Option<T> = None;
            for i in 0..self.m {
                for j in 0..self.n {
                    let (xi, yj) = (in_sub[i], in_sub[self.m + j]);
                    let blocking = if y_child { xi && !yj } else { !xi && yj };
                    if blocking {
                        let s = p.slack(self.cost, i, j);
                        bound = Some(match bound {
                            None => s,
                            Some(b) => T::min_of(&b, &s),
                        });
                    }
                }
            }
            let Some(bound) = bound else { continue };
            if bound <= self.entering_tol {
                continue;
            }
            let mut shift = bound * &half;
            if !y_child {
                shift = -shift;
            }
            for u in 0..nodes {
                if !in_sub[u] {
                    continue;
                }
                if u < self.m {
                    p.q[u] = p.q[u].clone() + &shift;
                } else {
                    p.r[u - self.m] = p.r[u - self.m].clone() - &shift;
                }
            }
        }
    }

    fn entering(&self, p: &DualPotentials<T>, rule: Pricing, order: Option<&[usize]>) -> Option<(usize, usize)> {
        let neg_tol = -self.entering_tol.clone();
        let reduced = |i: usize, j: usize| self.cost.get(i, j).clone() - &p.q[i] - &p.r[j];
        match rule {
            Pricing::Dantzig => {
                let mut best: Option<((usize, usize), T)> = None;
                for i in 0..self.m {
                    for j in 0..self.n {
                        if self.is_basic[i * self.n + j] {
                            continue;
                        }
                        let d = reduced(i, j);
                        if d < neg_tol && best.as_ref().is_none_or(|(_, b)| d < *b) {
                            best = Some(((i, j), d));
                        }
                    }
                }
                best.map(|(c, _)| c)
            }
            Pricing::Bland => (0..self.m * self.n)
                .filter(|&k| !self.is_basic[k])
                .map(|k| (k / self.n, k % self.n))
                .find(|&(i, j)| reduced(i, j) < neg_tol),
            Pricing::Shuffled(_) => order
                .expect("shuffled pricing needs an order")
                .iter()
                .copied()
                .filter(|&k| !self.is_basic[k])
                .map(|k| (k / self.n, k % self.n))
                .find(|&(i, j)| reduced(i, j) < neg_tol),
        }
    }

    /// Basis slots on the tree path from row `i` to column `j`, in walk order.
    fn path(&self, tree: &Tree, i: usize, j: usize) -> Vec<usize> {
        let (mut a, mut b) = (i, self.m + j);
        let mut from_a = Vec::new();
        let mut from_b = Vec::new();
        while a != b {
            if tree.depth[a] >= tree.depth[b] {
                let (p, slot) = tree.parent[a].expect("non-root node has a parent");
                from_a.push(slot);
                a = p;
            } else {
                let (p, slot) = tree.parent[b].expect("non-root node has a parent");
                from_b.push(slot);
                b = p;
            }
        }
        from_b.reverse();
        from_a.extend(from_b);
        from_a
    }

    fn run(&mut self, options: &SolverOptions) -> Result<usize> {
        let order: Option<Vec<usize>> = match options.pricing {
            Pricing::Shuffled(seed) => {
                let mut o: Vec<usize> = (0..self.m * self.n).collect();
                o.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
                Some(o)
            }
            _ => None,
        };
        let limit = options.bland_after.saturating_add(200 * (self.m * self.n + 10));
        let mut pivots = 0;
        loop {
            let tree = self.tree();
            let p = self.potentials_from(&tree);
            let rule = if pivots >= options.bland_after {
                Pricing::Bland
            } else {
                options.pricing
            };
            let Some((ei, ej)) = self.entering(&p, rule, order.as_deref()) else {
                return Ok(pivots);
            };
            if pivots >= limit {
                return Err(Error::Internal(format!("no convergence after {pivots} pivots")));
            }
            let path = self.path(&tree, ei, ej);
            // Walk order: leaving row ei along the path alternates -, +, -, ...
            let mut leave: Option<usize> = None;
            for (t, &slot) in path.iter().enumerate() {
                if t % 2 == 1 {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some(cur) => {
                        self.flow[slot] < self.flow[cur]
                            || (self.flow[slot] == self.flow[cur] && self.cells[slot] < self.cells[cur])
                    }
                };
                if better {
                    leave = Some(slot);
                }
            }
            let leave = leave.ok_or_else(|| Error::Internal("empty pivot cycle".into()))?;
            let theta = self.flow[leave].clone();
            for (t, &slot) in path.iter().enumerate() {
                self.flow[slot] = if t % 2 == 0 {
                    self.flow[slot].clone() - &theta
                } else {
                    self.flow[slot].clone() + &theta
                };
            }
            let (li, lj) = self.cells[leave];
            self.is_basic[li * self.n + lj] = false;
            self.is_basic[ei * self.n + ej] = true;
            self.cells[leave] = (ei, ej);
            self.flow[leave] = theta;
            if !T::is_exact() {
                for f in &mut self.flow {
                    if f.lt_zero() {
                        *f = T::zero();
                    }
                }
            }
            pivots += 1;
        }
    }
}

/// Moves `min(s, d)` and sets the smaller side to exactly zero, so float
/// round-off never leaves an exhausted line with a residue.
fn exhaust<T: Scalar>(s: &mut T, d: &mut T) -> T {
    if *s <= *d {
        let a = std::mem::replace(s, T::zero());
        *d = d.clone() - &a;
        a
    } else {
        let a = std::mem::replace(d, T::zero());
        *s = s.clone() - &a;
        a
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// One line of a certificate check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub name: String,
    pub passed: bool,
    pub max_violation: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub checks: Vec<CertificateCheck>,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CertificateCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Recomputes marginals, dual feasibility, c-transform tightness,
/// complementary slackness, objective values and the duality gap.
///
/// Exact backends are held to zero violation. Float backends use 1e-10
/// absolute on marginals, 1e-9 (relative to `max|c|`) on slacks, and 1e-9
/// relative on the gap.
pub fn verify_certificate<T: Scalar>(
    solution: &Solution<T>,
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    cost: &CostMatrix<T>,
) -> CertificateReport {
    let (m, n) = (cost.rows(), cost.cols());
    let c = &solution.coupling;
    let p = &solution.potentials;
    let exact = T::is_exact();
    let cscale = cost.max_abs().as_f64().max(1.0);
    let marg_tol = if exact { 0.0 } else { 1e-10 };
    let slack_tol = if exact { 0.0 } else { 1e-9 * cscale };
    let mut checks = Vec::new();
    let mut push = |name: &str, v: f64, tol: f64| {
        checks.push(CertificateCheck {
            name: name.to_string(),
            passed: v <= tol,
            max_violation: v,
            tolerance: tol,
        })
    };

    if c.shape() != (m, n) || p.q.len() != m || p.r.len() != n {
        push("shape", 1.0, 0.0);
        return CertificateReport { checks };
    }

    let rows = c.row_sums();
    let row_viol = (0..m)
        .map(|i| (rows[i].clone() - &mu.weight_of(i)).abs())
        .fold(T::zero(), |a, b| T::max_of(&a, &b));
    push("row_marginals", row_viol.as_f64(), marg_tol);

    let cols = c.col_sums();
    let col_viol = (0..n)
        .map(|j| (cols[j].clone() - &nu.weight_of(j)).abs())
        .fold(T::zero(), |a, b| T::max_of(&a, &b));
    push("col_marginals", col_viol.as_f64(), marg_tol);

    let neg = c
        .entries()
        .map(|(_, _, v)| -v.clone())
        .fold(T::zero(), |a, b| T::max_of(&a, &b));
    push("nonnegative", neg.as_f64(), 0.0);

    let mut feas = T::zero();
    let mut tight = T::zero();
    for i in 0..m {
        let mut best: Option<T> = None;
        for j in 0..n {
            let s = p.slack(cost, i, j);
            feas = T::max_of(&feas, &-s.clone());
            let v = cost.get(i, j).clone() - &p.r[j];
            best = Some(match best {
                None => v,
                Some(b) => T::min_of(&b, &v),
            });
        }
        if mu.weight_of(i).gt_zero() {
            if let Some(b) = best {
                tight = T::max_of(&tight, &(b - &p.q[i]).abs());
            }
        }
    }
    push("dual_feasible", feas.as_f64(), slack_tol);
    push("c_transform", tight.as_f64(), slack_tol);

    let cs = c
        .entries()
        .map(|(i, j, _)| p.slack(cost, i, j).abs())
        .fold(T::zero(), |a, b| T::max_of(&a, &b));
    push("complementary_slackness", cs.as_f64(), slack_tol);

    let primal = c.cost(cost);
    let dual = dual_objective(p, mu, nu);
    let vscale = primal.as_f64().abs().max(1.0);
    let value_tol = if exact { 0.0 } else { 1e-9 * vscale };
    push(
        "primal_value",
        (primal.clone() - &solution.primal_value).abs().as_f64(),
        value_tol,
    );
    push(
        "dual_value",
        (dual.clone() - &solution.dual_value).abs().as_f64(),
        value_tol,
    );
    push("duality_gap", (primal - &dual).abs().as_f64(), value_tol);

    CertificateReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn dense(w: &[(i64, i64)]) -> DiscreteMeasure<Rational> {
        DiscreteMeasure::dense(w.iter().map(|&(a, b)| q(a, b)).collect()).unwrap()
    }

    #[test]
    fn zero_cost_has_zero_value_and_zero_duals() {
        let mu = dense(&[(1, 3), (2, 3)]);
        let nu = dense(&[(1, 4), (1, 4), (1, 2)]);
        let c = CostMatrix::from_fn(2, 3, |_, _| q(0, 1)).unwrap();
        let s = solve(&mu, &nu, &c).unwrap();
        assert_eq!(s.primal_value, q(0, 1));
        assert!(s.potentials.q.iter().chain(&s.potentials.r).all(|v| *v == q(0, 1)));
        assert_eq!(s.zero_set.len(), 6);
        assert!(verify_certificate(&s, &mu, &nu, &c).passed());
    }

    #[test]
    fn two_by_two_picks_diagonal() {
        let mu = dense(&[(1, 2), (1, 2)]);
        let c = CostMatrix::from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]).unwrap();
        let s = solve(&mu, &mu, &c).unwrap();
        assert_eq!(s.coupling, Coupling::new(2, 2, [(0, 0, q(1, 2)), (1, 1, q(1, 2))]).unwrap());
        assert_eq!(s.primal_value, q(0, 1));
        assert_eq!(s.zero_set, vec![(0, 0), (1, 1)]);
        assert_eq!(s.potentials.r[0], q(0, 1));
    }

    #[test]
    fn single_point_moves_across() {
        let mu = dense(&[(1, 1), (0, 1), (0, 1)]);
        let nu = dense(&[(0, 1), (0, 1), (1, 1)]);
        let c = CostMatrix::from_fn(3, 3, |i, j| Rational::from_i64((i as i64 - j as i64).abs())).unwrap();
        let s = solve(&mu, &nu, &c).unwrap();
        assert_eq!(s.coupling, Coupling::new(3, 3, [(0, 2, q(1, 1))]).unwrap());
        assert_eq!(s.primal_value, q(2, 1));
        assert!(verify_certificate(&s, &mu, &nu, &c).passed());
    }

    #[test]
    fn mass_mismatch_is_reported() {
        let mu = dense(&[(1, 2)]);
        let nu = dense(&[(1, 1)]);
        let c = CostMatrix::from_fn(1, 1, |_, _| q(0, 1)).unwrap();
        assert!(matches!(solve(&mu, &nu, &c), Err(Error::MassMismatch { .. })));
    }

    #[test]
    fn corrupted_coupling_fails_marginal_check() {
        let mu = dense(&[(1, 2), (1, 2)]);
        let c = CostMatrix::from_rows(vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]).unwrap();
        let mut s = solve(&mu, &mu, &c).unwrap();
        s.coupling = Coupling::new(2, 2, [(0, 0, q(1, 2)), (0, 1, q(1, 4))]).unwrap();
        let report = verify_certificate(&s, &mu, &mu, &c);
        assert!(!report.check("row_marginals").unwrap().passed);
        assert!(!report.check("col_marginals").unwrap().passed);
    }

    #[test]
    fn north_west_and_least_cost_agree_on_value() {
        let mu = dense(&[(1, 5), (3, 10), (1, 2)]);
        let nu = dense(&[(1, 4), (1, 4), (1, 4), (1, 4)]);
        let c = CostMatrix::from_fn(3, 4, |i, j| Rational::from_i64(((3 * i + 5 * j) % 7) as i64)).unwrap();
        let a = solve(&mu, &nu, &c).unwrap();
        let opts = SolverOptions {
            initial: InitialBasis::NorthWest,
            pricing: Pricing::Bland,
            ..Default::default()
        };
        let b = solve_with(&mu, &nu, &c, &opts).unwrap();
        assert_eq!(a.primal_value, b.primal_value);
        assert_eq!(a.primal_value, a.dual_value);
        assert!(a.coupling.nnz() < 3 + 4);
    }

    #[test]
    fn zero_weight_sites_are_handled() {
        let mu = dense(&[(0, 1), (1, 1), (0, 1)]);
        let nu = dense(&[(1, 2), (0, 1), (1, 2)]);
        let c = CostMatrix::from_fn(3, 3, |i, j| Rational::from_i64((i * j) as i64)).unwrap();
        let s = solve(&mu, &nu, &c).unwrap();
        assert!(verify_certificate(&s, &mu, &nu, &c).passed());
        assert_eq!(s.coupling.row_sums()[1], q(1, 1));
    }

    #[test]
    fn float_backend_matches_rational_value() {
        let w = [0.1, 0.2, 0.3, 0.4];
        let mu = DiscreteMeasure::dense(w.to_vec()).unwrap();
        let nu = DiscreteMeasure::dense(w.iter().rev().copied().collect()).unwrap();
        let c = CostMatrix::from_fn(4, 4, |i, j| ((i as f64) - (j as f64)).powi(2)).unwrap();
        let s = solve(&mu, &nu, &c).unwrap();
        let report = verify_certificate(&s, &mu, &nu, &c);
        assert!(report.passed(), "{report:?}");

        let mu_q = DiscreteMeasure::dense(w.iter().map(|&x| parse(x)).collect()).unwrap();
        let nu_q = DiscreteMeasure::dense(w.iter().rev().map(|&x| parse(x)).collect()).unwrap();
        let c_q = CostMatrix::from_fn(4, 4, |i, j| Rational::from_i64((i as i64 - j as i64).pow(2))).unwrap();
        let s_q = solve(&mu_q, &nu_q, &c_q).unwrap();
        assert!((s.primal_value - s_q.primal_value.as_f64()).abs() < 1e-12);
    }

    fn parse(x: f64) -> Rational {
        Rational::parse_text(&x.to_string()).unwrap()
    }
}
