//! Numbered limb systems: decomposition of forest supports and the backward
//! recursion that rebuilds the unique coupling carried by a system.
//!
//! Limb `k` is a partial map `f_k`. Odd limbs are graphs `X -> Y`, even limbs
//! antigraphs `Y -> X`. Classes `I_k` hold Y-sites for even `k` and X-sites
//! for odd `k`, and every limb satisfies `Dom(f_k) ∪ Ran(f_{k+1}) ⊆ I_k`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{add, pushforward_coupling, Coupling, Direction, DiscreteMeasure, PartialMap};
use crate::scalar::Scalar;
use crate::support::{acyclicity_test, build_support_graph, Node, SupportGraph};

/// Float recursion weights below this are an infeasibility, not round-off.
pub const FLOAT_NEGATIVE_TOL: f64 = 1e-10;
/// Float marginal agreement for reconstructed couplings.
pub const FLOAT_MARGINAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumberedLimbSystem {
    /// `limbs[k - 1]` is `f_k`.
    pub limbs: Vec<PartialMap>,
    /// `classes[k]` is `I_k`.
    pub classes: Vec<BTreeSet<usize>>,
}

impl NumberedLimbSystem {
    pub fn new(limbs: Vec<PartialMap>, classes: Vec<BTreeSet<usize>>) -> Self {
        NumberedLimbSystem { limbs, classes }
    }

    pub fn empty() -> Self {
        NumberedLimbSystem {
            limbs: Vec::new(),
            classes: vec![BTreeSet::new()],
        }
    }

    pub fn num_limbs(&self) -> usize {
        self.limbs.len()
    }

    /// `f_k`, 1-based; `None` past the last limb.
    pub fn limb(&self, k: usize) -> Option<&PartialMap> {
        k.checked_sub(1).and_then(|i| self.limbs.get(i))
    }

    /// `I_k`, empty past the last stored class.
    pub fn class(&self, k: usize) -> BTreeSet<usize> {
        self.classes.get(k).cloned().unwrap_or_default()
    }

    /// Union of all graphs and antigraphs as `(x, y)` pairs.
    pub fn relation(&self) -> BTreeSet<(usize, usize)> {
        self.limbs.iter().flat_map(PartialMap::edges).collect()
    }

    /// Which limb an edge belongs to.
    pub fn limb_of(&self, x: usize, y: usize) -> Option<usize> {
        self.limbs.iter().position(|f| match f.direction {
            Direction::XToY => f.get(x) == Some(y),
            Direction::YToX => f.get(y) == Some(x),
        })
        .map(|i| i + 1)
    }

    /// Edges of the odd limbs.
    pub fn graph_edges(&self) -> BTreeSet<(usize, usize)> {
        self.limbs.iter().step_by(2).flat_map(PartialMap::edges).collect()
    }

    /// Edges of the even limbs.
    pub fn antigraph_edges(&self) -> BTreeSet<(usize, usize)> {
        self.limbs.iter().skip(1).step_by(2).flat_map(PartialMap::edges).collect()
    }
}

/// Where the numbering starts in each tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootSide {
    /// Root at the lowest Y-site, which lands in `I_0`.
    #[default]
    Y,
    /// Root at the lowest X-site, placed in `I_1`. Numbering then starts with
    /// the antigraph `f_2` and `f_1` stays empty.
    XShifted,
}

impl RootSide {
    pub fn as_str(self) -> &'static str {
        match self {
            RootSide::Y => "y",
            RootSide::XShifted => "x-shifted",
        }
    }
}

impl std::str::FromStr for RootSide {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "y" => Ok(RootSide::Y),
            "x-shifted" => Ok(RootSide::XShifted),
            other => Err(Error::Parse(format!("unknown root side '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecomposeOptions {
    pub root_side: RootSide,
    /// Index space `(rows, cols)`. Sites outside the graph go to `I_1` (X)
    /// or `I_0` (Y).
    pub sites: Option<(usize, usize)>,
}

/// Decomposes a forest with default options.
pub fn decompose(graph: &SupportGraph) -> Result<NumberedLimbSystem> {
    decompose_with(graph, &DecomposeOptions::default())
}

pub fn decompose_coupling<T: Scalar>(coupling: &Coupling<T>) -> Result<NumberedLimbSystem> {
    decompose(&build_support_graph(coupling))
}

/// Roots every tree, then gives each non-root node's parent edge to the limb
/// numbered by the node's depth.
pub fn decompose_with(graph: &SupportGraph, options: &DecomposeOptions) -> Result<NumberedLimbSystem> {
    let report = acyclicity_test(graph);
    if let Some(c) = report.witness_cycle {
        return Err(Error::NotAForest { xs: c.xs, ys: c.ys });
    }
    let mut depth_of: BTreeMap<Node, usize> = BTreeMap::new();
    let mut parent_edges: Vec<(usize, Node, Node)> = Vec::new();
    for comp in &report.components {
        let root = match options.root_side {
            RootSide::Y => comp.iter().find(|n| matches!(n, Node::Y(_))),
            RootSide::XShifted => comp.iter().find(|n| matches!(n, Node::X(_))),
        };
        let Some(&root) = root.or_else(|| comp.first()) else { continue };
        // A Y root sits at depth 0 and an X root at depth 1, so depth parity
        // always matches the side.
        let root_depth = match root {
            Node::Y(_) => 0,
            Node::X(_) => 1,
        };
        depth_of.insert(root, root_depth);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let du = depth_of[&u];
            for w in graph.neighbors(u) {
                if depth_of.contains_key(&w) {
                    continue;
                }
                depth_of.insert(w, du + 1);
                parent_edges.push((du + 1, w, u));
                queue.push_back(w);
            }
        }
    }
    let n_limbs = parent_edges.iter().map(|e| e.0).max().unwrap_or(0);
    let mut limbs: Vec<PartialMap> = (1..=n_limbs)
        .map(|k| PartialMap::new(if k % 2 == 1 { Direction::XToY } else { Direction::YToX }))
        .collect();
    for &(k, child, parent) in &parent_edges {
        let (from, to) = match (child, parent) {
            (Node::X(x), Node::Y(y)) => (x, y),
            (Node::Y(y), Node::X(x)) => (y, x),
            _ => return Err(Error::Internal("parent edge joins two sites of one side".into())),
        };
        limbs[k - 1].insert(from, to);
    }
    let mut classes: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n_limbs + 1];
    let put = |classes: &mut Vec<BTreeSet<usize>>, k: usize, site: usize| {
        if classes.len() <= k {
            classes.resize(k + 1, BTreeSet::new());
        }
        classes[k].insert(site);
    };
    for (&node, &d) in &depth_of {
        match node {
            Node::X(x) | Node::Y(x) => put(&mut classes, d, x),
        }
    }
    if let Some((rows, cols)) = options.sites {
        for x in 0..rows {
            if !graph.x_nodes().contains(&x) {
                put(&mut classes, 1, x);
            }
        }
        for y in 0..cols {
            if !graph.y_nodes().contains(&y) {
                put(&mut classes, 0, y);
            }
        }
    }
    Ok(NumberedLimbSystem { limbs, classes })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimbCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<LimbCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&LimbCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Checks every clause of the definition that can be checked without the
/// measures.
pub fn validate(system: &NumberedLimbSystem) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name: &str, problem: Option<String>| {
        checks.push(LimbCheck {
            name: name.to_string(),
            passed: problem.is_none(),
            detail: problem.unwrap_or_default(),
        })
    };

    let bad_dir = system.limbs.iter().enumerate().find_map(|(i, f)| {
        let k = i + 1;
        let want = if k % 2 == 1 { Direction::XToY } else { Direction::YToX };
        (f.direction != want).then(|| format!("limb {k} has direction {}", f.direction.as_str()))
    });
    push("directions", bad_dir);

    let mut clash = None;
    for parity in 0..2 {
        let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
        for (k, class) in system.classes.iter().enumerate().filter(|(k, _)| k % 2 == parity) {
            for &s in class {
                if let Some(prev) = owner.insert(s, k) {
                    clash.get_or_insert(format!("site {s} lies in I_{prev} and I_{k}"));
                }
            }
        }
    }
    push("classes_disjoint", clash);

    let mut containment = None;
    for k in 0..=system.num_limbs() {
        let class = system.class(k);
        let dom = system.limb(k).map(PartialMap::domain).unwrap_or_default();
        let ran = system.limb(k + 1).map(PartialMap::range).unwrap_or_default();
        if let Some(s) = dom.union(&ran).find(|s| !class.contains(s)) {
            containment.get_or_insert(format!("site {s} of Dom(f_{k}) ∪ Ran(f_{}) is outside I_{k}", k + 1));
        }
    }
    push("containment", containment);

    for (name, start) in [("graph_domains_disjoint", 0), ("antigraph_domains_disjoint", 1)] {
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        let mut problem = None;
        for (i, f) in system.limbs.iter().enumerate().skip(start).step_by(2) {
            for s in f.domain() {
                if let Some(prev) = seen.insert(s, i + 1) {
                    problem.get_or_insert(format!("site {s} in Dom(f_{prev}) and Dom(f_{})", i + 1));
                }
            }
        }
        push(name, problem);
    }

    let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut overlap = None;
    for (i, f) in system.limbs.iter().enumerate() {
        for e in f.edges() {
            if let Some(prev) = seen.insert(e, i + 1) {
                overlap.get_or_insert(format!("edge {e:?} in limbs {prev} and {}", i + 1));
            }
        }
    }
    push("limb_edges_disjoint", overlap);

    ValidationReport { checks }
}

/// [`validate`] plus a check that the system's relation is exactly the edge
/// set of `graph`.
pub fn validate_against(system: &NumberedLimbSystem, graph: &SupportGraph) -> ValidationReport {
    let mut report = validate(system);
    let relation = system.relation();
    let problem = if &relation == graph.edges() {
        None
    } else {
        let extra = relation.difference(graph.edges()).next();
        let missing = graph.edges().difference(&relation).next();
        Some(format!("extra edge {extra:?}, missing edge {missing:?}"))
    };
    report.checks.push(LimbCheck {
        name: "relation".into(),
        passed: problem.is_none(),
        detail: problem.unwrap_or_default(),
    });
    report
}

/// The pieces of the backward recursion: `gammas[k - 1] = γ_k`,
/// `etas[k - 1] = η_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LimbReconstruction<T> {
    pub gammas: Vec<Coupling<T>>,
    pub etas: Vec<DiscreteMeasure<T>>,
    pub total: Coupling<T>,
}

fn shape_of<T: Scalar>(system: &NumberedLimbSystem, mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> (usize, usize) {
    let rel = system.relation();
    let rows = rel.iter().map(|e| e.0 + 1).max().unwrap_or(0).max(mu.extent());
    let cols = rel.iter().map(|e| e.1 + 1).max().unwrap_or(0).max(nu.extent());
    (rows, cols)
}

/// Rebuilds the only coupling of `mu` and `nu` that can vanish outside the
/// system, starting from the last limb.
///
/// For odd `k`, `η_k = (μ - π^X γ_{k+1})` restricted to `Dom(f_k)` and
/// `γ_k = (id × f_k)_# η_k`; even limbs use `ν`, `π^Y` and `f_k × id`.
pub fn reconstruct<T: Scalar>(
    system: &NumberedLimbSystem,
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
) -> Result<LimbReconstruction<T>> {
    let (a, b) = (mu.total_mass(), nu.total_mass());
    let balanced = if T::is_exact() {
        a == b
    } else {
        (a.clone() - b).abs() <= T::tolerance(FLOAT_MARGINAL_TOL) * &T::max_of(&T::max_of(a, b), &T::one())
    };
    if !balanced {
        return Err(Error::MassMismatch {
            mu: a.to_string(),
            nu: b.to_string(),
        });
    }
    let shape = shape_of(system, mu, nu);
    let n = system.num_limbs();
    let neg_tol = -T::tolerance(FLOAT_NEGATIVE_TOL);
    let mut gammas: Vec<Coupling<T>> = vec![Coupling::zero(shape.0, shape.1); n];
    let mut etas: Vec<DiscreteMeasure<T>> = Vec::with_capacity(n);
    let mut next = Coupling::zero(shape.0, shape.1);
    for k in (1..=n).rev() {
        let f = &system.limbs[k - 1];
        let (base, used) = match f.direction {
            Direction::XToY => (mu, next.row_sums()),
            Direction::YToX => (nu, next.col_sums()),
        };
        let mut points = Vec::with_capacity(f.len());
        let mut weights = Vec::with_capacity(f.len());
        for site in f.domain() {
            let taken = used.get(site).cloned().unwrap_or_else(T::zero);
            let mut w = base.weight_of(site) - &taken;
            if w.lt_zero() {
                if w < neg_tol {
                    return Err(Error::Infeasible {
                        stage: k,
                        site,
                        deficit: (-w).to_string(),
                    });
                }
                w = T::zero();
            }
            points.push(site);
            weights.push(w);
        }
        let eta = DiscreteMeasure::new(points, weights)?;
        let gamma = pushforward_coupling(f, &eta, shape)?;
        etas.push(eta);
        gammas[k - 1] = gamma.clone();
        next = gamma;
    }
    etas.reverse();
    let total = if gammas.is_empty() {
        Coupling::zero(shape.0, shape.1)
    } else {
        add(&gammas)?
    };
    check_marginals(&total, mu, nu)?;
    Ok(LimbReconstruction { gammas, etas, total })
}

fn check_marginals<T: Scalar>(total: &Coupling<T>, mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<()> {
    let tol = T::tolerance(FLOAT_MARGINAL_TOL);
    let rows = total.row_sums();
    let cols = total.col_sums();
    let sides = [(rows, mu), (cols, nu)];
    for (sums, measure) in sides {
        let extent = sums.len().max(measure.extent());
        for site in 0..extent {
            let have = sums.get(site).cloned().unwrap_or_else(T::zero);
            let want = measure.weight_of(site);
            let gap = want - &have;
            if gap.abs() > tol {
                return Err(Error::Infeasible {
                    stage: 0,
                    site,
                    deficit: gap.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Whether `candidate` is the coupling the system carries. A candidate with
/// mass off the system's relation is rejected with `OutsideSystem`.
pub fn uniqueness_check<T: Scalar>(
    system: &NumberedLimbSystem,
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    candidate: &Coupling<T>,
) -> Result<bool> {
    let relation = system.relation();
    if let Some((row, col)) = candidate.support().find(|e| !relation.contains(e)) {
        return Err(Error::OutsideSystem { row, col });
    }
    let rec = reconstruct(system, mu, nu)?;
    let tol = T::tolerance(FLOAT_MARGINAL_TOL);
    let mut keys: BTreeSet<(usize, usize)> = candidate.support_set();
    keys.extend(rec.total.support());
    Ok(keys
        .into_iter()
        .all(|(i, j)| (candidate.get(i, j) - &rec.total.get(i, j)).abs() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn path() -> SupportGraph {
        SupportGraph::from_edges([(0, 0), (1, 0), (1, 1)])
    }

    #[test]
    fn permutation_is_one_limb() {
        let g = SupportGraph::from_edges([(0, 1), (1, 2), (2, 0)]);
        let s = decompose(&g).unwrap();
        assert_eq!(s.num_limbs(), 1);
        assert_eq!(s.limbs[0].assignments(), &BTreeMap::from([(0, 1), (1, 2), (2, 0)]));
        assert_eq!(s.class(0), BTreeSet::from([0, 1, 2]));
        assert!(validate_against(&s, &g).passed());
    }

    #[test]
    fn three_edge_path_has_two_limbs() {
        let s = decompose(&path()).unwrap();
        assert_eq!(s.num_limbs(), 2);
        assert_eq!(s.limbs[0].assignments(), &BTreeMap::from([(0, 0), (1, 0)]));
        assert_eq!(s.limbs[1].assignments(), &BTreeMap::from([(1, 1)]));
        assert_eq!(s.class(0), BTreeSet::from([0]));
        assert_eq!(s.class(1), BTreeSet::from([0, 1]));
        assert_eq!(s.class(2), BTreeSet::from([1]));
        assert!(validate(&s).passed());
    }

    #[test]
    fn path_reconstruction_matches_hand_solution() {
        let s = decompose(&path()).unwrap();
        let mu = DiscreteMeasure::dense(vec![q(1, 4), q(3, 4)]).unwrap();
        let nu = DiscreteMeasure::dense(vec![q(1, 2), q(1, 2)]).unwrap();
        let r = reconstruct(&s, &mu, &nu).unwrap();
        assert_eq!(r.etas[1].weights(), &[q(1, 2)]);
        assert_eq!(r.etas[0].weights(), &[q(1, 4), q(1, 4)]);
        let want = Coupling::new(2, 2, [(0, 0, q(1, 4)), (1, 0, q(1, 4)), (1, 1, q(1, 2))]).unwrap();
        assert_eq!(r.total, want);
        assert!(uniqueness_check(&s, &mu, &nu, &want).unwrap());
    }

    #[test]
    fn unbalanced_masses_are_rejected() {
        let s = decompose(&path()).unwrap();
        let mu = DiscreteMeasure::dense(vec![q(1, 4), q(1, 4)]).unwrap();
        let nu = DiscreteMeasure::dense(vec![q(1, 2), q(1, 2)]).unwrap();
        assert!(matches!(reconstruct(&s, &mu, &nu), Err(Error::MassMismatch { .. })));
    }

    #[test]
    fn negative_stage_weight_is_infeasible() {
        // y1 needs 3/4 but x1 only has 1/2.
        let s = decompose(&path()).unwrap();
        let mu = DiscreteMeasure::dense(vec![q(1, 2), q(1, 2)]).unwrap();
        let nu = DiscreteMeasure::dense(vec![q(1, 4), q(3, 4)]).unwrap();
        match reconstruct(&s, &mu, &nu) {
            Err(Error::Infeasible { stage, site, .. }) => assert_eq!((stage, site), (1, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn injected_range_violation_fails_containment() {
        let mut s = decompose(&path()).unwrap();
        s.classes[0].clear();
        let r = validate(&s);
        assert!(!r.check("containment").unwrap().passed);
    }

    #[test]
    fn empty_system_validates() {
        let s = decompose(&SupportGraph::default()).unwrap();
        assert_eq!(s, NumberedLimbSystem::empty());
        assert!(validate(&s).passed());
    }

    #[test]
    fn cycle_is_not_decomposable() {
        let g = SupportGraph::from_edges([(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(matches!(decompose(&g), Err(Error::NotAForest { .. })));
    }

    #[test]
    fn x_shifted_numbering_is_valid() {
        let g = SupportGraph::from_edges([(0, 0), (1, 0), (1, 1), (2, 1)]);
        let opts = DecomposeOptions {
            root_side: RootSide::XShifted,
            sites: Some((4, 3)),
        };
        let s = decompose_with(&g, &opts).unwrap();
        assert!(s.limbs[0].is_empty());
        assert!(validate_against(&s, &g).passed());
        assert!(s.class(1).contains(&3));
        assert!(s.class(0).contains(&2));
    }

    #[test]
    fn perturbed_candidate_is_rejected() {
        let s = decompose(&path()).unwrap();
        let mu = DiscreteMeasure::dense(vec![q(1, 4), q(3, 4)]).unwrap();
        let nu = DiscreteMeasure::dense(vec![q(1, 2), q(1, 2)]).unwrap();
        let bad = Coupling::new(2, 2, [(0, 0, q(1, 4)), (1, 0, q(1, 8)), (1, 1, q(5, 8))]).unwrap();
        assert!(!uniqueness_check(&s, &mu, &nu, &bad).unwrap());
    }
}
