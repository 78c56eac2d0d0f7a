//! Extremality of a coupling inside the transportation polytope of its own
//! marginals, decided three independent ways.
//!
//! * forest: the support graph has no cycle;
//! * rank: the edge-incidence map `(u, v) -> (u_i + v_j)` on the support is
//!   injective on the edge side, i.e. has rank `|support|`;
//! * brute: the coupling is one of the vertices of the face of the polytope
//!   spanned by its support, found by basis enumeration.
//!
//! A negative verdict always carries two distinct couplings with the same
//! marginals whose average is the input.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{EchelonBasis, Matrix};
use crate::measures::Coupling;
use crate::scalar::{Rational, Scalar};
use crate::support::{acyclicity_test, build_support_graph, Cycle};

/// Largest `rows * cols` the brute-force oracle accepts by default.
pub const DEFAULT_BRUTE_MAX_SIZE: usize = 36;
/// Search nodes the basis enumeration may visit before giving up.
pub const BRUTE_NODE_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Forest,
    Rank,
    Brute,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Forest, Method::Rank, Method::Brute];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Forest => "forest",
            Method::Rank => "rank",
            Method::Brute => "brute",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "forest" => Ok(Method::Forest),
            "rank" => Ok(Method::Rank),
            "brute" => Ok(Method::Brute),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }
}

/// `γ = ½(γ₀ + γ₁)` with `γ₀ ≠ γ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<T> {
    pub gamma0: Coupling<T>,
    pub gamma1: Coupling<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    Forest {
        nodes: usize,
        edges: usize,
        components: usize,
        cycle: Option<Cycle>,
    },
    Rank {
        support_size: usize,
        rank: usize,
        deficit: usize,
        /// Zero-marginal direction on the support, when the rank is deficient.
        kernel: Option<Vec<((usize, usize), Rational)>>,
    },
    Brute {
        face_vertices: usize,
        bases_tried: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T> {
    pub method: Method,
    pub extremal: bool,
    pub evidence: Evidence,
    pub witness: Option<Witness<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalityVerdict<T> {
    pub verdicts: Vec<Verdict<T>>,
    /// Methods that could not run, with the reason.
    pub skipped: Vec<(Method, String)>,
    pub agree: bool,
}

impl<T> ExtremalityVerdict<T> {
    /// The common answer, when every method that ran agrees.
    pub fn extremal(&self) -> Option<bool> {
        let first = self.verdicts.first()?.extremal;
        self.agree.then_some(first)
    }

    pub fn verdict(&self, method: Method) -> Option<&Verdict<T>> {
        self.verdicts.iter().find(|v| v.method == method)
    }
}

/// Runs the requested methods. A brute-force run that is too large is
/// recorded under `skipped` instead of failing the whole check.
pub fn check_extremal<T: Scalar>(
    coupling: &Coupling<T>,
    methods: &[Method],
    max_size: usize,
) -> ExtremalityVerdict<T> {
    let mut verdicts = Vec::new();
    let mut skipped = Vec::new();
    let unique: BTreeSet<Method> = methods.iter().copied().collect();
    for method in unique {
        let v = match method {
            Method::Forest => Ok(forest_certificate(coupling)),
            Method::Rank => Ok(rank_certificate(coupling)),
            Method::Brute => brute_force_oracle(coupling, max_size),
        };
        match v {
            Ok(v) => verdicts.push(v),
            Err(e) => skipped.push((method, e.to_string())),
        }
    }
    let agree = verdicts.windows(2).all(|w| w[0].extremal == w[1].extremal);
    ExtremalityVerdict {
        verdicts,
        skipped,
        agree,
    }
}

/// Extremal iff the support graph is a forest. Otherwise the witness moves
/// half the smallest cycle mass around the first cycle found.
pub fn forest_certificate<T: Scalar>(coupling: &Coupling<T>) -> Verdict<T> {
    let graph = build_support_graph(coupling);
    let report = acyclicity_test(&graph);
    let witness = report.witness_cycle.as_ref().map(|cycle| {
        let eps = cycle
            .edges()
            .iter()
            .map(|&(i, j)| coupling.get(i, j))
            .reduce(|a, b| T::min_of(&a, &b))
            .expect("a cycle has edges")
            * &T::from_ratio(1, 2);
        let mut delta = BTreeMap::new();
        for e in cycle.even_edges() {
            delta.insert(e, eps.clone());
        }
        for e in cycle.odd_edges() {
            delta.insert(e, -eps.clone());
        }
        split_along(coupling, &delta)
    });
    Verdict {
        method: Method::Forest,
        extremal: report.is_forest,
        evidence: Evidence::Forest {
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            components: report.components.len(),
            cycle: report.witness_cycle,
        },
        witness,
    }
}

/// `γ₀ = γ - δ`, `γ₁ = γ + δ`.
fn split_along<T: Scalar>(coupling: &Coupling<T>, delta: &BTreeMap<(usize, usize), T>) -> Witness<T> {
    let neg: BTreeMap<(usize, usize), T> = delta.iter().map(|(&k, v)| (k, -v.clone())).collect();
    Witness {
        gamma0: coupling.perturbed(&neg).expect("perturbation keeps masses nonnegative"),
        gamma1: coupling.perturbed(delta).expect("perturbation keeps masses nonnegative"),
    }
}

/// Extremal iff the incidence matrix of the support (one row per edge, one
/// column per node) has full row rank.
pub fn rank_certificate<T: Scalar>(coupling: &Coupling<T>) -> Verdict<T> {
    let edges: Vec<(usize, usize)> = coupling.support().collect();
    let xs: BTreeMap<usize, usize> = edges
        .iter()
        .map(|e| e.0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(k, x)| (x, k))
        .collect();
    let ys: BTreeMap<usize, usize> = edges
        .iter()
        .map(|e| e.1)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(k, y)| (y, xs.len() + k))
        .collect();
    let nodes = xs.len() + ys.len();
    // Transposed incidence: one row per node, one column per edge. Its
    // kernel is the set of zero-marginal perturbations on the support.
    let mut a = Matrix::zeros(nodes, edges.len());
    for (col, &(i, j)) in edges.iter().enumerate() {
        a.set(xs[&i], col, Rational::one());
        a.set(ys[&j], col, Rational::one());
    }
    let rank = a.rank();
    let deficit = edges.len() - rank;
    let kernel = (deficit > 0).then(|| {
        let w = a.kernel().into_iter().next().expect("deficient rank has a kernel");
        edges.iter().copied().zip(w).filter(|(_, v)| !v.is_zero()).collect::<Vec<_>>()
    });
    let witness = kernel.as_ref().map(|w| {
        // Largest step keeping γ - t w >= 0 and γ + t w >= 0, then halved.
        let t = w
            .iter()
            .map(|(e, v)| coupling.get(e.0, e.1).to_rational() / v.abs())
            .reduce(|a, b| if a <= b { a } else { b })
            .expect("kernel vector is nonzero")
            / Rational::from_i64(2);
        let delta = w
            .iter()
            .map(|(e, v)| (*e, T::from_rational(&(&t * v))))
            .collect();
        split_along(coupling, &delta)
    });
    Verdict {
        method: Method::Rank,
        extremal: deficit == 0,
        evidence: Evidence::Rank {
            support_size: edges.len(),
            rank,
            deficit,
            kernel,
        },
        witness,
    }
}

/// Vertex enumeration restricted to the face `{γ' in Γ(μ,ν) : supp γ' ⊆ supp γ}`.
/// A point of a polytope is a vertex iff it is a vertex of the smallest face
/// containing it, which here is the face carried by its support.
pub fn brute_force_oracle<T: Scalar>(coupling: &Coupling<T>, max_size: usize) -> Result<Verdict<T>> {
    let (rows, cols) = coupling.shape();
    let size = rows * cols;
    if size > max_size {
        return Err(Error::TooLarge { size, max: max_size });
    }
    let exact: Coupling<Rational> = coupling.convert();
    let cells: Vec<(usize, usize)> = exact.support().collect();
    let (vertices, bases_tried) = face_vertices(rows, cols, &cells, &exact.row_sums(), &exact.col_sums())?;
    let key = exact.canonical_key();
    let extremal = vertices.iter().any(|v| v.canonical_key() == key);
    let witness = if extremal {
        None
    } else {
        let v = vertices
            .iter()
            .find(|v| v.canonical_key() != key)
            .ok_or_else(|| Error::Internal("non-vertex point on a face with one vertex".into()))?;
        let d: BTreeMap<(usize, usize), Rational> = cells
            .iter()
            .map(|&(i, j)| ((i, j), v.get(i, j) - exact.get(i, j)))
            .filter(|(_, x)| !x.is_zero())
            .collect();
        // γ + s d stays in the face for s in [-s_max, 1].
        let s_max = d
            .iter()
            .filter(|(_, x)| x.is_positive())
            .map(|(e, x)| exact.get(e.0, e.1) / x)
            .reduce(|a, b| if a <= b { a } else { b })
            .unwrap_or_else(Rational::one);
        let one = Rational::one();
        let t = if s_max < one { s_max } else { one } / Rational::from_i64(2);
        let delta = d.iter().map(|(e, x)| (*e, T::from_rational(&(&t * x)))).collect();
        Some(split_along(coupling, &delta))
    };
    Ok(Verdict {
        method: Method::Brute,
        extremal,
        evidence: Evidence::Brute {
            face_vertices: vertices.len(),
            bases_tried,
        },
        witness,
    })
}

/// All vertices of `Γ(μ, ν)` for dense marginals, by basis enumeration over
/// every cell joining two positive sites.
pub fn enumerate_vertices(mu: &[Rational], nu: &[Rational], max_size: usize) -> Result<Vec<Coupling<Rational>>> {
    let (rows, cols) = (mu.len(), nu.len());
    let size = rows * cols;
    if size > max_size {
        return Err(Error::TooLarge { size, max: max_size });
    }
    let total_mu = mu.iter().fold(Rational::zero(), |a, b| a + b);
    let total_nu = nu.iter().fold(Rational::zero(), |a, b| a + b);
    if total_mu != total_nu {
        return Err(Error::MassMismatch {
            mu: total_mu.to_string(),
            nu: total_nu.to_string(),
        });
    }
    let cells: Vec<(usize, usize)> = (0..rows)
        .filter(|&i| mu[i].is_positive())
        .flat_map(|i| (0..cols).filter(|&j| nu[j].is_positive()).map(move |j| (i, j)))
        .collect();
    Ok(face_vertices(rows, cols, &cells, mu, nu)?.0)
}

/// Vertices of `{x >= 0 on cells : row sums = mu, col sums = nu}`, sorted by
/// canonical key, plus the number of bases solved.
fn face_vertices(
    rows: usize,
    cols: usize,
    cells: &[(usize, usize)],
    mu: &[Rational],
    nu: &[Rational],
) -> Result<(Vec<Coupling<Rational>>, usize)> {
    let x_sites: BTreeSet<usize> = cells.iter().map(|c| c.0).collect();
    let y_sites: BTreeSet<usize> = cells.iter().map(|c| c.1).collect();
    let constraint: BTreeMap<(bool, usize), usize> = x_sites
        .iter()
        .map(|&i| (false, i))
        .chain(y_sites.iter().map(|&j| (true, j)))
        .enumerate()
        .map(|(k, key)| (key, k))
        .collect();
    let mut b = vec![Rational::zero(); constraint.len()];
    for (&(is_y, site), &k) in &constraint {
        b[k] = if is_y { nu[site].clone() } else { mu[site].clone() };
    }
    let columns: Vec<Vec<Rational>> = cells
        .iter()
        .map(|&(i, j)| {
            let mut col = vec![Rational::zero(); constraint.len()];
            col[constraint[&(false, i)]] = Rational::one();
            col[constraint[&(true, j)]] = Rational::one();
            col
        })
        .collect();
    let mut full = Matrix::zeros(constraint.len(), cells.len());
    for (c, col) in columns.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            full.set(r, c, v.clone());
        }
    }
    let rank = full.rank();

    let mut found: BTreeMap<String, Coupling<Rational>> = BTreeMap::new();
    let mut search = BasisSearch {
        columns: &columns,
        rank,
        visited: 0,
        solved: 0,
        chosen: Vec::with_capacity(rank),
    };
    let mut on_basis = |basis: &[usize]| -> Result<()> {
        let mut a = Matrix::zeros(constraint.len(), basis.len());
        for (c, &cell) in basis.iter().enumerate() {
            for (r, v) in columns[cell].iter().enumerate() {
                a.set(r, c, v.clone());
            }
        }
        let Some(x) = a.solve_unique(&b) else { return Ok(()) };
        if x.iter().any(|v| v.is_negative()) {
            return Ok(());
        }
        let coupling = Coupling::new(
            rows,
            cols,
            basis.iter().zip(x).map(|(&cell, v)| (cells[cell].0, cells[cell].1, v)),
        )?;
        found.entry(coupling.canonical_key()).or_insert(coupling);
        Ok(())
    };
    search.run(0, EchelonBasis::default(), &mut on_basis)?;
    Ok((found.into_values().collect(), search.solved))
}

struct BasisSearch<'a> {
    columns: &'a [Vec<Rational>],
    rank: usize,
    visited: usize,
    solved: usize,
    chosen: Vec<usize>,
}

impl BasisSearch<'_> {
    /// Depth-first over increasing index sets of independent columns.
    fn run(
        &mut self,
        start: usize,
        basis: EchelonBasis,
        on_basis: &mut dyn FnMut(&[usize]) -> Result<()>,
    ) -> Result<()> {
        self.visited += 1;
        if self.visited > BRUTE_NODE_BUDGET {
            return Err(Error::TooLarge {
                size: self.visited,
                max: BRUTE_NODE_BUDGET,
            });
        }
        if self.chosen.len() == self.rank {
            self.solved += 1;
            return on_basis(&self.chosen);
        }
        let need = self.rank - self.chosen.len();
        for c in start..self.columns.len() {
            if self.columns.len() - c < need {
                break;
            }
            let mut next = basis.clone();
            if !next.try_insert(self.columns[c].clone()) {
                continue;
            }
            self.chosen.push(c);
            self.run(c + 1, next, on_basis)?;
            self.chosen.pop();
        }
        Ok(())
    }
}

/// Checks a witness from scratch: distinct halves, both with the marginals of
/// `coupling`, averaging to it. Returns the largest violation.
pub fn witness_violation<T: Scalar>(coupling: &Coupling<T>, witness: &Witness<T>) -> Option<String> {
    let (g0, g1) = (&witness.gamma0, &witness.gamma1);
    if g0 == g1 {
        return Some("halves are equal".into());
    }
    let tol = T::tolerance(1e-12) * &T::max_of(&coupling.mass(), &T::one());
    let rows = coupling.row_sums();
    let cols = coupling.col_sums();
    for (name, g) in [("gamma0", g0), ("gamma1", g1)] {
        if g.shape() != coupling.shape() {
            return Some(format!("{name} has the wrong shape"));
        }
        let close = |a: &[T], b: &[T]| a.iter().zip(b).all(|(x, y)| (x.clone() - y).abs() <= tol);
        if !close(&g.row_sums(), &rows) || !close(&g.col_sums(), &cols) {
            return Some(format!("{name} has different marginals"));
        }
    }
    let half = T::from_ratio(1, 2);
    let mut keys = coupling.support_set();
    keys.extend(g0.support());
    keys.extend(g1.support());
    for (i, j) in keys {
        let avg = (g0.get(i, j) + &g1.get(i, j)) * &half;
        if (avg - &coupling.get(i, j)).abs() > tol {
            return Some(format!("average differs at ({i}, {j})"));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn all(c: &Coupling<Rational>) -> ExtremalityVerdict<Rational> {
        check_extremal(c, &Method::ALL, DEFAULT_BRUTE_MAX_SIZE)
    }

    #[test]
    fn permutation_is_extremal_everywhere() {
        let c = Coupling::new(3, 3, [(0, 1, q(1, 3)), (1, 2, q(1, 3)), (2, 0, q(1, 3))]).unwrap();
        let v = all(&c);
        assert_eq!(v.extremal(), Some(true));
        match &v.verdict(Method::Rank).unwrap().evidence {
            Evidence::Rank { rank, support_size, .. } => assert_eq!((*rank, *support_size), (3, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn uniform_two_by_two_splits_into_permutations() {
        let c = Coupling::new(2, 2, [(0, 0, q(1, 4)), (0, 1, q(1, 4)), (1, 0, q(1, 4)), (1, 1, q(1, 4))]).unwrap();
        let v = all(&c);
        assert_eq!(v.extremal(), Some(false));
        let f = v.verdict(Method::Forest).unwrap();
        let w = f.witness.as_ref().unwrap();
        assert!(witness_violation(&c, w).is_none());
        // ε = 1/8 here, so the halves are 1/8 and 3/8 checkerboards.
        assert_eq!(w.gamma0.get(0, 0), q(1, 8));
        assert_eq!(w.gamma1.get(0, 0), q(3, 8));
        for verdict in &v.verdicts {
            assert!(witness_violation(&c, verdict.witness.as_ref().unwrap()).is_none());
        }
        match &v.verdict(Method::Rank).unwrap().evidence {
            Evidence::Rank { rank, deficit, .. } => assert_eq!((*rank, *deficit), (3, 1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn birkhoff_three_by_three_has_six_vertices() {
        let u = vec![q(1, 3); 3];
        let vs = enumerate_vertices(&u, &u, 36).unwrap();
        assert_eq!(vs.len(), 6);
        assert!(vs.iter().all(|v| v.nnz() == 3));
    }

    #[test]
    fn thirds_by_halves_has_two_vertices() {
        let vs = enumerate_vertices(&[q(1, 3), q(2, 3)], &[q(1, 2), q(1, 2)], 36).unwrap();
        assert_eq!(vs.len(), 2);
    }

    #[test]
    fn empty_coupling_is_vacuously_extremal() {
        let c: Coupling<Rational> = Coupling::zero(2, 2);
        assert_eq!(all(&c).extremal(), Some(true));
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let c: Coupling<Rational> = Coupling::zero(7, 7);
        assert!(matches!(brute_force_oracle(&c, 36), Err(Error::TooLarge { .. })));
        let v = check_extremal(&c, &Method::ALL, 36);
        assert_eq!(v.skipped.len(), 1);
        assert!(v.agree);
    }

    #[test]
    fn midpoint_of_two_vertices_is_not_extremal() {
        let u = vec![q(1, 3); 3];
        let vs = enumerate_vertices(&u, &u, 36).unwrap();
        let mid = crate::measures::add(&[vs[0].clone(), vs[1].clone()]).unwrap().scaled(&q(1, 2));
        let v = all(&mid);
        assert_eq!(v.extremal(), Some(false));
        let w = v.verdict(Method::Brute).unwrap().witness.as_ref().unwrap();
        assert!(witness_violation(&mid, w).is_none());
    }

    #[test]
    fn float_coupling_is_checked_too() {
        let c = Coupling::new(2, 2, [(0, 0, 0.25), (0, 1, 0.25), (1, 0, 0.25), (1, 1, 0.25)]).unwrap();
        let v = check_extremal(&c, &Method::ALL, 36);
        assert_eq!(v.extremal(), Some(false));
        for verdict in &v.verdicts {
            assert!(witness_violation(&c, verdict.witness.as_ref().unwrap()).is_none());
        }
    }
}
