//! One-dimensional grids, costs on them, twist and subtwist census, and the
//! quantities read off the zero set of an optimal solution: cross-differences
//! and the marked-point function `h`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, PI};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kantorovich::{self, Pricing, Solution, SolverOptions};
use crate::limbs::{self, NumberedLimbSystem};
use crate::measures::{CostMatrix, DiscreteMeasure};
use crate::scalar::{Arithmetic, Rational, Scalar};
use crate::support::{build_support_graph, Node};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    /// `ℝ / 2πℤ`, sites `2πi/n`, neighbors wrap.
    Circle,
    /// `[0, 1]`, sites `i/(n-1)`, endpoints have one neighbor.
    Interval,
}

impl FromStr for GridKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(GridKind::Circle),
            "interval" => Ok(GridKind::Interval),
            other => Err(Error::InvalidGrid(format!("unknown manifold '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridManifold {
    pub kind: GridKind,
    pub n: usize,
}

impl GridManifold {
    pub fn new(kind: GridKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 sites, got {n}")));
        }
        Ok(GridManifold { kind, n })
    }

    pub fn circle(n: usize) -> Result<Self> {
        Self::new(GridKind::Circle, n)
    }

    pub fn interval(n: usize) -> Result<Self> {
        Self::new(GridKind::Interval, n)
    }

    pub fn coord(&self, i: usize) -> f64 {
        match self.kind {
            GridKind::Circle => 2.0 * PI * i as f64 / self.n as f64,
            GridKind::Interval => i as f64 / (self.n - 1) as f64,
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Exact coordinate where one exists (interval sites are rational).
    pub fn coord_exact(&self, i: usize) -> Option<Rational> {
        match self.kind {
            GridKind::Interval => Some(Rational::from_ratio(i as i64, (self.n - 1) as i64)),
            GridKind::Circle => (i == 0).then(|| Rational::from_i64(0)),
        }
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        match self.kind {
            GridKind::Circle => vec![(i + self.n - 1) % self.n, (i + 1) % self.n],
            GridKind::Interval => {
                let mut v = Vec::with_capacity(2);
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < self.n {
                    v.push(i + 1);
                }
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFunction {
    /// `1 - cos(x - y)`.
    CircleCos,
    /// `|x - y|² / 2`.
    Quadratic,
    /// `-x·y`.
    NegativeProduct,
    Constant,
}

impl CostFunction {
    pub fn name(self) -> &'static str {
        match self {
            CostFunction::CircleCos => "circle_cos",
            CostFunction::Quadratic => "quadratic",
            CostFunction::NegativeProduct => "negative_product",
            CostFunction::Constant => "constant",
        }
    }

    pub fn eval(self, x: f64, y: f64) -> f64 {
        match self {
            CostFunction::CircleCos => 1.0 - (x - y).cos(),
            CostFunction::Quadratic => 0.5 * (x - y) * (x - y),
            CostFunction::NegativeProduct => -x * y,
            CostFunction::Constant => 0.0,
        }
    }

    fn eval_exact(self, x: &Rational, y: &Rational) -> Option<Rational> {
        match self {
            CostFunction::CircleCos => None,
            CostFunction::Quadratic => {
                let d = x - y;
                Some(&d * &d / Rational::from_i64(2))
            }
            CostFunction::NegativeProduct => Some(-(x * y)),
            CostFunction::Constant => Some(Rational::from_i64(0)),
        }
    }

    /// `c(x, y) + c(x', y') - c(x, y') - c(x', y)`.
    pub fn cross_difference(self, x: f64, y: f64, xp: f64, yp: f64) -> f64 {
        self.eval(x, y) + self.eval(xp, yp) - self.eval(x, yp) - self.eval(xp, y)
    }

    /// Cost matrix between two grids. Polynomial costs on interval grids are
    /// evaluated exactly; anything else goes through `f64`, converted exactly
    /// in the rational backend.
    pub fn matrix<T: Scalar>(self, gx: &GridManifold, gy: &GridManifold) -> Result<CostMatrix<T>> {
        CostMatrix::from_fn(gx.n, gy.n, |i, j| {
            let exact = gx
                .coord_exact(i)
                .zip(gy.coord_exact(j))
                .and_then(|(x, y)| self.eval_exact(&x, &y))
                .filter(|_| gx.kind == GridKind::Interval && gy.kind == GridKind::Interval);
            match exact {
                Some(r) => T::from_rational(&r),
                None => T::from_f64(self.eval(gx.coord(i), gy.coord(j))),
            }
        })
    }
}

impl FromStr for CostFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle_cos" => Ok(CostFunction::CircleCos),
            "quadratic" => Ok(CostFunction::Quadratic),
            "negative_product" => Ok(CostFunction::NegativeProduct),
            "constant" => Ok(CostFunction::Constant),
            other => Err(Error::Parse(format!("unknown cost '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Twisted,
    Subtwisted,
    Neither,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Twisted => "twisted",
            Classification::Subtwisted => "subtwisted",
            Classification::Neither => "neither",
        }
    }
}

/// Discrete critical points of `x -> c(x, y1) - c(x, y2)`.
///
/// Runs of equal consecutive values count once. A run of three or more sites
/// is also a plateau; `global` is false when some extremum or plateau sits
/// below the maximum and above the minimum value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCensus {
    pub y1: usize,
    pub y2: usize,
    pub minima: usize,
    pub maxima: usize,
    pub plateaus: usize,
    pub boundary_minima: usize,
    pub boundary_maxima: usize,
    pub constant: bool,
    pub global: bool,
    /// Sites of the interior minimum and maximum runs (first site of each run).
    pub min_sites: Vec<usize>,
    pub max_sites: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistReport {
    pub manifold: GridManifold,
    pub cost: CostFunction,
    pub pairs: Vec<PairCensus>,
    /// Pairs with a plateau (three or more equal consecutive values).
    pub degenerate_pairs: usize,
    pub classification: Classification,
}

impl TwistReport {
    pub fn pair(&self, y1: usize, y2: usize) -> Option<&PairCensus> {
        self.pairs.iter().find(|p| p.y1 == y1 && p.y2 == y2)
    }
}

/// Census over every ordered pair `y1 != y2`, in parallel over `y1`.
pub fn twist_census(manifold: &GridManifold, cost: CostFunction) -> Result<TwistReport> {
    let n = manifold.n;
    if n < 4 {
        return Err(Error::InvalidGrid(format!("census needs n >= 4, got {n}")));
    }
    let coords = manifold.coords();
    let c: Vec<f64> = (0..n)
        .flat_map(|i| {
            let coords = &coords;
            (0..n).map(move |j| cost.eval(coords[i], coords[j]))
        })
        .collect();
    let scale = c.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    let pairs: Vec<PairCensus> = (0..n)
        .into_par_iter()
        .map(|y1| {
            let mut row = Vec::with_capacity(n - 1);
            let mut d = vec![0.0; n];
            for y2 in (0..n).filter(|&y2| y2 != y1) {
                for (i, v) in d.iter_mut().enumerate() {
                    *v = c[i * n + y1] - c[i * n + y2];
                }
                row.push(census(&d, manifold.kind, 1e-12 * scale, y1, y2));
            }
            row
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let degenerate_pairs = pairs.iter().filter(|p| p.plateaus > 0).count();
    let classification = if pairs.iter().any(|p| p.constant) {
        Classification::Neither
    } else if pairs.iter().all(|p| p.minima == 0 && p.maxima == 0 && p.plateaus == 0) {
        Classification::Twisted
    } else if pairs.iter().all(|p| p.minima <= 1 && p.maxima <= 1 && p.global) {
        Classification::Subtwisted
    } else {
        Classification::Neither
    };
    Ok(TwistReport {
        manifold: *manifold,
        cost,
        pairs,
        degenerate_pairs,
        classification,
    })
}

struct Run {
    start: usize,
    len: usize,
    value: f64,
}

fn census(d: &[f64], kind: GridKind, tol: f64, y1: usize, y2: usize) -> PairCensus {
    let n = d.len();
    let mut out = PairCensus {
        y1,
        y2,
        minima: 0,
        maxima: 0,
        plateaus: 0,
        boundary_minima: 0,
        boundary_maxima: 0,
        constant: false,
        global: true,
        min_sites: Vec::new(),
        max_sites: Vec::new(),
    };
    let mut runs: Vec<Run> = Vec::new();
    for (i, &v) in d.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if (v - d[r.start + r.len - 1]).abs() <= tol => r.len += 1,
            _ => runs.push(Run { start: i, len: 1, value: v }),
        }
    }
    if kind == GridKind::Circle && runs.len() > 1 {
        let last = runs.last().expect("nonempty");
        if (d[n - 1] - d[0]).abs() <= tol {
            let extra = last.len;
            let start = last.start;
            runs.pop();
            runs[0].start = start;
            runs[0].len += extra;
        }
    }
    if runs.len() == 1 {
        out.constant = true;
        out.plateaus = 1;
        out.global = false;
        return out;
    }
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k = runs.len();
    for (idx, r) in runs.iter().enumerate() {
        let boundary = kind == GridKind::Interval && (idx == 0 || idx == k - 1);
        let neighbors: Vec<f64> = match kind {
            GridKind::Circle => vec![runs[(idx + k - 1) % k].value, runs[(idx + 1) % k].value],
            GridKind::Interval => {
                let mut v = Vec::new();
                if idx > 0 {
                    v.push(runs[idx - 1].value);
                }
                if idx + 1 < k {
                    v.push(runs[idx + 1].value);
                }
                v
            }
        };
        let is_min = neighbors.iter().all(|&w| r.value < w);
        let is_max = neighbors.iter().all(|&w| r.value > w);
        let at_lo = (r.value - lo).abs() <= tol;
        let at_hi = (r.value - hi).abs() <= tol;
        if r.len >= 3 {
            out.plateaus += 1;
            if !(at_lo || at_hi) {
                out.global = false;
            }
        }
        if boundary {
            out.boundary_minima += usize::from(is_min);
            out.boundary_maxima += usize::from(is_max);
            continue;
        }
        if is_min {
            out.minima += 1;
            out.min_sites.push(r.start);
            out.global &= at_lo;
        }
        if is_max {
            out.maxima += 1;
            out.max_sites.push(r.start);
            out.global &= at_hi;
        }
    }
    out
}

/// `c(x,y) + c(x',y') - c(x,y') - c(x',y)` on matrix indices.
pub fn cross_difference<T: Scalar>(cost: &CostMatrix<T>, x: usize, y: usize, xp: usize, yp: usize) -> T {
    cost.get(x, y).clone() + cost.get(xp, yp) - cost.get(x, yp) - cost.get(xp, y)
}

/// `h(x₁, y₁) = min Δ(x₁, y₁, x, y₂)` over every row `x` and every `y₂` with
/// `(x₁, y₂)` in the zero set, for each `(x₁, y₁)` in the zero set.
pub fn h_values<T: Scalar>(zero_set: &[(usize, usize)], cost: &CostMatrix<T>) -> BTreeMap<(usize, usize), T> {
    let mut fibers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(i, j) in zero_set {
        fibers.entry(i).or_default().push(j);
    }
    let mut out = BTreeMap::new();
    for &(x1, y1) in zero_set {
        let mut h: Option<T> = None;
        for &y2 in &fibers[&x1] {
            for x in 0..cost.rows() {
                let v = cross_difference(cost, x1, y1, x, y2);
                h = Some(match h {
                    None => v,
                    Some(b) => T::min_of(&b, &v),
                });
            }
        }
        out.insert((x1, y1), h.expect("fiber contains y1"));
    }
    out
}

/// Points of the zero set where `h` vanishes (within `tol`).
pub fn marked_points<T: Scalar>(solution: &Solution<T>, cost: &CostMatrix<T>, tol: &T) -> BTreeSet<(usize, usize)> {
    let neg = -tol.clone();
    h_values(&solution.zero_set, cost)
        .into_iter()
        .filter(|(_, h)| *h >= neg)
        .map(|(k, _)| k)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleDemoParams {
    pub n: usize,
    pub kappa: f64,
    pub mu_peak: f64,
    pub nu_peak: f64,
    /// Shuffled-pivot re-solves used for the uniqueness probe.
    pub reorderings: u64,
}

impl CircleDemoParams {
    /// North-peaked `μ`, south-peaked `ν`.
    pub fn new(n: usize, kappa: f64) -> Self {
        CircleDemoParams {
            n,
            kappa,
            mu_peak: FRAC_PI_2,
            nu_peak: 3.0 * FRAC_PI_2,
            reorderings: 3,
        }
    }
}

/// Everything the circular-lake pipeline produces.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleDemoReport<T> {
    pub params: CircleDemoParams,
    pub arithmetic: Arithmetic,
    pub grid: GridManifold,
    pub mu: DiscreteMeasure<T>,
    pub nu: DiscreteMeasure<T>,
    pub cost: CostMatrix<T>,
    pub solution: Solution<T>,
    pub certificate_passed: bool,
    pub relative_gap: f64,
    /// Limb system of the support, or the reason it could not be built.
    pub system: std::result::Result<NumberedLimbSystem, String>,
    pub limb_count: Option<usize>,
    /// Support points per X-site.
    pub fibers: Vec<usize>,
    pub max_fiber: usize,
    pub max_x_degree: usize,
    pub max_y_degree: usize,
    /// Nearest and farthest support point of each X-site's fiber.
    pub t_plus: Vec<Option<usize>>,
    pub t_minus: Vec<Option<usize>>,
    /// Mass on pairs more than a quarter turn apart.
    pub cross_lake_mass: T,
    pub marked: BTreeSet<(usize, usize)>,
    /// Marked support points compared with the odd limbs.
    pub marked_on_support: BTreeSet<(usize, usize)>,
    pub graph_limb_edges: BTreeSet<(usize, usize)>,
    pub marked_matches_graph_limb: bool,
    pub h_max: f64,
    pub unique_across_pivots: bool,
    pub reconstruction_agrees: Option<bool>,
}

/// Density `exp(κ cos(θ - peak))` on the grid, floored at `1e-12` of its
/// maximum and normalized to total mass one.
pub fn von_mises_weights<T: Scalar>(grid: &GridManifold, kappa: f64, peak: f64) -> Result<DiscreteMeasure<T>> {
    let raw: Vec<f64> = grid.coords().iter().map(|&t| (kappa * (t - peak).cos()).exp()).collect();
    let max = raw.iter().copied().fold(0.0, f64::max);
    let floored: Vec<T> = raw.iter().map(|&w| T::from_f64(w.max(1e-12 * max))).collect();
    let total = floored.iter().fold(T::zero(), |a, b| a + b);
    let inv = T::one() / total;
    DiscreteMeasure::dense(floored.into_iter().map(|w| w * &inv).collect())
}

pub fn circle_demo<T: Scalar>(params: &CircleDemoParams) -> Result<CircleDemoReport<T>> {
    if params.n < 16 {
        return Err(Error::InvalidGrid(format!("circle demo needs n >= 16, got {}", params.n)));
    }
    let grid = GridManifold::circle(params.n)?;
    let mu = von_mises_weights::<T>(&grid, params.kappa, params.mu_peak)?;
    let nu = von_mises_weights::<T>(&grid, params.kappa, params.nu_peak)?;
    let cost = CostFunction::CircleCos.matrix::<T>(&grid, &grid)?;
    let solution = kantorovich::solve(&mu, &nu, &cost)?;
    let certificate_passed = kantorovich::verify_certificate(&solution, &mu, &nu, &cost).passed();
    let gap = (solution.primal_value.clone() - &solution.dual_value).abs().as_f64();
    let relative_gap = gap / solution.primal_value.as_f64().abs().max(1.0);

    let graph = build_support_graph(&solution.coupling);
    let system = limbs::decompose(&graph).map_err(|e| e.to_string());
    let limb_count = system.as_ref().ok().map(NumberedLimbSystem::num_limbs);

    let n = params.n;
    let mut fibers = vec![0usize; n];
    let mut t_plus = vec![None; n];
    let mut t_minus = vec![None; n];
    for x in 0..n {
        let ys: Vec<usize> = graph.neighbors(Node::X(x)).into_iter().filter_map(|v| match v {
            Node::Y(y) => Some(y),
            Node::X(_) => None,
        }).collect();
        fibers[x] = ys.len();
        t_plus[x] = ys.iter().copied().min_by(|&a, &b| cost.get(x, a).partial_cmp(cost.get(x, b)).expect("ordered"));
        t_minus[x] = ys.iter().copied().max_by(|&a, &b| cost.get(x, a).partial_cmp(cost.get(x, b)).expect("ordered"));
    }
    let max_fiber = fibers.iter().copied().max().unwrap_or(0);
    let max_x_degree = graph.x_nodes().iter().map(|&x| graph.degree(Node::X(x))).max().unwrap_or(0);
    let max_y_degree = graph.y_nodes().iter().map(|&y| graph.degree(Node::Y(y))).max().unwrap_or(0);

    let coords = grid.coords();
    let cross_lake_mass = solution
        .coupling
        .entries()
        .filter(|&(i, j, _)| (coords[i] - coords[j]).cos() < 0.0)
        .fold(T::zero(), |a, (_, _, m)| a + m);

    let tol = kantorovich::default_zero_tol(&cost);
    let h = h_values(&solution.zero_set, &cost);
    let h_max = h.values().map(|v| v.as_f64()).fold(f64::NEG_INFINITY, f64::max);
    let neg = -tol.clone();
    let marked: BTreeSet<(usize, usize)> = h.iter().filter(|(_, v)| **v >= neg).map(|(k, _)| *k).collect();
    let support = solution.coupling.support_set();
    let marked_on_support: BTreeSet<(usize, usize)> = marked.intersection(&support).copied().collect();
    let graph_limb_edges = system.as_ref().map(NumberedLimbSystem::graph_edges).unwrap_or_default();
    let marked_matches_graph_limb = system.is_ok() && marked_on_support == graph_limb_edges;

    let mut unique_across_pivots = true;
    let pivot_tol = T::tolerance(1e-9);
    for seed in 1..=params.reorderings {
        let opts = SolverOptions {
            pricing: Pricing::Shuffled(seed),
            ..Default::default()
        };
        let other = kantorovich::solve_with(&mu, &nu, &cost, &opts)?;
        unique_across_pivots &= other.coupling.max_abs_diff(&solution.coupling) <= pivot_tol;
    }
    let reconstruction_agrees = system
        .as_ref()
        .ok()
        .map(|s| limbs::uniqueness_check(s, &mu, &nu, &solution.coupling).unwrap_or(false));

    Ok(CircleDemoReport {
        params: *params,
        arithmetic: T::ARITHMETIC,
        grid,
        mu,
        nu,
        cost,
        solution,
        certificate_passed,
        relative_gap,
        system,
        limb_count,
        fibers,
        max_fiber,
        max_x_degree,
        max_y_degree,
        t_plus,
        t_minus,
        cross_lake_mass,
        marked,
        marked_on_support,
        graph_limb_edges,
        marked_matches_graph_limb,
        h_max,
        unique_across_pivots,
        reconstruction_agrees,
    })
}
