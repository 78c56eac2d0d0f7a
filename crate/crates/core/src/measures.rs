//! Discrete measures, cost matrices, couplings and push-forwards.
//!
//! Couplings are canonically sparse: an entry of mass exactly zero is never
//! stored, so the support of a coupling is a property of the data structure
//! rather than of a tolerance.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finite weighted point set on an index space.
///
/// Points may carry zero weight; such sites stay addressable but never appear
/// in a support graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<T> {
    points: Vec<usize>,
    weights: Vec<T>,
    total: T,
    index: BTreeMap<usize, usize>,
}

impl<T: Scalar> DiscreteMeasure<T> {
    pub fn new(points: Vec<usize>, weights: Vec<T>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        let mut index = BTreeMap::new();
        for (pos, &p) in points.iter().enumerate() {
            if index.insert(p, pos).is_some() {
                return Err(Error::InvalidMeasure(format!("duplicate point {p}")));
            }
        }
        let mut total = T::zero();
        for (p, w) in points.iter().zip(&weights) {
            if !w.is_finite_value() || w.lt_zero() {
                return Err(Error::InvalidMeasure(format!("weight {w} at point {p}")));
            }
            total = total + w;
        }
        Ok(DiscreteMeasure {
            points,
            weights,
            total,
            index,
        })
    }

    /// Measure on sites `0..weights.len()`.
    pub fn dense(weights: Vec<T>) -> Result<Self> {
        let points = (0..weights.len()).collect();
        Self::new(points, weights)
    }

    pub fn uniform(n: usize) -> Self {
        let w = T::from_ratio(1, n.max(1) as i64);
        Self::dense(vec![w; n]).expect("uniform weights are valid")
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn total_mass(&self) -> &T {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Weight at `site`, zero when the site is not listed.
    pub fn weight_of(&self, site: usize) -> T {
        self.index
            .get(&site)
            .map(|&pos| self.weights[pos].clone())
            .unwrap_or_else(T::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> {
        self.points.iter().copied().zip(self.weights.iter())
    }

    /// Sites with strictly positive weight, in listing order.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.iter().filter(|(_, w)| w.gt_zero()).map(|(p, _)| p)
    }

    /// Largest site identifier plus one (0 for an empty measure).
    pub fn extent(&self) -> usize {
        self.points.iter().max().map_or(0, |m| m + 1)
    }

    /// Weights as a dense vector of length `n`; sites `>= n` are ignored.
    pub fn to_dense(&self, n: usize) -> Vec<T> {
        let mut out = vec![T::zero(); n];
        for (p, w) in self.iter() {
            if p < n {
                out[p] = w.clone();
            }
        }
        out
    }

    /// Restriction to a set of sites; sites outside the set are dropped.
    pub fn restrict(&self, sites: &BTreeSet<usize>) -> Self {
        let (points, weights) = self
            .iter()
            .filter(|(p, _)| sites.contains(p))
            .map(|(p, w)| (p, w.clone()))
            .unzip();
        Self::new(points, weights).expect("restriction of a valid measure")
    }

    /// Largest pointwise |self - other| over the union of both point sets.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let sites: BTreeSet<usize> = self.points.iter().chain(&other.points).copied().collect();
        sites
            .into_iter()
            .map(|s| (self.weight_of(s) - &other.weight_of(s)).abs())
            .fold(T::zero(), |a, b| T::max_of(&a, &b))
    }

    /// Equality as functions on sites, with absent sites read as zero.
    pub fn same_weights(&self, other: &Self, tol: &T) -> bool {
        self.max_abs_diff(other) <= *tol
    }
}

/// Dense cost matrix, `c[i][j] = c(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: (rows, cols),
                found: (entries.len(), 1),
            });
        }
        for (k, e) in entries.iter().enumerate() {
            if !e.is_finite_value() {
                return Err(Error::NonFiniteCost {
                    row: k / cols.max(1),
                    col: k % cols.max(1),
                });
            }
        }
        Ok(CostMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self::new(rows, cols, entries)
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidCoupling("ragged cost matrix".into()));
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.cols + j]
    }

    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .map(|e| e.abs())
            .fold(T::zero(), |a, b| T::max_of(&a, &b))
    }

    /// `c_ij + a_i + b_j`.
    pub fn shifted(&self, a: &[T], b: &[T]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).clone() + &a[i] + &b[j]
        })
        .expect("shift of a valid matrix")
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.entries
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(<[T]>::to_vec)
            .collect()
    }
}

/// Sparse non-negative matrix; its marginals are the two measures it couples.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling<T> {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> Coupling<T> {
    /// Builds a coupling from `(i, j, mass)` triples. Zero masses are dropped;
    /// negative masses, out-of-range indices and duplicate keys are rejected.
    pub fn new(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, j, m) in entries {
            if i >= rows || j >= cols {
                return Err(Error::InvalidCoupling(format!(
                    "entry ({i}, {j}) outside shape {rows}x{cols}"
                )));
            }
            if !m.is_finite_value() || m.lt_zero() {
                return Err(Error::InvalidCoupling(format!("mass {m} at ({i}, {j})")));
            }
            if map.contains_key(&(i, j)) {
                return Err(Error::InvalidCoupling(format!("duplicate entry ({i}, {j})")));
            }
            if !m.is_zero() {
                map.insert((i, j), m);
            }
        }
        Ok(Coupling {
            rows,
            cols,
            entries: map,
        })
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Coupling {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    /// Product coupling `mu ⊗ nu` on `rows x cols`.
    pub fn product(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, rows: usize, cols: usize) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, a) in mu.iter() {
            for (j, b) in nu.iter() {
                entries.push((i, j, a.clone() * b));
            }
        }
        Self::new(rows, cols, entries)
    }

    /// Dense matrix input; zeros become structural absences.
    pub fn from_dense(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::new();
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(Error::InvalidCoupling("ragged matrix".into()));
            }
            for (j, m) in row.into_iter().enumerate() {
                entries.push((i, j, m));
            }
        }
        Self::new(r, c, entries)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.entries.contains_key(&(i, j))
    }

    /// Entries in lexicographic `(i, j)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        self.entries.iter().map(|(&(i, j), m)| (i, j, m))
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_set(&self) -> BTreeSet<(usize, usize)> {
        self.entries.keys().copied().collect()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn mass(&self) -> T {
        self.entries.values().fold(T::zero(), |a, m| a + m)
    }

    pub fn row_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.rows];
        for (&(i, _), m) in &self.entries {
            out[i] = out[i].clone() + m;
        }
        out
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for (&(_, j), m) in &self.entries {
            out[j] = out[j].clone() + m;
        }
        out
    }

    pub fn row_marginal(&self) -> DiscreteMeasure<T> {
        DiscreteMeasure::dense(self.row_sums()).expect("sums of nonnegative masses")
    }

    pub fn col_marginal(&self) -> DiscreteMeasure<T> {
        DiscreteMeasure::dense(self.col_sums()).expect("sums of nonnegative masses")
    }

    /// `Σ c_ij γ_ij`.
    pub fn cost(&self, cost: &CostMatrix<T>) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, (&(i, j), m)| acc + &(cost.get(i, j).clone() * m))
    }

    pub fn scaled(&self, factor: &T) -> Self {
        let entries = self.entries.iter().map(|(&(i, j), m)| (i, j, m.clone() * factor));
        Self::new(self.rows, self.cols, entries).expect("scaling by a nonnegative factor")
    }

    /// Drops entries whose mass is `<= threshold`.
    pub fn pruned(&self, threshold: &T) -> Self {
        Coupling {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .filter(|(_, m)| *m > threshold)
                .map(|(&k, m)| (k, m.clone()))
                .collect(),
        }
    }

    /// Entrywise `self + sign * delta` where `delta` is a signed sparse field.
    /// Fails if any resulting mass is negative.
    pub fn perturbed(&self, delta: &BTreeMap<(usize, usize), T>) -> Result<Self> {
        let mut map = self.entries.clone();
        for (&k, d) in delta {
            let v = map.remove(&k).unwrap_or_else(T::zero) + d;
            if v.lt_zero() {
                return Err(Error::InvalidCoupling(format!("negative mass at {k:?}")));
            }
            if !v.is_zero() {
                map.insert(k, v);
            }
        }
        Ok(Coupling {
            rows: self.rows,
            cols: self.cols,
            entries: map,
        })
    }

    /// Largest entrywise |self - other|.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let keys: BTreeSet<(usize, usize)> =
            self.entries.keys().chain(other.entries.keys()).copied().collect();
        keys.into_iter()
            .map(|(i, j)| (self.get(i, j) - &other.get(i, j)).abs())
            .fold(T::zero(), |a, b| T::max_of(&a, &b))
    }

    /// Deterministic text form used to deduplicate couplings.
    pub fn canonical_key(&self) -> String {
        let mut s = format!("{}x{}", self.rows, self.cols);
        for (&(i, j), m) in &self.entries {
            s.push_str(&format!(";{i},{j}:{m}"));
        }
        s
    }

    /// Exact conversion into another backend via rationals.
    pub fn convert<U: Scalar>(&self) -> Coupling<U> {
        Coupling {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .map(|(&k, m)| (k, U::from_rational(&m.to_rational())))
                .filter(|(_, m)| !m.is_zero())
                .collect(),
        }
    }
}

/// Row-sum and column-sum measures of a coupling.
pub fn marginals<T: Scalar>(coupling: &Coupling<T>) -> (DiscreteMeasure<T>, DiscreteMeasure<T>) {
    (coupling.row_marginal(), coupling.col_marginal())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    /// Graph of a map from X-sites to Y-sites.
    XToY,
    /// Antigraph: a map from Y-sites to X-sites, drawn in `X x Y`.
    YToX,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::XToY => "XY",
            Direction::YToX => "YX",
        }
    }
}

/// Single-valued map defined on finitely many sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialMap {
    pub direction: Direction,
    assignments: BTreeMap<usize, usize>,
}

impl PartialMap {
    pub fn new(direction: Direction) -> Self {
        PartialMap {
            direction,
            assignments: BTreeMap::new(),
        }
    }

    /// Fails if a domain site is assigned twice.
    pub fn from_pairs(direction: Direction, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut map = Self::new(direction);
        for (a, b) in pairs {
            if map.assignments.insert(a, b).is_some() {
                return Err(Error::InvalidCoupling(format!(
                    "site {a} assigned twice in a {} map",
                    direction.as_str()
                )));
            }
        }
        Ok(map)
    }

    pub fn insert(&mut self, from: usize, to: usize) -> Option<usize> {
        self.assignments.insert(from, to)
    }

    pub fn get(&self, site: usize) -> Option<usize> {
        self.assignments.get(&site).copied()
    }

    pub fn assignments(&self) -> &BTreeMap<usize, usize> {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn domain(&self) -> BTreeSet<usize> {
        self.assignments.keys().copied().collect()
    }

    pub fn range(&self) -> BTreeSet<usize> {
        self.assignments.values().copied().collect()
    }

    /// The map's graph (or antigraph) as `(x, y)` pairs.
    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.assignments
            .iter()
            .map(|(&a, &b)| match self.direction {
                Direction::XToY => (a, b),
                Direction::YToX => (b, a),
            })
            .collect()
    }
}

/// Push-forward of `eta` through `id × f` (or `f × id` for antigraphs), as a
/// coupling of the given shape.
pub fn pushforward_coupling<T: Scalar>(
    map: &PartialMap,
    eta: &DiscreteMeasure<T>,
    shape: (usize, usize),
) -> Result<Coupling<T>> {
    let mut entries = Vec::with_capacity(eta.len());
    for (site, w) in eta.iter() {
        if w.is_zero() {
            continue;
        }
        let image = map.get(site).ok_or(Error::DomainMismatch { site })?;
        let (i, j) = match map.direction {
            Direction::XToY => (site, image),
            Direction::YToX => (image, site),
        };
        entries.push((i, j, w.clone()));
    }
    Coupling::new(shape.0, shape.1, entries)
}

/// Entrywise sum of couplings of a common shape.
pub fn add<T: Scalar>(couplings: &[Coupling<T>]) -> Result<Coupling<T>> {
    let first = couplings
        .first()
        .ok_or_else(|| Error::InvalidCoupling("sum of an empty list".into()))?;
    let shape = first.shape();
    let mut map: BTreeMap<(usize, usize), T> = BTreeMap::new();
    for c in couplings {
        if c.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: c.shape(),
            });
        }
        for (&k, m) in &c.entries {
            let e = map.entry(k).or_insert_with(T::zero);
            *e = e.clone() + m;
        }
    }
    map.retain(|_, m| !m.is_zero());
    Ok(Coupling {
        rows: shape.0,
        cols: shape.1,
        entries: map,
    })
}
