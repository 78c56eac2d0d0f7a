//! Exact Gaussian elimination over the rationals.
//!
//! Only what the extremality certificates need: rank, a kernel basis, and the
//! unique solution of a consistent full-column-rank system.

use num_traits::{One, Zero};

use crate::scalar::Rational;

/// Dense rational matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = Rational::one() / self.get(row, col);
            for c in col..self.cols {
                let v = self.get(row, c) * &inv;
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r == row || self.get(r, col).is_zero() {
                    continue;
                }
                let factor = self.get(r, col).clone();
                for c in col..self.cols {
                    let v = self.get(r, c) - &(&factor * self.get(row, c));
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{w : A w = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Rational>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut w = vec![Rational::zero(); self.cols];
                w[f] = Rational::one();
                for (r, &p) in pivots.iter().enumerate() {
                    w[p] = -m.get(r, f).clone();
                }
                w
            })
            .collect()
    }

    /// Unique `x` with `A x = b`, or `None` when the columns are dependent or
    /// the system is inconsistent.
    pub fn solve_unique(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c).clone());
            }
            aug.set(r, self.cols, b[r].clone());
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) || pivots.len() != self.cols {
            return None;
        }
        Some((0..self.cols).map(|r| aug.get(r, self.cols).clone()).collect())
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        (0..self.rows)
            .map(|r| {
                (0..self.cols).fold(Rational::zero(), |acc, c| acc + self.get(r, c) * &x[c])
            })
            .collect()
    }
}

/// Incrementally maintained row-echelon basis, for testing whether a new
/// vector is independent of those already accepted.
#[derive(Debug, Clone, Default)]
pub struct EchelonBasis {
    // (pivot index, normalized row)
    rows: Vec<(usize, Vec<Rational>)>,
}

impl EchelonBasis {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Reduces `v` against the basis; adds and returns `true` if a nonzero
    /// remainder is left.
    pub fn try_insert(&mut self, mut v: Vec<Rational>) -> bool {
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (a, b) in v.iter_mut().zip(row) {
                    if !b.is_zero() {
                        *a = &*a - &(&f * b);
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = Rational::one() / &v[p];
        for a in v.iter_mut() {
            if !a.is_zero() {
                *a = &*a * &inv;
            }
        }
        self.rows.push((p, v));
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn m(rows: &[&[i64]]) -> Matrix {
        let mut out = Matrix::zeros(rows.len(), rows[0].len());
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                out.set(r, c, Rational::from_i64(v));
            }
        }
        out
    }

    #[test]
    fn rank_and_kernel() {
        let a = m(&[&[1, 1, 0, 0], &[0, 0, 1, 1], &[1, 0, 1, 0], &[0, 1, 0, 1]]);
        assert_eq!(a.rank(), 3);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        assert!(a.mul_vec(&k[0]).iter().all(Zero::is_zero));
    }

    #[test]
    fn solves_consistent_system() {
        let a = m(&[&[1, 0], &[1, 1], &[0, 1]]);
        let b: Vec<Rational> = [2, 5, 3].iter().map(|&v| Rational::from_i64(v)).collect();
        assert_eq!(a.solve_unique(&b).unwrap(), vec![Rational::from_i64(2), Rational::from_i64(3)]);
        let bad: Vec<Rational> = [2, 6, 3].iter().map(|&v| Rational::from_i64(v)).collect();
        assert!(a.solve_unique(&bad).is_none());
    }

    #[test]
    fn echelon_detects_dependence() {
        let mut e = EchelonBasis::default();
        let v = |a: &[i64]| a.iter().map(|&x| Rational::from_i64(x)).collect::<Vec<_>>();
        assert!(e.try_insert(v(&[1, 1, 0])));
        assert!(e.try_insert(v(&[0, 1, 1])));
        assert!(!e.try_insert(v(&[1, 2, 1])));
        assert!(e.try_insert(v(&[0, 0, 1])));
        assert_eq!(e.len(), 3);
    }
}
