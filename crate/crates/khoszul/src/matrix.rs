//! Sparse integer matrices over arbitrary-precision integers.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Sparse matrix over `BigInt`. Only nonzero entries are stored.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.entries.insert((i, i), BigInt::one());
        }
        m
    }

    pub fn from_dense(d: &[Vec<i64>]) -> Self {
        let rows = d.len();
        let cols = d.first().map_or(0, |r| r.len());
        let mut m = IntMatrix::zero(rows, cols);
        for (i, row) in d.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged dense matrix");
            for (j, v) in row.iter().enumerate() {
                if *v != 0 {
                    m.entries.insert((i, j), BigInt::from(*v));
                }
            }
        }
        m
    }

    pub fn from_dense_big(d: Vec<Vec<BigInt>>) -> Self {
        let rows = d.len();
        let cols = d.first().map_or(0, |r| r.len());
        let mut m = IntMatrix::zero(rows, cols);
        for (i, row) in d.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                if !v.is_zero() {
                    m.entries.insert((i, j), v);
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> BigInt {
        assert!(i < self.rows && j < self.cols, "index out of range");
        self.entries.get(&(i, j)).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        assert!(i < self.rows && j < self.cols, "index out of range");
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &BigInt) {
        if v.is_zero() {
            return;
        }
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> {
        self.entries.iter().map(|(&(i, j), v)| (i, j, v))
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut d = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (&(i, j), v) in &self.entries {
            d[i][j] = v.clone();
        }
        d
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut m = IntMatrix::zero(self.cols, self.rows);
        for (&(i, j), v) in &self.entries {
            m.entries.insert((j, i), v.clone());
        }
        m
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        // group rhs entries by row
        let mut rhs_rows: BTreeMap<usize, Vec<(usize, &BigInt)>> = BTreeMap::new();
        for (&(i, j), v) in &other.entries {
            rhs_rows.entry(i).or_default().push((j, v));
        }
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for (&(i, k), a) in &self.entries {
            if let Some(row) = rhs_rows.get(&k) {
                for &(j, b) in row {
                    out.add_to(i, j, &(a * b));
                }
            }
        }
        out
    }

    pub fn neg(&self) -> IntMatrix {
        let mut m = self.clone();
        for v in m.entries.values_mut() {
            *v = -(v.clone());
        }
        m
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (&(i, j), v) in &other.entries {
            out.add_to(i, j, &-v.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigInt) -> IntMatrix {
        if c.is_zero() {
            return IntMatrix::zero(self.rows, self.cols);
        }
        let mut m = self.clone();
        for v in m.entries.values_mut() {
            *v = &*v * c;
        }
        m
    }

    /// Horizontal concatenation [self | other].
    pub fn hstack(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.rows, other.rows, "row mismatch in hstack");
        let mut m = IntMatrix::zero(self.rows, self.cols + other.cols);
        for (&(i, j), v) in &self.entries {
            m.entries.insert((i, j), v.clone());
        }
        for (&(i, j), v) in &other.entries {
            m.entries.insert((i, j + self.cols), v.clone());
        }
        m
    }

    /// Submatrix picking the given columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> IntMatrix {
        for &j in cols {
            assert!(j < self.cols, "column out of range");
        }
        let index: BTreeMap<usize, usize> =
            cols.iter().enumerate().map(|(n, &j)| (j, n)).collect();
        let mut out = IntMatrix::zero(self.rows, cols.len());
        for (&(i, j), v) in &self.entries {
            if let Some(&nj) = index.get(&j) {
                out.entries.insert((i, nj), v.clone());
            }
        }
        out
    }

    /// Submatrix picking the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> IntMatrix {
        let index: BTreeMap<usize, usize> =
            rows.iter().enumerate().map(|(n, &i)| (i, n)).collect();
        let mut out = IntMatrix::zero(rows.len(), self.cols);
        for (&(i, j), v) in &self.entries {
            if let Some(&ni) = index.get(&i) {
                out.entries.insert((ni, j), v.clone());
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> IntMatrix {
        self.select_columns(&[j])
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{}", self.rows, self.cols)?;
        for row in self.to_dense() {
            let s: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(f, "  [{}]", s.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_identity() {
        let a = IntMatrix::from_dense(&[vec![1, 2], vec![3, 4]]);
        let i = IntMatrix::identity(2);
        assert_eq!(a.mul(&i), a);
        assert_eq!(i.mul(&a), a);
    }

    #[test]
    fn mul_basic() {
        let a = IntMatrix::from_dense(&[vec![1, 2], vec![3, 4]]);
        let b = IntMatrix::from_dense(&[vec![0, 1], vec![1, 0]]);
        let ab = a.mul(&b);
        assert_eq!(ab, IntMatrix::from_dense(&[vec![2, 1], vec![4, 3]]));
    }

    #[test]
    fn stacking_and_selection() {
        let a = IntMatrix::from_dense(&[vec![1, 0], vec![0, 2]]);
        let b = IntMatrix::from_dense(&[vec![3], vec![4]]);
        let c = a.hstack(&b);
        assert_eq!(c.cols(), 3);
        assert_eq!(c.get(1, 2), BigInt::from(4));
        let s = c.select_columns(&[2, 0]);
        assert_eq!(s, IntMatrix::from_dense(&[vec![3, 1], vec![4, 0]]));
        let r = c.select_rows(&[1]);
        assert_eq!(r, IntMatrix::from_dense(&[vec![0, 2, 4]]));
    }

    #[test]
    fn zero_dims() {
        let a = IntMatrix::zero(0, 3);
        let b = IntMatrix::zero(3, 2);
        let ab = a.mul(&b);
        assert_eq!((ab.rows(), ab.cols()), (0, 2));
        assert!(ab.is_zero());
    }
}
