//! Dense linear algebra over Q and prime fields, for field-coefficient
//! homology dimensions and spectral-sequence subspace arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A field given as a context object; elements carry no ring data.
pub trait Field: Clone {
    type E: Clone + PartialEq;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn from_int(&self, v: &BigInt) -> Self::E;
    fn is_zero(&self, a: &Self::E) -> bool;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn inv(&self, a: &Self::E) -> Self::E;
    fn neg(&self, a: &Self::E) -> Self::E;
}

#[derive(Clone, Copy, Debug)]
pub struct Rationals;

impl Field for Rationals {
    type E = BigRational;
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_int(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        a.recip()
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PrimeField(pub u64);

impl PrimeField {
    fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let p = self.0 as u128;
        let mut acc: u128 = 1;
        let mut b = base as u128 % p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        base = acc as u64;
        base
    }
}

impl Field for PrimeField {
    type E = u64;
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_int(&self, v: &BigInt) -> u64 {
        let p = BigInt::from(self.0);
        let r = ((v % &p) + &p) % &p;
        u64::try_from(&r).unwrap()
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.0 as u128) as u64
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + (self.0 - *b) as u128) % self.0 as u128) as u64
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.0 as u128) as u64
    }
    fn inv(&self, a: &u64) -> u64 {
        assert!(*a != 0, "division by zero in F_p");
        self.pow(*a, self.0 - 2)
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.0 - *a
        }
    }
}

pub type FMat<F> = Vec<Vec<<F as Field>::E>>; // row-major

pub fn fmat_from_int<F: Field>(f: &F, m: &crate::matrix::IntMatrix) -> FMat<F> {
    let mut out = vec![vec![f.zero(); m.cols()]; m.rows()];
    for (i, j, v) in m.entries() {
        out[i][j] = f.from_int(v);
    }
    out
}

pub fn fmat_zero<F: Field>(f: &F, rows: usize, cols: usize) -> FMat<F> {
    vec![vec![f.zero(); cols]; rows]
}

pub fn mat_vec<F: Field>(f: &F, m: &FMat<F>, v: &[F::E]) -> Vec<F::E> {
    m.iter()
        .map(|row| {
            let mut acc = f.zero();
            for (a, b) in row.iter().zip(v) {
                if !f.is_zero(a) && !f.is_zero(b) {
                    acc = f.add(&acc, &f.mul(a, b));
                }
            }
            acc
        })
        .collect()
}

/// In-place row reduction; returns pivot columns.
pub fn rref<F: Field>(f: &F, m: &mut FMat<F>) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = vec![];
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !f.is_zero(&m[i][c])) else { continue };
        m.swap(r, pr);
        let inv = f.inv(&m[r][c]);
        for j in c..cols {
            m[r][j] = f.mul(&m[r][j], &inv);
        }
        for i in 0..rows {
            if i != r && !f.is_zero(&m[i][c]) {
                let factor = m[i][c].clone();
                for j in c..cols {
                    let t = f.mul(&factor, &m[r][j]);
                    m[i][j] = f.sub(&m[i][j], &t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<F: Field>(f: &F, m: &FMat<F>) -> usize {
    let mut m = m.clone();
    rref(f, &mut m).len()
}

/// Dimension of the span of a set of vectors.
pub fn dim_span<F: Field>(f: &F, vecs: &[Vec<F::E>]) -> usize {
    if vecs.is_empty() {
        return 0;
    }
    rank(f, &vecs.to_vec())
}

/// Kernel basis of the linear map given by `m` (rows x cols), as vectors
/// of length cols.
pub fn kernel<F: Field>(f: &F, m: &FMat<F>) -> Vec<Vec<F::E>> {
    let cols = m.first().map_or(0, |r| r.len());
    if m.is_empty() {
        return (0..cols)
            .map(|j| {
                let mut v = vec![f.zero(); cols];
                v[j] = f.one();
                v
            })
            .collect();
    }
    let mut red = m.clone();
    let pivots = rref(f, &mut red);
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut basis = vec![];
    for free in 0..cols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![f.zero(); cols];
        v[free] = f.one();
        for (r, &pc) in pivots.iter().enumerate() {
            // red[r][pc] == 1; the pivot variable balances the free one
            v[pc] = f.neg(&red[r][free]);
        }
        basis.push(v);
    }
    basis
}

/// Solve M x = b; returns any solution if one exists.
pub fn solve<F: Field>(f: &F, m: &FMat<F>, b: &[F::E]) -> Option<Vec<F::E>> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    assert_eq!(rows, b.len());
    let mut aug: FMat<F> = m
        .iter()
        .zip(b)
        .map(|(row, bv)| {
            let mut r = row.clone();
            r.push(bv.clone());
            r
        })
        .collect();
    let pivots = rref(f, &mut aug);
    // inconsistent iff a pivot lands in the last column
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![f.zero(); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[r][cols].clone();
    }
    Some(x)
}
