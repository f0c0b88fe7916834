//! Smith normal form over the integers, with unimodular transforms and
//! their inverses, plus kernel bases and exact linear solving built on it.
//!
//! Pivoting picks the smallest nonzero magnitude in the remaining
//! submatrix; arbitrary precision throughout.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::IntMatrix;

/// U * M * V = D with U, V unimodular and D diagonal with
/// d_1 | d_2 | ... | d_k, all d_i >= 0.
#[derive(Clone, Debug)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
    pub d: IntMatrix,
    /// The nonzero diagonal entries, in divisor-chain order.
    pub diag: Vec<BigInt>,
    pub rows: usize,
    pub cols: usize,
}

impl SmithDecomposition {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }
}

struct Work {
    a: Vec<Vec<BigInt>>,
    u: Vec<Vec<BigInt>>,
    u_inv: Vec<Vec<BigInt>>,
    v: Vec<Vec<BigInt>>,
    v_inv: Vec<Vec<BigInt>>,
    rows: usize,
    cols: usize,
}

impl Work {
    fn new(m: &IntMatrix) -> Self {
        let rows = m.rows();
        let cols = m.cols();
        let ident = |n: usize| -> Vec<Vec<BigInt>> {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                        .collect()
                })
                .collect()
        };
        Work {
            a: m.to_dense(),
            u: ident(rows),
            u_inv: ident(rows),
            v: ident(cols),
            v_inv: ident(cols),
            rows,
            cols,
        }
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.a.swap(i, j);
        self.u.swap(i, j);
        // inverse of a row swap is the same swap applied to columns of u_inv
        for r in 0..self.rows {
            self.u_inv[r].swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.a[r].swap(i, j);
        }
        for r in 0..self.cols {
            self.v[r].swap(i, j);
        }
        self.v_inv.swap(i, j);
    }

    /// row_i -= q * row_j  (left multiplication by E = I - q e_ij)
    fn row_sub(&mut self, i: usize, j: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let t = &self.a[j][c] * q;
            self.a[i][c] -= t;
        }
        for c in 0..self.rows {
            let t = &self.u[j][c] * q;
            self.u[i][c] -= t;
        }
        // u_inv gets the inverse op on columns: col_j += q * col_i
        for r in 0..self.rows {
            let t = &self.u_inv[r][i] * q;
            self.u_inv[r][j] += t;
        }
    }

    /// col_i -= q * col_j  (right multiplication)
    fn col_sub(&mut self, i: usize, j: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let t = &self.a[r][j] * q;
            self.a[r][i] -= t;
        }
        for r in 0..self.cols {
            let t = &self.v[r][j] * q;
            self.v[r][i] -= t;
        }
        for c in 0..self.cols {
            let t = &self.v_inv[i][c] * q;
            self.v_inv[j][c] += t;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let v = -self.a[i][c].clone();
            self.a[i][c] = v;
        }
        for c in 0..self.rows {
            let v = -self.u[i][c].clone();
            self.u[i][c] = v;
        }
        for r in 0..self.rows {
            let v = -self.u_inv[r][i].clone();
            self.u_inv[r][i] = v;
        }
    }

    /// Apply 2x2 blocks P (rows) and Q (cols) at indices (i, i+1).
    /// P acts on the left, Q on the right; both must be unimodular.
    fn apply_2x2(&mut self, i: usize, p: [[BigInt; 2]; 2], p_inv: [[BigInt; 2]; 2], q: [[BigInt; 2]; 2], q_inv: [[BigInt; 2]; 2]) {
        let j = i + 1;
        for c in 0..self.cols {
            let x = self.a[i][c].clone();
            let y = self.a[j][c].clone();
            self.a[i][c] = &p[0][0] * &x + &p[0][1] * &y;
            self.a[j][c] = &p[1][0] * &x + &p[1][1] * &y;
        }
        for c in 0..self.rows {
            let x = self.u[i][c].clone();
            let y = self.u[j][c].clone();
            self.u[i][c] = &p[0][0] * &x + &p[0][1] * &y;
            self.u[j][c] = &p[1][0] * &x + &p[1][1] * &y;
        }
        for r in 0..self.rows {
            let x = self.u_inv[r][i].clone();
            let y = self.u_inv[r][j].clone();
            self.u_inv[r][i] = &x * &p_inv[0][0] + &y * &p_inv[1][0];
            self.u_inv[r][j] = &x * &p_inv[0][1] + &y * &p_inv[1][1];
        }
        for r in 0..self.rows {
            let x = self.a[r][i].clone();
            let y = self.a[r][j].clone();
            self.a[r][i] = &x * &q[0][0] + &y * &q[1][0];
            self.a[r][j] = &x * &q[0][1] + &y * &q[1][1];
        }
        for r in 0..self.cols {
            let x = self.v[r][i].clone();
            let y = self.v[r][j].clone();
            self.v[r][i] = &x * &q[0][0] + &y * &q[1][0];
            self.v[r][j] = &x * &q[0][1] + &y * &q[1][1];
        }
        for c in 0..self.cols {
            let x = self.v_inv[i][c].clone();
            let y = self.v_inv[j][c].clone();
            self.v_inv[i][c] = &q_inv[0][0] * &x + &q_inv[0][1] * &y;
            self.v_inv[j][c] = &q_inv[1][0] * &x + &q_inv[1][1] * &y;
        }
    }

    fn find_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        let mut best_mag: Option<BigInt> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                if self.a[i][j].is_zero() {
                    continue;
                }
                let mag = self.a[i][j].abs();
                match &best_mag {
                    Some(b) if *b <= mag => {}
                    _ => {
                        best_mag = Some(mag);
                        best = Some((i, j));
                    }
                }
            }
        }
        best
    }
}

pub fn snf(m: &IntMatrix) -> SmithDecomposition {
    let mut w = Work::new(m);
    let bound = w.rows.min(w.cols);
    let mut t = 0;
    while t < bound {
        let Some((pi, pj)) = w.find_pivot(t) else { break };
        w.swap_rows(t, pi);
        w.swap_cols(t, pj);
        loop {
            // clear column t below the pivot
            let mut leftover = false;
            for i in t + 1..w.rows {
                if w.a[i][t].is_zero() {
                    continue;
                }
                let q = div_trunc(&w.a[i][t], &w.a[t][t]);
                w.row_sub(i, t, &q);
                if !w.a[i][t].is_zero() {
                    leftover = true;
                }
            }
            for j in t + 1..w.cols {
                if w.a[t][j].is_zero() {
                    continue;
                }
                let q = div_trunc(&w.a[t][j], &w.a[t][t]);
                w.col_sub(j, t, &q);
                if !w.a[t][j].is_zero() {
                    leftover = true;
                }
            }
            if !leftover {
                break;
            }
            // a strictly smaller remainder exists in row/column t; bring it in
            let mut moved = false;
            for i in t + 1..w.rows {
                if !w.a[i][t].is_zero() {
                    w.swap_rows(t, i);
                    moved = true;
                    break;
                }
            }
            if !moved {
                for j in t + 1..w.cols {
                    if !w.a[t][j].is_zero() {
                        w.swap_cols(t, j);
                        break;
                    }
                }
            }
        }
        t += 1;
    }
    let mut nonzero = t;

    // normalize signs
    for i in 0..nonzero {
        if w.a[i][i].is_negative() {
            w.negate_row(i);
        }
    }

    // enforce the divisor chain d_i | d_{i+1}
    loop {
        let mut changed = false;
        for i in 0..nonzero.saturating_sub(1) {
            let a = w.a[i][i].clone();
            let b = w.a[i + 1][i + 1].clone();
            if (&b % &a).is_zero() {
                continue;
            }
            let e = a.extended_gcd(&b);
            let (g, s, tt) = (e.gcd, e.x, e.y);
            let ag = &a / &g;
            let bg = &b / &g;
            // P * diag(a, b) * Q = diag(g, a*b/g)
            let p = [[s.clone(), tt.clone()], [-bg.clone(), ag.clone()]];
            let p_inv = [[ag.clone(), -tt.clone()], [bg.clone(), s.clone()]];
            let q = [[BigInt::one(), -(&tt * &bg)], [BigInt::one(), &s * &ag]];
            let q_inv = [[&s * &ag, &tt * &bg], [-BigInt::one(), BigInt::one()]];
            w.apply_2x2(i, p, p_inv, q, q_inv);
            if w.a[i][i].is_negative() {
                w.negate_row(i);
            }
            if w.a[i + 1][i + 1].is_negative() {
                w.negate_row(i + 1);
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }

    // drop any units-free zero diagonal slots that may have appeared
    while nonzero > 0 && w.a[nonzero - 1][nonzero - 1].is_zero() {
        nonzero -= 1;
    }

    let diag: Vec<BigInt> = (0..nonzero).map(|i| w.a[i][i].clone()).collect();
    // built with explicit dimensions so empty shapes survive
    let mut d = IntMatrix::zero(w.rows, w.cols);
    for (i, v) in diag.iter().enumerate() {
        d.set(i, i, v.clone());
    }
    let ident_sized = |m: Vec<Vec<BigInt>>, n: usize| -> IntMatrix {
        if n == 0 {
            IntMatrix::zero(0, 0)
        } else {
            IntMatrix::from_dense_big(m)
        }
    };
    let dec = SmithDecomposition {
        u: ident_sized(w.u, w.rows),
        u_inv: ident_sized(w.u_inv, w.rows),
        v: ident_sized(w.v, w.cols),
        v_inv: ident_sized(w.v_inv, w.cols),
        d,
        diag,
        rows: w.rows,
        cols: w.cols,
    };
    debug_assert!(check_decomposition(m, &dec), "U*M*V != D");
    dec
}

/// Truncated division: a = q*b + r with |r| < |b|, sign(r) = sign(a).
fn div_trunc(a: &BigInt, b: &BigInt) -> BigInt {
    a / b
}

pub fn check_decomposition(m: &IntMatrix, dec: &SmithDecomposition) -> bool {
    if dec.u.mul(m).mul(&dec.v) != dec.d {
        return false;
    }
    if dec.u.mul(&dec.u_inv) != IntMatrix::identity(dec.rows) {
        return false;
    }
    if dec.v.mul(&dec.v_inv) != IntMatrix::identity(dec.cols) {
        return false;
    }
    for win in dec.diag.windows(2) {
        if (&win[1] % &win[0]).is_zero() == false {
            return false;
        }
    }
    dec.diag.iter().all(|d| d.is_positive())
}

pub fn rank(m: &IntMatrix) -> usize {
    snf(m).rank()
}

/// Basis of the integer kernel of M, as columns. The columns come from a
/// unimodular matrix, so they span a saturated sublattice.
pub fn kernel_basis(m: &IntMatrix) -> IntMatrix {
    let dec = snf(m);
    let r = dec.rank();
    let cols: Vec<usize> = (r..m.cols()).collect();
    dec.v.select_columns(&cols)
}

/// Solve A * X = B over the integers. Returns None when no integral
/// solution exists.
pub fn solve(a: &IntMatrix, b: &IntMatrix) -> Option<IntMatrix> {
    assert_eq!(a.rows(), b.rows(), "dimension mismatch in solve");
    let dec = snf(a);
    let c = dec.u.mul(b);
    let r = dec.rank();
    let mut w = IntMatrix::zero(a.cols(), b.cols());
    for (i, j, v) in c.entries() {
        if i >= r {
            return None; // inconsistent
        }
        let d = &dec.diag[i];
        let (q, rem) = v.div_rem(d);
        if !rem.is_zero() {
            return None;
        }
        w.set(i, j, q);
    }
    Some(dec.v.mul(&w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_of(m: &IntMatrix) -> Vec<i64> {
        snf(m).diag.iter().map(|d| i64::try_from(d).unwrap()).collect()
    }

    #[test]
    fn already_diagonal() {
        let m = IntMatrix::from_dense(&[vec![2, 0], vec![0, 0]]);
        assert_eq!(diag_of(&m), vec![2]);
    }

    #[test]
    fn det_two() {
        let m = IntMatrix::from_dense(&[vec![1, 2], vec![3, 4]]);
        assert_eq!(diag_of(&m), vec![1, 2]);
    }

    #[test]
    fn divisor_chain_forced() {
        let m = IntMatrix::from_dense(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(diag_of(&m), vec![1, 6]);
    }

    #[test]
    fn kernel_of_projection() {
        let m = IntMatrix::from_dense(&[vec![1, 0, 1]]);
        let k = kernel_basis(&m);
        assert_eq!(k.cols(), 2);
        assert!(m.mul(&k).is_zero());
    }

    #[test]
    fn solve_exact_and_fail() {
        let a = IntMatrix::from_dense(&[vec![2, 0], vec![0, 3]]);
        let b = IntMatrix::from_dense(&[vec![4], vec![9]]);
        let x = solve(&a, &b).unwrap();
        assert_eq!(a.mul(&x), b);
        let b2 = IntMatrix::from_dense(&[vec![1], vec![0]]);
        assert!(solve(&a, &b2).is_none());
    }

    #[test]
    fn empty_matrices() {
        let m = IntMatrix::zero(0, 3);
        let dec = snf(&m);
        assert_eq!(dec.rank(), 0);
        assert_eq!(kernel_basis(&m).cols(), 3);
        let m2 = IntMatrix::zero(3, 0);
        assert_eq!(snf(&m2).rank(), 0);
    }
}
