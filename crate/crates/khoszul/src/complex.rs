//! Cochain complexes of free abelian groups, with an optional internal
//! grading used to split homology into bidegrees.

use std::collections::BTreeMap;

use crate::error::KhError;
use crate::field::{self, Field};
use crate::group::{homology_at, CanonicalGroup};
use crate::matrix::IntMatrix;

/// d_i : C_i -> C_{i+1}, indexed by the lower degree.
#[derive(Clone, Debug)]
pub struct FreeChainComplex {
    ranks: BTreeMap<i64, usize>,
    diffs: BTreeMap<i64, IntMatrix>,
}

impl FreeChainComplex {
    pub fn new(ranks: BTreeMap<i64, usize>, diffs: BTreeMap<i64, IntMatrix>) -> Result<Self, KhError> {
        for (&i, d) in &diffs {
            let src = ranks.get(&i).copied().unwrap_or(0);
            let tgt = ranks.get(&(i + 1)).copied().unwrap_or(0);
            if d.cols() != src || d.rows() != tgt {
                return Err(KhError::Internal(format!(
                    "differential at degree {i} is {}x{}, expected {}x{}",
                    d.rows(),
                    d.cols(),
                    tgt,
                    src
                )));
            }
        }
        let c = FreeChainComplex { ranks, diffs };
        c.check_d_squared()?;
        Ok(c)
    }

    pub fn rank(&self, i: i64) -> usize {
        self.ranks.get(&i).copied().unwrap_or(0)
    }

    pub fn degrees(&self) -> impl Iterator<Item = i64> + '_ {
        self.ranks.keys().copied()
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.values().sum()
    }

    pub fn diff(&self, i: i64) -> IntMatrix {
        self.diffs
            .get(&i)
            .cloned()
            .unwrap_or_else(|| IntMatrix::zero(self.rank(i + 1), self.rank(i)))
    }

    pub fn check_d_squared(&self) -> Result<(), KhError> {
        for &i in self.ranks.keys() {
            let dd = self.diff(i + 1).mul(&self.diff(i));
            if !dd.is_zero() {
                return Err(KhError::Internal(format!("d^2 != 0 between degrees {i} and {}", i + 2)));
            }
        }
        Ok(())
    }

    pub fn homology(&self, i: i64) -> Result<(CanonicalGroup, IntMatrix), KhError> {
        homology_at(&self.diff(i - 1), &self.diff(i))
    }

    /// Homology dimension over a field at a single degree.
    pub fn homology_dim_field<F: Field>(&self, f: &F, i: i64) -> usize {
        let d_out = field::fmat_from_int(f, &self.diff(i));
        let d_in = field::fmat_from_int(f, &self.diff(i - 1));
        self.rank(i) - field::rank(f, &d_out) - field::rank(f, &d_in)
    }
}

/// A free complex with an internal (quantum) grading preserved by the
/// differential; homology splits by bidegree.
#[derive(Clone, Debug)]
pub struct GradedComplex {
    pub complex: FreeChainComplex,
    /// Internal degree per basis element of each chain group.
    pub qdeg: BTreeMap<i64, Vec<i64>>,
}

impl GradedComplex {
    pub fn new(complex: FreeChainComplex, qdeg: BTreeMap<i64, Vec<i64>>) -> Result<Self, KhError> {
        for i in complex.degrees() {
            let n = qdeg.get(&i).map_or(0, |v| v.len());
            if n != complex.rank(i) {
                return Err(KhError::Internal(format!(
                    "internal grading at degree {i} has {n} entries for rank {}",
                    complex.rank(i)
                )));
            }
        }
        // the differential must preserve the internal degree
        let g = GradedComplex { complex, qdeg };
        for i in g.complex.degrees().collect::<Vec<_>>() {
            let d = g.complex.diff(i);
            for (r, c, _) in d.entries() {
                let jq_src = g.qdeg[&i][c];
                let jq_tgt = g.qdeg[&(i + 1)][r];
                if jq_src != jq_tgt {
                    return Err(KhError::Internal(format!(
                        "differential at degree {i} maps internal degree {jq_src} to {jq_tgt}"
                    )));
                }
            }
        }
        Ok(g)
    }

    /// Indices of the basis elements of C_i in internal degree j.
    pub fn block(&self, i: i64, j: i64) -> Vec<usize> {
        self.qdeg
            .get(&i)
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter_map(|(idx, &q)| (q == j).then_some(idx))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn bidegrees(&self) -> Vec<(i64, i64)> {
        let mut out = vec![];
        for (&i, qs) in &self.qdeg {
            let mut seen: Vec<i64> = qs.clone();
            seen.sort_unstable();
            seen.dedup();
            for j in seen {
                out.push((i, j));
            }
        }
        out
    }

    /// The restriction of d_i to the internal-degree-j block.
    pub fn diff_block(&self, i: i64, j: i64) -> IntMatrix {
        let cols = self.block(i, j);
        let rows = self.block(i + 1, j);
        self.complex.diff(i).select_columns(&cols).select_rows(&rows)
    }
}
