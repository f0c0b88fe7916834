//! Koszul complexes: for a module M with l pairwise-commuting
//! square-zero endomorphisms X_1..X_l, the complex
//! M -> M (x) Lambda^1 -> ... -> M (x) Lambda^l with
//! d(m (x) e_S) = sum_{i not in S} (-1)^{#{j in S : j < i}} X_i(m) (x) e_{S u i}.
//!
//! Two incarnations: over the integers on a presented group (for the
//! structure of the homology), and over a field on a vector-space module
//! (for spectral-sequence page comparisons).

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::complex::FreeChainComplex;
use crate::cube::ChainOperator;
use crate::error::KhError;
use crate::field::{self, FMat, Field};
use crate::group::{presented_homology_at, GroupMorphism, Invariants, PresentedGroup};
use crate::matrix::IntMatrix;

/// Subset masks of {0..l-1} with exactly k bits, ascending.
pub fn subsets(l: usize, k: usize) -> Vec<u32> {
    (0u32..(1 << l)).filter(|m| m.count_ones() as usize == k).collect()
}

pub fn binomial(l: usize, k: usize) -> usize {
    if k > l {
        return 0;
    }
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (l - i) / (i + 1);
    }
    acc
}

fn wedge_sign(mask: u32, i: usize) -> i64 {
    if (mask & ((1 << i) - 1)).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

// ---------------------------------------------------------------------
// integral Koszul complex

/// The Koszul complex of a presented abelian group with commuting
/// square-zero endomorphisms. `terms[k]` is the direct sum of one copy
/// of the module per k-subset (subsets ascending by mask); `diffs[k]`
/// maps term k to term k+1.
pub struct KoszulComplex {
    pub module: PresentedGroup,
    pub l: usize,
    pub terms: Vec<PresentedGroup>,
    pub diffs: Vec<GroupMorphism>,
}

fn direct_sum_copies(m: &PresentedGroup, copies: usize) -> PresentedGroup {
    let gens = m.gens * copies;
    let rc = m.rels.cols();
    let mut rels = IntMatrix::zero(gens, rc * copies);
    for c in 0..copies {
        for (r, cc, v) in m.rels.entries() {
            rels.set(c * m.gens + r, c * rc + cc, v.clone());
        }
    }
    PresentedGroup { gens, rels }
}

/// Build the complex; validates that the endomorphisms act on the
/// module, square to zero, and commute pairwise (all modulo relations),
/// and that the assembled differential squares to zero.
pub fn koszul(module: &PresentedGroup, endos: &[GroupMorphism]) -> Result<KoszulComplex, KhError> {
    let l = endos.len();
    if l > 16 {
        return Err(KhError::Validation(format!("{l} endomorphisms; the Koszul complex is limited to 16")));
    }
    for (a, x) in endos.iter().enumerate() {
        if x.source != *module || x.target != *module {
            return Err(KhError::Validation(format!("endomorphism {a} is not an endomorphism of the module")));
        }
        x.check_well_defined()?;
        if !x.compose(x).is_zero_mod_rels() {
            return Err(KhError::Validation(format!("endomorphism {a} does not square to zero")));
        }
        for (b, y) in endos.iter().enumerate().skip(a + 1) {
            if !x.compose(y).sub(&y.compose(x)).is_zero_mod_rels() {
                return Err(KhError::Validation(format!("endomorphisms {a} and {b} do not commute")));
            }
        }
    }

    let mut terms = vec![];
    let mut positions: Vec<BTreeMap<u32, usize>> = vec![];
    for k in 0..=l {
        let subs = subsets(l, k);
        positions.push(subs.iter().enumerate().map(|(p, &s)| (s, p)).collect());
        terms.push(direct_sum_copies(module, subs.len()));
    }

    let g = module.gens;
    let mut diffs = vec![];
    for k in 0..l {
        let subs = subsets(l, k);
        let mut m = IntMatrix::zero(terms[k + 1].gens, terms[k].gens);
        for (s_pos, &s) in subs.iter().enumerate() {
            for i in 0..l {
                if (s >> i) & 1 == 1 {
                    continue;
                }
                let sign = BigInt::from(wedge_sign(s, i));
                let t_pos = positions[k + 1][&(s | (1 << i))];
                for (r, c, v) in endos[i].matrix.entries() {
                    m.add_to(t_pos * g + r, s_pos * g + c, &(&sign * v));
                }
            }
        }
        diffs.push(GroupMorphism::new(terms[k].clone(), terms[k + 1].clone(), m)?);
    }
    for k in 0..l.saturating_sub(1) {
        if !diffs[k + 1].compose(&diffs[k]).is_zero_mod_rels() {
            return Err(KhError::Internal(format!("Koszul differential does not square to zero at step {k}")));
        }
    }

    Ok(KoszulComplex { module: module.clone(), l, terms, diffs })
}

impl KoszulComplex {
    /// Homology at exterior degree k.
    pub fn homology(&self, k: usize) -> Result<Invariants, KhError> {
        let d_in = if k == 0 {
            GroupMorphism::zero(PresentedGroup::trivial(), self.terms[0].clone())
        } else {
            self.diffs[k - 1].clone()
        };
        let d_out = if k == self.l {
            GroupMorphism::zero(self.terms[self.l].clone(), PresentedGroup::trivial())
        } else {
            self.diffs[k].clone()
        };
        Ok(presented_homology_at(&d_in, &d_out)?.invariants)
    }

    pub fn homology_all(&self) -> Result<Vec<Invariants>, KhError> {
        (0..=self.l).map(|k| self.homology(k)).collect()
    }
}

// ---------------------------------------------------------------------
// field-coefficient module homology with chain representatives

/// Incremental Gaussian eliminator: rows kept in echelon form.
struct Echelon<F: Field> {
    f: F,
    rows: Vec<Vec<<F as Field>::E>>,
    pivots: Vec<usize>,
}

impl<F: Field> Echelon<F> {
    fn new(f: &F) -> Self {
        Echelon { f: f.clone(), rows: vec![], pivots: vec![] }
    }

    /// Reduce `v` against the current rows; if a nonzero remainder is
    /// left, absorb it and return true (the vector was independent).
    fn insert(&mut self, v: &[<F as Field>::E]) -> bool {
        let f = self.f.clone();
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if !f.is_zero(&v[p]) {
                let factor = v[p].clone();
                for (a, b) in v.iter_mut().zip(row) {
                    let t = f.mul(&factor, b);
                    *a = f.sub(a, &t);
                }
            }
        }
        let Some(p) = v.iter().position(|e| !f.is_zero(e)) else { return false };
        let inv = f.inv(&v[p]);
        for e in v.iter_mut() {
            *e = f.mul(e, &inv);
        }
        self.rows.push(v);
        self.pivots.push(p);
        true
    }
}

/// Field homology of a complex of vector spaces with chain-level
/// representatives and the induced matrices of a family of chain
/// operators, per homological degree.
pub struct FieldModule<F: Field> {
    pub dims: BTreeMap<i64, usize>,
    /// Chain-level representatives of the homology basis, per degree.
    pub reps: BTreeMap<i64, Vec<Vec<<F as Field>::E>>>,
    /// actions[op][degree]: dims x dims matrix of the induced map.
    pub actions: Vec<BTreeMap<i64, FMat<F>>>,
}

pub fn field_module<F: Field>(
    f: &F,
    complex: &FreeChainComplex,
    ops: &[ChainOperator],
) -> Result<FieldModule<F>, KhError> {
    let degrees: Vec<i64> = complex.degrees().collect();
    let mut dims = BTreeMap::new();
    let mut reps: BTreeMap<i64, Vec<Vec<<F as Field>::E>>> = BTreeMap::new();
    let mut boundary_cols: BTreeMap<i64, Vec<Vec<<F as Field>::E>>> = BTreeMap::new();

    for &i in &degrees {
        let n = complex.rank(i);
        let d_out = field::fmat_from_int(f, &complex.diff(i));
        let d_in = field::fmat_from_int(f, &complex.diff(i - 1));
        let mut ech = Echelon::new(f);
        let mut bnd = vec![];
        for c in 0..d_in.first().map_or(0, |r| r.len()) {
            let col: Vec<_> = d_in.iter().map(|row| row[c].clone()).collect();
            if ech.insert(&col) {
                bnd.push(col);
            }
        }
        // a 0-row matrix loses its column count; the kernel is everything
        let cycles = if d_out.is_empty() {
            (0..n)
                .map(|j| {
                    let mut v = vec![f.zero(); n];
                    v[j] = f.one();
                    v
                })
                .collect()
        } else {
            field::kernel(f, &d_out)
        };
        let mut h = vec![];
        for v in cycles {
            debug_assert_eq!(v.len(), n);
            if ech.insert(&v) {
                h.push(v);
            }
        }
        dims.insert(i, h.len());
        reps.insert(i, h);
        boundary_cols.insert(i, bnd);
    }

    let mut actions = vec![];
    for op in ops {
        let mut per_degree = BTreeMap::new();
        for &i in &degrees {
            let hi = reps[&i].clone();
            if hi.is_empty() {
                per_degree.insert(i, field::fmat_zero(f, 0, 0));
                continue;
            }
            let n = complex.rank(i);
            let x = field::fmat_from_int(f, &op.mat(i, n));
            // columns: homology representatives first, then boundaries
            let cols: Vec<&Vec<<F as Field>::E>> = hi.iter().chain(boundary_cols[&i].iter()).collect();
            let system: FMat<F> =
                (0..n).map(|r| cols.iter().map(|c| c[r].clone()).collect()).collect();
            let mut mat = field::fmat_zero(f, hi.len(), hi.len());
            for (c, v) in hi.iter().enumerate() {
                let w = field::mat_vec(f, &x, v);
                let sol = field::solve(f, &system, &w).ok_or_else(|| {
                    KhError::Internal("induced field action does not preserve cycles mod boundaries".into())
                })?;
                for (r, row) in mat.iter_mut().enumerate() {
                    row[c] = sol[r].clone();
                }
            }
            per_degree.insert(i, mat);
        }
        actions.push(per_degree);
    }

    Ok(FieldModule { dims, reps, actions })
}

// ---------------------------------------------------------------------
// field Koszul homology dimensions

/// Koszul homology dimensions of a field module F^h with square-zero
/// commuting matrices `xs`, each scaled by `coeff` before use. Returns
/// one dimension per exterior degree 0..=l.
pub fn field_koszul_dims<F: Field>(f: &F, h: usize, xs: &[FMat<F>], coeff: i64) -> Vec<usize> {
    let l = xs.len();
    let c = f.from_int(&BigInt::from(coeff));
    let scaled: Vec<FMat<F>> = xs
        .iter()
        .map(|m| m.iter().map(|row| row.iter().map(|v| f.mul(&c, v)).collect()).collect())
        .collect();

    // d_k as a dense matrix per exterior degree
    let mut diff_mats = vec![];
    for k in 0..l {
        let subs = subsets(l, k);
        let positions: BTreeMap<u32, usize> =
            subsets(l, k + 1).iter().enumerate().map(|(p, &s)| (s, p)).collect();
        let rows = binomial(l, k + 1) * h;
        let cols = subs.len() * h;
        let mut m = field::fmat_zero(f, rows, cols);
        for (s_pos, &s) in subs.iter().enumerate() {
            for i in 0..l {
                if (s >> i) & 1 == 1 {
                    continue;
                }
                let sign = f.from_int(&BigInt::from(wedge_sign(s, i)));
                let t_pos = positions[&(s | (1 << i))];
                for r in 0..h {
                    for cc in 0..h {
                        let v = f.mul(&sign, &scaled[i][r][cc]);
                        m[t_pos * h + r][s_pos * h + cc] = v;
                    }
                }
            }
        }
        diff_mats.push(m);
    }

    (0..=l)
        .map(|k| {
            let dim_k = binomial(l, k) * h;
            let rank_out = if k < l { field::rank(f, &diff_mats[k]) } else { 0 };
            let rank_in = if k > 0 { field::rank(f, &diff_mats[k - 1]) } else { 0 };
            dim_k - rank_out - rank_in
        })
        .collect()
}

/// Koszul homology dimensions of a `FieldModule`, per
/// (exterior degree, base homological degree).
pub fn field_koszul_by_degree<F: Field>(
    f: &F,
    module: &FieldModule<F>,
    coeff: i64,
) -> BTreeMap<(usize, i64), usize> {
    let l = module.actions.len();
    let mut out = BTreeMap::new();
    for (&i, &h) in &module.dims {
        let xs: Vec<FMat<F>> = module.actions.iter().map(|a| a[&i].clone()).collect();
        let dims = field_koszul_dims(f, h, &xs, coeff);
        for (k, &d) in dims.iter().enumerate() {
            if d > 0 {
                out.insert((k, i), d);
            }
        }
    }
    let _ = l;
    out
}
