//! The cube of resolutions: chain groups V^{tensor circles} per vertex,
//! merge/split edge maps with the standard sign rule, gradings, homology,
//! basepoint chain operators and their induced module action.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::complex::{FreeChainComplex, GradedComplex};
use crate::error::KhError;
use crate::field::{self, Field};
use crate::group::{CanonicalGroup, GroupMorphism, Invariants, PresentedGroup};
use crate::link::{LinkDiagram, ResolvedState};
use crate::matrix::IntMatrix;
use crate::snf;

/// One basis element of the cube: a resolution vertex and a labeling of
/// its circles. Bit i of `labeling` (counted so that circle 0 is the most
/// significant of the k bits) marks v_minus on circle i; circles are
/// ordered by smallest arc label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisElem {
    pub mask: u64,
    pub labeling: u32,
}

#[derive(Clone, Debug)]
pub struct KhovanovCube {
    pub diagram: LinkDiagram,
    pub n_plus: usize,
    pub n_minus: usize,
    /// Resolved state per vertex mask.
    pub states: Vec<ResolvedState>,
    /// Global chain basis per homological degree.
    pub basis: BTreeMap<i64, Vec<BasisElem>>,
    index: HashMap<BasisElem, usize>,
    pub graded: GradedComplex,
}

fn minus_bit(labeling: u32, circle: usize, k: usize) -> bool {
    (labeling >> (k - 1 - circle)) & 1 == 1
}

fn set_minus(labeling: u32, circle: usize, k: usize) -> u32 {
    labeling | (1 << (k - 1 - circle))
}

impl KhovanovCube {
    pub fn build(diagram: &LinkDiagram) -> Result<KhovanovCube, KhError> {
        let n = diagram.crossing_count();
        if n > 20 {
            return Err(KhError::Validation(format!(
                "diagram has {n} crossings; this exact cube is limited to 20"
            )));
        }
        let n_plus = diagram.n_plus();
        let n_minus = diagram.n_minus();

        let mut states = Vec::with_capacity(1 << n);
        for mask in 0u64..(1 << n) {
            let v: Vec<u8> = (0..n).map(|c| ((mask >> c) & 1) as u8).collect();
            states.push(diagram.resolve(&v)?);
        }

        // basis enumeration: vertices ascending by mask, labelings ascending
        let mut basis: BTreeMap<i64, Vec<BasisElem>> = BTreeMap::new();
        for (mask, st) in states.iter().enumerate() {
            let i = (mask as u64).count_ones() as i64 - n_minus as i64;
            let k = st.circles.len();
            let entry = basis.entry(i).or_default();
            for labeling in 0..(1u32 << k) {
                entry.push(BasisElem { mask: mask as u64, labeling });
            }
        }
        let mut index = HashMap::new();
        for elems in basis.values() {
            for (idx, &e) in elems.iter().enumerate() {
                index.insert(e, idx);
            }
        }

        // differential
        let mut diffs: BTreeMap<i64, IntMatrix> = BTreeMap::new();
        for (&i, elems) in &basis {
            let next = basis.get(&(i + 1)).map_or(0, |v| v.len());
            let mut d = IntMatrix::zero(next, elems.len());
            for (col, &e) in elems.iter().enumerate() {
                let st = &states[e.mask as usize];
                let k = st.circles.len();
                for c in 0..n {
                    if (e.mask >> c) & 1 == 1 {
                        continue;
                    }
                    let sign = if (e.mask & ((1 << c) - 1)).count_ones() % 2 == 0 {
                        BigInt::from(1)
                    } else {
                        BigInt::from(-1)
                    };
                    let mask2 = e.mask | (1 << c);
                    let st2 = &states[mask2 as usize];
                    let k2 = st2.circles.len();
                    let [a, b, cc, _dd] = diagram.crossings()[c].slots;
                    let c1 = st.circle_of_arc[&a];
                    let c2 = st.circle_of_arc[&cc];

                    // carry over the labels of untouched circles
                    let carry = |skip: &[usize], extra: &[(usize, bool)]| -> u32 {
                        let mut lab2 = 0u32;
                        for ci in 0..k {
                            if skip.contains(&ci) {
                                continue;
                            }
                            if minus_bit(e.labeling, ci, k) {
                                let tgt = st2.circle_of_arc[&st.circles[ci][0]];
                                lab2 = set_minus(lab2, tgt, k2);
                            }
                        }
                        for &(tgt, minus) in extra {
                            if minus {
                                lab2 = set_minus(lab2, tgt, k2);
                            }
                        }
                        lab2
                    };

                    if c1 != c2 {
                        // merge
                        debug_assert_eq!(k2, k - 1);
                        let tgt = st2.circle_of_arc[&a];
                        let m1 = minus_bit(e.labeling, c1, k);
                        let m2 = minus_bit(e.labeling, c2, k);
                        if m1 && m2 {
                            continue; // v- . v- = 0
                        }
                        let lab2 = carry(&[c1, c2], &[(tgt, m1 || m2)]);
                        let row = index[&BasisElem { mask: mask2, labeling: lab2 }];
                        d.add_to(row, col, &sign);
                    } else {
                        // split
                        debug_assert_eq!(k2, k + 1);
                        let t1 = st2.circle_of_arc[&a];
                        let t2 = st2.circle_of_arc[&b];
                        debug_assert_ne!(t1, t2);
                        if minus_bit(e.labeling, c1, k) {
                            let lab2 = carry(&[c1], &[(t1, true), (t2, true)]);
                            let row = index[&BasisElem { mask: mask2, labeling: lab2 }];
                            d.add_to(row, col, &sign);
                        } else {
                            for (ma, mb) in [(true, false), (false, true)] {
                                let lab2 = carry(&[c1], &[(t1, ma), (t2, mb)]);
                                let row = index[&BasisElem { mask: mask2, labeling: lab2 }];
                                d.add_to(row, col, &sign);
                            }
                        }
                    }
                }
            }
            diffs.insert(i, d);
        }

        let ranks: BTreeMap<i64, usize> = basis.iter().map(|(&i, v)| (i, v.len())).collect();
        let complex = FreeChainComplex::new(ranks, diffs)?;

        // quantum grading: j = (#v+) - (#v-) + |v| + n+ - 2 n-
        let mut qdeg: BTreeMap<i64, Vec<i64>> = BTreeMap::new();
        for (&i, elems) in &basis {
            let qs = elems
                .iter()
                .map(|e| {
                    let st = &states[e.mask as usize];
                    let k = st.circles.len() as i64;
                    let minus = e.labeling.count_ones() as i64;
                    let weight = (e.mask).count_ones() as i64;
                    (k - 2 * minus) + weight + n_plus as i64 - 2 * n_minus as i64
                })
                .collect();
            qdeg.insert(i, qs);
        }

        let graded = GradedComplex::new(complex, qdeg)?;
        Ok(KhovanovCube {
            diagram: diagram.clone(),
            n_plus,
            n_minus,
            states,
            basis,
            index,
            graded,
        })
    }

    pub fn index_of(&self, e: &BasisElem) -> usize {
        self.index[e]
    }

    pub fn degree_of_mask(&self, mask: u64) -> i64 {
        mask.count_ones() as i64 - self.n_minus as i64
    }

    /// Graded Euler characteristic as coefficient map j -> sum (-1)^i.
    pub fn graded_euler(&self) -> BTreeMap<i64, i64> {
        let mut out = BTreeMap::new();
        for (&i, qs) in &self.graded.qdeg {
            for &j in qs {
                *out.entry(j).or_insert(0) += if i.rem_euclid(2) == 0 { 1 } else { -1 };
            }
        }
        out.retain(|_, v| *v != 0);
        out
    }
}

/// A degree-preserving chain operator given by one matrix per degree.
#[derive(Clone, Debug)]
pub struct ChainOperator {
    pub mats: BTreeMap<i64, IntMatrix>,
}

impl ChainOperator {
    pub fn mat(&self, i: i64, dim: usize) -> IntMatrix {
        self.mats.get(&i).cloned().unwrap_or_else(|| IntMatrix::zero(dim, dim))
    }
}

/// The basepoint chain operator X_p: v+ -> v- on the circle through the
/// marking, zero on v-, identity on the other tensor factors.
#[derive(Clone, Debug)]
pub struct BasepointOperator {
    pub marking: usize,
    pub op: ChainOperator,
}

pub fn basepoint_operator(cube: &KhovanovCube, marking_index: usize) -> Result<BasepointOperator, KhError> {
    if marking_index >= cube.diagram.markings().len() {
        return Err(KhError::Validation(format!(
            "marking index {marking_index} out of range ({} markings)",
            cube.diagram.markings().len()
        )));
    }
    let op = circle_operator(cube, |st| st.circle_of_marking[marking_index])?;
    Ok(BasepointOperator { marking: marking_index, op })
}

/// Same operator for the distinguished basepoint.
pub fn basepoint_operator_at_basepoint(cube: &KhovanovCube) -> Result<BasepointOperator, KhError> {
    if cube.diagram.basepoint().is_none() {
        return Err(KhError::Validation("diagram has no basepoint".into()));
    }
    let op = circle_operator(cube, |st| st.circle_of_basepoint.expect("basepoint circle"))?;
    Ok(BasepointOperator { marking: usize::MAX, op })
}

fn circle_operator(
    cube: &KhovanovCube,
    circle_at: impl Fn(&ResolvedState) -> usize,
) -> Result<ChainOperator, KhError> {
    let mut mats = BTreeMap::new();
    for (&i, elems) in &cube.basis {
        let mut m = IntMatrix::zero(elems.len(), elems.len());
        for (col, &e) in elems.iter().enumerate() {
            let st = &cube.states[e.mask as usize];
            let k = st.circles.len();
            let target_circle = circle_at(st);
            if !minus_bit(e.labeling, target_circle, k) {
                let lab2 = set_minus(e.labeling, target_circle, k);
                let row = cube.index_of(&BasisElem { mask: e.mask, labeling: lab2 });
                m.set(row, col, BigInt::from(1));
            }
        }
        mats.insert(i, m);
    }
    let op = ChainOperator { mats };
    check_chain_operator(&cube.graded.complex, &op)?;
    Ok(op)
}

/// Chain-map and square-zero invariants.
pub fn check_chain_operator(complex: &FreeChainComplex, op: &ChainOperator) -> Result<(), KhError> {
    for i in complex.degrees().collect::<Vec<_>>() {
        let xi = op.mat(i, complex.rank(i));
        let xi1 = op.mat(i + 1, complex.rank(i + 1));
        let d = complex.diff(i);
        if d.mul(&xi) != xi1.mul(&d) {
            return Err(KhError::Internal(format!(
                "operator does not commute with the differential at degree {i}"
            )));
        }
        if !xi.mul(&xi).is_zero() {
            return Err(KhError::Internal(format!("operator does not square to zero at degree {i}")));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// homology

/// Integral homology split by bidegree, with chain lifts of the
/// canonical generators in global chain coordinates.
#[derive(Clone, Debug)]
pub struct IntegralHomology {
    pub groups: BTreeMap<(i64, i64), CanonicalGroup>,
    pub lifts: BTreeMap<(i64, i64), IntMatrix>,
}

impl IntegralHomology {
    pub fn total_free_rank(&self) -> usize {
        self.groups.values().map(|g| g.invariants.free_rank).sum()
    }

    pub fn torsion_divisors(&self) -> Vec<BigInt> {
        let mut out: Vec<BigInt> = self
            .groups
            .values()
            .flat_map(|g| g.invariants.torsion.iter().cloned())
            .collect();
        out.sort();
        out
    }
}

pub fn homology_integral(g: &GradedComplex) -> Result<IntegralHomology, KhError> {
    let mut groups = BTreeMap::new();
    let mut lifts = BTreeMap::new();
    for (i, j) in g.bidegrees() {
        let cols = g.block(i, j);
        let d_out = g.diff_block(i, j);
        let d_in = g.diff_block(i - 1, j);
        let (h, lift_block) = crate::group::homology_at(&d_in, &d_out)?;
        if h.invariants.is_trivial() {
            continue;
        }
        // scatter the block lift into global degree-i coordinates
        let mut lift = IntMatrix::zero(g.complex.rank(i), lift_block.cols());
        for (r, c, v) in lift_block.entries() {
            lift.set(cols[r], c, v.clone());
        }
        groups.insert((i, j), h);
        lifts.insert((i, j), lift);
    }
    Ok(IntegralHomology { groups, lifts })
}

/// Field homology dimensions per bidegree.
pub fn homology_field<F: Field>(g: &GradedComplex, f: &F) -> BTreeMap<(i64, i64), usize> {
    let mut out = BTreeMap::new();
    for (i, j) in g.bidegrees() {
        let d_out = field::fmat_from_int(f, &g.diff_block(i, j));
        let d_in = field::fmat_from_int(f, &g.diff_block(i - 1, j));
        let dim = g.block(i, j).len() - field::rank(f, &d_out) - field::rank(f, &d_in);
        if dim > 0 {
            out.insert((i, j), dim);
        }
    }
    out
}

// ---------------------------------------------------------------------
// induced module action on homology

/// Integral homology of the whole complex assembled into one presented
/// group, with the induced endomorphism of each chain operator.
#[derive(Clone, Debug)]
pub struct HomologyModule {
    pub bidegrees: Vec<(i64, i64)>,
    pub offsets: Vec<usize>,
    pub total: PresentedGroup,
    pub endos: Vec<GroupMorphism>,
}

impl HomologyModule {
    pub fn total_invariants(&self) -> Invariants {
        self.total.invariants()
    }
}

/// For each homology generator, apply the operator to its chain lift and
/// re-express the result in the target generators modulo boundaries.
pub fn induced_action(
    g: &GradedComplex,
    h: &IntegralHomology,
    op: &ChainOperator,
) -> Result<BTreeMap<(i64, i64), IntMatrix>, KhError> {
    let mut out = BTreeMap::new();
    for (&(i, j), lift) in h.lifts.iter() {
        let x = op.mat(i, g.complex.rank(i));
        let image = x.mul(lift); // cycles in global degree-i coords, quantum j-2
        let target_key = (i, j - 2);
        let tgt_cols = g.block(i, j - 2);
        // the image must be supported on the target block
        let tgt_set: std::collections::HashSet<usize> = tgt_cols.iter().copied().collect();
        for (r, _, v) in image.entries() {
            if !v.is_zero() && !tgt_set.contains(&r) {
                return Err(KhError::Internal(
                    "induced action leaves the expected quantum degree".into(),
                ));
            }
        }
        let image_block = image.select_rows(&tgt_cols);
        let boundaries = g.diff_block(i - 1, j - 2);
        let (tgt_gens, tgt_lift_block) = match h.groups.get(&target_key) {
            Some(tg) => {
                // lift back from global coordinates to the block
                let tl = h.lifts[&target_key].select_rows(&tgt_cols);
                (tg.orders.len(), tl)
            }
            None => (0, IntMatrix::zero(tgt_cols.len(), 0)),
        };
        let system = tgt_lift_block.hstack(&boundaries);
        let sol = snf::solve(&system, &image_block).ok_or_else(|| {
            KhError::Internal("chain lift of induced action failed (sign bug?)".into())
        })?;
        let coeffs = sol.select_rows(&(0..tgt_gens).collect::<Vec<_>>());
        out.insert((i, j), coeffs);
    }
    Ok(out)
}

/// Assemble the bidegree-wise homology into one presented group and the
/// chain operators into endomorphisms of it.
pub fn homology_module(
    g: &GradedComplex,
    h: &IntegralHomology,
    ops: &[ChainOperator],
) -> Result<HomologyModule, KhError> {
    let bidegrees: Vec<(i64, i64)> = h.groups.keys().copied().collect();
    let mut offsets = vec![];
    let mut total_gens = 0;
    for key in &bidegrees {
        offsets.push(total_gens);
        total_gens += h.groups[key].orders.len();
    }
    let mut rel_cols = vec![];
    for (key, &off) in bidegrees.iter().zip(&offsets) {
        for (gi, ord) in h.groups[key].orders.iter().enumerate() {
            if !ord.is_zero() {
                rel_cols.push((off + gi, ord.clone()));
            }
        }
    }
    let mut rels = IntMatrix::zero(total_gens, rel_cols.len());
    for (c, (r, ord)) in rel_cols.into_iter().enumerate() {
        rels.set(r, c, ord);
    }
    let total = PresentedGroup { gens: total_gens, rels };

    let mut endos = vec![];
    for op in ops {
        let blocks = induced_action(g, h, op)?;
        let mut m = IntMatrix::zero(total_gens, total_gens);
        for (&(i, j), block) in &blocks {
            let src_pos = bidegrees.iter().position(|&k| k == (i, j)).unwrap();
            let src_off = offsets[src_pos];
            if block.cols() == 0 || block.rows() == 0 {
                continue;
            }
            let tgt_pos = bidegrees.iter().position(|&k| k == (i, j - 2));
            let Some(tgt_pos) = tgt_pos else { continue };
            let tgt_off = offsets[tgt_pos];
            for (r, c, v) in block.entries() {
                m.set(tgt_off + r, src_off + c, v.clone());
            }
        }
        let endo = GroupMorphism::new(total.clone(), total.clone(), m)?;
        endos.push(endo);
    }

    // induced operators commute pairwise and square to zero
    for (a, ea) in endos.iter().enumerate() {
        if !ea.compose(ea).is_zero_mod_rels() {
            return Err(KhError::Internal(format!("induced operator {a} does not square to zero")));
        }
        for eb in &endos[a + 1..] {
            let comm = ea.compose(eb).sub(&eb.compose(ea));
            if !comm.is_zero_mod_rels() {
                return Err(KhError::Internal(format!(
                    "induced operators do not commute (pair involving {a})"
                )));
            }
        }
    }

    Ok(HomologyModule { bidegrees, offsets, total, endos })
}

// ---------------------------------------------------------------------
// reduced subcomplex

/// The subcomplex spanned by labelings putting v- on the basepoint
/// circle, together with the restrictions of the given operators.
pub struct ReducedComplex {
    pub graded: GradedComplex,
    /// Per degree, the global cube indices of the kept basis elements.
    pub kept: BTreeMap<i64, Vec<usize>>,
}

pub fn reduced_complex(cube: &KhovanovCube) -> Result<ReducedComplex, KhError> {
    if cube.diagram.basepoint().is_none() {
        return Err(KhError::Validation("reduced complex needs a basepoint".into()));
    }
    let mut kept: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (&i, elems) in &cube.basis {
        let sel = elems
            .iter()
            .enumerate()
            .filter_map(|(idx, e)| {
                let st = &cube.states[e.mask as usize];
                let k = st.circles.len();
                let cb = st.circle_of_basepoint.expect("basepoint circle");
                minus_bit(e.labeling, cb, k).then_some(idx)
            })
            .collect();
        kept.insert(i, sel);
    }
    let graded = restrict(&cube.graded, &kept)?;
    Ok(ReducedComplex { graded, kept })
}

/// Restrict a graded complex to a subcomplex given by kept indices; the
/// differential must not leave the span (checked).
pub fn restrict(g: &GradedComplex, kept: &BTreeMap<i64, Vec<usize>>) -> Result<GradedComplex, KhError> {
    let mut ranks = BTreeMap::new();
    let mut diffs = BTreeMap::new();
    let mut qdeg = BTreeMap::new();
    for (&i, sel) in kept {
        ranks.insert(i, sel.len());
        qdeg.insert(i, sel.iter().map(|&idx| g.qdeg[&i][idx]).collect::<Vec<_>>());
    }
    for (&i, sel) in kept {
        let d = g.complex.diff(i);
        let sub_cols = d.select_columns(sel);
        let next: &[usize] = kept.get(&(i + 1)).map(|v| v.as_slice()).unwrap_or(&[]);
        let next_set: std::collections::HashSet<usize> = next.iter().copied().collect();
        for (r, _, v) in sub_cols.entries() {
            if !v.is_zero() && !next_set.contains(&r) {
                return Err(KhError::Internal(
                    "differential does not restrict to the subcomplex".into(),
                ));
            }
        }
        diffs.insert(i, sub_cols.select_rows(next));
    }
    let complex = FreeChainComplex::new(ranks, diffs)?;
    GradedComplex::new(complex, qdeg)
}

/// Restrict a degree-preserving chain operator to the subcomplex.
pub fn restrict_operator(
    g: &GradedComplex,
    kept: &BTreeMap<i64, Vec<usize>>,
    op: &ChainOperator,
) -> Result<ChainOperator, KhError> {
    let mut mats = BTreeMap::new();
    for (&i, sel) in kept {
        let m = op.mat(i, g.complex.rank(i));
        let sub = m.select_columns(sel);
        let set: std::collections::HashSet<usize> = sel.iter().copied().collect();
        for (r, _, v) in sub.entries() {
            if !v.is_zero() && !set.contains(&r) {
                return Err(KhError::Internal("operator does not restrict to the subcomplex".into()));
            }
        }
        mats.insert(i, sub.select_rows(sel));
    }
    Ok(ChainOperator { mats })
}
