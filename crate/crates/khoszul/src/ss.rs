//! Spectral sequence of the exterior-degree filtration on the pointed
//! complex, over a field. The filtration is by subspaces spanned by
//! basis elements of exterior degree >= p, so every page is computed
//! from coordinate subspaces and kernels of submatrices.

use std::collections::BTreeMap;

use crate::error::KhError;
use crate::field::{self, FMat, Field};
use crate::koszul;
use crate::pointed::{PointedBuild, PointedComplex};

/// One page: dimensions per (filtration degree p, total degree t) and
/// the ranks of the page differential d_r: (p,t) -> (p+r, t+1).
#[derive(Clone, Debug)]
pub struct SpectralPage {
    pub r: usize,
    pub entries: BTreeMap<(usize, i64), usize>,
    pub d_ranks: BTreeMap<(usize, i64), usize>,
    pub is_final: bool,
}

impl SpectralPage {
    /// Sum of the entries in total degree t.
    pub fn column_total(&self, t: i64) -> usize {
        self.entries.iter().filter(|&(&(_, tt), _)| tt == t).map(|(_, &d)| d).sum()
    }

    pub fn total_dim(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn euler(&self) -> i64 {
        self.entries
            .iter()
            .map(|(&(_, t), &d)| if t.rem_euclid(2) == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }
}

/// Pages r = 1 ..= l+1; the last page has zero differentials and is the
/// abutment.
pub struct SpectralSequence {
    pub l: usize,
    pub pages: Vec<SpectralPage>,
}

impl SpectralSequence {
    pub fn page(&self, r: usize) -> &SpectralPage {
        assert!(r >= 1, "pages start at r = 1");
        let idx = (r - 1).min(self.pages.len() - 1);
        &self.pages[idx]
    }

    pub fn infinity(&self) -> &SpectralPage {
        self.pages.last().expect("at least one page")
    }
}

struct Cache<F: Field> {
    f: F,
    l: usize,
    /// Exterior degree per basis element, per total degree.
    exts: BTreeMap<i64, Vec<usize>>,
    /// The differential as a field matrix, per total degree.
    dmats: BTreeMap<i64, FMat<F>>,
    /// Memoized Z-subspace bases keyed by (source cutoff, target cutoff, t).
    z_memo: std::collections::HashMap<(usize, usize, i64), Vec<Vec<<F as Field>::E>>>,
}

impl<F: Field> Cache<F> {
    fn dim(&self, t: i64) -> usize {
        self.exts.get(&t).map_or(0, |v| v.len())
    }

    /// Basis of Z_r^{p,t} = F^p C^t  intersect  d^{-1}(F^{p+r} C^{t+1}),
    /// as vectors in the full C^t coordinates. `p` may run out of range;
    /// the filtration clamps to the whole space / zero.
    fn z(&mut self, r: usize, p: i64, t: i64) -> Vec<Vec<<F as Field>::E>> {
        let n = self.dim(t);
        if n == 0 {
            return vec![];
        }
        let src_cut = p.max(0) as usize; // keep coords with ext >= src_cut
        let tgt_cut = (p + r as i64).max(0) as usize; // require d v in ext >= tgt_cut
        let key = (src_cut, tgt_cut, t);
        if let Some(v) = self.z_memo.get(&key) {
            return v.clone();
        }
        let f = self.f.clone();
        let exts = &self.exts[&t];
        let cols: Vec<usize> = (0..n).filter(|&j| exts[j] >= src_cut).collect();
        let bad_rows: Vec<usize> = match self.exts.get(&(t + 1)) {
            Some(te) => (0..te.len()).filter(|&i| te[i] < tgt_cut).collect(),
            None => vec![],
        };
        let sub: FMat<F> = bad_rows
            .iter()
            .map(|&i| cols.iter().map(|&j| self.dmats[&t][i][j].clone()).collect())
            .collect();
        let ker = if sub.is_empty() {
            // no constraints: every coordinate vector qualifies
            (0..cols.len())
                .map(|j| {
                    let mut v = vec![f.zero(); cols.len()];
                    v[j] = f.one();
                    v
                })
                .collect()
        } else {
            field::kernel(&f, &sub)
        };
        let out: Vec<Vec<<F as Field>::E>> = ker
            .into_iter()
            .map(|kv| {
                let mut v = vec![f.zero(); n];
                for (slot, &j) in cols.iter().enumerate() {
                    v[j] = kv[slot].clone();
                }
                v
            })
            .collect();
        self.z_memo.insert(key, out.clone());
        out
    }

    fn apply_d(&self, t: i64, vecs: &[Vec<<F as Field>::E>]) -> Vec<Vec<<F as Field>::E>> {
        if self.dim(t + 1) == 0 {
            return vec![];
        }
        let Some(m) = self.dmats.get(&t) else { return vec![] };
        vecs.iter().map(|v| field::mat_vec(&self.f, m, v)).collect()
    }

    /// The subspace divided out of Z_r^{p,t} on page r:
    /// Z_{r-1}^{p+1,t} + d Z_{r-1}^{p-r+1, t-1}.
    fn denominator(&mut self, r: usize, p: i64, t: i64) -> Vec<Vec<<F as Field>::E>> {
        let mut vecs = self.z(r - 1, p + 1, t);
        let pre = self.z(r - 1, p - r as i64 + 1, t - 1);
        vecs.extend(self.apply_d(t - 1, &pre));
        vecs
    }
}

/// Compute all pages of the filtration spectral sequence over `f`.
pub fn filtration_ss<F: Field>(f: &F, pc: &PointedComplex) -> Result<SpectralSequence, KhError> {
    let l = pc.marking_count;
    let degrees: Vec<i64> = pc.complex.degrees().collect();
    let mut exts = BTreeMap::new();
    let mut dmats = BTreeMap::new();
    for &t in &degrees {
        exts.insert(t, pc.ext_degrees(t));
        dmats.insert(t, field::fmat_from_int(f, &pc.complex.diff(t)));
    }
    let mut cache = Cache { f: f.clone(), l, exts, dmats, z_memo: Default::default() };

    let r_max = l + 1;
    let mut pages = vec![];
    for r in 1..=r_max {
        let mut entries = BTreeMap::new();
        let mut d_ranks = BTreeMap::new();
        for &t in &degrees {
            for p in 0..=l {
                let zi = cache.z(r, p as i64, t);
                let den = cache.denominator(r, p as i64, t);
                let dim_z = field::dim_span(f, &zi);
                let dim_den = field::dim_span(f, &den);
                let dim = dim_z - dim_den;
                if dim > 0 {
                    entries.insert((p, t), dim);
                }
                if r < r_max {
                    // rank of d_r out of (p,t), measured in the target page
                    let dz = cache.apply_d(t, &zi);
                    if !dz.is_empty() {
                        let tgt_den = cache.denominator(r, p as i64 + r as i64, t + 1);
                        let base = field::dim_span(f, &tgt_den);
                        let mut all = tgt_den;
                        all.extend(dz);
                        let rank = field::dim_span(f, &all) - base;
                        if rank > 0 {
                            d_ranks.insert((p, t), rank);
                        }
                    }
                }
            }
        }
        pages.push(SpectralPage { r, entries, d_ranks, is_final: r == r_max });
    }
    let _ = cache.l;
    Ok(SpectralSequence { l, pages })
}

// ---------------------------------------------------------------------
// convergence verification

#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct Convergence {
    pub checks: Vec<Check>,
}

impl Convergence {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

fn diff_maps<K: Ord + std::fmt::Debug>(
    expected: &BTreeMap<K, usize>,
    actual: &BTreeMap<K, usize>,
) -> String {
    let mut notes = vec![];
    for (k, &e) in expected {
        let a = actual.get(k).copied().unwrap_or(0);
        if a != e {
            notes.push(format!("{k:?}: expected {e}, got {a}"));
        }
    }
    for (k, &a) in actual {
        if !expected.contains_key(k) {
            notes.push(format!("{k:?}: expected 0, got {a}"));
        }
    }
    notes.join("; ")
}

/// Cross-check the computed pages against independent recomputations:
/// E_1 against the field homology of the base tensored with the exterior
/// algebra, E_2 against the Koszul homology of the induced module, and
/// the final page against the field homology of the total complex.
pub fn verify_convergence<F: Field>(
    f: &F,
    build: &PointedBuild,
    ss: &SpectralSequence,
) -> Result<Convergence, KhError> {
    let l = ss.l;
    let pc = &build.pointed;
    let mut checks = vec![];

    // E_1^{p,t} = Lambda^p (x) H^{t-p}(base)
    let base_h: BTreeMap<i64, usize> = build
        .base
        .complex
        .degrees()
        .map(|i| (i, build.base.complex.homology_dim_field(f, i)))
        .collect();
    let mut e1_expected: BTreeMap<(usize, i64), usize> = BTreeMap::new();
    for (&i, &h) in &base_h {
        for p in 0..=l {
            let d = koszul::binomial(l, p) * h;
            if d > 0 {
                e1_expected.insert((p, i + p as i64), d);
            }
        }
    }
    let e1 = &ss.page(1).entries;
    let detail = diff_maps(&e1_expected, e1);
    checks.push(Check {
        name: "page-1 matches base homology".into(),
        ok: detail.is_empty(),
        detail,
    });

    // E_2^{p,t} = Koszul homology of the induced module at (p, t-p)
    let module = koszul::field_module(f, &build.base.complex, &build.ops)?;
    let kdims = koszul::field_koszul_by_degree(f, &module, pc.variant.coeff());
    let e2_expected: BTreeMap<(usize, i64), usize> =
        kdims.iter().map(|(&(p, i), &d)| ((p, i + p as i64), d)).collect();
    let e2 = &ss.page(2).entries;
    let detail = diff_maps(&e2_expected, e2);
    checks.push(Check {
        name: "page-2 matches Koszul homology of the induced module".into(),
        ok: detail.is_empty(),
        detail,
    });

    // final page column totals = field homology of the total complex
    let mut abut_detail = vec![];
    for t in pc.complex.degrees().collect::<Vec<_>>() {
        let expected = pc.complex.homology_dim_field(f, t);
        let actual = ss.infinity().column_total(t);
        if expected != actual {
            abut_detail.push(format!("t = {t}: expected {expected}, got {actual}"));
        }
    }
    checks.push(Check {
        name: "final page abuts to the homology of the total complex".into(),
        ok: abut_detail.is_empty(),
        detail: abut_detail.join("; "),
    });

    // dimensions never grow from page to page
    let mut mono_detail = vec![];
    for w in ss.pages.windows(2) {
        for (k, &d) in &w[1].entries {
            let prev = w[0].entries.get(k).copied().unwrap_or(0);
            if d > prev {
                mono_detail.push(format!("page {} -> {} at {k:?}: {prev} -> {d}", w[0].r, w[1].r));
            }
        }
    }
    checks.push(Check {
        name: "page dimensions are non-increasing".into(),
        ok: mono_detail.is_empty(),
        detail: mono_detail.join("; "),
    });

    // alternating sum over t is the same on every page
    let eulers: Vec<i64> = ss.pages.iter().map(|p| p.euler()).collect();
    let euler_ok = eulers.windows(2).all(|w| w[0] == w[1]);
    checks.push(Check {
        name: "Euler characteristic is constant across pages".into(),
        ok: euler_ok,
        detail: if euler_ok { String::new() } else { format!("{eulers:?}") },
    });

    // each page drop is accounted for by the recorded differential ranks
    let mut rank_detail = vec![];
    for w in ss.pages.windows(2) {
        let pg = &w[0];
        let keys: std::collections::BTreeSet<(usize, i64)> =
            pg.entries.keys().chain(w[1].entries.keys()).copied().collect();
        for k in keys {
            let (p, t) = k;
            let cur = pg.entries.get(&k).copied().unwrap_or(0);
            let next = w[1].entries.get(&k).copied().unwrap_or(0);
            let out = pg.d_ranks.get(&k).copied().unwrap_or(0);
            let inc = if p >= pg.r {
                pg.d_ranks.get(&(p - pg.r, t - 1)).copied().unwrap_or(0)
            } else {
                0
            };
            if cur != next + out + inc {
                rank_detail.push(format!(
                    "{k:?}: page {} dim {cur} != {next} + out {out} + in {inc}",
                    pg.r
                ));
            }
        }
    }
    checks.push(Check {
        name: "page drops equal differential ranks".into(),
        ok: rank_detail.is_empty(),
        detail: rank_detail.join("; "),
    });

    Ok(Convergence { checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};
    use crate::link::LinkDiagram;
    use crate::pointed::{build_pointed, Variant};

    fn marked_unknot() -> LinkDiagram {
        LinkDiagram::parse_pd(r#"{"pd": [], "free_loops": 1, "markings": [{"arc": 1, "offset": 0}]}"#)
            .unwrap()
    }

    #[test]
    fn unknot_standard_collapses_to_rank_two() {
        let d = marked_unknot();
        let b = build_pointed(&d, Variant::Standard).unwrap();
        let q = Rationals;
        let ss = filtration_ss(&q, &b.pointed).unwrap();
        // E_1: base homology Q^2 at t=0 wedge nothing/one marking
        assert_eq!(ss.page(1).total_dim(), 4);
        // X is injective on v+, so one cancellation happens at page 1
        assert_eq!(ss.infinity().total_dim(), 2);
        assert_eq!(ss.infinity().column_total(0), 1);
        assert_eq!(ss.infinity().column_total(1), 1);
        let conv = verify_convergence(&q, &b, &ss).unwrap();
        assert!(conv.ok(), "{:?}", conv.checks);
    }

    #[test]
    fn unknot_doubled_over_f2_never_cancels() {
        let d = marked_unknot();
        let b = build_pointed(&d, Variant::Doubled).unwrap();
        let f2 = PrimeField(2);
        let ss = filtration_ss(&f2, &b.pointed).unwrap();
        // the doubled differential vanishes mod 2
        assert_eq!(ss.page(1).total_dim(), 4);
        assert_eq!(ss.infinity().total_dim(), 4);
        let conv = verify_convergence(&f2, &b, &ss).unwrap();
        assert!(conv.ok(), "{:?}", conv.checks);
    }

    #[test]
    fn unknot_doubled_over_q_collapses() {
        let d = marked_unknot();
        let b = build_pointed(&d, Variant::Doubled).unwrap();
        let q = Rationals;
        let ss = filtration_ss(&q, &b.pointed).unwrap();
        assert_eq!(ss.infinity().total_dim(), 2);
        let conv = verify_convergence(&q, &b, &ss).unwrap();
        assert!(conv.ok(), "{:?}", conv.checks);
    }

    #[test]
    fn no_markings_single_page() {
        let d = LinkDiagram::parse_pd(r#"{"pd": [], "free_loops": 1}"#).unwrap();
        let b = build_pointed(&d, Variant::Standard).unwrap();
        let q = Rationals;
        let ss = filtration_ss(&q, &b.pointed).unwrap();
        assert_eq!(ss.pages.len(), 1);
        assert!(ss.infinity().is_final);
        assert_eq!(ss.infinity().total_dim(), 2);
        let conv = verify_convergence(&q, &b, &ss).unwrap();
        assert!(conv.ok(), "{:?}", conv.checks);
    }
}
