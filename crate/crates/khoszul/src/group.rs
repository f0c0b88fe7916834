//! Finitely generated abelian groups given by generators and integer
//! relations, morphisms between them, and homology of (co)chain
//! complexes of such groups.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::KhError;
use crate::matrix::IntMatrix;
use crate::snf::{self, SmithDecomposition};

/// Coefficient choices understood by the structure reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coefficients {
    Integers,
    Rationals,
    PrimeField(u64),
    /// Z[1/2]: odd torsion becomes invertible, 2-power torsion survives.
    LocalAwayTwo,
}

impl Coefficients {
    pub fn parse(s: &str) -> Result<Self, KhError> {
        match s {
            "Z" => Ok(Coefficients::Integers),
            "Q" => Ok(Coefficients::Rationals),
            "F2" => Ok(Coefficients::PrimeField(2)),
            "F3" => Ok(Coefficients::PrimeField(3)),
            "F5" => Ok(Coefficients::PrimeField(5)),
            "Zhalf" => Ok(Coefficients::LocalAwayTwo),
            other => Err(KhError::Parse(format!(
                "unknown coefficient ring `{other}` (expected Z, Q, F2, F3, F5, Zhalf)"
            ))),
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(self, Coefficients::Rationals | Coefficients::PrimeField(_))
    }
}

/// A f.g. abelian group presented by `gens` generators and the columns
/// of `rels` as relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresentedGroup {
    pub gens: usize,
    pub rels: IntMatrix,
}

/// Canonical structure data: Z^free_rank + sum of Z/d_i with the d_i a
/// divisor chain, ascending, each >= 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Invariants {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl Invariants {
    pub fn trivial() -> Self {
        Invariants { free_rank: 0, torsion: vec![] }
    }

    pub fn free(rank: usize) -> Self {
        Invariants { free_rank: rank, torsion: vec![] }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Minimal number of generators of the canonical form.
    pub fn min_gens(&self) -> usize {
        self.free_rank + self.torsion.len()
    }

    pub fn display(&self) -> String {
        let mut parts = vec![];
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

impl PresentedGroup {
    pub fn free(n: usize) -> Self {
        PresentedGroup { gens: n, rels: IntMatrix::zero(n, 0) }
    }

    pub fn trivial() -> Self {
        PresentedGroup::free(0)
    }

    /// Canonical form directly from a structure description. Torsion
    /// generators come first, free generators after.
    pub fn from_invariants(inv: &Invariants) -> Self {
        let gens = inv.min_gens();
        let mut rels = IntMatrix::zero(gens, inv.torsion.len());
        for (j, t) in inv.torsion.iter().enumerate() {
            rels.set(j, j, t.clone());
        }
        PresentedGroup { gens, rels }
    }

    pub fn invariants(&self) -> Invariants {
        assert_eq!(self.rels.rows(), self.gens, "relation matrix shape");
        let dec = snf::snf(&self.rels);
        let mut torsion = vec![];
        for d in &dec.diag {
            if *d > BigInt::one() {
                torsion.push(d.clone());
            }
        }
        Invariants { free_rank: self.gens - dec.rank(), torsion }
    }

    pub fn is_trivial(&self) -> bool {
        self.invariants().is_trivial()
    }
}

/// A homology group in canonical form together with the orders of its
/// generators: torsion generators first (order = divisor), then free
/// generators (order = 0).
#[derive(Clone, Debug)]
pub struct CanonicalGroup {
    pub invariants: Invariants,
    /// Order per canonical generator; length = invariants.min_gens().
    pub orders: Vec<BigInt>,
}

impl CanonicalGroup {
    pub fn trivial() -> Self {
        CanonicalGroup { invariants: Invariants::trivial(), orders: vec![] }
    }

    pub fn group(&self) -> PresentedGroup {
        PresentedGroup::from_invariants(&self.invariants)
    }

    fn from_orders(orders: Vec<BigInt>) -> Self {
        let torsion: Vec<BigInt> = orders.iter().filter(|o| **o > BigInt::one()).cloned().collect();
        let free_rank = orders.iter().filter(|o| o.is_zero()).count();
        CanonicalGroup { invariants: Invariants { free_rank, torsion }, orders }
    }
}

/// Morphism of presented groups, as a matrix on generators.
#[derive(Clone, Debug)]
pub struct GroupMorphism {
    pub source: PresentedGroup,
    pub target: PresentedGroup,
    pub matrix: IntMatrix,
}

impl GroupMorphism {
    pub fn new(source: PresentedGroup, target: PresentedGroup, matrix: IntMatrix) -> Result<Self, KhError> {
        let m = GroupMorphism { source, target, matrix };
        m.check_well_defined()?;
        Ok(m)
    }

    pub fn zero(source: PresentedGroup, target: PresentedGroup) -> Self {
        let matrix = IntMatrix::zero(target.gens, source.gens);
        GroupMorphism { source, target, matrix }
    }

    pub fn identity(g: PresentedGroup) -> Self {
        let matrix = IntMatrix::identity(g.gens);
        GroupMorphism { source: g.clone(), target: g, matrix }
    }

    /// The matrix must carry the relation lattice of the source into the
    /// relation lattice of the target.
    pub fn check_well_defined(&self) -> Result<(), KhError> {
        if self.matrix.rows() != self.target.gens || self.matrix.cols() != self.source.gens {
            return Err(KhError::Internal(format!(
                "morphism matrix {}x{} does not match gens {} -> {}",
                self.matrix.rows(),
                self.matrix.cols(),
                self.source.gens,
                self.target.gens
            )));
        }
        let image_of_rels = self.matrix.mul(&self.source.rels);
        if snf::solve(&self.target.rels, &image_of_rels).is_none() {
            return Err(KhError::Internal(
                "morphism does not respect relations (not well-defined)".into(),
            ));
        }
        Ok(())
    }

    pub fn compose(&self, inner: &GroupMorphism) -> GroupMorphism {
        assert_eq!(inner.target.gens, self.source.gens, "composition mismatch");
        GroupMorphism {
            source: inner.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.mul(&inner.matrix),
        }
    }

    /// Zero as a morphism, i.e. every column lands in the target's
    /// relation lattice.
    pub fn is_zero_mod_rels(&self) -> bool {
        if self.matrix.is_zero() {
            return true;
        }
        snf::solve(&self.target.rels, &self.matrix).is_some()
    }

    pub fn sub(&self, other: &GroupMorphism) -> GroupMorphism {
        GroupMorphism {
            source: self.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.sub(&other.matrix),
        }
    }
}

/// Homology of free abelian groups: ker(d_out)/im(d_in) where
/// d_in: Z^a -> Z^n and d_out: Z^n -> Z^b. Returns the canonical group
/// and a lift matrix (n x gens) expressing each canonical generator as a
/// chain in the middle term.
pub fn homology_at(d_in: &IntMatrix, d_out: &IntMatrix) -> Result<(CanonicalGroup, IntMatrix), KhError> {
    let n = d_out.cols();
    if d_in.rows() != n {
        return Err(KhError::Internal(format!(
            "homology_at: d_in has {} rows but middle term has dimension {}",
            d_in.rows(),
            n
        )));
    }
    let comp = d_out.mul(d_in);
    if let Some((i, j, v)) = comp.entries().next() {
        return Err(KhError::Internal(format!(
            "d_out . d_in != 0: first violation at ({i},{j}) = {v}"
        )));
    }

    // kernel basis spans a saturated direct summand
    let k = snf::kernel_basis(d_out);
    if k.cols() == 0 {
        return Ok((CanonicalGroup::trivial(), IntMatrix::zero(n, 0)));
    }
    // express the boundaries in the kernel basis
    let y = snf::solve(&k, d_in)
        .ok_or_else(|| KhError::Internal("boundaries do not lie in the cycle lattice".into()))?;
    let (canon, gen_in_kernel_coords) = cokernel(&y);
    let lift = k.mul(&gen_in_kernel_coords);
    Ok((canon, lift))
}

/// Cokernel of Y: Z^c -> Z^k as a canonical group plus a matrix whose
/// columns express the canonical generators in the k standard coords.
fn cokernel(y: &IntMatrix) -> (CanonicalGroup, IntMatrix) {
    let k = y.rows();
    let dec: SmithDecomposition = snf::snf(y);
    let mut orders = vec![];
    let mut keep = vec![];
    for i in 0..k {
        let d = if i < dec.diag.len() { dec.diag[i].clone() } else { BigInt::zero() };
        if d == BigInt::one() {
            continue;
        }
        orders.push(d);
        keep.push(i);
    }
    // generators are the columns of U^{-1}
    let gens = dec.u_inv.select_columns(&keep);
    (CanonicalGroup::from_orders(orders), gens)
}

/// Homology ker(g)/im(f) for morphisms of presented groups
/// f: A -> B, g: B -> C, computed by relation-lattice saturation.
pub fn presented_homology_at(f: &GroupMorphism, g: &GroupMorphism) -> Result<CanonicalGroup, KhError> {
    f.check_well_defined()?;
    g.check_well_defined()?;
    if f.target.gens != g.source.gens {
        return Err(KhError::Internal("presented_homology_at: middle terms differ".into()));
    }
    let composite = g.compose(f);
    if !composite.is_zero_mod_rels() {
        return Err(KhError::Internal(
            "g . f is nonzero modulo the relations of the target".into(),
        ));
    }
    let n_b = g.source.gens;

    // preimage lattice P = { x : g(x) lies in the relation lattice of C }
    let w = g.matrix.hstack(&g.target.rels.neg());
    let k_full = snf::kernel_basis(&w);
    let k = k_full.select_rows(&(0..n_b).collect::<Vec<_>>());

    // lattice basis of <K>: b_i = d_i * (U^{-1} e_i)
    let dec = snf::snf(&k);
    let t = dec.rank();
    if t == 0 {
        return Ok(CanonicalGroup::trivial());
    }

    // boundaries and relations of B, expressed in that basis
    let j = f.matrix.hstack(&g.source.rels);
    let uj = dec.u.mul(&j);
    let mut y = IntMatrix::zero(t, j.cols());
    for (i, c, v) in uj.entries() {
        if i >= t {
            return Err(KhError::Internal(
                "image does not lie in the kernel lattice".into(),
            ));
        }
        let (q, r) = num_integer::Integer::div_rem(v, &dec.diag[i]);
        if !r.is_zero() {
            return Err(KhError::Internal(
                "image is not divisible in the kernel lattice".into(),
            ));
        }
        y.set(i, c, q);
    }
    let (canon, _) = cokernel(&y);
    Ok(canon)
}

/// Structure report after a change of coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    /// Free rank (over Q or Z[1/2]) or dimension (over F_p).
    pub rank: usize,
    /// Remaining torsion divisors (empty over a field).
    pub torsion: Vec<BigInt>,
}

pub fn change_coefficients(inv: &Invariants, c: &Coefficients) -> StructureReport {
    match c {
        Coefficients::Integers => StructureReport { rank: inv.free_rank, torsion: inv.torsion.clone() },
        Coefficients::Rationals => StructureReport { rank: inv.free_rank, torsion: vec![] },
        Coefficients::PrimeField(p) => {
            let p = BigInt::from(*p);
            let extra = inv.torsion.iter().filter(|d| (&**d % &p).is_zero()).count();
            StructureReport { rank: inv.free_rank + extra, torsion: vec![] }
        }
        Coefficients::LocalAwayTwo => {
            let two = BigInt::from(2);
            let mut torsion = vec![];
            for d in &inv.torsion {
                let mut pow = BigInt::one();
                let mut rest = d.clone();
                while (&rest % &two).is_zero() {
                    pow *= &two;
                    rest /= &two;
                }
                if pow > BigInt::one() {
                    torsion.push(pow);
                }
            }
            StructureReport { rank: inv.free_rank, torsion }
        }
    }
}
