//! Solution sets, radicals and coordinate algebras over `A^n`.
//!
//! An [`AffineSpace`] fixes the algebra `A`, the variable count `n` and the
//! free algebra `F(A,n)`. Radicals are congruences on `F`: two term
//! functions are related when they agree on every point of the defining set.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::algebras::{
    decode_tuple, encode_tuple, for_each_tuple, Congruence, FiniteAlgebra, HomMap,
};
use crate::error::{Error, Result};
use crate::freealg::FreeAlgebra;
use crate::options::Options;
use crate::terms::{AtomicFormula, EquationSystem};

/// A subset of `A^n`, indexed by lexicographic point encoding (x1 most
/// significant).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    m: usize,
    n: usize,
    bits: FixedBitSet,
}

impl PointSet {
    pub fn empty(m: usize, n: usize) -> Self {
        PointSet {
            m,
            n,
            bits: FixedBitSet::with_capacity(m.pow(n as u32)),
        }
    }

    pub fn full(m: usize, n: usize) -> Self {
        let mut s = PointSet::empty(m, n);
        s.bits.insert_range(..);
        s
    }

    pub fn from_indices(m: usize, n: usize, idx: impl IntoIterator<Item = usize>) -> Self {
        let mut s = PointSet::empty(m, n);
        for i in idx {
            s.bits.insert(i);
        }
        s
    }

    /// Subset selected by the low bits of `mask` (only for at most 64 points).
    pub fn from_mask(m: usize, n: usize, mask: u64) -> Self {
        let mut s = PointSet::empty(m, n);
        for i in 0..s.capacity() {
            if mask >> i & 1 == 1 {
                s.bits.insert(i);
            }
        }
        s
    }

    pub fn from_tuples(m: usize, n: usize, tuples: &[Vec<usize>]) -> Result<Self> {
        let mut s = PointSet::empty(m, n);
        for t in tuples {
            if t.len() != n || t.iter().any(|&a| a >= m) {
                return Err(Error::semantic(format!(
                    "point {t:?} is not in A^{n} with |A| = {m}"
                )));
            }
            s.bits.insert(encode_tuple(m, t));
        }
        Ok(s)
    }

    /// Size of the base algebra.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Size of the ambient space `m^n`.
    pub fn capacity(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, p: usize) -> bool {
        self.bits.contains(p)
    }

    pub fn insert(&mut self, p: usize) {
        self.bits.insert(p);
    }

    pub fn remove(&mut self, p: usize) {
        self.bits.set(p, false);
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.bits.ones().collect()
    }

    pub fn tuples(&self) -> Vec<Vec<usize>> {
        self.iter()
            .map(|p| decode_tuple(p, self.m, self.n))
            .collect()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut out = self.clone();
        out.bits.union_with(&other.bits);
        out
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        out
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        let mut out = self.clone();
        out.bits.difference_with(&other.bits);
        out
    }
}

/// Canonical order: by size, then lexicographically by member indices.
impl Ord for PointSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.iter().cmp(other.iter()))
    }
}

impl PartialOrd for PointSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, t) in self.tuples().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&format_point(t))?;
        }
        f.write_str("}")
    }
}

pub fn format_point(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(|a| a.to_string()).collect();
    format!("({})", parts.join(","))
}

/// `Rad(E)` together with its defining set and the algebraic set `V(Rad(E))`.
#[derive(Debug, Clone)]
pub struct RadicalIdeal {
    pub kernel: Congruence,
    pub defining_points: PointSet,
    pub canonical_set: PointSet,
}

/// Radicals are compared by kernel only.
impl PartialEq for RadicalIdeal {
    fn eq(&self, other: &Self) -> bool {
        self.kernel == other.kernel
    }
}

impl Eq for RadicalIdeal {}

/// `Γ(Y) = F/Rad(Y)`, the algebra `T(Y)` of restricted term functions and
/// the isomorphism between them.
#[derive(Debug, Clone)]
pub struct CoordinateAlgebra {
    pub gamma: FiniteAlgebra,
    pub t_y: FiniteAlgebra,
    /// Restriction vectors forming the carrier of `t_y`, in carrier order.
    pub restrictions: Vec<Vec<usize>>,
    pub iso: HomMap,
}

/// The affine space `A^n` with its free algebra of term functions.
#[derive(Debug, Clone)]
pub struct AffineSpace {
    free: FreeAlgebra,
}

impl AffineSpace {
    pub fn new(algebra: &FiniteAlgebra, n: usize, opts: &Options) -> Result<Self> {
        Ok(AffineSpace {
            free: FreeAlgebra::build(algebra, n, opts)?,
        })
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        self.free.base()
    }

    pub fn free(&self) -> &FreeAlgebra {
        &self.free
    }

    pub fn vars(&self) -> usize {
        self.free.vars()
    }

    pub fn num_points(&self) -> usize {
        self.free.num_points()
    }

    pub fn point_tuple(&self, p: usize) -> Vec<usize> {
        decode_tuple(p, self.algebra().size(), self.vars())
    }

    pub fn empty(&self) -> PointSet {
        PointSet::empty(self.algebra().size(), self.vars())
    }

    pub fn full(&self) -> PointSet {
        PointSet::full(self.algebra().size(), self.vars())
    }

    fn check_dim(&self, e: &PointSet) -> Result<()> {
        if e.dim() != self.vars() || e.capacity() != self.num_points() {
            return Err(Error::semantic(format!(
                "point set lives in a space of dimension {}, expected {}",
                e.dim(),
                self.vars()
            )));
        }
        Ok(())
    }

    fn check_vars(&self, s: &EquationSystem) -> Result<()> {
        if s.vars() != self.vars() {
            return Err(Error::semantic(format!(
                "system has {} variables, space has {}",
                s.vars(),
                self.vars()
            )));
        }
        Ok(())
    }

    pub fn canonical_pair(&self, f: &AtomicFormula) -> Result<(usize, usize)> {
        Ok((
            self.free.canonicalize(&f.lhs)?,
            self.free.canonicalize(&f.rhs)?,
        ))
    }

    pub fn canonical_pairs(&self, s: &EquationSystem) -> Result<Vec<(usize, usize)>> {
        self.check_vars(s)?;
        s.formulas()
            .iter()
            .map(|f| self.canonical_pair(f))
            .collect()
    }

    /// The formula `witness(f) = witness(g)`.
    pub fn formula_of_pair(&self, (f, g): (usize, usize)) -> AtomicFormula {
        let w = self.free.witnesses();
        AtomicFormula::new(w[f].clone(), w[g].clone())
    }

    pub fn system_of_pairs(&self, pairs: &[(usize, usize)]) -> EquationSystem {
        EquationSystem::from_formulas(self.vars(), pairs.iter().map(|&p| self.formula_of_pair(p)))
    }

    /// `V(S)` for a system given as canonical pairs.
    pub fn solution_set_of_pairs(&self, pairs: &[(usize, usize)]) -> PointSet {
        let mut out = self.full();
        for &(f, g) in pairs {
            let (vf, vg) = (self.free.vector(f), self.free.vector(g));
            for p in 0..self.num_points() {
                if vf[p] != vg[p] {
                    out.remove(p);
                }
            }
        }
        out
    }

    pub fn solution_set(&self, s: &EquationSystem) -> Result<PointSet> {
        Ok(self.solution_set_of_pairs(&self.canonical_pairs(s)?))
    }

    /// `Rad(ā)`: term functions grouped by their value at `p`.
    pub fn point_kernel(&self, p: usize) -> Congruence {
        let labels: Vec<usize> = (0..self.free.len())
            .map(|f| self.free.value(f, p))
            .collect();
        Congruence::from_labels(&labels)
    }

    /// Kernel of `Rad(E)`: term functions grouped by their restriction to `E`.
    pub fn radical_kernel(&self, e: &PointSet) -> Congruence {
        let pts = e.indices();
        let labels: Vec<Vec<usize>> = (0..self.free.len())
            .map(|f| pts.iter().map(|&p| self.free.value(f, p)).collect())
            .collect();
        Congruence::from_labels(&labels)
    }

    /// `V` of a kernel: points where every class takes a single value.
    pub fn variety_of_kernel(&self, kernel: &Congruence) -> PointSet {
        let mut out = self.empty();
        for p in 0..self.num_points() {
            if (0..self.free.len())
                .all(|f| self.free.value(f, p) == self.free.value(kernel.rep(f), p))
            {
                out.insert(p);
            }
        }
        out
    }

    pub fn radical_of_points(&self, e: &PointSet) -> Result<RadicalIdeal> {
        self.check_dim(e)?;
        let kernel = self.radical_kernel(e);
        if !kernel.is_compatible(self.free.as_algebra()) {
            return Err(Error::invariant(
                "radical kernel is not a congruence on the free algebra",
            ));
        }
        let canonical_set = self.variety_of_kernel(&kernel);
        Ok(RadicalIdeal {
            kernel,
            defining_points: e.clone(),
            canonical_set,
        })
    }

    /// `V(Rad(E))`, the least algebraic set containing `E`.
    pub fn algebraic_closure(&self, e: &PointSet) -> Result<PointSet> {
        self.check_dim(e)?;
        Ok(self.variety_of_kernel(&self.radical_kernel(e)))
    }

    pub fn is_algebraic(&self, y: &PointSet) -> Result<bool> {
        Ok(&self.algebraic_closure(y)? == y)
    }

    /// `Rad_A(S) = Rad(V(S))`.
    pub fn radical_of_system(&self, s: &EquationSystem) -> Result<RadicalIdeal> {
        self.radical_of_points(&self.solution_set(s)?)
    }

    pub fn systems_equivalent(&self, s1: &EquationSystem, s2: &EquationSystem) -> Result<bool> {
        Ok(self.solution_set(s1)? == self.solution_set(s2)?)
    }

    /// `[S]`: the least congruence on `F` containing the canonical pairs of `S`.
    pub fn ideal_generated(&self, s: &EquationSystem) -> Result<Congruence> {
        Ok(self
            .free
            .as_algebra()
            .congruence_closure(&self.canonical_pairs(s)?))
    }

    /// `Γ(Y)` and `T(Y)` with a verified isomorphism. The empty set is
    /// rejected unless `allow_trivial`, in which case both are 1-element.
    pub fn coordinate_algebra(
        &self,
        y: &PointSet,
        allow_trivial: bool,
    ) -> Result<CoordinateAlgebra> {
        self.check_dim(y)?;
        if y.is_empty() && !allow_trivial {
            return Err(Error::semantic(
                "coordinate algebra of the empty set is not defined (use --allow-trivial)",
            ));
        }
        let kernel = self.radical_kernel(y);
        let (gamma, proj) = self.free.as_algebra().quotient(&kernel)?;

        let pts = y.indices();
        let restrict =
            |f: usize| -> Vec<usize> { pts.iter().map(|&p| self.free.value(f, p)).collect() };
        let mut restrictions: Vec<Vec<usize>> = (0..self.free.len()).map(restrict).collect();
        restrictions.sort();
        restrictions.dedup();
        let slot: HashMap<&[usize], usize> = restrictions
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_slice(), i))
            .collect();

        // T(Y) is tabulated pointwise from A, independently of F's tables
        let a = self.algebra();
        let sig = a.signature_arc().clone();
        let mut tables = Vec::with_capacity(sig.len());
        for (op, sym) in sig.ops().iter().enumerate() {
            let mut table = Vec::new();
            let mut buf = vec![0; sym.arity];
            let mut missing = false;
            for_each_tuple(restrictions.len(), sym.arity, |args| {
                let v: Vec<usize> = (0..pts.len())
                    .map(|j| {
                        for (slot, &x) in buf.iter_mut().zip(args) {
                            *slot = restrictions[x][j];
                        }
                        a.apply(op, &buf)
                    })
                    .collect();
                match slot.get(v.as_slice()) {
                    Some(&i) => table.push(i),
                    None => missing = true,
                }
            });
            if missing {
                return Err(Error::invariant("restricted term functions are not closed"));
            }
            tables.push(table);
        }
        let t_y = FiniteAlgebra::new(sig, restrictions.len(), tables)?.with_name("T(Y)");

        let reps = kernel.representatives();
        let iso = HomMap::new(reps.iter().map(|&r| slot[restrict(r).as_slice()]).collect());
        debug_assert!(reps.iter().enumerate().all(|(c, &r)| proj.apply(r) == c));
        if !iso.is_isomorphism(&gamma, &t_y) {
            return Err(Error::invariant("Γ(Y) → T(Y) is not an isomorphism"));
        }
        Ok(CoordinateAlgebra {
            gamma: gamma.with_name("Gamma(Y)"),
            t_y,
            restrictions,
            iso,
        })
    }
}
