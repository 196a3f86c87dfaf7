//! Filters on finite index sets, reduced products, and finite checks that
//! ultrapowers, subalgebras and coordinate algebras keep the chain
//! conditions and the radical topology.
//!
//! On a finite index set every filter is principal, so an ultrapower is just
//! a copy of `A`. Non-principal ultrafilters need an infinite index set and
//! are out of reach here.

use std::collections::BTreeSet;
use std::fmt;

use crate::algebras::{decode_tuple, Congruence, FiniteAlgebra, HomMap};
use crate::chains::certify_artinian;
use crate::error::{Error, Result};
use crate::geometry::AffineSpace;
use crate::options::Options;
use crate::topology::{enumerate_radical_ideals, PairSet};

/// Largest index set a filter may live on (its members are `u64` masks and
/// validation walks all `2^k` subsets).
pub const MAX_INDEX: usize = 20;

/// A proper filter on `I = {0..k-1}`; members are bitmasks of `I`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Filter {
    index_size: usize,
    members: BTreeSet<u64>,
}

fn full_mask(k: usize) -> u64 {
    if k == 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

fn check_index(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::semantic("index set must be nonempty"));
    }
    if k > MAX_INDEX {
        return Err(Error::semantic(format!(
            "index sets larger than {MAX_INDEX} are not supported"
        )));
    }
    Ok(())
}

impl Filter {
    /// Validate a family of subsets: nonempty, without `∅`, upward closed
    /// and closed under intersection.
    pub fn new(index_size: usize, members: impl IntoIterator<Item = u64>) -> Result<Filter> {
        check_index(index_size)?;
        let full = full_mask(index_size);
        let members: BTreeSet<u64> = members.into_iter().collect();
        let invalid = |why: &str| Err(Error::semantic(format!("invalid filter: {why}")));
        if members.is_empty() {
            return invalid("no members");
        }
        if members.iter().any(|&j| j & !full != 0) {
            return invalid("member outside the index set");
        }
        if members.contains(&0) {
            return invalid("contains the empty set");
        }
        for &a in &members {
            for &b in &members {
                if !members.contains(&(a & b)) {
                    return invalid("not closed under intersection");
                }
            }
            for sup in 0..=full {
                if sup & a == a && !members.contains(&sup) {
                    return invalid("not upward closed");
                }
            }
        }
        Ok(Filter {
            index_size,
            members,
        })
    }

    /// All supersets of a nonempty `j`.
    pub fn principal(index_size: usize, j: u64) -> Result<Filter> {
        check_index(index_size)?;
        let full = full_mask(index_size);
        if j == 0 || j & !full != 0 {
            return Err(Error::semantic(
                "generator must be a nonempty subset of the index set",
            ));
        }
        Filter::new(index_size, (0..=full).filter(|s| s & j == j))
    }

    /// The principal ultrafilter of sets containing `i`.
    pub fn principal_at(index_size: usize, i: usize) -> Result<Filter> {
        if i >= index_size {
            return Err(Error::semantic(format!(
                "index {i} is outside I = {{0..{}}}",
                index_size.saturating_sub(1)
            )));
        }
        Filter::principal(index_size, 1 << i)
    }

    /// Every ultrafilter on `I`, in index order.
    pub fn ultrafilters(index_size: usize) -> Result<Vec<Filter>> {
        (0..index_size)
            .map(|i| Filter::principal_at(index_size, i))
            .collect()
    }

    /// Always fails: a non-principal ultrafilter needs an infinite index set.
    pub fn nonprincipal(index_size: usize) -> Result<Filter> {
        Err(Error::semantic(format!(
            "no non-principal ultrafilter exists on a finite index set (|I| = {index_size}); \
             genuine ultrapowers over infinite index sets are beyond what can be computed here"
        )))
    }

    pub fn index_size(&self) -> usize {
        self.index_size
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.members.iter().copied()
    }

    pub fn contains(&self, j: u64) -> bool {
        self.members.contains(&j)
    }

    /// The least member; it generates the filter.
    pub fn generator(&self) -> u64 {
        self.members
            .iter()
            .fold(full_mask(self.index_size), |acc, &j| acc & j)
    }

    /// For every `J ⊆ I` exactly one of `J`, `I∖J` is a member.
    pub fn is_ultrafilter(&self) -> bool {
        let full = full_mask(self.index_size);
        (0..=full).all(|j| self.contains(j) != self.contains(full & !j))
    }

    /// Every member of `self` is a member of `other`.
    pub fn is_coarser_than(&self, other: &Filter) -> bool {
        self.index_size == other.index_size && self.members.is_subset(&other.members)
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.generator();
        let gen: Vec<String> = (0..self.index_size)
            .filter(|&i| g >> i & 1 == 1)
            .map(|i| i.to_string())
            .collect();
        write!(
            f,
            "filter on {{0..{}}} generated by {{{}}} ({} members)",
            self.index_size - 1,
            gen.join(","),
            self.members.len()
        )
    }
}

/// `A^I / F` together with `A^I` and the quotient map.
#[derive(Debug, Clone)]
pub struct ReducedProduct {
    pub power: FiniteAlgebra,
    pub algebra: FiniteAlgebra,
    pub quotient: HomMap,
    pub kernel: Congruence,
}

/// `A^I/F`: tuples are identified when the set of coordinates where they
/// agree is a member of `F`. Since `F` is generated by its least member
/// `J`, this is agreement on `J`.
pub fn reduced_product(
    a: &FiniteAlgebra,
    filter: &Filter,
    opts: &Options,
) -> Result<ReducedProduct> {
    let k = filter.index_size();
    let power = a.power(k, opts)?;
    let g = filter.generator();
    let labels: Vec<Vec<usize>> = (0..power.size())
        .map(|x| {
            decode_tuple(x, a.size(), k)
                .into_iter()
                .enumerate()
                .filter(|&(i, _)| g >> i & 1 == 1)
                .map(|(_, v)| v)
                .collect()
        })
        .collect();
    let kernel = Congruence::from_labels(&labels);
    let (q, quotient) = power.quotient(&kernel)?;
    let name = match a.name() {
        Some(n) => format!("{n}^{k}/F"),
        None => format!("A^{k}/F"),
    };
    Ok(ReducedProduct {
        power,
        algebra: q.with_name(name),
        quotient,
        kernel,
    })
}

/// Outcome of comparing the radical topologies of two isomorphic algebras.
#[derive(Debug, Clone)]
pub struct RadicalTopologyReport {
    pub vars: usize,
    /// Lexicographically least isomorphism `A → B`.
    pub iso: HomMap,
    /// The induced bijection `F(A,n) → F(B,n)` (through witness terms).
    pub free_map: Vec<usize>,
    /// `(i, j)`: the `i`-th radical over `A` is the `j`-th over `B`.
    pub matched: Vec<(usize, usize)>,
    pub radicals_a: usize,
    pub radicals_b: usize,
    /// Formulas `p ≈ q` whose radicals were compared.
    pub formulas_checked: usize,
    pub equal: bool,
}

impl fmt::Display for RadicalTopologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "isomorphism A -> B: {:?}", self.iso.as_slice())?;
        writeln!(
            f,
            "(isomorphism stands in for elementary equivalence of finite algebras)"
        )?;
        writeln!(
            f,
            "radical ideals: {} over A, {} over B",
            self.radicals_a, self.radicals_b
        )?;
        for (i, j) in &self.matched {
            writeln!(f, "  R{i} -> R{j}")?;
        }
        writeln!(f, "formulas compared: {}", self.formulas_checked)?;
        write!(f, "radical topologies equal: {}", self.equal)
    }
}

/// Check that `A` and `B` induce the same radical topology on the atomic
/// formulas in `n` variables. Refused unless `A ≅ B`, the finite stand-in
/// for elementary equivalence.
pub fn verify_radical_topology_equal(
    a: &FiniteAlgebra,
    b: &FiniteAlgebra,
    n: usize,
    opts: &Options,
) -> Result<RadicalTopologyReport> {
    if a.signature() != b.signature() {
        return Err(Error::semantic(
            "algebras have different signatures; comparison refused",
        ));
    }
    let Some(iso) = a.find_isomorphism(b, opts)? else {
        return Err(Error::semantic(
            "algebras are not isomorphic; finite algebras that are not isomorphic are not \
             elementarily equivalent, so the comparison is refused",
        ));
    };
    let sa = AffineSpace::new(a, n, opts)?;
    let sb = AffineSpace::new(b, n, opts)?;
    let fa = sa.free();
    let fb = sb.free();
    let free_map: Vec<usize> = fa
        .witnesses()
        .iter()
        .map(|t| fb.canonicalize(t))
        .collect::<Result<_>>()?;
    let mut equal = fa.len() == fb.len() && HomMap::new(free_map.clone()).is_bijective(fb.len());

    let transport = |p: &PairSet| {
        PairSet::from_pairs(fb.len(), p.pairs().map(|(f, g)| (free_map[f], free_map[g])))
    };

    let ra = enumerate_radical_ideals(&sa, opts)?;
    let rb = enumerate_radical_ideals(&sb, opts)?;
    let pb: Vec<PairSet> = rb
        .iter()
        .map(|r| PairSet::from_congruence(&r.kernel))
        .collect();
    let mut matched = Vec::with_capacity(ra.len());
    for (i, r) in ra.iter().enumerate() {
        let image = transport(&PairSet::from_congruence(&r.kernel));
        match pb.iter().position(|p| p == &image) {
            Some(j) => matched.push((i, j)),
            None => equal = false,
        }
    }
    equal &= ra.len() == rb.len() && matched.len() == ra.len();

    // Rad_B(p ≈ q) = Rad_A(p ≈ q) for every formula, up to the identification of F(A,n) with F(B,n)
    let mut formulas_checked = 0;
    for f in 0..fa.len() {
        for g in f + 1..fa.len() {
            let rad_a = sa.radical_kernel(&sa.solution_set_of_pairs(&[(f, g)]));
            let rad_b = sb.radical_kernel(&sb.solution_set_of_pairs(&[(free_map[f], free_map[g])]));
            equal &=
                transport(&PairSet::from_congruence(&rad_a)) == PairSet::from_congruence(&rad_b);
            formulas_checked += 1;
        }
    }
    Ok(RadicalTopologyReport {
        vars: n,
        iso,
        free_map,
        matched,
        radicals_a: ra.len(),
        radicals_b: rb.len(),
        formulas_checked,
        equal,
    })
}

/// One ultrapower `A^I/U` and the checks run on it.
#[derive(Debug, Clone)]
pub struct UltrapowerCheck {
    pub filter: Filter,
    pub size: usize,
    pub isomorphic: bool,
    pub topology: Option<RadicalTopologyReport>,
    pub artinian: bool,
}

impl UltrapowerCheck {
    pub fn passed(&self) -> bool {
        self.isomorphic && self.artinian && self.topology.as_ref().is_some_and(|t| t.equal)
    }
}

/// For every ultrafilter on `{0..k-1}`: build `A^I/U`, confirm it is
/// isomorphic to `A`, that both give the same radical topology at `n`
/// variables, and that it is certified equationally Artinian.
pub fn verify_ultrapowers(
    a: &FiniteAlgebra,
    k: usize,
    n: usize,
    opts: &Options,
) -> Result<Vec<UltrapowerCheck>> {
    let mut out = Vec::new();
    for u in Filter::ultrafilters(k)? {
        let rp = reduced_product(a, &u, opts)?;
        let isomorphic = a.find_isomorphism(&rp.algebra, opts)?.is_some();
        let topology = if isomorphic {
            Some(verify_radical_topology_equal(a, &rp.algebra, n, opts)?)
        } else {
            None
        };
        let artinian = certify_artinian(&AffineSpace::new(&rp.algebra, n, opts)?, opts)?.verdict;
        out.push(UltrapowerCheck {
            size: rp.algebra.size(),
            filter: u,
            isomorphic,
            topology,
            artinian,
        });
    }
    Ok(out)
}

/// How a derived algebra was obtained from `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derivation {
    Subalgebra(Vec<usize>),
    CoordinateAlgebra(Vec<usize>),
    Ultrapower(usize),
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |xs: &[usize]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Derivation::Subalgebra(c) => write!(f, "subalgebra on {{{}}}", list(c)),
            Derivation::CoordinateAlgebra(y) => {
                write!(f, "coordinate algebra of points {{{}}}", list(y))
            }
            Derivation::Ultrapower(k) => write!(f, "ultrapower over |I| = {k}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PreservationEntry {
    pub derivation: Derivation,
    pub size: usize,
    pub verdict: bool,
    pub longest_ascending: usize,
    pub longest_descending: usize,
}

#[derive(Debug, Clone)]
pub struct PreservationReport {
    pub vars: usize,
    pub entries: Vec<PreservationEntry>,
}

impl PreservationReport {
    pub fn all_certified(&self) -> bool {
        self.entries.iter().all(|e| e.verdict)
    }
}

/// Certify every subalgebra of `A` (one per distinct generated carrier),
/// every coordinate algebra `Γ(Y)` of a nonempty algebraic `Y ⊆ A^n`, and
/// the ultrapower over a 2-element index set, all at `n` variables.
pub fn verify_preservation(
    a: &FiniteAlgebra,
    n: usize,
    opts: &Options,
) -> Result<PreservationReport> {
    let m = a.size();
    if !opts.exhaustive_subsets(m) {
        return Err(Error::Budget {
            what: "seed subsets of the carrier".to_string(),
            needed: 1u128.checked_shl(m as u32).unwrap_or(u128::MAX),
            limit: opts.max_entries,
        });
    }
    let mut carriers: BTreeSet<Vec<usize>> = BTreeSet::new();
    for mask in 0..1u64 << m {
        let seed: Vec<usize> = (0..m).filter(|&i| mask >> i & 1 == 1).collect();
        let c = a.subalgebra_closure(&seed);
        if !c.is_empty() {
            carriers.insert(c);
        }
    }
    let mut derived: Vec<(Derivation, FiniteAlgebra)> = Vec::new();
    for c in carriers {
        let (sub, _) = a.restrict(&c)?;
        derived.push((Derivation::Subalgebra(c), sub));
    }
    let space = AffineSpace::new(a, n, opts)?;
    for r in enumerate_radical_ideals(&space, opts)? {
        let y = &r.canonical_set;
        if y.is_empty() {
            continue;
        }
        let coord = space.coordinate_algebra(y, false)?;
        derived.push((Derivation::CoordinateAlgebra(y.indices()), coord.gamma));
    }
    let up = reduced_product(a, &Filter::principal_at(2, 0)?, opts)?;
    derived.push((Derivation::Ultrapower(2), up.algebra));

    let mut entries = Vec::with_capacity(derived.len());
    for (derivation, d) in derived {
        let cert = certify_artinian(&AffineSpace::new(&d, n, opts)?, opts)?;
        let witness = |id: &str, key: &str| {
            cert.condition(id)
                .and_then(|c| c.witness.get(key))
                .and_then(|v| v.as_u64())
                .unwrap_or(0) as usize
        };
        entries.push(PreservationEntry {
            derivation,
            size: d.size(),
            verdict: cert.verdict,
            longest_ascending: witness("iii", "longest_ascending"),
            longest_descending: witness("ii", "longest_descending"),
        });
    }
    Ok(PreservationReport { vars: n, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebras::corpus::*;

    fn opts() -> Options {
        Options::default()
    }

    #[test]
    fn filter_validation() {
        assert!(Filter::new(2, []).is_err());
        assert!(Filter::new(2, [0b01, 0b11, 0]).is_err());
        assert!(Filter::new(2, [0b01]).is_err());
        assert!(Filter::new(3, [0b011, 0b101, 0b111]).is_err());
        assert!(Filter::new(2, [0b100]).is_err());
        let f = Filter::new(2, [0b01, 0b11]).unwrap();
        assert!(f.is_ultrafilter());
        assert_eq!(f.generator(), 0b01);
        assert_eq!(f, Filter::principal_at(2, 0).unwrap());
        let top = Filter::principal(3, 0b111).unwrap();
        assert!(!top.is_ultrafilter());
        assert_eq!(top.members().count(), 1);
        assert!(Filter::principal_at(3, 3).is_err());
        assert!(Filter::nonprincipal(3).is_err());
        assert!(Filter::new(0, [0]).is_err());
    }

    #[test]
    fn ultrafilters_on_small_sets_are_the_principal_ones() {
        for k in 1..=3 {
            let subsets = 1usize << k;
            let mut found = Vec::new();
            for family in 1u64..1 << subsets {
                let members = (0..subsets as u64).filter(|&j| family >> j & 1 == 1);
                if let Ok(f) = Filter::new(k, members) {
                    if f.is_ultrafilter() {
                        found.push(f);
                    }
                }
            }
            found.sort_by_key(|f| f.generator());
            assert_eq!(found, Filter::ultrafilters(k).unwrap());
        }
    }

    #[test]
    fn reduced_product_examples() {
        let z2 = z2_group();
        let u = Filter::principal_at(3, 1).unwrap();
        let rp = reduced_product(&z2, &u, &opts()).unwrap();
        assert_eq!(rp.algebra.size(), 2);
        assert!(z2.find_isomorphism(&rp.algebra, &opts()).unwrap().is_some());

        let top = Filter::principal(3, 0b111).unwrap();
        let rp = reduced_product(&z2, &top, &opts()).unwrap();
        let p3 = z2.power(3, &opts()).unwrap();
        assert!(p3.find_isomorphism(&rp.algebra, &opts()).unwrap().is_some());

        let j = Filter::principal(3, 0b011).unwrap();
        let rp = reduced_product(&z2, &j, &opts()).unwrap();
        let p2 = z2.power(2, &opts()).unwrap();
        assert!(p2.find_isomorphism(&rp.algebra, &opts()).unwrap().is_some());
    }

    #[test]
    fn coordinate_projection_is_an_isomorphism_for_ultrafilters() {
        for a in all() {
            for i in 0..3 {
                let u = Filter::principal_at(3, i).unwrap();
                let rp = reduced_product(&a, &u, &opts()).unwrap();
                // class -> value at coordinate i
                let mut map = vec![usize::MAX; rp.algebra.size()];
                for x in 0..rp.power.size() {
                    map[rp.quotient.apply(x)] = decode_tuple(x, a.size(), 3)[i];
                }
                let h = HomMap::new(map);
                assert!(h.is_isomorphism(&rp.algebra, &a));
            }
        }
    }

    #[test]
    fn finer_filter_gives_a_quotient() {
        let a = z3_group();
        let coarse = Filter::principal(3, 0b011).unwrap();
        let fine = Filter::principal_at(3, 0).unwrap();
        assert!(coarse.is_coarser_than(&fine));
        let rc = reduced_product(&a, &coarse, &opts()).unwrap();
        let rf = reduced_product(&a, &fine, &opts()).unwrap();
        assert!(rc.kernel.is_finer_than(&rf.kernel));
        // class of x in the coarse product determines its class in the fine one
        let mut map = vec![usize::MAX; rc.algebra.size()];
        for x in 0..rc.power.size() {
            map[rc.quotient.apply(x)] = rf.quotient.apply(x);
        }
        assert!(HomMap::new(map).is_homomorphism(&rc.algebra, &rf.algebra));
    }

    #[test]
    fn radical_topology_comparison() {
        let z2 = z2_group();
        let r = verify_radical_topology_equal(&z2, &z2, 2, &opts()).unwrap();
        assert!(r.equal);
        let rp = reduced_product(&z2, &Filter::principal_at(3, 2).unwrap(), &opts()).unwrap();
        let r = verify_radical_topology_equal(&z2, &rp.algebra, 1, &opts()).unwrap();
        assert!(r.equal);
        let back = verify_radical_topology_equal(&rp.algebra, &z2, 1, &opts()).unwrap();
        assert_eq!(r.equal, back.equal);
        assert!(verify_radical_topology_equal(&sl2(), &z2, 1, &opts()).is_err());
        assert!(verify_radical_topology_equal(&z2, &zero_mul2(), 1, &opts()).is_err());
    }

    #[test]
    fn ultrapower_checks() {
        for c in verify_ultrapowers(&z3_group(), 3, 1, &opts()).unwrap() {
            assert!(c.passed());
            assert_eq!(c.size, 3);
        }
    }

    #[test]
    fn preservation_examples() {
        let r = verify_preservation(&z2_group(), 1, &opts()).unwrap();
        let subs: Vec<&Derivation> = r
            .entries
            .iter()
            .map(|e| &e.derivation)
            .filter(|d| matches!(d, Derivation::Subalgebra(_)))
            .collect();
        assert_eq!(
            subs,
            vec![
                &Derivation::Subalgebra(vec![0]),
                &Derivation::Subalgebra(vec![0, 1])
            ]
        );
        let gamma0 = r
            .entries
            .iter()
            .find(|e| e.derivation == Derivation::CoordinateAlgebra(vec![0]))
            .unwrap();
        assert_eq!(gamma0.size, 1);
        assert!(r.all_certified());
        assert!(verify_preservation(&sl2(), 2, &opts())
            .unwrap()
            .all_certified());
    }
}
