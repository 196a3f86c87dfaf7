//! The Zariski topology on `A^n` and the radical topology on atomic
//! formulas, both at desk scale.
//!
//! Atomic formulas over `x1..xn` are represented by pairs of free-algebra
//! elements, so closed sets of the radical topology are subsets of `F×F`
//! ([`PairSet`]). Radical ideals form the subbasis `B`; `B1` is the family
//! of finite unions and `B2` the family of intersections of `B1` members.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use fixedbitset::FixedBitSet;

use crate::algebras::Congruence;
use crate::error::{Error, Result};
use crate::geometry::{AffineSpace, PointSet, RadicalIdeal};
use crate::options::Options;
use crate::terms::AtomicFormula;

/// A subset of `F×F`; bit `f * size + g` stands for the formula `f ≈ g`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairSet {
    size: usize,
    bits: FixedBitSet,
}

impl PairSet {
    pub fn empty(size: usize) -> Self {
        PairSet {
            size,
            bits: FixedBitSet::with_capacity(size * size),
        }
    }

    pub fn full(size: usize) -> Self {
        let mut s = PairSet::empty(size);
        s.bits.insert_range(..);
        s
    }

    pub fn from_congruence(c: &Congruence) -> Self {
        let size = c.len();
        let mut s = PairSet::empty(size);
        for f in 0..size {
            for g in 0..size {
                if c.related(f, g) {
                    s.bits.insert(f * size + g);
                }
            }
        }
        s
    }

    pub fn from_pairs(size: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut s = PairSet::empty(size);
        for (f, g) in pairs {
            s.insert(f, g);
        }
        s
    }

    /// Number of free-algebra elements the pairs range over.
    pub fn universe(&self) -> usize {
        self.size
    }

    pub fn insert(&mut self, f: usize, g: usize) {
        self.bits.insert(f * self.size + g);
    }

    pub fn contains(&self, f: usize, g: usize) -> bool {
        self.bits.contains(f * self.size + g)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits.ones().map(|b| (b / self.size, b % self.size))
    }

    pub fn is_subset(&self, other: &PairSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_proper_subset(&self, other: &PairSet) -> bool {
        self.is_subset(other) && self != other
    }

    pub fn union(&self, other: &PairSet) -> PairSet {
        let mut out = self.clone();
        out.bits.union_with(&other.bits);
        out
    }

    pub fn intersection(&self, other: &PairSet) -> PairSet {
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        out
    }

    pub fn complement(&self) -> PairSet {
        let mut out = self.clone();
        out.bits.toggle_range(..);
        out
    }

    pub fn is_disjoint(&self, other: &PairSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    /// Reflexive and symmetric as a relation on `F`.
    pub fn is_reflexive_symmetric(&self) -> bool {
        (0..self.size).all(|f| self.contains(f, f))
            && self.pairs().all(|(f, g)| self.contains(g, f))
    }
}

/// Canonical order: by popcount, then lexicographically by set bits.
impl Ord for PairSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.ones().cmp(other.bits.ones()))
    }
}

impl PartialOrd for PairSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// How a closed set was obtained from its leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Provenance {
    Leaf(usize),
    Union(Vec<Provenance>),
    Intersection(Vec<Provenance>),
}

impl Provenance {
    fn union(a: &Provenance, b: &Provenance) -> Provenance {
        let mut parts = Vec::new();
        for p in [a, b] {
            match p {
                Provenance::Union(xs) => parts.extend(xs.iter().cloned()),
                other => parts.push(other.clone()),
            }
        }
        Provenance::Union(parts)
    }

    fn intersection(a: &Provenance, b: &Provenance) -> Provenance {
        let mut parts = Vec::new();
        for p in [a, b] {
            match p {
                Provenance::Intersection(xs) => parts.extend(xs.iter().cloned()),
                other => parts.push(other.clone()),
            }
        }
        Provenance::Intersection(parts)
    }

    /// Evaluate the tree with `leaf`, `union` and `meet`; `top` is the empty
    /// intersection and `bottom` the empty union.
    pub fn eval<T: Clone>(
        &self,
        leaf: &impl Fn(usize) -> T,
        union: &impl Fn(&T, &T) -> T,
        meet: &impl Fn(&T, &T) -> T,
        bottom: &T,
        top: &T,
    ) -> T {
        match self {
            Provenance::Leaf(i) => leaf(*i),
            Provenance::Union(xs) => xs
                .iter()
                .map(|x| x.eval(leaf, union, meet, bottom, top))
                .fold(bottom.clone(), |acc, v| union(&acc, &v)),
            Provenance::Intersection(xs) => xs
                .iter()
                .map(|x| x.eval(leaf, union, meet, bottom, top))
                .fold(top.clone(), |acc, v| meet(&acc, &v)),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (sep, xs) = match self {
            Provenance::Leaf(i) => return write!(f, "R{i}"),
            Provenance::Union(xs) => (" | ", xs),
            Provenance::Intersection(xs) => (" & ", xs),
        };
        if xs.is_empty() {
            return f.write_str(if sep == " | " { "0" } else { "1" });
        }
        f.write_str("(")?;
        for (i, x) in xs.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

/// A closed set of the radical topology with the expression that built it
/// from radical ideals (leaf `i` is the `i`-th member of `B`).
#[derive(Debug, Clone)]
pub struct RadicalClosedSet {
    pub pairs: PairSet,
    pub provenance: Provenance,
}

impl PartialEq for RadicalClosedSet {
    fn eq(&self, other: &Self) -> bool {
        self.pairs == other.pairs
    }
}

impl Eq for RadicalClosedSet {}

impl RadicalClosedSet {
    fn check_context(&self, other: &RadicalClosedSet) -> Result<()> {
        if self.pairs.universe() != other.pairs.universe() {
            return Err(Error::semantic(
                "closed sets belong to different free algebras",
            ));
        }
        Ok(())
    }

    pub fn union(&self, other: &RadicalClosedSet) -> Result<RadicalClosedSet> {
        self.check_context(other)?;
        Ok(RadicalClosedSet {
            pairs: self.pairs.union(&other.pairs),
            provenance: Provenance::union(&self.provenance, &other.provenance),
        })
    }

    pub fn intersection(&self, other: &RadicalClosedSet) -> Result<RadicalClosedSet> {
        self.check_context(other)?;
        Ok(RadicalClosedSet {
            pairs: self.pairs.intersection(&other.pairs),
            provenance: Provenance::intersection(&self.provenance, &other.provenance),
        })
    }

    /// Whether `φ` (canonicalized in `space`) belongs to this closed set.
    pub fn contains_formula(&self, space: &AffineSpace, phi: &AtomicFormula) -> Result<bool> {
        if space.free().len() != self.pairs.universe() {
            return Err(Error::semantic(
                "formula context does not match the closed set",
            ));
        }
        let (f, g) = space.canonical_pair(phi)?;
        Ok(self.pairs.contains(f, g))
    }
}

/// A Zariski-closed subset of `A^n` with its construction from algebraic
/// sets (leaf `i` is the `i`-th algebraic set in canonical order).
#[derive(Debug, Clone)]
pub struct ZariskiClosedSet {
    pub points: PointSet,
    pub provenance: Provenance,
}

impl PartialEq for ZariskiClosedSet {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points
    }
}

impl Eq for ZariskiClosedSet {}

/// All `A`-radical ideals of `T_L(x1..xn)`: the meet-closure of the point
/// kernels together with the total relation `Rad(∅)`. Sorted canonically by
/// pair matrix; each carries its algebraic set as defining points.
pub fn enumerate_radical_ideals(space: &AffineSpace, opts: &Options) -> Result<Vec<RadicalIdeal>> {
    let f_len = space.free().len();
    let mut seen: HashMap<Congruence, ()> = HashMap::new();
    let mut kernels: Vec<Congruence> = Vec::new();
    let mut push = |k: Congruence, kernels: &mut Vec<Congruence>| -> Result<bool> {
        if seen.contains_key(&k) {
            return Ok(false);
        }
        opts.guard(
            || "radical ideal enumeration".to_string(),
            kernels.len() as u128 + 1,
        )?;
        seen.insert(k.clone(), ());
        kernels.push(k);
        Ok(true)
    };
    push(Congruence::total(f_len), &mut kernels)?;
    let point_kernels: Vec<Congruence> = (0..space.num_points())
        .map(|p| space.point_kernel(p))
        .collect();
    for k in &point_kernels {
        push(k.clone(), &mut kernels)?;
    }
    // meets with point kernels suffice: every Rad(E) is an iterated meet of them
    let mut next = 0;
    while next < kernels.len() {
        let k = kernels[next].clone();
        for pk in &point_kernels {
            push(k.meet(pk), &mut kernels)?;
        }
        next += 1;
    }
    let mut out: Vec<(PairSet, RadicalIdeal)> = kernels
        .into_iter()
        .map(|kernel| {
            let canonical_set = space.variety_of_kernel(&kernel);
            let pairs = PairSet::from_congruence(&kernel);
            let ideal = RadicalIdeal {
                kernel,
                defining_points: canonical_set.clone(),
                canonical_set,
            };
            (pairs, ideal)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out.into_iter().map(|(_, r)| r).collect())
}

/// The radical topology at one variable count: `B`, `B1`, `B2`.
#[derive(Debug, Clone)]
pub struct RadicalTopology {
    pub radicals: Vec<RadicalIdeal>,
    pub radical_pairs: Vec<PairSet>,
    pub b1: Vec<RadicalClosedSet>,
    pub b2: Vec<RadicalClosedSet>,
    pub b1_equals_b2: bool,
}

/// Close `start` under a binary operation, deduplicating by pair set.
fn close_under(
    start: Vec<RadicalClosedSet>,
    op: impl Fn(&RadicalClosedSet, &RadicalClosedSet) -> RadicalClosedSet,
    radicals: usize,
    opts: &Options,
) -> Result<Vec<RadicalClosedSet>> {
    let mut index: HashMap<PairSet, usize> = HashMap::new();
    let mut sets: Vec<RadicalClosedSet> = Vec::new();
    for s in start {
        if !index.contains_key(&s.pairs) {
            index.insert(s.pairs.clone(), sets.len());
            sets.push(s);
        }
    }
    let mut i = 0;
    while i < sets.len() {
        for j in 0..=i {
            let c = op(&sets[i], &sets[j]);
            if index.contains_key(&c.pairs) {
                continue;
            }
            if sets.len() + 1 > opts.max_entries {
                return Err(Error::Budget {
                    what: format!("closed sets generated from |B| = {radicals} radicals"),
                    needed: sets.len() as u128 + 1,
                    limit: opts.max_entries,
                });
            }
            index.insert(c.pairs.clone(), sets.len());
            sets.push(c);
        }
        i += 1;
    }
    sets.sort_by(|a, b| a.pairs.cmp(&b.pairs));
    Ok(sets)
}

/// Build `B`, then `B1` (finite nonempty unions) and `B2` (intersections of
/// `B1` members), and compare the two families.
pub fn compute_b1_b2(space: &AffineSpace, opts: &Options) -> Result<RadicalTopology> {
    let radicals = enumerate_radical_ideals(space, opts)?;
    let radical_pairs: Vec<PairSet> = radicals
        .iter()
        .map(|r| PairSet::from_congruence(&r.kernel))
        .collect();
    let leaves: Vec<RadicalClosedSet> = radical_pairs
        .iter()
        .enumerate()
        .map(|(i, p)| RadicalClosedSet {
            pairs: p.clone(),
            provenance: Provenance::Leaf(i),
        })
        .collect();
    let n = radicals.len();
    let b1 = close_under(leaves, |a, b| a.union(b).expect("same context"), n, opts)?;
    let b2 = close_under(
        b1.clone(),
        |a, b| a.intersection(b).expect("same context"),
        n,
        opts,
    )?;
    let b1_equals_b2 = b1.len() == b2.len() && b1.iter().zip(&b2).all(|(x, y)| x.pairs == y.pairs);
    Ok(RadicalTopology {
        radicals,
        radical_pairs,
        b1,
        b2,
        b1_equals_b2,
    })
}

/// True iff `c` is not the union of the closed sets of `universe` properly
/// contained in it. In a finite family closed under union and intersection
/// this is equivalent to having no proper finite closed cover.
pub fn is_irreducible(c: &PairSet, universe: &[RadicalClosedSet]) -> bool {
    if c.is_empty() {
        return false;
    }
    let mut below = PairSet::empty(c.universe());
    for d in universe {
        if d.pairs.is_proper_subset(c) {
            below = below.union(&d.pairs);
        }
    }
    &below != c
}

/// Maximal irreducible closed subsets of `c`, in canonical order. Fails if
/// they do not recompose `c` irredundantly.
pub fn irreducible_components(
    c: &PairSet,
    universe: &[RadicalClosedSet],
) -> Result<Vec<RadicalClosedSet>> {
    let irreducible: Vec<&RadicalClosedSet> = universe
        .iter()
        .filter(|d| d.pairs.is_subset(c) && is_irreducible(&d.pairs, universe))
        .collect();
    let mut comps: Vec<RadicalClosedSet> = irreducible
        .iter()
        .filter(|d| {
            !irreducible
                .iter()
                .any(|e| d.pairs.is_proper_subset(&e.pairs))
        })
        .map(|d| (*d).clone())
        .collect();
    comps.sort_by(|a, b| a.pairs.cmp(&b.pairs));

    let union = comps
        .iter()
        .fold(PairSet::empty(c.universe()), |acc, d| acc.union(&d.pairs));
    if &union != c {
        return Err(Error::invariant(
            "closed set is not the union of its irreducible closed subsets",
        ));
    }
    for (i, d) in comps.iter().enumerate() {
        let others = comps
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .fold(PairSet::empty(c.universe()), |acc, (_, e)| {
                acc.union(&e.pairs)
            });
        if d.pairs.is_subset(&others) {
            return Err(Error::invariant("irreducible decomposition is redundant"));
        }
    }
    Ok(comps)
}

impl RadicalTopology {
    pub fn closed_sets(&self) -> &[RadicalClosedSet] {
        &self.b2
    }

    /// Position of a closed set in `B2`.
    pub fn find_closed(&self, pairs: &PairSet) -> Option<usize> {
        self.b2.iter().position(|c| &c.pairs == pairs)
    }

    pub fn find_radical(&self, pairs: &PairSet) -> Option<usize> {
        self.radical_pairs.iter().position(|p| p == pairs)
    }

    pub fn is_irreducible(&self, c: &PairSet) -> bool {
        is_irreducible(c, &self.b2)
    }

    pub fn irreducible_components(&self, c: &PairSet) -> Result<Vec<RadicalClosedSet>> {
        if self.find_closed(c).is_none() {
            return Err(Error::semantic("set is not closed in the radical topology"));
        }
        irreducible_components(c, &self.b2)
    }

    /// The maximal radicals contained in `m`; their union must be `m`.
    pub fn radicals_covering(&self, m: &PairSet) -> Result<Vec<usize>> {
        let inside: Vec<usize> = (0..self.radicals.len())
            .filter(|&i| self.radical_pairs[i].is_subset(m))
            .collect();
        let maximal: Vec<usize> = inside
            .iter()
            .copied()
            .filter(|&i| {
                !inside
                    .iter()
                    .any(|&j| self.radical_pairs[i].is_proper_subset(&self.radical_pairs[j]))
            })
            .collect();
        let union = maximal
            .iter()
            .fold(PairSet::empty(m.universe()), |acc, &i| {
                acc.union(&self.radical_pairs[i])
            });
        if &union != m {
            return Err(Error::semantic(
                "set is not a finite union of radical ideals",
            ));
        }
        Ok(maximal)
    }

    /// Longest strictly descending chain of radical ideals, as indices into `B`.
    pub fn longest_radical_chain(&self) -> Vec<usize> {
        longest_strict_chain(&self.radical_pairs, |a, b| a.is_proper_subset(b))
    }

    pub fn longest_closed_chain(&self) -> Vec<usize> {
        let sets: Vec<&PairSet> = self.b2.iter().map(|c| &c.pairs).collect();
        longest_strict_chain(&sets, |a, b| a.is_proper_subset(b))
    }

    pub fn radical_height(&self) -> usize {
        self.longest_radical_chain().len()
    }

    pub fn closed_height(&self) -> usize {
        self.longest_closed_chain().len()
    }
}

/// Longest chain `x_0 ⊋ x_1 ⊋ ...` under `proper_sub(a, b)` meaning `a ⊊ b`,
/// returned largest first. Deterministic: ties go to lower indices.
pub fn longest_strict_chain<T>(items: &[T], proper_sub: impl Fn(&T, &T) -> bool) -> Vec<usize> {
    let n = items.len();
    // order by "number of proper subsets below" so every subset precedes its supersets
    let mut order: Vec<usize> = (0..n).collect();
    let below: Vec<usize> = (0..n)
        .map(|i| (0..n).filter(|&j| proper_sub(&items[j], &items[i])).count())
        .collect();
    order.sort_by_key(|&i| (below[i], i));
    // best[i] = longest chain ending (at the bottom) with... starting at i going down
    let mut best = vec![1usize; n];
    let mut next: Vec<Option<usize>> = vec![None; n];
    for &i in &order {
        for j in 0..n {
            if proper_sub(&items[j], &items[i])
                && (best[j] + 1 > best[i]
                    || (best[j] + 1 == best[i] && next[i].is_some_and(|k| j < k)))
            {
                best[i] = best[j] + 1;
                next[i] = Some(j);
            }
        }
    }
    let Some(start) = (0..n).max_by(|&a, &b| best[a].cmp(&best[b]).then(b.cmp(&a))) else {
        return Vec::new();
    };
    let mut chain = vec![start];
    let mut cur = start;
    while let Some(j) = next[cur] {
        chain.push(j);
        cur = j;
    }
    chain
}

/// Large-set decomposition: `Y = ∩ Y_i` where the `Rad(Y_i)` are drawn from
/// the irreducible components of `Rad(Y)`, pruned to an irredundant family.
/// Returned in canonical point-set order.
pub fn large_decomposition(
    space: &AffineSpace,
    topo: &RadicalTopology,
    y: &PointSet,
) -> Result<Vec<PointSet>> {
    if !space.is_algebraic(y)? {
        return Err(Error::semantic(format!("{y} is not an algebraic set")));
    }
    let rad = PairSet::from_congruence(&space.radical_kernel(y));
    let comps = topo.irreducible_components(&rad)?;
    let mut parts = Vec::with_capacity(comps.len());
    for c in &comps {
        let i = topo
            .find_radical(&c.pairs)
            .ok_or_else(|| Error::invariant("irreducible closed set is not a radical ideal"))?;
        let yi = topo.radicals[i].canonical_set.clone();
        if !topo.is_irreducible(&topo.radical_pairs[i]) {
            return Err(Error::invariant(
                "component of a large decomposition is not large",
            ));
        }
        parts.push(yi);
    }
    parts.sort();
    parts.dedup();
    let meet = |ps: &[PointSet]| ps.iter().fold(space.full(), |acc, p| acc.intersection(p));
    if &meet(&parts) != y {
        return Err(Error::invariant(
            "large decomposition does not recompose the algebraic set",
        ));
    }
    // Irredundant components of Rad(Y) can still give redundant large sets,
    // since Rad(Y1 ∩ Y2) may be strictly larger than Rad(Y1) ∪ Rad(Y2).
    let mut i = 0;
    while parts.len() > 1 && i < parts.len() {
        let mut rest = parts.clone();
        rest.remove(i);
        if &meet(&rest) == y {
            parts = rest;
        } else {
            i += 1;
        }
    }
    Ok(parts)
}

/// A vertex of the tree built from a strictly descending chain in `B1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceNode {
    /// Index of the vertex's radical ideal in `B`.
    pub radical: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Chain position at which the vertex first appeared.
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KonigTrace {
    pub nodes: Vec<TraceNode>,
    pub roots: Vec<usize>,
    pub chain_len: usize,
    pub max_branching: usize,
    /// Vertices on the longest root-to-leaf path.
    pub max_path_len: usize,
}

impl KonigTrace {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Build the tree whose roots are the radicals of `M_1` and whose edges go
/// from a vertex `R` to `R ∩ R'` for each radical `R'` of the next chain
/// member whenever the intersection is strictly smaller. A vertex with
/// `R ⊆ R'` carries over to the next level unchanged.
pub fn konig_trace(topo: &RadicalTopology, chain: &[PairSet]) -> Result<KonigTrace> {
    if chain.is_empty() {
        return Err(Error::semantic("chain is empty"));
    }
    for w in chain.windows(2) {
        if !w[1].is_proper_subset(&w[0]) {
            return Err(Error::semantic("chain is not strictly descending"));
        }
    }
    let levels: Vec<Vec<usize>> = chain
        .iter()
        .map(|m| topo.radicals_covering(m))
        .collect::<Result<_>>()?;

    let mut nodes: Vec<TraceNode> = levels[0]
        .iter()
        .map(|&r| TraceNode {
            radical: r,
            parent: None,
            children: Vec::new(),
            level: 0,
        })
        .collect();
    let roots: Vec<usize> = (0..nodes.len()).collect();
    let mut frontier = roots.clone();

    for (k, level) in levels.iter().enumerate().skip(1) {
        let mut next_frontier = Vec::new();
        for &v in &frontier {
            let here = topo.radical_pairs[nodes[v].radical].clone();
            let mut persists = false;
            for &r in level {
                let meet = here.intersection(&topo.radical_pairs[r]);
                if meet == here {
                    persists = true;
                    continue;
                }
                let ri = topo.find_radical(&meet).ok_or_else(|| {
                    Error::invariant("intersection of radical ideals is not a radical ideal")
                })?;
                if nodes[v].children.iter().any(|&c| nodes[c].radical == ri) {
                    continue;
                }
                let id = nodes.len();
                nodes.push(TraceNode {
                    radical: ri,
                    parent: Some(v),
                    children: Vec::new(),
                    level: k,
                });
                nodes[v].children.push(id);
                next_frontier.push(id);
            }
            if persists {
                next_frontier.push(v);
            }
        }
        let covered = next_frontier
            .iter()
            .fold(PairSet::empty(chain[k].universe()), |acc, &v| {
                acc.union(&topo.radical_pairs[nodes[v].radical])
            });
        if covered != chain[k] {
            return Err(Error::invariant(
                "trace level does not recompose its chain member",
            ));
        }
        frontier = next_frontier;
    }

    for n in &nodes {
        if let Some(p) = n.parent {
            if !topo.radical_pairs[n.radical]
                .is_proper_subset(&topo.radical_pairs[nodes[p].radical])
            {
                return Err(Error::invariant("trace edge does not strictly decrease"));
            }
        }
    }

    let mut depth = vec![0usize; nodes.len()];
    for i in 0..nodes.len() {
        depth[i] = match nodes[i].parent {
            Some(p) => depth[p] + 1,
            None => 1,
        };
    }
    Ok(KonigTrace {
        max_branching: nodes.iter().map(|n| n.children.len()).max().unwrap_or(0),
        max_path_len: depth.iter().copied().max().unwrap_or(0),
        chain_len: chain.len(),
        roots,
        nodes,
    })
}

/// All Zariski-closed subsets of `A^n`: algebraic sets closed under finite
/// unions (including the empty union) and intersections. Canonical order.
pub fn enumerate_zariski_closed(
    space: &AffineSpace,
    radicals: &[RadicalIdeal],
    opts: &Options,
) -> Result<Vec<ZariskiClosedSet>> {
    let mut algebraic: Vec<PointSet> = radicals.iter().map(|r| r.canonical_set.clone()).collect();
    algebraic.sort();
    algebraic.dedup();
    for y in &algebraic {
        if !space.is_algebraic(y)? {
            return Err(Error::invariant(
                "canonical set of a radical is not algebraic",
            ));
        }
    }

    let mut index: HashMap<PointSet, usize> = HashMap::new();
    let mut sets: Vec<ZariskiClosedSet> = Vec::new();
    let mut add = |z: ZariskiClosedSet, sets: &mut Vec<ZariskiClosedSet>| -> Result<()> {
        if index.contains_key(&z.points) {
            return Ok(());
        }
        opts.guard(
            || "Zariski closed-set enumeration".to_string(),
            sets.len() as u128 + 1,
        )?;
        index.insert(z.points.clone(), sets.len());
        sets.push(z);
        Ok(())
    };
    add(
        ZariskiClosedSet {
            points: space.empty(),
            provenance: Provenance::Union(Vec::new()),
        },
        &mut sets,
    )?;
    for (i, y) in algebraic.iter().enumerate() {
        add(
            ZariskiClosedSet {
                points: y.clone(),
                provenance: Provenance::Leaf(i),
            },
            &mut sets,
        )?;
    }
    for combine_union in [true, false] {
        let mut i = 0;
        while i < sets.len() {
            for j in 0..=i {
                let (a, b) = (&sets[i], &sets[j]);
                let z = if combine_union {
                    ZariskiClosedSet {
                        points: a.points.union(&b.points),
                        provenance: Provenance::union(&a.provenance, &b.provenance),
                    }
                } else {
                    ZariskiClosedSet {
                        points: a.points.intersection(&b.points),
                        provenance: Provenance::intersection(&a.provenance, &b.provenance),
                    }
                };
                add(z, &mut sets)?;
            }
            i += 1;
        }
    }
    sets.sort_by(|a, b| a.points.cmp(&b.points));
    Ok(sets)
}

/// Algebraic sets in canonical order (the leaves of Zariski provenance).
pub fn algebraic_sets(radicals: &[RadicalIdeal]) -> Vec<PointSet> {
    let mut out: Vec<PointSet> = radicals.iter().map(|r| r.canonical_set.clone()).collect();
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebras::corpus::*;
    use crate::terms::parse_term;

    fn setup(a: &crate::algebras::FiniteAlgebra, n: usize) -> (AffineSpace, RadicalTopology) {
        let opts = Options::default();
        let sp = AffineSpace::new(a, n, &opts).unwrap();
        let topo = compute_b1_b2(&sp, &opts).unwrap();
        (sp, topo)
    }

    #[test]
    fn radical_enumeration_examples() {
        let (sp, topo) = setup(&z2_group(), 1);
        assert_eq!(topo.radicals.len(), 2);
        assert!(topo.radicals[0].kernel.is_identity());
        assert_eq!(topo.radicals[0].canonical_set, sp.full());
        assert!(topo.radicals[1].kernel.is_total());
        assert_eq!(topo.radicals[1].canonical_set.indices(), vec![0]);

        let (_, topo) = setup(&sl2(), 1);
        assert_eq!(topo.radicals.len(), 1);

        // a one-point space: the trivial algebra
        let sig = std::sync::Arc::new(crate::terms::Signature::new([("f", 1)]).unwrap());
        let triv = crate::algebras::FiniteAlgebra::new(sig, 1, vec![vec![0]]).unwrap();
        let (_, topo) = setup(&triv, 2);
        assert_eq!(topo.radicals.len(), 1);
    }

    #[test]
    fn closed_set_algebra() {
        let (sp, topo) = setup(&z2_group(), 1);
        let total = RadicalClosedSet {
            pairs: topo.radical_pairs[1].clone(),
            provenance: Provenance::Leaf(1),
        };
        let ident = RadicalClosedSet {
            pairs: topo.radical_pairs[0].clone(),
            provenance: Provenance::Leaf(0),
        };
        assert_eq!(total.union(&total).unwrap(), total);
        assert_eq!(total.intersection(&total).unwrap(), total);
        assert_eq!(total.intersection(&ident).unwrap(), ident);
        let sig = sp.algebra().signature();
        let phi = AtomicFormula::new(
            parse_term("mul(x1,x1)", sig, 1).unwrap(),
            parse_term("e", sig, 1).unwrap(),
        );
        assert!(total.contains_formula(&sp, &phi).unwrap());
        assert!(ident.contains_formula(&sp, &phi).unwrap());
        let psi = AtomicFormula::new(Term::var(1), parse_term("e", sig, 1).unwrap());
        assert!(total.contains_formula(&sp, &psi).unwrap());
        assert!(!ident.contains_formula(&sp, &psi).unwrap());

        let (_, other) = setup(&z3_group(), 1);
        let foreign = RadicalClosedSet {
            pairs: other.radical_pairs[0].clone(),
            provenance: Provenance::Leaf(0),
        };
        assert!(total.union(&foreign).is_err());
    }

    use crate::terms::Term;

    #[test]
    fn b1_b2_examples() {
        let (_, topo) = setup(&z2_group(), 1);
        assert_eq!(topo.b1.len(), 2);
        assert!(topo.b1_equals_b2);
        let (_, topo) = setup(&sl2(), 1);
        assert_eq!(topo.b1.len(), 1);
        assert!(topo.b1_equals_b2);
        for a in all() {
            for n in 1..=2 {
                let (_, topo) = setup(&a, n);
                assert!(topo.b1_equals_b2, "{:?} n={n}", a.name());
                for c in &topo.b2 {
                    assert!(c.pairs.is_reflexive_symmetric());
                    let rebuilt = c.provenance.eval(
                        &|i| topo.radical_pairs[i].clone(),
                        &|x: &PairSet, y: &PairSet| x.union(y),
                        &|x: &PairSet, y: &PairSet| x.intersection(y),
                        &PairSet::empty(c.pairs.universe()),
                        &PairSet::full(c.pairs.universe()),
                    );
                    assert_eq!(rebuilt, c.pairs);
                }
            }
        }
    }

    #[test]
    fn irreducibility_examples() {
        let (_, topo) = setup(&z2_group(), 1);
        assert!(topo.is_irreducible(&topo.radical_pairs[1]));
        assert!(topo.is_irreducible(&topo.radical_pairs[0]));
        let comps = topo.irreducible_components(&topo.radical_pairs[1]).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].pairs, topo.radical_pairs[1]);
    }

    #[test]
    fn z2_plane_total_relation_is_reducible() {
        // Rad(0) is covered by the radicals of the three lines through 0
        let (sp, topo) = setup(&z2_group(), 2);
        let total = PairSet::full(sp.free().len());
        assert!(!topo.is_irreducible(&total));
        let comps = topo.irreducible_components(&total).unwrap();
        assert_eq!(comps.len(), 3);
        let parts = large_decomposition(&sp, &topo, &PointSet::from_indices(2, 2, [0])).unwrap();
        // any two of the three lines already meet in the origin
        assert_eq!(parts.len(), 2);
        assert!(parts.iter().all(|p| p.len() == 2 && p.contains(0)));
    }

    #[test]
    fn absorbed_union_has_single_component() {
        let (_, topo) = setup(&sl2(), 2);
        let small = &topo.radical_pairs[0];
        let big = topo.radical_pairs.last().unwrap();
        assert!(small.is_subset(big));
        let comps = topo.irreducible_components(&small.union(big)).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(&comps[0].pairs, big);
    }

    #[test]
    fn large_decomposition_examples() {
        let (sp, topo) = setup(&z2_group(), 1);
        assert_eq!(
            large_decomposition(&sp, &topo, &sp.full()).unwrap(),
            vec![sp.full()]
        );
        let zero = PointSet::from_indices(2, 1, [0]);
        assert_eq!(large_decomposition(&sp, &topo, &zero).unwrap(), vec![zero]);
        let one = PointSet::from_indices(2, 1, [1]);
        assert!(large_decomposition(&sp, &topo, &one).is_err());
    }

    #[test]
    fn konig_examples() {
        let (_, topo) = setup(&z2_group(), 1);
        let t = konig_trace(&topo, &topo.radical_pairs[1..2]).unwrap();
        assert_eq!((t.node_count(), t.max_path_len), (1, 1));
        let chain = vec![topo.radical_pairs[1].clone(), topo.radical_pairs[0].clone()];
        let t = konig_trace(&topo, &chain).unwrap();
        assert_eq!(t.node_count(), 2);
        assert_eq!(t.max_path_len, 2);
        assert_eq!(t.nodes[1].parent, Some(0));
        let bad = vec![topo.radical_pairs[0].clone(), topo.radical_pairs[1].clone()];
        assert!(konig_trace(&topo, &bad).is_err());
        assert!(konig_trace(&topo, &[]).is_err());
    }

    #[test]
    fn konig_on_b1_chain_through_a_union() {
        let (_, topo) = setup(&z2_group(), 2);
        let chain: Vec<PairSet> = topo
            .longest_closed_chain()
            .into_iter()
            .map(|i| topo.b2[i].pairs.clone())
            .collect();
        // total ⊃ R1∪R2 ⊃ R1 ⊃ identity
        assert_eq!(chain.len(), 4);
        let t = konig_trace(&topo, &chain).unwrap();
        assert_eq!(t.max_path_len, topo.radical_height());
        assert!(t.node_count() >= chain.len() - 1);
    }

    #[test]
    fn zariski_examples() {
        let (sp, topo) = setup(&z2_group(), 1);
        let z = enumerate_zariski_closed(&sp, &topo.radicals, &Options::default()).unwrap();
        let sets: Vec<Vec<usize>> = z.iter().map(|c| c.points.indices()).collect();
        assert_eq!(sets, vec![vec![], vec![0], vec![0, 1]]);
        let (sp, topo) = setup(&sl2(), 1);
        let z = enumerate_zariski_closed(&sp, &topo.radicals, &Options::default()).unwrap();
        let sets: Vec<Vec<usize>> = z.iter().map(|c| c.points.indices()).collect();
        assert_eq!(sets, vec![vec![], vec![0, 1]]);
    }

    #[test]
    fn longest_chain_on_a_total_order() {
        let items = vec![3usize, 1, 2, 0];
        let chain = longest_strict_chain(&items, |a, b| a < b);
        assert_eq!(chain, vec![0, 2, 1, 3]);
        assert!(longest_strict_chain::<usize>(&[], |a, b| a < b).is_empty());
    }
}
