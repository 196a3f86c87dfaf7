//! Brute-force reference computations for the integration tests.
//!
//! Everything here works on raw value vectors and point tuples and uses only
//! `FiniteAlgebra::apply`, so it shares no code with the free-algebra,
//! geometry or topology modules it is used to check.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use uag::algebras::FiniteAlgebra;

/// Value vector of a term function over all `m^n` points.
pub type Vector = Vec<usize>;

pub fn points(m: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..m).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

fn tuples(len: usize, k: usize) -> Vec<Vec<usize>> {
    points(len, k)
}

/// All term functions `A^n → A`: close the projections and constants under
/// every operation until nothing new appears. Sorted.
pub fn term_functions(a: &FiniteAlgebra, n: usize) -> Vec<Vector> {
    let pts = points(a.size(), n);
    let mut set: BTreeSet<Vector> = (0..n).map(|i| pts.iter().map(|p| p[i]).collect()).collect();
    let sig = a.signature();
    loop {
        let current: Vec<Vector> = set.iter().cloned().collect();
        let mut grew = false;
        for op in 0..sig.len() {
            let k = sig.arity(op);
            for args in tuples(current.len(), k) {
                let v: Vector = (0..pts.len())
                    .map(|p| {
                        let vals: Vec<usize> = args.iter().map(|&i| current[i][p]).collect();
                        a.apply(op, &vals)
                    })
                    .collect();
                grew |= set.insert(v);
            }
        }
        if !grew {
            return set.into_iter().collect();
        }
    }
}

/// `Rad(E)` as the set of unordered pairs of distinct term functions that
/// agree on every point of `E` (points given by index).
pub fn radical(fns: &[Vector], e: &[usize]) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for f in 0..fns.len() {
        for g in f + 1..fns.len() {
            if e.iter().all(|&p| fns[f][p] == fns[g][p]) {
                out.insert((f, g));
            }
        }
    }
    out
}

/// `V` of a set of pairs of term functions, as sorted point indices.
pub fn variety(fns: &[Vector], pairs: &BTreeSet<(usize, usize)>, num_points: usize) -> Vec<usize> {
    (0..num_points)
        .filter(|&p| pairs.iter().all(|&(f, g)| fns[f][p] == fns[g][p]))
        .collect()
}

pub fn closure(fns: &[Vector], e: &[usize], num_points: usize) -> Vec<usize> {
    variety(fns, &radical(fns, e), num_points)
}

pub fn subsets(num_points: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..1u64 << num_points)
        .map(move |mask| (0..num_points).filter(|&i| mask >> i & 1 == 1).collect())
}

/// Every algebraic set, as the closures of all subsets. Sorted by size,
/// then lexicographically.
pub fn algebraic_sets(fns: &[Vector], num_points: usize) -> Vec<Vec<usize>> {
    let set: HashSet<Vec<usize>> = subsets(num_points)
        .map(|e| closure(fns, &e, num_points))
        .collect();
    let mut out: Vec<Vec<usize>> = set.into_iter().collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Finite unions and intersections of algebraic sets, plus the empty set.
pub fn zariski_closed(fns: &[Vector], num_points: usize) -> Vec<Vec<usize>> {
    let mut set: BTreeSet<BTreeSet<usize>> = algebraic_sets(fns, num_points)
        .into_iter()
        .map(|y| y.into_iter().collect())
        .collect();
    set.insert(BTreeSet::new());
    loop {
        let current: Vec<BTreeSet<usize>> = set.iter().cloned().collect();
        let mut grew = false;
        for a in &current {
            for b in &current {
                grew |= set.insert(a.union(b).copied().collect());
                grew |= set.insert(a.intersection(b).copied().collect());
            }
        }
        if !grew {
            break;
        }
    }
    let mut out: Vec<Vec<usize>> = set.into_iter().map(|s| s.into_iter().collect()).collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// Length (in members) of the longest strict chain under `lt`, by
/// exhaustive depth-first search.
pub fn longest_chain<T>(items: &[T], lt: impl Fn(&T, &T) -> bool + Copy) -> usize {
    fn from<T>(
        items: &[T],
        i: usize,
        lt: impl Fn(&T, &T) -> bool + Copy,
        memo: &mut Vec<Option<usize>>,
    ) -> usize {
        if let Some(v) = memo[i] {
            return v;
        }
        let best = (0..items.len())
            .filter(|&j| lt(&items[i], &items[j]))
            .map(|j| 1 + from(items, j, lt, memo))
            .max()
            .unwrap_or(1);
        memo[i] = Some(best);
        best
    }
    let mut memo = vec![None; items.len()];
    (0..items.len())
        .map(|i| from(items, i, lt, &mut memo))
        .max()
        .unwrap_or(0)
}

pub fn proper_subset<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> bool {
    a.len() < b.len() && a.is_subset(b)
}

/// All distinct radicals `Rad(E)` for `E ⊆ A^n`.
pub fn radicals(fns: &[Vector], num_points: usize) -> Vec<BTreeSet<(usize, usize)>> {
    let set: BTreeSet<BTreeSet<(usize, usize)>> =
        subsets(num_points).map(|e| radical(fns, &e)).collect();
    set.into_iter().collect()
}

/// Height of the lattice of radicals: the longest strictly descending chain.
pub fn radical_height(fns: &[Vector], num_points: usize) -> usize {
    longest_chain(&radicals(fns, num_points), proper_subset)
}

/// Reduced product classes by the defining relation: tuples `a`, `b` of
/// `A^k` are related iff the set of agreeing coordinates is in the filter.
pub fn reduced_product_classes(m: usize, k: usize, in_filter: impl Fn(u64) -> bool) -> usize {
    let pts = points(m, k);
    let mut reps: Vec<usize> = Vec::new();
    for (i, a) in pts.iter().enumerate() {
        let related = reps.iter().any(|&r| {
            let agree = (0..k)
                .filter(|&c| pts[r][c] == a[c])
                .fold(0u64, |acc, c| acc | 1 << c);
            in_filter(agree)
        });
        if !related {
            reps.push(i);
        }
    }
    reps.len()
}
pub mod golden;
