//! Finite algebras on carriers `0..m`, their congruences and homomorphisms.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::options::{checked_pow, Options};
use crate::terms::{OpId, Signature, Term};

/// Algebra with carrier `0..size` and a total dense table per operation.
///
/// The table of a `k`-ary operation has `size^k` entries in row-major
/// order: the first argument is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteAlgebra {
    sig: Arc<Signature>,
    size: usize,
    tables: Vec<Vec<usize>>,
    name: Option<String>,
}

/// Index of `args` in a row-major table over a carrier of size `m`.
#[inline]
pub(crate) fn table_index(m: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &a| acc * m + a)
}

/// Digits of `idx` in base `m`, most significant first, padded to `len`.
pub fn decode_tuple(mut idx: usize, m: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = idx % m;
        idx /= m;
    }
    out
}

pub fn encode_tuple(m: usize, digits: &[usize]) -> usize {
    table_index(m, digits)
}

/// Calls `f` on every tuple in `0..m` of length `k`, lexicographically.
pub(crate) fn for_each_tuple(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut tuple = vec![0usize; k];
    if k > 0 && m == 0 {
        return;
    }
    loop {
        f(&tuple);
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < m {
                break;
            }
            tuple[pos] = 0;
        }
    }
}

impl FiniteAlgebra {
    /// Validates table lengths and entry ranges.
    pub fn new(sig: Arc<Signature>, size: usize, tables: Vec<Vec<usize>>) -> Result<Self> {
        if size == 0 {
            return Err(Error::semantic("algebra carrier must be nonempty"));
        }
        if tables.len() != sig.len() {
            return Err(Error::semantic(format!(
                "expected {} operation tables, got {}",
                sig.len(),
                tables.len()
            )));
        }
        for (op, table) in tables.iter().enumerate() {
            let sym = sig.op(op);
            let want = checked_pow(size, sym.arity);
            if table.len() as u128 != want {
                return Err(Error::semantic(format!(
                    "table for {} has {} entries, expected {}",
                    sym.name,
                    table.len(),
                    want
                )));
            }
            if let Some(bad) = table.iter().find(|&&v| v >= size) {
                return Err(Error::semantic(format!(
                    "table for {} has value {bad} outside carrier 0..{}",
                    sym.name,
                    size - 1
                )));
            }
        }
        Ok(FiniteAlgebra {
            sig,
            size,
            tables,
            name: None,
        })
    }

    /// Tabulate `f` for every operation.
    pub fn from_fn(
        sig: Arc<Signature>,
        size: usize,
        opts: &Options,
        f: impl Fn(OpId, &[usize]) -> usize,
    ) -> Result<Self> {
        let mut tables = Vec::with_capacity(sig.len());
        for (op, sym) in sig.ops().iter().enumerate() {
            opts.guard(
                || format!("table of {}", sym.name),
                checked_pow(size, sym.arity),
            )?;
            let mut table = Vec::with_capacity(size.pow(sym.arity as u32));
            for_each_tuple(size, sym.arity, |args| table.push(f(op, args)));
            tables.push(table);
        }
        FiniteAlgebra::new(sig, size, tables)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn signature_arc(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn table(&self, op: OpId) -> &[usize] {
        &self.tables[op]
    }

    #[inline]
    pub fn apply(&self, op: OpId, args: &[usize]) -> usize {
        self.tables[op][table_index(self.size, args)]
    }

    /// Value of `t` at `point`; variable `xi` reads `point[i-1]`.
    pub fn eval_term(&self, t: &Term, point: &[usize]) -> usize {
        match t {
            Term::Var(i) => point[*i - 1],
            Term::App(op, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.eval_term(a, point)).collect();
                self.apply(*op, &vals)
            }
        }
    }

    /// Direct power `A^k`, carrier encoded lexicographically.
    pub fn power(&self, k: usize, opts: &Options) -> Result<FiniteAlgebra> {
        if k == 0 {
            return Err(Error::semantic("power exponent must be positive"));
        }
        let m = self.size;
        let carrier = checked_pow(m, k);
        opts.guard(|| format!("carrier of power {k}"), carrier)?;
        let size = carrier as usize;
        let decoded: Vec<Vec<usize>> = (0..size).map(|i| decode_tuple(i, m, k)).collect();
        // digit c of every argument tuple, so a range loop reads best
        #[allow(clippy::needless_range_loop)]
        let pw = FiniteAlgebra::from_fn(self.sig.clone(), size, opts, |op, args| {
            let mut coord = vec![0; args.len()];
            let mut out = 0;
            for c in 0..k {
                for (slot, &a) in coord.iter_mut().zip(args) {
                    *slot = decoded[a][c];
                }
                out = out * m + self.apply(op, &coord);
            }
            out
        })?;
        Ok(match &self.name {
            Some(n) => pw.with_name(format!("{n}^{k}")),
            None => pw,
        })
    }

    /// Least subset containing `seed` and every constant, closed under all
    /// operations. Returned sorted.
    pub fn subalgebra_closure(&self, seed: &[usize]) -> Vec<usize> {
        let mut member = vec![false; self.size];
        let mut elems = Vec::new();
        for &s in seed {
            if !member[s] {
                member[s] = true;
                elems.push(s);
            }
        }
        for c in self.sig.constants() {
            let v = self.apply(c, &[]);
            if !member[v] {
                member[v] = true;
                elems.push(v);
            }
        }
        // each round only needs tuples that touch an element added last round
        let mut done = 0;
        loop {
            let count = elems.len();
            if count == done {
                break;
            }
            for (op, sym) in self.sig.ops().iter().enumerate() {
                if sym.arity == 0 {
                    continue;
                }
                let mut args = vec![0; sym.arity];
                for_each_tuple(count, sym.arity, |pos| {
                    if pos.iter().all(|&p| p < done) {
                        return;
                    }
                    for (slot, &p) in args.iter_mut().zip(pos) {
                        *slot = elems[p];
                    }
                    let v = self.apply(op, &args);
                    if !member[v] {
                        member[v] = true;
                        elems.push(v);
                    }
                });
            }
            done = count;
        }
        elems.sort_unstable();
        elems
    }

    /// The subalgebra on `elements` (sorted, closed), relabelled `0..len`,
    /// with its embedding into `self`.
    pub fn restrict(&self, elements: &[usize]) -> Result<(FiniteAlgebra, HomMap)> {
        if elements.is_empty() {
            return Err(Error::semantic("subalgebra carrier must be nonempty"));
        }
        let mut index = vec![usize::MAX; self.size];
        for (i, &e) in elements.iter().enumerate() {
            index[e] = i;
        }
        let mut tables = Vec::with_capacity(self.sig.len());
        for (op, sym) in self.sig.ops().iter().enumerate() {
            let mut table = Vec::new();
            let mut args = vec![0; sym.arity];
            let mut closed = true;
            for_each_tuple(elements.len(), sym.arity, |pos| {
                for (slot, &p) in args.iter_mut().zip(pos) {
                    *slot = elements[p];
                }
                let v = index[self.apply(op, &args)];
                closed &= v != usize::MAX;
                table.push(v);
            });
            if !closed {
                return Err(Error::semantic(format!(
                    "element set is not closed under {}",
                    sym.name
                )));
            }
            tables.push(table);
        }
        let sub = FiniteAlgebra::new(self.sig.clone(), elements.len(), tables)?;
        Ok((sub, HomMap::new(elements.to_vec())))
    }

    /// Least congruence containing `pairs`.
    pub fn congruence_closure(&self, pairs: &[(usize, usize)]) -> Congruence {
        let mut uf = UnionFind::new(self.size);
        for &(a, b) in pairs {
            uf.union(a, b);
        }
        let mut sigs: HashMap<(OpId, Vec<usize>), usize> = HashMap::new();
        let mut key = Vec::new();
        loop {
            let mut merged = false;
            sigs.clear();
            for (op, sym) in self.sig.ops().iter().enumerate() {
                if sym.arity == 0 {
                    continue;
                }
                let table = &self.tables[op];
                let mut flat = 0;
                for_each_tuple(self.size, sym.arity, |args| {
                    key.clear();
                    key.extend(args.iter().map(|&a| uf.find(a)));
                    let val = table[flat];
                    flat += 1;
                    match sigs.get(&(op, key.clone())) {
                        Some(&other) => {
                            if uf.union(other, val) {
                                merged = true;
                            }
                        }
                        None => {
                            sigs.insert((op, key.clone()), val);
                        }
                    }
                });
            }
            if !merged {
                break;
            }
        }
        Congruence::from_labels(&(0..self.size).map(|x| uf.find(x)).collect::<Vec<_>>())
    }

    /// Quotient by a compatible congruence and the projection onto it.
    /// Classes are numbered by increasing least representative.
    pub fn quotient(&self, theta: &Congruence) -> Result<(FiniteAlgebra, HomMap)> {
        if theta.len() != self.size {
            return Err(Error::semantic(format!(
                "congruence is on {} elements, algebra has {}",
                theta.len(),
                self.size
            )));
        }
        if !theta.is_compatible(self) {
            return Err(Error::invariant("quotient by a non-compatible equivalence"));
        }
        let reps = theta.representatives();
        let mut class_of_rep = vec![usize::MAX; self.size];
        for (i, &r) in reps.iter().enumerate() {
            class_of_rep[r] = i;
        }
        let proj: Vec<usize> = (0..self.size).map(|x| class_of_rep[theta.rep(x)]).collect();
        let mut tables = Vec::with_capacity(self.sig.len());
        for (op, sym) in self.sig.ops().iter().enumerate() {
            let mut table = Vec::new();
            let mut args = vec![0; sym.arity];
            for_each_tuple(reps.len(), sym.arity, |cls| {
                for (slot, &c) in args.iter_mut().zip(cls) {
                    *slot = reps[c];
                }
                table.push(proj[self.apply(op, &args)]);
            });
            tables.push(table);
        }
        let q = FiniteAlgebra::new(self.sig.clone(), reps.len(), tables)?;
        Ok((q, HomMap::new(proj)))
    }

    /// Lexicographically least isomorphism `self → other`, if any.
    pub fn find_isomorphism(
        &self,
        other: &FiniteAlgebra,
        opts: &Options,
    ) -> Result<Option<HomMap>> {
        if self.sig != other.sig {
            return Err(Error::semantic("isomorphism search needs equal signatures"));
        }
        if self.size != other.size {
            return Ok(None);
        }
        let mut search = IsoSearch {
            a: self,
            b: other,
            image: vec![usize::MAX; self.size],
            used: vec![false; self.size],
            nodes: 0,
            budget: opts.iso_node_budget,
        };
        Ok(search.run(0)?.then(|| HomMap::new(search.image)))
    }

    pub fn display_tables(&self) -> impl fmt::Display + '_ {
        struct D<'a>(&'a FiniteAlgebra);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let a = self.0;
                for (op, sym) in a.sig.ops().iter().enumerate() {
                    if sym.arity == 0 {
                        writeln!(f, "const {} = {}", sym.name, a.apply(op, &[]))?;
                        continue;
                    }
                    write!(f, "table {}:", sym.name)?;
                    let mut i = 0;
                    for_each_tuple(a.size, sym.arity, |args| {
                        let parts: Vec<String> = args.iter().map(|x| x.to_string()).collect();
                        let _ = write!(f, " {}={}", parts.join(","), a.tables[op][i]);
                        i += 1;
                    });
                    writeln!(f)?;
                }
                Ok(())
            }
        }
        D(self)
    }
}

struct IsoSearch<'a> {
    a: &'a FiniteAlgebra,
    b: &'a FiniteAlgebra,
    image: Vec<usize>,
    used: Vec<bool>,
    nodes: u64,
    budget: u64,
}

impl IsoSearch<'_> {
    fn run(&mut self, next: usize) -> Result<bool> {
        if next == self.a.size {
            return Ok(true);
        }
        for cand in 0..self.b.size {
            if self.used[cand] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::Budget {
                    what: "isomorphism search nodes".into(),
                    needed: self.nodes as u128,
                    limit: self.budget as usize,
                });
            }
            self.image[next] = cand;
            self.used[cand] = true;
            if self.consistent(next) && self.run(next + 1)? {
                return Ok(true);
            }
            self.used[cand] = false;
            self.image[next] = usize::MAX;
        }
        Ok(false)
    }

    /// Check every table entry whose arguments all lie in `0..=last`.
    fn consistent(&self, last: usize) -> bool {
        let assigned = last + 1;
        let mut mapped = Vec::new();
        for (op, sym) in self.a.sig.ops().iter().enumerate() {
            let mut ok = true;
            for_each_tuple(assigned, sym.arity, |args| {
                if !ok {
                    return;
                }
                let r = self.a.apply(op, args);
                mapped.clear();
                mapped.extend(args.iter().map(|&x| self.image[x]));
                let v = self.b.apply(op, &mapped);
                ok = if r <= last {
                    self.image[r] == v
                } else {
                    // r is still unassigned, so its forced image must be free
                    !self.used[v]
                };
            });
            if !ok {
                return false;
            }
        }
        true
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merge so the smaller root survives. Returns whether classes changed.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// An equivalence relation on `0..len`, stored as least class representatives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Congruence {
    rep: Vec<usize>,
}

impl Congruence {
    pub fn identity(len: usize) -> Self {
        Congruence {
            rep: (0..len).collect(),
        }
    }

    pub fn total(len: usize) -> Self {
        Congruence { rep: vec![0; len] }
    }

    /// Canonicalize arbitrary class labels: equal labels, same class.
    pub fn from_labels<L: Eq + std::hash::Hash + Clone>(labels: &[L]) -> Self {
        let mut first: HashMap<L, usize> = HashMap::with_capacity(labels.len());
        let rep = labels
            .iter()
            .enumerate()
            .map(|(i, l)| *first.entry(l.clone()).or_insert(i))
            .collect();
        Congruence { rep }
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rep.is_empty()
    }

    #[inline]
    pub fn rep(&self, x: usize) -> usize {
        self.rep[x]
    }

    #[inline]
    pub fn related(&self, a: usize, b: usize) -> bool {
        self.rep[a] == self.rep[b]
    }

    /// Least representatives, ascending.
    pub fn representatives(&self) -> Vec<usize> {
        (0..self.rep.len()).filter(|&x| self.rep[x] == x).collect()
    }

    pub fn num_classes(&self) -> usize {
        self.rep
            .iter()
            .enumerate()
            .filter(|&(i, &r)| i == r)
            .count()
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.rep.len()];
        for (x, &r) in self.rep.iter().enumerate() {
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(x);
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.rep.iter().enumerate().all(|(i, &r)| i == r)
    }

    pub fn is_total(&self) -> bool {
        self.rep.iter().all(|&r| r == 0)
    }

    /// `self ⊆ other` as relations.
    pub fn is_finer_than(&self, other: &Congruence) -> bool {
        self.rep
            .iter()
            .enumerate()
            .all(|(x, &r)| other.rep[x] == other.rep[r])
    }

    pub fn meet(&self, other: &Congruence) -> Congruence {
        let labels: Vec<(usize, usize)> = self
            .rep
            .iter()
            .copied()
            .zip(other.rep.iter().copied())
            .collect();
        Congruence::from_labels(&labels)
    }

    /// Compatibility with every operation of `alg`, checked exhaustively.
    pub fn is_compatible(&self, alg: &FiniteAlgebra) -> bool {
        if self.len() != alg.size() {
            return false;
        }
        // it suffices to vary one argument at a time within its class
        for (op, sym) in alg.signature().ops().iter().enumerate() {
            let mut ok = true;
            let mut moved = vec![0; sym.arity];
            for_each_tuple(alg.size(), sym.arity, |args| {
                if !ok {
                    return;
                }
                let base = self.rep[alg.apply(op, args)];
                for pos in 0..sym.arity {
                    let r = self.rep[args[pos]];
                    if r == args[pos] {
                        continue;
                    }
                    moved.copy_from_slice(args);
                    moved[pos] = r;
                    if self.rep[alg.apply(op, &moved)] != base {
                        ok = false;
                        return;
                    }
                }
            });
            if !ok {
                return false;
            }
        }
        true
    }
}

/// A map between carriers, checked against tables on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomMap {
    map: Vec<usize>,
}

impl HomMap {
    pub fn new(map: Vec<usize>) -> Self {
        HomMap { map }
    }

    pub fn identity(len: usize) -> Self {
        HomMap::new((0..len).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn is_homomorphism(&self, src: &FiniteAlgebra, tgt: &FiniteAlgebra) -> bool {
        if self.map.len() != src.size() || self.map.iter().any(|&v| v >= tgt.size()) {
            return false;
        }
        if src.signature() != tgt.signature() {
            return false;
        }
        let mut mapped = Vec::new();
        src.signature().ops().iter().enumerate().all(|(op, sym)| {
            let mut ok = true;
            for_each_tuple(src.size(), sym.arity, |args| {
                mapped.clear();
                mapped.extend(args.iter().map(|&a| self.map[a]));
                ok &= self.map[src.apply(op, args)] == tgt.apply(op, &mapped);
            });
            ok
        })
    }

    pub fn is_bijective(&self, target_size: usize) -> bool {
        if self.map.len() != target_size {
            return false;
        }
        let mut seen = vec![false; target_size];
        self.map
            .iter()
            .all(|&v| v < target_size && !std::mem::replace(&mut seen[v], true))
    }

    pub fn is_isomorphism(&self, src: &FiniteAlgebra, tgt: &FiniteAlgebra) -> bool {
        self.is_bijective(tgt.size()) && self.is_homomorphism(src, tgt)
    }

    pub fn kernel(&self) -> Congruence {
        Congruence::from_labels(&self.map)
    }

    pub fn inverse(&self) -> Option<HomMap> {
        let mut inv = vec![usize::MAX; self.map.len()];
        for (x, &y) in self.map.iter().enumerate() {
            if y >= inv.len() || inv[y] != usize::MAX {
                return None;
            }
            inv[y] = x;
        }
        Some(HomMap::new(inv))
    }

    pub fn compose(&self, then: &HomMap) -> HomMap {
        HomMap::new(self.map.iter().map(|&x| then.map[x]).collect())
    }
}

/// The small algebras used throughout the test corpus.
pub mod corpus {
    use super::*;

    fn group_signature() -> Arc<Signature> {
        Arc::new(Signature::new([("mul", 2), ("inv", 1), ("e", 0)]).expect("static signature"))
    }

    /// Two-element meet semilattice `({0,1}, min)`.
    pub fn sl2() -> FiniteAlgebra {
        let sig = Arc::new(Signature::new([("meet", 2)]).expect("static signature"));
        FiniteAlgebra::new(sig, 2, vec![vec![0, 0, 0, 1]])
            .expect("valid tables")
            .with_name("SL2")
    }

    /// Cyclic group `Z_n` in the signature `mul/2, inv/1, e/0`.
    pub fn cyclic_group(n: usize) -> FiniteAlgebra {
        let sig = group_signature();
        let opts = Options::default();
        FiniteAlgebra::from_fn(sig, n, &opts, |op, args| match op {
            0 => (args[0] + args[1]) % n,
            1 => (n - args[0]) % n,
            _ => 0,
        })
        .expect("valid tables")
        .with_name(format!("Z{n}"))
    }

    pub fn z2_group() -> FiniteAlgebra {
        cyclic_group(2)
    }

    pub fn z3_group() -> FiniteAlgebra {
        cyclic_group(3)
    }

    /// Two elements in the group signature with constant-0 `mul`,
    /// identity `inv` and `e = 0`.
    pub fn zero_mul2() -> FiniteAlgebra {
        FiniteAlgebra::new(group_signature(), 2, vec![vec![0; 4], vec![0, 1], vec![0]])
            .expect("valid tables")
            .with_name("Null2")
    }

    /// Every corpus algebra, in a fixed order.
    pub fn all() -> Vec<FiniteAlgebra> {
        vec![sl2(), z2_group(), z3_group(), zero_mul2()]
    }
}
