//! The `n`-generated free algebra in the variety of a finite algebra `A`,
//! realized as the algebra of term functions `A^n → A`.
//!
//! Every term over `x1..xn` canonicalizes to the index of its term function,
//! so an atomic formula `p ≈ q` is represented by a pair of indices. All
//! radical computations work on this finite quotient of the term algebra.

use std::collections::HashMap;

use crate::algebras::{decode_tuple, for_each_tuple, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::options::{checked_pow, Options};
use crate::terms::{Signature, Term};

#[derive(Debug, Clone)]
pub struct FreeAlgebra {
    base: FiniteAlgebra,
    vars: usize,
    points: usize,
    vectors: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    witnesses: Vec<Term>,
    generators: Vec<usize>,
    algebra: FiniteAlgebra,
}

impl FreeAlgebra {
    /// Breadth-first closure of the projections and constants under all
    /// operations, applied pointwise to value vectors.
    ///
    /// Discovery order: projections `x1..xn`, then constants in signature
    /// order, then one layer at a time with operations in signature order
    /// and argument tuples in element order. Witnesses are assigned at first
    /// discovery, so each has minimal depth.
    pub fn build(base: &FiniteAlgebra, vars: usize, opts: &Options) -> Result<FreeAlgebra> {
        if vars == 0 {
            return Err(Error::semantic("variable count must be at least 1"));
        }
        let m = base.size();
        let points = checked_pow(m, vars);
        opts.guard(|| format!("point space A^{vars}"), points)?;
        let points = points as usize;
        let max_elems = (opts.max_entries / points).max(1);

        let mut fa = FreeAlgebra {
            base: base.clone(),
            vars,
            points,
            vectors: Vec::new(),
            index: HashMap::new(),
            witnesses: Vec::new(),
            generators: Vec::with_capacity(vars),
            algebra: base.clone(),
        };

        let tuples: Vec<Vec<usize>> = (0..points).map(|p| decode_tuple(p, m, vars)).collect();
        for i in 0..vars {
            let v: Vec<usize> = tuples.iter().map(|t| t[i]).collect();
            let idx = fa.intern(v, Term::var(i + 1), max_elems)?;
            fa.generators.push(idx);
        }
        for c in base.signature().constants() {
            let v = vec![base.apply(c, &[]); points];
            fa.intern(v, Term::constant(c), max_elems)?;
        }

        let sig = base.signature().clone();
        let mut done = 0;
        loop {
            let count = fa.vectors.len();
            if count == done {
                break;
            }
            for (op, sym) in sig.ops().iter().enumerate() {
                if sym.arity == 0 {
                    continue;
                }
                let mut tuples = Vec::new();
                for_each_tuple(count, sym.arity, |args| {
                    if args.iter().any(|&a| a >= done) {
                        tuples.push(args.to_vec());
                    }
                });
                let mut buf = vec![0; sym.arity];
                for args in tuples {
                    let v: Vec<usize> = (0..points)
                        .map(|p| {
                            for (slot, &a) in buf.iter_mut().zip(&args) {
                                *slot = fa.vectors[a][p];
                            }
                            base.apply(op, &buf)
                        })
                        .collect();
                    if !fa.index.contains_key(&v) {
                        let w =
                            Term::app(op, args.iter().map(|&a| fa.witnesses[a].clone()).collect());
                        fa.intern(v, w, max_elems)?;
                    }
                }
            }
            done = count;
        }

        let size = fa.vectors.len();
        let mut tables = Vec::with_capacity(sig.len());
        for (op, sym) in sig.ops().iter().enumerate() {
            opts.guard(
                || format!("free algebra table of {}", sym.name),
                checked_pow(size, sym.arity),
            )?;
            let mut table = Vec::new();
            let mut buf = vec![0; sym.arity];
            for_each_tuple(size, sym.arity, |args| {
                let v: Vec<usize> = (0..points)
                    .map(|p| {
                        for (slot, &a) in buf.iter_mut().zip(args) {
                            *slot = fa.vectors[a][p];
                        }
                        base.apply(op, &buf)
                    })
                    .collect();
                table.push(fa.index[&v]);
            });
            tables.push(table);
        }
        let name = format!("F({},{})", base.name().unwrap_or("A"), vars);
        fa.algebra =
            FiniteAlgebra::new(base.signature_arc().clone(), size, tables)?.with_name(name);
        Ok(fa)
    }

    fn intern(&mut self, v: Vec<usize>, witness: Term, max_elems: usize) -> Result<usize> {
        if let Some(&i) = self.index.get(&v) {
            return Ok(i);
        }
        if self.vectors.len() >= max_elems {
            return Err(Error::Budget {
                what: format!("free algebra on {} generators", self.vars),
                needed: ((self.vectors.len() + 1) * self.points) as u128,
                limit: max_elems * self.points,
            });
        }
        let i = self.vectors.len();
        self.index.insert(v.clone(), i);
        self.vectors.push(v);
        self.witnesses.push(witness);
        Ok(i)
    }

    pub fn base(&self) -> &FiniteAlgebra {
        &self.base
    }

    pub fn signature(&self) -> &Signature {
        self.base.signature()
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    /// Number of points of `A^n`.
    pub fn num_points(&self) -> usize {
        self.points
    }

    /// Number of distinct term functions.
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Values of element `idx` at every point, lexicographic point order.
    pub fn vector(&self, idx: usize) -> &[usize] {
        &self.vectors[idx]
    }

    #[inline]
    pub fn value(&self, idx: usize, point: usize) -> usize {
        self.vectors[idx][point]
    }

    /// The free algebra itself as a finite algebra on `0..len`.
    pub fn as_algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    pub fn witness(&self, idx: usize) -> Result<&Term> {
        self.witnesses.get(idx).ok_or_else(|| {
            Error::semantic(format!(
                "element {idx} out of range (free algebra has {})",
                self.len()
            ))
        })
    }

    pub fn witnesses(&self) -> &[Term] {
        &self.witnesses
    }

    /// Pointwise evaluation of `t` on all of `A^n`.
    pub fn eval_vector(&self, t: &Term) -> Result<Vec<usize>> {
        t.check(self.signature(), self.vars)
            .map_err(Error::Semantic)?;
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: &Term) -> Vec<usize> {
        match t {
            Term::Var(i) => self.vectors[self.generators[*i - 1]].clone(),
            Term::App(op, args) => {
                let vals: Vec<Vec<usize>> = args.iter().map(|a| self.eval_unchecked(a)).collect();
                let mut buf = vec![0; args.len()];
                (0..self.points)
                    .map(|p| {
                        for (slot, v) in buf.iter_mut().zip(&vals) {
                            *slot = v[p];
                        }
                        self.base.apply(*op, &buf)
                    })
                    .collect()
            }
        }
    }

    /// Index of the term function induced by `t`.
    pub fn canonicalize(&self, t: &Term) -> Result<usize> {
        let v = self.eval_vector(t)?;
        self.index.get(&v).copied().ok_or_else(|| {
            Error::invariant(format!(
                "term {} induces a function missing from the free algebra",
                t.display(self.signature())
            ))
        })
    }

    /// Index of an arbitrary value vector, if it is a term function.
    pub fn lookup_vector(&self, v: &[usize]) -> Option<usize> {
        self.index.get(v).copied()
    }
}
