//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uag::algebras::{corpus, FiniteAlgebra};
use uag::chains::{
    certify_artinian, finite_subsystem_indices, finite_support, is_irredundant_subsystem,
    is_irredundant_support, sweep_subsets, sweep_systems,
};
use uag::geometry::{AffineSpace, PointSet};
use uag::options::Options;
use uag::products::{reduced_product, verify_radical_topology_equal, Filter};
use uag::terms::parse_system;
use uag::topology::{
    compute_b1_b2, enumerate_radical_ideals, konig_trace, large_decomposition, PairSet,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn name(a: &FiniteAlgebra) -> &str {
    a.name().unwrap_or("?")
}

fn space(a: &FiniteAlgebra, n: usize) -> Result<AffineSpace, String> {
    AffineSpace::new(a, n, &Options::default()).map_err(|e| e.to_string())
}

/// Galois connection between point sets and radicals, every `E ⊆ A^n` with
/// `m^n ≤ 16`.
fn galois_suite() -> Outcome {
    let mut cases = 0usize;
    for a in corpus::all() {
        let m = a.size();
        for n in 1.. {
            if m.pow(n as u32) > 16 {
                break;
            }
            let sp = space(&a, n)?;
            let np = sp.num_points();
            let total = 1usize << np;
            let sets: Vec<PointSet> = (0..total)
                .map(|mask| PointSet::from_mask(m, n, mask as u64))
                .collect();
            let rad: Vec<PairSet> = sets
                .iter()
                .map(|e| PairSet::from_congruence(&sp.radical_kernel(e)))
                .collect();
            let cl: Vec<PointSet> = sets
                .iter()
                .map(|e| sp.algebraic_closure(e).unwrap())
                .collect();
            let mask_of = |s: &PointSet| s.iter().fold(0usize, |acc, p| acc | 1 << p);

            let fns = common::term_functions(&a, n);
            let idx: Vec<usize> = fns
                .iter()
                .map(|v| sp.free().lookup_vector(v).unwrap())
                .collect();
            check(fns.len() == sp.free().len(), || {
                format!("{} n={n}: free algebra size", name(&a))
            })?;

            for mask in 0..total {
                let e = &sets[mask];
                for p in 0..np {
                    if mask >> p & 1 == 0 {
                        let bigger = mask | 1 << p;
                        check(rad[bigger].is_subset(&rad[mask]), || {
                            format!("{} n={n}: Rad not antitone at {e}", name(&a))
                        })?;
                        check(cl[mask].is_subset(&cl[bigger]), || {
                            format!("{} n={n}: closure not monotone at {e}", name(&a))
                        })?;
                    }
                }
                check(e.is_subset(&cl[mask]), || {
                    format!("{} n={n}: closure not extensive at {e}", name(&a))
                })?;
                let c = mask_of(&cl[mask]);
                check(cl[c] == cl[mask], || {
                    format!("{} n={n}: closure not idempotent at {e}", name(&a))
                })?;
                check(rad[c] == rad[mask], || {
                    format!("{} n={n}: Rad(E) != Rad(closure E) at {e}", name(&a))
                })?;

                // exact agreement with the reference enumeration
                let reference = common::radical(&fns, &e.indices());
                let lib: BTreeSet<(usize, usize)> = (0..fns.len())
                    .flat_map(|f| (f + 1..fns.len()).map(move |g| (f, g)))
                    .filter(|&(f, g)| rad[mask].contains(idx[f], idx[g]))
                    .collect();
                check(lib == reference, || {
                    format!("{} n={n}: Rad({e}) differs from reference", name(&a))
                })?;
                cases += 1;
            }

            // V(Rad(V(S))) = V(S) for every system of at most two equations
            let f_len = sp.free().len();
            let pairs: Vec<(usize, usize)> = (0..f_len)
                .flat_map(|f| (f + 1..f_len).map(move |g| (f, g)))
                .collect();
            let mut systems: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
            for (i, &p) in pairs.iter().enumerate() {
                systems.push(vec![p]);
                for &q in &pairs[i + 1..] {
                    systems.push(vec![p, q]);
                }
            }
            for s in &systems {
                let v = sp.solution_set_of_pairs(s);
                let back = sp.variety_of_kernel(&sp.radical_kernel(&v));
                check(back == v, || {
                    format!("{} n={n}: V(Rad(V(S))) != V(S) for {s:?}", name(&a))
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} sets and systems"))
}

/// Six-condition certificate at n in {1,2}.
fn artinian_suite() -> Outcome {
    let opts = Options::default();
    let mut lines = Vec::new();
    for a in corpus::all() {
        for n in 1..=2 {
            let sp = space(&a, n)?;
            let cert = certify_artinian(&sp, &opts).map_err(|e| e.to_string())?;
            check(
                cert.verdict && cert.conditions.iter().all(|c| c.holds),
                || format!("{} n={n}:\n{cert}", name(&a)),
            )?;
            let get = |id: &str, key: &str| {
                cert.condition(id)
                    .and_then(|c| c.witness.get(key))
                    .and_then(|v| v.as_u64())
            };
            let down = get("ii", "longest_descending");
            let up = get("iii", "longest_ascending");
            check(down.is_some() && down == up, || {
                format!("{} n={n}: chain lengths {down:?} vs {up:?}", name(&a))
            })?;
            lines.push(format!("{} n={n}: {}", name(&a), down.unwrap_or(0)));
        }
    }
    Ok(lines.join(", "))
}

/// `B2 = B1` at n in {1,2}, checked by recomputing both families.
fn b1_b2_suite() -> Outcome {
    let opts = Options::default();
    let mut sizes = Vec::new();
    for a in corpus::all() {
        for n in 1..=2 {
            let sp = space(&a, n)?;
            let topo = compute_b1_b2(&sp, &opts).map_err(|e| e.to_string())?;
            let b1: BTreeSet<PairSet> = topo.b1.iter().map(|c| c.pairs.clone()).collect();
            let b2: BTreeSet<PairSet> = topo.b2.iter().map(|c| c.pairs.clone()).collect();
            check(topo.b1_equals_b2 && b1 == b2, || {
                format!("{} n={n}: B2 != B1", name(&a))
            })?;
            for x in &b1 {
                for y in &b1 {
                    check(b1.contains(&x.intersection(y)), || {
                        format!("{} n={n}: B1 not closed under intersection", name(&a))
                    })?;
                }
            }
            sizes.push(format!("{} n={n}: {}", name(&a), b1.len()));
        }
    }
    Ok(sizes.join(", "))
}

fn micro_oracles() -> Outcome {
    let sl2 = corpus::sl2();
    let z2 = corpus::z2_group();
    let opts = Options::default();
    check(space(&sl2, 1)?.free().len() == 1, || {
        "|F(SL2,1)| != 1".into()
    })?;
    check(space(&sl2, 2)?.free().len() == 3, || {
        "|F(SL2,2)| != 3".into()
    })?;
    check(space(&z2, 1)?.free().len() == 2, || "|F(Z2,1)| != 2".into())?;
    let sp = space(&z2, 1)?;
    let cl0 = sp
        .algebraic_closure(&sp.empty())
        .map_err(|e| e.to_string())?;
    check(cl0.indices() == vec![0], || {
        format!("closure(empty) = {cl0}")
    })?;
    let cl1 = sp
        .algebraic_closure(&PointSet::from_indices(2, 1, [1]))
        .map_err(|e| e.to_string())?;
    check(cl1.indices() == vec![0, 1], || {
        format!("closure({{1}}) = {cl1}")
    })?;
    let sp2 = space(&sl2, 2)?;
    let s = parse_system("meet(x1,x2) = x1", sl2.signature(), 2).map_err(|e| e.to_string())?;
    let v = sp2.solution_set(&s).map_err(|e| e.to_string())?;
    check(v.len() == 3, || format!("V(meet(x1,x2)=x1) = {v}"))?;
    let rads = enumerate_radical_ideals(&sp, &opts).map_err(|e| e.to_string())?;
    let z: Vec<Vec<usize>> = uag::topology::enumerate_zariski_closed(&sp, &rads, &opts)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|c| c.points.indices())
        .collect();
    check(z == vec![vec![], vec![0], vec![0, 1]], || {
        format!("Zariski closed sets {z:?}")
    })?;
    Ok("7 values".into())
}

/// Irreducible components and large decompositions recompose exactly, are
/// irredundant and come out in canonical order.
fn decomposition_suite() -> Outcome {
    let opts = Options::default();
    let mut count = 0;
    for a in corpus::all() {
        for n in 1..=2 {
            let sp = space(&a, n)?;
            let topo = compute_b1_b2(&sp, &opts).map_err(|e| e.to_string())?;
            for c in &topo.b2 {
                let comps = topo
                    .irreducible_components(&c.pairs)
                    .map_err(|e| e.to_string())?;
                let again = topo
                    .irreducible_components(&c.pairs)
                    .map_err(|e| e.to_string())?;
                let universe = c.pairs.universe();
                let union = comps
                    .iter()
                    .fold(PairSet::empty(universe), |acc, d| acc.union(&d.pairs));
                check(union == c.pairs, || {
                    format!("{} n={n}: components do not recompose", name(&a))
                })?;
                for i in 0..comps.len() {
                    let rest = comps
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .fold(PairSet::empty(universe), |acc, (_, d)| acc.union(&d.pairs));
                    check(rest != c.pairs, || {
                        format!("{} n={n}: redundant component", name(&a))
                    })?;
                }
                check(comps.windows(2).all(|w| w[0].pairs < w[1].pairs), || {
                    "components out of order".into()
                })?;
                check(comps == again, || "components not deterministic".into())?;
                count += 1;
            }
            for r in &topo.radicals {
                let y = &r.canonical_set;
                let parts = large_decomposition(&sp, &topo, y).map_err(|e| e.to_string())?;
                let meet = parts.iter().fold(sp.full(), |acc, p| acc.intersection(p));
                check(&meet == y, || {
                    format!(
                        "{} n={n}: large decomposition of {y} does not recompose",
                        name(&a)
                    )
                })?;
                // irredundant among nonempty subfamilies: a single large set
                // is its own decomposition even when it is all of A^n
                for i in (0..parts.len()).filter(|_| parts.len() > 1) {
                    let rest = parts
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .fold(sp.full(), |acc, (_, p)| acc.intersection(p));
                    check(&rest != y, || {
                        format!("{} n={n}: redundant large set for {y}", name(&a))
                    })?;
                }
                check(parts.windows(2).all(|w| w[0] < w[1]), || {
                    "large decomposition out of order".into()
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} closed and algebraic sets"))
}

/// Finite subsystems and supports: equivalent and irredundant.
fn extraction_suite() -> Outcome {
    let sample_opts = Options::default().with_seed(2024);
    let mut exhaustive = 0usize;
    let mut sampled = 0usize;
    for a in corpus::all() {
        let m = a.size();
        for n in 1..=4 {
            let points = m.pow(n as u32);
            if points > 16 {
                break;
            }
            let sp = space(&a, n)?;
            let full_sweep = points <= 8;
            let opts = if full_sweep {
                Options {
                    max_entries: 1 << 16,
                    ..sample_opts.clone()
                }
            } else {
                Options {
                    max_entries: 0,
                    ..sample_opts.clone()
                }
            };
            let (subsets, ex) = sweep_subsets(&sp, &opts);
            check(ex == full_sweep, || "unexpected subset sweep mode".into())?;
            for e in &subsets {
                let e0 = finite_support(&sp, e).map_err(|e| e.to_string())?;
                check(e0.is_subset(e), || {
                    format!("{} n={n}: support not inside {e}", name(&a))
                })?;
                check(sp.radical_kernel(&e0) == sp.radical_kernel(e), || {
                    format!("{} n={n}: Rad(E0) != Rad({e})", name(&a))
                })?;
                check(is_irredundant_support(&sp, &e0), || {
                    format!("{} n={n}: redundant support {e0}", name(&a))
                })?;
            }
            let (systems, _) = sweep_systems(&sp, &opts);
            let mut rng = ChaCha8Rng::seed_from_u64(sample_opts.seed ^ n as u64);
            for s in &systems {
                let mut s = s.clone();
                s.shuffle(&mut rng);
                let kept: Vec<(usize, usize)> = finite_subsystem_indices(&sp, &s)
                    .into_iter()
                    .map(|i| s[i])
                    .collect();
                check(
                    sp.solution_set_of_pairs(&kept) == sp.solution_set_of_pairs(&s),
                    || format!("{} n={n}: subsystem not equivalent", name(&a)),
                )?;
                check(is_irredundant_subsystem(&sp, &kept), || {
                    format!("{} n={n}: redundant subsystem", name(&a))
                })?;
            }
            if full_sweep {
                exhaustive += subsets.len() + systems.len();
            } else {
                sampled += subsets.len() + systems.len();
            }
        }
    }
    Ok(format!("{exhaustive} exhaustive, {sampled} sampled"))
}

/// Every ultrapower over |I| in {2,3} is isomorphic to A with the same
/// radical topology.
fn ultrapower_suite() -> Outcome {
    let opts = Options::default();
    let mut count = 0;
    for a in corpus::all() {
        for k in 2..=3 {
            for u in Filter::ultrafilters(k).map_err(|e| e.to_string())? {
                check(u.is_ultrafilter(), || format!("{u} is not an ultrafilter"))?;
                let rp = reduced_product(&a, &u, &opts).map_err(|e| e.to_string())?;
                let iso = a
                    .find_isomorphism(&rp.algebra, &opts)
                    .map_err(|e| e.to_string())?;
                check(iso.is_some(), || {
                    format!("{} {u}: not isomorphic", name(&a))
                })?;
                for n in 1..=2 {
                    let r = verify_radical_topology_equal(&a, &rp.algebra, n, &opts)
                        .map_err(|e| e.to_string())?;
                    check(r.equal, || {
                        format!("{} {u} n={n}: radical topologies differ", name(&a))
                    })?;
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} comparisons"))
}

/// `[S] ⊆ Rad_A(S)` on sampled systems.
fn ideal_suite() -> Outcome {
    let opts = Options::default().with_seed(77);
    let mut count = 0;
    for a in corpus::all() {
        for n in 1..=2 {
            let sp = space(&a, n)?;
            let (systems, _) = sweep_systems(&sp, &opts);
            for s in &systems {
                let sys = sp.system_of_pairs(s);
                let ideal = sp.ideal_generated(&sys).map_err(|e| e.to_string())?;
                let rad = sp.radical_kernel(&sp.solution_set_of_pairs(s));
                check(ideal.is_finer_than(&rad), || {
                    format!("{} n={n}: [S] not inside Rad(S) for {s:?}", name(&a))
                })?;
                count += 1;
            }
        }
    }
    Ok(format!("{count} systems"))
}

/// König trace along a longest chain of radicals: finite tree whose longest
/// path equals the lattice height.
fn konig_suite() -> Outcome {
    let opts = Options::default();
    let mut lines = Vec::new();
    for a in corpus::all() {
        for n in 1..=2 {
            let sp = space(&a, n)?;
            let topo = compute_b1_b2(&sp, &opts).map_err(|e| e.to_string())?;
            let chain: Vec<PairSet> = topo
                .longest_radical_chain()
                .into_iter()
                .map(|i| topo.radical_pairs[i].clone())
                .collect();
            let t = konig_trace(&topo, &chain).map_err(|e| e.to_string())?;
            let fns = common::term_functions(&a, n);
            let height = common::radical_height(&fns, sp.num_points());
            check(t.node_count() > 0 && t.max_path_len == height, || {
                format!(
                    "{} n={n}: path {} vs height {height}",
                    name(&a),
                    t.max_path_len
                )
            })?;
            lines.push(format!("{} n={n}: {} nodes", name(&a), t.node_count()));
        }
    }
    Ok(lines.join(", "))
}

/// The CLI is byte-for-byte deterministic on the tutorial model and matches
/// the stored golden files.
fn cli_golden() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let model = root.join("models/tutorial.uag");
    let mut checked = 0;
    for (golden, args) in common::golden::commands() {
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_uag"))
                .args(
                    args.iter()
                        .map(|a| a.replace("MODEL", model.to_str().unwrap_or_default())),
                )
                .env_remove("UAG_BUDGET")
                .output()
                .map_err(|e| e.to_string())
        };
        let first = run()?;
        let second = run()?;
        check(first.status.success(), || {
            format!("{golden}: {}", String::from_utf8_lossy(&first.stderr))
        })?;
        check(first.stdout == second.stdout, || {
            format!("{golden}: output differs between runs")
        })?;
        let expected = std::fs::read(root.join("tests/golden").join(golden))
            .map_err(|e| format!("{golden}: {e}"))?;
        check(first.stdout == expected, || {
            format!("{golden}: output differs from golden file")
        })?;
        checked += 1;
    }
    Ok(format!("{checked} golden files"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("galois connection, every E with m^n <= 16", galois_suite),
        ("six chain conditions at n = 1, 2", artinian_suite),
        ("B2 = B1 at n = 1, 2", b1_b2_suite),
        ("micro-oracles", micro_oracles),
        ("irreducible and large decompositions", decomposition_suite),
        ("finite subsystems and supports", extraction_suite),
        ("ultrapowers and radical topology", ultrapower_suite),
        ("[S] inside Rad(S)", ideal_suite),
        ("Konig trace", konig_suite),
        ("CLI golden files", cli_golden),
    ];
    let mut failed = 0;
    for (i, (label, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {label}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {label}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
