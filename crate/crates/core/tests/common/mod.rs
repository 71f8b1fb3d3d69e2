#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use cqfit::{Cq, Example, Fact, Instance, PathExample, Rel, Value};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const UNARY: [&str; 2] = ["A", "B"];
pub const BINARY: [&str; 2] = ["R", "S"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn val(prefix: &str, i: usize) -> Value {
    Value::new(format!("{prefix}{i}"))
}

/// Builds an example from `(relation index, a, b)` triples over values
/// `prefix0..`; relation indices below `unary.len()` are unary.
pub fn build_example(
    prefix: &str,
    nvals: usize,
    facts: &[(usize, usize, usize)],
    unary: &[&str],
    binary: &[&str],
) -> Example {
    let mut inst = Instance::with_domain([], (0..nvals).map(|i| val(prefix, i)));
    for &(r, a, b) in facts {
        let (a, b) = (a % nvals, b % nvals);
        let r = r % (unary.len() + binary.len());
        if r < unary.len() {
            inst.insert(Fact::unary(unary[r], &val(prefix, a)));
        } else {
            inst.insert(Fact::binary(binary[r - unary.len()], &val(prefix, a), &val(prefix, b)));
        }
    }
    Example::unary(inst, val(prefix, 0))
}

pub fn random_example(
    rng: &mut impl Rng,
    prefix: &str,
    max_vals: usize,
    max_facts: usize,
    unary: &[&str],
    binary: &[&str],
) -> Example {
    let nvals = rng.gen_range(1..=max_vals);
    let nfacts = rng.gen_range(0..=max_facts);
    let rels = unary.len() + binary.len();
    let facts: Vec<_> = (0..nfacts)
        .map(|_| (rng.gen_range(0..rels), rng.gen_range(0..nvals), rng.gen_range(0..nvals)))
        .collect();
    build_example(prefix, nvals, &facts, unary, binary)
}

/// Proptest strategy for small unary examples over A, B, R, S.
pub fn arb_example(prefix: &'static str, max_vals: usize, max_facts: usize) -> impl Strategy<Value = Example> {
    (1..=max_vals, prop::collection::vec((0..4usize, 0..8usize, 0..8usize), 0..=max_facts))
        .prop_map(move |(n, fs)| build_example(prefix, n, &fs, &UNARY, &BINARY))
}

/// Exhaustive search over all maps from the source domain into the
/// target domain.
pub fn brute_hom(src: &Example, dst: &Example) -> bool {
    let sv: Vec<&Value> = src.domain().iter().collect();
    let dv: Vec<&Value> = dst.domain().iter().collect();
    if sv.is_empty() {
        return src.arity() == dst.arity();
    }
    if dv.is_empty() {
        return false;
    }
    let mut idx = vec![0usize; sv.len()];
    loop {
        let map: BTreeMap<&Value, &Value> = sv.iter().zip(&idx).map(|(s, &i)| (*s, dv[i])).collect();
        let answers_ok = src.answers().iter().zip(dst.answers()).all(|(a, b)| map[a] == b);
        if answers_ok
            && src.facts().iter().all(|f| {
                dst.instance().contains(&Fact::new(
                    f.relation.clone(),
                    f.args.iter().map(|a| map[a].clone()).collect(),
                ))
            })
        {
            return true;
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return false;
            }
            idx[k] += 1;
            if idx[k] < dv.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Random path with up to `max_len` edges drawn from `binary`, each
/// position labeled by a random subset of `unary`.
pub fn random_path(
    rng: &mut impl Rng,
    prefix: &str,
    max_len: usize,
    unary: &[&str],
    binary: &[&str],
) -> PathExample {
    let n = rng.gen_range(1..=max_len);
    let edges = (0..n).map(|_| Rel::new(binary.choose(rng).unwrap())).collect();
    let labels = (0..n)
        .map(|_| unary.iter().filter(|_| rng.gen_bool(0.5)).map(Rel::new).collect())
        .collect();
    PathExample::with_values((0..=n).map(|i| val(prefix, i)).collect(), edges, labels).unwrap()
}

/// A random `(I, J)` pair; about half the time `I` is a labeled prefix of
/// `J` so that `I -> J`.
pub fn random_path_pair(rng: &mut impl Rng) -> (PathExample, PathExample) {
    let j = random_path(rng, "b", 6, &UNARY, &BINARY);
    let i = if rng.gen_bool(0.5) {
        let n = rng.gen_range(1..=j.len());
        let edges = (1..=n).map(|k| j.edge(k).clone()).collect();
        let labels = (1..=n)
            .map(|k| j.labels(k).iter().filter(|_| rng.gen_bool(0.6)).cloned().collect())
            .collect();
        PathExample::with_values((0..=n).map(|k| val("a", k)).collect(), edges, labels).unwrap()
    } else {
        random_path(rng, "a", 6, &UNARY, &BINARY)
    };
    (i, j)
}

/// All examples over values `p0..p{k-1}`, `k <= max_values`, answer `p0`,
/// with facts over the given relations. Exponential; tiny inputs only.
pub fn all_small_examples(max_values: usize, unary: &[&str], binary: &[&str]) -> Vec<Example> {
    let mut out = Vec::new();
    for k in 1..=max_values {
        let vals: Vec<Value> = (0..k).map(|i| val("p", i)).collect();
        let mut facts = Vec::new();
        for u in unary {
            for v in &vals {
                facts.push(Fact::unary(u, v));
            }
        }
        for b in binary {
            for x in &vals {
                for y in &vals {
                    facts.push(Fact::binary(b, x, y));
                }
            }
        }
        for mask in 0u64..1 << facts.len() {
            let chosen = facts
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, f)| f.clone());
            out.push(Example::unary(
                Instance::with_domain(chosen, vals.iter().cloned()),
                vals[0].clone(),
            ));
        }
    }
    out
}

type Shape = Vec<(u8, Vec<usize>)>;

fn canonical_shape(atoms: &Shape) -> Shape {
    let mut vars: Vec<usize> = atoms
        .iter()
        .flat_map(|(_, a)| a.iter().copied())
        .filter(|&v| v != 0)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut best: Option<Shape> = None;
    permute(&mut vars, 0, &mut |perm| {
        let map: BTreeMap<usize, usize> = perm.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
        let mut s: Shape = atoms
            .iter()
            .map(|(r, a)| (*r, a.iter().map(|v| if *v == 0 { 0 } else { map[v] }).collect()))
            .collect();
        s.sort();
        if best.as_ref().is_none_or(|b| s < *b) {
            best = Some(s);
        }
    });
    best.unwrap_or_default()
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Every unary CQ over `A/1`, `R/2` with between 1 and `max_atoms` atoms,
/// one per isomorphism class, answer variable `x0`.
pub fn small_cqs(max_atoms: usize) -> Vec<Cq> {
    let mut shapes: BTreeSet<Shape> = BTreeSet::new();
    fn go(seq: &mut Shape, vars: usize, left: usize, out: &mut BTreeSet<Shape>) {
        if !seq.is_empty() {
            out.insert(canonical_shape(seq));
        }
        if left == 0 {
            return;
        }
        let mut cands: Vec<(u8, Vec<usize>)> = (0..=vars).map(|v| (0u8, vec![v])).collect();
        for u in 0..=vars + 1 {
            for v in 0..=vars + 1 {
                cands.push((1, vec![u, v]));
            }
        }
        for (r, args) in cands {
            // new variables are introduced in order
            let mut next = vars;
            let mut ok = true;
            for &a in &args {
                if a > next {
                    ok = false;
                    break;
                }
                if a == next {
                    next += 1;
                }
            }
            if !ok {
                continue;
            }
            seq.push((r, args));
            go(seq, next, left - 1, out);
            seq.pop();
        }
    }
    go(&mut Vec::new(), 1, max_atoms, &mut shapes);
    shapes
        .into_iter()
        .map(|s| {
            let atoms = s
                .iter()
                .map(|(r, a)| {
                    let args = a.iter().map(|&v| val("x", v)).collect();
                    Fact::new(if *r == 0 { "A" } else { "R" }, args)
                })
                .collect();
            Cq::new(vec![val("x", 0)], atoms)
        })
        .collect()
}
