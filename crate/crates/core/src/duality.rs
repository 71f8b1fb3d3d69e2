//! Homomorphism dualities relative to an example, and the polynomial
//! construction of such dualities for path examples.
//!
//! `(F, D)` is a duality relative to `(J, b)` when every example `p` with
//! `p -> (J, b)` satisfies: some `f ∈ F` maps to `p` iff `p` maps to no
//! `d ∈ D`.
//!
//! For path examples `I` (length `n`) and `J` (length `m`) with `I -> J`,
//! [`build_path_dual`] returns a single dual example whose values are
//! pairs `<b_i, f>` of a value of `J` and a fact of `I` (or the dummy
//! fact `o`). The dual has at most `|J| * (|I| + 1)^2` facts.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hom::{Homomorphism, Solver, Target};
use crate::model::{Example, Fact, Instance, PathExample, Rel, Value};
use crate::product::product_example;

/// Rendering of the dummy fact inside pair values.
pub const DUMMY_FACT: &str = "o";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DualCase {
    /// `I` does not map to `J`; the dual is `J` itself.
    NonMapping,
    Constructed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualResult {
    pub dual: Example,
    pub case: DualCase,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Tag {
    Dummy,
    Fact(Fact),
}

impl Tag {
    fn to_value(&self) -> Value {
        match self {
            Tag::Dummy => Value::new(DUMMY_FACT),
            Tag::Fact(f) => f.to_value(),
        }
    }
}

/// The second components `f` of the dual's values `<b_i, f>` at level `i`.
fn level_tags(i_path: &PathExample, m: usize) -> Vec<Vec<Tag>> {
    let n = i_path.len();
    (0..=m)
        .map(|lvl| {
            if lvl == 0 {
                vec![Tag::Dummy, Tag::Fact(i_path.edge_fact(1))]
            } else if lvl <= n {
                let a = i_path.value(lvl);
                let mut tags = vec![Tag::Fact(i_path.edge_fact(lvl))];
                if lvl < n {
                    tags.push(Tag::Fact(i_path.edge_fact(lvl + 1)));
                }
                tags.extend(
                    i_path
                        .labels(lvl)
                        .iter()
                        .map(|p| Tag::Fact(Fact::new(p.clone(), vec![a.clone()]))),
                );
                tags
            } else {
                vec![Tag::Dummy]
            }
        })
        .collect()
}

fn dual_value(j_path: &PathExample, lvl: usize, tag: &Tag) -> Value {
    Value::pair(j_path.value(lvl), &tag.to_value())
}

/// The distinguished value `<b_0, R_1(a_0, a_1)>` of the dual.
pub fn dual_root(i_path: &PathExample, j_path: &PathExample) -> Value {
    dual_value(j_path, 0, &Tag::Fact(i_path.edge_fact(1)))
}

/// `(D, d)` such that `({I}, {(D, d)})` is a homomorphism duality relative
/// to `J`.
pub fn build_path_dual(i_path: &PathExample, j_path: &PathExample) -> Result<DualResult> {
    if !i_path.maps_into(j_path) {
        return Ok(DualResult {
            dual: j_path.to_example(),
            case: DualCase::NonMapping,
        });
    }
    let (n, m) = (i_path.len(), j_path.len());
    if n > m || (1..=n).any(|k| i_path.edge(k) != j_path.edge(k)) {
        return Err(Error::Internal(
            "path homomorphism without aligned edge relations".into(),
        ));
    }
    let tags = level_tags(i_path, m);
    let mut inst = Instance::default();
    for lvl in 0..m {
        let rel = j_path.edge(lvl + 1);
        let excluded = (lvl < n).then(|| Tag::Fact(i_path.edge_fact(lvl + 1)));
        for f in &tags[lvl] {
            for g in &tags[lvl + 1] {
                if excluded.as_ref().is_some_and(|x| x == f && x == g) {
                    continue;
                }
                inst.insert(Fact::new(
                    rel.clone(),
                    vec![dual_value(j_path, lvl, f), dual_value(j_path, lvl + 1, g)],
                ));
            }
        }
    }
    for (lvl, lvl_tags) in tags.iter().enumerate().take(m + 1).skip(1) {
        for p in j_path.labels(lvl) {
            let own = (lvl <= n).then(|| Tag::Fact(Fact::new(p.clone(), vec![i_path.value(lvl).clone()])));
            for g in lvl_tags {
                if own.as_ref() != Some(g) {
                    inst.insert(Fact::new(p.clone(), vec![dual_value(j_path, lvl, g)]));
                }
            }
        }
    }
    for (lvl, ts) in tags.iter().enumerate() {
        for t in ts {
            inst.add_value(dual_value(j_path, lvl, t));
        }
    }
    let bound = j_path.fact_count() * (i_path.fact_count() + 1).pow(2);
    if inst.len() > bound {
        return Err(Error::Internal(format!(
            "dual has {} facts, above the bound {bound}",
            inst.len()
        )));
    }
    let root = dual_root(i_path, j_path);
    Ok(DualResult {
        dual: Example::unary(inst, root),
        case: DualCase::Constructed,
    })
}

/// The sub-example of `I` on positions `i..=n`, answer `a_i`.
fn suffix(i_path: &PathExample, from: usize) -> Example {
    let e = i_path.to_example();
    let keep: BTreeSet<&Value> = i_path.values()[from..].iter().collect();
    let facts = e
        .facts()
        .iter()
        .filter(|f| f.args.iter().all(|a| keep.contains(a)))
        .cloned();
    Example::unary(Instance::new(facts), i_path.value(from).clone())
}

/// The explicit homomorphism `g: probe -> (D, d)` from the correctness
/// argument of the construction. Returns `None` when `probe` does not map
/// to `J` or when `I` maps to `probe`.
pub fn dual_witness(
    i_path: &PathExample,
    j_path: &PathExample,
    probe: &Example,
    solver: &Solver,
) -> Result<Option<Homomorphism>> {
    let Some(h) = solver.find_hom(probe, &j_path.to_example())? else {
        return Ok(None);
    };
    if solver.hom_exists(&i_path.to_example(), probe)? {
        return Ok(None);
    }
    let n = i_path.len();
    let level: BTreeMap<&Value, usize> =
        j_path.values().iter().enumerate().map(|(i, v)| (v, i)).collect();
    let suffixes: Vec<Example> = (0..=n).map(|i| suffix(i_path, i)).collect();
    let mut g = BTreeMap::new();
    for a in probe.domain() {
        let lvl = level[h.get(a).expect("total")];
        let at_a = Example::unary(probe.instance().clone(), a.clone());
        let tag = if lvl > n {
            Tag::Dummy
        } else if solver.hom_exists(&suffixes[lvl], &at_a)? {
            if lvl == 0 {
                Tag::Dummy
            } else {
                Tag::Fact(i_path.edge_fact(lvl))
            }
        } else if lvl == 0 {
            Tag::Fact(i_path.edge_fact(1))
        } else {
            let missing = i_path
                .labels(lvl)
                .iter()
                .find(|p| !probe.instance().contains(&Fact::new((*p).clone(), vec![a.clone()])));
            match missing {
                Some(p) => Tag::Fact(Fact::new(p.clone(), vec![i_path.value(lvl).clone()])),
                None if lvl < n => Tag::Fact(i_path.edge_fact(lvl + 1)),
                None => {
                    return Err(Error::Internal(
                        "last path position satisfied all labels yet failed to map".into(),
                    ))
                }
            }
        };
        g.insert(a.clone(), dual_value(j_path, lvl, &tag));
    }
    Ok(Some(Homomorphism::from_mapping(g)))
}

/// A candidate duality `(F, D)` relative to `anchor`.
#[derive(Clone, Debug)]
pub struct RelativeDuality {
    pub obstructions: Vec<Example>,
    pub duals: Vec<Example>,
    pub anchor: Example,
}

impl RelativeDuality {
    pub fn from_path_dual(i_path: &PathExample, j_path: &PathExample, dual: &DualResult) -> Self {
        RelativeDuality {
            obstructions: vec![i_path.to_example()],
            duals: vec![dual.dual.clone()],
            anchor: j_path.to_example(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// An obstruction maps to the probe and the probe maps to a dual.
    BothMap,
    /// No obstruction maps to the probe and the probe maps to no dual.
    NeitherMaps,
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub probe_index: usize,
    pub probe: Example,
    pub kind: ViolationKind,
}

#[derive(Clone, Debug)]
pub struct DualityReport {
    pub checked: usize,
    /// Probes that do not map into the anchor.
    pub skipped: usize,
    pub violation: Option<Violation>,
}

impl DualityReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

enum ProbeOutcome {
    Skipped,
    Ok,
    Violated(ViolationKind),
}

/// Checks the duality condition on each probe. Probes are checked in
/// parallel; the reported violation is the first one in probe order.
pub fn verify_relative_duality(
    rd: &RelativeDuality,
    probes: &[Example],
    solver: &Solver,
) -> Result<DualityReport> {
    let anchor = Target::new(&rd.anchor);
    let duals: Vec<Target> = rd.duals.iter().map(Target::new).collect();
    let outcomes: Vec<Result<ProbeOutcome>> = probes
        .par_iter()
        .map(|p| {
            if !solver.hom_exists_to(p, &anchor)? {
                return Ok(ProbeOutcome::Skipped);
            }
            let target = Target::new(p);
            let mut covered = false;
            for f in &rd.obstructions {
                if solver.hom_exists_to(f, &target)? {
                    covered = true;
                    break;
                }
            }
            let mut maps_to_dual = false;
            for d in &duals {
                if solver.hom_exists_to(p, d)? {
                    maps_to_dual = true;
                    break;
                }
            }
            Ok(match (covered, maps_to_dual) {
                (true, true) => ProbeOutcome::Violated(ViolationKind::BothMap),
                (false, false) => ProbeOutcome::Violated(ViolationKind::NeitherMaps),
                _ => ProbeOutcome::Ok,
            })
        })
        .collect();
    let mut report = DualityReport {
        checked: 0,
        skipped: 0,
        violation: None,
    };
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            ProbeOutcome::Skipped => report.skipped += 1,
            ProbeOutcome::Ok => report.checked += 1,
            ProbeOutcome::Violated(kind) => {
                report.checked += 1;
                if report.violation.is_none() {
                    report.violation = Some(Violation {
                        probe_index: idx,
                        probe: probes[idx].clone(),
                        kind,
                    });
                }
            }
        }
    }
    Ok(report)
}

fn random_subset(e: &Example, rng: &mut ChaCha8Rng) -> Example {
    let keep: f64 = rng.gen_range(0.3..=1.0);
    let facts: Vec<Fact> = e
        .facts()
        .iter()
        .filter(|_| rng.gen_bool(keep))
        .cloned()
        .collect();
    e.restrict_to(facts)
}

fn random_path(
    binary: &[Rel],
    unary: &[Rel],
    max_len: usize,
    prefix: &str,
    rng: &mut ChaCha8Rng,
) -> Option<PathExample> {
    if binary.is_empty() {
        return None;
    }
    let len = rng.gen_range(1..=max_len.max(1));
    let edges = (0..len).map(|_| binary.choose(rng).unwrap().clone()).collect();
    let labels = (0..len)
        .map(|_| unary.iter().filter(|_| rng.gen_bool(0.35)).cloned().collect())
        .collect();
    let values = (0..=len).map(|i| Value::new(format!("{prefix}{i}"))).collect();
    PathExample::with_values(values, edges, labels).ok()
}

/// Seeded probes `p` with `p -> anchor`, drawn from three families:
/// sub-examples of `anchor × R` for small random paths `R`, random paths
/// that map into the anchor, and the anchor and its sub-examples.
pub fn generate_probes(
    anchor: &Example,
    count: usize,
    seed: u64,
    solver: &Solver,
) -> Result<Vec<Example>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = anchor.schema()?;
    let binary: Vec<Rel> = schema
        .relations()
        .filter(|(_, a)| *a == 2)
        .map(|(r, _)| r.clone())
        .collect();
    let unary: Vec<Rel> = schema
        .relations()
        .filter(|(_, a)| *a == 1)
        .map(|(r, _)| r.clone())
        .collect();
    let depth = anchor.domain().len();
    let target = Target::new(anchor);
    let mut probes = Vec::with_capacity(count);
    for i in 0..count {
        let probe = match i % 3 {
            0 => match random_path(&binary, &unary, 3, "r", &mut rng) {
                Some(r) if anchor.arity() == 1 => {
                    let p = product_example(anchor, &r.to_example(), usize::MAX)?;
                    Some(random_subset(&p, &mut rng))
                }
                _ => None,
            },
            1 => {
                let mut found = None;
                for _ in 0..20 {
                    let Some(r) = random_path(&binary, &unary, depth, "p", &mut rng) else {
                        break;
                    };
                    let e = r.to_example();
                    if anchor.arity() == 1 && solver.hom_exists_to(&e, &target)? {
                        found = Some(e);
                        break;
                    }
                }
                found
            }
            _ => None,
        };
        let probe = match probe {
            Some(p) => p,
            None if i < 3 => anchor.clone(),
            None => random_subset(anchor, &mut rng),
        };
        probes.push(probe);
    }
    Ok(probes)
}

/// Every example with at most `max_values` values that maps into the path
/// `anchor` (answer `p0`). Each such example has a level map into the
/// path; the enumeration runs over level maps and then over subsets of the
/// facts those levels allow.
pub fn exhaustive_probes(anchor: &PathExample, max_values: usize) -> Vec<Example> {
    let m = anchor.len();
    let mut out = BTreeSet::new();
    for k in 1..=max_values {
        let vals: Vec<Value> = (0..k).map(|i| Value::new(format!("p{i}"))).collect();
        let mut levels = vec![0usize; k];
        loop {
            let mut allowed = Vec::new();
            for (u, &lu) in levels.iter().enumerate() {
                for (v, &lv) in levels.iter().enumerate() {
                    if lv == lu + 1 {
                        allowed.push(Fact::new(
                            anchor.edge(lv).clone(),
                            vec![vals[u].clone(), vals[v].clone()],
                        ));
                    }
                }
                if lu >= 1 {
                    for p in anchor.labels(lu) {
                        allowed.push(Fact::new(p.clone(), vec![vals[u].clone()]));
                    }
                }
            }
            for mask in 0u64..(1 << allowed.len()) {
                let facts = allowed
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, f)| f.clone());
                out.insert(Example::unary(
                    Instance::with_domain(facts, vals.iter().cloned()),
                    vals[0].clone(),
                ));
            }
            // next level map; value 0 stays at level 0
            let mut pos = 1;
            loop {
                if pos >= k {
                    break;
                }
                levels[pos] += 1;
                if levels[pos] <= m {
                    break;
                }
                levels[pos] = 0;
                pos += 1;
            }
            if pos >= k {
                break;
            }
        }
    }
    out.into_iter().collect()
}
