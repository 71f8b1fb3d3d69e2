//! Finite-support distributions, exact error, and the PAC experiment
//! scenarios for most-general, most-specific and smallest fitting
//! algorithms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::duality::build_path_dual;
use crate::error::{Error, Result};
use crate::hom::{Solver, Target};
use crate::model::{
    canonical_example, Cq, Example, Fact, LabeledCollection, PathExample, Rel, Schema, Value,
};
use crate::product::{ImplicitProduct, DEFAULT_MAX_FACTS};
use crate::text::format_cq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

/// A distribution with finitely many support points, probabilities kept
/// as exact rationals.
pub struct FiniteDistribution {
    support: Vec<(Example, Label, BigRational)>,
    targets: Vec<Target>,
    denominator: u64,
    /// `cumulative[i]` is `denominator * (p_0 + ... + p_i)`.
    cumulative: Vec<u64>,
}

impl fmt::Debug for FiniteDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteDistribution")
            .field("points", &self.support.len())
            .field("denominator", &self.denominator)
            .finish()
    }
}

impl FiniteDistribution {
    pub fn new(support: Vec<(Example, Label, BigRational)>) -> Result<Self> {
        let first = support
            .first()
            .ok_or_else(|| Error::Distribution("empty support".into()))?;
        let arity = first.0.arity();
        let mut total = BigRational::zero();
        let mut lcm = BigInt::one();
        for (e, _, p) in &support {
            if e.arity() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: e.arity(),
                });
            }
            if *p <= BigRational::zero() {
                return Err(Error::Distribution(format!("probability {p} is not positive")));
            }
            total += p;
            lcm = lcm.lcm(p.denom());
        }
        if !total.is_one() {
            return Err(Error::Distribution(format!("probabilities sum to {total}, not 1")));
        }
        let denominator = lcm
            .to_u64()
            .ok_or_else(|| Error::Distribution("common denominator exceeds 64 bits".into()))?;
        let mut acc = BigInt::zero();
        let mut cumulative = Vec::with_capacity(support.len());
        for (_, _, p) in &support {
            acc += p.numer() * (&lcm / p.denom());
            cumulative.push(acc.to_u64().expect("bounded by the denominator"));
        }
        let targets = support.iter().map(|(e, _, _)| Target::new(e)).collect();
        Ok(FiniteDistribution {
            support,
            targets,
            denominator,
            cumulative,
        })
    }

    pub fn support(&self) -> &[(Example, Label, BigRational)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.support[0].0.arity()
    }

    /// The indexed form of support point `i`, for repeated hom checks.
    pub fn target(&self, i: usize) -> &Target {
        &self.targets[i]
    }

    /// Checks every label against the verdict of `target`.
    pub fn check_labels(&self, target: &Cq, solver: &Solver) -> Result<()> {
        let src = canonical_example(target);
        for (i, (_, label, _)) in self.support.iter().enumerate() {
            let positive = solver.hom_exists_to(&src, &self.targets[i])?;
            if positive != (*label == Label::Positive) {
                return Err(Error::Distribution(format!(
                    "support point {i} is labeled {label:?} but the target disagrees"
                )));
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut impl Rng) -> usize {
        let r = rng.gen_range(0..self.denominator);
        self.cumulative.partition_point(|&c| c <= r)
    }
}

/// Probability mass of the support points on which `q` disagrees with
/// their labels.
pub fn exact_error(
    q: &Cq,
    dist: &FiniteDistribution,
    target: &Cq,
    solver: &Solver,
) -> Result<BigRational> {
    for found in [q.arity(), dist.arity()] {
        if found != target.arity() {
            return Err(Error::ArityMismatch {
                expected: target.arity(),
                found,
            });
        }
    }
    let src = canonical_example(q);
    let mut err = BigRational::zero();
    for (i, (_, label, p)) in dist.support.iter().enumerate() {
        if solver.hom_exists_to(&src, &dist.targets[i])? != (*label == Label::Positive) {
            err += p;
        }
    }
    Ok(err)
}

/// `m` labeled draws, as support indices in draw order and as a
/// collection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub draws: Vec<usize>,
    pub collection: LabeledCollection,
}

impl Sample {
    pub fn multiplicities(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for &d in &self.draws {
            *out.entry(d).or_insert(0) += 1;
        }
        out
    }

    pub fn distinct(&self) -> BTreeSet<usize> {
        self.draws.iter().copied().collect()
    }
}

pub fn sample_with_rng(dist: &FiniteDistribution, m: usize, rng: &mut impl Rng) -> Result<Sample> {
    if m == 0 {
        return Err(Error::Distribution("sample size must be at least 1".into()));
    }
    let draws: Vec<usize> = (0..m).map(|_| dist.draw(rng)).collect();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for &d in &draws {
        let (e, label, _) = &dist.support[d];
        match label {
            Label::Positive => pos.push(e.clone()),
            Label::Negative => neg.push(e.clone()),
        }
    }
    Ok(Sample {
        draws,
        collection: LabeledCollection::new(pos, neg)?,
    })
}

/// `m` i.i.d. draws from `dist`, seeded.
pub fn sample(dist: &FiniteDistribution, m: usize, seed: u64) -> Result<Sample> {
    sample_with_rng(dist, m, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn labeled_path(values: &str, labels: Vec<BTreeSet<Rel>>) -> Result<PathExample> {
    let n = labels.len();
    PathExample::with_values(
        (0..=n).map(|i| Value::new(format!("{values}{i}"))).collect(),
        vec![Rel::new("R"); n],
        labels,
    )
}

fn path_cq(p: &PathExample) -> Cq {
    let e = p.to_example();
    Cq::new(e.answers().to_vec(), e.facts().iter().cloned().collect())
}

/// The most-general scenario: target `q_T` is the `R`-path of length `n`
/// labeled `A` and `B` off the root; the negatives are the duals of the
/// `2^n` singly-labeled paths relative to `q_T`.
pub struct MostGeneralScenario {
    pub n: usize,
    pub target: Cq,
    pub target_path: PathExample,
    /// The family `S`, lexicographic in the label sequence with `A < B`.
    pub family: Vec<Cq>,
    pub family_paths: Vec<PathExample>,
    pub duals: Vec<Example>,
    /// Support point 0 is `(I_{q_T}, x0)`; point `k + 1` is the dual of
    /// `family[k]`.
    pub dist: FiniteDistribution,
    dual_index: BTreeMap<Example, usize>,
}

pub const MOST_GENERAL_MAX_N: usize = 14;
pub const MOST_SPECIFIC_MAX_N: usize = 12;

impl MostGeneralScenario {
    pub fn build(n: usize, solver: &Solver) -> Result<Self> {
        if !(1..=MOST_GENERAL_MAX_N).contains(&n) {
            return Err(Error::Scenario(format!(
                "n must be between 1 and {MOST_GENERAL_MAX_N}, got {n}"
            )));
        }
        let (a, b) = (Rel::new("A"), Rel::new("B"));
        let target_path = labeled_path("x", vec![[a.clone(), b.clone()].into(); n])?;
        let target = path_cq(&target_path);
        let positive = target_path.to_example();
        let mut family = Vec::with_capacity(1 << n);
        let mut family_paths = Vec::with_capacity(1 << n);
        let mut duals = Vec::with_capacity(1 << n);
        for k in 0..1usize << n {
            let labels = (1..=n)
                .map(|i| {
                    let l = if (k >> (n - i)) & 1 == 0 { &a } else { &b };
                    [l.clone()].into()
                })
                .collect();
            let p = labeled_path("y", labels)?;
            let dual = build_path_dual(&p, &target_path)?.dual;
            if solver.hom_exists(&positive, &dual)? {
                return Err(Error::Internal(format!(
                    "the positive example maps into the dual of family member {k}"
                )));
            }
            family.push(path_cq(&p));
            family_paths.push(p);
            duals.push(dual);
        }
        let half = BigRational::new(1.into(), 2.into());
        let each = BigRational::new(1.into(), BigInt::one() << (n + 1));
        let mut support = vec![(positive, Label::Positive, half)];
        support.extend(duals.iter().map(|d| (d.clone(), Label::Negative, each.clone())));
        let dist = FiniteDistribution::new(support)?;
        let dual_index: BTreeMap<Example, usize> =
            duals.iter().cloned().enumerate().map(|(i, d)| (d, i)).collect();
        if dual_index.len() != duals.len() {
            return Err(Error::Internal("two family members share a dual".into()));
        }
        Ok(MostGeneralScenario {
            n,
            target,
            target_path,
            family,
            family_paths,
            duals,
            dist,
            dual_index,
        })
    }

    pub fn positive(&self) -> &Example {
        &self.dist.support[0].0
    }

    /// Family index of a negative example, if it is one of the duals.
    pub fn dual_of(&self, e: &Example) -> Option<usize> {
        self.dual_index.get(e).copied()
    }

    /// `|S \ S'| / 2^{n+1}`.
    pub fn predicted_error(&self, s_prime: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.family.len() - s_prime),
            BigInt::one() << (self.n + 1),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MostGeneralFit {
    pub cq: Cq,
    /// Family indices of `S'`, ascending.
    pub s_prime: Vec<usize>,
    /// `S'` was empty and the empty-body query was returned.
    pub degenerate: bool,
}

/// `q_{S'}` for `S'` the family members whose duals are in `E⁻`.
pub fn fit_scenario_most_general(
    coll: &LabeledCollection,
    scenario: &MostGeneralScenario,
    solver: &Solver,
) -> Result<MostGeneralFit> {
    if coll.positives.iter().any(|p| p != scenario.positive()) {
        return Err(Error::Scenario("a positive example is not the scenario's positive".into()));
    }
    let mut s_prime = BTreeSet::new();
    for neg in &coll.negatives {
        let k = scenario
            .dual_of(neg)
            .ok_or_else(|| Error::Scenario("a negative example is not a scenario dual".into()))?;
        s_prime.insert(k);
    }
    let s_prime: Vec<usize> = s_prime.into_iter().collect();
    let head = vec![Value::new("y0")];
    let degenerate = s_prime.is_empty();
    let cq = if degenerate {
        Cq::new(head, vec![])
    } else {
        let parts: Vec<Cq> = s_prime.iter().map(|&k| scenario.family[k].clone()).collect();
        Cq::join(head, &parts)?
    };
    if !solver.fits(&cq, coll)? {
        return if degenerate {
            Err(Error::Scenario("empty join does not fit the sample".into()))
        } else {
            Err(Error::Internal("the join of the sampled family does not fit".into()))
        };
    }
    Ok(MostGeneralFit {
        cq,
        s_prime,
        degenerate,
    })
}

/// Sorted `k`-subsets of `{1..n}` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            if n - i + 1 < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// The most-specific scenario: target `q(x0) :- A(x0)`, support the
/// examples `(I'_S, a0)` for all `n/2`-subsets `S` of `{1..n}`.
pub struct MostSpecificScenario {
    pub n: usize,
    pub target: Cq,
    pub subsets: Vec<Vec<usize>>,
    /// `(I_S, b0)`, the path labeled `A` at the positions in `S`.
    pub paths: Vec<PathExample>,
    /// `(I'_S, a0)`: the dual of `I_S` relative to the fully labeled path,
    /// plus `A` at the root.
    pub positives: Vec<Example>,
    pub dist: FiniteDistribution,
    index: BTreeMap<Example, usize>,
}

impl MostSpecificScenario {
    pub fn build(n: usize, solver: &Solver) -> Result<Self> {
        if !n.is_multiple_of(2) || !(2..=MOST_SPECIFIC_MAX_N).contains(&n) {
            return Err(Error::Scenario(format!(
                "n must be even and between 2 and {MOST_SPECIFIC_MAX_N}, got {n}"
            )));
        }
        let a = Rel::new("A");
        let full = PathExample::from_labels("R", &vec![&["A"][..]; n])?;
        let subsets = subsets(n, n / 2);
        let mut paths = Vec::with_capacity(subsets.len());
        let mut positives = Vec::with_capacity(subsets.len());
        for s in &subsets {
            let labels = (1..=n)
                .map(|i| {
                    if s.contains(&i) {
                        [a.clone()].into()
                    } else {
                        BTreeSet::new()
                    }
                })
                .collect();
            let path = labeled_path("b", labels)?;
            let dual = build_path_dual(&path, &full)?.dual;
            let root = dual.answers()[0].clone();
            let mut inst = dual.instance().clone();
            inst.insert(Fact::new(a.clone(), vec![root.clone()]));
            let positive = Example::unary(inst, root);
            if solver.hom_exists(&path.to_example(), &positive)? {
                return Err(Error::Internal(format!("I_S maps into I'_S for S = {s:?}")));
            }
            paths.push(path);
            positives.push(positive);
        }
        let p = BigRational::new(BigInt::one(), BigInt::from(subsets.len()));
        let dist = FiniteDistribution::new(
            positives
                .iter()
                .map(|e| (e.clone(), Label::Positive, p.clone()))
                .collect(),
        )?;
        let target = Cq::new(
            vec![Value::new("x0")],
            vec![Fact::new(a, vec![Value::new("x0")])],
        );
        let index = positives.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        Ok(MostSpecificScenario {
            n,
            target,
            subsets,
            paths,
            positives,
            dist,
            index,
        })
    }

    pub fn support_index(&self, e: &Example) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// `(|N^{1/2}| - distinct) / |N^{1/2}|`.
    pub fn predicted_error(&self, distinct: usize) -> BigRational {
        BigRational::new(
            BigInt::from(self.subsets.len() - distinct),
            BigInt::from(self.subsets.len()),
        )
    }
}

/// The most-specific fitting of a collection without negatives, kept as
/// the implicit product of its positives.
#[derive(Clone, Debug)]
pub struct MostSpecificFit {
    pub product: ImplicitProduct,
}

pub fn fit_most_specific(coll: &LabeledCollection) -> Result<MostSpecificFit> {
    if coll.positives.is_empty() {
        return Err(Error::EmptyPositives);
    }
    Ok(MostSpecificFit {
        product: ImplicitProduct::new(coll.positives.clone())?,
    })
}

impl MostSpecificFit {
    /// `q_H ⊆ q` for the canonical CQ `q` of `src`.
    pub fn contained_in(&self, src: &Example, solver: &Solver) -> Result<bool> {
        self.product.hom_into(src, solver)
    }

    /// Whether `q_H` classifies `e` as positive. Factors are positive by
    /// projection; anything else needs the materialized product.
    pub fn classify(&self, e: &Example, solver: &Solver, max_facts: usize) -> Result<bool> {
        if self.product.factors().contains(e) {
            return Ok(true);
        }
        let p = self.product.materialize(max_facts)?;
        solver.hom_exists(&p, e)
    }

    /// Classification of support point `i` of the most-specific scenario.
    /// An unseen point is classified negative when `I_S` maps into every
    /// factor, since `I_S` does not map into `I'_S`.
    pub fn classify_support_point(
        &self,
        i: usize,
        scenario: &MostSpecificScenario,
        solver: &Solver,
    ) -> Result<bool> {
        let e = &scenario.positives[i];
        if self.product.factors().contains(e) {
            return Ok(true);
        }
        let src = scenario.paths[i].to_example();
        let mut into_all = true;
        for f in self.product.factors() {
            let maps = match scenario.support_index(f) {
                Some(j) => solver.hom_exists_to(&src, scenario.dist.target(j))?,
                None => solver.hom_exists(&src, f)?,
            };
            if !maps {
                into_all = false;
                break;
            }
        }
        if into_all {
            return Ok(false);
        }
        self.classify(e, solver, DEFAULT_MAX_FACTS).map_err(|err| match err {
            Error::SizeOverflow { .. } => Error::Scenario(format!(
                "cannot classify support point {i} without materializing the product"
            )),
            other => other,
        })
    }

    /// Exact error on the most-specific scenario.
    pub fn scenario_error(&self, scenario: &MostSpecificScenario, solver: &Solver) -> Result<BigRational> {
        let mut err = BigRational::zero();
        for (i, (_, label, p)) in scenario.dist.support().iter().enumerate() {
            if self.classify_support_point(i, scenario, solver)? != (*label == Label::Positive) {
                err += p;
            }
        }
        Ok(err)
    }
}

/// Upper bound on candidates generated by [`fit_smallest_path_cq`].
pub const DEFAULT_CANDIDATE_CAP: usize = 5_000_000;

/// A path CQ `x0 -e1-> x1 ... -eL-> xL`; `labels[i]` is a bitmask over
/// the unary relations at `x_i`, root included.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    edges: Vec<u8>,
    labels: Vec<u32>,
}

impl Candidate {
    fn to_cq(&self, binary: &[Rel], unary: &[Rel]) -> Cq {
        let x = |i: usize| Value::new(format!("x{i}"));
        let mut atoms = Vec::new();
        for (i, &mask) in self.labels.iter().enumerate() {
            for (b, r) in unary.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    atoms.push(Fact::new(r.clone(), vec![x(i)]));
                }
            }
        }
        for (i, &e) in self.edges.iter().enumerate() {
            atoms.push(Fact::new(binary[e as usize].clone(), vec![x(i), x(i + 1)]));
        }
        atoms.sort();
        Cq::new(vec![x(0)], atoms)
    }
}

/// Adjacency and label tables of an example for path-query matching.
struct PathIndex {
    answer: u32,
    /// `succ[rel][value]`
    succ: Vec<Vec<Vec<u32>>>,
    /// `labels[value]`: bitmask of the unary relations holding there.
    labels: Vec<u32>,
}

impl PathIndex {
    fn new(e: &Example, binary: &[Rel], unary: &[Rel]) -> Self {
        let ids: BTreeMap<&Value, u32> =
            e.domain().iter().enumerate().map(|(i, v)| (v, i as u32)).collect();
        let n = ids.len();
        let mut succ = vec![vec![Vec::new(); n]; binary.len()];
        let mut labels = vec![0u32; n];
        for f in e.facts() {
            if f.arity() == 2 {
                if let Some(r) = binary.iter().position(|b| *b == f.relation) {
                    succ[r][ids[&f.args[0]] as usize].push(ids[&f.args[1]]);
                }
            } else if f.arity() == 1 {
                if let Some(r) = unary.iter().position(|u| *u == f.relation) {
                    labels[ids[&f.args[0]] as usize] |= 1 << r;
                }
            }
        }
        PathIndex {
            answer: ids[&e.answers()[0]],
            succ,
            labels,
        }
    }

    /// Whether the path CQ maps into the example with `x0` at the answer.
    fn matches(&self, c: &Candidate, seen: &mut [u32], stamp: &mut u32) -> bool {
        let ok = |v: u32, mask: u32| self.labels[v as usize] & mask == mask;
        if !ok(self.answer, c.labels[0]) {
            return false;
        }
        let mut frontier = vec![self.answer];
        let mut next = Vec::new();
        for (i, &e) in c.edges.iter().enumerate() {
            *stamp += 1;
            next.clear();
            for &u in &frontier {
                for &v in &self.succ[e as usize][u as usize] {
                    if seen[v as usize] != *stamp && ok(v, c.labels[i + 1]) {
                        seen[v as usize] = *stamp;
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            std::mem::swap(&mut frontier, &mut next);
        }
        true
    }
}

struct Matcher {
    index: PathIndex,
    seen: Vec<u32>,
    stamp: u32,
}

impl Matcher {
    fn new(e: &Example, binary: &[Rel], unary: &[Rel]) -> Self {
        let index = PathIndex::new(e, binary, unary);
        let seen = vec![0; index.labels.len()];
        Matcher {
            index,
            seen,
            stamp: 0,
        }
    }

    fn matches(&mut self, c: &Candidate) -> bool {
        self.index.matches(c, &mut self.seen, &mut self.stamp)
    }
}

/// The smallest fitting CQ among path-shaped unary CQs over `schema` of
/// length at most `max_len`, labels allowed at every position. Ties in
/// atom count go to the smallest serialization. A non-empty collection
/// gets at least one atom; an empty one gets the empty-body query.
pub fn fit_smallest_path_cq(
    coll: &LabeledCollection,
    schema: &Schema,
    max_len: usize,
    solver: &Solver,
) -> Result<Cq> {
    fit_smallest_path_cq_capped(coll, schema, max_len, DEFAULT_CANDIDATE_CAP, solver)
}

pub fn fit_smallest_path_cq_capped(
    coll: &LabeledCollection,
    schema: &Schema,
    max_len: usize,
    cap: usize,
    solver: &Solver,
) -> Result<Cq> {
    if coll.is_empty() {
        return Ok(Cq::new(vec![Value::new("x0")], vec![]));
    }
    if coll.arity()? != Some(1) {
        return Err(Error::Scenario("path CQs are unary; the collection is not".into()));
    }
    let binary: Vec<Rel> = schema.relations().filter(|(_, a)| *a == 2).map(|(r, _)| r.clone()).collect();
    let unary: Vec<Rel> = schema.relations().filter(|(_, a)| *a == 1).map(|(r, _)| r.clone()).collect();
    if unary.len() > 32 || binary.len() > 256 {
        return Err(Error::Scenario("schema too large for the path enumeration".into()));
    }
    let mut pos: Vec<Matcher> = coll.positives.iter().map(|e| Matcher::new(e, &binary, &unary)).collect();
    let mut neg: Vec<Matcher> = coll.negatives.iter().map(|e| Matcher::new(e, &binary, &unary)).collect();
    let mut generated = 0usize;
    // (candidate, index of the negative that it maps into, if known)
    let mut level: Vec<(Candidate, usize)> = vec![(
        Candidate {
            edges: vec![],
            labels: vec![0],
        },
        0,
    )];
    loop {
        let mut children: BTreeMap<Candidate, usize> = BTreeMap::new();
        for (c, hint) in &level {
            let mut push = |child: Candidate| {
                children.entry(child).or_insert(*hint);
            };
            for (i, &mask) in c.labels.iter().enumerate() {
                for b in 0..unary.len() {
                    if mask >> b & 1 == 0 {
                        let mut child = c.clone();
                        child.labels[i] |= 1 << b;
                        push(child);
                    }
                }
            }
            if c.edges.len() < max_len {
                for r in 0..binary.len() {
                    let mut child = c.clone();
                    child.edges.push(r as u8);
                    child.labels.push(0);
                    push(child);
                }
            }
        }
        generated += children.len();
        if generated > cap {
            return Err(Error::SizeOverflow { limit: cap });
        }
        level.clear();
        let mut best: Option<(String, Cq)> = None;
        for (c, hint) in children {
            if !pos.iter_mut().all(|m| m.matches(&c)) {
                continue;
            }
            let killer = if neg.is_empty() {
                None
            } else {
                let k = neg.len();
                (0..k).map(|j| (hint + j) % k).find(|&j| neg[j].matches(&c))
            };
            match killer {
                Some(j) => level.push((c, j)),
                None => {
                    let q = c.to_cq(&binary, &unary);
                    let text = format_cq(&q);
                    if best.as_ref().is_none_or(|(t, _)| text < *t) {
                        best = Some((text, q));
                    }
                    level.push((c, 0));
                }
            }
        }
        if let Some((_, q)) = best {
            if !solver.fits(&q, coll)? {
                return Err(Error::Internal("path matcher and solver disagree".into()));
            }
            return Ok(q);
        }
        if level.is_empty() {
            return Err(Error::NoFitting);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Thm4,
    Thm5,
    Baseline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Thm4,
    Thm5,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FittingStrategy {
    MostSpecific,
    ScenarioMostGeneral,
    SmallestPath,
}

impl FittingStrategy {
    pub fn name(self) -> &'static str {
        match self {
            FittingStrategy::MostSpecific => "most-specific",
            FittingStrategy::ScenarioMostGeneral => "scenario-most-general",
            FittingStrategy::SmallestPath => "smallest-path",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: ScenarioKind,
    /// Distribution the baseline runs on; the other scenarios fix their
    /// own.
    pub distribution: DistributionKind,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(scenario: ScenarioKind, n: usize, m: usize, trials: usize, seed: u64) -> Self {
        ExperimentConfig {
            scenario,
            distribution: match scenario {
                ScenarioKind::Thm5 => DistributionKind::Thm5,
                _ => DistributionKind::Thm4,
            },
            n,
            m,
            trials,
            epsilon: 0.25,
            delta: 0.5,
            seed,
        }
    }

    fn effective_distribution(&self) -> DistributionKind {
        match self.scenario {
            ScenarioKind::Thm4 => DistributionKind::Thm4,
            ScenarioKind::Thm5 => DistributionKind::Thm5,
            ScenarioKind::Baseline => self.distribution,
        }
    }

    fn strategy(&self) -> FittingStrategy {
        match self.scenario {
            ScenarioKind::Thm4 => FittingStrategy::ScenarioMostGeneral,
            ScenarioKind::Thm5 => FittingStrategy::MostSpecific,
            ScenarioKind::Baseline => FittingStrategy::SmallestPath,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Scenario("m must be at least 1".into()));
        }
        for (name, v) in [("epsilon", self.epsilon), ("delta", self.delta)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Scenario(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// An exact rational with its decimal approximation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactRatio {
    pub num: String,
    pub den: String,
    pub value: f64,
}

impl From<&BigRational> for ExactRatio {
    fn from(r: &BigRational) -> Self {
        ExactRatio {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            value: r.to_f64().unwrap_or(f64::NAN),
        }
    }
}

impl ExactRatio {
    pub fn to_rational(&self) -> Result<BigRational> {
        let parse = |s: &str| {
            s.parse::<BigInt>()
                .map_err(|_| Error::Internal(format!("bad integer {s:?}")))
        };
        Ok(BigRational::new(parse(&self.num)?, parse(&self.den)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub m: usize,
    /// Support index to number of draws.
    pub multiplicities: BTreeMap<usize, usize>,
    pub distinct: usize,
    pub positive_drawn: bool,
    /// `|S'|` in the most-general scenario.
    pub s_prime: Option<usize>,
    pub error: ExactRatio,
    /// The closed-form error of the scenario, where one exists.
    pub predicted_error: Option<ExactRatio>,
    pub fitter: String,
    /// Atom count of the hypothesis, or factor count for an implicit
    /// product.
    pub output_size: usize,
    pub hypothesis: Option<String>,
    pub degenerate: bool,
    pub error_gt_epsilon: bool,
    #[serde(skip)]
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    /// Trials excluded from the fraction because they were degenerate.
    pub degenerate: usize,
    pub error_gt_epsilon: usize,
    pub frac_error_gt_eps: f64,
    pub positive_drawn: usize,
}

impl Aggregate {
    pub fn from_records(records: &[TrialRecord]) -> Self {
        let counted: Vec<&TrialRecord> = records.iter().filter(|r| !r.degenerate).collect();
        let exceeding = counted.iter().filter(|r| r.error_gt_epsilon).count();
        Aggregate {
            trials: records.len(),
            degenerate: records.len() - counted.len(),
            error_gt_epsilon: exceeding,
            frac_error_gt_eps: if counted.is_empty() {
                0.0
            } else {
                exceeding as f64 / counted.len() as f64
            },
            positive_drawn: records.iter().filter(|r| r.positive_drawn).count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub strategy: FittingStrategy,
    pub records: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

impl ExperimentReport {
    pub fn summary_line(&self) -> String {
        let scenario = match self.config.scenario {
            ScenarioKind::Thm4 => "thm4",
            ScenarioKind::Thm5 => "thm5",
            ScenarioKind::Baseline => "baseline",
        };
        format!(
            "scenario={scenario} n={} m={} trials={} frac_error_gt_eps={}",
            self.config.n, self.config.m, self.config.trials, self.aggregate.frac_error_gt_eps
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("report serialization: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    /// One row per trial: trial, m, distinct, error numerator and
    /// denominator, fitter, elapsed milliseconds.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Internal(format!("csv: {e}"));
        w.write_record(["trial", "m", "distinct", "error_num", "error_den", "fitter", "elapsed_ms"])
            .map_err(csv_err)?;
        for r in &self.records {
            w.write_record([
                r.trial.to_string(),
                r.m.to_string(),
                r.distinct.to_string(),
                r.error.num.clone(),
                r.error.den.clone(),
                r.fitter.clone(),
                r.elapsed_ms.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

enum Built {
    T4(MostGeneralScenario),
    T5(MostSpecificScenario),
}

impl Built {
    fn dist(&self) -> &FiniteDistribution {
        match self {
            Built::T4(s) => &s.dist,
            Built::T5(s) => &s.dist,
        }
    }

    fn target(&self) -> &Cq {
        match self {
            Built::T4(s) => &s.target,
            Built::T5(s) => &s.target,
        }
    }
}

/// Trial RNG: the seed selects the generator, the trial index its stream.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn run_trial(
    config: &ExperimentConfig,
    built: &Built,
    trial: usize,
    solver: &Solver,
) -> Result<(TrialRecord, LabeledCollection)> {
    let start = Instant::now();
    let dist = built.dist();
    let s = sample_with_rng(dist, config.m, &mut trial_rng(config.seed, trial))?;
    let coll = &s.collection;
    let mut s_prime = None;
    let mut predicted = None;
    let mut degenerate = false;
    let mut hypothesis = None;
    let (error, output_size) = match (config.scenario, built) {
        (ScenarioKind::Thm4, Built::T4(sc)) => {
            let fit = fit_scenario_most_general(coll, sc, solver)?;
            s_prime = Some(fit.s_prime.len());
            predicted = Some(sc.predicted_error(fit.s_prime.len()));
            degenerate = fit.degenerate;
            (exact_error(&fit.cq, dist, &sc.target, solver)?, fit.cq.size())
        }
        (ScenarioKind::Thm5, Built::T5(sc)) => {
            let fit = fit_most_specific(coll)?;
            predicted = Some(sc.predicted_error(s.distinct().len()));
            (fit.scenario_error(sc, solver)?, fit.product.factors().len())
        }
        (ScenarioKind::Baseline, _) => {
            let schema = dist
                .support()
                .iter()
                .try_fold(Schema::new(), |acc, (e, _, _)| acc.merge(&e.schema()?))?;
            let q = fit_smallest_path_cq(coll, &schema, config.n, solver)?;
            hypothesis = Some(format_cq(&q));
            (exact_error(&q, dist, built.target(), solver)?, q.size())
        }
        _ => return Err(Error::Internal("scenario and distribution disagree".into())),
    };
    if error < BigRational::zero() || error > BigRational::one() {
        return Err(Error::Internal(format!("error {error} outside [0, 1]")));
    }
    let positive_drawn = s
        .draws
        .iter()
        .any(|&d| dist.support()[d].1 == Label::Positive);
    let error_gt_epsilon = error.to_f64().unwrap_or(0.0) > config.epsilon;
    let record = TrialRecord {
        trial,
        m: config.m,
        multiplicities: s.multiplicities(),
        distinct: s.distinct().len(),
        positive_drawn,
        s_prime,
        error: ExactRatio::from(&error),
        predicted_error: predicted.as_ref().map(ExactRatio::from),
        fitter: config.strategy().name().to_string(),
        output_size,
        hypothesis,
        degenerate,
        error_gt_epsilon,
        elapsed_ms: start.elapsed().as_millis() as u64,
    };
    Ok((record, s.collection))
}

/// Runs the experiment and also returns each trial's sample.
pub fn run_experiment_with_samples(
    config: &ExperimentConfig,
    solver: &Solver,
) -> Result<(ExperimentReport, Vec<LabeledCollection>)> {
    config.validate()?;
    let built = match config.effective_distribution() {
        DistributionKind::Thm4 => Built::T4(MostGeneralScenario::build(config.n, solver)?),
        DistributionKind::Thm5 => Built::T5(MostSpecificScenario::build(config.n, solver)?),
    };
    let outcomes: Vec<Result<(TrialRecord, LabeledCollection)>> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, &built, t, solver))
        .collect();
    let mut records = Vec::with_capacity(config.trials);
    let mut samples = Vec::with_capacity(config.trials);
    for o in outcomes {
        let (r, s) = o?;
        records.push(r);
        samples.push(s);
    }
    let aggregate = Aggregate::from_records(&records);
    let mut config = *config;
    config.distribution = config.effective_distribution();
    Ok((
        ExperimentReport {
            strategy: config.strategy(),
            config,
            records,
            aggregate,
        },
        samples,
    ))
}

pub fn run_experiment(config: &ExperimentConfig, solver: &Solver) -> Result<ExperimentReport> {
    Ok(run_experiment_with_samples(config, solver)?.0)
}
