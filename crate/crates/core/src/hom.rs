//! Homomorphism search between data examples, and the query-level
//! operations built on it: evaluation, containment, equivalence and fit
//! checks.
//!
//! The solver treats the source domain as CSP variables over the target
//! domain, one table constraint per source fact. It runs generalized arc
//! consistency, then maintains it during a backtracking search that picks
//! the variable with the fewest remaining values (ties: smallest source
//! value) and tries target values in ascending order. Connected components
//! of the free variables are searched independently. Identical inputs
//! always produce identical witnesses.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::model::{canonical_example, Cq, Example, Instance, LabeledCollection, Rel, Value};

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;
pub const NODE_BUDGET_ENV: &str = "CQFIT_NODE_BUDGET";

/// A total map from source domain values to target domain values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    mapping: BTreeMap<Value, Value>,
}

impl Homomorphism {
    pub fn from_mapping(mapping: BTreeMap<Value, Value>) -> Self {
        Homomorphism { mapping }
    }

    pub fn get(&self, v: &Value) -> Option<&Value> {
        self.mapping.get(v)
    }

    pub fn mapping(&self) -> &BTreeMap<Value, Value> {
        &self.mapping
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Homomorphism) -> Option<Homomorphism> {
        self.mapping
            .iter()
            .map(|(k, v)| other.get(v).map(|w| (k.clone(), w.clone())))
            .collect::<Option<BTreeMap<_, _>>>()
            .map(Homomorphism::from_mapping)
    }

    /// Checks the mapping fact by fact, without using the solver.
    pub fn is_valid(&self, src: &Example, dst: &Example) -> bool {
        let total = src.domain().iter().all(|v| {
            self.mapping
                .get(v)
                .is_some_and(|w| dst.domain().contains(w))
        });
        let anchored = src.arity() == dst.arity()
            && src
                .answers()
                .iter()
                .zip(dst.answers())
                .all(|(a, b)| self.mapping.get(a) == Some(b));
        total
            && anchored
            && src.facts().iter().all(|f| {
                let image = crate::model::Fact::new(
                    f.relation.clone(),
                    f.args.iter().map(|a| self.mapping[a].clone()).collect(),
                );
                dst.instance().contains(&image)
            })
    }
}

struct RelIndex {
    arity: usize,
    tuples: Vec<u32>,
    /// `by_pos[p][value]`: ids of tuples with `value` at position `p`.
    by_pos: Vec<Vec<Vec<u32>>>,
}

impl RelIndex {
    fn tuple(&self, id: u32) -> &[u32] {
        let s = id as usize * self.arity;
        &self.tuples[s..s + self.arity]
    }
}

/// A target example indexed for repeated homomorphism queries.
pub struct Target {
    values: Vec<Value>,
    rels: HashMap<Rel, RelIndex>,
    answers: Vec<u32>,
}

impl Target {
    pub fn new(dst: &Example) -> Self {
        let values: Vec<Value> = dst.domain().iter().cloned().collect();
        let ids: HashMap<Value, u32> = values
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();
        let mut rels: HashMap<Rel, RelIndex> = HashMap::new();
        for f in dst.facts() {
            let idx = rels.entry(f.relation.clone()).or_insert_with(|| RelIndex {
                arity: f.arity(),
                tuples: Vec::new(),
                by_pos: vec![vec![Vec::new(); values.len()]; f.arity()],
            });
            let id = (idx.tuples.len() / idx.arity) as u32;
            for (p, a) in f.args.iter().enumerate() {
                let vid = ids[a];
                idx.tuples.push(vid);
                idx.by_pos[p][vid as usize].push(id);
            }
        }
        let answers = dst.answers().iter().map(|a| ids[a]).collect();
        Target {
            values,
            rels,
            answers,
        }
    }

    pub fn arity(&self) -> usize {
        self.answers.len()
    }

    fn words(&self) -> usize {
        self.values.len().div_ceil(64)
    }
}

struct Constraint {
    rel: Rel,
    vars: Vec<usize>,
}

/// Source example compiled against a target.
struct Problem<'t> {
    target: &'t Target,
    names: Vec<Value>,
    constraints: Vec<Constraint>,
    /// constraints mentioning each variable
    watch: Vec<Vec<usize>>,
    words: usize,
}

#[derive(Clone)]
struct Domains {
    bits: Vec<u64>,
    words: usize,
}

impl Domains {
    fn full(nvars: usize, nvals: usize, words: usize) -> Self {
        let mut bits = vec![0u64; nvars * words];
        for x in 0..nvars {
            for v in 0..nvals {
                bits[x * words + v / 64] |= 1 << (v % 64);
            }
        }
        Domains { bits, words }
    }

    fn row(&self, x: usize) -> &[u64] {
        &self.bits[x * self.words..(x + 1) * self.words]
    }

    fn has(&self, x: usize, v: u32) -> bool {
        let v = v as usize;
        self.bits[x * self.words + v / 64] & (1 << (v % 64)) != 0
    }

    fn remove(&mut self, x: usize, v: u32) {
        let v = v as usize;
        self.bits[x * self.words + v / 64] &= !(1 << (v % 64));
    }

    fn assign(&mut self, x: usize, v: u32) {
        let row = &mut self.bits[x * self.words..(x + 1) * self.words];
        row.iter_mut().for_each(|w| *w = 0);
        row[v as usize / 64] |= 1 << (v % 64);
    }

    fn size(&self, x: usize) -> u32 {
        self.row(x).iter().map(|w| w.count_ones()).sum()
    }

    fn values(&self, x: usize) -> Vec<u32> {
        let mut out = Vec::new();
        for (i, &w) in self.row(x).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros();
                out.push(i as u32 * 64 + b);
                w &= w - 1;
            }
        }
        out
    }

    fn first(&self, x: usize) -> Option<u32> {
        self.row(x)
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, &w)| i as u32 * 64 + w.trailing_zeros())
    }
}

impl<'t> Problem<'t> {
    /// `None` when some source relation is missing from the target.
    fn compile(src: &Example, target: &'t Target) -> Result<Option<Self>> {
        let names: Vec<Value> = src.domain().iter().cloned().collect();
        let var: HashMap<&Value, usize> = names.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut constraints = Vec::new();
        let mut watch = vec![Vec::new(); names.len()];
        for f in src.facts() {
            match target.rels.get(&f.relation) {
                None => return Ok(None),
                Some(idx) if idx.arity != f.arity() => {
                    return Err(Error::Schema(format!(
                        "relation {} has arity {} in the source and {} in the target",
                        f.relation,
                        f.arity(),
                        idx.arity
                    )))
                }
                Some(_) => {}
            }
            let vars: Vec<usize> = f.args.iter().map(|a| var[a]).collect();
            let c = constraints.len();
            let mut seen = BTreeSet::new();
            for &x in &vars {
                if seen.insert(x) {
                    watch[x].push(c);
                }
            }
            constraints.push(Constraint {
                rel: f.relation.clone(),
                vars,
            });
        }
        Ok(Some(Problem {
            target,
            names,
            constraints,
            watch,
            words: target.words(),
        }))
    }

    fn var_of(&self, v: &Value) -> usize {
        self.names.binary_search(v).expect("source value")
    }

    fn supported(&self, c: &Constraint, idx: &RelIndex, doms: &Domains, p: usize, a: u32) -> bool {
        idx.by_pos[p][a as usize].iter().any(|&t| {
            let tup = idx.tuple(t);
            c.vars.iter().enumerate().all(|(q, &y)| {
                if c.vars[p] == y {
                    tup[q] == a
                } else {
                    doms.has(y, tup[q])
                }
            })
        })
    }

    /// Removes unsupported values of constraint `ci`; returns changed variables.
    fn revise(&self, ci: usize, doms: &mut Domains, changed: &mut Vec<usize>) -> bool {
        let c = &self.constraints[ci];
        let idx = &self.target.rels[&c.rel];
        for (p, &x) in c.vars.iter().enumerate() {
            if c.vars[..p].contains(&x) {
                continue;
            }
            let mut removed = false;
            for a in doms.values(x) {
                if !self.supported(c, idx, doms, p, a) {
                    doms.remove(x, a);
                    removed = true;
                }
            }
            if removed {
                if doms.first(x).is_none() {
                    return false;
                }
                changed.push(x);
            }
        }
        true
    }

    fn propagate(&self, doms: &mut Domains, seeds: impl IntoIterator<Item = usize>) -> bool {
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut queued = vec![false; self.constraints.len()];
        for c in seeds {
            if !queued[c] {
                queued[c] = true;
                queue.push_back(c);
            }
        }
        let mut changed = Vec::new();
        while let Some(c) = queue.pop_front() {
            queued[c] = false;
            changed.clear();
            if !self.revise(c, doms, &mut changed) {
                return false;
            }
            for &x in &changed {
                for &d in &self.watch[x] {
                    if d != c && !queued[d] {
                        queued[d] = true;
                        queue.push_back(d);
                    }
                }
            }
        }
        true
    }

    /// Connected components of the variables that are still free.
    fn components(&self, doms: &Domains) -> Vec<Vec<usize>> {
        let n = self.names.len();
        let free: Vec<bool> = (0..n).map(|x| doms.size(x) > 1).collect();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if !free[start] || comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                for &c in &self.watch[x] {
                    for &y in &self.constraints[c].vars {
                        if free[y] && comp[y] == usize::MAX {
                            comp[y] = id;
                            members.push(y);
                            stack.push(y);
                        }
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    fn search(&self, doms: &mut Domains, comp: &[usize], budget: &mut Budget) -> Result<bool> {
        let pick = comp
            .iter()
            .copied()
            .filter(|&x| doms.size(x) > 1)
            .min_by_key(|&x| (doms.size(x), x));
        let Some(x) = pick else {
            return Ok(true);
        };
        for a in doms.values(x) {
            budget.tick()?;
            let mut next = doms.clone();
            next.assign(x, a);
            if self.propagate(&mut next, self.watch[x].iter().copied())
                && self.search(&mut next, comp, budget)?
            {
                *doms = next;
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Solves with the given anchors; returns a total assignment.
    fn solve(&self, anchors: &[(usize, u32)], budget: &mut Budget) -> Result<Option<Vec<u32>>> {
        let n = self.names.len();
        let nvals = self.target.values.len();
        if n > 0 && nvals == 0 {
            return Ok(None);
        }
        let mut doms = Domains::full(n, nvals, self.words);
        for &(x, a) in anchors {
            if !doms.has(x, a) {
                return Ok(None);
            }
            doms.assign(x, a);
        }
        if !self.propagate(&mut doms, 0..self.constraints.len()) {
            return Ok(None);
        }
        for comp in self.components(&doms) {
            if comp.iter().all(|&x| self.watch[x].is_empty()) {
                // unconstrained values take the first remaining target value
                for &x in &comp {
                    let first = doms.first(x).expect("non-empty domain");
                    doms.assign(x, first);
                }
                continue;
            }
            if !self.search(&mut doms, &comp, budget)? {
                return Ok(None);
            }
        }
        Ok(Some((0..n).map(|x| doms.first(x).expect("assigned")).collect()))
    }

    fn answer_anchors(&self, src: &Example, answers: &[u32]) -> Result<Vec<(usize, u32)>> {
        if src.arity() != answers.len() {
            return Err(Error::ArityMismatch {
                expected: answers.len(),
                found: src.arity(),
            });
        }
        Ok(src
            .answers()
            .iter()
            .zip(answers)
            .map(|(a, &b)| (self.var_of(a), b))
            .collect())
    }
}

struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            Err(Error::BudgetExceeded { budget: self.limit })
        } else {
            Ok(())
        }
    }
}

/// Solver configuration. Calls share no state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Solver {
    pub node_budget: u64,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }
}

impl Solver {
    pub fn with_budget(node_budget: u64) -> Self {
        Solver { node_budget }
    }

    /// Default budget, overridden by `CQFIT_NODE_BUDGET` when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(NODE_BUDGET_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map(Solver::with_budget)
                .map_err(|_| Error::Schema(format!("{NODE_BUDGET_ENV} must be an integer, got {s:?}"))),
            Err(_) => Ok(Solver::default()),
        }
    }

    fn budget(&self) -> Budget {
        Budget {
            limit: self.node_budget,
            used: 0,
        }
    }

    pub fn find_hom_to(&self, src: &Example, dst: &Target) -> Result<Option<Homomorphism>> {
        let Some(problem) = Problem::compile(src, dst)? else {
            if src.arity() != dst.arity() {
                return Err(Error::ArityMismatch {
                    expected: dst.arity(),
                    found: src.arity(),
                });
            }
            return Ok(None);
        };
        let anchors = problem.answer_anchors(src, &dst.answers)?;
        let solution = problem.solve(&anchors, &mut self.budget())?;
        Ok(solution.map(|vals| {
            Homomorphism::from_mapping(
                problem
                    .names
                    .iter()
                    .zip(vals)
                    .map(|(k, v)| (k.clone(), dst.values[v as usize].clone()))
                    .collect(),
            )
        }))
    }

    pub fn hom_exists_to(&self, src: &Example, dst: &Target) -> Result<bool> {
        Ok(self.find_hom_to(src, dst)?.is_some())
    }

    /// A homomorphism `src -> dst` mapping answers to answers, if any.
    pub fn find_hom(&self, src: &Example, dst: &Example) -> Result<Option<Homomorphism>> {
        self.find_hom_to(src, &Target::new(dst))
    }

    pub fn hom_exists(&self, src: &Example, dst: &Example) -> Result<bool> {
        Ok(self.find_hom(src, dst)?.is_some())
    }

    /// `q(I)`: all tuples `a` over the domain of `I` with `e_q -> (I, a)`.
    pub fn evaluate(&self, q: &Cq, inst: &Instance) -> Result<BTreeSet<Vec<Value>>> {
        let src = canonical_example(q);
        let target = Target::new(&Example::new(inst.clone(), vec![]));
        let mut out = BTreeSet::new();
        let Some(problem) = Problem::compile(&src, &target)? else {
            return Ok(out);
        };
        let head: Vec<usize> = q.head.iter().map(|v| problem.var_of(v)).collect();
        let nvals = target.values.len();
        let mut doms = Domains::full(problem.names.len(), nvals, problem.words);
        if (!problem.names.is_empty() && nvals == 0)
            || !problem.propagate(&mut doms, 0..problem.constraints.len())
        {
            return Ok(out);
        }
        let candidates: Vec<Vec<u32>> = head.iter().map(|&x| doms.values(x)).collect();
        let mut budget = self.budget();
        let mut tuple = vec![0u32; head.len()];
        let mut stack = vec![0usize; head.len()];
        // odometer over the cartesian product of head candidates
        loop {
            for (i, &c) in stack.iter().enumerate() {
                match candidates[i].get(c) {
                    Some(&v) => tuple[i] = v,
                    None => return Ok(out),
                }
            }
            let anchors: Vec<(usize, u32)> = head.iter().copied().zip(tuple.iter().copied()).collect();
            if problem.solve(&anchors, &mut budget)?.is_some() {
                out.insert(tuple.iter().map(|&v| target.values[v as usize].clone()).collect());
            }
            let mut i = head.len();
            loop {
                if i == 0 {
                    return Ok(out);
                }
                i -= 1;
                stack[i] += 1;
                if stack[i] < candidates[i].len() {
                    break;
                }
                stack[i] = 0;
            }
        }
    }

    /// `q1 ⊆ q2` iff `e_q2 -> e_q1`.
    pub fn contained(&self, q1: &Cq, q2: &Cq) -> Result<bool> {
        if q1.arity() != q2.arity() {
            return Err(Error::ArityMismatch {
                expected: q1.arity(),
                found: q2.arity(),
            });
        }
        self.hom_exists(&canonical_example(q2), &canonical_example(q1))
    }

    pub fn equivalent(&self, q1: &Cq, q2: &Cq) -> Result<bool> {
        Ok(self.contained(q1, q2)? && self.contained(q2, q1)?)
    }

    /// Whether `e` is a positive example for `q`.
    pub fn is_positive(&self, q: &Cq, e: &Example) -> Result<bool> {
        self.hom_exists(&canonical_example(q), e)
    }

    pub fn fits(&self, q: &Cq, coll: &LabeledCollection) -> Result<bool> {
        let src = canonical_example(q);
        for p in &coll.positives {
            if !self.hom_exists(&src, p)? {
                return Ok(false);
            }
        }
        for n in &coll.negatives {
            if self.hom_exists(&src, n)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// [`Solver::find_hom`] with the default budget.
pub fn find_hom(src: &Example, dst: &Example) -> Result<Option<Homomorphism>> {
    Solver::default().find_hom(src, dst)
}

/// [`Solver::hom_exists`] with the default budget.
pub fn hom_exists(src: &Example, dst: &Example) -> Result<bool> {
    Solver::default().hom_exists(src, dst)
}

pub fn evaluate(q: &Cq, inst: &Instance) -> Result<BTreeSet<Vec<Value>>> {
    Solver::default().evaluate(q, inst)
}

pub fn contained(q1: &Cq, q2: &Cq) -> Result<bool> {
    Solver::default().contained(q1, q2)
}

pub fn equivalent(q1: &Cq, q2: &Cq) -> Result<bool> {
    Solver::default().equivalent(q1, q2)
}

pub fn fits(q: &Cq, coll: &LabeledCollection) -> Result<bool> {
    Solver::default().fits(q, coll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{parse_cq, parse_example};

    fn ex(s: &str) -> Example {
        parse_example(s).unwrap()
    }

    fn cq(s: &str) -> Cq {
        parse_cq(s).unwrap()
    }

    #[test]
    fn identity_witness() {
        let e = ex("R(a,b)\nR(b,c)\nA(c)\n#answer a");
        let h = find_hom(&e, &e).unwrap().unwrap();
        assert!(h.is_valid(&e, &e));
        for (k, v) in h.mapping() {
            assert_eq!(k, v);
        }
    }

    #[test]
    fn anchored_answers_must_match() {
        let src = ex("R(a,b)\n#answer a");
        let dst = ex("R(x,y)\n#answer y");
        assert!(!hom_exists(&src, &dst).unwrap());
        let dst = ex("R(x,y)\n#answer x");
        assert!(hom_exists(&src, &dst).unwrap());
    }

    #[test]
    fn repeated_answer_values() {
        let src = ex("#answer a a");
        assert!(!hom_exists(&src, &ex("#answer x y")).unwrap());
        assert!(hom_exists(&src, &ex("#answer x x")).unwrap());
    }

    #[test]
    fn self_loop_constraint() {
        let src = ex("R(a,a)\n");
        assert!(!hom_exists(&src, &ex("R(x,y)\nR(y,x)\n")).unwrap());
        assert!(hom_exists(&src, &ex("R(x,y)\nR(y,y)\n")).unwrap());
    }

    #[test]
    fn ternary_relations() {
        let src = ex("T(a,b,c)\nT(c,b,a)\n#answer b");
        let dst = ex("T(x,y,z)\nT(z,y,x)\nT(x,x,x)\n#answer y");
        let h = find_hom(&src, &dst).unwrap().unwrap();
        assert!(h.is_valid(&src, &dst));
        assert!(!hom_exists(&src, &ex("T(x,y,z)\n#answer y")).unwrap());
    }

    #[test]
    fn isolated_values_map_to_first() {
        let src = ex("A(a)\n#domain z\n#answer a");
        let dst = ex("A(p)\nB(q)\n#answer p");
        let h = find_hom(&src, &dst).unwrap().unwrap();
        assert_eq!(h.get(&Value::new("z")).unwrap().as_str(), "p");
        assert!(!hom_exists(&ex("#domain z\n"), &ex("")).unwrap());
    }

    #[test]
    fn missing_relation_means_no_hom() {
        assert!(!hom_exists(&ex("B(a)\n#answer a"), &ex("A(a)\n#answer a")).unwrap());
    }

    #[test]
    fn arity_conflict_is_an_error() {
        let err = hom_exists(&ex("R(a,b)\n"), &ex("R(a)\n")).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        let err = hom_exists(&ex("#answer a"), &ex("#answer a b")).unwrap_err();
        assert!(matches!(err, Error::ArityMismatch { .. }));
    }

    #[test]
    fn budget_is_reported() {
        // 4-clique into a triangle forces exhaustive search
        let mut k4 = String::new();
        for a in 0..4 {
            for b in 0..4 {
                if a != b {
                    k4.push_str(&format!("E(v{a},v{b})\n"));
                }
            }
        }
        let mut k3 = String::new();
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    k3.push_str(&format!("E(w{a},w{b})\n"));
                }
            }
        }
        let (src, dst) = (ex(&k4), ex(&k3));
        assert!(!Solver::default().hom_exists(&src, &dst).unwrap());
        let err = Solver::with_budget(2).hom_exists(&src, &dst).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 2 }));
    }

    #[test]
    fn evaluate_examples() {
        let inst = ex("A(a)\nR(a,b)\n").instance().clone();
        let ans = evaluate(&cq("q(x) :- A(x)"), &inst).unwrap();
        assert_eq!(ans, BTreeSet::from([vec![Value::new("a")]]));
        let none = evaluate(&cq("q() :- A(x)"), &ex("R(a,b)\n").instance().clone()).unwrap();
        assert!(none.is_empty());
        let all = evaluate(&cq("q(x) :-"), &inst).unwrap();
        assert_eq!(all.len(), 2);
        let t = evaluate(&cq("q() :- R(x,y)"), &inst).unwrap();
        assert_eq!(t, BTreeSet::from([vec![]]));
    }

    #[test]
    fn containment_and_equivalence() {
        let a = cq("q(x) :- A(x)");
        let b = cq("q(x) :- B(x)");
        assert!(contained(&a, &a).unwrap());
        assert!(!contained(&a, &b).unwrap());
        let dup = cq("q(x) :- A(x), A(x)");
        assert!(equivalent(&a, &dup).unwrap());
        let pa = cq("q(x) :- R(x,y), A(y)");
        let pb = cq("q(x) :- R(x,y), B(y)");
        assert!(!equivalent(&pa, &pb).unwrap());
        let both = cq("q(x) :- R(x,y), A(y), B(y)");
        assert!(contained(&both, &pa).unwrap());
        assert!(!contained(&pa, &both).unwrap());
    }

    #[test]
    fn fits_examples() {
        let q = cq("q(x) :- R(x,y), A(y)");
        let e = canonical_example(&q);
        let c = LabeledCollection::new(vec![e.clone()], vec![]).unwrap();
        assert!(fits(&q, &c).unwrap());
        let c = LabeledCollection::new(vec![e.clone()], vec![e]).unwrap();
        assert!(!fits(&q, &c).unwrap());
    }

    #[test]
    fn composition_of_witnesses() {
        let a = ex("R(a,b)\nR(b,c)\n#answer a");
        let b = ex("R(x,y)\nR(y,x)\n#answer x");
        let c = ex("R(p,p)\n#answer p");
        let h1 = find_hom(&a, &b).unwrap().unwrap();
        let h2 = find_hom(&b, &c).unwrap().unwrap();
        assert!(h1.then(&h2).unwrap().is_valid(&a, &c));
    }

    #[test]
    fn deterministic_witness() {
        let src = ex("R(a,b)\n#answer a");
        let dst = ex("R(x,y)\nR(x,z)\nR(x,w)\n#answer x");
        let h = find_hom(&src, &dst).unwrap().unwrap();
        assert_eq!(h.get(&Value::new("b")).unwrap().as_str(), "w");
        assert_eq!(find_hom(&src, &dst).unwrap(), Some(h));
    }
}
