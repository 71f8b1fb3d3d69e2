//! Relational data model: schemas, facts, instances, data examples and
//! conjunctive queries, together with the canonical translations between
//! queries and examples and the path-shape recognizer.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An opaque domain value (or, inside a CQ, a variable).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Value(Arc<str>);

/// Variables of a CQ share the representation of values.
pub type Variable = Value;

impl Value {
    pub fn new(name: impl AsRef<str>) -> Self {
        Value(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The value `<u,v>` used for pairs in products and dual instances.
    pub fn pair(left: &Value, right: &Value) -> Self {
        Value::new(format!("<{},{}>", left.0, right.0))
    }

    /// Inverse of [`Value::pair`]; splits at the top-level comma.
    pub fn unpair(&self) -> Option<(Value, Value)> {
        let inner = self.0.strip_prefix('<')?.strip_suffix('>')?;
        let mut depth = 0usize;
        for (i, c) in inner.char_indices() {
            match c {
                '<' => depth += 1,
                '>' => depth = depth.checked_sub(1)?,
                ',' if depth == 0 => {
                    return Some((Value::new(&inner[..i]), Value::new(&inner[i + 1..])));
                }
                _ => {}
            }
        }
        None
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::new(s)
    }
}

/// A relation symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Rel(Arc<str>);

impl Rel {
    pub fn new(name: impl AsRef<str>) -> Self {
        Rel(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Rel {
    fn from(s: &str) -> Self {
        Rel::new(s)
    }
}

/// Relation names with their arities.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    relations: BTreeMap<Rel, usize>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, rel: Rel, arity: usize) -> Result<()> {
        if arity == 0 {
            return Err(Error::Schema(format!("relation {rel} must have arity at least 1")));
        }
        match self.relations.get(&rel) {
            Some(&a) if a != arity => Err(Error::Schema(format!(
                "relation {rel} used with arity {arity} but declared with arity {a}"
            ))),
            Some(_) => Ok(()),
            None => {
                self.relations.insert(rel, arity);
                Ok(())
            }
        }
    }

    pub fn with(mut self, rel: &str, arity: usize) -> Result<Self> {
        self.declare(Rel::new(rel), arity)?;
        Ok(self)
    }

    pub fn arity(&self, rel: &Rel) -> Option<usize> {
        self.relations.get(rel).copied()
    }

    pub fn relations(&self) -> impl Iterator<Item = (&Rel, usize)> {
        self.relations.iter().map(|(r, &a)| (r, a))
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Union of two schemas; fails when a relation has two arities.
    pub fn merge(&self, other: &Schema) -> Result<Schema> {
        let mut merged = self.clone();
        for (rel, arity) in other.relations() {
            merged.declare(rel.clone(), arity)?;
        }
        Ok(merged)
    }

    pub fn check_fact(&self, fact: &Fact) -> Result<()> {
        match self.arity(&fact.relation) {
            None => Err(Error::Schema(format!("undeclared relation {}", fact.relation))),
            Some(a) if a != fact.args.len() => Err(Error::Schema(format!(
                "fact {fact} has {} arguments, relation {} has arity {a}",
                fact.args.len(),
                fact.relation
            ))),
            Some(_) => Ok(()),
        }
    }

    fn infer<'a>(facts: impl IntoIterator<Item = &'a Fact>) -> Result<Schema> {
        let mut schema = Schema::new();
        for f in facts {
            schema.declare(f.relation.clone(), f.args.len())?;
        }
        Ok(schema)
    }
}

/// `R(v1,...,vk)`; atoms of a CQ use the same representation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fact {
    pub relation: Rel,
    pub args: Vec<Value>,
}

/// A relational atom of a CQ.
pub type Atom = Fact;

impl Fact {
    pub fn new(relation: impl Into<Rel>, args: Vec<Value>) -> Self {
        Fact {
            relation: relation.into(),
            args,
        }
    }

    pub fn unary(relation: &str, a: &Value) -> Self {
        Fact::new(Rel::new(relation), vec![a.clone()])
    }

    pub fn binary(relation: &str, a: &Value, b: &Value) -> Self {
        Fact::new(Rel::new(relation), vec![a.clone(), b.clone()])
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Encoding of the fact as a single value, `R<a,b>`, used inside dual
    /// instances where values are pairs of a value and a fact.
    pub fn to_value(&self) -> Value {
        let args: Vec<&str> = self.args.iter().map(Value::as_str).collect();
        Value::new(format!("{}<{}>", self.relation, args.join(",")))
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A finite set of facts with an explicit domain. The domain always
/// contains every value used in a fact and may contain isolated values.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Instance {
    facts: BTreeSet<Fact>,
    domain: BTreeSet<Value>,
}

impl Instance {
    pub fn new(facts: impl IntoIterator<Item = Fact>) -> Self {
        let mut inst = Instance::default();
        for f in facts {
            inst.insert(f);
        }
        inst
    }

    pub fn with_domain(
        facts: impl IntoIterator<Item = Fact>,
        extra: impl IntoIterator<Item = Value>,
    ) -> Self {
        let mut inst = Instance::new(facts);
        inst.domain.extend(extra);
        inst
    }

    pub fn insert(&mut self, fact: Fact) -> bool {
        self.domain.extend(fact.args.iter().cloned());
        self.facts.insert(fact)
    }

    pub fn add_value(&mut self, v: Value) {
        self.domain.insert(v);
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    pub fn domain(&self) -> &BTreeSet<Value> {
        &self.domain
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Values occurring in some fact.
    pub fn adom(&self) -> BTreeSet<Value> {
        self.facts.iter().flat_map(|f| f.args.iter().cloned()).collect()
    }

    pub fn schema(&self) -> Result<Schema> {
        Schema::infer(&self.facts)
    }
}

/// A data example `(I, a)`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Example {
    instance: Instance,
    answers: Vec<Value>,
}

impl Example {
    /// Answer values missing from the domain are added to it.
    pub fn new(mut instance: Instance, answers: Vec<Value>) -> Self {
        instance.domain.extend(answers.iter().cloned());
        Example { instance, answers }
    }

    pub fn unary(instance: Instance, answer: Value) -> Self {
        Example::new(instance, vec![answer])
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn answers(&self) -> &[Value] {
        &self.answers
    }

    pub fn arity(&self) -> usize {
        self.answers.len()
    }

    pub fn facts(&self) -> &BTreeSet<Fact> {
        self.instance.facts()
    }

    pub fn domain(&self) -> &BTreeSet<Value> {
        self.instance.domain()
    }

    pub fn schema(&self) -> Result<Schema> {
        self.instance.schema()
    }

    /// Adds a fact, extending the domain.
    pub fn insert(&mut self, fact: Fact) -> bool {
        self.instance.insert(fact)
    }

    /// The sub-example on `facts`, keeping the answer values.
    pub fn restrict_to(&self, facts: impl IntoIterator<Item = Fact>) -> Example {
        Example::new(Instance::new(facts), self.answers.clone())
    }

    /// Domain values that neither occur in a fact nor are answers.
    pub fn isolated_values(&self) -> BTreeSet<Value> {
        let adom = self.instance.adom();
        self.domain()
            .iter()
            .filter(|v| !adom.contains(*v) && !self.answers.contains(*v))
            .cloned()
            .collect()
    }
}

/// A conjunctive query `q(x) :- a1, ..., an`.
///
/// `extra_vars` holds existential variables that occur in no atom; they
/// only arise from canonical CQs of examples with isolated values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cq {
    pub head: Vec<Variable>,
    pub atoms: Vec<Atom>,
    pub extra_vars: BTreeSet<Variable>,
}

impl Cq {
    pub fn new(head: Vec<Variable>, atoms: Vec<Atom>) -> Self {
        Cq {
            head,
            atoms,
            extra_vars: BTreeSet::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.head.len()
    }

    /// Number of atoms.
    pub fn size(&self) -> usize {
        self.atoms.len()
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        let mut vars: BTreeSet<Variable> = self.head.iter().cloned().collect();
        vars.extend(self.atoms.iter().flat_map(|a| a.args.iter().cloned()));
        vars.extend(self.extra_vars.iter().cloned());
        vars
    }

    pub fn schema(&self) -> Result<Schema> {
        Schema::infer(&self.atoms)
    }

    /// True when the query has existential variables that occur in no atom.
    pub fn has_isolated_variables(&self) -> bool {
        !self.extra_vars.is_empty()
    }

    /// Conjunction of queries identified at their answer variables, with
    /// existential variables kept apart by a per-conjunct suffix.
    pub fn join(head: Vec<Variable>, parts: &[Cq]) -> Result<Cq> {
        let mut atoms = Vec::new();
        let mut extra = BTreeSet::new();
        for (j, q) in parts.iter().enumerate() {
            if q.arity() != head.len() {
                return Err(Error::ArityMismatch {
                    expected: head.len(),
                    found: q.arity(),
                });
            }
            let rename = |v: &Value| -> Value {
                match q.head.iter().position(|h| h == v) {
                    Some(i) => head[i].clone(),
                    None => Value::new(format!("{v}_{j}")),
                }
            };
            for a in &q.atoms {
                atoms.push(Fact::new(
                    a.relation.clone(),
                    a.args.iter().map(rename).collect(),
                ));
            }
            extra.extend(q.extra_vars.iter().map(rename));
        }
        Ok(Cq {
            head,
            atoms,
            extra_vars: extra,
        })
    }
}

/// `I_q`: facts are the atoms, domain the variables.
pub fn canonical_instance(q: &Cq) -> Instance {
    Instance::with_domain(q.atoms.iter().cloned(), q.variables())
}

/// `e_q = (I_q, x)`.
pub fn canonical_example(q: &Cq) -> Example {
    Example::new(canonical_instance(q), q.head.clone())
}

/// The canonical CQ of an example: facts become atoms, values variables.
pub fn canonical_cq(e: &Example) -> Cq {
    Cq {
        head: e.answers().to_vec(),
        atoms: e.facts().iter().cloned().collect(),
        extra_vars: e.isolated_values(),
    }
}

/// Examples labeled positive and negative, all of one arity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledCollection {
    pub positives: Vec<Example>,
    pub negatives: Vec<Example>,
}

impl LabeledCollection {
    /// Duplicates are removed and members are kept in sorted order.
    pub fn new(mut positives: Vec<Example>, mut negatives: Vec<Example>) -> Result<Self> {
        positives.sort();
        positives.dedup();
        negatives.sort();
        negatives.dedup();
        let coll = LabeledCollection {
            positives,
            negatives,
        };
        coll.arity()?;
        coll.schema()?;
        Ok(coll)
    }

    pub fn is_empty(&self) -> bool {
        self.positives.is_empty() && self.negatives.is_empty()
    }

    /// Common arity, `None` for an empty collection.
    pub fn arity(&self) -> Result<Option<usize>> {
        let mut arity = None;
        for e in self.positives.iter().chain(&self.negatives) {
            match arity {
                None => arity = Some(e.arity()),
                Some(k) if k != e.arity() => {
                    return Err(Error::ArityMismatch {
                        expected: k,
                        found: e.arity(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(arity)
    }

    pub fn schema(&self) -> Result<Schema> {
        let mut schema = Schema::new();
        for e in self.positives.iter().chain(&self.negatives) {
            schema = schema.merge(&e.schema()?)?;
        }
        Ok(schema)
    }
}

/// A path example `R1(a0,a1), ..., Rn(a{n-1},an)` with unary labels on
/// `a1..an` and answer `a0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PathExample {
    values: Vec<Value>,
    edges: Vec<Rel>,
    labels: Vec<BTreeSet<Rel>>,
}

impl PathExample {
    /// Path over values `a0..an`; `labels[i]` labels position `i + 1`.
    pub fn new(edges: Vec<Rel>, labels: Vec<BTreeSet<Rel>>) -> Result<Self> {
        let values = (0..=edges.len()).map(|i| Value::new(format!("a{i}"))).collect();
        PathExample::with_values(values, edges, labels)
    }

    pub fn with_values(
        values: Vec<Value>,
        edges: Vec<Rel>,
        labels: Vec<BTreeSet<Rel>>,
    ) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Shape("path must have at least one edge".into()));
        }
        if values.len() != edges.len() + 1 || labels.len() != edges.len() {
            return Err(Error::Shape(format!(
                "path of length {} needs {} values and {} label sets",
                edges.len(),
                edges.len() + 1,
                edges.len()
            )));
        }
        let distinct: BTreeSet<&Value> = values.iter().collect();
        if distinct.len() != values.len() {
            return Err(Error::Shape("path values must be distinct".into()));
        }
        let path = PathExample {
            values,
            edges,
            labels,
        };
        path.to_example().schema()?;
        Ok(path)
    }

    /// Convenience constructor from label strings, e.g. `&["A", "B"]`
    /// for a single-edge-relation path whose positions carry `A` then `B`.
    pub fn from_labels(edge: &str, labels: &[&[&str]]) -> Result<Self> {
        PathExample::new(
            vec![Rel::new(edge); labels.len()],
            labels
                .iter()
                .map(|ls| ls.iter().map(Rel::new).collect())
                .collect(),
        )
    }

    /// Number of edges `n`.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value `a_i`, `0 <= i <= n`.
    pub fn value(&self, i: usize) -> &Value {
        &self.values[i]
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    /// Relation `R_i` of the edge into position `i`, `1 <= i <= n`.
    pub fn edge(&self, i: usize) -> &Rel {
        &self.edges[i - 1]
    }

    /// Unary labels at position `i`, `1 <= i <= n`.
    pub fn labels(&self, i: usize) -> &BTreeSet<Rel> {
        &self.labels[i - 1]
    }

    /// The fact `R_i(a_{i-1}, a_i)`.
    pub fn edge_fact(&self, i: usize) -> Fact {
        Fact::new(
            self.edge(i).clone(),
            vec![self.values[i - 1].clone(), self.values[i].clone()],
        )
    }

    pub fn fact_count(&self) -> usize {
        self.len() + self.labels.iter().map(BTreeSet::len).sum::<usize>()
    }

    pub fn to_example(&self) -> Example {
        let mut inst = Instance::default();
        for i in 1..=self.len() {
            inst.insert(self.edge_fact(i));
            for p in self.labels(i) {
                inst.insert(Fact::new(p.clone(), vec![self.values[i].clone()]));
            }
        }
        Example::unary(inst, self.values[0].clone())
    }

    /// Whether `(self, a0) -> (other, b0)`. Along a path the only candidate
    /// mapping is `a_i -> b_i`.
    pub fn maps_into(&self, other: &PathExample) -> bool {
        self.len() <= other.len()
            && (1..=self.len())
                .all(|i| self.edge(i) == other.edge(i) && self.labels(i).is_subset(other.labels(i)))
    }
}

/// Recognizes the path shape, naming the first violation otherwise.
pub fn as_path_example(e: &Example) -> Result<PathExample> {
    let shape = |m: String| Err(Error::Shape(m));
    if e.arity() != 1 {
        return shape(format!("answer tuple has {} values, expected 1", e.arity()));
    }
    e.schema()?;
    let root = &e.answers()[0];
    let mut next: BTreeMap<&Value, &Fact> = BTreeMap::new();
    let mut has_incoming: BTreeSet<&Value> = BTreeSet::new();
    let mut unary: BTreeMap<&Value, BTreeSet<Rel>> = BTreeMap::new();
    let mut binary_count = 0;
    for f in e.facts() {
        match f.args.as_slice() {
            [v] => {
                unary.entry(v).or_default().insert(f.relation.clone());
            }
            [a, b] => {
                binary_count += 1;
                if a == b {
                    return shape(format!("self-loop {f}"));
                }
                if next.insert(a, f).is_some() {
                    return shape(format!("value {a} has two outgoing edges"));
                }
                if !has_incoming.insert(b) {
                    return shape(format!("value {b} has two incoming edges"));
                }
            }
            _ => return shape(format!("fact {f} is neither unary nor binary")),
        }
    }
    if has_incoming.contains(root) {
        return shape(format!("answer value {root} has an incoming edge"));
    }
    if let Some(ls) = unary.get(root) {
        let l = ls.iter().next().expect("non-empty label set");
        return shape(format!("answer value {root} carries label {l}"));
    }
    let mut values = vec![root.clone()];
    let mut edges = Vec::new();
    let mut cur = root;
    while let Some(f) = next.get(cur) {
        edges.push(f.relation.clone());
        cur = &f.args[1];
        values.push(cur.clone());
    }
    if edges.is_empty() {
        return shape(format!("answer value {root} has no outgoing edge"));
    }
    if edges.len() != binary_count {
        return shape("binary facts do not form a single chain from the answer".into());
    }
    if let Some(v) = e.domain().iter().find(|v| !values.contains(v)) {
        return shape(format!("value {v} is not on the chain"));
    }
    let labels = values[1..]
        .iter()
        .map(|v| unary.remove(v).unwrap_or_default())
        .collect();
    PathExample::with_values(values, edges, labels)
}
