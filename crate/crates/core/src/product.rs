//! Direct products of examples and most-specific fittings.
//!
//! The product `(I, a) × (J, b)` has a fact `R(<a1,b1>,...,<an,bn>)` for
//! every pair of facts `R(a1..an) ∈ I`, `R(b1..bn) ∈ J`, and answer tuple
//! `(<a1,b1>, ...)`. Only fact-supported pairs and answer pairs enter the
//! domain. Products of many examples are kept implicit unless a caller
//! asks to materialize them; homomorphisms *into* a product can be decided
//! factor by factor.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hom::{Homomorphism, Solver};
use crate::model::{canonical_cq, Cq, Example, Fact, Instance, LabeledCollection, Rel, Value};

pub const DEFAULT_MAX_FACTS: usize = 1_000_000;

fn check_compatible(e1: &Example, e2: &Example) -> Result<()> {
    if e1.arity() != e2.arity() {
        return Err(Error::ArityMismatch {
            expected: e1.arity(),
            found: e2.arity(),
        });
    }
    e1.schema()?.merge(&e2.schema()?)?;
    Ok(())
}

fn by_relation(e: &Example) -> BTreeMap<&Rel, Vec<&Fact>> {
    let mut map: BTreeMap<&Rel, Vec<&Fact>> = BTreeMap::new();
    for f in e.facts() {
        map.entry(&f.relation).or_default().push(f);
    }
    map
}

/// The direct product of two examples; fails with
/// [`Error::SizeOverflow`] when it would have more than `max_facts` facts.
pub fn product_example(e1: &Example, e2: &Example, max_facts: usize) -> Result<Example> {
    check_compatible(e1, e2)?;
    let left = by_relation(e1);
    let right = by_relation(e2);
    let size: usize = left
        .iter()
        .filter_map(|(r, fs)| right.get(r).map(|gs| fs.len().saturating_mul(gs.len())))
        .fold(0usize, usize::saturating_add);
    if size > max_facts {
        return Err(Error::SizeOverflow { limit: max_facts });
    }
    let mut inst = Instance::default();
    for (r, fs) in &left {
        let Some(gs) = right.get(r) else { continue };
        for f in fs {
            for g in gs {
                let args = f
                    .args
                    .iter()
                    .zip(&g.args)
                    .map(|(a, b)| Value::pair(a, b))
                    .collect();
                inst.insert(Fact::new((*r).clone(), args));
            }
        }
    }
    let answers = e1
        .answers()
        .iter()
        .zip(e2.answers())
        .map(|(a, b)| Value::pair(a, b))
        .collect();
    Ok(Example::new(inst, answers))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// The projection `I × J -> I` (or `-> J`) of a materialized binary product.
pub fn projection(product: &Example, side: Side) -> Option<Homomorphism> {
    product
        .domain()
        .iter()
        .map(|v| {
            let (l, r) = v.unpair()?;
            Some((v.clone(), if side == Side::Left { l } else { r }))
        })
        .collect::<Option<BTreeMap<_, _>>>()
        .map(Homomorphism::from_mapping)
}

/// `Π factors`, not materialized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplicitProduct {
    factors: Vec<Example>,
}

impl ImplicitProduct {
    pub fn new(factors: Vec<Example>) -> Result<Self> {
        let first = factors.first().ok_or(Error::EmptyProduct)?;
        for f in &factors[1..] {
            check_compatible(first, f)?;
        }
        Ok(ImplicitProduct { factors })
    }

    pub fn factors(&self) -> &[Example] {
        &self.factors
    }

    pub fn arity(&self) -> usize {
        self.factors[0].arity()
    }

    /// Upper bound on the fact count: the product of the factors' counts.
    pub fn fact_bound(&self) -> usize {
        self.factors
            .iter()
            .map(|f| f.facts().len())
            .fold(1usize, usize::saturating_mul)
    }

    /// Folds the binary product from the left.
    pub fn materialize(&self, max_facts: usize) -> Result<Example> {
        let mut acc = self.factors[0].clone();
        for f in &self.factors[1..] {
            acc = product_example(&acc, f, max_facts)?;
        }
        Ok(acc)
    }

    /// `src -> Π factors` iff `src -> f` for every factor `f`.
    pub fn hom_into(&self, src: &Example, solver: &Solver) -> Result<bool> {
        for f in &self.factors {
            if !solver.hom_exists(src, f)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn product_many(es: Vec<Example>) -> Result<ImplicitProduct> {
    ImplicitProduct::new(es)
}

pub fn hom_into_product(src: &Example, p: &ImplicitProduct, solver: &Solver) -> Result<bool> {
    p.hom_into(src, solver)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MostSpecific {
    /// The canonical CQ of the product of the positives; it fits.
    Fitting(Cq),
    /// The product maps into a negative, so no CQ fits.
    NoFitting,
    /// The product is too large to materialize.
    SizeOverflow(ImplicitProduct),
}

/// The most-specific fitting CQ: the canonical CQ of the product of all
/// positive examples, provided it fits.
pub fn most_specific_fitting(
    coll: &LabeledCollection,
    solver: &Solver,
    max_facts: usize,
) -> Result<MostSpecific> {
    if coll.positives.is_empty() {
        return Err(Error::EmptyPositives);
    }
    let product = product_many(coll.positives.clone())?;
    let materialized = match product.materialize(max_facts) {
        Ok(e) => e,
        Err(Error::SizeOverflow { .. }) => return Ok(MostSpecific::SizeOverflow(product)),
        Err(e) => return Err(e),
    };
    for n in &coll.negatives {
        if solver.hom_exists(&materialized, n)? {
            return Ok(MostSpecific::NoFitting);
        }
    }
    let q = canonical_cq(&materialized);
    if !solver.fits(&q, coll)? {
        return Err(Error::Internal(
            "canonical CQ of the product does not fit its own positives".into(),
        ));
    }
    Ok(MostSpecific::Fitting(q))
}

/// Greedily drops facts while the example still maps into the reduced
/// version. The result is homomorphically equivalent to `e`.
pub fn prune_facts(e: &Example, solver: &Solver) -> Result<Example> {
    let mut current = e.clone();
    for f in e.facts() {
        let reduced = current.restrict_to(current.facts().iter().filter(|g| *g != f).cloned());
        if solver.hom_exists(&current, &reduced)? {
            current = reduced;
        }
    }
    Ok(current)
}
