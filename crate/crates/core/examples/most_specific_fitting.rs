//! The most-specific fitting is the canonical CQ of the product of the
//! positive examples.

use cqfit::product::{most_specific_fitting, prune_facts, product_many, MostSpecific, DEFAULT_MAX_FACTS};
use cqfit::text::{format_cq, parse_collection};
use cqfit::{canonical_cq, Solver};

const DATA: &str = "\
#positive
R(a,b)
A(b)
R(b,c)
B(c)
#answer a
#positive
R(d,e)
A(e)
B(e)
#answer d
#negative
R(u,v)
#answer u
";

fn main() -> cqfit::Result<()> {
    let coll = parse_collection(DATA)?;
    let s = Solver::default();
    match most_specific_fitting(&coll, &s, DEFAULT_MAX_FACTS)? {
        MostSpecific::Fitting(q) => println!("{}", format_cq(&q)),
        MostSpecific::NoFitting => println!("no fitting CQ"),
        MostSpecific::SizeOverflow(p) => println!("product of {} factors too large", p.factors().len()),
    }
    let p = product_many(coll.positives.clone())?.materialize(DEFAULT_MAX_FACTS)?;
    println!("pruned: {}", format_cq(&canonical_cq(&prune_facts(&p, &s)?)));
    Ok(())
}
