//! Round trip between a CQ, its canonical example, and back.

use cqfit::text::{format_cq, format_example, parse_cq};
use cqfit::{canonical_cq, canonical_example};

fn main() -> cqfit::Result<()> {
    let q = parse_cq("q(x) :- R(x,y), R(y,z), A(z)")?;
    let e = canonical_example(&q);
    print!("{}", format_example(&e));
    println!("{}", format_cq(&canonical_cq(&e)));

    // isolated existential variables survive as #exists
    let lonely = parse_cq("q(x) :- A(x) #exists z")?;
    println!("{}", format_cq(&canonical_cq(&canonical_example(&lonely))));
    Ok(())
}
