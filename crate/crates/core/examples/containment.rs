//! CQ containment and evaluation.

use cqfit::text::{parse_cq, parse_example};
use cqfit::Solver;

fn main() -> cqfit::Result<()> {
    let s = Solver::default();
    let long = parse_cq("q(x) :- R(x,y), A(y), R(y,z), B(z)")?;
    let short = parse_cq("q(x) :- R(x,y), A(y)")?;
    println!("long ⊆ short: {}", s.contained(&long, &short)?);
    println!("short ⊆ long: {}", s.contained(&short, &long)?);

    let db = parse_example("R(1,2)\nA(2)\nR(2,3)\nB(3)\nR(4,5)\nA(5)\n")?;
    for q in [&long, &short] {
        let answers: Vec<String> = s
            .evaluate(q, db.instance())?
            .into_iter()
            .map(|t| t[0].to_string())
            .collect();
        println!("{} answers: {:?}", q.atoms.len(), answers);
    }
    Ok(())
}
