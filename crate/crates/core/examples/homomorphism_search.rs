//! Anchored homomorphism search between examples.

use cqfit::text::parse_example;
use cqfit::Solver;

fn main() -> cqfit::Result<()> {
    let cycle6 = parse_example(
        "E(a,b)\nE(b,c)\nE(c,d)\nE(d,e)\nE(e,f)\nE(f,a)\n#answer a",
    )?;
    let cycle3 = parse_example("E(u,v)\nE(v,w)\nE(w,u)\n#answer u")?;
    let edge = parse_example("E(p,q)\nE(q,p)\n#answer p")?;

    let solver = Solver::from_env()?;
    for (name, dst) in [("C3", &cycle3), ("K2", &edge)] {
        match solver.find_hom(&cycle6, dst)? {
            Some(h) => {
                println!("C6 -> {name}:");
                for (u, v) in h.mapping() {
                    println!("  {u} -> {v}");
                }
            }
            None => println!("C6 -> {name}: none"),
        }
    }
    println!("C3 -> K2: {}", solver.hom_exists(&cycle3, &edge)?);
    Ok(())
}
