//! Probe-based and exhaustive checks of a constructed duality.

use cqfit::duality::{
    build_path_dual, exhaustive_probes, generate_probes, verify_relative_duality, RelativeDuality,
};
use cqfit::{PathExample, Solver};

fn main() -> cqfit::Result<()> {
    let s = Solver::default();
    let i = PathExample::from_labels("R", &[&["A"], &[], &["B"]])?;
    let j = PathExample::from_labels("R", &[&["A", "B"], &["A"], &["B"], &["A"]])?;
    let rd = RelativeDuality::from_path_dual(&i, &j, &build_path_dual(&i, &j)?);

    let probes = generate_probes(&rd.anchor, 200, 42, &s)?;
    let rep = verify_relative_duality(&rd, &probes, &s)?;
    println!("random: holds={} checked={} skipped={}", rep.holds(), rep.checked, rep.skipped);

    let all = exhaustive_probes(&j, 3);
    let rep = verify_relative_duality(&rd, &all, &s)?;
    println!("exhaustive: holds={} checked={}", rep.holds(), rep.checked);
    Ok(())
}
