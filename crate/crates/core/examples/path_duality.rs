//! Dual of a two-edge path relative to the fully labeled path.

use cqfit::duality::build_path_dual;
use cqfit::text::format_example;
use cqfit::PathExample;

fn main() -> cqfit::Result<()> {
    let i = PathExample::from_labels("R", &[&["A"], &["B"]])?;
    let j = PathExample::from_labels("R", &[&["A", "B"], &["A", "B"]])?;
    let res = build_path_dual(&i, &j)?;
    print!("{}", format_example(&res.dual));
    println!(
        "values={} facts={} case={:?}",
        res.dual.domain().len(),
        res.dual.facts().len(),
        res.case
    );
    Ok(())
}
