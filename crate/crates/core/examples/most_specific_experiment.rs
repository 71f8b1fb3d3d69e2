//! Most-specific fittings on the half-labeled path scenario: every unseen
//! support point is misclassified.
//!
//! Usage: most_specific_experiment [n] [m] [trials] [seed]

use cqfit::pac::{run_experiment, ExperimentConfig, ScenarioKind};
use cqfit::Solver;

fn arg(i: usize, default: u64) -> u64 {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> cqfit::Result<()> {
    let mut cfg = ExperimentConfig::new(
        ScenarioKind::Thm5,
        arg(1, 6) as usize,
        arg(2, 8) as usize,
        arg(3, 5) as usize,
        arg(4, 1),
    );
    cfg.epsilon = 0.5;
    let rep = run_experiment(&cfg, &Solver::from_env()?)?;
    for r in &rep.records {
        println!(
            "trial {:>3}  distinct={:>3}  error={}/{} ({:.4})",
            r.trial, r.distinct, r.error.num, r.error.den, r.error.value
        );
    }
    println!("{}", rep.summary_line());
    Ok(())
}
