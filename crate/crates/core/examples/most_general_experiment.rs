//! Most-general fittings on the path scenario: the error stays above 1/4.
//!
//! Usage: most_general_experiment [n] [m] [trials] [seed]

use cqfit::pac::{run_experiment, ExperimentConfig, ScenarioKind};
use cqfit::Solver;

fn arg(i: usize, default: u64) -> u64 {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> cqfit::Result<()> {
    let cfg = ExperimentConfig::new(
        ScenarioKind::Thm4,
        arg(1, 6) as usize,
        arg(2, 16) as usize,
        arg(3, 10) as usize,
        arg(4, 1),
    );
    let rep = run_experiment(&cfg, &Solver::from_env()?)?;
    for r in &rep.records {
        println!(
            "trial {:>3}  |S'|={:>3}  error={}/{} ({:.4})",
            r.trial,
            r.s_prime.unwrap_or(0),
            r.error.num,
            r.error.den,
            r.error.value
        );
    }
    println!("{}", rep.summary_line());
    Ok(())
}
