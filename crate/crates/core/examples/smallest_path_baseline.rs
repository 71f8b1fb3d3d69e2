//! The smallest fitting path CQ against the most-general fitting on the
//! same samples.
//!
//! Usage: smallest_path_baseline [n] [m] [trials] [seed]

use cqfit::pac::{run_experiment, DistributionKind, ExperimentConfig, ScenarioKind};
use cqfit::Solver;

fn arg(i: usize, default: u64) -> u64 {
    std::env::args().nth(i).and_then(|s| s.parse().ok()).unwrap_or(default)
}

fn main() -> cqfit::Result<()> {
    let (n, m, trials, seed) = (arg(1, 5) as usize, arg(2, 16) as usize, arg(3, 5) as usize, arg(4, 1));
    let s = Solver::from_env()?;
    let general = run_experiment(&ExperimentConfig::new(ScenarioKind::Thm4, n, m, trials, seed), &s)?;
    let mut cfg = ExperimentConfig::new(ScenarioKind::Baseline, n, m, trials, seed);
    cfg.distribution = DistributionKind::Thm4;
    let baseline = run_experiment(&cfg, &s)?;
    for (g, b) in general.records.iter().zip(&baseline.records) {
        println!(
            "trial {:>3}  most-general={:.4}  smallest-path={:.4}  {}",
            g.trial,
            g.error.value,
            b.error.value,
            b.hypothesis.as_deref().unwrap_or("")
        );
    }
    Ok(())
}
