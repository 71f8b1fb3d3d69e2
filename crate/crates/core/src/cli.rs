//! Command-line front end. [`run`] parses arguments, dispatches to the
//! library and returns the process exit code: 0 on success, 1 on a domain
//! failure (no fitting, duality violated), 2 on usage, parse or shape
//! errors, 3 when a resource budget is exhausted.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::duality::{
    build_path_dual, exhaustive_probes, generate_probes, verify_relative_duality, DualCase,
    RelativeDuality,
};
use crate::error::{Error, Result};
use crate::hom::Solver;
use crate::model::{as_path_example, canonical_cq, Example, LabeledCollection};
use crate::pac::{
    fit_scenario_most_general, fit_smallest_path_cq, run_experiment_with_samples,
    DistributionKind, ExperimentConfig, FittingStrategy, ScenarioKind, MostGeneralScenario,
};
use crate::product::{most_specific_fitting, product_many, prune_facts, MostSpecific, DEFAULT_MAX_FACTS};
use crate::text::{format_collection, format_cq, format_example, parse_collection, parse_cq, parse_example};

#[derive(Parser, Debug)]
#[command(name = "cqfit", version, about = "Conjunctive-query fitting toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Find a homomorphism between two examples.
    Hom { src: PathBuf, dst: PathBuf },
    /// Evaluate a CQ on an instance.
    Eval { query: PathBuf, instance: PathBuf },
    /// Decide whether the first CQ is contained in the second.
    Contained { q1: PathBuf, q2: PathBuf },
    /// Direct product of examples.
    Product {
        #[arg(required = true)]
        examples: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_FACTS)]
        max_facts: usize,
    },
    /// Compute a fitting CQ for a labeled collection.
    Fit(FitArgs),
    /// Build the dual of path example I relative to path example J.
    Dual {
        i: PathBuf,
        j: PathBuf,
        /// Write the dual here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        verify_probes: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Check a candidate duality relative to an anchor example on probes.
    VerifyDuality {
        #[arg(long = "obstruction", required = true)]
        obstructions: Vec<PathBuf>,
        #[arg(long = "dual", required = true)]
        duals: Vec<PathBuf>,
        #[arg(long)]
        anchor: PathBuf,
        #[arg(long, default_value_t = 100)]
        probes: usize,
        #[arg(long)]
        seed: u64,
        /// Also check every example with at most this many values
        /// (path anchors only).
        #[arg(long)]
        exhaustive: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run a PAC experiment.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    MostSpecific,
    ScenarioMostGeneral,
    SmallestPath,
}

impl From<StrategyArg> for FittingStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::MostSpecific => FittingStrategy::MostSpecific,
            StrategyArg::ScenarioMostGeneral => FittingStrategy::ScenarioMostGeneral,
            StrategyArg::SmallestPath => FittingStrategy::SmallestPath,
        }
    }
}

#[derive(clap::Args, Debug)]
struct FitArgs {
    /// Collection file with `#positive` / `#negative` blocks.
    #[arg(long, conflicts_with_all = ["dir", "positive", "negative"])]
    collection: Option<PathBuf>,
    /// Directory with `positive/` and `negative/` subdirectories.
    #[arg(long, conflicts_with_all = ["positive", "negative"])]
    dir: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    positive: Vec<PathBuf>,
    #[arg(long, num_args = 1..)]
    negative: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "most-specific")]
    strategy: StrategyArg,
    /// Re-check that the output fits.
    #[arg(long)]
    verify: bool,
    /// Shrink the product to an equivalent core-like example first.
    #[arg(long)]
    minimize: bool,
    /// Path length of the most-general scenario.
    #[arg(long)]
    n: Option<usize>,
    /// Length bound for the smallest-path strategy.
    #[arg(long, default_value_t = 8)]
    max_len: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_FACTS)]
    max_facts: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioArg {
    Thm4,
    Thm5,
    Baseline,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistributionArg {
    Thm4,
    Thm5,
}

#[derive(clap::Args, Debug)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Distribution for the baseline scenario.
    #[arg(long, value_enum, default_value = "thm4")]
    distribution: DistributionArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    trials: usize,
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write each trial's sample as a collection file here.
    #[arg(long)]
    dump_dir: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
}

/// Outcome of a command that did not fail outright.
enum Verdict {
    Ok,
    Failed(String),
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded { .. } | Error::SizeOverflow { .. } => 3,
        Error::NoFitting | Error::Internal(_) => 1,
        _ => 2,
    }
}

/// Runs the CLI on `args` (program name first), writing results to `out`
/// and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(Verdict::Ok) => 0,
        Ok(Verdict::Failed(msg)) => {
            let _ = writeln!(err, "{msg}");
            1
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn with_file<T>(path: &Path, f: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    let src = read(path)?;
    f(&src).map_err(|e| match e {
        Error::Parse {
            line,
            column,
            message,
        } => Error::Parse {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn load_example(path: &Path) -> Result<Example> {
    with_file(path, parse_example)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(vec![]);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.is_file());
    files.sort();
    Ok(files)
}

fn load_collection(args: &FitArgs) -> Result<LabeledCollection> {
    if let Some(path) = &args.collection {
        return with_file(path, parse_collection);
    }
    let (pos, neg) = match &args.dir {
        Some(d) => (sorted_files(&d.join("positive"))?, sorted_files(&d.join("negative"))?),
        None => (args.positive.clone(), args.negative.clone()),
    };
    let load = |ps: &[PathBuf]| ps.iter().map(|p| load_example(p)).collect::<Result<Vec<_>>>();
    LabeledCollection::new(load(&pos)?, load(&neg)?)
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<Verdict> {
    let solver = Solver::from_env()?;
    match cmd {
        Command::Hom { src, dst } => {
            let (s, d) = (load_example(&src)?, load_example(&dst)?);
            s.schema()?.merge(&d.schema()?)?;
            match solver.find_hom(&s, &d)? {
                Some(h) => {
                    for (u, v) in h.mapping() {
                        writeln!(out, "{u} -> {v}")?;
                    }
                }
                None => writeln!(out, "none")?,
            }
            Ok(Verdict::Ok)
        }
        Command::Eval { query, instance } => {
            let q = with_file(&query, parse_cq)?;
            let inst = load_example(&instance)?;
            for t in solver.evaluate(&q, inst.instance())? {
                let vals: Vec<&str> = t.iter().map(|v| v.as_str()).collect();
                writeln!(out, "({})", vals.join(","))?;
            }
            Ok(Verdict::Ok)
        }
        Command::Contained { q1, q2 } => {
            let a = with_file(&q1, parse_cq)?;
            let b = with_file(&q2, parse_cq)?;
            writeln!(out, "{}", solver.contained(&a, &b)?)?;
            Ok(Verdict::Ok)
        }
        Command::Product {
            examples,
            max_facts,
        } => {
            let es = examples.iter().map(|p| load_example(p)).collect::<Result<Vec<_>>>()?;
            let p = product_many(es)?.materialize(max_facts)?;
            out.write_all(format_example(&p).as_bytes())?;
            Ok(Verdict::Ok)
        }
        Command::Fit(args) => cmd_fit(&args, &solver, out),
        Command::Dual {
            i,
            j,
            out: out_path,
            verify_probes,
            seed,
            jobs,
        } => {
            let ip = as_path_example(&load_example(&i)?)?;
            let jp = as_path_example(&load_example(&j)?)?;
            let res = build_path_dual(&ip, &jp)?;
            let text = format_example(&res.dual);
            match &out_path {
                Some(p) => write_file(p, &text)?,
                None => out.write_all(text.as_bytes())?,
            }
            if res.case == DualCase::NonMapping {
                writeln!(err, "note: I does not map to J; the dual is J")?;
            }
            if verify_probes == 0 {
                return Ok(Verdict::Ok);
            }
            let seed = seed.ok_or_else(|| Error::Schema("--verify-probes needs --seed".into()))?;
            let rd = RelativeDuality::from_path_dual(&ip, &jp, &res);
            let probes = generate_probes(&rd.anchor, verify_probes, seed, &solver)?;
            let report = in_pool(jobs, || verify_relative_duality(&rd, &probes, &solver))??;
            report_duality(&report, out)
        }
        Command::VerifyDuality {
            obstructions,
            duals,
            anchor,
            probes,
            seed,
            exhaustive,
            jobs,
        } => {
            let rd = RelativeDuality {
                obstructions: obstructions.iter().map(|p| load_example(p)).collect::<Result<_>>()?,
                duals: duals.iter().map(|p| load_example(p)).collect::<Result<_>>()?,
                anchor: load_example(&anchor)?,
            };
            let mut all = generate_probes(&rd.anchor, probes, seed, &solver)?;
            if let Some(k) = exhaustive {
                all.extend(exhaustive_probes(&as_path_example(&rd.anchor)?, k));
            }
            let report = in_pool(jobs, || verify_relative_duality(&rd, &all, &solver))??;
            report_duality(&report, out)
        }
        Command::Experiment(args) => cmd_experiment(&args, &solver, out),
    }
}

fn report_duality(report: &crate::duality::DualityReport, out: &mut dyn Write) -> Result<Verdict> {
    match &report.violation {
        None => {
            writeln!(
                out,
                "verify: pass checked={} skipped={}",
                report.checked, report.skipped
            )?;
            Ok(Verdict::Ok)
        }
        Some(v) => {
            writeln!(
                out,
                "verify: fail probe={} kind={:?}",
                v.probe_index, v.kind
            )?;
            out.write_all(format_example(&v.probe).as_bytes())?;
            Ok(Verdict::Failed("duality violated".into()))
        }
    }
}

fn cmd_fit(args: &FitArgs, solver: &Solver, out: &mut dyn Write) -> Result<Verdict> {
    let coll = load_collection(args)?;
    let q = match FittingStrategy::from(args.strategy) {
        FittingStrategy::MostSpecific => {
            if args.minimize {
                if coll.positives.is_empty() {
                    return Err(Error::EmptyPositives);
                }
                let p = product_many(coll.positives.clone())?.materialize(args.max_facts)?;
                for n in &coll.negatives {
                    if solver.hom_exists(&p, n)? {
                        return Ok(Verdict::Failed("no fitting CQ exists".into()));
                    }
                }
                canonical_cq(&prune_facts(&p, solver)?)
            } else {
                match most_specific_fitting(&coll, solver, args.max_facts)? {
                    MostSpecific::Fitting(q) => q,
                    MostSpecific::NoFitting => {
                        return Ok(Verdict::Failed("no fitting CQ exists".into()))
                    }
                    MostSpecific::SizeOverflow(_) => {
                        return Err(Error::SizeOverflow {
                            limit: args.max_facts,
                        })
                    }
                }
            }
        }
        FittingStrategy::ScenarioMostGeneral => {
            let n = args
                .n
                .ok_or_else(|| Error::Schema("--strategy scenario-most-general needs --n".into()))?;
            let sc = MostGeneralScenario::build(n, solver)?;
            fit_scenario_most_general(&coll, &sc, solver)?.cq
        }
        FittingStrategy::SmallestPath => {
            fit_smallest_path_cq(&coll, &coll.schema()?, args.max_len, solver)?
        }
    };
    if args.verify && !solver.fits(&q, &coll)? {
        return Ok(Verdict::Failed("verification failed: output does not fit".into()));
    }
    writeln!(out, "{}", format_cq(&q))?;
    Ok(Verdict::Ok)
}

fn cmd_experiment(args: &ExperimentArgs, solver: &Solver, out: &mut dyn Write) -> Result<Verdict> {
    let config = ExperimentConfig {
        scenario: match args.scenario {
            ScenarioArg::Thm4 => ScenarioKind::Thm4,
            ScenarioArg::Thm5 => ScenarioKind::Thm5,
            ScenarioArg::Baseline => ScenarioKind::Baseline,
        },
        distribution: match args.distribution {
            DistributionArg::Thm4 => DistributionKind::Thm4,
            DistributionArg::Thm5 => DistributionKind::Thm5,
        },
        n: args.n,
        m: args.m,
        trials: args.trials,
        epsilon: args.epsilon,
        delta: args.delta,
        seed: args.seed,
    };
    let (report, samples) = in_pool(args.jobs, || run_experiment_with_samples(&config, solver))??;
    write_file(&args.out, &report.to_json()?)?;
    if let Some(path) = &args.csv {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        fs::write(path, buf)?;
    }
    if let Some(dir) = &args.dump_dir {
        fs::create_dir_all(dir)?;
        for (t, s) in samples.iter().enumerate() {
            write_file(&dir.join(format!("trial_{t:04}.txt")), &format_collection(s))?;
        }
    }
    writeln!(out, "{}", report.summary_line())?;
    Ok(Verdict::Ok)
}
