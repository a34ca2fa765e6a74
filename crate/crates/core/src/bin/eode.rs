use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use eode::harness::{
    best_counts, emit_report, load_results, run_ablation, run_experiment, write_report, AblationKind, AblationRow,
    ExperimentResult, ReportFormat, RunConfig,
};
use eode::{EodeError, Result};

#[derive(Parser)]
#[command(
    name = "eode",
    version,
    about = "Multimodal optimization on the CEC 2013 niching benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded experiments on one or more problems.
    Run {
        /// Problem indices (1-20), comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        problem: Vec<usize>,
        #[command(flatten)]
        common: Common,
        /// Directory for CSV/JSON reports.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare operator or parameter variants.
    Ablate {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Problem indices, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "13,14,15,16,17,18,19,20")]
        problems: Vec<usize>,
        #[command(flatten)]
        common: Common,
        /// Accuracy level used for the best-count tally.
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        /// Directory for `ablation.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a stored report.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

#[derive(Args)]
struct Common {
    /// JSON file with RunConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    /// Base seed; run r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    np: Option<usize>,
    /// eode, eode-r, eode-b or eode-rb.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    phi1: Option<f64>,
    #[arg(long)]
    phi2: Option<f64>,
    /// late, early or full.
    #[arg(long)]
    jr: Option<String>,
    #[arg(long)]
    max_fes: Option<u64>,
    #[arg(long)]
    dump_generations: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Mutation,
    Phi,
    Jr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_name<T: DeserializeOwned>(flag: &str, value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| EodeError::Config(format!("unknown --{flag} value '{value}'")))
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.runs {
            c.runs = v;
        }
        if let Some(v) = self.seed {
            c.base_seed = v;
        }
        if self.np.is_some() {
            c.np = self.np;
        }
        if let Some(v) = &self.mode {
            c.mutation_mode = parse_name("mode", v)?;
        }
        if let Some(v) = self.phi1 {
            c.phi1 = v;
        }
        if let Some(v) = self.phi2 {
            c.phi2 = v;
        }
        if let Some(v) = &self.jr {
            c.jr_window = parse_name("jr", v)?;
        }
        if self.max_fes.is_some() {
            c.max_fes = self.max_fes;
        }
        c.dump_generations |= self.dump_generations;
        Ok(c)
    }
}

fn print_summary(results: &[ExperimentResult]) {
    for r in results {
        println!(
            "problem {:2} {} (nkp {}, {} runs)",
            r.config.problem_index,
            r.problem,
            r.nkp,
            r.runs.len()
        );
        for row in &r.summary {
            println!("  eps {:<7e} PR {:.3} SR {:.3}", row.epsilon, row.pr, row.sr);
        }
    }
}

fn write_ablation(rows: &[AblationRow], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("ablation.csv"))?;
    w.write_record(["variant", "problem_index", "problem", "epsilon", "pr", "sr"])?;
    for r in rows {
        for a in &r.summary {
            w.write_record([
                r.variant.clone(),
                r.problem_index.to_string(),
                r.problem.clone(),
                a.epsilon.to_string(),
                a.pr.to_string(),
                a.sr.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { problem, common, out } => {
            let base = common.config()?;
            let mut results = Vec::with_capacity(problem.len());
            for p in problem {
                results.push(run_experiment(&RunConfig {
                    problem_index: p,
                    ..base.clone()
                })?);
            }
            print_summary(&results);
            if let Some(dir) = out {
                emit_report(&results, &dir)?;
            }
        }
        Command::Ablate {
            kind,
            problems,
            common,
            epsilon,
            out,
        } => {
            let kind = match kind {
                Kind::Mutation => AblationKind::MutationModes,
                Kind::Phi => AblationKind::PhiPairs,
                Kind::Jr => AblationKind::JrWindows,
            };
            let base = common.config()?;
            base.validate()?;
            let rows = run_ablation(kind, &base, &problems)?;
            for r in &rows {
                let cell = r.summary.iter().find(|a| a.epsilon == epsilon);
                if let Some(a) = cell {
                    println!(
                        "{:2} {:<10} {:<12} PR {:.3} SR {:.3}",
                        r.problem_index, r.problem, r.variant, a.pr, a.sr
                    );
                }
            }
            println!("best counts at eps {epsilon:e}:");
            for (variant, n) in best_counts(&rows, epsilon) {
                println!("  {variant:<12} {n}");
            }
            if let Some(dir) = out {
                write_ablation(&rows, &dir)?;
            }
        }
        Command::Report { input, format } => {
            let results = load_results(&input)?;
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Json => ReportFormat::Json,
            };
            write_report(&results, format, std::io::stdout().lock())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
