//! Full optimizer loop, seeded experiments, ablations and reports.

use std::fs;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adapt::AdaptiveState;
use crate::archive::PeakArchive;
use crate::balance::balance_species;
use crate::bench::{
    aggregate_pr_sr, count_found_peaks, evaluate_individual, problem_spec, FitnessBudget, Individual, Phase,
    ProblemSpec, ACCURACY_LEVELS,
};
use crate::engine::{evolve_species, EvolveParams, JrWindow, MutationMode};
use crate::error::{EodeError, Result};
use crate::localsearch::local_search;
use crate::niching::{best_index, two_level_speciation, SpeciationParams, Species};

/// Experiment configuration. Optional fields fall back to the problem's
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem_index: usize,
    pub np: Option<usize>,
    pub runs: usize,
    pub base_seed: u64,
    pub phi1: f64,
    pub phi2: f64,
    pub minsize1: i64,
    pub minsize2: usize,
    pub delta: f64,
    pub mutation_mode: MutationMode,
    pub jr_window: JrWindow,
    pub max_gen: Option<usize>,
    pub max_fes: Option<u64>,
    pub epsilons: Vec<f64>,
    pub stagnation_k: u32,
    pub dump_generations: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem_index: 1,
            np: None,
            runs: 10,
            base_seed: 0,
            phi1: 1.0,
            phi2: 1.0,
            minsize1: -1,
            minsize2: 5,
            delta: 1.0,
            mutation_mode: MutationMode::Eode,
            jr_window: JrWindow::Late,
            max_gen: None,
            max_fes: None,
            epsilons: ACCURACY_LEVELS.to_vec(),
            stagnation_k: 10,
            dump_generations: false,
        }
    }
}

impl RunConfig {
    pub fn for_problem(problem_index: usize) -> Self {
        RunConfig {
            problem_index,
            ..RunConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(EodeError::Config(msg));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.np == Some(0) {
            return bad("np must be positive".into());
        }
        if self.phi1 <= 0.0 || self.phi2 <= 0.0 {
            return bad(format!(
                "phi values must be positive, got {} and {}",
                self.phi1, self.phi2
            ));
        }
        if self.minsize1 == 0 || self.minsize1 < -1 {
            return bad(format!("minsize1 must be -1 or positive, got {}", self.minsize1));
        }
        if self.minsize2 == 0 {
            return bad("minsize2 must be positive".into());
        }
        if self.delta <= 0.0 {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| *e <= 0.0) {
            return bad("epsilons must be a non-empty list of positive values".into());
        }
        if self.stagnation_k == 0 {
            return bad("stagnation_k must be positive".into());
        }
        problem_spec(self.problem_index)?;
        Ok(())
    }

    fn speciation(&self) -> SpeciationParams {
        SpeciationParams {
            phi1: self.phi1,
            phi2: self.phi2,
            minsize1: self.minsize1,
            minsize2: self.minsize2,
        }
    }
}

/// Outcome of one seeded run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    /// Peaks found, one entry per configured epsilon.
    pub peaks_found: Vec<usize>,
    pub fes_used: u64,
    /// Framework generations completed.
    pub generations: usize,
    /// Evaluations per phase, in [`Phase::ALL`] order.
    pub fes_by_phase: Vec<u64>,
    pub archive: PeakArchive,
    #[serde(skip)]
    pub wall_time_secs: f64,
    /// Population after each framework generation, when dumping is on.
    #[serde(skip)]
    pub snapshots: Vec<Vec<Individual>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub epsilon: f64,
    pub pr: f64,
    pub sr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: RunConfig,
    pub problem: String,
    pub nkp: usize,
    pub runs: Vec<RunRecord>,
    pub summary: Vec<AccuracyRow>,
}

impl ExperimentResult {
    pub fn pr_at(&self, epsilon: f64) -> Option<f64> {
        self.summary.iter().find(|r| r.epsilon == epsilon).map(|r| r.pr)
    }

    pub fn sr_at(&self, epsilon: f64) -> Option<f64> {
        self.summary.iter().find(|r| r.epsilon == epsilon).map(|r| r.sr)
    }
}

/// Runs the optimizer once until the budget is spent.
pub fn run_eode(config: &RunConfig, seed: u64) -> Result<RunRecord> {
    config.validate()?;
    let spec = problem_spec(config.problem_index)?;
    run_on(&spec, config, seed, 0)
}

fn run_on(spec: &ProblemSpec, config: &RunConfig, seed: u64, run: usize) -> Result<RunRecord> {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let np = config.np.unwrap_or(spec.default_np);
    let mut budget = FitnessBudget::new(config.max_fes.unwrap_or(spec.max_fes));
    let evolve = EvolveParams {
        mode: config.mutation_mode,
        jr_window: config.jr_window,
        max_gen: config.max_gen.unwrap_or_else(|| spec.default_max_gen()),
        stagnation_k: config.stagnation_k,
    };

    budget.set_phase(Phase::Init);
    let mut population = Vec::with_capacity(np);
    for _ in 0..np {
        let genome: Vec<f64> = (0..spec.dim)
            .map(|d| rng.random_range(spec.lower_bounds[d]..=spec.upper_bounds[d]))
            .collect();
        match evaluate_individual(spec, genome, &mut budget) {
            Ok(ind) => population.push(ind),
            Err(_) => break,
        }
    }

    let mut archive = PeakArchive::new();
    let mut snapshots = Vec::new();
    let mut gen = 0;
    while !budget.is_exhausted() && !population.is_empty() {
        let species = two_level_speciation(population, &config.speciation(), gen, &mut budget, spec)?;
        let species = balance_species(species, np, config.delta, gen + 1, &mut budget, spec, &mut rng);
        let mut next = Vec::with_capacity(np);
        for mut s in species {
            let mut state = AdaptiveState::random(spec.dim, &mut rng);
            let best = evolve_species(&mut s, spec, &mut budget, &mut state, &evolve, &mut rng);
            let refined = local_search(best, &s, &mut budget, spec, &mut rng);
            reinsert(&mut s, &refined);
            // a failed merge only means the budget is gone; the loop exits below
            let _ = archive.merge(refined, &mut budget, spec);
            next.extend(s.members);
        }
        population = next;
        gen += 1;
        if config.dump_generations {
            snapshots.push(population.clone());
        }
    }

    if archive.is_empty() && !population.is_empty() {
        archive.entries.push(population[best_index(&population)].clone());
    }

    let peaks_found = config
        .epsilons
        .iter()
        .map(|&eps| count_found_peaks(spec, &archive.entries, eps))
        .collect();
    Ok(RunRecord {
        run,
        seed,
        peaks_found,
        fes_used: budget.used(),
        generations: gen,
        fes_by_phase: Phase::ALL.iter().map(|&p| budget.used_in(p)).collect(),
        archive,
        wall_time_secs: started.elapsed().as_secs_f64(),
        snapshots,
    })
}

/// Puts a refined best back in place of the species best it came from.
fn reinsert(species: &mut Species, refined: &Individual) {
    if species.is_empty() {
        return;
    }
    let i = species.seed_index();
    if refined.fitness > species.members[i].fitness {
        species.members[i] = refined.clone();
    }
}

/// Runs `config.runs` seeded runs (seeds `base_seed..base_seed + runs`).
pub fn run_experiment(config: &RunConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let spec = problem_spec(config.problem_index)?;
    let runs = (0..config.runs)
        .map(|r| run_on(&spec, config, config.base_seed + r as u64, r))
        .collect::<Result<Vec<_>>>()?;
    summarize(config, &spec, runs)
}

fn summarize(config: &RunConfig, spec: &ProblemSpec, runs: Vec<RunRecord>) -> Result<ExperimentResult> {
    let summary = config
        .epsilons
        .iter()
        .enumerate()
        .map(|(k, &epsilon)| {
            let counts: Vec<usize> = runs.iter().map(|r| r.peaks_found[k]).collect();
            aggregate_pr_sr(&counts, spec.num_known_peaks).map(|(pr, sr)| AccuracyRow { epsilon, pr, sr })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        config: config.clone(),
        problem: spec.label(),
        nkp: spec.num_known_peaks,
        runs,
        summary,
    })
}

/// Which parameter an ablation varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationKind {
    MutationModes,
    PhiPairs,
    JrWindows,
}

/// The `(phi1, phi2)` pairs compared by the phi ablation.
pub const PHI_PAIRS: [(f64, f64); 3] = [(1.0, 1.0), (0.6, 0.6), (2.0, 1.0)];

/// One variant's configuration and label.
pub fn ablation_variants(kind: AblationKind, base: &RunConfig) -> Vec<(String, RunConfig)> {
    match kind {
        AblationKind::MutationModes => MutationMode::ALL
            .iter()
            .map(|&m| {
                (
                    m.name().to_string(),
                    RunConfig {
                        mutation_mode: m,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        AblationKind::PhiPairs => PHI_PAIRS
            .iter()
            .map(|&(phi1, phi2)| {
                (
                    format!("phi({phi1},{phi2})"),
                    RunConfig {
                        phi1,
                        phi2,
                        ..base.clone()
                    },
                )
            })
            .collect(),
        AblationKind::JrWindows => JrWindow::ALL
            .iter()
            .map(|&w| {
                (
                    w.name().to_string(),
                    RunConfig {
                        jr_window: w,
                        ..base.clone()
                    },
                )
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: String,
    pub problem_index: usize,
    pub problem: String,
    pub summary: Vec<AccuracyRow>,
}

/// Runs every variant of `kind` on every problem in `problems`.
pub fn run_ablation(kind: AblationKind, base: &RunConfig, problems: &[usize]) -> Result<Vec<AblationRow>> {
    let mut rows = Vec::new();
    for &p in problems {
        for (variant, cfg) in ablation_variants(kind, base) {
            let cfg = RunConfig {
                problem_index: p,
                ..cfg
            };
            let result = run_experiment(&cfg)?;
            rows.push(AblationRow {
                variant,
                problem_index: p,
                problem: result.problem,
                summary: result.summary,
            });
        }
    }
    Ok(rows)
}

/// Number of problems on which each variant attains the best PR at
/// `epsilon` (ties credit every tied variant).
pub fn best_counts(rows: &[AblationRow], epsilon: f64) -> Vec<(String, usize)> {
    let mut variants: Vec<String> = Vec::new();
    for r in rows {
        if !variants.contains(&r.variant) {
            variants.push(r.variant.clone());
        }
    }
    let mut problems: Vec<usize> = rows.iter().map(|r| r.problem_index).collect();
    problems.dedup();
    let pr = |r: &AblationRow| r.summary.iter().find(|a| a.epsilon == epsilon).map_or(0.0, |a| a.pr);
    let mut counts = vec![0usize; variants.len()];
    for p in problems {
        let cells: Vec<&AblationRow> = rows.iter().filter(|r| r.problem_index == p).collect();
        let best = cells.iter().map(|r| pr(r)).fold(f64::NEG_INFINITY, f64::max);
        for r in cells {
            if pr(r) == best {
                let k = variants.iter().position(|v| *v == r.variant).expect("known variant");
                counts[k] += 1;
            }
        }
    }
    variants.into_iter().zip(counts).collect()
}

/// Report output format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: [&str; 9] = [
    "problem",
    "epsilon",
    "run",
    "seed",
    "peaks_found",
    "nkp",
    "fes_used",
    "pr",
    "sr",
];

/// Per-run CSV rows. `pr` and `sr` are the single-run values.
pub fn write_csv<W: std::io::Write>(results: &[ExperimentResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for res in results {
        for run in &res.runs {
            for (k, &eps) in res.config.epsilons.iter().enumerate() {
                let found = run.peaks_found[k];
                let pr = found as f64 / res.nkp as f64;
                let sr = if found == res.nkp { 1.0 } else { 0.0 };
                w.write_record([
                    res.config.problem_index.to_string(),
                    eps.to_string(),
                    run.run.to_string(),
                    run.seed.to_string(),
                    found.to_string(),
                    res.nkp.to_string(),
                    run.fes_used.to_string(),
                    pr.to_string(),
                    sr.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the per-run CSV or the JSON summary to `out`.
pub fn write_report<W: std::io::Write>(results: &[ExperimentResult], format: ReportFormat, mut out: W) -> Result<()> {
    match format {
        ReportFormat::Csv => write_csv(results, out),
        ReportFormat::Json => {
            writeln!(out, "{}", summary_json(results)?)?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SummaryEntry<'a> {
    problem_index: usize,
    problem: &'a str,
    nkp: usize,
    runs: usize,
    summary: &'a [AccuracyRow],
}

/// Aggregate PR/SR per problem as pretty JSON.
pub fn summary_json(results: &[ExperimentResult]) -> Result<String> {
    let entries: Vec<SummaryEntry> = results
        .iter()
        .map(|r| SummaryEntry {
            problem_index: r.config.problem_index,
            problem: &r.problem,
            nkp: r.nkp,
            runs: r.runs.len(),
            summary: &r.summary,
        })
        .collect();
    Ok(serde_json::to_string_pretty(&entries)?)
}

pub const RESULTS_FILE: &str = "results.json";
pub const RUNS_CSV: &str = "runs.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const TIMING_CSV: &str = "timing.csv";

/// Writes `runs.csv`, `summary.json`, `results.json` (full record, read
/// back by [`load_results`]), `timing.csv`, one archive file per run and,
/// when present, one population snapshot per framework generation.
/// Everything except `timing.csv` is a pure function of the results.
pub fn emit_report(results: &[ExperimentResult], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_csv(results, fs::File::create(dir.join(RUNS_CSV))?)?;
    fs::write(dir.join(SUMMARY_JSON), summary_json(results)?)?;
    fs::write(dir.join(RESULTS_FILE), serde_json::to_string_pretty(results)?)?;

    let mut timing = csv::Writer::from_path(dir.join(TIMING_CSV))?;
    timing.write_record(["problem", "run", "seed", "wall_time_secs"])?;
    for res in results {
        let p = res.config.problem_index;
        for run in &res.runs {
            timing.write_record([
                p.to_string(),
                run.run.to_string(),
                run.seed.to_string(),
                run.wall_time_secs.to_string(),
            ])?;
            let archive = fs::File::create(dir.join(format!("archive_p{p}_run{}.csv", run.run)))?;
            run.archive.write_csv(std::io::BufWriter::new(archive))?;
            if !run.snapshots.is_empty() {
                let dumps = dir.join("generations");
                fs::create_dir_all(&dumps)?;
                for (g, pop) in run.snapshots.iter().enumerate() {
                    let path = dumps.join(format!("p{p}_run{}_gen{}.csv", run.run, g + 1));
                    write_population(pop, fs::File::create(path)?)?;
                }
            }
        }
    }
    timing.flush()?;
    Ok(())
}

/// Population snapshot: `x0..x{d-1},fitness` per row.
pub fn write_population<W: std::io::Write>(population: &[Individual], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = population.first() {
        let mut header: Vec<String> = (0..first.genome.len()).map(|d| format!("x{d}")).collect();
        header.push("fitness".into());
        w.write_record(&header)?;
    }
    for ind in population {
        let mut row: Vec<String> = ind.genome.iter().map(|v| v.to_string()).collect();
        row.push(ind.fitness.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back the full results written by [`emit_report`].
pub fn load_results(dir: &Path) -> Result<Vec<ExperimentResult>> {
    let text = fs::read_to_string(dir.join(RESULTS_FILE))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(
            (c.phi1, c.phi2, c.minsize1, c.minsize2, c.delta),
            (1.0, 1.0, -1, 5, 1.0)
        );
        assert_eq!((c.runs, c.stagnation_k), (10, 10));
        assert_eq!(c.jr_window, JrWindow::Late);
        assert_eq!(c.mutation_mode, MutationMode::Eode);
        assert_eq!(c.epsilons, ACCURACY_LEVELS.to_vec());
        c.validate().unwrap();
    }

    #[test]
    fn invalid_configs() {
        for c in [
            RunConfig {
                runs: 0,
                ..RunConfig::default()
            },
            RunConfig {
                problem_index: 21,
                ..RunConfig::default()
            },
            RunConfig {
                minsize1: -3,
                ..RunConfig::default()
            },
            RunConfig {
                epsilons: vec![],
                ..RunConfig::default()
            },
        ] {
            assert!(c.validate().is_err());
        }
    }

    #[test]
    fn config_json_roundtrip() {
        let c: RunConfig =
            serde_json::from_str(r#"{"problem_index": 6, "mutation_mode": "eode-b", "jr_window": "early"}"#).unwrap();
        assert_eq!(c.problem_index, 6);
        assert_eq!(c.mutation_mode, MutationMode::EodeB);
        assert_eq!(c.jr_window, JrWindow::Early);
        assert_eq!(c.runs, 10);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn init_only_budget() {
        let c = RunConfig {
            max_fes: Some(250),
            ..RunConfig::for_problem(1)
        };
        let r = run_eode(&c, 0).unwrap();
        assert_eq!(r.fes_used, 250);
        assert_eq!(r.generations, 0);
        assert_eq!(r.archive.len(), 1);
    }

    #[test]
    fn empty_report_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), CSV_HEADER.join(",") + "\n");
    }

    #[test]
    fn best_count_ties() {
        let row = |v: &str, p: usize, pr: f64| AblationRow {
            variant: v.into(),
            problem_index: p,
            problem: String::new(),
            summary: vec![AccuracyRow {
                epsilon: 1e-4,
                pr,
                sr: 0.0,
            }],
        };
        let rows = [row("a", 1, 1.0), row("b", 1, 1.0), row("a", 2, 0.5), row("b", 2, 0.7)];
        assert_eq!(best_counts(&rows, 1e-4), vec![("a".into(), 1), ("b".into(), 2)]);
    }
}
