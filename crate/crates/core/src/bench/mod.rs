//! CEC 2013 niching benchmark: problem table, objective functions, the
//! budgeted evaluator, peak counting and the brute-force grid oracle.

pub mod composition;
pub mod functions;
mod oracle;
mod problems;
mod scoring;

use serde::{Deserialize, Serialize};

use crate::error::{EodeError, Result};

pub use oracle::{grid_oracle, GridPeak};
pub use problems::{problem_spec, FunctionId, ProblemSpec, NUM_PROBLEMS};
pub use scoring::{aggregate_pr_sr, count_found_peaks, ACCURACY_LEVELS};

/// A population member. Fitness is in maximization sense.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genome: Vec<f64>,
    pub fitness: f64,
    /// Generations without personal improvement.
    #[serde(default)]
    pub stagnation: u32,
}

impl Individual {
    pub fn new(genome: Vec<f64>, fitness: f64) -> Self {
        Individual {
            genome,
            fitness,
            stagnation: 0,
        }
    }
}

/// Algorithm phase that requested an evaluation. Only used to attribute
/// budget consumption; every evaluation counts regardless of phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Init,
    Niching,
    Balance,
    Evolution,
    Opposition,
    Restart,
    LocalSearch,
    Archive,
}

impl Phase {
    pub const ALL: [Phase; 8] = [
        Phase::Init,
        Phase::Niching,
        Phase::Balance,
        Phase::Evolution,
        Phase::Opposition,
        Phase::Restart,
        Phase::LocalSearch,
        Phase::Archive,
    ];

    fn slot(self) -> usize {
        self as usize
    }
}

/// Counts objective evaluations against a hard cap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitnessBudget {
    used: u64,
    cap: u64,
    phase: Phase,
    by_phase: [u64; 8],
}

impl FitnessBudget {
    pub fn new(cap: u64) -> Self {
        FitnessBudget {
            used: 0,
            cap,
            phase: Phase::Init,
            by_phase: [0; 8],
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    pub fn remaining(&self) -> u64 {
        self.cap - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.cap
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    /// Evaluations charged while the given phase was active.
    pub fn used_in(&self, phase: Phase) -> u64 {
        self.by_phase[phase.slot()]
    }

    fn charge(&mut self) -> Result<()> {
        if self.used >= self.cap {
            return Err(EodeError::BudgetExhausted {
                used: self.used,
                cap: self.cap,
            });
        }
        self.used += 1;
        self.by_phase[self.phase.slot()] += 1;
        Ok(())
    }
}

/// Evaluates `point`, charging exactly one unit of `budget`.
pub fn evaluate(spec: &ProblemSpec, point: &[f64], budget: &mut FitnessBudget) -> Result<f64> {
    if point.len() != spec.dim {
        return Err(EodeError::DimensionMismatch {
            expected: spec.dim,
            got: point.len(),
        });
    }
    budget.charge()?;
    Ok(spec.objective_value(point))
}

/// Evaluates `genome` into a fresh individual.
pub fn evaluate_individual(spec: &ProblemSpec, genome: Vec<f64>, budget: &mut FitnessBudget) -> Result<Individual> {
    let fitness = evaluate(spec, &genome, budget)?;
    Ok(Individual::new(genome, fitness))
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
