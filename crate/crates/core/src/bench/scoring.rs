use crate::error::{EodeError, Result};

use super::{euclidean, Individual, ProblemSpec};

/// The five accuracy levels used for reporting.
pub const ACCURACY_LEVELS: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

/// Counts distinct global peaks among `solutions` at accuracy `epsilon`.
///
/// Candidates are visited best-first; one is accepted when it lies within
/// `epsilon` of the global peak height and farther than the niche radius
/// from every previously accepted candidate. Consumes no budget.
pub fn count_found_peaks(spec: &ProblemSpec, solutions: &[Individual], epsilon: f64) -> usize {
    let mut order: Vec<&Individual> = solutions.iter().collect();
    order.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));

    let mut accepted: Vec<&[f64]> = Vec::new();
    for cand in order {
        if spec.peak_height - cand.fitness > epsilon {
            // sorted, so nothing later qualifies either
            break;
        }
        if accepted
            .iter()
            .all(|seed| euclidean(seed, &cand.genome) > spec.niche_radius)
        {
            accepted.push(&cand.genome);
            if accepted.len() == spec.num_known_peaks {
                break;
            }
        }
    }
    accepted.len().min(spec.num_known_peaks)
}

/// Peak ratio and success rate over a set of runs.
pub fn aggregate_pr_sr(per_run_found: &[usize], nkp: usize) -> Result<(f64, f64)> {
    if per_run_found.is_empty() {
        return Err(EodeError::EmptyRuns);
    }
    let runs = per_run_found.len() as f64;
    let total: usize = per_run_found.iter().sum();
    let successes = per_run_found.iter().filter(|&&c| c == nkp).count();
    Ok((total as f64 / (runs * nkp as f64), successes as f64 / runs))
}
