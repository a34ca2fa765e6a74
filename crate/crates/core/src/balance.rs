//! Species balancing: top up tiny species, trim oversized ones, then refill
//! undersized ones around their seeds.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bench::{evaluate, FitnessBudget, Individual, Phase, ProblemSpec};
use crate::engine::repair_bounds;
use crate::localsearch::{covariance_matrix, niche_mean_std, sample_gaussian};
use crate::niching::Species;

/// Minimum number of members a species should have before its statistics
/// are computed.
pub const MIN_SPECIES_SIZE: usize = 10;
/// Floor on the per-dimension spread used to top up tiny species, as a
/// fraction of the box width.
pub const TOP_UP_SPREAD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesStats {
    /// Trace of the covariance, i.e. the sum of its eigenvalues.
    pub variance: f64,
    pub covariance: DMatrix<f64>,
    /// Number of best members the covariance was computed from.
    pub t: usize,
}

/// Covariance and total variance of the `max(len/gen, 10)` best members.
pub fn species_spread(species: &Species, gen: usize) -> SpeciesStats {
    let dim = species.members[0].genome.len();
    let t = (species.len() / gen.max(1)).max(MIN_SPECIES_SIZE).min(species.len());
    let covariance = if t >= 2 {
        let ranked = species.ranked();
        let top: Vec<Individual> = ranked[..t].iter().map(|&i| species.members[i].clone()).collect();
        covariance_matrix(&top).expect("at least two members")
    } else {
        DMatrix::zeros(dim, dim)
    };
    SpeciesStats {
        variance: covariance.trace(),
        covariance,
        t,
    }
}

/// `round(delta · np / count)`, at least 1.
pub fn target_size(np: usize, delta: f64, count: usize) -> usize {
    ((delta * np as f64 / count as f64).round() as usize).max(1)
}

fn evaluate_into(species: &mut Species, genome: Vec<f64>, budget: &mut FitnessBudget, spec: &ProblemSpec) -> bool {
    let genome = repair_bounds(&genome, &spec.lower_bounds, &spec.upper_bounds);
    match evaluate(spec, &genome, budget) {
        Ok(f) => {
            species.members.push(Individual::new(genome, f));
            true
        }
        Err(_) => false,
    }
}

/// Adds `max(dim − len, 10)` members around the seed of a tiny species.
fn top_up<R: Rng + ?Sized>(species: &mut Species, budget: &mut FitnessBudget, spec: &ProblemSpec, rng: &mut R) -> bool {
    let dim = spec.dim;
    let count = dim.saturating_sub(species.len()).max(MIN_SPECIES_SIZE);
    let seed = species.seed().genome.clone();
    let std = niche_mean_std(&species.members)
        .map(|(_, s)| s)
        .unwrap_or_else(|_| vec![0.0; dim]);
    let sigma: Vec<f64> = (0..dim).map(|d| std[d].max(TOP_UP_SPREAD * spec.range(d))).collect();
    for _ in 0..count {
        let genome = (0..dim)
            .map(|d| seed[d] + sigma[d] * rng.sample::<f64, _>(StandardNormal))
            .collect();
        if !evaluate_into(species, genome, budget, spec) {
            return false;
        }
    }
    true
}

/// Drops the worst members until `len == target`.
fn trim(species: &mut Species, target: usize) {
    if species.len() <= target {
        return;
    }
    let ranked = species.ranked();
    let mut keep = vec![false; species.len()];
    for &i in &ranked[..target] {
        keep[i] = true;
    }
    let members = std::mem::take(&mut species.members);
    species.members = members
        .into_iter()
        .zip(keep)
        .filter_map(|(m, k)| k.then_some(m))
        .collect();
}

/// Balances species sizes towards `delta · np / count`. Returns the
/// (possibly partially) balanced list; generation stops when the budget
/// runs out. `gen` counts from 1.
pub fn balance_species<R: Rng + ?Sized>(
    mut species: Vec<Species>,
    np: usize,
    delta: f64,
    gen: usize,
    budget: &mut FitnessBudget,
    spec: &ProblemSpec,
    rng: &mut R,
) -> Vec<Species> {
    species.retain(|s| !s.is_empty());
    if species.is_empty() {
        return species;
    }
    let previous = budget.phase();
    budget.set_phase(Phase::Balance);
    let target = target_size(np, delta, species.len());

    let mut live = true;
    let mut stats = Vec::with_capacity(species.len());
    for s in species.iter_mut() {
        if live && (s.len() <= spec.dim || s.len() <= MIN_SPECIES_SIZE) {
            live = top_up(s, budget, spec, rng);
        }
        stats.push(species_spread(s, gen));
        trim(s, target);
    }

    let mut order: Vec<usize> = (0..species.len()).collect();
    order.sort_by(|&a, &b| stats[b].variance.total_cmp(&stats[a].variance).then_with(|| a.cmp(&b)));
    'refill: for i in order {
        if !live {
            break;
        }
        let s = &mut species[i];
        let seed = s.seed().genome.clone();
        while s.len() < target {
            let genome = sample_gaussian(&seed, &stats[i].covariance, rng);
            if !evaluate_into(s, genome, budget, spec) {
                break 'refill;
            }
        }
    }
    budget.set_phase(previous);
    species
}
