//! Directed and covariance-guided refinement of a species' best member.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bench::{evaluate, FitnessBudget, Individual, Phase, ProblemSpec};
use crate::engine::repair_bounds;
use crate::error::{EodeError, Result};
use crate::niching::Species;

/// Iterations per call.
pub const LOCAL_SEARCH_ITERATIONS: usize = 10;
/// Range of the initial step variances and of each increment.
pub const VARS_RANGE: (f64, f64) = (0.001, 0.01);
/// First diagonal jitter tried when a covariance is not positive definite.
pub const COVARIANCE_JITTER: f64 = 1e-12;

/// Componentwise sample mean and standard deviation (`M − 1` denominator).
pub fn niche_mean_std(members: &[Individual]) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = members.len();
    if m < 2 {
        return Err(EodeError::TooFewMembers(m));
    }
    let dim = members[0].genome.len();
    let mut mean = vec![0.0; dim];
    for ind in members {
        for (m, x) in mean.iter_mut().zip(&ind.genome) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|v| *v /= m as f64);
    let std = (0..dim)
        .map(|d| {
            let ss: f64 = members.iter().map(|ind| (ind.genome[d] - mean[d]).powi(2)).sum();
            (ss / (m - 1) as f64).sqrt()
        })
        .collect();
    Ok((mean, std))
}

/// Sample covariance of the member genomes (`M − 1` denominator).
pub fn covariance_matrix(members: &[Individual]) -> Result<DMatrix<f64>> {
    let m = members.len();
    if m < 2 {
        return Err(EodeError::TooFewMembers(m));
    }
    let dim = members[0].genome.len();
    let (mean, _) = niche_mean_std(members)?;
    let mut cov = DMatrix::zeros(dim, dim);
    for ind in members {
        let c: Vec<f64> = ind.genome.iter().zip(&mean).map(|(x, mu)| x - mu).collect();
        for i in 0..dim {
            for j in i..dim {
                cov[(i, j)] += c[i] * c[j];
            }
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let v = cov[(i, j)] / (m - 1) as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}

/// Draws from `N(mean, cov)`. A diagonal jitter, grown tenfold per attempt,
/// is added while the matrix fails Cholesky factorization.
pub fn sample_gaussian<R: Rng + ?Sized>(mean: &[f64], cov: &DMatrix<f64>, rng: &mut R) -> Vec<f64> {
    let dim = mean.len();
    let scale = (0..dim).map(|i| cov[(i, i)].abs()).fold(0.0, f64::max).max(1.0);
    let mut jitter = 0.0;
    let lower = loop {
        let mut m = cov.clone();
        for i in 0..dim {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = m.cholesky() {
            break ch.l();
        }
        jitter = if jitter == 0.0 {
            COVARIANCE_JITTER * scale
        } else {
            jitter * 10.0
        };
    };
    let z = DVector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let step = lower * z;
    mean.iter().zip(step.iter()).map(|(m, s)| m + s).collect()
}

/// Covariance of the `mbest = max(len/4, 10)` best members, or a diagonal
/// built from `vars` scaled to the box when fewer than two members exist.
fn sampling_covariance(species: &Species, vars: &[f64], spec: &ProblemSpec) -> DMatrix<f64> {
    let ranked = species.ranked();
    let mbest = (species.len() / 4).max(10).min(species.len());
    if mbest >= 2 {
        let top: Vec<Individual> = ranked[..mbest].iter().map(|&i| species.members[i].clone()).collect();
        covariance_matrix(&top).expect("at least two members")
    } else {
        DMatrix::from_diagonal(&DVector::from_iterator(
            spec.dim,
            (0..spec.dim).map(|d| (vars[d] * spec.range(d)).powi(2)),
        ))
    }
}

/// Tries [`LOCAL_SEARCH_ITERATIONS`] candidates around `localbest` and
/// returns the best point seen. Never returns anything worse than the input.
pub fn local_search<R: Rng + ?Sized>(
    localbest: Individual,
    species: &Species,
    budget: &mut FitnessBudget,
    spec: &ProblemSpec,
    rng: &mut R,
) -> Individual {
    let previous = budget.phase();
    budget.set_phase(Phase::LocalSearch);
    let mut best = localbest;
    let mut vars: Vec<f64> = (0..spec.dim)
        .map(|_| rng.random_range(VARS_RANGE.0..VARS_RANGE.1))
        .collect();
    let mut dirvec: Option<Vec<f64>> = None;
    let cov = sampling_covariance(species, &vars, spec);

    for _ in 0..LOCAL_SEARCH_ITERATIONS {
        if budget.is_exhausted() {
            break;
        }
        let candidate = match &dirvec {
            Some(dir) if rng.random::<f64>() <= 0.5 => best
                .genome
                .iter()
                .zip(vars.iter().zip(dir))
                .map(|(x, (v, d))| x + v * d)
                .collect(),
            _ => sample_gaussian(&best.genome, &cov, rng),
        };
        let candidate = repair_bounds(&candidate, &spec.lower_bounds, &spec.upper_bounds);
        let Ok(f) = evaluate(spec, &candidate, budget) else {
            break;
        };
        if f > best.fitness {
            dirvec = Some(candidate.iter().zip(&best.genome).map(|(c, b)| c - b).collect());
            best = Individual {
                genome: candidate,
                fitness: f,
                stagnation: 0,
            };
        } else {
            for v in vars.iter_mut() {
                *v += rng.random_range(VARS_RANGE.0..VARS_RANGE.1);
            }
        }
    }
    budget.set_phase(previous);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::problem_spec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(xs: &[&[f64]]) -> Vec<Individual> {
        xs.iter().map(|x| Individual::new(x.to_vec(), 0.0)).collect()
    }

    #[test]
    fn mean_and_std() {
        let (m, s) = niche_mean_std(&pts(&[&[1.0], &[3.0]])).unwrap();
        assert_eq!(m, vec![2.0]);
        assert!((s[0] - 2f64.sqrt()).abs() < 1e-15);
        let (m, s) = niche_mean_std(&pts(&[&[0.0, 0.0], &[2.0, 2.0]])).unwrap();
        assert_eq!(m, vec![1.0, 1.0]);
        assert!(s.iter().all(|v| *v > 0.0));
        let (_, s) = niche_mean_std(&pts(&[&[4.0, 1.0], &[4.0, 1.0]])).unwrap();
        assert_eq!(s, vec![0.0, 0.0]);
        assert!(matches!(
            niche_mean_std(&pts(&[&[1.0]])),
            Err(EodeError::TooFewMembers(1))
        ));
    }

    #[test]
    fn square_covariance() {
        let c = covariance_matrix(&pts(&[&[0.0, 0.0], &[2.0, 0.0], &[0.0, 2.0], &[2.0, 2.0]])).unwrap();
        assert!((c[(0, 0)] - 4.0 / 3.0).abs() < 1e-15);
        assert!((c[(1, 1)] - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(c[(0, 1)], 0.0);
    }

    #[test]
    fn correlated_covariance() {
        let c = covariance_matrix(&pts(&[&[0.0, 0.0], &[1.0, 1.0], &[3.0, 3.0]])).unwrap();
        assert!((c[(0, 1)] - c[(0, 0)]).abs() < 1e-15);
        assert_eq!(c, c.transpose());
    }

    #[test]
    fn singular_covariance_still_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = covariance_matrix(&pts(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        let x = sample_gaussian(&[1.0, 1.0], &c, &mut rng);
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-3));
    }

    #[test]
    fn exhausted_budget_returns_input() {
        let spec = problem_spec(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lb = Individual::new(vec![3.0, 2.0], 200.0);
        let species = Species::new(vec![lb.clone()]);
        let mut budget = FitnessBudget::new(0);
        let out = local_search(lb.clone(), &species, &mut budget, &spec, &mut rng);
        assert_eq!(out, lb);
    }

    #[test]
    fn uses_ten_evaluations() {
        let spec = problem_spec(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let members: Vec<Individual> = (0..20)
            .map(|i| {
                let x = vec![3.0 + 0.01 * (i as f64).sin(), 2.0 + 0.01 * (i as f64).cos()];
                let f = spec.objective_value(&x);
                Individual::new(x, f)
            })
            .collect();
        let species = Species::new(members);
        let start = species.seed().clone();
        let mut budget = FitnessBudget::new(100);
        let out = local_search(start.clone(), &species, &mut budget, &spec, &mut rng);
        assert_eq!(budget.used(), 10);
        assert!(out.fitness >= start.fitness);
    }
}
