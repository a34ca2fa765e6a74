//! Property checks shared by the proptest suites and the acceptance run.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use eode::adapt::AdaptiveState;
use eode::adapt::{success_weights, weighted_lehmer_mean, weighted_power_mean};
use eode::balance::balance_species;
use eode::bench::{count_found_peaks, evaluate, problem_spec, FitnessBudget, Individual, ProblemSpec};
use eode::engine::{crossover_with, evolve_species, mirror, repair_bounds, EvolveParams, JrWindow, MutationMode};
use eode::harness::{run_eode, run_experiment, summary_json, write_csv, RunConfig};
use eode::localsearch::local_search;
use eode::niching::{two_level_speciation, SpeciationParams, Species};

pub type Check = std::result::Result<(), TestCaseError>;

/// A box `[lo, hi]` and a point inside it.
pub fn boxed_point() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..6).prop_flat_map(|dim| {
        prop::collection::vec((-100.0f64..100.0, 1e-3f64..100.0, 0.0f64..=1.0), dim).prop_map(|cells| {
            let lo: Vec<f64> = cells.iter().map(|c| c.0).collect();
            let hi: Vec<f64> = cells.iter().map(|c| c.0 + c.1).collect();
            let p = cells.iter().map(|c| c.0 + c.2 * c.1).collect();
            (lo, hi, p)
        })
    })
}

/// A box and an arbitrary point, possibly far outside it.
pub fn boxed_anywhere() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..6).prop_flat_map(|dim| {
        prop::collection::vec((-100.0f64..100.0, 1e-3f64..100.0, -1e4f64..1e4), dim).prop_map(|cells| {
            let lo: Vec<f64> = cells.iter().map(|c| c.0).collect();
            let hi: Vec<f64> = cells.iter().map(|c| c.0 + c.1).collect();
            let v = cells.iter().map(|c| c.2).collect();
            (lo, hi, v)
        })
    })
}

pub fn mirror_involution((lo, hi, p): (Vec<f64>, Vec<f64>, Vec<f64>)) -> Check {
    let o = mirror(&p, &lo, &hi);
    for d in 0..p.len() {
        prop_assert!(o[d] >= lo[d] - 1e-9 && o[d] <= hi[d] + 1e-9, "mirror left the box");
    }
    let back = mirror(&o, &lo, &hi);
    for d in 0..p.len() {
        let tol = 1e-12 * (lo[d].abs() + hi[d].abs() + 1.0);
        prop_assert!((back[d] - p[d]).abs() <= tol, "{} vs {}", back[d], p[d]);
    }
    Ok(())
}

pub fn repair_in_bounds_and_idempotent((lo, hi, v): (Vec<f64>, Vec<f64>, Vec<f64>)) -> Check {
    let r = repair_bounds(&v, &lo, &hi);
    for d in 0..v.len() {
        prop_assert!(r[d] >= lo[d] && r[d] <= hi[d]);
        if v[d] >= lo[d] && v[d] <= hi[d] {
            prop_assert_eq!(r[d], v[d]);
        }
    }
    prop_assert_eq!(repair_bounds(&r, &lo, &hi), r);
    Ok(())
}

pub fn crossover_laws((target, donor, j_rand, seed): (Vec<f64>, Vec<f64>, usize, u64)) -> Check {
    let dim = target.len();
    let j_rand = j_rand % dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all = crossover_with(&target, &donor, &vec![1.0; dim], j_rand, &mut rng);
    prop_assert_eq!(&all, &donor);
    let none = crossover_with(&target, &donor, &vec![0.0; dim], j_rand, &mut rng);
    for d in 0..dim {
        let expected = if d == j_rand { donor[d] } else { target[d] };
        prop_assert_eq!(none[d], expected);
    }
    Ok(())
}

pub fn crossover_inputs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, usize, u64)> {
    (1usize..8).prop_flat_map(|dim| {
        (
            prop::collection::vec(-10.0f64..10.0, dim),
            prop::collection::vec(-10.0f64..10.0, dim),
            0usize..64,
            any::<u64>(),
        )
    })
}

fn random_population(spec: &ProblemSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<Individual> {
    use rand::Rng;
    (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..spec.dim)
                .map(|d| rng.random_range(spec.lower_bounds[d]..=spec.upper_bounds[d]))
                .collect();
            let f = spec.objective_value(&x);
            Individual::new(x, f)
        })
        .collect()
}

fn genome_key(ind: &Individual) -> Vec<u64> {
    ind.genome.iter().map(|v| v.to_bits()).collect()
}

/// Speciation partitions the population: every member lands in exactly
/// one species and nothing is invented.
pub fn speciation_partitions((problem, n, gen, seed): (usize, usize, usize, u64)) -> Check {
    let spec = problem_spec(problem).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let population = random_population(&spec, n, &mut rng);
    let mut budget = FitnessBudget::new(10 * n as u64);
    let species = two_level_speciation(
        population.clone(),
        &SpeciationParams::default(),
        gen,
        &mut budget,
        &spec,
    )
    .map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(species.iter().all(|s| !s.is_empty()));
    let mut got: Vec<Vec<u64>> = species.iter().flat_map(|s| s.members.iter().map(genome_key)).collect();
    let mut want: Vec<Vec<u64>> = population.iter().map(genome_key).collect();
    got.sort();
    want.sort();
    prop_assert_eq!(got, want);
    Ok(())
}

pub fn speciation_inputs() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (
        prop::sample::select(vec![1usize, 2, 4, 5, 6]),
        2usize..120,
        0usize..12,
        any::<u64>(),
    )
}

/// The species best never gets worse during evolution and the returned
/// best matches it.
pub fn elitism((problem, n, mode, seed): (usize, usize, usize, u64)) -> Check {
    let spec = problem_spec(problem).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut species = Species::new(random_population(&spec, n, &mut rng));
    let before = species.seed().fitness;
    let mut state = AdaptiveState::random(spec.dim, &mut rng);
    let params = EvolveParams {
        mode: MutationMode::ALL[mode % 4],
        jr_window: JrWindow::Full,
        max_gen: 15,
        stagnation_k: 3,
    };
    let mut budget = FitnessBudget::new(2000);
    let best = evolve_species(&mut species, &spec, &mut budget, &mut state, &params, &mut rng);
    prop_assert!(best.fitness >= before);
    prop_assert_eq!(best.fitness, species.seed().fitness);
    prop_assert!(budget.used() <= budget.cap());
    Ok(())
}

pub fn elitism_inputs() -> impl Strategy<Value = (usize, usize, usize, u64)> {
    (
        prop::sample::select(vec![1usize, 3, 4, 5, 6, 11]),
        1usize..16,
        0usize..4,
        any::<u64>(),
    )
}

pub fn local_search_monotone((problem, n, seed): (usize, usize, u64)) -> Check {
    let spec = problem_spec(problem).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let species = Species::new(random_population(&spec, n, &mut rng));
    let start = species.seed().clone();
    let mut budget = FitnessBudget::new(7);
    let out = local_search(start.clone(), &species, &mut budget, &spec, &mut rng);
    prop_assert!(out.fitness >= start.fitness);
    prop_assert_eq!(budget.used(), 7);
    Ok(())
}

pub fn local_search_inputs() -> impl Strategy<Value = (usize, u64)> {
    (1usize..30, any::<u64>())
}

pub fn lehmer_bounds(pairs: Vec<(f64, f64)>) -> Check {
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let m = weighted_lehmer_mean(&values, &weights).unwrap();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    prop_assert!(
        m >= lo * (1.0 - 1e-12) && m <= hi * (1.0 + 1e-12),
        "{lo} <= {m} <= {hi}"
    );
    Ok(())
}

pub fn lehmer_inputs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((1e-3f64..1.0, 1e-3f64..1.0), 1..20)
}

/// The power mean agrees with a direct evaluation on normalized weights.
pub fn power_mean_exact((values, deltas): (Vec<f64>, Vec<f64>)) -> Check {
    let n = values.len().min(deltas.len());
    let (values, deltas) = (&values[..n], &deltas[..n]);
    let w = success_weights(deltas).unwrap();
    let total: f64 = deltas.iter().sum();
    let direct = (values.iter().zip(deltas).map(|(s, d)| s * d / total).sum::<f64>() / n as f64).powf(2.0 / 3.0);
    let got = weighted_power_mean(values, &w).unwrap();
    prop_assert!((got - direct).abs() <= 1e-12, "{got} vs {direct}");
    Ok(())
}

pub fn power_mean_inputs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(0.0f64..1.0, 1..12),
        prop::collection::vec(1e-6f64..100.0, 1..12),
    )
}

/// Every objective call made by the optimizer goes through the budget.
pub fn budget_exactness((problem, cap, seed): (usize, u64, u64)) -> Check {
    let spec = problem_spec(problem).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let population = random_population(&spec, 40, &mut rng);
    let calls = spec.objective_calls();
    let mut budget = FitnessBudget::new(cap);
    let species = two_level_speciation(population, &SpeciationParams::default(), 0, &mut budget, &spec)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let species = balance_species(species, 40, 1.0, 1, &mut budget, &spec, &mut rng);
    let params = EvolveParams {
        mode: MutationMode::Eode,
        jr_window: JrWindow::Full,
        max_gen: 10,
        stagnation_k: 2,
    };
    for mut s in species {
        let mut state = AdaptiveState::random(spec.dim, &mut rng);
        let best = evolve_species(&mut s, &spec, &mut budget, &mut state, &params, &mut rng);
        local_search(best, &s, &mut budget, &spec, &mut rng);
    }
    prop_assert!(budget.used() <= cap);
    prop_assert_eq!(spec.objective_calls() - calls, budget.used());
    let before = spec.objective_calls();
    if budget.is_exhausted() {
        prop_assert!(evaluate(&spec, &vec![0.0; spec.dim], &mut budget).is_err());
        prop_assert_eq!(spec.objective_calls(), before);
    }
    Ok(())
}

pub fn budget_inputs() -> impl Strategy<Value = (usize, u64, u64)> {
    (prop::sample::select(vec![1usize, 4, 6, 12]), 1u64..3000, any::<u64>())
}

/// Looser accuracy never finds fewer peaks, for run-level counts and for
/// arbitrary solution sets.
pub fn pr_monotone((problem, seed): (usize, u64)) -> Check {
    let spec = problem_spec(problem).unwrap();
    let config = RunConfig {
        max_fes: Some(3000),
        ..RunConfig::for_problem(problem)
    };
    let r = run_eode(&config, seed).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(r.peaks_found.windows(2).all(|w| w[0] >= w[1]), "{:?}", r.peaks_found);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sols = random_population(&spec, 50, &mut rng);
    let counts: Vec<usize> = config
        .epsilons
        .iter()
        .map(|&e| count_found_peaks(&spec, &sols, e))
        .collect();
    prop_assert!(counts.windows(2).all(|w| w[0] >= w[1]));
    Ok(())
}

pub fn pr_inputs() -> impl Strategy<Value = (usize, u64)> {
    (prop::sample::select(vec![1usize, 2, 3, 4, 5, 6, 10]), any::<u64>())
}

/// The same configuration and seed produce byte-identical reports.
pub fn reports_bit_identical((problem, seed): (usize, u64)) -> Check {
    let config = RunConfig {
        runs: 2,
        base_seed: seed % 1_000_000,
        max_fes: Some(4000),
        ..RunConfig::for_problem(problem)
    };
    let render = || -> eode::Result<(Vec<u8>, String, String)> {
        let res = run_experiment(&config)?;
        let mut csv = Vec::new();
        write_csv(std::slice::from_ref(&res), &mut csv)?;
        Ok((
            csv,
            summary_json(std::slice::from_ref(&res))?,
            serde_json::to_string(&res)?,
        ))
    };
    let a = render().map_err(|e| TestCaseError::fail(e.to_string()))?;
    let b = render().map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(a == b);
    Ok(())
}

pub fn evaluate_pure((problem, seed): (usize, u64)) -> Check {
    let spec = problem_spec(problem).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = &random_population(&spec, 1, &mut rng)[0];
    prop_assert_eq!(spec.objective_value(&p.genome).to_bits(), p.fitness.to_bits());
    Ok(())
}

pub fn any_problem() -> impl Strategy<Value = (usize, u64)> {
    (1usize..=20, any::<u64>())
}

/// Runs `check` through a seeded proptest runner.
pub fn run_property<S, F>(cases: u32, strategy: S, check: F) -> std::result::Result<(), String>
where
    S: Strategy,
    F: Fn(S::Value) -> Check,
{
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

/// Every property with its case count, as used by the acceptance run.
pub fn all_properties() -> Vec<(&'static str, std::result::Result<(), String>)> {
    vec![
        ("mirror involution", run_property(256, boxed_point(), mirror_involution)),
        (
            "repair in bounds and idempotent",
            run_property(256, boxed_anywhere(), repair_in_bounds_and_idempotent),
        ),
        (
            "crossover CR=0/CR=1 laws",
            run_property(256, crossover_inputs(), crossover_laws),
        ),
        (
            "species partition",
            run_property(48, speciation_inputs(), speciation_partitions),
        ),
        ("elitism per species", run_property(48, elitism_inputs(), elitism)),
        (
            "local search monotone",
            run_property(64, local_search_inputs(), |(n, s)| local_search_monotone((4, n, s))),
        ),
        ("Lehmer mean bounds", run_property(256, lehmer_inputs(), lehmer_bounds)),
        (
            "power mean exact",
            run_property(256, power_mean_inputs(), power_mean_exact),
        ),
        ("budget exactness", run_property(32, budget_inputs(), budget_exactness)),
        ("PR monotone in epsilon", run_property(16, pr_inputs(), pr_monotone)),
        (
            "bit-identical reports",
            run_property(6, pr_inputs(), reports_bit_identical),
        ),
        ("evaluate is pure", run_property(64, any_problem(), evaluate_pure)),
    ]
}
