//! Opposition differential evolution inside one species.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adapt::{self, AdaptiveState, Factor, UpdateContext};
use crate::bench::{evaluate, FitnessBudget, Individual, Phase, ProblemSpec};
use crate::niching::{best_index, Species};

/// Mutation operator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationMode {
    /// Stage-wise: rand early, best-half in the middle, top-three late.
    #[default]
    Eode,
    /// rand/1 or rand/2.
    EodeR,
    /// best/1 or best/2.
    EodeB,
    /// Any of the four rand and best operators.
    EodeRb,
}

impl MutationMode {
    pub const ALL: [MutationMode; 4] = [
        MutationMode::Eode,
        MutationMode::EodeR,
        MutationMode::EodeB,
        MutationMode::EodeRb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationMode::Eode => "eode",
            MutationMode::EodeR => "eode-r",
            MutationMode::EodeB => "eode-b",
            MutationMode::EodeRb => "eode-rb",
        }
    }
}

/// Range of the inner generation fraction in which opposite populations
/// are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JrWindow {
    /// `0.67 < JR ≤ 1`.
    #[default]
    Late,
    /// `0 ≤ JR ≤ 0.5`.
    Early,
    /// `0 ≤ JR ≤ 1`.
    Full,
}

impl JrWindow {
    pub const ALL: [JrWindow; 3] = [JrWindow::Late, JrWindow::Early, JrWindow::Full];

    pub fn contains(self, jr: f64) -> bool {
        match self {
            JrWindow::Late => jr > 0.67 && jr <= 1.0,
            JrWindow::Early => (0.0..=0.5).contains(&jr),
            JrWindow::Full => (0.0..=1.0).contains(&jr),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            JrWindow::Late => "late",
            JrWindow::Early => "early",
            JrWindow::Full => "full",
        }
    }
}

/// Stage boundaries on `pr = gen / max_gen`.
pub const EXPLORE_STAGE_END: f64 = 0.33;
pub const EXPLOIT_STAGE_END: f64 = 0.67;
/// Probability of rand/1 over the two-difference operator in the first stage.
pub const RAND1_SHARE: f64 = 0.75;
/// Probability of the mirror branch during an opposition jump.
pub const MIRROR_PROBABILITY: f64 = 0.33;

/// Reflects out-of-range components back inside the box.
pub fn repair_bounds(v: &[f64], lb: &[f64], ub: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(lb.iter().zip(ub))
        .map(|(&x, (&l, &u))| {
            if x < l {
                u.min(2.0 * l - x)
            } else if x > u {
                l.max(2.0 * u - x)
            } else {
                x
            }
        })
        .collect()
}

pub fn binomial_crossover<R: Rng + ?Sized>(target: &[f64], donor: &[f64], cr: &[f64], rng: &mut R) -> Vec<f64> {
    let j_rand = rng.random_range(0..target.len());
    crossover_with(target, donor, cr, j_rand, rng)
}

/// Crossover with a given forced index.
pub fn crossover_with<R: Rng + ?Sized>(
    target: &[f64],
    donor: &[f64],
    cr: &[f64],
    j_rand: usize,
    rng: &mut R,
) -> Vec<f64> {
    (0..target.len())
        .map(|j| {
            if j == j_rand || rng.random::<f64>() <= cr[j] {
                donor[j]
            } else {
                target[j]
            }
        })
        .collect()
}

/// `base + f ∘ (a − b)`, optionally plus `g ∘ (c − d)`.
fn combine(base: &[f64], f: &[f64], a: &[f64], b: &[f64], second: Option<(&[f64], &[f64], &[f64])>) -> Vec<f64> {
    (0..base.len())
        .map(|j| {
            let mut v = base[j] + f[j] * (a[j] - b[j]);
            if let Some((g, c, d)) = second {
                v += g[j] * (c[j] - d[j]);
            }
            v
        })
        .collect()
}

/// Distinct member indices other than `exclude`, or `None` if there are
/// not enough.
fn pick_others<R: Rng + ?Sized>(n: usize, exclude: usize, count: usize, rng: &mut R) -> Option<Vec<usize>> {
    if n < count + 1 {
        return None;
    }
    let picks = sample(rng, n - 1, count);
    Some(
        picks
            .into_iter()
            .map(|i| if i >= exclude { i + 1 } else { i })
            .collect(),
    )
}

/// Top-three operator with missing members replaced by the best.
fn top_three(members: &[Individual], ranked: &[usize], f1: &[f64]) -> Vec<f64> {
    let fb = &members[ranked[0]].genome;
    let sb = ranked.get(1).map_or(fb, |&i| &members[i].genome);
    let tb = ranked.get(2).map_or(fb, |&i| &members[i].genome);
    combine(fb, f1, sb, tb, None)
}

/// Builds the donor vector for member `target`. `ranked` lists member
/// indices best first.
#[allow(clippy::too_many_arguments)]
pub fn select_donor<R: Rng + ?Sized>(
    members: &[Individual],
    ranked: &[usize],
    target: usize,
    pr: f64,
    f1: &[f64],
    f2: &[f64],
    mode: MutationMode,
    rng: &mut R,
) -> Vec<f64> {
    let n = members.len();
    let g = |i: usize| members[i].genome.as_slice();
    let fb = g(ranked[0]);

    let rand1 = |rng: &mut R| pick_others(n, target, 3, rng).map(|r| combine(g(r[0]), f1, g(r[1]), g(r[2]), None));
    let best1 = |rng: &mut R| pick_others(n, target, 2, rng).map(|r| combine(fb, f1, g(r[0]), g(r[1]), None));
    let best2 = |rng: &mut R| {
        pick_others(n, target, 4, rng).map(|r| combine(fb, f1, g(r[0]), g(r[1]), Some((f2, g(r[2]), g(r[3])))))
    };
    let rand2 = |rng: &mut R| {
        pick_others(n, target, 5, rng).map(|r| combine(g(r[0]), f1, g(r[1]), g(r[2]), Some((f2, g(r[3]), g(r[4])))))
    };

    let donor = match mode {
        MutationMode::Eode => {
            if pr <= EXPLORE_STAGE_END {
                if rng.random::<f64>() <= RAND1_SHARE {
                    rand1(rng)
                } else {
                    pick_others(n, target, 4, rng)
                        .map(|r| combine(g(r[0]), f1, g(r[1]), g(r[2]), Some((f2, g(r[2]), g(r[3])))))
                }
            } else if pr <= EXPLOIT_STAGE_END {
                let half = n.div_ceil(2);
                if half >= 2 {
                    let k = sample(rng, half, 2);
                    Some(combine(fb, f1, g(ranked[k.index(0)]), g(ranked[k.index(1)]), None))
                } else {
                    None
                }
            } else {
                Some(top_three(members, ranked, f1))
            }
        }
        MutationMode::EodeR => {
            if rng.random::<f64>() < 0.5 {
                rand1(rng)
            } else {
                rand2(rng)
            }
        }
        MutationMode::EodeB => {
            if rng.random::<f64>() < 0.5 {
                best1(rng)
            } else {
                best2(rng)
            }
        }
        MutationMode::EodeRb => match rng.random_range(0..4) {
            0 => rand1(rng),
            1 => rand2(rng),
            2 => best1(rng),
            _ => best2(rng),
        },
    };
    donor.unwrap_or_else(|| top_three(members, ranked, f1))
}

/// Mirror of `p` inside the box `[lo, hi]`.
pub fn mirror(p: &[f64], lo: &[f64], hi: &[f64]) -> Vec<f64> {
    p.iter().zip(lo.iter().zip(hi)).map(|(x, (l, h))| l + h - x).collect()
}

/// Generates and evaluates an opposite population inside the species box
/// and keeps the best `len` of the union. On budget exhaustion the species
/// is left as it was.
pub fn opposition_jump<R: Rng + ?Sized>(
    species: &mut Species,
    budget: &mut FitnessBudget,
    spec: &ProblemSpec,
    rng: &mut R,
) {
    let n = species.len();
    if n == 0 {
        return;
    }
    let (lo, hi) = species.bounding_box();
    let previous = budget.phase();
    budget.set_phase(Phase::Opposition);
    let mut opposites = Vec::with_capacity(n);
    for m in &species.members {
        let genome = if rng.random::<f64>() < MIRROR_PROBABILITY {
            mirror(&m.genome, &lo, &hi)
        } else {
            (0..spec.dim)
                .map(|d| lo[d] + rng.random::<f64>() * (hi[d] - lo[d]))
                .collect()
        };
        match evaluate(spec, &genome, budget) {
            Ok(f) => opposites.push(Individual::new(genome, f)),
            Err(_) => {
                budget.set_phase(previous);
                return;
            }
        }
    }
    budget.set_phase(previous);

    let mut union = std::mem::take(&mut species.members);
    union.extend(opposites);
    let mut order: Vec<usize> = (0..union.len()).collect();
    order.sort_by(|&a, &b| union[b].fitness.total_cmp(&union[a].fitness).then_with(|| a.cmp(&b)));
    order.truncate(n);
    order.sort_unstable();
    let mut keep = vec![false; union.len()];
    for &i in &order {
        keep[i] = true;
    }
    species.members = union
        .into_iter()
        .zip(keep)
        .filter_map(|(ind, k)| k.then_some(ind))
        .collect();
}

/// Replaces members stuck for `k` or more generations with uniform random
/// points. The species best is never restarted.
pub fn restart_stagnant<R: Rng + ?Sized>(
    species: &mut Species,
    k: u32,
    budget: &mut FitnessBudget,
    spec: &ProblemSpec,
    rng: &mut R,
) -> crate::Result<()> {
    if species.is_empty() {
        return Ok(());
    }
    let best = species.seed_index();
    let previous = budget.phase();
    budget.set_phase(Phase::Restart);
    let mut result = Ok(());
    for (i, m) in species.members.iter_mut().enumerate() {
        if i == best || m.stagnation < k {
            continue;
        }
        let genome: Vec<f64> = (0..spec.dim)
            .map(|d| rng.random_range(spec.lower_bounds[d]..=spec.upper_bounds[d]))
            .collect();
        match evaluate(spec, &genome, budget) {
            Ok(f) => *m = Individual::new(genome, f),
            Err(e) => {
                result = Err(e);
                break;
            }
        }
    }
    budget.set_phase(previous);
    result
}

/// Settings for one species evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveParams {
    pub mode: MutationMode,
    pub jr_window: JrWindow,
    pub max_gen: usize,
    pub stagnation_k: u32,
}

/// Runs up to `max_gen` generations of opposition DE on `species` and
/// returns its best member. Stops early when the budget is exhausted.
pub fn evolve_species<R: Rng + ?Sized>(
    species: &mut Species,
    spec: &ProblemSpec,
    budget: &mut FitnessBudget,
    state: &mut AdaptiveState,
    params: &EvolveParams,
    rng: &mut R,
) -> Individual {
    let previous = budget.phase();
    'generations: for gen in 0..params.max_gen {
        if budget.is_exhausted() {
            break;
        }
        let pr = gen as f64 / params.max_gen as f64;
        budget.set_phase(Phase::Evolution);
        let mut ranked = species.ranked();
        let mut stale = false;
        for i in 0..species.len() {
            if stale {
                ranked = species.ranked();
                stale = false;
            }
            let donor = select_donor(&species.members, &ranked, i, pr, &state.f1, &state.f2, params.mode, rng);
            let trial = binomial_crossover(&species.members[i].genome, &donor, &state.cr, rng);
            let trial = repair_bounds(&trial, &spec.lower_bounds, &spec.upper_bounds);
            let Ok(f) = evaluate(spec, &trial, budget) else {
                break 'generations;
            };
            let parent = &mut species.members[i];
            if f > parent.fitness {
                state.record_success(f - parent.fitness);
                *parent = Individual::new(trial, f);
                stale = true;
            } else {
                parent.stagnation += 1;
            }
        }

        if params.jr_window.contains(pr) {
            opposition_jump(species, budget, spec, rng);
        }
        if restart_stagnant(species, params.stagnation_k, budget, spec, rng).is_err() {
            break;
        }

        let (lo, hi) = species.bounding_box();
        let ctx = UpdateContext {
            species_min: &lo,
            species_max: &hi,
            lower: &spec.lower_bounds,
            upper: &spec.upper_bounds,
            fes: budget.used(),
            max_fes: budget.cap(),
        };
        adapt::update_mutation_factor(state, Factor::F1, &ctx, rng);
        adapt::update_mutation_factor(state, Factor::F2, &ctx, rng);
        adapt::update_crossover_rate(state, rng);
    }
    budget.set_phase(previous);
    species.members[best_index(&species.members)].clone()
}
