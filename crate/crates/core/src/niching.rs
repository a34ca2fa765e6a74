//! Nearest-better clustering with a minimum subtree size and a midpoint
//! valley check, applied at two levels.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::bench::{euclidean, evaluate, FitnessBudget, Individual, Phase, ProblemSpec};
use crate::engine::repair_bounds;
use crate::error::{EodeError, Result};

/// A sub-population around one basin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Species {
    pub members: Vec<Individual>,
}

impl Species {
    pub fn new(members: Vec<Individual>) -> Self {
        Species { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Index of the fittest member, lowest index on ties.
    pub fn seed_index(&self) -> usize {
        best_index(&self.members)
    }

    pub fn seed(&self) -> &Individual {
        &self.members[self.seed_index()]
    }

    /// Member indices sorted best first.
    pub fn ranked(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.members.len()).collect();
        order.sort_by(|&a, &b| better_cmp(&self.members, a, b));
        order
    }

    /// Per-dimension minimum and maximum over the members.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let dim = self.members[0].genome.len();
        let mut lo = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for m in &self.members {
            for d in 0..dim {
                lo[d] = lo[d].min(m.genome[d]);
                hi[d] = hi[d].max(m.genome[d]);
            }
        }
        (lo, hi)
    }
}

/// Orders `a` before `b` when `a` is better: higher fitness, then lower index.
fn better_cmp(pop: &[Individual], a: usize, b: usize) -> Ordering {
    pop[b].fitness.total_cmp(&pop[a].fitness).then_with(|| a.cmp(&b))
}

fn is_better(pop: &[Individual], a: usize, b: usize) -> bool {
    better_cmp(pop, a, b) == Ordering::Less
}

pub(crate) fn best_index(pop: &[Individual]) -> usize {
    (1..pop.len()).fold(0, |best, i| if is_better(pop, i, best) { i } else { best })
}

/// Spanning tree linking every individual to its nearest better neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestBetterTree {
    /// Leader of each node; `None` only for the root.
    pub parent: Vec<Option<usize>>,
    /// Distance to the leader; zero for the root.
    pub edge_length: Vec<f64>,
    /// Subtree sizes.
    pub follow: Vec<usize>,
    pub root: usize,
    pub mean_distance: f64,
}

impl NearestBetterTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Follower indices of every edge.
    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.parent[i].is_some())
    }
}

pub fn build_tree(population: &[Individual]) -> Result<NearestBetterTree> {
    let n = population.len();
    if n < 2 {
        return Err(EodeError::PopulationTooSmall(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| better_cmp(population, a, b));

    let mut parent = vec![None; n];
    let mut edge_length = vec![0.0; n];
    for (rank, &i) in order.iter().enumerate().skip(1) {
        let mut best: Option<(f64, usize)> = None;
        for &j in &order[..rank] {
            let d = euclidean(&population[i].genome, &population[j].genome);
            let closer = match best {
                None => true,
                Some((bd, bj)) => d < bd || (d == bd && j < bj),
            };
            if closer {
                best = Some((d, j));
            }
        }
        let (d, j) = best.expect("rank > 0 has better nodes");
        parent[i] = Some(j);
        edge_length[i] = d;
    }

    let mut follow = vec![1usize; n];
    for &i in order.iter().rev() {
        if let Some(p) = parent[i] {
            follow[p] += follow[i];
        }
    }
    let mean_distance = edge_length.iter().sum::<f64>() / (n - 1) as f64;
    Ok(NearestBetterTree {
        parent,
        edge_length,
        follow,
        root: order[0],
        mean_distance,
    })
}

/// `min(5 + gen/2, max(10, 3·dim))`.
pub fn minsize_schedule(gen: usize, dim: usize) -> usize {
    (5 + gen / 2).min(10.max(3 * dim))
}

/// Cuts long edges that separate two large enough subtrees with a valley
/// between them, and returns the resulting components as species.
///
/// Each valley check costs one evaluation. When the budget runs out,
/// cutting stops and the current components are returned.
pub fn cut_species(
    population: Vec<Individual>,
    tree: &NearestBetterTree,
    phi: f64,
    minsize: usize,
    budget: &mut FitnessBudget,
    spec: &ProblemSpec,
) -> Vec<Species> {
    let n = population.len();
    let mut follow = tree.follow.clone();
    let mut cut = vec![false; n];
    let threshold = phi * tree.mean_distance;

    let mut edges: Vec<usize> = tree.edges().collect();
    edges.sort_by(|&a, &b| {
        tree.edge_length[b]
            .total_cmp(&tree.edge_length[a])
            .then_with(|| a.cmp(&b))
    });

    let component_root = |cut: &[bool], mut x: usize| {
        while let (false, Some(p)) = (cut[x], tree.parent[x]) {
            x = p;
        }
        x
    };

    let previous = budget.phase();
    budget.set_phase(Phase::Niching);
    for ef in edges {
        if tree.edge_length[ef] <= threshold {
            break;
        }
        let leader = tree.parent[ef].expect("edge has a leader");
        let er = component_root(&cut, leader);
        if follow[ef] < minsize || follow[er] - follow[ef] < minsize {
            continue;
        }
        let mid: Vec<f64> = population[ef]
            .genome
            .iter()
            .zip(&population[er].genome)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let mid = repair_bounds(&mid, &spec.lower_bounds, &spec.upper_bounds);
        let Ok(f_mid) = evaluate(spec, &mid, budget) else {
            break;
        };
        if f_mid < population[er].fitness && f_mid < population[ef].fitness {
            cut[ef] = true;
            let removed = follow[ef];
            let mut x = leader;
            loop {
                follow[x] -= removed;
                if x == er {
                    break;
                }
                x = tree.parent[x].expect("path reaches the component root");
            }
        }
    }
    budget.set_phase(previous);

    let roots: Vec<usize> = (0..n).map(|i| component_root(&cut, i)).collect();
    let mut root_order: Vec<usize> = (0..n).filter(|&i| roots[i] == i).collect();
    root_order.sort_by(|&a, &b| better_cmp(&population, a, b));
    let mut slot = vec![usize::MAX; n];
    for (k, &r) in root_order.iter().enumerate() {
        slot[r] = k;
    }
    let mut groups: Vec<Vec<Individual>> = vec![Vec::new(); root_order.len()];
    for (i, ind) in population.into_iter().enumerate() {
        groups[slot[roots[i]]].push(ind);
    }
    groups.into_iter().map(Species::new).collect()
}

/// Speciation parameters for both levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeciationParams {
    pub phi1: f64,
    pub phi2: f64,
    /// Negative means "use [`minsize_schedule`]".
    pub minsize1: i64,
    pub minsize2: usize,
}

impl Default for SpeciationParams {
    fn default() -> Self {
        SpeciationParams {
            phi1: 1.0,
            phi2: 1.0,
            minsize1: -1,
            minsize2: 5,
        }
    }
}

/// First-level cut over the whole population, then a second-level cut
/// inside every species with at least `2·minsize2` members.
pub fn two_level_speciation(
    population: Vec<Individual>,
    params: &SpeciationParams,
    gen: usize,
    budget: &mut FitnessBudget,
    spec: &ProblemSpec,
) -> Result<Vec<Species>> {
    if population.len() < 2 {
        return Ok(vec![Species::new(population)]);
    }
    let minsize1 = if params.minsize1 < 0 {
        minsize_schedule(gen, spec.dim)
    } else {
        params.minsize1 as usize
    };
    let tree = build_tree(&population)?;
    let first = cut_species(population, &tree, params.phi1, minsize1, budget, spec);

    let mut out = Vec::with_capacity(first.len());
    for species in first {
        if species.len() >= 2 * params.minsize2.max(1) && !budget.is_exhausted() {
            let tree = build_tree(&species.members)?;
            out.extend(cut_species(
                species.members,
                &tree,
                params.phi2,
                params.minsize2,
                budget,
                spec,
            ));
        } else {
            out.push(species);
        }
    }
    Ok(out)
}
