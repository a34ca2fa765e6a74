//! Success-driven adaptation of the per-dimension mutation factors and
//! crossover rates.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EodeError, Result};

/// Lower clamp for mutation factors.
pub const F_FLOOR: f64 = 0.01;

/// Exponent root of the weighted power mean.
const POWER: f64 = 1.5;

/// Which mutation factor to update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    F1,
    F2,
}

/// One successful parameter vector together with the fitness gain it bought.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Success {
    pub values: Vec<f64>,
    pub delta_f: f64,
}

/// Per-species parameter vectors and the successes collected during the
/// current generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveState {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub cr: Vec<f64>,
    pub success_f1: Vec<Success>,
    pub success_f2: Vec<Success>,
    pub success_cr: Vec<Success>,
}

impl AdaptiveState {
    /// Fresh state with every component drawn uniformly from (0, 1).
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let mut draw = || -> Vec<f64> { (0..dim).map(|_| open_unit(rng)).collect() };
        let f1 = draw();
        let f2 = draw();
        let cr = draw();
        AdaptiveState::with_values(f1, f2, cr)
    }

    pub fn with_values(f1: Vec<f64>, f2: Vec<f64>, cr: Vec<f64>) -> Self {
        AdaptiveState {
            f1,
            f2,
            cr,
            success_f1: Vec::new(),
            success_f2: Vec::new(),
            success_cr: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.f1.len()
    }

    /// Records the current vectors as successful for a gain of `delta_f`.
    pub fn record_success(&mut self, delta_f: f64) {
        let push = |set: &mut Vec<Success>, values: &[f64]| {
            set.push(Success {
                values: values.to_vec(),
                delta_f,
            })
        };
        push(&mut self.success_f1, &self.f1);
        push(&mut self.success_f2, &self.f2);
        push(&mut self.success_cr, &self.cr);
    }

    pub fn has_pending_successes(&self) -> bool {
        !(self.success_f1.is_empty() && self.success_f2.is_empty() && self.success_cr.is_empty())
    }
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            return v;
        }
    }
}

/// Normalized improvement weights.
pub fn success_weights(delta_fs: &[f64]) -> Result<Vec<f64>> {
    if delta_fs.is_empty() {
        return Err(EodeError::EmptySuccessSet);
    }
    let total: f64 = delta_fs.iter().sum();
    Ok(delta_fs.iter().map(|d| d / total).collect())
}

/// `((1/|S|) Σ w_k s_k)^(1/1.5)`.
pub fn weighted_power_mean(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(EodeError::EmptySuccessSet);
    }
    let sum: f64 = values.iter().zip(weights).map(|(s, w)| w * s).sum();
    Ok((sum / values.len() as f64).powf(1.0 / POWER))
}

/// `Σ w s² / Σ w s`.
pub fn weighted_lehmer_mean(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(EodeError::EmptySuccessSet);
    }
    let num: f64 = values.iter().zip(weights).map(|(s, w)| w * s * s).sum();
    let den: f64 = values.iter().zip(weights).map(|(s, w)| w * s).sum();
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(num / den)
}

type MeanFn = fn(&[f64], &[f64]) -> Result<f64>;

/// Componentwise mean of a success set, one value per dimension.
fn componentwise_mean(set: &[Success], dim: usize, mean: MeanFn) -> Result<Vec<f64>> {
    let deltas: Vec<f64> = set.iter().map(|s| s.delta_f).collect();
    let weights = success_weights(&deltas)?;
    (0..dim)
        .map(|d| {
            let column: Vec<f64> = set.iter().map(|s| s.values[d]).collect();
            mean(&column, &weights)
        })
        .collect()
}

/// Inputs to a mutation-factor update that describe the search situation.
#[derive(Debug, Clone, Copy)]
pub struct UpdateContext<'a> {
    pub species_min: &'a [f64],
    pub species_max: &'a [f64],
    pub lower: &'a [f64],
    pub upper: &'a [f64],
    pub fes: u64,
    pub max_fes: u64,
}

/// Updates `F1` (power mean) or `F2` (Lehmer mean) and clears its success set.
pub fn update_mutation_factor<R: Rng + ?Sized>(
    state: &mut AdaptiveState,
    which: Factor,
    ctx: &UpdateContext<'_>,
    rng: &mut R,
) -> Vec<f64> {
    let wf = 0.8 + 0.2 * rng.random::<f64>();
    mutation_factor_with_weight(state, which, ctx, wf)
}

/// Deterministic core of [`update_mutation_factor`] for a given `wf`.
pub fn mutation_factor_with_weight(
    state: &mut AdaptiveState,
    which: Factor,
    ctx: &UpdateContext<'_>,
    wf: f64,
) -> Vec<f64> {
    let dim = state.dim();
    let (current, set, mean): (&mut Vec<f64>, &mut Vec<Success>, MeanFn) = match which {
        Factor::F1 => (&mut state.f1, &mut state.success_f1, weighted_power_mean),
        Factor::F2 => (&mut state.f2, &mut state.success_f2, weighted_lehmer_mean),
    };
    let progress = 1.0 - (ctx.fes as f64 / ctx.max_fes as f64).min(1.0);
    let means = componentwise_mean(set, dim, mean).ok();
    for d in 0..dim {
        let width = (ctx.species_max[d] - ctx.species_min[d]) / (ctx.upper[d] - ctx.lower[d]);
        let mut f = 0.25 * current[d] + 0.25 * width + 0.5 * progress;
        if let Some(m) = &means {
            f = wf * f + (1.0 - wf) * m[d];
        }
        current[d] = f.clamp(F_FLOOR, 1.0);
    }
    set.clear();
    current.clone()
}

/// Updates `CR` from its successes (unchanged when there are none) and
/// clears the set.
pub fn update_crossover_rate<R: Rng + ?Sized>(state: &mut AdaptiveState, rng: &mut R) -> Vec<f64> {
    let wf = 0.9 + 0.1 * rng.random::<f64>();
    crossover_rate_with_weight(state, wf)
}

/// Deterministic core of [`update_crossover_rate`] for a given `wf`.
pub fn crossover_rate_with_weight(state: &mut AdaptiveState, wf: f64) -> Vec<f64> {
    let dim = state.dim();
    if let Ok(m) = componentwise_mean(&state.success_cr, dim, weighted_power_mean) {
        for (cr, mean) in state.cr.iter_mut().zip(&m) {
            *cr = (wf * *cr + (1.0 - wf) * mean).clamp(0.0, 1.0);
        }
    }
    state.success_cr.clear();
    state.cr.clone()
}
