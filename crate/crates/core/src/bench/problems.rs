use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{EodeError, Result};

use super::composition::{self, Composition, CompositionKind};
use super::functions;

/// The twelve benchmark landscapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FunctionId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    F8,
    F9,
    F10,
    F11,
    F12,
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug)]
enum Landscape {
    Basic(fn(&[f64]) -> f64),
    Composition(Composition),
}

#[derive(Debug)]
struct Objective {
    landscape: Landscape,
    calls: AtomicU64,
}

/// One benchmark problem: objective, box, and the scoring metadata.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub index: usize,
    pub function_id: FunctionId,
    pub dim: usize,
    pub lower_bounds: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    pub num_known_peaks: usize,
    pub peak_height: f64,
    pub niche_radius: f64,
    pub max_fes: u64,
    pub default_np: usize,
    objective: Arc<Objective>,
}

struct Row {
    function_id: FunctionId,
    dim: usize,
    nkp: usize,
    peak_height: f64,
    radius: f64,
    max_fes: u64,
    np: usize,
}

const fn row(
    function_id: FunctionId,
    dim: usize,
    nkp: usize,
    peak_height: f64,
    radius: f64,
    max_fes: u64,
    np: usize,
) -> Row {
    Row {
        function_id,
        dim,
        nkp,
        peak_height,
        radius,
        max_fes,
        np,
    }
}

use FunctionId::*;

const TABLE: [Row; 20] = [
    row(F1, 1, 2, 200.0, 0.01, 50_000, 250),
    row(F2, 1, 5, 1.0, 0.01, 50_000, 250),
    row(F3, 1, 1, 1.0, 0.01, 50_000, 250),
    row(F4, 2, 4, 200.0, 0.01, 50_000, 250),
    row(F5, 2, 2, 1.03163, 0.5, 50_000, 250),
    row(F6, 2, 18, 186.731, 0.5, 200_000, 2000),
    row(F7, 2, 36, 1.0, 0.2, 200_000, 2000),
    row(F6, 3, 81, 2709.0935, 0.5, 400_000, 3000),
    row(F7, 3, 216, 1.0, 0.2, 400_000, 4000),
    row(F8, 2, 12, -2.0, 0.01, 200_000, 1000),
    row(F9, 2, 6, 0.0, 0.01, 200_000, 1000),
    row(F10, 2, 8, 0.0, 0.01, 200_000, 1000),
    row(F11, 2, 6, 0.0, 0.01, 200_000, 1000),
    row(F11, 3, 6, 0.0, 0.01, 400_000, 1000),
    row(F12, 3, 8, 0.0, 0.01, 400_000, 1000),
    row(F11, 5, 6, 0.0, 0.01, 400_000, 1000),
    row(F12, 5, 8, 0.0, 0.01, 400_000, 2000),
    row(F11, 10, 6, 0.0, 0.01, 400_000, 1000),
    row(F12, 10, 8, 0.0, 0.01, 400_000, 1000),
    row(F12, 20, 8, 0.0, 0.01, 400_000, 800),
];

pub const NUM_PROBLEMS: usize = TABLE.len();

fn bounds(function_id: FunctionId, dim: usize) -> (Vec<f64>, Vec<f64>) {
    match function_id {
        F1 => (vec![0.0], vec![30.0]),
        F2 | F3 => (vec![0.0], vec![1.0]),
        F4 => (vec![-6.0; 2], vec![6.0; 2]),
        F5 => (vec![-1.9, -1.1], vec![1.9, 1.1]),
        F6 => (vec![-10.0; dim], vec![10.0; dim]),
        F7 => (vec![0.25; dim], vec![10.0; dim]),
        F8 => (vec![0.0; dim], vec![1.0; dim]),
        F9 | F10 | F11 | F12 => (vec![-composition::BOUND; dim], vec![composition::BOUND; dim]),
    }
}

fn landscape(function_id: FunctionId, dim: usize) -> Result<Landscape> {
    Ok(match function_id {
        F1 => Landscape::Basic(functions::five_uneven_peak_trap),
        F2 => Landscape::Basic(functions::equal_maxima),
        F3 => Landscape::Basic(functions::uneven_decreasing_maxima),
        F4 => Landscape::Basic(functions::himmelblau),
        F5 => Landscape::Basic(functions::six_hump_camel_back),
        F6 => Landscape::Basic(functions::shubert),
        F7 => Landscape::Basic(functions::vincent),
        F8 => Landscape::Basic(functions::modified_rastrigin),
        F9 => Landscape::Composition(Composition::new(CompositionKind::Cf1, dim)?),
        F10 => Landscape::Composition(Composition::new(CompositionKind::Cf2, dim)?),
        F11 => Landscape::Composition(Composition::new(CompositionKind::Cf3, dim)?),
        F12 => Landscape::Composition(Composition::new(CompositionKind::Cf4, dim)?),
    })
}

/// Returns the benchmark problem with the given 1-based index.
pub fn problem_spec(index: usize) -> Result<ProblemSpec> {
    if index == 0 || index > NUM_PROBLEMS {
        return Err(EodeError::UnknownProblem(index));
    }
    let r = &TABLE[index - 1];
    let (lower_bounds, upper_bounds) = bounds(r.function_id, r.dim);
    Ok(ProblemSpec {
        index,
        function_id: r.function_id,
        dim: r.dim,
        lower_bounds,
        upper_bounds,
        num_known_peaks: r.nkp,
        peak_height: r.peak_height,
        niche_radius: r.radius,
        max_fes: r.max_fes,
        default_np: r.np,
        objective: Arc::new(Objective {
            landscape: landscape(r.function_id, r.dim)?,
            calls: AtomicU64::new(0),
        }),
    })
}

impl ProblemSpec {
    /// Short label such as `F6(2D)`.
    pub fn label(&self) -> String {
        format!("{}({}D)", self.function_id, self.dim)
    }

    /// Raw objective value; does not touch any budget. Use
    /// [`crate::bench::evaluate`] inside the optimizer.
    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.calls.fetch_add(1, Ordering::Relaxed);
        match &self.objective.landscape {
            Landscape::Basic(f) => f(x),
            Landscape::Composition(c) => c.value(x),
        }
    }

    /// Number of objective calls made through this spec and its clones.
    pub fn objective_calls(&self) -> u64 {
        self.objective.calls.load(Ordering::Relaxed)
    }

    pub fn range(&self, d: usize) -> f64 {
        self.upper_bounds[d] - self.lower_bounds[d]
    }

    /// Inner DE generations per species: 40 up to 10D, 60 above.
    pub fn default_max_gen(&self) -> usize {
        if self.dim <= 10 {
            40
        } else {
            60
        }
    }

    /// Known global peaks of the composition functions (their centres).
    pub fn composition_centres(&self) -> Option<&[Vec<f64>]> {
        match &self.objective.landscape {
            Landscape::Composition(c) => Some(c.centres()),
            Landscape::Basic(_) => None,
        }
    }
}
