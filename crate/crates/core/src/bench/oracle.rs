//! Exhaustive grid scan plus hill refinement, used to validate the
//! benchmark implementations independently of the optimizer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{EodeError, Result};

use super::{euclidean, ProblemSpec};

/// Refined peaks must lie this close to the known global height.
pub const ORACLE_HEIGHT_TOLERANCE: f64 = 1e-3;

/// Grid maxima below `best - REFINE_WINDOW * (best - worst)` are not refined.
const REFINE_WINDOW: f64 = 0.05;

/// Trials per scale in the stochastic refinement stage.
const TRIALS_PER_SCALE: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPeak {
    pub point: Vec<f64>,
    pub fitness: f64,
}

struct Grid<'a> {
    spec: &'a ProblemSpec,
    n: usize,
    step: Vec<f64>,
}

impl Grid<'_> {
    fn coord(&self, d: usize, i: usize) -> f64 {
        if i + 1 == self.n {
            self.spec.upper_bounds[d]
        } else {
            self.spec.lower_bounds[d] + i as f64 * self.step[d]
        }
    }

    /// Multi-index over axes 1..dim for a flat in-slab offset.
    fn slab_index(&self, mut flat: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = flat % self.n;
            flat /= self.n;
        }
    }

    fn fill_slab(&self, i0: usize, slab: &mut [f64]) {
        let dim = self.spec.dim;
        let mut idx = vec![0usize; dim - 1];
        let mut x = vec![0.0; dim];
        x[0] = self.coord(0, i0);
        for (flat, v) in slab.iter_mut().enumerate() {
            self.slab_index(flat, &mut idx);
            for (d, &i) in idx.iter().enumerate() {
                x[d + 1] = self.coord(d + 1, i);
            }
            *v = self.spec.objective_value(&x);
        }
    }
}

/// Scans a `resolution^dim` grid over the problem box, refines every grid
/// local maximum near the top of the landscape, and
/// returns the distinct refined peaks within 1e-3 of the known peak height.
/// Peaks closer than the niche radius are merged, keeping the fitter one.
/// Consumes no fitness budget.
pub fn grid_oracle(spec: &ProblemSpec, resolution: usize) -> Result<Vec<GridPeak>> {
    if spec.dim > 3 {
        return Err(EodeError::DimensionTooHigh(spec.dim));
    }
    if resolution < 3 {
        return Err(EodeError::Config(format!(
            "grid resolution must be at least 3, got {resolution}"
        )));
    }
    let dim = spec.dim;
    let n = resolution;
    let grid = Grid {
        spec,
        n,
        step: (0..dim).map(|d| spec.range(d) / (n - 1) as f64).collect(),
    };
    let slab_len = n.pow(dim as u32 - 1);

    let mut slabs = [vec![0.0; slab_len], vec![0.0; slab_len], vec![0.0; slab_len]];
    grid.fill_slab(0, &mut slabs[1]);
    if n > 1 {
        grid.fill_slab(1, &mut slabs[2]);
    }

    let offsets = neighbour_offsets(dim - 1);
    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut worst_grid = f64::INFINITY;
    let mut idx = vec![0usize; dim - 1];
    let mut nidx = vec![0isize; dim - 1];

    for i0 in 0..n {
        // slabs[0] = i0-1, slabs[1] = i0, slabs[2] = i0+1
        for flat in 0..slab_len {
            let v = slabs[1][flat];
            worst_grid = worst_grid.min(v);
            grid.slab_index(flat, &mut idx);
            let mut is_max = true;
            'outer: for (s, slab) in slabs.iter().enumerate() {
                let a = i0 as isize + s as isize - 1;
                if a < 0 || a >= n as isize {
                    continue;
                }
                for off in &offsets {
                    if s == 1 && off.iter().all(|&o| o == 0) {
                        continue;
                    }
                    let mut nflat = 0usize;
                    let mut inside = true;
                    for (k, (&i, &o)) in idx.iter().zip(off).enumerate() {
                        nidx[k] = i as isize + o;
                        if nidx[k] < 0 || nidx[k] >= n as isize {
                            inside = false;
                            break;
                        }
                        nflat = nflat * n + nidx[k] as usize;
                    }
                    if inside && slab[nflat] > v {
                        is_max = false;
                        break 'outer;
                    }
                }
            }
            if is_max {
                let mut x = vec![grid.coord(0, i0); dim];
                for (d, &i) in idx.iter().enumerate() {
                    x[d + 1] = grid.coord(d + 1, i);
                }
                candidates.push((x, v));
            }
        }
        slabs.rotate_left(1);
        if i0 + 2 < n {
            grid.fill_slab(i0 + 2, &mut slabs[2]);
        }
    }

    let best_grid = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let window = REFINE_WINDOW * (best_grid - worst_grid);
    candidates.retain(|(_, v)| *v >= best_grid - window);
    let mut refined: Vec<GridPeak> = candidates
        .into_iter()
        .enumerate()
        .map(|(i, (x, v))| {
            let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
            refine(spec, x, v, &grid.step, &mut rng)
        })
        .filter(|p| (spec.peak_height - p.fitness).abs() <= ORACLE_HEIGHT_TOLERANCE)
        .collect();

    refined.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
    let mut peaks: Vec<GridPeak> = Vec::new();
    for p in refined {
        if peaks.iter().all(|q| euclidean(&q.point, &p.point) > spec.niche_radius) {
            peaks.push(p);
        }
    }
    Ok(peaks)
}

fn neighbour_offsets(dims: usize) -> Vec<Vec<isize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dims {
        out = out
            .into_iter()
            .flat_map(|v| {
                [-1isize, 0, 1].into_iter().map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out
}

/// Compass search with step halving, then a multi-scale random search that
/// can work its way into non-differentiable cusps. Clamped to the box.
fn refine(spec: &ProblemSpec, mut x: Vec<f64>, mut f: f64, grid_step: &[f64], rng: &mut ChaCha8Rng) -> GridPeak {
    let dim = spec.dim;
    let floor: Vec<f64> = (0..dim).map(|d| 1e-13 * spec.range(d)).collect();
    let clamp = |d: usize, v: f64| v.clamp(spec.lower_bounds[d], spec.upper_bounds[d]);

    let mut step = grid_step.to_vec();
    let mut iterations = 0;
    while step.iter().zip(&floor).any(|(s, fl)| s > fl) && iterations < 20_000 {
        iterations += 1;
        let mut improved = false;
        for d in 0..dim {
            for sign in [1.0, -1.0] {
                let mut y = x.clone();
                y[d] = clamp(d, y[d] + sign * step[d]);
                let fy = spec.objective_value(&y);
                if fy > f {
                    x = y;
                    f = fy;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step.iter_mut().for_each(|s| *s *= 0.5);
        }
    }

    let mut scale = grid_step.to_vec();
    while scale.iter().zip(&floor).any(|(s, fl)| s > fl) {
        let mut misses = 0;
        while misses < TRIALS_PER_SCALE {
            let y: Vec<f64> = (0..dim)
                .map(|d| clamp(d, x[d] + scale[d] * rng.random_range(-1.0..=1.0)))
                .collect();
            let fy = spec.objective_value(&y);
            if fy > f {
                x = y;
                f = fy;
                misses = 0;
            } else {
                misses += 1;
            }
        }
        scale.iter_mut().for_each(|s| *s *= 0.5);
    }
    GridPeak { point: x, fitness: f }
}
