//! Hybrid composition functions CF1-CF4 of the CEC 2013 niching suite.
//!
//! Each composition blends `n` shifted, scaled and (for CF3/CF4) rotated
//! basic functions. Every component optimum sits at height 0 after
//! negation, so all `n` component centres are global peaks.

use crate::error::{EodeError, Result};

use super::functions::{expanded_griewank_rosenbrock, griewank, rastrigin, sphere, weierstrass};

const OPTIMA: &str = include_str!("../../data/cec2013/optima.dat");

const CF3_ROTATIONS: [(usize, &str); 5] = [
    (2, include_str!("../../data/cec2013/CF3_M_D2.dat")),
    (3, include_str!("../../data/cec2013/CF3_M_D3.dat")),
    (5, include_str!("../../data/cec2013/CF3_M_D5.dat")),
    (10, include_str!("../../data/cec2013/CF3_M_D10.dat")),
    (20, include_str!("../../data/cec2013/CF3_M_D20.dat")),
];

const CF4_ROTATIONS: [(usize, &str); 5] = [
    (2, include_str!("../../data/cec2013/CF4_M_D2.dat")),
    (3, include_str!("../../data/cec2013/CF4_M_D3.dat")),
    (5, include_str!("../../data/cec2013/CF4_M_D5.dat")),
    (10, include_str!("../../data/cec2013/CF4_M_D10.dat")),
    (20, include_str!("../../data/cec2013/CF4_M_D20.dat")),
];

/// Height constant applied to each normalized component.
const C: f64 = 2000.0;

pub const BOUND: f64 = 5.0;

type Component = fn(&[f64]) -> f64;

/// Which of the four composition functions to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionKind {
    Cf1,
    Cf2,
    Cf3,
    Cf4,
}

#[derive(Debug, Clone)]
pub struct Composition {
    dim: usize,
    sigma: Vec<f64>,
    lambda: Vec<f64>,
    components: Vec<Component>,
    /// Shift vectors, one per component.
    shifts: Vec<Vec<f64>>,
    /// Row-major rotation matrices; `None` means identity.
    rotations: Option<Vec<Vec<f64>>>,
    fmax: Vec<f64>,
}

/// Parses whitespace-separated reals, row-major, one row per line.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| {
            line.split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| EodeError::Parse(format!("{tok:?}: {e}")))
                })
                .collect()
        })
        .collect()
}

impl Composition {
    pub fn new(kind: CompositionKind, dim: usize) -> Result<Self> {
        let (sigma, lambda, components): (Vec<f64>, Vec<f64>, Vec<Component>) = match kind {
            CompositionKind::Cf1 => (
                vec![1.0; 6],
                vec![1.0, 1.0, 8.0, 8.0, 1.0 / 5.0, 1.0 / 5.0],
                vec![griewank, griewank, weierstrass, weierstrass, sphere, sphere],
            ),
            CompositionKind::Cf2 => (
                vec![1.0; 8],
                vec![1.0, 1.0, 10.0, 10.0, 1.0 / 10.0, 1.0 / 10.0, 1.0 / 7.0, 1.0 / 7.0],
                vec![
                    rastrigin,
                    rastrigin,
                    weierstrass,
                    weierstrass,
                    griewank,
                    griewank,
                    sphere,
                    sphere,
                ],
            ),
            CompositionKind::Cf3 => (
                vec![1.0, 1.0, 2.0, 2.0, 2.0, 2.0],
                vec![1.0 / 4.0, 1.0 / 10.0, 2.0, 1.0, 2.0, 5.0],
                vec![
                    expanded_griewank_rosenbrock,
                    expanded_griewank_rosenbrock,
                    weierstrass,
                    weierstrass,
                    griewank,
                    griewank,
                ],
            ),
            CompositionKind::Cf4 => (
                vec![1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0],
                vec![4.0, 1.0, 4.0, 1.0, 1.0 / 10.0, 1.0 / 5.0, 1.0 / 10.0, 1.0 / 40.0],
                vec![
                    rastrigin,
                    rastrigin,
                    expanded_griewank_rosenbrock,
                    expanded_griewank_rosenbrock,
                    weierstrass,
                    weierstrass,
                    griewank,
                    griewank,
                ],
            ),
        };
        let n = components.len();

        let optima = parse_matrix(OPTIMA)?;
        if optima.len() < n || optima.iter().any(|row| row.len() < dim) {
            return Err(EodeError::Parse(format!(
                "optima table too small for {n} components in {dim}D"
            )));
        }
        let shifts = optima.iter().take(n).map(|row| row[..dim].to_vec()).collect();

        let rotations = match kind {
            CompositionKind::Cf1 | CompositionKind::Cf2 => None,
            CompositionKind::Cf3 => Some(load_rotations(&CF3_ROTATIONS, dim, n)?),
            CompositionKind::Cf4 => Some(load_rotations(&CF4_ROTATIONS, dim, n)?),
        };

        let mut comp = Composition {
            dim,
            sigma,
            lambda,
            components,
            shifts,
            rotations,
            fmax: vec![1.0; n],
        };
        let probe = vec![BOUND; dim];
        comp.fmax = (0..n)
            .map(|i| {
                let z = comp.transform(&probe, i, false);
                (comp.components[i])(&z)
            })
            .collect();
        Ok(comp)
    }

    pub fn num_components(&self) -> usize {
        self.components.len()
    }

    /// Component centres, which are exactly the global peaks.
    pub fn centres(&self) -> &[Vec<f64>] {
        &self.shifts
    }

    fn transform(&self, x: &[f64], i: usize, shift: bool) -> Vec<f64> {
        let scaled: Vec<f64> = (0..self.dim)
            .map(|j| {
                let v = if shift { x[j] - self.shifts[i][j] } else { x[j] };
                v / self.lambda[i]
            })
            .collect();
        match &self.rotations {
            None => scaled,
            Some(mats) => {
                // row vector times M
                let m = &mats[i];
                (0..self.dim)
                    .map(|col| (0..self.dim).map(|row| scaled[row] * m[row * self.dim + col]).sum())
                    .collect()
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.components.len();
        let mut weights: Vec<f64> = (0..n)
            .map(|i| {
                let sq: f64 = x.iter().zip(&self.shifts[i]).map(|(a, b)| (a - b) * (a - b)).sum();
                (-sq / (2.0 * self.dim as f64 * self.sigma[i] * self.sigma[i])).exp()
            })
            .collect();
        let max_w = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let damp = 1.0 - max_w.powi(10);
        for w in weights.iter_mut() {
            if *w != max_w {
                *w *= damp;
            }
        }
        let total: f64 = weights.iter().sum();
        if total == 0.0 {
            weights.iter_mut().for_each(|w| *w = 1.0 / n as f64);
        } else {
            weights.iter_mut().for_each(|w| *w /= total);
        }

        let mut result = 0.0;
        for (i, w) in weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let z = self.transform(x, i, true);
            result += w * C * (self.components[i])(&z) / self.fmax[i];
        }
        -result
    }
}

fn load_rotations(table: &[(usize, &str)], dim: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    let text = table
        .iter()
        .find(|(d, _)| *d == dim)
        .map(|(_, t)| *t)
        .ok_or_else(|| EodeError::Parse(format!("no rotation data for {dim}D")))?;
    let rows = parse_matrix(text)?;
    if rows.len() < n * dim || rows.iter().any(|r| r.len() != dim) {
        return Err(EodeError::Parse(format!(
            "rotation file for {dim}D has {} rows, need {}",
            rows.len(),
            n * dim
        )));
    }
    Ok((0..n).map(|i| rows[i * dim..(i + 1) * dim].concat()).collect())
}
