//! Basic landscapes of the CEC 2013 niching suite, in maximization sense.

use std::f64::consts::PI;
use std::sync::LazyLock;

/// Five-uneven-peak trap, `x ∈ [0, 30]`. Global peaks of 200 at both ends.
pub fn five_uneven_peak_trap(x: &[f64]) -> f64 {
    let x = x[0];
    if x < 0.0 {
        -1.0
    } else if x < 2.5 {
        80.0 * (2.5 - x)
    } else if x < 5.0 {
        64.0 * (x - 2.5)
    } else if x < 7.5 {
        64.0 * (7.5 - x)
    } else if x < 12.5 {
        28.0 * (x - 7.5)
    } else if x < 17.5 {
        28.0 * (17.5 - x)
    } else if x < 22.5 {
        32.0 * (x - 17.5)
    } else if x < 27.5 {
        32.0 * (27.5 - x)
    } else if x <= 30.0 {
        80.0 * (x - 27.5)
    } else {
        -1.0
    }
}

/// Equal maxima, `sin^6(5πx)` on `[0, 1]`.
pub fn equal_maxima(x: &[f64]) -> f64 {
    (5.0 * PI * x[0]).sin().powi(6)
}

/// Uneven decreasing maxima on `[0, 1]`.
pub fn uneven_decreasing_maxima(x: &[f64]) -> f64 {
    let x = x[0];
    let envelope = (-2.0 * 2f64.ln() * ((x - 0.08) / 0.854).powi(2)).exp();
    envelope * (5.0 * PI * (x.powf(0.75) - 0.05)).sin().powi(6)
}

/// Himmelblau, shifted up so the four global peaks sit at 200.
pub fn himmelblau(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    200.0 - (a * a + b - 11.0).powi(2) - (a + b * b - 7.0).powi(2)
}

/// Negated six-hump camel back.
pub fn six_hump_camel_back(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    let a2 = a * a;
    let b2 = b * b;
    let term1 = (4.0 - 2.1 * a2 + a2 * a2 / 3.0) * a2;
    let term2 = a * b;
    let term3 = (4.0 * b2 - 4.0) * b2;
    -(term1 + term2 + term3)
}

/// Negated Shubert product, any dimension.
pub fn shubert(x: &[f64]) -> f64 {
    let product: f64 = x
        .iter()
        .map(|&xi| {
            (1..=5)
                .map(|j| {
                    let j = j as f64;
                    j * ((j + 1.0) * xi + j).cos()
                })
                .sum::<f64>()
        })
        .product();
    -product
}

/// Vincent, `mean(sin(10 ln x))` on `[0.25, 10]^D`.
pub fn vincent(x: &[f64]) -> f64 {
    x.iter().map(|&xi| (10.0 * xi.ln()).sin()).sum::<f64>() / x.len() as f64
}

/// Modified Rastrigin with `k = (3, 4)` in 2D; 12 equal peaks at -2.
pub fn modified_rastrigin(x: &[f64]) -> f64 {
    const K: [f64; 2] = [3.0, 4.0];
    -x.iter()
        .zip(K.iter().cycle())
        .map(|(&xi, &k)| 10.0 + 9.0 * (2.0 * PI * k * xi).cos())
        .sum::<f64>()
}

// Minimization-sense components used inside the composition functions.

pub fn sphere(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).sum()
}

pub fn griewank(z: &[f64]) -> f64 {
    let sum: f64 = z.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = z
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    sum - prod + 1.0
}

pub fn rastrigin(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0).sum()
}

const WEIERSTRASS_A: f64 = 0.5;
const WEIERSTRASS_B: f64 = 3.0;
const WEIERSTRASS_TERMS: usize = 21;

struct WeierstrassTable {
    amplitude: [f64; WEIERSTRASS_TERMS],
    /// `b^k`; phases are reduced modulo one cycle before taking the cosine.
    frequency: [f64; WEIERSTRASS_TERMS],
    /// Per-dimension offset, `sum_k a^k cos(pi b^k)`.
    offset: f64,
}

static WEIERSTRASS: LazyLock<WeierstrassTable> = LazyLock::new(|| {
    let mut amplitude = [0.0; WEIERSTRASS_TERMS];
    let mut frequency = [0.0; WEIERSTRASS_TERMS];
    let mut offset = 0.0;
    for k in 0..WEIERSTRASS_TERMS {
        amplitude[k] = WEIERSTRASS_A.powi(k as i32);
        frequency[k] = WEIERSTRASS_B.powi(k as i32);
        offset += amplitude[k] * cycle_cos(frequency[k] * 0.5);
    }
    WeierstrassTable {
        amplitude,
        frequency,
        offset,
    }
});

/// `cos(2πt)` with `t` reduced to one period first.
#[inline]
fn cycle_cos(t: f64) -> f64 {
    (2.0 * PI * (t - t.floor())).cos()
}

pub fn weierstrass(z: &[f64]) -> f64 {
    let table = &*WEIERSTRASS;
    let mut total = 0.0;
    for &v in z {
        let shifted = v + 0.5;
        for k in 0..WEIERSTRASS_TERMS {
            total += table.amplitude[k] * cycle_cos(table.frequency[k] * shifted);
        }
    }
    total - z.len() as f64 * table.offset
}

fn f8f2(a: f64, b: f64) -> f64 {
    let f2 = 100.0 * (a * a - b).powi(2) + (1.0 - a).powi(2);
    1.0 + f2 * f2 / 4000.0 - f2.cos()
}

/// Expanded Griewank-plus-Rosenbrock, evaluated on `z + 1`.
pub fn expanded_griewank_rosenbrock(z: &[f64]) -> f64 {
    let d = z.len();
    let mut sum = 0.0;
    for i in 0..d - 1 {
        sum += f8f2(z[i] + 1.0, z[i + 1] + 1.0);
    }
    sum + f8f2(z[d - 1] + 1.0, z[0] + 1.0)
}
