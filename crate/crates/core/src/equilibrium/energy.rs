//! Logarithmic energies of discrete measures.
//!
//! Each cell carries uniform density, so the double integrals of log|x − y|
//! over pairs of cells have closed forms. Those are used for nearby pairs;
//! well separated pairs use a 5×5 Gauss–Legendre product rule, which avoids
//! the cancellation in the closed forms.

use rayon::prelude::*;
use serde::Serialize;

use super::measure::{Axis, DiscreteMeasure, SampledField};
use super::EquilibriumError;
use crate::specfun::quad::gauss_legendre;

const FAR: f64 = 6.0;
const JITTER: f64 = 1e-14;

/// G'' = log|t|
fn g2(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        0.5 * t * t * t.abs().ln() - 0.75 * t * t
    }
}

/// H' = log|t|
fn h1(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.abs().ln() - t
    }
}

/// x² atan(y/x), continuous at x = 0
fn xat(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x * (y / x).atan()
    }
}

/// ∂²F/∂x∂y = log(x² + y²)
fn f_rect(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let l = if r2 == 0.0 { 0.0 } else { x * y * r2.ln() };
    l - 3.0 * x * y + xat(x, y) + xat(y, x)
}

/// ∂L/∂y = log(x² + y²)
fn l_line(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let l = if r2 == 0.0 { 0.0 } else { y * r2.ln() };
    l - 2.0 * y + 2.0 * if x == 0.0 { 0.0 } else { x * (y / x).atan() }
}

struct Gl5 {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Gl5 {
    fn new() -> Self {
        let (x, w) = gauss_legendre::<f64>(5);
        Gl5 { x, w }
    }

    /// nodes and weights (summing to 1) on [a, b], a single node for atoms
    fn on(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        if a == b {
            return vec![(a, 1.0)];
        }
        let h = 0.5 * (b - a);
        self.x
            .iter()
            .zip(&self.w)
            .map(|(x, w)| (a + h * (x + 1.0), 0.5 * w))
            .collect()
    }
}

/// Mean of log|x − y| over x ∈ A, y ∈ B on one line.
fn mean_log_same(q: &Gl5, (a1, a2): (f64, f64), (b1, b2): (f64, f64)) -> f64 {
    let (wa, wb) = (a2 - a1, b2 - b1);
    let gap = (0.5 * (a1 + a2) - 0.5 * (b1 + b2)).abs();
    if gap > FAR * wa.max(wb) && gap > 0.0 {
        let (pa, pb) = (q.on(a1, a2), q.on(b1, b2));
        return pa
            .iter()
            .map(|(x, u)| u * pb.iter().map(|(y, v)| v * (x - y).abs().ln()).sum::<f64>())
            .sum();
    }
    match (wa == 0.0, wb == 0.0) {
        (true, true) => {
            let d = (a1 - b1).abs();
            if d == 0.0 {
                (JITTER * a1.abs().max(1.0)).ln()
            } else {
                d.ln()
            }
        }
        (true, false) => (h1(b2 - a1) - h1(b1 - a1)) / wb,
        (false, true) => (h1(a2 - b1) - h1(a1 - b1)) / wa,
        (false, false) => (g2(b2 - a1) - g2(b2 - a2) - g2(b1 - a1) + g2(b1 - a2)) / (wa * wb),
    }
}

/// Mean of log|x − it| over x ∈ A (real line), t ∈ B (imaginary line).
fn mean_log_cross(q: &Gl5, (a1, a2): (f64, f64), (b1, b2): (f64, f64)) -> f64 {
    let (wa, wb) = (a2 - a1, b2 - b1);
    let dx = if a1 > 0.0 {
        a1
    } else if a2 < 0.0 {
        -a2
    } else {
        0.0
    };
    let dt = if b1 > 0.0 {
        b1
    } else if b2 < 0.0 {
        -b2
    } else {
        0.0
    };
    let dist = dx.hypot(dt);
    if dist > FAR * wa.max(wb) && dist > 0.0 {
        let (pa, pb) = (q.on(a1, a2), q.on(b1, b2));
        return pa
            .iter()
            .map(|(x, u)| {
                u * pb
                    .iter()
                    .map(|(t, v)| v * 0.5 * (x * x + t * t).ln())
                    .sum::<f64>()
            })
            .sum();
    }
    match (wa == 0.0, wb == 0.0) {
        (true, true) => {
            let r2 = a1 * a1 + b1 * b1;
            0.5 * r2.max(JITTER * JITTER).ln()
        }
        (true, false) => 0.5 * (l_line(a1, b2) - l_line(a1, b1)) / wb,
        (false, true) => 0.5 * (l_line(b1, a2) - l_line(b1, a1)) / wa,
        (false, false) => {
            0.5 * (f_rect(a2, b2) - f_rect(a1, b2) - f_rect(a2, b1) + f_rect(a1, b1)) / (wa * wb)
        }
    }
}

fn mean_log(q: &Gl5, mu: &DiscreteMeasure, i: usize, nu: &DiscreteMeasure, j: usize) -> f64 {
    let (a, b) = (mu.cell(i), nu.cell(j));
    match (mu.axis, nu.axis) {
        (Axis::Real, Axis::Real) | (Axis::Imaginary, Axis::Imaginary) => mean_log_same(q, a, b),
        (Axis::Real, Axis::Imaginary) => mean_log_cross(q, a, b),
        (Axis::Imaginary, Axis::Real) => mean_log_cross(q, b, a),
    }
}

/// I(μ, ν) = ∬ log(1/|x − y|) dμ(x) dν(y).
pub fn mutual_energy(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let q = Gl5::new();
    let rows: Vec<f64> = (0..mu.len())
        .into_par_iter()
        .map(|i| {
            if mu.masses[i] == 0.0 {
                return 0.0;
            }
            let s: f64 = (0..nu.len())
                .filter(|&j| nu.masses[j] != 0.0)
                .map(|j| nu.masses[j] * mean_log(&q, mu, i, nu, j))
                .sum();
            -mu.masses[i] * s
        })
        .collect();
    rows.iter().sum()
}

/// I(μ) = ∬ log(1/|x − y|) dμ dμ; an atom with positive mass makes it +∞.
pub fn log_energy(mu: &DiscreteMeasure) -> Result<f64, EquilibriumError> {
    if let Some(i) = (0..mu.len()).find(|&i| mu.widths[i] == 0.0 && mu.masses[i] > 0.0) {
        return Err(EquilibriumError::InfiniteEnergy {
            node: mu.grid[i],
            mass: mu.masses[i],
        });
    }
    let q = Gl5::new();
    let rows: Vec<f64> = (0..mu.len())
        .into_par_iter()
        .map(|i| {
            if mu.masses[i] == 0.0 {
                return 0.0;
            }
            let s: f64 = (0..mu.len())
                .filter(|&j| mu.masses[j] != 0.0)
                .map(|j| {
                    let m = if i == j {
                        mu.widths[i].ln() - 1.5
                    } else {
                        mean_log(&q, mu, i, mu, j)
                    };
                    mu.masses[j] * m
                })
                .sum();
            -mu.masses[i] * s
        })
        .collect();
    Ok(rows.iter().sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    pub self_energies: [f64; 3],
    pub mutual: [f64; 2],
    pub field_terms: [f64; 2],
}

const MASSES: [f64; 3] = [1.0, 2.0 / 3.0, 1.0 / 3.0];

/// E = Σ I(ν_j) − I(ν₁,ν₂) − I(ν₂,ν₃) + ∫V₁dν₁ + ∫V₃dν₃ with the mass
/// conditions 1, 2/3, 1/3 and, when σ₂ is given on ν₂'s grid, ν₂ ≤ σ₂
/// nodewise.
pub fn energy_functional(
    nus: [&DiscreteMeasure; 3],
    v1: &SampledField,
    v3: &SampledField,
    sigma2: Option<&DiscreteMeasure>,
) -> Result<EnergyBreakdown, EquilibriumError> {
    for (k, (mu, want)) in nus.iter().zip(MASSES).enumerate() {
        let got: f64 = mu.masses.iter().sum();
        if (got - want).abs() > 1e-10 {
            return Err(EquilibriumError::Mass {
                which: k + 1,
                got,
                want,
            });
        }
    }
    if let Some(s) = sigma2 {
        let nu2 = nus[1];
        if s.grid.len() != nu2.grid.len()
            || s.grid
                .iter()
                .zip(&nu2.grid)
                .any(|(a, b)| (a - b).abs() > 1e-12 * a.abs().max(1.0))
        {
            return Err(EquilibriumError::Input(
                "sigma_2 must be given on the grid of nu_2".into(),
            ));
        }
        for i in 0..nu2.len() {
            let excess = nu2.masses[i] - s.masses[i];
            if excess > 1e-12 {
                return Err(EquilibriumError::UpperConstraint {
                    node: nu2.grid[i],
                    excess,
                });
            }
        }
    }
    let self_energies = [
        log_energy(nus[0])?,
        log_energy(nus[1])?,
        log_energy(nus[2])?,
    ];
    let mutual = [mutual_energy(nus[0], nus[1]), mutual_energy(nus[1], nus[2])];
    let field_terms = [v1.integrate(nus[0])?, v3.integrate(nus[2])?];
    let total = self_energies.iter().sum::<f64>() - mutual.iter().sum::<f64>()
        + field_terms.iter().sum::<f64>();
    if !total.is_finite() {
        return Err(EquilibriumError::Input("energy is not finite".into()));
    }
    Ok(EnergyBreakdown {
        total,
        self_energies,
        mutual,
        field_terms,
    })
}
