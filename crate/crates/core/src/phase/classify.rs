//! Cases I–IV of the (α, τ) plane, separated by τ = √(α+2) (α ≥ −2) and
//! τ = √(−1/α) (α < 0), which touch only at the multicritical point (−1, 1).

use serde::Serialize;

use super::gamma::solve_gamma;
use super::PhaseError;

pub const ON_CURVE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Case {
    I,
    II,
    III,
    IV,
    CurveAB,
    CurveC,
    Multicritical,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
            Case::IV => "IV",
            Case::CurveAB => "CurveAB",
            Case::CurveC => "CurveC",
            Case::Multicritical => "Multicritical",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PhasePoint {
    pub alpha: f64,
    pub tau: f64,
    pub case: Case,
    /// Euclidean distance to τ = √(α+2)
    pub dist_ab: f64,
    /// Euclidean distance to τ = √(−1/α)
    pub dist_c: f64,
    pub dist_multicritical: f64,
    /// γ when the continuation from (−1, 1) reaches (α, τ)
    pub gamma: Option<f64>,
}

/// Newton polish of a stationary point of the squared distance, then the
/// distance itself.
fn refine(d2: impl Fn(f64) -> f64, grad: impl Fn(f64) -> (f64, f64), mut t: f64, lo: f64) -> f64 {
    for _ in 0..50 {
        let (g, dg) = grad(t);
        if dg <= 0.0 {
            break;
        }
        let next = (t - g / dg).max(lo);
        if (next - t).abs() <= 1e-16 * t.abs().max(1.0) {
            t = next;
            break;
        }
        t = next;
    }
    d2(t).max(0.0).sqrt()
}

/// Scan over log-spaced parameters, then polish the best candidates.
fn min_distance(
    d2: &dyn Fn(f64) -> f64,
    grad: &dyn Fn(f64) -> (f64, f64),
    lo: f64,
    hi: f64,
    endpoint: Option<f64>,
) -> f64 {
    let m = 4000;
    let ts: Vec<f64> = (0..=m)
        .map(|k| lo + (hi - lo) * (k as f64 / m as f64).powi(3))
        .collect();
    let mut best = f64::INFINITY;
    for k in 1..m {
        if d2(ts[k]) <= d2(ts[k - 1]) && d2(ts[k]) <= d2(ts[k + 1]) {
            best = best.min(refine(d2, grad, ts[k], lo));
        }
    }
    for &t in [ts[0], ts[m]].iter().chain(endpoint.iter()) {
        best = best.min(d2(t).max(0.0).sqrt());
    }
    best
}

/// Distance to τ = √(α+2), parametrized by τ' ≥ 0 as (τ'² − 2, τ').
pub fn distance_ab(alpha: f64, tau: f64) -> f64 {
    let d2 = |s: f64| (alpha - s * s + 2.0).powi(2) + (tau - s).powi(2);
    // ½ d/ds and its derivative
    let grad = |s: f64| {
        let u = alpha - s * s + 2.0;
        (-2.0 * s * u - (tau - s), -2.0 * u + 4.0 * s * s + 1.0)
    };
    let hi = 2.0 * (tau.abs() + alpha.abs().sqrt() + 2.0);
    min_distance(&d2, &grad, 0.0, hi, Some(0.0))
}

/// Distance to τ = √(−1/α), parametrized by τ' > 0 as (−1/τ'², τ').
pub fn distance_c(alpha: f64, tau: f64) -> f64 {
    let d2 = |s: f64| (alpha + 1.0 / (s * s)).powi(2) + (tau - s).powi(2);
    let grad = |s: f64| {
        let u = alpha + 1.0 / (s * s);
        let du = -2.0 / (s * s * s);
        (
            u * du - (tau - s),
            du * du + u * 6.0 / (s * s * s * s) + 1.0,
        )
    };
    let hi = 2.0 * (tau.abs() + 2.0);
    let lo = 1e-4;
    min_distance(&d2, &grad, lo, hi, None)
}

fn region(alpha: f64, tau: f64) -> Case {
    let above_c = alpha < 0.0 && tau > (-1.0 / alpha).sqrt();
    if above_c {
        return Case::III;
    }
    let below_ab = alpha >= -2.0 && tau < (alpha + 2.0).sqrt();
    if below_ab {
        Case::I
    } else if alpha > -1.0 {
        Case::II
    } else {
        Case::IV
    }
}

pub fn classify(alpha: f64, tau: f64) -> Result<PhasePoint, PhaseError> {
    if !(tau > 0.0) || !tau.is_finite() || !alpha.is_finite() {
        return Err(PhaseError::Tau(tau));
    }
    let dist_ab = distance_ab(alpha, tau);
    let dist_c = distance_c(alpha, tau);
    let dist_multicritical = (alpha + 1.0).hypot(tau - 1.0);
    let case = if dist_multicritical <= ON_CURVE_TOL {
        Case::Multicritical
    } else if dist_ab <= ON_CURVE_TOL {
        Case::CurveAB
    } else if dist_c <= ON_CURVE_TOL {
        Case::CurveC
    } else {
        region(alpha, tau)
    };
    let gamma = solve_gamma(alpha, tau).ok();
    Ok(PhasePoint {
        alpha,
        tau,
        case,
        dist_ab,
        dist_c,
        dist_multicritical,
        gamma,
    })
}

/// Case on an α × τ raster, row-major in τ then α.
pub fn phase_map(
    alpha: (f64, f64),
    tau: (f64, f64),
    steps: (usize, usize),
) -> Result<Vec<PhasePoint>, PhaseError> {
    use rayon::prelude::*;
    let (na, nt) = (steps.0.max(2), steps.1.max(2));
    let pts: Vec<(f64, f64)> = (0..nt)
        .flat_map(|j| {
            (0..na).map(move |i| {
                let a = alpha.0 + (alpha.1 - alpha.0) * i as f64 / (na - 1) as f64;
                let t = tau.0 + (tau.1 - tau.0) * j as f64 / (nt - 1) as f64;
                (a, t)
            })
        })
        .collect();
    pts.par_iter().map(|&(a, t)| classify(a, t)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct IntersectionCertificate {
    pub alpha_range: (f64, f64),
    /// subintervals of [−2, 0) on which g(α) = (α+2) + 1/α < 0 is proved
    pub intervals_proved: usize,
    /// largest interval upper bound of g among them
    pub max_upper_bound: f64,
    /// width of the neighbourhood of the critical point left unproved
    pub excluded_width: f64,
    /// root of g'(α) = 1 − 1/α² by bisection in the excluded neighbourhood
    pub critical_alpha: f64,
    pub g_at_critical: f64,
    /// points satisfying both curve equations
    pub intersections: Vec<(f64, f64)>,
}

/// Both curves are defined only on [−2, 0). There τ_AB² − τ_C² equals
/// g(α) = α + 2 + 1/α. Tangent bounds on the concave g prove g < 0 away from a small
/// neighbourhood of α = −1. Inside it, g' has a single root, located by
/// bisection, where g attains its maximum, so a common point must be that
/// root.
pub fn intersection_certificate(alpha_range: (f64, f64)) -> IntersectionCertificate {
    let g = |a: f64| a + 2.0 + 1.0 / a;
    let lo = alpha_range.0.max(-2.0);
    let hi = alpha_range.1.min(-1e-12);
    let min_width = 1e-7;
    let mut stack = vec![(lo, hi)];
    let mut proved = 0usize;
    let mut max_ub = f64::NEG_INFINITY;
    let mut open: Vec<(f64, f64)> = Vec::new();
    while let Some((a, b)) = stack.pop() {
        // g'' = 2/α³ < 0, so g lies below its tangent at the midpoint
        let m = 0.5 * (a + b);
        let slack = 4.0 * f64::EPSILON * (m.abs() + 2.0 + 1.0 / m.abs());
        let ub = g(m) + (1.0 - 1.0 / (m * m)).abs() * 0.5 * (b - a) + slack;
        if ub < 0.0 {
            proved += 1;
            max_ub = max_ub.max(ub);
        } else if b - a < min_width {
            open.push((a, b));
        } else {
            let m = 0.5 * (a + b);
            stack.push((m, b));
            stack.push((a, m));
        }
    }
    let (ea, eb) = open
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(x, y), &(a, b)| {
            (x.min(a), y.max(b))
        });
    // g'(α) = 1 − 1/α² changes sign from + to − in [ea, eb]
    let gp = |a: f64| 1.0 - 1.0 / (a * a);
    let (mut a, mut b) = (ea, eb);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if gp(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let crit = if gp(a).abs() <= gp(b).abs() { a } else { b };
    let crit = if (crit + 1.0).abs() < 1e-15 {
        -1.0
    } else {
        crit
    };
    let mut intersections = Vec::new();
    let t_ab = (crit + 2.0).sqrt();
    let t_c = (-1.0 / crit).sqrt();
    if g(crit) == 0.0 && t_ab == t_c {
        intersections.push((crit, t_ab));
    }
    IntersectionCertificate {
        alpha_range,
        intervals_proved: proved,
        max_upper_bound: max_ub,
        excluded_width: eb - ea,
        critical_alpha: crit,
        g_at_critical: g(crit),
        intersections,
    }
}
