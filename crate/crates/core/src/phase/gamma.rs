//! γ(α, τ): the branch of ατ^{2/3} = 3/γ − 9γ² + 5τ^{4/3}γ with γ(−1, 1) = 1,
//! continued along the segment from (−1, 1).

use serde::Serialize;

use super::PhaseError;

const RESIDUAL_TOL: f64 = 1e-12;

fn residual(g: f64, alpha: f64, tau: f64) -> f64 {
    3.0 / g - 9.0 * g * g + 5.0 * tau.powf(4.0 / 3.0) * g - alpha * tau.powf(2.0 / 3.0)
}

fn slope(g: f64, tau: f64) -> f64 {
    -3.0 / (g * g) - 18.0 * g + 5.0 * tau.powf(4.0 / 3.0)
}

/// α for given γ and τ; the inverse of [`solve_gamma`] along the branch.
pub fn gamma_forward(gamma: f64, tau: f64) -> f64 {
    (3.0 / gamma - 9.0 * gamma * gamma + 5.0 * tau.powf(4.0 / 3.0) * gamma) / tau.powf(2.0 / 3.0)
}

/// Newton from `g0`; `None` when it leaves γ > 0, crosses a fold, or stalls.
fn correct(mut g: f64, alpha: f64, tau: f64, slope_sign: f64) -> Option<f64> {
    let scale = 1.0 + alpha.abs() * tau.powf(2.0 / 3.0);
    for _ in 0..30 {
        let d = slope(g, tau);
        if d * slope_sign <= 0.0 || d.abs() < 1e-8 {
            return None;
        }
        let r = residual(g, alpha, tau);
        if r.abs() <= RESIDUAL_TOL * scale {
            return Some(g);
        }
        g -= r / d;
        if !(g > 0.0) || !g.is_finite() {
            return None;
        }
    }
    let r = residual(g, alpha, tau);
    (r.abs() <= RESIDUAL_TOL * scale).then_some(g)
}

/// Predictor–corrector continuation from (−1, 1) with γ = 1, halving the
/// step whenever the corrector fails.
pub fn solve_gamma(alpha: f64, tau: f64) -> Result<f64, PhaseError> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(PhaseError::Tau(tau));
    }
    let fail = |reason: &str| PhaseError::Continuation {
        alpha,
        tau,
        reason: reason.into(),
    };
    if !alpha.is_finite() {
        return Err(fail("non-finite alpha"));
    }
    let (a0, t0) = (-1.0, 1.0);
    if alpha == a0 && tau == t0 {
        return Ok(1.0);
    }
    let at = |s: f64| (a0 + s * (alpha - a0), t0 + s * (tau - t0));
    let sign = slope(1.0, 1.0).signum();
    let (mut s, mut g, mut dgds) = (0.0_f64, 1.0_f64, 0.0_f64);
    let mut h: f64 = 1.0 / 16.0;
    while s < 1.0 {
        let step = h.min(1.0 - s);
        let (a, t) = at(s + step);
        match correct(g + dgds * step, a, t, sign) {
            Some(gn) => {
                dgds = (gn - g) / step;
                g = gn;
                s += step;
                h = (2.0 * h).min(0.25);
            }
            None => {
                h *= 0.5;
                if h < 1e-12 {
                    return Err(fail("fold or loss of the positive branch"));
                }
            }
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaExpansion {
    pub a: f64,
    pub b: f64,
    pub n_list: Vec<f64>,
    /// coefficients of n^{−k/3}, k = 0, 1, ...
    pub fitted: Vec<f64>,
    /// predicted a/3 and 11a²/144 + 47b/48
    pub predicted: [f64; 2],
    pub rel_error: [f64; 2],
}

/// Least-squares fit of γ(α_n, τ_n) along the scaling path in powers of
/// ε = n^{−1/3}, with `degree` + 1 terms.
pub fn gamma_expansion(
    a: f64,
    b: f64,
    n_list: &[f64],
    degree: usize,
) -> Result<GammaExpansion, PhaseError> {
    if n_list.len() <= degree {
        return Err(PhaseError::Fit(format!(
            "{} points for {} coefficients",
            n_list.len(),
            degree + 1
        )));
    }
    let path = super::ScalingPath::new(a, b);
    let rows = n_list.len();
    let mut m = nalgebra::DMatrix::<f64>::zeros(rows, degree + 1);
    let mut y = nalgebra::DVector::<f64>::zeros(rows);
    for (i, &n) in n_list.iter().enumerate() {
        let (al, ta) = path.point(n);
        y[i] = solve_gamma(al, ta)?;
        let e = n.powf(-1.0 / 3.0);
        for k in 0..=degree {
            m[(i, k)] = e.powi(k as i32);
        }
    }
    let svd = m.svd(true, true);
    let c = svd
        .solve(&y, 1e-14)
        .map_err(|e| PhaseError::Fit(e.to_string()))?;
    let fitted: Vec<f64> = c.iter().copied().collect();
    let predicted = [a / 3.0, 11.0 * a * a / 144.0 + 47.0 * b / 48.0];
    let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1e-300);
    let rel_error = [rel(fitted[1], predicted[0]), rel(fitted[2], predicted[1])];
    Ok(GammaExpansion {
        a,
        b,
        n_list: n_list.to_vec(),
        fitted,
        predicted,
        rel_error,
    })
}

/// n = 10^3 ... 10^6, `points` log-spaced values.
pub fn default_n_list(points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| 10f64.powf(3.0 + 3.0 * k as f64 / (points - 1).max(1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multicritical_value() {
        assert_eq!(solve_gamma(-1.0, 1.0).unwrap(), 1.0);
        assert!(residual(1.0, -1.0, 1.0).abs() < 1e-15);
    }

    #[test]
    fn forward_inverse_roundtrip() {
        let a = gamma_forward(1.1, 1.0);
        assert!((solve_gamma(a, 1.0).unwrap() - 1.1).abs() < 1e-10);
        for (g, t) in [(0.8, 1.2), (1.3, 0.7), (0.5, 1.0)] {
            let a = gamma_forward(g, t);
            assert!((solve_gamma(a, t).unwrap() - g).abs() < 1e-10, "{g} {t}");
        }
    }

    #[test]
    fn continuous_along_a_path() {
        let m = 400;
        let mut prev = solve_gamma(-1.0, 1.0).unwrap();
        for k in 1..=m {
            let s = k as f64 / m as f64;
            let (a, t) = (-1.0 + 3.0 * s, 1.0 - 0.5 * s);
            let g = solve_gamma(a, t).unwrap();
            let step = (3f64.powi(2) + 0.25f64).sqrt() / m as f64;
            assert!((g - prev).abs() < 10.0 * step, "{k}");
            prev = g;
        }
    }

    #[test]
    fn rejects_bad_tau() {
        assert!(solve_gamma(0.0, 0.0).is_err());
        assert!(solve_gamma(0.0, f64::NAN).is_err());
    }

    #[test]
    fn expansion_coefficients() {
        let ns = default_n_list(25);
        for (a, b) in [(0.5, -0.3), (1.0, 0.2)] {
            let e = gamma_expansion(a, b, &ns, 5).unwrap();
            assert!((e.fitted[0] - 1.0).abs() < 1e-6);
            assert!(
                e.rel_error[0] < 1e-2 && e.rel_error[1] < 1e-2,
                "{:?}",
                e.rel_error
            );
        }
    }
}
