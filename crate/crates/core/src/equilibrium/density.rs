//! ρ₁ from ρ_n = K_n(x,x)/n at several n by Richardson extrapolation in 1/n.

use rayon::prelude::*;
use serde::Serialize;

use super::EquilibriumError;
use crate::kernel::{build_kernel, Kernel};
use crate::model::ModelSpec;
use crate::specfun::quad::panels;
use crate::Precision;

#[derive(Clone, Debug)]
pub struct DensityRequest {
    /// model family; its n is replaced by each entry of `n_list`
    pub spec: ModelSpec,
    pub n_list: Vec<usize>,
    pub grid: Vec<f64>,
    /// log-log slope window near the origin
    pub exponent_window: (f64, f64),
    pub precision: Option<Precision>,
}

impl DensityRequest {
    pub fn new(spec: ModelSpec, n_list: Vec<usize>, grid: Vec<f64>) -> Self {
        DensityRequest {
            spec,
            n_list,
            grid,
            exponent_window: (0.05, 1.0),
            precision: None,
        }
    }

    pub fn validate(&self) -> Result<(), EquilibriumError> {
        validate_n_list(&self.n_list)?;
        if self.grid.is_empty() || self.grid.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(EquilibriumError::Request(
                "grid points must be positive and finite".into(),
            ));
        }
        let (a, b) = self.exponent_window;
        if !(a > 0.0 && b > a) {
            return Err(EquilibriumError::Request(
                "exponent window must satisfy 0 < lo < hi".into(),
            ));
        }
        Ok(())
    }
}

fn validate_n_list(n_list: &[usize]) -> Result<(), EquilibriumError> {
    if n_list.len() < 2 {
        return Err(EquilibriumError::Request(
            "need at least two values of n".into(),
        ));
    }
    if n_list.iter().any(|&n| n == 0 || n % 3 != 0) {
        return Err(EquilibriumError::Request(
            "n values must be positive multiples of 3".into(),
        ));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EquilibriumError::Request(
            "n values must increase strictly".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub n_list: Vec<usize>,
    pub precision: Vec<Precision>,
    pub grid: Vec<f64>,
    /// ρ_n on the grid, one row per n
    pub rho: Vec<Vec<f64>>,
    /// Richardson estimate from the last two n, clamped at 0
    pub extrapolated: Vec<f64>,
    /// |ρ_{n_k} − ρ_{n_{k−1}}| for the last pair
    pub error: Vec<f64>,
    /// sup over the grid of |ρ_{n_{k+1}} − ρ_{n_k}|
    pub sup_diffs: Vec<f64>,
    pub decreasing: bool,
    /// grid points where the last difference exceeds the previous one
    pub nonconverged: Vec<f64>,
    /// most negative unclamped estimate on the mass rule
    pub min_unclamped: f64,
    pub mass_per_n: Vec<f64>,
    pub mass: f64,
    pub origin_exponent: f64,
    pub exponent_window: (f64, f64),
}

/// (n_b ρ_b − n_a ρ_a)/(n_b − n_a): removes a c/n term.
fn richardson(na: usize, a: f64, nb: usize, b: f64) -> f64 {
    let (na, nb) = (na as f64, nb as f64);
    (nb * b - na * a) / (nb - na)
}

/// Gauss–Legendre rule on [0, x_max]: geometric panels towards 0 and
/// panels of width 1/4 beyond 1.
fn mass_rule(x_max: f64) -> (Vec<f64>, Vec<f64>) {
    let mut breaks = vec![0.0];
    for k in (0..=40).rev() {
        let b = 2f64.powi(-k);
        if b < x_max {
            breaks.push(b);
        }
    }
    let mut b = 1.0;
    while b + 0.25 < x_max {
        b += 0.25;
        breaks.push(b);
    }
    breaks.push(x_max);
    breaks.dedup();
    panels(&breaks, 16)
}

fn ln_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(1e-300).ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn densities(ke: &dyn Kernel, xs: &[f64]) -> Result<Vec<f64>, EquilibriumError> {
    Ok(xs
        .par_iter()
        .map(|&x| ke.density(x))
        .collect::<Result<Vec<_>, _>>()?)
}

/// Extrapolation from kernels already built, ordered by increasing n.
pub fn density_extrapolate_with(
    kernels: &[&dyn Kernel],
    grid: &[f64],
    window: (f64, f64),
) -> Result<DensityReport, EquilibriumError> {
    let n_list: Vec<usize> = kernels.iter().map(|k| k.n()).collect();
    validate_n_list(&n_list)?;
    let last = kernels.len() - 1;
    let (na, nb) = (n_list[last - 1], n_list[last]);
    let rho: Vec<Vec<f64>> = kernels
        .iter()
        .map(|k| densities(*k, grid))
        .collect::<Result<_, _>>()?;
    let sup_diffs: Vec<f64> = rho
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let decreasing = sup_diffs.windows(2).all(|w| w[1] < w[0]);
    let extrapolated: Vec<f64> = (0..grid.len())
        .map(|i| richardson(na, rho[last - 1][i], nb, rho[last][i]).max(0.0))
        .collect();
    let error: Vec<f64> = (0..grid.len())
        .map(|i| (rho[last][i] - rho[last - 1][i]).abs())
        .collect();
    let nonconverged = if last >= 2 {
        (0..grid.len())
            .filter(|&i| {
                (rho[last][i] - rho[last - 1][i]).abs()
                    > (rho[last - 1][i] - rho[last - 2][i]).abs()
            })
            .map(|i| grid[i])
            .collect()
    } else {
        Vec::new()
    };

    let x_max = kernels.iter().map(|k| k.x_max()).fold(0.0, f64::max);
    let (xq, wq) = mass_rule(x_max);
    let on_rule: Vec<Vec<f64>> = kernels
        .iter()
        .map(|k| densities(*k, &xq))
        .collect::<Result<_, _>>()?;
    let mass_per_n: Vec<f64> = on_rule
        .iter()
        .map(|r| r.iter().zip(&wq).map(|(a, w)| a * w).sum())
        .collect();
    let unclamped: Vec<f64> = (0..xq.len())
        .map(|i| richardson(na, on_rule[last - 1][i], nb, on_rule[last][i]))
        .collect();
    let min_unclamped = unclamped.iter().copied().fold(f64::INFINITY, f64::min);
    let mass = unclamped.iter().zip(&wq).map(|(v, w)| v.max(0.0) * w).sum();

    let (lo, hi) = window;
    let xs: Vec<f64> = (0..41)
        .map(|k| lo * (hi / lo).powf(k as f64 / 40.0))
        .collect();
    let near: Vec<Vec<f64>> = kernels[last - 1..]
        .iter()
        .map(|k| densities(*k, &xs))
        .collect::<Result<_, _>>()?;
    let ext: Vec<f64> = (0..xs.len())
        .map(|i| richardson(na, near[0][i], nb, near[1][i]))
        .collect();
    let origin_exponent = ln_slope(&xs, &ext);

    Ok(DensityReport {
        n_list,
        precision: kernels.iter().map(|k| k.precision()).collect(),
        grid: grid.to_vec(),
        rho,
        extrapolated,
        error,
        sup_diffs,
        decreasing,
        nonconverged,
        min_unclamped,
        mass_per_n,
        mass,
        origin_exponent,
        exponent_window: window,
    })
}

/// Builds the kernels for every n (in parallel) and extrapolates.
pub fn density_extrapolate(req: &DensityRequest) -> Result<DensityReport, EquilibriumError> {
    req.validate()?;
    let kernels: Vec<Box<dyn Kernel>> = req
        .n_list
        .par_iter()
        .map(|&n| build_kernel(&req.spec.with_n(n), req.precision))
        .collect::<Result<_, _>>()?;
    let refs: Vec<&dyn Kernel> = kernels.iter().map(|k| k.as_ref()).collect();
    density_extrapolate_with(&refs, &req.grid, req.exponent_window)
}

/// Equally spaced interior grid.
pub fn interior_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| a + (b - a) * k as f64 / (points - 1).max(1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_validation() {
        let s = ModelSpec::quadratic(0.0, 0.8, 3, 0.0).unwrap();
        assert!(DensityRequest::new(s.clone(), vec![9, 18, 36], vec![1.0])
            .validate()
            .is_ok());
        assert!(DensityRequest::new(s.clone(), vec![9, 20], vec![1.0])
            .validate()
            .is_err());
        assert!(DensityRequest::new(s.clone(), vec![18, 9], vec![1.0])
            .validate()
            .is_err());
        assert!(DensityRequest::new(s, vec![9, 18], vec![0.0])
            .validate()
            .is_err());
    }

    #[test]
    fn richardson_removes_first_order_term() {
        let f = |n: usize| 2.0 + 3.0 / n as f64;
        assert!((richardson(9, f(9), 18, f(18)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn mass_rule_integrates_smooth_functions() {
        let (x, w) = mass_rule(60.0);
        let s: f64 = x
            .iter()
            .zip(&w)
            .map(|(x, w)| w * (-x).exp() * x.sqrt())
            .sum();
        assert!((s - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn small_n_extrapolation_is_consistent() {
        let s = ModelSpec::quadratic(0.0, 0.8, 3, 0.0).unwrap();
        let req = DensityRequest::new(s, vec![3, 6, 9], interior_grid(0.5, 3.0, 26));
        let r = density_extrapolate(&req).unwrap();
        for m in &r.mass_per_n {
            assert!((m - 1.0).abs() < 1e-8, "{m}");
        }
        assert!(r.extrapolated.iter().all(|&v| v >= 0.0));
        assert_eq!(r.sup_diffs.len(), 2);
    }
}
