//! Convergence probe for the kernel rescaled at the hard edge along paths
//! approaching (−1, 1) as n → ∞.

use rayon::prelude::*;
use serde::Serialize;

use super::PhaseError;
use crate::kernel::{build_kernel, Kernel};
use crate::model::ModelSpec;
use crate::Precision;

/// α_n = −1 + 2a n^{−1/3} − b n^{−2/3}, τ_n = 1 + a n^{−1/3} + 2b n^{−2/3}.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalingPath {
    pub a: f64,
    pub b: f64,
}

impl ScalingPath {
    pub fn new(a: f64, b: f64) -> Self {
        ScalingPath { a, b }
    }

    pub fn point(&self, n: f64) -> (f64, f64) {
        let e1 = n.powf(-1.0 / 3.0);
        let e2 = n.powf(-2.0 / 3.0);
        (
            -1.0 + 2.0 * self.a * e1 - self.b * e2,
            1.0 + self.a * e1 + 2.0 * self.b * e2,
        )
    }

    pub fn spec(&self, nu: f64, n: usize) -> Result<ModelSpec, PhaseError> {
        let (alpha, tau) = self.point(n as f64);
        if !(tau > 0.0) {
            return Err(PhaseError::Path(format!("tau_n = {tau} <= 0 at n = {n}")));
        }
        ModelSpec::quadratic(nu, tau, n, alpha).map_err(|e| PhaseError::Path(e.to_string()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleReport {
    pub path: ScalingPath,
    pub nu: f64,
    pub n_list: Vec<usize>,
    pub precision: Vec<Precision>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    /// K̂_n(u_i, v_j), one matrix per n
    pub values: Vec<Vec<Vec<f64>>>,
    /// sup over the grid of |K̂_{n_{k+1}} − K̂_{n_k}|
    pub deltas: Vec<f64>,
    pub decreasing: bool,
}

/// K̂_n(u, v) = (u/v)^{ν/2} n^{−4/3} K_n(u n^{−4/3}, v n^{−4/3}) along the
/// path, for every n, with the successive sup-differences.
pub fn triple_scaling_probe(
    path: ScalingPath,
    nu: f64,
    n_list: &[usize],
    u: &[f64],
    v: &[f64],
    precision: Option<Precision>,
) -> Result<TripleReport, PhaseError> {
    if n_list.len() < 2 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PhaseError::Path(
            "need at least two strictly increasing n".into(),
        ));
    }
    if u.iter().chain(v).any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(PhaseError::Path("u and v must be positive".into()));
    }
    let specs: Vec<ModelSpec> = n_list
        .iter()
        .map(|&n| path.spec(nu, n))
        .collect::<Result<_, _>>()?;
    let kernels: Vec<Box<dyn Kernel>> = specs
        .par_iter()
        .map(|s| build_kernel(s, precision))
        .collect::<Result<_, _>>()?;
    let mut values = Vec::with_capacity(kernels.len());
    for ke in &kernels {
        let c = (ke.n() as f64).powf(-4.0 / 3.0);
        let xs: Vec<f64> = u.iter().map(|t| t * c).collect();
        let ys: Vec<f64> = v.iter().map(|t| t * c).collect();
        let m = ke.matrix(&xs, &ys)?;
        let scaled: Vec<Vec<f64>> = m
            .iter()
            .zip(u)
            .map(|(row, &ui)| {
                row.iter()
                    .zip(v)
                    .map(|(k, &vj)| (ui / vj).powf(nu / 2.0) * c * k)
                    .collect()
            })
            .collect();
        values.push(scaled);
    }
    let deltas: Vec<f64> = values
        .windows(2)
        .map(|w| {
            w[0].iter()
                .flatten()
                .zip(w[1].iter().flatten())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let decreasing = deltas.windows(2).all(|w| w[1] < w[0]);
    Ok(TripleReport {
        path,
        nu,
        n_list: n_list.to_vec(),
        precision: kernels.iter().map(|k| k.precision()).collect(),
        u: u.to_vec(),
        v: v.to_vec(),
        values,
        deltas,
        decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_reaches_the_multicritical_point() {
        let p = ScalingPath::new(0.5, -0.3);
        let (a, t) = p.point(1e12);
        assert!((a + 1.0).abs() < 1e-3 && (t - 1.0).abs() < 1e-3);
        assert_eq!(ScalingPath::new(0.0, 0.0).point(27.0), (-1.0, 1.0));
        let (a, t) = p.point(8.0);
        assert_eq!(a, -1.0 + 2.0 * 0.5 * 0.5 + 0.3 * 0.25);
        assert_eq!(t, 1.0 + 0.5 * 0.5 - 0.6 * 0.25);
    }

    #[test]
    fn small_probe_diagonal_is_positive() {
        let g = [0.5, 1.0, 2.0];
        let r =
            triple_scaling_probe(ScalingPath::new(0.0, 0.0), 0.0, &[3, 6], &g, &g, None).unwrap();
        assert_eq!(r.deltas.len(), 1);
        for m in &r.values {
            for i in 0..3 {
                assert!(m[i][i].is_finite() && m[i][i] > 0.0);
            }
        }
        assert!(
            triple_scaling_probe(ScalingPath::new(0.0, 0.0), 0.0, &[6, 3], &g, &g, None).is_err()
        );
    }
}
