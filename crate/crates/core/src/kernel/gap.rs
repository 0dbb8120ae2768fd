//! Gap probabilities det(I − K_n|_J) by Gauss–Legendre Nyström.

use serde::{Deserialize, Serialize};

use super::{Kernel, KernelError};
use crate::linalg::{det, Mat};
use crate::specfun::quad::gauss_legendre;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GapRequest {
    pub a: f64,
    pub b: f64,
    pub m: usize,
}

impl GapRequest {
    pub fn new(a: f64, b: f64, m: usize) -> Result<Self, KernelError> {
        if !(a >= 0.0 && a < b && b.is_finite()) {
            return Err(KernelError::Gap(format!("need 0 ≤ a < b, got [{a}, {b}]")));
        }
        if m < 16 {
            return Err(KernelError::Gap(format!("Nyström order {m} below 16")));
        }
        Ok(GapRequest { a, b, m })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GapResult {
    pub a: f64,
    pub b: f64,
    pub m: usize,
    pub e0: f64,
    /// |E(m) − E(2m)|
    pub doubling_change: f64,
}

fn nystrom(ke: &dyn Kernel, a: f64, b: f64, m: usize) -> Result<f64, KernelError> {
    let (x, w) = gauss_legendre::<f64>(m);
    let half = 0.5 * (b - a);
    let nodes: Vec<f64> = x.iter().map(|t| a + half * (t + 1.0)).collect();
    let sw: Vec<f64> = w.iter().map(|v| (v * half).sqrt()).collect();
    let k = ke.matrix(&nodes, &nodes)?;
    let mat = Mat::from_fn(m, m, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - sw[i] * k[i][j] * sw[j]
    });
    let d = det(&mat);
    if !d.is_finite() {
        return Err(KernelError::Gap("non-finite Nyström determinant".into()));
    }
    Ok(d)
}

/// Probability of no particle in [a, b].
pub fn gap_probability(ke: &dyn Kernel, req: GapRequest) -> Result<GapResult, KernelError> {
    let e = nystrom(ke, req.a, req.b, req.m)?;
    let e2 = nystrom(ke, req.a, req.b, 2 * req.m)?;
    Ok(GapResult {
        a: req.a,
        b: req.b,
        m: req.m,
        e0: e2,
        doubling_change: (e - e2).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_kernel;
    use crate::model::ModelSpec;

    fn det_small(m: &[Vec<f64>]) -> f64 {
        let k = m.len();
        det(&Mat::from_fn(k, k, |i, j| m[i][j]))
    }

    #[test]
    fn rank_one_gap() {
        let s = ModelSpec::quadratic(0.0, 0.5, 1, 0.0).unwrap();
        let ke = build_kernel(&s, None).unwrap();
        let g = gap_probability(ke.as_ref(), GapRequest::new(0.2, 0.9, 16).unwrap()).unwrap();
        let (x, w) = gauss_legendre::<f64>(40);
        let mass: f64 = x
            .iter()
            .zip(&w)
            .map(|(t, w)| 0.35 * w * ke.density(0.55 + 0.35 * t).unwrap())
            .sum();
        assert!((g.e0 - (1.0 - mass)).abs() < 1e-12);
    }

    #[test]
    fn tiny_interval_and_inclusion() {
        let s = ModelSpec::quadratic(0.5, 0.6, 4, -0.3).unwrap();
        let ke = build_kernel(&s, None).unwrap();
        let e = |a, b| gap_probability(ke.as_ref(), GapRequest::new(a, b, 24).unwrap()).unwrap();
        assert!((e(1.0, 1.0 + 1e-9).e0 - 1.0).abs() < 1e-8);
        let inner = e(0.8, 1.2);
        let outer = e(0.5, 1.6);
        assert!(outer.e0 < inner.e0 && inner.e0 <= 1.0 + 1e-8 && outer.e0 >= 0.0);
        assert!(inner.doubling_change < 1e-6 && outer.doubling_change < 1e-6);
    }

    #[test]
    fn inclusion_exclusion_oracle() {
        // E(J) = Σ_k (−1)^k/k! ∫_{J^k} det[K(x_i,x_j)], exact for n = 4 at k ≤ 4
        let s = ModelSpec::quadratic(0.0, 0.5, 4, 0.0).unwrap();
        let ke = build_kernel(&s, None).unwrap();
        // median of the density
        let (x, w) = gauss_legendre::<f64>(200);
        let h = ke.x_max() / 2.0;
        let mut cum = 0.0;
        let mut med = 0.0;
        for (t, wt) in x.iter().zip(&w) {
            let xi = h * (t + 1.0);
            cum += h * wt * ke.density(xi).unwrap();
            if cum >= 0.5 {
                med = xi;
                break;
            }
        }
        let m = 10;
        let (t, wt) = gauss_legendre::<f64>(m);
        let nodes: Vec<f64> = t.iter().map(|v| 0.5 * med * (v + 1.0)).collect();
        let ws: Vec<f64> = wt.iter().map(|v| 0.5 * med * v).collect();
        let k = ke.matrix(&nodes, &nodes).unwrap();
        let mut total = 1.0;
        let mut fact = 1.0;
        for order in 1..=4usize {
            fact *= order as f64;
            let mut acc = 0.0;
            let mut idx = vec![0usize; order];
            loop {
                let sub: Vec<Vec<f64>> = idx
                    .iter()
                    .map(|&i| idx.iter().map(|&j| k[i][j]).collect())
                    .collect();
                acc += idx.iter().map(|&i| ws[i]).product::<f64>() * det_small(&sub);
                let mut p = 0;
                while p < order {
                    idx[p] += 1;
                    if idx[p] < m {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
                if p == order {
                    break;
                }
            }
            total += if order % 2 == 1 { -acc } else { acc } / fact;
        }
        let g = gap_probability(ke.as_ref(), GapRequest::new(0.0, med, 32).unwrap()).unwrap();
        assert!((g.e0 - total).abs() < 1e-4, "{} {}", g.e0, total);
    }

    #[test]
    fn gauge_conjugation_leaves_gap_unchanged() {
        let s = ModelSpec::quadratic(0.0, 0.5, 3, 0.0).unwrap();
        let ke = build_kernel(&s, None).unwrap();
        let (x, w) = gauss_legendre::<f64>(20);
        let nodes: Vec<f64> = x.iter().map(|t| 1.0 + 0.5 * t).collect();
        let k = ke.matrix(&nodes, &nodes).unwrap();
        let d = |gamma: f64| {
            det(&Mat::from_fn(20, 20, |i, j| {
                let g = (nodes[j] / nodes[i]).powf(gamma);
                let id = if i == j { 1.0 } else { 0.0 };
                id - 0.5 * w[j] * k[i][j] * g
            }))
        };
        assert!((d(0.0) - d(0.7)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(GapRequest::new(1.0, 0.5, 32).is_err());
        assert!(GapRequest::new(0.0, 1.0, 8).is_err());
    }
}
