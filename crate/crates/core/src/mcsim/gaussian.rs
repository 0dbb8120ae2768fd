//! Exact sampling for V = c₁x, W = c₂y: every entry pair (Φ₁ᵢⱼ, Φ₂ᵢⱼ) is an
//! independent complex Gaussian with precision n[[c₁, −τ], [−τ, c₂]].

use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::Serialize;

use super::rng::{complex_normal, normal, stream};
use super::{integer_nu, CMat, McError, Mode, SampleBatch};
use crate::model::ModelSpec;

/// Parameters of the Gaussian model. Unlike [`ModelSpec`], τ = 0 is allowed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianParams {
    pub nu: usize,
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
    pub tau: f64,
}

impl GaussianParams {
    pub fn new(nu: usize, n: usize, c1: f64, c2: f64, tau: f64) -> Result<Self, McError> {
        if n == 0 || !(c1 > 0.0 && c2 > 0.0) || !tau.is_finite() || !(tau * tau < c1 * c2) {
            return Err(McError::NotLinear);
        }
        Ok(GaussianParams { nu, n, c1, c2, tau })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self, McError> {
        if spec.v.degree() != 1 || spec.w.degree() != 1 {
            return Err(McError::NotLinear);
        }
        Self::new(
            integer_nu(spec)?,
            spec.n,
            spec.v.coef(1),
            spec.w.coef(1),
            spec.tau,
        )
    }
}

/// Lower Cholesky factor of the real covariance (2nM)⁻¹ shared by the real
/// and imaginary parts.
fn cholesky(n: f64, c1: f64, c2: f64, tau: f64) -> [f64; 3] {
    let d = 2.0 * n * (c1 * c2 - tau * tau);
    let l11 = (c2 / d).sqrt();
    let l21 = tau / d / l11;
    let l22 = (c1 / d - l21 * l21).sqrt();
    [l11, l21, l22]
}

/// One configuration and −½|z|², the log-density of the draw up to a constant.
pub(crate) fn draw(g: &GaussianParams, seed: u64, index: u64) -> (CMat, CMat, f64) {
    let (n, m) = (g.n, g.n + g.nu);
    let [l11, l21, l22] = cholesky(g.n as f64, g.c1, g.c2, g.tau);
    let mut rng = stream(seed, 0, index);
    let (mut p1, mut p2) = (CMat::zeros(n, m), CMat::zeros(n, m));
    let mut logq = 0.0;
    for k in 0..n * m {
        let z = [
            normal(&mut rng),
            normal(&mut rng),
            normal(&mut rng),
            normal(&mut rng),
        ];
        logq -= 0.5 * z.iter().map(|v| v * v).sum::<f64>();
        p1.a[k] = num_complex::Complex64::new(l11 * z[0], l11 * z[1]);
        p2.a[k] = num_complex::Complex64::new(l21 * z[0] + l22 * z[2], l21 * z[1] + l22 * z[3]);
    }
    (p1, p2, logq)
}

#[cfg(test)]
/// −n Tr(c₁Φ₁*Φ₁ + c₂Φ₂*Φ₂ − τ(Φ₁*Φ₂ + Φ₂*Φ₁)).
pub(crate) fn target_log_density(g: &GaussianParams, p1: &CMat, p2: &CMat) -> f64 {
    let cross: f64 = p1.a.iter().zip(&p2.a).map(|(a, b)| (a.conj() * b).re).sum();
    -(g.n as f64) * (g.c1 * p1.norm_sqr() + g.c2 * p2.norm_sqr() - 2.0 * g.tau * cross)
}

pub fn sample_gaussian(spec: &ModelSpec, count: usize, seed: u64) -> Result<SampleBatch, McError> {
    let mut b = sample_gaussian_params(&GaussianParams::from_spec(spec)?, count, seed);
    b.spec = Some(spec.clone());
    Ok(b)
}

/// As [`sample_gaussian`], without a kernel-compatible spec attached.
pub fn sample_gaussian_params(g: &GaussianParams, count: usize, seed: u64) -> SampleBatch {
    let sv: Vec<Vec<f64>> = (0..count as u64)
        .into_par_iter()
        .map(|i| draw(g, seed, i).0.squared_singular_values())
        .collect();
    SampleBatch {
        spec: None,
        mode: Mode::Gaussian,
        seed,
        chains: 1,
        samples_per_chain: vec![count],
        sv,
        acceptance: Vec::new(),
        step: Vec::new(),
        tuning_failed: false,
        autocorrelation: Vec::new(),
    }
}

/// Complex Wishart spectra by the Bartlett decomposition, with the entry
/// variance of the Φ₁ marginal, c₂/(n(c₁c₂ − τ²)).
pub fn wishart_reference(g: &GaussianParams, count: usize, seed: u64) -> SampleBatch {
    let (n, m) = (g.n, g.n + g.nu);
    let var = g.c2 / (g.n as f64 * (g.c1 * g.c2 - g.tau * g.tau));
    let sv: Vec<Vec<f64>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, 1, i);
            let mut l = CMat::zeros(n, n);
            for r in 0..n {
                let g = Gamma::new((m - r) as f64, 1.0).expect("positive shape");
                l.a[r * n + r] = num_complex::Complex64::new(g.sample(&mut rng).sqrt(), 0.0);
                for c in 0..r {
                    l.a[r * n + c] = complex_normal(&mut rng, 1.0);
                }
            }
            l.squared_singular_values()
                .into_iter()
                .map(|v| v * var)
                .collect()
        })
        .collect();
    SampleBatch {
        spec: None,
        mode: Mode::Wishart,
        seed,
        chains: 1,
        samples_per_chain: vec![count],
        sv,
        acceptance: Vec::new(),
        step: Vec::new(),
        tuning_failed: false,
        autocorrelation: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcsim::ks_two_sample;

    #[test]
    fn rejects_bad_specs() {
        let s = ModelSpec::linear(0.5, 0.5, 3, 1.0, 1.0).unwrap();
        assert!(matches!(sample_gaussian(&s, 4, 1), Err(McError::Nu(_))));
        let q = ModelSpec::quadratic(0.0, 0.5, 3, 0.0).unwrap();
        assert!(matches!(sample_gaussian(&q, 4, 1), Err(McError::NotLinear)));
        assert!(GaussianParams::new(0, 3, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn log_density_matches_target_up_to_a_constant() {
        let g = GaussianParams::new(1, 3, 1.2, 0.8, 0.4).unwrap();
        let d: Vec<f64> = (0..200)
            .map(|i| {
                let (p1, p2, logq) = draw(&g, 5, i);
                logq - target_log_density(&g, &p1, &p2)
            })
            .collect();
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / d.len() as f64;
        assert!(var < 1e-20, "{var}");
    }

    #[test]
    fn cross_covariance() {
        let (n, c1, c2, tau) = (3usize, 1.0, 1.0, 0.5);
        let g = GaussianParams::new(0, n, c1, c2, tau).unwrap();
        let m = 20000;
        let xy: Vec<(f64, f64)> = (0..m)
            .map(|i| {
                let (p1, p2, _) = draw(&g, 9, i);
                (p1.a[0].re, p2.a[0].re)
            })
            .collect();
        let cov = xy.iter().map(|(x, y)| x * y).sum::<f64>() / m as f64;
        let want = tau / (2.0 * n as f64 * (c1 * c2 - tau * tau));
        let sd = (xy.iter().map(|(x, y)| (x * y - cov).powi(2)).sum::<f64>() / m as f64).sqrt()
            / (m as f64).sqrt();
        assert!((cov - want).abs() < 3.0 * sd, "{cov} {want} {sd}");
    }

    #[test]
    fn uncoupled_spectrum_is_wishart() {
        let g = GaussianParams::new(0, 6, 1.0, 1.0, 0.0).unwrap();
        let a = sample_gaussian_params(&g, 10000, 3);
        let b = wishart_reference(&g, 10000, 4);
        assert!(a
            .sv
            .iter()
            .all(|r| r.len() == 6 && r.iter().all(|&v| v >= 0.0)));
        let ks = ks_two_sample(&a.pooled(), &b.pooled());
        assert!(ks < 0.02, "{ks}");
    }

    #[test]
    fn reproducible() {
        let s = ModelSpec::linear(1.0, 0.3, 4, 1.0, 1.0).unwrap();
        let a = sample_gaussian(&s, 50, 11).unwrap();
        let b = sample_gaussian(&s, 50, 11).unwrap();
        assert_eq!(a.sv, b.sv);
        let c = sample_gaussian(&s, 50, 12).unwrap();
        assert_ne!(a.sv, c.sv);
    }
}
