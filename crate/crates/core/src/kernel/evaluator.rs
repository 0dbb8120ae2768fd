//! K_n(x1, x2) = Σ_{k<n} φ_k(x1) P_k(x2) / κ_k with
//! φ_k(x) = ∫ w_n(x,y) Q_k(y) dy = e^{-nV(x)} Σ_l q_kl h_l(x).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::KernelError;
use crate::biortho::outer::x_extent;
use crate::biortho::{
    biorthogonalize, build_bimoments_unchecked, BimomentSeries, BiorthSystem, OuterRule,
};
use crate::linalg::Mat;
use crate::model::{ModelSpec, WeightTable};
use crate::prelude::*;
use crate::Precision;

#[derive(Clone, Debug)]
pub struct KernelEvaluator<T> {
    pub spec: ModelSpec,
    pub sys: BiorthSystem<T>,
    table: WeightTable<T>,
    /// row k: q_kl / κ_k
    qk: Mat<T>,
    pub x_max: f64,
    pub log10_cond: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelChecks {
    pub n: usize,
    pub trace: f64,
    pub trace_error: f64,
    /// max over test pairs of |∫K(x,y)K(y,z)dy − K(x,z)| / |K(x,z)|
    pub reproducing: f64,
    pub pairs: Vec<(f64, f64)>,
}

impl<T: Real> KernelEvaluator<T> {
    /// n terms, n = spec.n. Fails when the bimoment matrix is too ill
    /// conditioned for `T` with a 20-digit margin.
    pub fn new(spec: &ModelSpec) -> Result<Self, KernelError> {
        let n = spec.n;
        let bm = build_bimoments_unchecked::<T>(spec, n)?;
        let margin = 20.0;
        if !(bm.log10_cond + margin <= T::DIGITS as f64) {
            return Err(KernelError::Conditioning {
                log10_cond: bm.log10_cond,
                digits: T::DIGITS,
            });
        }
        let sys = biorthogonalize(&bm)?;
        let drop = T::DIGITS as f64 * std::f64::consts::LN_10 + 20.0;
        let x_max = 1.5 * x_extent(spec, n, n, drop);
        let table = WeightTable::<T>::new(spec, x_max, n)?;
        let qk = Mat::from_fn(n, n, |k, l| sys.q[(k, l)] / sys.kappa[k]);
        Ok(KernelEvaluator {
            spec: spec.clone(),
            sys,
            table,
            qk,
            x_max,
            log10_cond: bm.log10_cond,
        })
    }

    pub fn n(&self) -> usize {
        self.sys.d
    }

    /// e^{-nV(x)} x^ν
    fn prefactor(&self, x: T) -> T {
        let nu: T = self.spec.nu_t();
        (nu * x.ln() - self.spec.n_t::<T>() * self.spec.v.eval(x)).exp()
    }

    /// φ_k(x)/κ_k divided by e^{-nV(x)} x^ν, k < n.
    pub fn phi_reduced(&self, x: T) -> Result<Vec<T>, KernelError> {
        if x.f64() > self.x_max {
            return Err(KernelError::Range(x.f64(), self.x_max));
        }
        let h = self.table.h_all_reduced(x, self.n(), 0)?;
        Ok(self.qk.mul_vec(&h))
    }

    /// φ_k(x)/κ_k, k < n.
    pub fn phi(&self, x: T) -> Result<Vec<T>, KernelError> {
        let p = self.prefactor(x);
        Ok(self.phi_reduced(x)?.into_iter().map(|v| v * p).collect())
    }

    pub fn kernel(&self, x1: T, x2: T) -> Result<T, KernelError> {
        if !(x1 > T::zero() && x2 > T::zero()) {
            return Err(KernelError::Domain(x1.f64().min(x2.f64())));
        }
        if x1.f64() > self.x_max || x2.f64() > self.x_max {
            return Ok(T::zero());
        }
        let phi = self.phi(x1)?;
        let p = self.sys.p_all(x2);
        Ok(phi.iter().zip(&p).map(|(a, b)| *a * *b).sum())
    }

    /// ρ_n(x) = K_n(x,x)/n; zero beyond the table range where the kernel is
    /// below the working precision.
    pub fn density(&self, x: T) -> Result<T, KernelError> {
        Ok(self.kernel(x, x)? / T::from_usize(self.n()).unwrap())
    }

    /// Quadrature on [0, X] for integrals over the kernel, built against the
    /// bimoment series.
    pub fn rule(&self) -> Result<OuterRule<T>, KernelError> {
        let n = self.n();
        let ser = BimomentSeries::<T>::new(&self.spec, n - 1, n - 1)?;
        Ok(OuterRule::build(&self.spec, &ser, n - 1, n - 1)?)
    }

    /// Trace ∫K(x,x)dx and the reproducing identity at `pairs` random
    /// (x, z) drawn from the bulk of the density.
    pub fn checks(&self, pairs: usize, seed: u64) -> Result<KernelChecks, KernelError> {
        let rule = self.rule()?;
        let n = self.n();
        // per node: reduced φ (times rule weight) and P
        let mut phi_w = Vec::with_capacity(rule.x.len());
        let mut pv = Vec::with_capacity(rule.x.len());
        let mut trace = T::zero();
        for i in 0..rule.x.len() {
            let h = &rule.h[i][..n];
            let ph: Vec<T> = self
                .qk
                .mul_vec(h)
                .into_iter()
                .map(|v| v * rule.w[i])
                .collect();
            let p = self.sys.p_all(rule.x[i]);
            trace += ph.iter().zip(&p).map(|(a, b)| *a * *b).sum::<T>();
            phi_w.push(ph);
            pv.push(p);
        }
        // test points between the 10% and 90% quantiles of the density
        let mut cum = T::zero();
        let (mut lo, mut hi) = (None, None);
        for i in 0..rule.x.len() {
            cum += phi_w[i].iter().zip(&pv[i]).map(|(a, b)| *a * *b).sum::<T>();
            let f = (cum / trace).f64();
            if lo.is_none() && f > 0.1 {
                lo = Some(rule.x[i].f64());
            }
            if hi.is_none() && f > 0.9 {
                hi = Some(rule.x[i].f64());
            }
        }
        let (lo, hi) = (lo.unwrap_or(0.1), hi.unwrap_or(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        let mut pts = Vec::new();
        for _ in 0..pairs {
            let x = rng.random_range(lo..hi);
            let z = rng.random_range(lo..hi);
            pts.push((x, z));
            let phx = self.phi(T::lit(x))?;
            let pz = self.sys.p_all(T::lit(z));
            let mut acc = T::zero();
            for i in 0..rule.x.len() {
                let kxy: T = phx.iter().zip(&pv[i]).map(|(a, b)| *a * *b).sum();
                let kyz: T = phi_w[i].iter().zip(&pz).map(|(a, b)| *a * *b).sum();
                acc += kxy * kyz;
            }
            let kxz: T = phx.iter().zip(&pz).map(|(a, b)| *a * *b).sum();
            worst = worst.max(((acc - kxz) / kxz).abs().f64());
        }
        let trace_error = (trace - T::from_usize(n).unwrap()).abs().f64();
        Ok(KernelChecks {
            n,
            trace: trace.f64(),
            trace_error,
            reproducing: worst,
            pairs: pts,
        })
    }
}

/// Precision-erased view used by drivers that only need binary64 output.
pub trait Kernel: Send + Sync {
    fn n(&self) -> usize;
    fn spec(&self) -> &ModelSpec;
    fn precision(&self) -> Precision;
    fn x_max(&self) -> f64;
    fn log10_cond(&self) -> f64;
    fn kernel(&self, x1: f64, x2: f64) -> Result<f64, KernelError>;
    fn density(&self, x: f64) -> Result<f64, KernelError>;
    /// K(x_i, y_j) for all pairs, sharing the φ and P evaluations.
    fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>, KernelError>;
    /// n×n matrix G_jk = ∫_a^b P_j φ_k/κ_k by an m-point Gauss–Legendre rule;
    /// its spectrum is the nonzero spectrum of K restricted to [a, b].
    fn restricted_gram(&self, a: f64, b: f64, m: usize) -> Result<Vec<Vec<f64>>, KernelError>;
    fn checks(&self, pairs: usize, seed: u64) -> Result<KernelChecks, KernelError>;
}

fn tag<T: Real>() -> Precision {
    match T::DIGITS {
        0..=16 => Precision::Double,
        17..=40 => Precision::Extended,
        41..=80 => Precision::Quad,
        _ => Precision::Octo,
    }
}

impl<T: Real> Kernel for KernelEvaluator<T> {
    fn n(&self) -> usize {
        self.sys.d
    }
    fn spec(&self) -> &ModelSpec {
        &self.spec
    }
    fn precision(&self) -> Precision {
        tag::<T>()
    }
    fn x_max(&self) -> f64 {
        self.x_max
    }
    fn log10_cond(&self) -> f64 {
        self.log10_cond
    }
    fn kernel(&self, x1: f64, x2: f64) -> Result<f64, KernelError> {
        Ok(KernelEvaluator::kernel(self, T::lit(x1), T::lit(x2))?.f64())
    }
    fn density(&self, x: f64) -> Result<f64, KernelError> {
        Ok(KernelEvaluator::density(self, T::lit(x))?.f64())
    }
    fn matrix(&self, xs: &[f64], ys: &[f64]) -> Result<Vec<Vec<f64>>, KernelError> {
        let phis = xs
            .iter()
            .map(|&x| {
                if x > self.x_max {
                    Ok(vec![T::zero(); self.n()])
                } else {
                    self.phi(T::lit(x))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ps: Vec<Vec<T>> = ys.iter().map(|&y| self.sys.p_all(T::lit(y))).collect();
        Ok(phis
            .iter()
            .map(|f| {
                ps.iter()
                    .map(|p| f.iter().zip(p).map(|(a, b)| *a * *b).sum::<T>().f64())
                    .collect()
            })
            .collect())
    }
    fn restricted_gram(&self, a: f64, b: f64, m: usize) -> Result<Vec<Vec<f64>>, KernelError> {
        let (x, w) = crate::specfun::quad::gauss_legendre::<T>(m);
        let (ta, tb) = (T::lit(a), T::lit(b.min(self.x_max)));
        let half = (tb - ta) * T::lit(0.5);
        let n = self.n();
        let mut g = vec![vec![T::zero(); n]; n];
        for (xi, wi) in x.iter().zip(&w) {
            let t = ta + half * (*xi + T::one());
            let phi = self.phi(t)?;
            let p = self.sys.p_all(t);
            for j in 0..n {
                for k in 0..n {
                    g[j][k] += *wi * half * p[j] * phi[k];
                }
            }
        }
        Ok(g.into_iter()
            .map(|r| r.into_iter().map(|v| v.f64()).collect())
            .collect())
    }
    fn checks(&self, pairs: usize, seed: u64) -> Result<KernelChecks, KernelError> {
        KernelEvaluator::checks(self, pairs, seed)
    }
}

/// Kernel at the requested precision, or the narrowest one that passes the
/// conditioning margin.
pub fn build_kernel(
    spec: &ModelSpec,
    precision: Option<Precision>,
) -> Result<Box<dyn Kernel>, KernelError> {
    fn one(spec: &ModelSpec, p: Precision) -> Result<Box<dyn Kernel>, KernelError> {
        Ok(match p {
            Precision::Double => Box::new(KernelEvaluator::<f64>::new(spec)?),
            Precision::Extended => Box::new(KernelEvaluator::<crate::Ext>::new(spec)?),
            Precision::Quad => Box::new(KernelEvaluator::<crate::Quad>::new(spec)?),
            Precision::Octo => Box::new(KernelEvaluator::<crate::Octo>::new(spec)?),
        })
    }
    if let Some(p) = precision {
        return one(spec, p);
    }
    let mut last = None;
    for p in [Precision::Extended, Precision::Quad, Precision::Octo] {
        match one(spec, p) {
            Err(e @ KernelError::Conditioning { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HQuadrature;
    use crate::{Ext, Quad};

    #[test]
    fn trace_and_reproducing() {
        for n in [3, 6] {
            let s = ModelSpec::quadratic(0.5, 0.6, n, -0.5).unwrap();
            let ke = KernelEvaluator::<Ext>::new(&s).unwrap();
            let c = ke.checks(5, 1).unwrap();
            assert!(c.trace_error < 1e-12, "{c:?}");
            assert!(c.reproducing < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn rank_one_kernel_matches_quadrature_oracle() {
        // n = 1: K(x1,x2) = e^{-nV(x1)} h_0(x1) / M_00
        let s = ModelSpec::new(0.3, 0.7, 1, vec![0.0, 1.0], vec![0.0, 0.0, 0.5]).unwrap();
        let ke = KernelEvaluator::<Quad>::new(&s).unwrap();
        let hq = HQuadrature::<Quad>::new(&s, 8.0, 1);
        let m00 = ke.sys.kappa[0];
        for x in [0.2, 1.0, 3.5] {
            let xq = Quad::lit(x);
            let want = hq.h(0, 0, xq).unwrap().value() * (-xq).exp() / m00;
            let got = ke.kernel(xq, Quad::lit(2.0)).unwrap();
            assert!(((got - want) / want).abs().f64() < 1e-10);
        }
    }

    #[test]
    fn density_is_finite_and_nonnegative() {
        let s = ModelSpec::quadratic(-0.5, 0.8, 6, 0.5).unwrap();
        let ke = build_kernel(&s, None).unwrap();
        for i in 1..200 {
            let x = i as f64 * 0.05;
            let r = ke.density(x).unwrap();
            assert!(r.is_finite() && r >= -1e-10, "{x} {r}");
        }
        assert!(ke.kernel(-1.0, 1.0).is_err());
    }

    #[test]
    fn precision_escalates_with_conditioning() {
        let s = ModelSpec::quadratic(0.0, 0.5, 18, 0.0).unwrap();
        assert!(matches!(
            KernelEvaluator::<f64>::new(&s),
            Err(KernelError::Conditioning { .. })
        ));
        let ke = build_kernel(&s, None).unwrap();
        assert_ne!(ke.precision(), Precision::Extended);
    }

    #[test]
    fn projection_spectrum() {
        use nalgebra::DMatrix;
        let s = ModelSpec::quadratic(0.0, 0.5, 5, 0.0).unwrap();
        let ke = build_kernel(&s, None).unwrap();
        let spectrum = |a: f64, b: f64| {
            let g = ke.restricted_gram(a, b, 80).unwrap();
            DMatrix::from_fn(5, 5, |i, j| g[i][j]).complex_eigenvalues()
        };
        for z in spectrum(1e-12, ke.x_max()).iter() {
            assert!((z.re - 1.0).abs() < 1e-8 && z.im.abs() < 1e-8);
        }
        for z in spectrum(0.3, 1.2).iter() {
            assert!(
                z.re > -1e-8 && z.re < 1.0 + 1e-8 && z.im.abs() < 1e-8,
                "{z}"
            );
        }
    }
}
