//! Bimoments M_{jl} = ∫∫ x^j y^l w_n(x,y) dx dy.

use serde::Serialize;

use super::BiorthError;
use crate::linalg::{ldu, unit_lower_inverse, Mat};
use crate::model::moments::{ln_lambda, ln_moments, series_length, MomentTable};
use crate::model::ModelSpec;
use crate::prelude::*;
use crate::specfun::rgamma;

/// Σ_k λ_k m^V_{ν+j+k} m^W_{ν+l+k}: the outer integral of x^j e^{-nV} h_l
/// taken term by term.
#[derive(Clone, Debug)]
pub struct BimomentSeries<T> {
    pub mv: MomentTable<T>,
    pub mw: MomentTable<T>,
    pub lambda: Vec<T>,
    pub jv_max: usize,
    pub jw_max: usize,
}

impl<T: Real> BimomentSeries<T> {
    /// Good for j ≤ jv_max and l ≤ jw_max.
    pub fn new(spec: &ModelSpec, jv_max: usize, jw_max: usize) -> Result<Self, BiorthError> {
        let drop = T::DIGITS as f64 * std::f64::consts::LN_10 + 12.0;
        let mut extra = 64;
        let k = loop {
            let lv = ln_moments(&spec.v, spec.n, spec.nu, jv_max + extra);
            let lw = ln_moments(&spec.w, spec.n, spec.nu, jw_max + extra);
            let f = |k: usize| Some(lv.get(jv_max + k)? + lw.get(jw_max + k)?);
            if let Some(k) = series_length(spec.c(), spec.nu, 0.0, f, drop) {
                break k;
            }
            extra *= 2;
            if extra > 1 << 16 {
                return Err(BiorthError::Series(
                    "bimoment series does not converge".into(),
                ));
            }
        };
        let mv = MomentTable::build(&spec.v, spec.n, spec.nu, jv_max + k)?;
        let mw = MomentTable::build(&spec.w, spec.n, spec.nu, jw_max + k)?;
        if T::DIGITS <= 16 && (0..k).any(|i| ln_lambda(spec.c(), spec.nu, i).abs() > 700.0) {
            return Err(BiorthError::Series(
                "Bessel coefficients overflow binary64; use a wider precision".into(),
            ));
        }
        let nu: T = spec.nu_t();
        let c = spec.c_t::<T>();
        let c2 = c * c;
        let mut lambda = Vec::with_capacity(k);
        let mut t = c.powf(nu) * rgamma(nu + T::one());
        for i in 0..k {
            lambda.push(t);
            let ii = T::from_usize(i).unwrap();
            t = t * c2 / ((ii + T::one()) * (ii + nu + T::one()));
        }
        Ok(BimomentSeries {
            mv,
            mw,
            lambda,
            jv_max,
            jw_max,
        })
    }

    pub fn entry(&self, j: usize, l: usize) -> T {
        assert!(j <= self.jv_max && l <= self.jw_max);
        let mut s = T::zero();
        for (k, lam) in self.lambda.iter().enumerate() {
            s += *lam * (self.mv.values[j + k] * self.mw.values[l + k]);
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BimomentMatrix<T> {
    #[serde(skip)]
    pub m: Mat<T>,
    pub d: usize,
    pub digits: u32,
    /// log10 of the ∞-norm condition number after diagonal equilibration
    pub log10_cond: f64,
}

impl<T: Real> BimomentMatrix<T> {
    pub fn alarm_threshold(&self) -> f64 {
        self.digits as f64 - 4.0
    }

    pub fn alarmed(&self) -> bool {
        !(self.log10_cond <= self.alarm_threshold())
    }
}

/// log10 cond_∞ of D M D with D = diag(M_jj^{-1/2}).
pub fn log10_condition<T: Real>(m: &Mat<T>) -> f64 {
    let n = m.rows;
    let dg: Vec<T> = (0..n).map(|i| T::one() / m[(i, i)].abs().sqrt()).collect();
    let s = Mat::from_fn(n, n, |i, j| m[(i, j)] * dg[i] * dg[j]);
    let Ok((l, d, u)) = ldu(&s) else {
        return f64::INFINITY;
    };
    let li = unit_lower_inverse(&l);
    let ui = unit_lower_inverse(&u.transpose()).transpose();
    let dinv = Mat::from_fn(
        n,
        n,
        |i, j| if i == j { T::one() / d[i] } else { T::zero() },
    );
    let inv = ui.mul(&dinv).mul(&li);
    (s.norm_inf().ln() + inv.norm_inf().ln()).f64() / std::f64::consts::LN_10
}

/// d×d bimoment matrix; fails with a conditioning alarm when the estimated
/// condition number exceeds 10^{digits-4}.
pub fn build_bimoments<T: Real>(
    spec: &ModelSpec,
    d: usize,
) -> Result<BimomentMatrix<T>, BiorthError> {
    let bm = build_bimoments_unchecked::<T>(spec, d)?;
    if bm.alarmed() {
        return Err(BiorthError::Conditioning {
            log10_cond: bm.log10_cond,
            limit: bm.alarm_threshold(),
        });
    }
    Ok(bm)
}

pub fn build_bimoments_unchecked<T: Real>(
    spec: &ModelSpec,
    d: usize,
) -> Result<BimomentMatrix<T>, BiorthError> {
    if d == 0 {
        return Err(BiorthError::Degree(0));
    }
    let ser = BimomentSeries::<T>::new(spec, d - 1, d - 1)?;
    Ok(from_series(&ser, d))
}

pub fn from_series<T: Real>(ser: &BimomentSeries<T>, d: usize) -> BimomentMatrix<T> {
    let m = Mat::from_fn(d, d, |j, l| ser.entry(j, l));
    let log10_cond = log10_condition(&m);
    BimomentMatrix {
        m,
        d,
        digits: T::DIGITS,
        log10_cond,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Ext, Quad};

    #[test]
    fn decoupled_gamma_oracle() {
        // τ → 0: M_jk = (j!/n^{j+1})(k!/n^{k+1}); the series keeps only k=0
        let s = ModelSpec::linear(0.0, 1e-30, 3, 1.0, 1.0).unwrap();
        let bm = build_bimoments_unchecked::<Quad>(&s, 5).unwrap();
        let f = |j: usize| (1..=j).product::<usize>() as f64 / 3f64.powi(j as i32 + 1);
        for j in 0..5 {
            for k in 0..5 {
                assert!((bm.m[(j, k)].f64() / (f(j) * f(k)) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn symmetric_when_v_equals_w() {
        let s = ModelSpec::new(0.5, 0.7, 4, vec![0.0, 0.2, 0.5], vec![0.0, 0.2, 0.5]).unwrap();
        let bm = build_bimoments::<Ext>(&s, 6).unwrap();
        for j in 0..6 {
            for k in 0..6 {
                assert_eq!(bm.m[(j, k)], bm.m[(k, j)]);
            }
            assert!(bm.m[(j, j)] > Ext::zero());
        }
    }

    #[test]
    fn matches_double_quadrature() {
        // brute force: ∫∫ x^j y^l w_n over a tensor Gauss rule in binary64
        use crate::model::w_n;
        use crate::specfun::power_weighted_panels;
        let s = ModelSpec::new(0.5, 0.6, 3, vec![0.0, 1.0], vec![0.0, -0.4, 0.5]).unwrap();
        let bm = build_bimoments::<f64>(&s, 3).unwrap();
        let (x, wx) = power_weighted_panels::<f64>(20.0, 120, 20, 0.5);
        let mut acc = [[0.0; 3]; 3];
        for (&xi, &wi) in x.iter().zip(&wx) {
            for (&yi, &wj) in x.iter().zip(&wx) {
                // weights carry x^ν y^ν, divide it back out of the integrand
                let w = w_n(&s, xi, yi).unwrap().value() / (xi * yi).powf(0.5);
                for j in 0..3 {
                    for l in 0..3 {
                        acc[j][l] += wi * wj * w * xi.powi(j as i32) * yi.powi(l as i32);
                    }
                }
            }
        }
        for j in 0..3 {
            for l in 0..3 {
                assert!(
                    (acc[j][l] / bm.m[(j, l)] - 1.0).abs() < 1e-10,
                    "{j},{l} {} {}",
                    acc[j][l],
                    bm.m[(j, l)]
                );
            }
        }
    }

    #[test]
    fn self_convergence_in_precision() {
        let s = ModelSpec::quadratic(-0.5, 0.9, 5, 0.4).unwrap();
        let a = build_bimoments_unchecked::<f64>(&s, 4).unwrap();
        let b = build_bimoments_unchecked::<Quad>(&s, 4).unwrap();
        for (x, y) in a.m.data.iter().zip(&b.m.data) {
            assert!((x / y.f64() - 1.0).abs() < 1e-12);
        }
    }
}
