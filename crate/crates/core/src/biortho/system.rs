//! Monic biorthogonal families from an LDU factorization of the bimoments.

use serde::Serialize;

use super::bimoments::BimomentMatrix;
use super::BiorthError;
use crate::linalg::{ldu, unit_lower_inverse, Mat};
use crate::prelude::*;

/// Row j of `p` holds the ascending coefficients of P_j (zero above j).
#[derive(Clone, Debug)]
pub struct BiorthSystem<T> {
    pub p: Mat<T>,
    pub q: Mat<T>,
    pub kappa: Vec<T>,
    pub d: usize,
}

/// M = L D U gives P = L^{-1}, Q = U^{-T}, κ = diag D.
pub fn biorthogonalize<T: Real>(bm: &BimomentMatrix<T>) -> Result<BiorthSystem<T>, BiorthError> {
    let (l, d, u) = ldu(&bm.m).map_err(|k| BiorthError::SingularMinor { degree: k })?;
    let p = unit_lower_inverse(&l);
    let q = unit_lower_inverse(&u.transpose());
    Ok(BiorthSystem {
        p,
        q,
        kappa: d,
        d: bm.d,
    })
}

fn horner<T: Real>(c: &[T], deg: usize, x: T) -> T {
    let mut s = T::zero();
    for i in (0..=deg).rev() {
        s = s * x + c[i];
    }
    s
}

impl<T: Real> BiorthSystem<T> {
    pub fn eval_p(&self, j: usize, x: T) -> T {
        horner(self.p.row(j), j, x)
    }

    pub fn eval_q(&self, k: usize, y: T) -> T {
        horner(self.q.row(k), k, y)
    }

    /// All P_j(x), j < d.
    pub fn p_all(&self, x: T) -> Vec<T> {
        (0..self.d).map(|j| self.eval_p(j, x)).collect()
    }

    /// max_{j≠k} |(P M Q^T)_{jk}| / min κ against an independently computed
    /// bimoment matrix.
    pub fn residual(&self, m: &Mat<T>) -> f64 {
        let g = self.p.mul(m).mul(&self.q.transpose());
        let kmin = self
            .kappa
            .iter()
            .map(|k| k.abs())
            .fold(T::infinity(), |a, b| a.min(b));
        let mut worst = T::zero();
        for j in 0..self.d {
            for k in 0..self.d {
                if j != k {
                    worst = worst.max(g[(j, k)].abs());
                }
            }
        }
        (worst / kmin).f64()
    }

    /// Largest relative mismatch |G_kk/κ_k − 1| on the diagonal.
    pub fn diagonal_mismatch(&self, m: &Mat<T>) -> f64 {
        let g = self.p.mul(m).mul(&self.q.transpose());
        (0..self.d)
            .map(|k| (g[(k, k)] / self.kappa[k] - T::one()).abs().f64())
            .fold(0.0, f64::max)
    }

    /// Sign changes of P_j on a geometric grid inside (0, Cauchy bound).
    /// Equal to j exactly when all zeros are real, simple and positive.
    pub fn positive_sign_changes(&self, j: usize) -> usize {
        if j == 0 {
            return 0;
        }
        let c = self.p.row(j);
        let bound = 1.0 + (0..j).map(|i| c[i].abs().f64()).fold(0.0, f64::max);
        let mut best = 0;
        for pts in [2000usize, 20000, 200000] {
            let lo: f64 = 1e-12;
            let r = (bound / lo).ln() / pts as f64;
            let mut prev = self.eval_p(j, T::lit(lo));
            let mut count = 0;
            for i in 1..=pts {
                let x = T::lit(lo * (r * i as f64).exp());
                let v = self.eval_p(j, x);
                if (v > T::zero()) != (prev > T::zero()) && v != T::zero() {
                    count += 1;
                }
                if v != T::zero() {
                    prev = v;
                }
            }
            best = best.max(count);
            if best == j {
                break;
            }
        }
        best
    }

    /// Coefficient tables and κ in binary64 for reports.
    pub fn to_report(&self) -> SystemReport {
        let tab = |m: &Mat<T>| {
            (0..self.d)
                .map(|j| (0..=j).map(|i| m[(j, i)].f64()).collect())
                .collect()
        };
        SystemReport {
            degree: self.d,
            p: tab(&self.p),
            q: tab(&self.q),
            kappa: self.kappa.iter().map(|k| k.f64()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemReport {
    pub degree: usize,
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub kappa: Vec<f64>,
}

/// Fit of P_j against the monic form of L_j^{(ν)}(c x).
#[derive(Clone, Debug, Serialize)]
pub struct LaguerreFit {
    pub c: f64,
    /// per degree: max_i |p_ji − l_ji| / max_i |l_ji|
    pub residuals: Vec<f64>,
}

/// The scale c comes from the root of P_1: L_1^{(ν)}(cx) = ν + 1 − cx.
pub fn laguerre_fit<T: Real>(sys: &BiorthSystem<T>, nu: f64) -> LaguerreFit {
    let nu_t = T::lit(nu);
    let a = -sys.p[(1, 0)];
    let c = (nu_t + T::one()) / a;
    let mut residuals = Vec::new();
    for j in 0..sys.d {
        // monic coefficients of L_j^{(ν)}(c x): l_i ∝ (−1)^i binom(j+ν, j−i) c^i / i!
        // ratio l_{i}/l_{i+1} = −(i+1)(i+ν+1)/((j−i) c)
        let mut l = vec![T::zero(); j + 1];
        l[j] = T::one();
        for i in (0..j).rev() {
            let ii = T::from_usize(i).unwrap();
            let jj = T::from_usize(j).unwrap();
            l[i] = -l[i + 1] * (ii + T::one()) * (ii + nu_t + T::one()) / ((jj - ii) * c);
        }
        let scale = l.iter().map(|v| v.abs()).fold(T::zero(), |a, b| a.max(b));
        let err = (0..=j)
            .map(|i| (sys.p[(j, i)] - l[i]).abs())
            .fold(T::zero(), |a, b| a.max(b));
        residuals.push((err / scale).f64());
    }
    LaguerreFit {
        c: c.f64(),
        residuals,
    }
}
