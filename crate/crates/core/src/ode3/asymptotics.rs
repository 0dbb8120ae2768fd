//! Large-z fits: θ_j against its expansion in z^{1/3}, and the ratio
//! p_j(z) / (z^{(2ν−1)/3} e^{nθ_{j+1}(z)}) against a series in z^{−1/3}.

use nalgebra::{DMatrix, DVector};
use num_complex::{Complex, Complex64};
use serde::Serialize;

use super::solutions::SolutionTriple;
use super::theta::{omega, ThetaSystem};
use super::{lift, Ode3Error};
use crate::prelude::*;
use crate::Octo;

/// Least squares Σ_k c_k u_i^{p_k} ≈ y_i.
fn lsq(u: &[Complex64], powers: &[i32], y: &[Complex64]) -> Result<Vec<Complex64>, Ode3Error> {
    let a = DMatrix::from_fn(u.len(), powers.len(), |i, k| u[i].powi(powers[k]));
    // column equilibration keeps the Vandermonde-like system usable
    let scale: Vec<f64> = (0..powers.len()).map(|k| a.column(k).norm()).collect();
    let a = DMatrix::from_fn(u.len(), powers.len(), |i, k| a[(i, k)] / scale[k]);
    let b = DVector::from_column_slice(y);
    let x = a
        .svd(true, true)
        .solve(&b, 1e-15)
        .map_err(|e| Ode3Error::Fit(e.to_string()))?;
    Ok(x.iter().zip(&scale).map(|(v, s)| v / s).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaFit {
    pub j: usize,
    pub angle: f64,
    /// fitted coefficients of z^{2/3}, z^{1/3}, z⁰
    pub fitted: [[f64; 2]; 3],
    pub predicted: [[f64; 2]; 3],
    pub max_rel_error: f64,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Fit θ_j on the ray arg z = angle over `radii`.
pub fn theta_fit(
    ts: &ThetaSystem,
    j: usize,
    angle: f64,
    radii: &[f64],
) -> Result<ThetaFit, Ode3Error> {
    let upper = angle.sin() > 0.0;
    let w = if upper { omega() } else { omega().conj() };
    let mut u = Vec::new();
    let mut y = Vec::new();
    for &r in radii {
        let z = Complex64::from_polar(r, angle);
        u.push(if upper {
            z.powf(1.0 / 3.0)
        } else {
            z.conj().powf(1.0 / 3.0).conj()
        });
        y.push(ts.theta(j, z)?);
    }
    let powers: Vec<i32> = (-6..=2).rev().collect();
    let c = lsq(&u, &powers, &y)?;
    let (a, tau) = (ts.alpha, ts.tau);
    let predicted = [
        w.powu((j - 1) as u32) * (1.5 * tau.powf(4.0 / 3.0)),
        -w.powu((4 - j) as u32) * (a * tau.powf(2.0 / 3.0)),
        Complex64::new(a * a / 3.0, 0.0),
    ];
    let mut worst: f64 = 0.0;
    for k in 0..3 {
        let den = predicted[k].norm().max(1e-300);
        let err = (c[k] - predicted[k]).norm() / if predicted[k].norm() > 0.0 { den } else { 1.0 };
        worst = worst.max(err);
    }
    Ok(ThetaFit {
        j,
        angle,
        fitted: [pair(c[0]), pair(c[1]), pair(c[2])],
        predicted: [pair(predicted[0]), pair(predicted[1]), pair(predicted[2])],
        max_rel_error: worst,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub j: usize,
    pub angle: f64,
    pub radii: Vec<f64>,
    /// limit of the ratio
    pub limit: [f64; 2],
    /// C_j τ^{(ν−2)/3} ω^{2j}/(√3 n)
    pub predicted: [f64; 2],
    pub rel_error: f64,
    /// fitted z^{−1/3} coefficient relative to the limit
    pub subleading: [f64; 2],
    /// −αν ω^j /(3τ^{2/3})
    pub subleading_predicted: [f64; 2],
    pub subleading_error: f64,
    /// change in the limit when the fit order drops by one
    pub drift: f64,
}

/// C₀, C₁, C₂ in the upper half plane.
pub fn prefactor_constants(nu: f64) -> [Complex64; 3] {
    let i = Complex64::new(0.0, 1.0);
    let pi = std::f64::consts::PI;
    [
        Complex64::new(1.0, 0.0),
        -i * Complex64::from_polar(1.0, -pi * (2.0 * nu + 1.0) / 6.0),
        Complex64::from_polar(1.0, -pi * (2.0 * nu + 1.0) / 3.0),
    ]
}

/// Fit the ratio p_j / (z^{(2ν−1)/3} e^{nθ_{j+1}}) along arg z = angle.
pub fn asymptotic_match(
    tr: &SolutionTriple,
    ts: &ThetaSystem,
    j: usize,
    angle: f64,
    radii: &[f64],
) -> Result<FitReport, Ode3Error> {
    if radii.len() < 5 || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Ode3Error::Fit("need at least five increasing radii".into()));
    }
    let upper = angle.sin() > 0.0;
    let (nu, n, tau, alpha) = (tr.spec.nu, tr.spec.n as f64, tr.spec.tau, tr.alpha);
    let mut u = Vec::new();
    let mut y = Vec::new();
    for &r in radii {
        let z = Complex64::from_polar(r, angle);
        let p = tr.derivs_exact(j, lift::<Octo>(z))?[0];
        let lp: Complex<Octo> = p.ln();
        let lp = Complex64::new(lp.re.f64(), lp.im.f64());
        let th = ts.theta(j + 1, z)?;
        let zc = if upper { z } else { z.conj() };
        let mut lz = zc.ln();
        if !upper {
            lz = lz.conj();
        }
        let e = lp - lz * ((2.0 * nu - 1.0) / 3.0) - th * n;
        y.push(e.exp());
        u.push(if upper {
            z.powf(-1.0 / 3.0)
        } else {
            z.conj().powf(-1.0 / 3.0).conj()
        });
    }
    let order = (radii.len() - 2).min(6);
    let powers: Vec<i32> = (0..=order as i32).collect();
    let c = lsq(&u, &powers, &y)?;
    let c_low = lsq(&u, &powers[..powers.len() - 1], &y)?;
    let w = if upper { omega() } else { omega().conj() };
    let cj = prefactor_constants(nu);
    let cj = if upper {
        cj[j]
    } else {
        match j {
            1 => -cj[1].conj(),
            _ => cj[j].conj(),
        }
    };
    let predicted = cj * tau.powf((nu - 2.0) / 3.0) * w.powu(2 * j as u32) / (3f64.sqrt() * n);
    let sub_pred = w.powu(j as u32) * (-alpha * nu / (3.0 * tau.powf(2.0 / 3.0)));
    let sub = c[1] / c[0];
    let sub_err = if sub_pred.norm() > 0.0 {
        (sub - sub_pred).norm() / sub_pred.norm()
    } else {
        sub.norm()
    };
    let drift = (c[0] - c_low[0]).norm() / c[0].norm();
    if drift > 1e-2 {
        return Err(Ode3Error::Fit(format!(
            "ratio drifts by {drift:.2e} along the ray; branch labels suspect"
        )));
    }
    Ok(FitReport {
        j,
        angle,
        radii: radii.to_vec(),
        limit: pair(c[0]),
        predicted: pair(predicted),
        rel_error: (c[0] - predicted).norm() / predicted.norm(),
        subleading: pair(sub),
        subleading_predicted: pair(sub_pred),
        subleading_error: sub_err,
        drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelSpec;

    #[test]
    fn theta_coefficients() {
        let radii: Vec<f64> = (0..12).map(|k| 1e3 * 2f64.powi(k)).collect();
        for (alpha, tau) in [(-0.8, 0.7), (0.5, 1.3)] {
            let ts = ThetaSystem::from_params(alpha, tau);
            for j in 1..=3 {
                for angle in [0.7, 2.0, -1.0] {
                    let f = theta_fit(&ts, j, angle, &radii).unwrap();
                    assert!(f.max_rel_error < 1e-4, "{alpha} {j} {angle} {:?}", f);
                }
            }
        }
    }

    #[test]
    fn prefactors_at_large_z() {
        let spec = ModelSpec::quadratic(0.3, 1.0, 1, -0.6).unwrap();
        let tr = SolutionTriple::with_radius(&spec, 1000.0).unwrap();
        let ts = ThetaSystem::new(&spec).unwrap();
        let radii: Vec<f64> = (0..8).map(|k| 1e3 * 0.7f64.powi(7 - k)).collect();
        for j in 0..3 {
            for angle in [1.2, -1.9] {
                let f = asymptotic_match(&tr, &ts, j, angle, &radii).unwrap();
                assert!(f.rel_error < 1e-3, "{j} {angle} {:?}", f);
            }
        }
    }
}
