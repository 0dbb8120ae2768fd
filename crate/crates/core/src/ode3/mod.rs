//! Analytic structure for quadratic W = y²/2 + αy: the third-order ODE, its
//! solutions p₀, p₁, p₂, the contour integrals q_j, the θ-functions and the
//! Wronskian.

pub mod asymptotics;
pub mod checks;
pub mod qfun;
pub mod solutions;
pub mod theta;

pub use asymptotics::{asymptotic_match, theta_fit, FitReport, ThetaFit};
pub use checks::{ode_check, OdeCheckReport, QCheck, WronskianCheck};
pub use qfun::QFunctions;
pub use solutions::{SolutionTriple, WronskianSample};
pub use theta::ThetaSystem;

use num_complex::{Complex, Complex64};

use crate::model::{ModelSpec, MomentError};
use crate::prelude::*;
use crate::specfun::{erfc_scaled, LogScaledC};

#[derive(Debug, thiserror::Error)]
pub enum Ode3Error {
    #[error("the ODE module needs W = y^2/2 + alpha y")]
    NotQuadratic,
    #[error("p_{j} evaluated on its cut at z = {z}")]
    Cut { j: usize, z: Complex64 },
    #[error("|z| = {r} beyond the prepared radius {max}")]
    Range { r: f64, max: f64 },
    #[error("series cancellation leaves {left:.1} of {digits} digits")]
    Precision { left: f64, digits: u32 },
    #[error("branch tracking failed: {0}")]
    Branch(String),
    #[error("contour integral did not resolve: {0}")]
    Contour(String),
    #[error("asymptotic fit: {0}")]
    Fit(String),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

pub(crate) fn alpha_of(spec: &ModelSpec) -> Result<f64, Ode3Error> {
    spec.alpha().ok_or(Ode3Error::NotQuadratic)
}

/// Branch point x*(α) of the θ-cubic: 0 for α ≥ 0, −(4/τ²)(α/3)³ otherwise.
pub fn x_star(alpha: f64, tau: f64) -> f64 {
    if alpha >= 0.0 {
        0.0
    } else {
        -(4.0 / (tau * tau)) * (alpha / 3.0).powi(3)
    }
}

/// y*(α) = −x*(−α).
pub fn y_star(alpha: f64, tau: f64) -> f64 {
    -x_star(-alpha, tau)
}

/// |Σ terms| / max |term| for
/// x²p''' + (2−2ν)xp'' + (αn²τ²x + ν²−ν)p' − (τ⁴n³x + τ²n²να)p.
pub fn ode_residual<T: Real>(
    spec: &ModelSpec,
    z: Complex<T>,
    d: &[Complex<T>; 4],
) -> Result<f64, Ode3Error> {
    let alpha = T::lit(alpha_of(spec)?);
    let nu: T = spec.nu_t();
    let n: T = spec.n_t();
    let tau = T::lit(spec.tau);
    let t2 = tau * tau;
    let terms = [
        z * z * d[3],
        z * d[2] * (T::int(2) - T::int(2) * nu),
        (z * (alpha * n * n * t2) + Complex::from(nu * nu - nu)) * d[1],
        -(z * (t2 * t2 * n * n * n) + Complex::from(t2 * n * n * nu * alpha)) * d[0],
    ];
    let big = terms
        .iter()
        .map(|t| t.norm())
        .fold(T::zero(), |a, b| a.max(b));
    if big == T::zero() {
        return Ok(0.0);
    }
    let s = terms
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
    Ok((s.norm() / big).f64())
}

/// f_α(s) = e^{t²/2}√(π/2) erfc(t/√2), t = 1/s − α.
pub fn f_alpha(alpha: f64, s: Complex64) -> LogScaledC {
    let t = Complex64::new(1.0, 0.0) / s - alpha;
    erfc_scaled(t / std::f64::consts::SQRT_2)
        .scale(Complex64::new((std::f64::consts::PI / 2.0).sqrt(), 0.0))
}

pub(crate) fn to_logscaled<T: Real>(v: Complex<T>) -> LogScaledC {
    let a = v.norm();
    if a == T::zero() {
        return LogScaledC::zero();
    }
    let l = a.ln().floor();
    let m = v / l.exp();
    LogScaledC::new(Complex64::new(m.re.f64(), m.im.f64()), l.f64())
}

pub(crate) fn lift<T: Real>(z: Complex64) -> Complex<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_points() {
        assert_eq!(x_star(-3.0, 1.0), 4.0);
        assert_eq!(y_star(-3.0, 1.0), 0.0);
        assert_eq!(x_star(2.0, 0.5), 0.0);
        assert!((y_star(3.0, 1.0) + 4.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_fails_the_ode() {
        let s = ModelSpec::quadratic(0.3, 0.9, 4, -0.5).unwrap();
        let z = Complex64::new(1.0, 1.0);
        let p = |z: Complex64| z * z * z - z * 2.0 + 1.0;
        let d = [p(z), z * z * 3.0 - 2.0, z * 6.0, Complex64::new(6.0, 0.0)];
        assert!(ode_residual(&s, z, &d).unwrap() > 0.1);
    }

    #[test]
    fn f_alpha_is_order_s() {
        // |f_α(s)| ≤ C|s| on rays inside |arg s| ≤ 3π/4 − 0.1
        for alpha in [-1.0, 0.0, 0.7] {
            let mut worst: f64 = 0.0;
            for k in 0..=20 {
                let phi = -(3.0 * std::f64::consts::FRAC_PI_4 - 0.1)
                    + k as f64 * (1.5 * std::f64::consts::PI - 0.2) / 20.0;
                for r in [1e-1, 3e-2, 1e-2, 1e-3, 1e-4] {
                    let s = Complex64::from_polar(r, phi);
                    worst = worst.max(f_alpha(alpha, s).value().norm() / r);
                }
            }
            assert!(worst < 3.0, "{alpha} {worst}");
        }
    }

    #[test]
    fn f_alpha_against_quadrature() {
        // f_α(s) = ∫_0^∞ e^{−u²/2 − tu} du for Re t > 0
        let (alpha, s) = (0.4, Complex64::new(0.5, 0.3));
        let t = Complex64::new(1.0, 0.0) / s - alpha;
        let (x, w) = crate::specfun::quad::gauss_legendre::<f64>(80);
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, wi) in x.iter().zip(&w) {
            let u = 6.0 * (xi + 1.0);
            acc += (Complex64::new(-u * u / 2.0, 0.0) - t * u).exp() * (6.0 * wi);
        }
        assert!((f_alpha(alpha, s).value() - acc).norm() < 1e-12);
    }
}
