//! Scaled complementary error function e^{z²} erfc(z) for complex z.

use num_complex::Complex64;
use std::sync::OnceLock;

use super::logscaled::LogScaledC;
use super::quad::panels;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| {
        let breaks: Vec<f64> = (0..=16).map(|k| 6.5 * k as f64 / 16.0).collect();
        panels::<f64>(&breaks, 24)
    })
}

/// e^{z²}erfc(z) for Re z ≥ 0 via (2/√π)∫_0^∞ e^{−t²−2zt} dt.
fn right_half(z: Complex64) -> Complex64 {
    let (x, w) = rule();
    let mut s = Complex64::new(0.0, 0.0);
    for (t, wt) in x.iter().zip(w) {
        s += (Complex64::new(-t * t, 0.0) - z * (2.0 * t)).exp() * *wt;
    }
    s * (2.0 / std::f64::consts::PI.sqrt())
}

/// Large-|z| expansion (1/(z√π)) Σ (−1)^m (2m−1)!!/(2z²)^m.
fn asymptotic(z: Complex64) -> Complex64 {
    let inv = Complex64::new(1.0, 0.0) / (z * z * 2.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for m in 1..200 {
        term = -term * inv * (2 * m - 1) as f64;
        let t = term.norm();
        if t > prev || t < 1e-17 {
            break;
        }
        prev = t;
        sum += term;
    }
    sum / (z * std::f64::consts::PI.sqrt())
}

/// e^{z²} erfc(z) as a log-scaled value.
pub fn erfc_scaled(z: Complex64) -> LogScaledC {
    if z.re < 0.0 {
        // erfc(z) = 2 − erfc(−z)
        let e = LogScaledC::exp(z * z).scale(Complex64::new(2.0, 0.0));
        let r = erfc_scaled(-z);
        return e.add(LogScaledC::new(-r.mantissa, r.log_scale));
    }
    if z.norm() >= 8.0 {
        return LogScaledC::from_value(asymptotic(z));
    }
    LogScaledC::from_value(right_half(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn at_zero() {
        let v = erfc_scaled(Complex64::new(0.0, 0.0)).value();
        assert!((v - 1.0).norm() < 1e-14);
    }

    #[test]
    fn real_two_against_series() {
        // erfc(2) e^4 from a long Taylor series of erf in extended arithmetic
        let want = 0.2553956763105057;
        let v = erfc_scaled(Complex64::new(2.0, 0.0)).value();
        assert!((v.re - want).abs() < 1e-14 && v.im.abs() < 1e-15);
    }

    #[test]
    fn pure_imaginary_is_faddeeva() {
        // e^{-y²}... w(x) = e^{-x²}erfc(-ix): at z = -i·1 → w(1) = 0.36787944117144233 + 0.60715770584139372 i
        let v = erfc_scaled(Complex64::new(0.0, -1.0)).value();
        assert!((v - Complex64::new(0.36787944117144233, 0.60715770584139372)).norm() < 1e-12);
    }

    #[test]
    fn ray_asymptotics() {
        let ang = std::f64::consts::FRAC_PI_2 - 0.1;
        for &r in &[10.0, 40.0, 200.0] {
            let z = Complex64::from_polar(r, ang);
            let v = erfc_scaled(z).value() * z * std::f64::consts::PI.sqrt();
            assert!((v - 1.0).norm() < 1.0 / (r * r));
        }
    }

    #[test]
    fn continuity_across_switch() {
        let a = right_half(Complex64::from_polar(7.99, 0.7));
        let b = asymptotic(Complex64::from_polar(8.0, 0.7));
        assert!((a - b).norm() / b.norm() < 2e-3);
        let z = Complex64::from_polar(8.0, 0.7);
        assert!((right_half(z) - asymptotic(z)).norm() / b.norm() < 1e-11);
    }
}
