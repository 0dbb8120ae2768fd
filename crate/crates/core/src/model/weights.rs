//! f_n, w_n, the functions h_l and the alternative weights w_l.

use num_complex::Complex64;

use super::moments::{ln_moments, series_length, MomentTable};
use super::spec::{ModelError, ModelSpec};
use crate::prelude::*;
use crate::specfun::{bessel_i, bessel_i_complex, power_weighted_panels, LogScaled, LogScaledC};

/// f_n(x) = x^{ν/2} I_ν(2τn√x).
pub fn f_n<T: Real>(spec: &ModelSpec, x: T) -> Result<LogScaled<T>, ModelError> {
    let nu: T = spec.nu_t();
    if x < T::zero() {
        return Err(ModelError::Domain(format!(
            "f_n at negative x = {}",
            x.f64()
        )));
    }
    if x == T::zero() {
        return if spec.nu == 0.0 {
            Ok(LogScaled::from_value(T::one()))
        } else if spec.nu > 0.0 {
            Ok(LogScaled::zero())
        } else {
            Err(ModelError::Domain("f_n(0) is infinite for nu < 0".into()))
        };
    }
    let u = T::int(2) * spec.c_t::<T>() * x.sqrt();
    let i = bessel_i(nu, u)?;
    Ok(i.scale_by_exp(nu * T::lit(0.5) * x.ln()))
}

/// (f_n, f_n', f_n'') at x > 0 from d^m/dx^m f_n = c^m x^{(ν-m)/2} I_{ν-m}(2c√x).
pub fn f_n_derivs<T: Real>(spec: &ModelSpec, x: T) -> Result<[LogScaled<T>; 3], ModelError> {
    if x <= T::zero() {
        return Err(ModelError::Domain("derivatives of f_n need x > 0".into()));
    }
    let nu: T = spec.nu_t();
    let c = spec.c_t::<T>();
    let u = T::int(2) * c * x.sqrt();
    let i0 = bessel_i(nu, u)?;
    let i1 = bessel_i(nu + T::one(), u)?;
    let s = i0.log_scale.max(i1.log_scale);
    let (a0, a1) = (i0.value_scaled(s), i1.value_scaled(s));
    let two = T::int(2);
    // downward in order: I_{μ-1} = I_{μ+1} + (2μ/u) I_μ
    let am1 = a1 + two * nu / u * a0;
    let am2 = a0 + two * (nu - T::one()) / u * am1;
    let lx = x.ln();
    let half = T::lit(0.5);
    Ok([
        LogScaled::new(a0, s + nu * half * lx),
        LogScaled::new(c * am1, s + (nu - T::one()) * half * lx),
        LogScaled::new(c * c * am2, s + (nu - two) * half * lx),
    ])
}

/// f_n on the principal sheet for complex argument.
pub fn f_n_complex(spec: &ModelSpec, z: Complex64) -> Result<LogScaledC, ModelError> {
    if z == Complex64::new(0.0, 0.0) {
        return f_n::<f64>(spec, 0.0)
            .map(|v| LogScaledC::from_value(Complex64::new(v.value(), 0.0)));
    }
    let w = 2.0 * spec.c() * z.sqrt();
    let i = bessel_i_complex(spec.nu, w)?;
    Ok(i * LogScaledC::exp(0.5 * spec.nu * z.ln()))
}

/// The two-variable weight f_n(xy) e^{-n(V(x)+W(y))}.
pub fn w_n<T: Real>(spec: &ModelSpec, x: T, y: T) -> Result<LogScaled<T>, ModelError> {
    if x < T::zero() || y < T::zero() {
        return Err(ModelError::Domain("w_n needs x, y >= 0".into()));
    }
    let f = f_n(spec, x * y)?;
    let n = spec.n_t::<T>();
    Ok(f.scale_by_exp(-n * (spec.v.eval(x) + spec.w.eval(y))))
}

/// h_l and its derivatives from the Bessel series
/// h_l(x) = Σ_k λ_k x^{k+ν} m^W_{ν+l+k}, every term positive.
#[derive(Clone, Debug)]
pub struct WeightTable<T> {
    pub spec: ModelSpec,
    pub x_max: f64,
    pub l_max: usize,
    mw: MomentTable<T>,
    lam0: T,
}

/// Bessel-series length covering every requested index up to `x_max`.
pub(crate) fn h_series_terms(
    spec: &ModelSpec,
    x_max: f64,
    l_max: usize,
    digits: u32,
) -> (usize, Vec<f64>) {
    let drop = digits as f64 * std::f64::consts::LN_10 + 12.0;
    let mut j_max = l_max + 64;
    loop {
        let lnm = ln_moments(&spec.w, spec.n, spec.nu, j_max);
        let f = |k: usize| lnm.get(l_max + k).copied();
        if let Some(k) = series_length(spec.c(), spec.nu, x_max.max(1e-300).ln(), f, drop) {
            return (k, lnm);
        }
        j_max *= 2;
    }
}

impl<T: Real> WeightTable<T> {
    /// Table good for 0 ≤ x ≤ x_max and l ≤ l_max (derivative orders ≤ 2).
    pub fn new(spec: &ModelSpec, x_max: f64, l_max: usize) -> Result<Self, ModelError> {
        let (k, _) = h_series_terms(spec, x_max, l_max, T::DIGITS);
        let mw = MomentTable::build(&spec.w, spec.n, spec.nu, l_max + k + 2)?;
        let nu: T = spec.nu_t();
        let c = spec.c_t::<T>();
        let lam0 = c.powf(nu) * crate::specfun::rgamma(nu + T::one());
        Ok(WeightTable {
            spec: spec.clone(),
            x_max,
            l_max,
            mw,
            lam0,
        })
    }

    pub fn moments(&self) -> &MomentTable<T> {
        &self.mw
    }

    /// h_l^{(deriv)}(x) for l = 0..l_count, x > 0.
    pub fn h_all(&self, x: T, l_count: usize, deriv: usize) -> Result<Vec<T>, ModelError> {
        if x <= T::zero() {
            return self.h_at_zero(l_count, deriv);
        }
        let nu: T = self.spec.nu_t();
        let s = ((nu - T::from_usize(deriv).unwrap()) * x.ln()).exp();
        Ok(self
            .h_all_reduced(x, l_count, deriv)?
            .into_iter()
            .map(|v| v * s)
            .collect())
    }

    /// h_l^{(deriv)}(x) / x^{ν-deriv}: the entire-function part, finite at 0.
    pub fn h_all_reduced(&self, x: T, l_count: usize, deriv: usize) -> Result<Vec<T>, ModelError> {
        if l_count > self.l_max + 1 {
            return Err(ModelError::Index {
                l: l_count - 1,
                max: self.l_max,
            });
        }
        let nu: T = self.spec.nu_t();
        let c = self.spec.c_t::<T>();
        let c2x = c * c * x;
        let eps = T::lit(10f64.powi(-(T::DIGITS as i32) - 3));
        let mut out = vec![T::zero(); l_count];
        let mut t = self.lam0;
        let mut k = 0usize;
        let mut peak = T::zero();
        loop {
            if k + l_count > self.mw.len() {
                return Err(ModelError::Domain(format!(
                    "x = {} beyond the table range {}",
                    x.f64(),
                    self.x_max
                )));
            }
            let kk = T::from_usize(k).unwrap();
            let mut fac = T::one();
            for d in 0..deriv {
                fac *= kk + nu - T::from_usize(d).unwrap();
            }
            let tk = t * fac;
            for (l, o) in out.iter_mut().enumerate() {
                *o += tk * self.mw.values[l + k];
            }
            let probe = (tk * self.mw.values[k + l_count - 1]).abs() + t * self.mw.values[k];
            if probe > peak {
                peak = probe;
            } else if probe <= peak * eps {
                break;
            }
            t = t * c2x / ((kk + T::one()) * (kk + nu + T::one()));
            k += 1;
        }
        Ok(out)
    }

    fn h_at_zero(&self, l_count: usize, deriv: usize) -> Result<Vec<T>, ModelError> {
        if deriv == 0 && self.spec.nu == 0.0 {
            return Ok((0..l_count)
                .map(|l| self.lam0 * self.mw.values[l])
                .collect());
        }
        if self.spec.nu > deriv as f64 {
            return Ok(vec![T::zero(); l_count]);
        }
        Err(ModelError::Domain(
            "h_l derivative is singular at x = 0".into(),
        ))
    }

    pub fn h(&self, l: usize, x: T) -> Result<T, ModelError> {
        Ok(self.h_all(x, l + 1, 0)?[l])
    }

    /// w_l = e^{-nV} h_l (l ≤ r), e^{-nV} x h'_{l-r-1} (r < l ≤ 2r).
    pub fn weight_w_l(&self, l: usize, x: T) -> Result<LogScaled<T>, ModelError> {
        let r = self.spec.r();
        if l > 2 * r {
            return Err(ModelError::Index { l, max: 2 * r });
        }
        let ev = -self.spec.n_t::<T>() * self.spec.v.eval(x);
        let v = if l <= r {
            self.h_all(x, l + 1, 0)?[l]
        } else {
            x * self.h_all(x, l - r, 1)?[l - r - 1]
        };
        Ok(LogScaled::from_value(v).scale_by_exp(ev))
    }
}

/// h_l by direct quadrature over y of the Bessel weight, an independent
/// route used to cross-check the series tables.
#[derive(Clone, Debug)]
pub struct HQuadrature<T> {
    spec: ModelSpec,
    ys: Vec<T>,
    ws: Vec<T>,
}

impl<T: Real> HQuadrature<T> {
    pub fn new(spec: &ModelSpec, x_max: f64, l_max: usize) -> Self {
        let (nf, c, nu) = (spec.n as f64, spec.c(), spec.nu);
        let drop = 45.0 + T::DIGITS as f64 * std::f64::consts::LN_10;
        let lw =
            |l: f64, y: f64| (l + nu) * y.ln() + 2.0 * c * (x_max * y).sqrt() - nf * spec.w.eval(y);
        let mut y_max: f64 = 0.0;
        let mut width = f64::INFINITY;
        for l in [0.0, (l_max + 2) as f64] {
            let mut y = 1e-8;
            let (mut peak, mut at) = (f64::NEG_INFINITY, y);
            while y < 1e6 {
                let v = lw(l, y);
                if v > peak {
                    peak = v;
                    at = y;
                } else if v < peak - drop {
                    break;
                }
                y *= 1.005;
            }
            y_max = y_max.max(y);
            let h = (at * 1e-3).max(1e-6);
            let d2 = (lw(l, at + h) - 2.0 * lw(l, at) + lw(l, (at - h).max(1e-12))) / (h * h);
            if d2 < 0.0 {
                width = width.min(1.0 / (-d2).sqrt());
            }
        }
        if !width.is_finite() {
            width = y_max / 16.0;
        }
        let panels = ((y_max / width) * 1.5).ceil().clamp(16.0, 4000.0) as usize;
        let order = if T::DIGITS <= 16 {
            20
        } else {
            16 + T::DIGITS as usize / 3
        };
        let (ys, ws) = power_weighted_panels::<T>(T::lit(y_max), panels, order, T::lit(nu));
        HQuadrature {
            spec: spec.clone(),
            ys,
            ws,
        }
    }

    /// h_l^{(deriv)}(x), deriv ≤ 2, x > 0.
    pub fn h(&self, l: usize, deriv: usize, x: T) -> Result<LogScaled<T>, ModelError> {
        let n = self.spec.n_t::<T>();
        let nu: T = self.spec.nu_t();
        let mut acc = LogScaled::zero();
        for (&y, &w) in self.ys.iter().zip(&self.ws) {
            let f = f_n_derivs(&self.spec, x * y)?[deriv];
            let p = T::from_usize(l + deriv).unwrap();
            let term = f.scale_by_exp((p - nu) * y.ln() - n * self.spec.w.eval(y))
                * LogScaled::from_value(w);
            acc = acc.add(term);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Quad;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn f_n_values() {
        let s0 = ModelSpec::new(0.0, 1.0, 1, vec![0.0, 1.0], vec![0.0, 1.0, 1.0]).unwrap();
        assert_eq!(f_n(&s0, 0.0).unwrap().value(), 1.0);
        // ν=1/2, τ=1, n=2, x=1: x^{1/4} I_{1/2}(4) = sinh 4 / √(2π)·... closed form
        let s = ModelSpec::new(0.5, 1.0, 2, vec![0.0, 1.0], vec![0.0, 1.0, 1.0]).unwrap();
        let want = 4.0f64.sinh() * (2.0 / (std::f64::consts::PI * 4.0)).sqrt();
        assert!(rel(f_n(&s, 1.0f64).unwrap().value(), want) < 1e-14);
        assert!(
            rel(
                want,
                4.0f64.sinh() / (4.0 * std::f64::consts::PI).sqrt() * 2.0f64.sqrt()
            ) < 1e-14
        );
    }

    #[test]
    fn f_n_differential_equation() {
        let mut rng = 12345u64;
        let mut next = || {
            rng = rng
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10 {
            let nu = -0.9 + 3.0 * next();
            let tau = 0.2 + next();
            let n = 1 + (next() * 8.0) as usize;
            let x = 0.05 + 3.0 * next();
            let s = ModelSpec::new(nu, tau, n, vec![0.0, 1.0], vec![0.0, 0.0, 0.5]).unwrap();
            let [f, f1, f2] = f_n_derivs(&s, x).unwrap();
            let sh = f.log_scale;
            let c2 = s.c() * s.c();
            let res = x * f2.value_scaled(sh)
                - (nu - 1.0) * f1.value_scaled(sh)
                - c2 * f.value_scaled(sh);
            assert!(
                res.abs() < 1e-8 * c2 * f.value_scaled(sh).abs(),
                "nu={nu} x={x} res={res}"
            );
        }
    }

    #[test]
    fn derivative_against_finite_difference() {
        let s = ModelSpec::new(0.7, 0.6, 3, vec![0.0, 1.0], vec![0.0, 0.0, 0.5]).unwrap();
        let x = 1.3;
        let h = 1e-5;
        let fp = f_n(&s, x + h).unwrap().value();
        let fm = f_n(&s, x - h).unwrap().value();
        let d = f_n_derivs(&s, x).unwrap()[1].value();
        assert!(rel((fp - fm) / (2.0 * h), d) < 1e-8);
    }

    #[test]
    fn w_n_values() {
        let s = ModelSpec::linear(0.0, 0.5, 1, 1.0, 1.0).unwrap();
        let i0 = 1.2660658777520083356;
        assert!(rel(w_n(&s, 1.0, 1.0).unwrap().value(), i0 * (-2.0f64).exp()) < 1e-14);
        let s2 = ModelSpec::linear(0.5, 0.5, 1, 1.0, 1.0).unwrap();
        assert_eq!(w_n(&s2, 0.0, 1.0).unwrap().value(), 0.0);
        assert_eq!(f_n(&s2, 2.0 * 3.0).unwrap(), f_n(&s2, 3.0 * 2.0).unwrap());
    }

    #[test]
    fn complex_f_n_on_positive_axis() {
        let s = ModelSpec::new(0.3, 0.9, 4, vec![0.0, 1.0], vec![0.0, 0.0, 0.5]).unwrap();
        let a = f_n_complex(&s, Complex64::new(1.7, 0.0)).unwrap().value();
        let b = f_n(&s, 1.7f64).unwrap().value();
        assert!(rel(a.re, b) < 1e-12 && a.im.abs() < 1e-12 * b);
    }

    #[test]
    fn series_matches_quadrature() {
        for (nu, w) in [
            (0.0, vec![0.0, -1.0, 0.5]),
            (-0.5, vec![0.0, 0.3, 0.5]),
            (2.0, vec![0.0, 0.0, 0.2, 0.3]),
        ] {
            let s = ModelSpec::new(nu, 0.7, 5, vec![0.0, 1.0], w).unwrap();
            let tab = WeightTable::<f64>::new(&s, 4.0, 6).unwrap();
            let hq = HQuadrature::<f64>::new(&s, 4.0, 6);
            for &x in &[0.01, 0.4, 2.5, 4.0] {
                for d in 0..3 {
                    let ser = tab.h_all(x, 5, d).unwrap();
                    for (l, sv) in ser.iter().enumerate() {
                        let q = hq.h(l, d, x).unwrap().value();
                        assert!(
                            rel(*sv, q) < 1e-10,
                            "nu={nu} x={x} l={l} d={d}: {sv} vs {q}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn decoupled_limit() {
        let s = ModelSpec::linear(0.0, 1e-8, 3, 1.0, 1.0).unwrap();
        let tab = WeightTable::<f64>::new(&s, 1.0, 2).unwrap();
        assert!(rel(tab.h(0, 1.0).unwrap(), 1.0 / 3.0) < 1e-12);
    }

    fn lemma_residual(s: &ModelSpec, x: Quad) -> f64 {
        // x h_l' + (l+1) h_l - n Σ_j j w_j h_{l+j-1}
        let r = s.r();
        let tab = WeightTable::<Quad>::new(s, 5.0, 12).unwrap();
        let h = tab.h_all(x, 10, 0).unwrap();
        let h1 = tab.h_all(x, 10, 1).unwrap();
        let n = s.n_t::<Quad>();
        let mut worst = 0.0f64;
        for l in 0..(10 - r - 1) {
            let mut sum = Quad::zero();
            let mut scale = (x * h1[l]).abs() + h[l];
            for j in 1..=r + 1 {
                let cj = Quad::lit(s.w.coef(j)) * Quad::int(j as i64);
                sum += cj * h[l + j];
                scale += (n * cj * h[l + j]).abs();
            }
            let res = x * h1[l] + Quad::from_usize(l + 1).unwrap() * h[l] - n * sum;
            worst = worst.max((res / scale).abs().f64());
        }
        worst
    }

    #[test]
    fn general_w_relation() {
        let quad = ModelSpec::new(0.4, 0.8, 4, vec![0.0, 1.0], vec![0.0, -0.6, 0.5]).unwrap();
        let cubic =
            ModelSpec::new(-0.3, 0.6, 3, vec![0.0, 1.0, 0.2], vec![0.0, 0.1, 0.4, 0.3]).unwrap();
        for s in [quad, cubic] {
            for x in [0.2, 1.0, 3.5] {
                let r = lemma_residual(&s, Quad::lit(x));
                assert!(r < 1e-60, "{r:e}");
            }
        }
    }

    #[test]
    fn quadratic_four_term_and_ladder() {
        let s = ModelSpec::quadratic(0.6, 0.9, 5, -0.7).unwrap();
        let al = Quad::lit(-0.7);
        let (nu, n, tau) = (Quad::lit(0.6), Quad::int(5), Quad::lit(0.9));
        let tab = WeightTable::<Quad>::new(&s, 4.0, 8).unwrap();
        for x in [0.1, 0.9, 2.2, 3.9] {
            let x = Quad::lit(x);
            let h = tab.h_all(x, 6, 0).unwrap();
            let h1 = tab.h_all(x, 6, 1).unwrap();
            let h2 = tab.h_all(x, 6, 2).unwrap();
            let two = Quad::int(2);
            let res = h[3] + two * al * h[2] + (al * al - (nu + two) / n) * h[1]
                - ((nu + Quad::one()) * al / n + tau * tau * x) * h[0];
            assert!((res / h[3]).abs().f64() < 1e-60);
            // x h_0' = -h_0 + nα h_1 + n h_2
            let r2 = x * h1[0] + h[0] - n * al * h[1] - n * h[2];
            assert!((r2 / h[0]).abs().f64() < 1e-60);
            let c2 = (tau * n) * (tau * n);
            for l in 0..4 {
                let lad = c2 * h[l + 1] - (x * h2[l] - (nu - Quad::one()) * h1[l]);
                assert!((lad / (c2 * h[l + 1])).abs().f64() < 1e-60);
            }
        }
    }

    #[test]
    fn h_positive_and_weights() {
        let s = ModelSpec::quadratic(0.5, 0.8, 6, -1.0).unwrap();
        let tab = WeightTable::<f64>::new(&s, 3.0, 4).unwrap();
        for x in [1e-3, 0.5, 2.9] {
            assert!(tab.h_all(x, 4, 0).unwrap().iter().all(|&v| v > 0.0));
            let e = (-6.0 * x).exp();
            assert!(
                rel(
                    tab.weight_w_l(0, x).unwrap().value(),
                    e * tab.h(0, x).unwrap()
                ) < 1e-14
            );
            let d = tab.h_all(x, 1, 1).unwrap()[0];
            assert!(rel(tab.weight_w_l(2, x).unwrap().value(), e * x * d) < 1e-14);
        }
        assert!(tab.weight_w_l(3, 1.0).is_err());
    }

    #[test]
    fn small_x_exponent() {
        let s = ModelSpec::quadratic(0.5, 0.8, 6, -1.0).unwrap();
        let tab = WeightTable::<f64>::new(&s, 1.0, 4).unwrap();
        for l in 0..=2 {
            let a = tab.weight_w_l(l, 1e-6).unwrap().value();
            let b = tab.weight_w_l(l, 1e-4).unwrap().value();
            let slope = (b / a).ln() / 100f64.ln();
            assert!((slope - 0.5).abs() < 0.02, "l={l} slope={slope}");
        }
    }
}
