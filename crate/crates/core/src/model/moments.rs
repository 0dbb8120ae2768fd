//! One-dimensional moments m_{ν+j} = ∫_0^∞ y^{ν+j} e^{-n P(y)} dy.
//!
//! The coupled weight factorizes through the Bessel series, so every
//! bimoment and every h_l is a positive series over products of these.

use crate::model::spec::Poly;
use crate::prelude::*;
use crate::specfun::gamma::ln_gamma;
use crate::specfun::power_weighted_panels;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MomentError {
    #[error("moment quadrature did not converge (estimate {0:e})")]
    NotConverged(f64),
    #[error("moment m_{{{0}}} out of range for the working precision")]
    Range(usize),
}

fn order_for(digits: u32) -> usize {
    if digits <= 16 {
        20
    } else {
        16 + digits as usize / 3
    }
}

fn ln_integrand(p: &Poly, n: f64, s: f64, y: f64) -> f64 {
    s * y.ln() - n * p.eval(y)
}

/// Right end of the integration range: beyond it every integrand with
/// j ≤ j_max has dropped by more than `drop` nepers from its peak.
fn y_extent(p: &Poly, n: f64, nu: f64, j_max: usize, drop: f64) -> f64 {
    let mut y_max: f64 = 0.0;
    let step = (j_max / 16).max(1);
    let mut js: Vec<usize> = (0..=j_max).step_by(step).collect();
    js.push(j_max);
    for j in js {
        let s = nu + j as f64;
        let mut peak = f64::NEG_INFINITY;
        let mut y = 1e-6;
        let mut at = y;
        while y < 1e6 {
            let l = ln_integrand(p, n, s, y);
            if l > peak {
                peak = l;
                at = y;
            }
            if y > at && l < peak - drop - 10.0 {
                break;
            }
            y *= 1.01;
        }
        // walk back to the first point below the drop
        let mut y = at;
        while ln_integrand(p, n, s, y) > peak - drop {
            y *= 1.01;
        }
        y_max = y_max.max(y);
    }
    y_max
}

/// Natural logs of m_{ν+j}, j = 0..=j_max, in binary64. Used for sizing
/// series and as a range guard.
pub fn ln_moments(p: &Poly, n: usize, nu: f64, j_max: usize) -> Vec<f64> {
    if let Some((a, deg)) = p.monomial() {
        return (0..=j_max)
            .map(|j| ln_monomial_moment(a, deg, n as f64, nu + j as f64))
            .collect();
    }
    let nf = n as f64;
    let y_max = y_extent(p, nf, nu, j_max, 60.0);
    let eval = |panels: usize| -> Vec<f64> {
        let (ys, ws) = power_weighted_panels::<f64>(y_max, panels, 20, nu);
        let base: Vec<f64> = ys
            .iter()
            .zip(&ws)
            .map(|(&y, &w)| w.ln() - nf * p.eval(y))
            .collect();
        let lny: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        (0..=j_max)
            .map(|j| {
                let jf = j as f64;
                let mx = base
                    .iter()
                    .zip(&lny)
                    .map(|(b, l)| b + jf * l)
                    .fold(f64::NEG_INFINITY, f64::max);
                let s: f64 = base
                    .iter()
                    .zip(&lny)
                    .map(|(b, l)| (b + jf * l - mx).exp())
                    .sum();
                mx + s.ln()
            })
            .collect()
    };
    let mut panels = 8;
    let mut prev = eval(panels);
    loop {
        panels *= 2;
        let next = eval(panels);
        let err = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if err < 1e-9 || panels >= 4096 {
            return next;
        }
        prev = next;
    }
}

fn ln_monomial_moment(a: f64, deg: usize, n: f64, s: f64) -> f64 {
    // ∫ y^s e^{-n a y^p} dy = Γ((s+1)/p) / (p (n a)^{(s+1)/p})
    let p = deg as f64;
    let e = (s + 1.0) / p;
    ln_gamma(e) - p.ln() - e * (n * a).ln()
}

/// Moments m_{ν+j} in precision `T`.
#[derive(Clone, Debug)]
pub struct MomentTable<T> {
    pub values: Vec<T>,
}

impl<T: Real> MomentTable<T> {
    pub fn build(p: &Poly, n: usize, nu: f64, j_max: usize) -> Result<Self, MomentError> {
        if T::DIGITS <= 16 {
            let ln = ln_moments(p, n, nu, j_max);
            if let Some(j) = ln.iter().position(|v| v.abs() > 700.0) {
                return Err(MomentError::Range(j));
            }
        }
        if let Some((a, deg)) = p.monomial() {
            let nt = T::from_usize(n).unwrap();
            let pt = T::from_usize(deg).unwrap();
            let lna = (nt * T::lit(a)).ln();
            let values = (0..=j_max)
                .map(|j| {
                    let e = (T::lit(nu) + T::from_usize(j).unwrap() + T::one()) / pt;
                    (ln_gamma(e) - pt.ln() - e * lna).exp()
                })
                .collect();
            return Ok(MomentTable { values });
        }
        Self::by_quadrature(p, n, nu, 0, j_max)
    }

    /// m_{ν+start+j}, j = 0..=j_max, with the order formed in `T` as ν + start.
    pub fn build_from(
        p: &Poly,
        n: usize,
        nu: f64,
        start: usize,
        j_max: usize,
    ) -> Result<Self, MomentError> {
        Self::by_quadrature(p, n, nu, start, j_max)
    }

    fn by_quadrature(
        p: &Poly,
        n: usize,
        nu: f64,
        start: usize,
        j_max: usize,
    ) -> Result<Self, MomentError> {
        let digits = T::DIGITS;
        let drop = digits as f64 * std::f64::consts::LN_10 + 25.0;
        let y_max = y_extent(p, n as f64, nu + start as f64, j_max, drop);
        let order = order_for(digits);
        let nt = T::from_usize(n).unwrap();
        // Jacobi weights only for the fractional part of large orders
        let whole = nu.floor().max(0.0);
        let frac = nu - whole;
        let whole = whole + start as f64;
        let eval = |panels: usize| -> Vec<T> {
            let (ys, ws) = power_weighted_panels::<T>(T::lit(y_max), panels, order, T::lit(frac));
            let mut acc = vec![T::zero(); j_max + 1];
            for (&y, &w) in ys.iter().zip(&ws) {
                let mut t = w * (-nt * p.eval(y)).exp() * y.powi(whole as i32);
                for a in acc.iter_mut() {
                    *a += t;
                    t *= y;
                }
            }
            acc
        };
        let tol = T::lit(10f64.powi(3 - digits as i32));
        let mut panels = 8;
        let mut prev = eval(panels);
        loop {
            panels *= 2;
            let next = eval(panels);
            let mut err = T::zero();
            for (a, b) in prev.iter().zip(&next) {
                err = err.max(((*a - *b) / *b).abs());
            }
            if err < tol {
                return Ok(MomentTable { values: next });
            }
            if panels >= 4096 {
                return Err(MomentError::NotConverged(err.f64()));
            }
            prev = next;
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// λ_k = c^{2k+ν} / (k! Γ(k+ν+1)) in log form.
pub fn ln_lambda(c: f64, nu: f64, k: usize) -> f64 {
    let kf = k as f64;
    (2.0 * kf + nu) * c.ln() - ln_gamma(kf + 1.0) - ln_gamma(kf + nu + 1.0)
}

/// Number of Bessel-series terms after which every term of
/// Σ_k λ_k e^{k·ln_x} m_{a+k} is below the running total by `drop` nepers.
pub fn series_length(
    c: f64,
    nu: f64,
    ln_x: f64,
    lnm: impl Fn(usize) -> Option<f64>,
    drop: f64,
) -> Option<usize> {
    let mut peak = f64::NEG_INFINITY;
    let mut k = 0;
    loop {
        let t = ln_lambda(c, nu, k) + k as f64 * ln_x + lnm(k)?;
        if t > peak {
            peak = t;
        } else if t < peak - drop {
            return Some(k + 1);
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Octo, Quad};

    #[test]
    fn closed_form_linear_moments() {
        // ∫ y^{j} e^{-3y} dy = j!/3^{j+1}
        let p = Poly(vec![0.0, 1.0]);
        let t = MomentTable::<f64>::build(&p, 3, 0.0, 6).unwrap();
        assert!((t.values[4] - 24.0 / 243.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let p = Poly(vec![0.0, 0.0, 0.5]);
        let exact = MomentTable::<Quad>::build(&p, 4, 0.3, 30).unwrap();
        let quad = MomentTable::<Quad>::by_quadrature(&p, 4, 0.3, 0, 30).unwrap();
        for j in 0..=30 {
            let r = ((exact.values[j] - quad.values[j]) / exact.values[j])
                .abs()
                .f64();
            assert!(r < 1e-70, "j={j} r={r:e}");
        }
    }

    #[test]
    fn quadratic_with_linear_term_octo() {
        // ∫_0^∞ e^{-n(y²/2+αy)} dy = e^{nα²/2} √(π/(2n)) erfc(α√(n/2)), 30-digit reference
        let (n, al) = (5usize, 0.7f64);
        let p = Poly(vec![0.0, al, 0.5]);
        let t = MomentTable::<Octo>::build(&p, n, 0.0, 4).unwrap();
        let want = Octo::parse_decimal("0.224241220796763437916201540873").unwrap();
        assert!(((t.values[0] - want) / want).abs().f64() < 1e-29);
        // first moment from the relation n(m_1 + α m_0) = 1
        let nt = Octo::int(n as i64);
        let rel = nt * (t.values[1] + Octo::lit(al) * t.values[0]) - Octo::one();
        assert!(rel.abs().f64() < 1e-140);
    }

    #[test]
    fn ln_moments_agree_with_table() {
        let p = Poly(vec![0.0, -1.0, 0.5]);
        let ln = ln_moments(&p, 6, 0.5, 20);
        let t = MomentTable::<f64>::build(&p, 6, 0.5, 20).unwrap();
        for j in 0..=20 {
            assert!((ln[j] - t.values[j].ln()).abs() < 1e-8);
        }
    }
}
