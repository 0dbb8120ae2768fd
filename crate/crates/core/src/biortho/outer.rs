//! Outer x-quadrature of x^j e^{-nV(x)} h_l(x), independent of the termwise
//! series used for the bimoments.

use super::bimoments::BimomentSeries;
use super::BiorthError;
use crate::model::moments::{ln_lambda, ln_moments};
use crate::model::{ModelSpec, WeightTable};
use crate::prelude::*;
use crate::specfun::power_weighted_panels;

/// ln of the reduced h_l(x)/x^ν by log-sum-exp over the Bessel series.
fn ln_h_reduced(spec: &ModelSpec, lnm: &mut Vec<f64>, l: usize, x: f64) -> f64 {
    let (c, nu) = (spec.c(), spec.nu);
    let lx = x.ln();
    let mut peak = f64::NEG_INFINITY;
    let mut acc = 0.0;
    let mut k = 0;
    loop {
        if l + k >= lnm.len() {
            *lnm = ln_moments(&spec.w, spec.n, nu, 2 * lnm.len().max(32));
        }
        let t = ln_lambda(c, nu, k) + k as f64 * lx + lnm[l + k];
        if t > peak {
            acc = acc * (peak - t).exp() + 1.0;
            peak = t;
        } else {
            acc += (t - peak).exp();
            if t < peak - 40.0 {
                break;
            }
        }
        k += 1;
    }
    peak + acc.ln()
}

/// Right end beyond which x^{j+ν} e^{-nV} h_l has dropped `drop` nepers
/// below its peak for every j ≤ j_max, l ≤ l_max.
pub fn x_extent(spec: &ModelSpec, j_max: usize, l_max: usize, drop: f64) -> f64 {
    let nf = spec.n as f64;
    let mut lnm = ln_moments(&spec.w, spec.n, spec.nu, l_max + 64);
    let mut x_end: f64 = 0.0;
    for (j, l) in [(0, 0), (j_max, 0), (0, l_max), (j_max, l_max)] {
        let mut f = |x: f64| {
            (j as f64 + spec.nu) * x.ln() - nf * spec.v.eval(x) + ln_h_reduced(spec, &mut lnm, l, x)
        };
        let mut x = 1e-6;
        let mut peak = f64::NEG_INFINITY;
        while x < 1e8 {
            let v = f(x);
            peak = peak.max(v);
            if v < peak - drop {
                break;
            }
            x *= 1.02;
        }
        x_end = x_end.max(x);
    }
    x_end
}

/// Nodes on [0, X] with weights carrying x^ν e^{-nV(x)}, plus the reduced
/// h_l and h_l' at each node.
#[derive(Clone, Debug)]
pub struct OuterRule<T> {
    pub x: Vec<T>,
    pub w: Vec<T>,
    /// h_l(x)/x^ν for l ≤ l_max
    pub h: Vec<Vec<T>>,
    /// h_l'(x)/x^{ν-1} for l ≤ l_max
    pub dh: Vec<Vec<T>>,
    pub x_max: f64,
    pub panels: usize,
    /// relative mismatch against the series at acceptance
    pub agreement: f64,
}

impl<T: Real> OuterRule<T> {
    fn assemble(
        spec: &ModelSpec,
        table: &WeightTable<T>,
        x_max: f64,
        panels: usize,
        l_max: usize,
    ) -> Result<Self, BiorthError> {
        let order = if T::DIGITS <= 16 {
            20
        } else {
            16 + T::DIGITS as usize / 3
        };
        let (x, w0) = power_weighted_panels::<T>(T::lit(x_max), panels, order, spec.nu_t());
        let n = spec.n_t::<T>();
        let mut w = Vec::with_capacity(x.len());
        let mut h = Vec::with_capacity(x.len());
        let mut dh = Vec::with_capacity(x.len());
        for (&xi, &wi) in x.iter().zip(&w0) {
            w.push(wi * (-n * spec.v.eval(xi)).exp());
            h.push(table.h_all_reduced(xi, l_max + 1, 0)?);
            dh.push(table.h_all_reduced(xi, l_max + 1, 1)?);
        }
        Ok(OuterRule {
            x,
            w,
            h,
            dh,
            x_max,
            panels,
            agreement: f64::NAN,
        })
    }

    /// Doubles the panel count until ∫ x^j e^{-nV} h_l matches the series for
    /// the corner indices to 10^{-0.8·digits}.
    pub fn build(
        spec: &ModelSpec,
        ser: &BimomentSeries<T>,
        j_max: usize,
        l_max: usize,
    ) -> Result<Self, BiorthError> {
        let drop = T::DIGITS as f64 * std::f64::consts::LN_10 + 20.0;
        let x_max = x_extent(spec, j_max, l_max, drop);
        let table = WeightTable::<T>::new(spec, x_max, l_max + 1)?;
        let tol = 10f64.powf(-0.8 * T::DIGITS as f64);
        let mut panels = 16;
        loop {
            let mut rule = Self::assemble(spec, &table, x_max, panels, l_max)?;
            let mut worst: f64 = 0.0;
            for (j, l) in [(0, 0), (j_max, 0), (0, l_max), (j_max, l_max)] {
                let q = rule.moment(j, l);
                let s = ser.entry(j, l);
                worst = worst.max(((q - s) / s).abs().f64());
            }
            rule.agreement = worst;
            if worst < tol {
                return Ok(rule);
            }
            panels *= 2;
            if panels > 2048 {
                return Err(BiorthError::Series(format!(
                    "outer quadrature stalled at {worst:e}"
                )));
            }
        }
    }

    /// ∫ x^j e^{-nV} h_l dx.
    pub fn moment(&self, j: usize, l: usize) -> T {
        let mut s = T::zero();
        for i in 0..self.x.len() {
            s += self.w[i] * self.x[i].powi(j as i32) * self.h[i][l];
        }
        s
    }
}
