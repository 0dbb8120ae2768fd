//! Rescaled finite-n kernels against the sine, Airy and Bessel limits.
//!
//! The finite-n kernel is compared through the gauge-invariant combination
//! √|K(ξ,η)K(η,ξ)|, so the conjugation factors that the limit statements
//! leave free never enter. Edge locations and the constant c are fitted.

use serde::{Deserialize, Serialize};

use super::{Kernel, KernelError};
use crate::prelude::*;
use crate::specfun::{airy, bessel_j};
use crate::Quad;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Bulk,
    SoftEdge,
    HardEdge,
}

impl Regime {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "bulk" => Some(Regime::Bulk),
            "soft" | "soft_edge" => Some(Regime::SoftEdge),
            "hard" | "hard_edge" => Some(Regime::HardEdge),
            _ => None,
        }
    }

    pub fn default_window(self) -> (f64, f64) {
        match self {
            Regime::Bulk => (-2.0, 2.0),
            Regime::SoftEdge => (-2.0, 1.0),
            Regime::HardEdge => (0.05, 10.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingRequest {
    pub regime: Regime,
    /// bulk point; ignored for the edges, whose location is fitted
    pub x_star: Option<f64>,
    pub side: Side,
    pub window: (f64, f64),
    pub points: usize,
}

impl ScalingRequest {
    pub fn new(regime: Regime) -> Self {
        ScalingRequest {
            regime,
            x_star: None,
            side: Side::Right,
            window: regime.default_window(),
            points: 13,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub regime: Regime,
    pub n: usize,
    pub x_star: f64,
    /// local unit s: x = x* + ξ s (bulk, soft) or x = ξ s (hard)
    pub scale: f64,
    /// fitted constant c, from s = (cn)^{-2/3} or s = (cn)^{-2}
    pub c: Option<f64>,
    pub window: (f64, f64),
    pub sup_deviation: f64,
}

/// Limit kernels evaluated in 256-bit arithmetic and returned in binary64.
pub fn sine_kernel(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d.abs() < 1e-12 {
        1.0
    } else {
        (std::f64::consts::PI * d).sin() / (std::f64::consts::PI * d)
    }
}

pub fn airy_kernel(x: f64, y: f64) -> f64 {
    let (ax, dax) = airy(Quad::lit(x));
    let (ay, day) = airy(Quad::lit(y));
    if (x - y).abs() < 1e-9 {
        return (dax * dax - Quad::lit(x) * ax * ax).f64();
    }
    ((ax * day - dax * ay) / Quad::lit(x - y)).f64()
}

pub fn bessel_kernel(nu: f64, x: f64, y: f64) -> f64 {
    let nu_q = Quad::lit(nu);
    let (sx, sy) = (Quad::lit(x).sqrt(), Quad::lit(y).sqrt());
    let (jx, djx) = bessel_j(nu_q, sx);
    if (x - y).abs() < 1e-9 {
        let (jp, _) = bessel_j(nu_q + Quad::one(), sx);
        // J_{ν-1} = 2ν/u J_ν − J_{ν+1}
        let jm = Quad::int(2) * nu_q / sx * jx - jp;
        return ((jx * jx - jp * jm) / Quad::int(4)).f64();
    }
    let (jy, djy) = bessel_j(nu_q, sy);
    ((jx * sy * djy - sx * djx * jy) / (Quad::int(2) * (Quad::lit(x) - Quad::lit(y)))).f64()
}

struct Probe<'a> {
    ke: &'a dyn Kernel,
    grid: Vec<f64>,
}

impl Probe<'_> {
    fn diag_misfit(&self, map: impl Fn(f64) -> f64, s: f64, lim: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for &g in &self.grid {
            let x = map(g);
            let v = if x > 0.0 {
                self.ke.kernel(x, x).unwrap_or(f64::NAN) * s
            } else {
                0.0
            };
            acc += (v - lim(g, g)).powi(2);
        }
        if acc.is_finite() {
            acc
        } else {
            f64::INFINITY
        }
    }

    fn sup_deviation(
        &self,
        map: impl Fn(f64) -> f64,
        s: f64,
        lim: impl Fn(f64, f64) -> f64,
    ) -> Result<f64, KernelError> {
        let xs: Vec<f64> = self.grid.iter().map(|&g| map(g)).collect();
        if xs.iter().any(|&x| x <= 0.0) {
            return Err(KernelError::Regime("window leaves (0, ∞)".into()));
        }
        let k = self.ke.matrix(&xs, &xs)?;
        let mut worst: f64 = 0.0;
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                let fin = (k[i][j] * k[j][i]).abs().sqrt() * s;
                let l = lim(self.grid[i], self.grid[j]).abs();
                worst = worst.max((fin - l).abs());
            }
        }
        Ok(worst)
    }
}

fn linspace(a: f64, b: f64, m: usize) -> Vec<f64> {
    (0..m)
        .map(|i| a + (b - a) * i as f64 / (m - 1) as f64)
        .collect()
}

/// Minimizes f over [a, b] by golden-section search.
fn golden(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Nelder–Mead in two variables.
fn nelder_mead(
    f: impl Fn([f64; 2]) -> f64,
    start: [f64; 2],
    step: [f64; 2],
    iters: usize,
) -> [f64; 2] {
    let mut s = [
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut v = s.map(&f);
    for _ in 0..iters {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let (b, m, w) = (idx[0], idx[1], idx[2]);
        let cen = [(s[b][0] + s[m][0]) / 2.0, (s[b][1] + s[m][1]) / 2.0];
        let at = |t: f64| {
            [
                cen[0] + t * (s[w][0] - cen[0]),
                cen[1] + t * (s[w][1] - cen[1]),
            ]
        };
        let r = at(-1.0);
        let fr = f(r);
        if fr < v[b] {
            let e = at(-2.0);
            let fe = f(e);
            if fe < fr {
                s[w] = e;
                v[w] = fe;
            } else {
                s[w] = r;
                v[w] = fr;
            }
        } else if fr < v[m] {
            s[w] = r;
            v[w] = fr;
        } else {
            let c = at(0.5);
            let fc = f(c);
            if fc < v[w] {
                s[w] = c;
                v[w] = fc;
            } else {
                for i in [m, w] {
                    s[i] = [(s[i][0] + s[b][0]) / 2.0, (s[i][1] + s[b][1]) / 2.0];
                    v[i] = f(s[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    s[best]
}

/// ρ_n on a uniform grid over (0, x_max].
fn density_scan(ke: &dyn Kernel, m: usize) -> Result<(Vec<f64>, Vec<f64>), KernelError> {
    let h = ke.x_max() / m as f64;
    let xs: Vec<f64> = (1..=m).map(|i| i as f64 * h).collect();
    let rho = xs
        .iter()
        .map(|&x| ke.density(x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((xs, rho))
}

pub fn scaling_limit_compare(
    ke: &dyn Kernel,
    req: &ScalingRequest,
) -> Result<ScalingReport, KernelError> {
    let n = ke.n();
    let nf = n as f64;
    let nu = ke.spec().nu;
    let grid = linspace(req.window.0, req.window.1, req.points.max(3));
    let probe = Probe { ke, grid };
    let (xs, rho) = density_scan(ke, 600)?;
    let (imax, rmax) = rho
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |a, (i, &r)| if r > a.1 { (i, r) } else { a });
    // last grid point carrying density above 1e-3 of the peak
    let iend = rho
        .iter()
        .rposition(|&r| r > 1e-3 * rmax)
        .unwrap_or(rho.len() - 1);
    let hard_like = imax * 20 <= iend;
    match req.regime {
        Regime::Bulk => {
            let x = req
                .x_star
                .ok_or_else(|| KernelError::Regime("bulk comparison needs x*".into()))?;
            let r = ke.density(x)?;
            if !(r > 0.05 * rmax) {
                return Err(KernelError::Regime(format!(
                    "x* = {x} is not in the bulk (ρ_n = {r:e})"
                )));
            }
            let s = 1.0 / (nf * r);
            let dev = probe.sup_deviation(|g| x + g * s, s, sine_kernel)?;
            Ok(ScalingReport {
                regime: req.regime,
                n,
                x_star: x,
                scale: s,
                c: None,
                window: req.window,
                sup_deviation: dev,
            })
        }
        Regime::HardEdge => {
            if !hard_like {
                return Err(KernelError::Regime(
                    "density does not blow up at the origin".into(),
                ));
            }
            let lim = |a: f64, b: f64| bessel_kernel(nu, a, b);
            let f = |ls: f64| probe.diag_misfit(|g| g * ls.exp(), ls.exp(), lim);
            // coarse scan of ln s, then golden refinement
            let lo = (ke.x_max() * 1e-8).ln();
            let hi = (ke.x_max() * 1e-1).ln();
            let cand = linspace(lo, hi, 60);
            let k0 = (0..cand.len())
                .min_by(|&a, &b| f(cand[a]).total_cmp(&f(cand[b])))
                .unwrap();
            let step = cand[1] - cand[0];
            let ls = golden(f, cand[k0] - step, cand[k0] + step, 40);
            let s = ls.exp();
            let dev = probe.sup_deviation(|g| g * s, s, lim)?;
            Ok(ScalingReport {
                regime: req.regime,
                n,
                x_star: 0.0,
                scale: s,
                c: Some(1.0 / (s.sqrt() * nf)),
                window: req.window,
                sup_deviation: dev,
            })
        }
        Regime::SoftEdge => {
            // the outside of the support maps to ξ > 0
            let sign = match req.side {
                Side::Right => 1.0,
                Side::Left => -1.0,
            };
            // median of the scanned density as the reference level
            let total: f64 = rho.iter().sum();
            let mut cum = 0.0;
            let iq = rho.iter().position(|r| {
                cum += r;
                cum >= 0.5 * total
            });
            let iq = iq.unwrap_or(imax);
            let (b0, a) = match req.side {
                Side::Right => edge_guess(&xs[iq..=iend], &rho[iq..=iend], rho[iq])?,
                Side::Left => {
                    if hard_like {
                        return Err(KernelError::Regime(
                            "left end of the support is a hard edge at 0".into(),
                        ));
                    }
                    edge_guess(&xs[..=iq], &rho[..=iq], rho[iq])?
                }
            };
            // ρ ≈ A√|b−x| matches √(−ξ)/π when n A s^{3/2} = 1/π
            let s0 = (std::f64::consts::PI * nf * a).powf(-2.0 / 3.0);
            let f = |p: [f64; 2]| {
                probe.diag_misfit(|g| p[0] + sign * g * p[1].exp(), p[1].exp(), airy_kernel)
            };
            let p = nelder_mead(f, [b0, s0.ln()], [0.5 * s0, 0.1], 80);
            let (b, s) = (p[0], p[1].exp());
            let dev = probe.sup_deviation(|g| b + sign * g * s, s, airy_kernel)?;
            Ok(ScalingReport {
                regime: req.regime,
                n,
                x_star: b,
                scale: s,
                c: Some(s.powf(-1.5) / nf),
                window: req.window,
                sup_deviation: dev,
            })
        }
    }
}

/// Fits ρ² ≈ A²|b − x| where the density is between 15% and 60% of the
/// reference level; returns (b, A).
fn edge_guess(xs: &[f64], rho: &[f64], level: f64) -> Result<(f64, f64), KernelError> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(rho)
        .filter(|(_, &r)| r > 0.15 * level && r < 0.6 * level)
        .map(|(&x, &r)| (x, r * r))
        .collect();
    if pts.len() < 3 {
        return Err(KernelError::Regime("no square-root edge found".into()));
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in &pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = sxy / sxx;
    let b = mx - my / slope;
    Ok((b, slope.abs().sqrt()))
}
