//! q_j(z) = ∫_{Γ_j} t^{ν−3} e^{1/(2t²) − α/t + zt} dt for τ = n = 1.
//!
//! Γ₁ and Γ₂ are closed loops through 0 in the right and left half planes,
//! entering and leaving 0 along the imaginary axis where e^{1/(2t²)} is
//! flat. Γ₃ (Γ₄) runs from ∞ in the upper (lower) half plane to 0 along a
//! ray chosen so that Re(zt) → −∞, joined to 0 by an imaginary-axis leg.
//! Branches of t^{ν−3}: arg t in (−π/2, π/2), (π/2, 3π/2), (0, π), (−π, 0).

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use super::{alpha_of, Ode3Error};
use crate::model::ModelSpec;
use crate::specfun::quad::gauss_legendre;

#[derive(Clone, Debug)]
pub struct QFunctions {
    pub nu: f64,
    pub alpha: f64,
    nodes: (Vec<f64>, Vec<f64>),
}

enum Piece {
    Segment(Complex64, Complex64),
    /// start + u·dir for u ≥ 0
    Ray(Complex64, Complex64),
}

impl QFunctions {
    pub fn new(nu: f64, alpha: f64) -> Self {
        QFunctions {
            nu,
            alpha,
            nodes: gauss_legendre::<f64>(24),
        }
    }

    /// Needs τ = n = 1; other specs reach these through the rescaling.
    pub fn from_spec(spec: &ModelSpec) -> Result<Self, Ode3Error> {
        if spec.tau != 1.0 || spec.n != 1 {
            return Err(Ode3Error::Contour("q_j are defined for tau = n = 1".into()));
        }
        Ok(Self::new(spec.nu, alpha_of(spec)?))
    }

    fn arg_in(&self, j: usize, t: Complex64) -> f64 {
        let a = t.im.atan2(t.re);
        match j {
            1 => a,
            2 => {
                if a < FRAC_PI_2 - 1e-12 {
                    a + 2.0 * PI
                } else {
                    a
                }
            }
            3 => {
                if a < 0.0 {
                    a + 2.0 * PI
                } else {
                    a
                }
            }
            _ => {
                if a > 0.0 {
                    a - 2.0 * PI
                } else {
                    a
                }
            }
        }
    }

    fn integrand(&self, j: usize, z: Complex64, power: f64, t: Complex64) -> Complex64 {
        let lt = Complex64::new(t.norm().ln(), self.arg_in(j, t));
        let ex = (t * t).inv() * 0.5 - t.inv() * self.alpha + z * t + lt * power;
        ex.exp()
    }

    /// ∫ over one piece with `panels` Gauss–Legendre panels; returns the
    /// integral and ∫|f||dt|.
    fn piece(
        &self,
        j: usize,
        z: Complex64,
        power: f64,
        p: &Piece,
        panels: usize,
    ) -> (Complex64, f64) {
        let (x, w) = &self.nodes;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        match *p {
            Piece::Segment(a, b) => {
                let d = b - a;
                for k in 0..panels {
                    let (u0, u1) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
                    let h = 0.5 * (u1 - u0);
                    for (xi, wi) in x.iter().zip(w) {
                        let t = a + d * (u0 + h * (xi + 1.0));
                        let f = self.integrand(j, z, power, t) * d * (h * wi);
                        acc += f;
                        mag += f.norm();
                    }
                }
            }
            Piece::Ray(a, dir) => {
                // panels of growing width until the exponential decay has
                // taken 60 nepers off the largest value seen
                let rate = -(z * dir).re;
                let base = (1.0 / rate.max(1e-3)).min(1.0) / (panels as f64 / 8.0);
                let mut u0 = 0.0;
                let mut width = base;
                let mut peak: f64 = 0.0;
                for _ in 0..4000 {
                    let u1 = u0 + width;
                    let h = 0.5 * width;
                    let mut last: f64 = 0.0;
                    for (xi, wi) in x.iter().zip(w) {
                        let t = a + dir * (u0 + h * (xi + 1.0));
                        let f = self.integrand(j, z, power, t) * dir * (h * wi);
                        acc += f;
                        mag += f.norm();
                        last = f.norm() / (h * wi);
                        peak = peak.max(last);
                    }
                    u0 = u1;
                    if last < 1e-27 * peak && u0 * rate > 60.0 {
                        break;
                    }
                    width = (width * 1.25).min(base * 16.0);
                }
            }
        }
        (acc, mag)
    }

    fn pieces(&self, j: usize, z: Complex64, scale: f64) -> Result<Vec<Piece>, Ode3Error> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let r = scale;
        Ok(match j {
            1 => vec![
                Piece::Segment(c(0.0, 0.0), c(0.0, -r)),
                Piece::Segment(c(0.0, -r), c(r, -r)),
                Piece::Segment(c(r, -r), c(r, r)),
                Piece::Segment(c(r, r), c(0.0, r)),
                Piece::Segment(c(0.0, r), c(0.0, 0.0)),
            ],
            2 => vec![
                Piece::Segment(c(0.0, 0.0), c(0.0, -r)),
                Piece::Segment(c(0.0, -r), c(-r, -r)),
                Piece::Segment(c(-r, -r), c(-r, r)),
                Piece::Segment(c(-r, r), c(0.0, r)),
                Piece::Segment(c(0.0, r), c(0.0, 0.0)),
            ],
            3 | 4 => {
                let up = if j == 3 { 1.0 } else { -1.0 };
                let psi = self.ray_angle(j, z)?;
                let start = c(0.0, up * r);
                // orientation ∞ → 0: reversed pieces, negated later
                vec![
                    Piece::Segment(c(0.0, 0.0), start),
                    Piece::Ray(start, Complex64::from_polar(1.0, psi)),
                ]
            }
            _ => panic!("q index {j}"),
        })
    }

    /// Direction ψ of the infinite leg: in (0, π) for Γ₃ and (−π, 0) for Γ₄,
    /// with cos(arg z + ψ) < 0, centered in the admissible window.
    fn ray_angle(&self, j: usize, z: Complex64) -> Result<f64, Ode3Error> {
        let th = z.arg();
        let (lo, hi) = if j == 3 { (0.0, PI) } else { (-PI, 0.0) };
        let mut best: Option<(f64, f64)> = None;
        for k in -2..=2 {
            let shift = 2.0 * PI * k as f64;
            let a = (FRAC_PI_2 - th + shift).max(lo);
            let b = (1.5 * PI - th + shift).min(hi);
            if b > a && best.is_none_or(|(x, y)| b - a > y - x) {
                best = Some((a, b));
            }
        }
        match best {
            Some((a, b)) if b - a > 1e-3 => Ok(0.5 * (a + b)),
            _ => Err(Ode3Error::Contour(format!(
                "no admissible direction for Gamma_{j} at z = {z}"
            ))),
        }
    }

    fn integrate(
        &self,
        j: usize,
        z: Complex64,
        power: f64,
        scale: f64,
    ) -> Result<(Complex64, f64), Ode3Error> {
        let pieces = self.pieces(j, z, scale)?;
        let sign = if j >= 3 { -1.0 } else { 1.0 };
        let mut panels = 4;
        let mut prev: Option<Complex64> = None;
        loop {
            let (mut v, mut m) = (Complex64::new(0.0, 0.0), 0.0);
            for p in &pieces {
                let (a, b) = self.piece(j, z, power, p, panels);
                v += a;
                m += b;
            }
            v *= sign;
            if let Some(pv) = prev {
                if (v - pv).norm() <= 1e-13 * m.max(v.norm()) {
                    return Ok((v, m));
                }
            }
            prev = Some(v);
            panels *= 2;
            if panels > 1024 {
                return Err(Ode3Error::Contour(format!(
                    "Gamma_{j} at z = {z} did not settle"
                )));
            }
        }
    }

    /// d^m q_j/dz^m = ∫ t^{ν−3+m} e^{…} dt.
    pub fn q(&self, j: usize, z: Complex64, deriv: usize) -> Result<Complex64, Ode3Error> {
        let power = self.nu - 3.0 + deriv as f64;
        let base = (1.0 + z.norm()).powf(-1.0 / 3.0);
        let mut best: Option<(Complex64, f64)> = None;
        for f in [0.5, 1.0, 2.0] {
            let (v, m) = self.integrate(j, z, power, f * base)?;
            let ratio = m / v.norm();
            if best.is_none_or(|(bv, bm)| ratio < bm / bv.norm()) {
                best = Some((v, m));
            }
        }
        let (v, m) = best.unwrap();
        if m / v.norm() > 1e6 {
            return Err(Ode3Error::Contour(format!(
                "cancellation {:.1e} for q_{j} at z = {z}",
                m / v.norm()
            )));
        }
        Ok(v)
    }
}
