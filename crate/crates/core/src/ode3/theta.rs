//! θ_j from the branches ξ_j of zξ³ + ατ²ξ − τ⁴ = 0.
//!
//! Parametrizing z by ξ gives ∫ξ dz = (3/2)τ⁴/ξ² − 2ατ²/ξ + const; the
//! constant α²/2 makes the z⁰ term of the large-z expansion equal α²/3.
//! Labels come from tracking the roots along a path from the anchor
//! i·10⁶ inward and then along the circle |ζ| = |z|.

use num_complex::Complex64;

use super::{alpha_of, x_star, y_star, Ode3Error};
use crate::model::ModelSpec;

const ANCHOR: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct ThetaSystem {
    pub alpha: f64,
    pub tau: f64,
    pub x_star: f64,
    pub y_star: f64,
}

pub(crate) fn omega() -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0)
}

impl ThetaSystem {
    pub fn new(spec: &ModelSpec) -> Result<Self, Ode3Error> {
        Ok(Self::from_params(alpha_of(spec)?, spec.tau))
    }

    pub fn from_params(alpha: f64, tau: f64) -> Self {
        ThetaSystem {
            alpha,
            tau,
            x_star: x_star(alpha, tau),
            y_star: y_star(alpha, tau),
        }
    }

    fn newton(&self, z: Complex64, mut xi: Complex64) -> Option<Complex64> {
        let (a, t4) = (self.alpha * self.tau * self.tau, self.tau.powi(4));
        for _ in 0..50 {
            let f = z * xi * xi * xi + a * xi - t4;
            let df = z * xi * xi * 3.0 + a;
            let step = f / df;
            xi -= step;
            if !xi.is_finite() {
                return None;
            }
            if step.norm() <= 1e-15 * xi.norm() {
                return Some(xi);
            }
        }
        None
    }

    fn asymptotic_roots(&self, z: Complex64) -> [Complex64; 3] {
        let w = omega();
        let u = z.powf(-1.0 / 3.0);
        let t43 = self.tau.powf(4.0 / 3.0);
        let t23 = self.tau.powf(2.0 / 3.0);
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (j, o) in out.iter_mut().enumerate() {
            let wj = w.powu(j as u32);
            *o = u * wj * t43 * (Complex64::new(1.0, 0.0) - wj * u * (self.alpha / (3.0 * t23)));
        }
        out
    }

    /// Roots labeled for Im z > 0.
    fn branches_upper(&self, z: Complex64) -> Result<[Complex64; 3], Ode3Error> {
        let r = z.norm();
        let r0 = r.max(ANCHOR);
        let start = Complex64::new(0.0, r0);
        let mut xi = self.asymptotic_roots(start);
        for x in xi.iter_mut() {
            *x = self
                .newton(start, *x)
                .ok_or_else(|| Ode3Error::Branch("anchor polish".into()))?;
        }
        // leg 1: log-radius from r0 down to r on arg π/2; leg 2: angle π/2 → arg z
        let (l0, l1) = (r0.ln(), r.ln());
        let (a0, a1) = (std::f64::consts::FRAC_PI_2, z.arg());
        let path = |s: f64| -> Complex64 {
            if s <= 1.0 {
                Complex64::from_polar((l0 + (l1 - l0) * s).exp(), a0)
            } else {
                Complex64::from_polar(r, a0 + (a1 - a0) * (s - 1.0))
            }
        };
        let mut s = 0.0;
        let mut h: f64 = 0.05;
        while s < 2.0 {
            let stop = if s < 1.0 { 1.0 } else { 2.0 };
            let s1 = (s + h).min(stop);
            let zn = path(s1);
            let sep = (0..3)
                .flat_map(|i| ((i + 1)..3).map(move |k| (i, k)))
                .map(|(i, k)| (xi[i] - xi[k]).norm())
                .fold(f64::INFINITY, f64::min);
            let mut next = xi;
            let mut ok = true;
            for (k, x) in next.iter_mut().enumerate() {
                match self.newton(zn, xi[k]) {
                    Some(v) if (v - xi[k]).norm() < 0.25 * sep => *x = v,
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                xi = next;
                s = s1;
                h = (h * 1.5).min(0.1);
            } else {
                h *= 0.5;
                if h < 1e-13 {
                    return Err(Ode3Error::Branch(format!("step collapse near z = {zn}")));
                }
            }
        }
        Ok(xi)
    }

    /// ξ_1, ξ_2, ξ_3 at z off ℝ; lower half plane by ξ_j(z̄) = conj ξ_j(z).
    pub fn branches(&self, z: Complex64) -> Result<[Complex64; 3], Ode3Error> {
        if z.im == 0.0 {
            return Err(Ode3Error::Branch(format!("z = {z} on the real axis")));
        }
        if z.im > 0.0 {
            self.branches_upper(z)
        } else {
            let u = self.branches_upper(z.conj())?;
            Ok([u[0].conj(), u[1].conj(), u[2].conj()])
        }
    }

    fn from_root(&self, xi: Complex64) -> Complex64 {
        let t2 = self.tau * self.tau;
        (xi * xi).inv() * (1.5 * t2 * t2) - xi.inv() * (2.0 * self.alpha * t2)
            + self.alpha * self.alpha / 2.0
    }

    pub fn theta_all(&self, z: Complex64) -> Result<[Complex64; 3], Ode3Error> {
        let xi = self.branches(z)?;
        Ok([
            self.from_root(xi[0]),
            self.from_root(xi[1]),
            self.from_root(xi[2]),
        ])
    }

    /// θ_j for j ∈ {1, 2, 3}.
    pub fn theta(&self, j: usize, z: Complex64) -> Result<Complex64, Ode3Error> {
        assert!((1..=3).contains(&j), "theta index {j}");
        Ok(self.theta_all(z)?[j - 1])
    }

    /// Leading terms (3/2)ω^{j−1}τ^{4/3}z^{2/3} − αω^{4−j}τ^{2/3}z^{1/3} + α²/3.
    pub fn leading(&self, j: usize, z: Complex64) -> Complex64 {
        if z.im < 0.0 {
            return self.leading(j, z.conj()).conj();
        }
        let (w, a) = (omega(), self.alpha);
        w.powu((j - 1) as u32) * z.powf(2.0 / 3.0) * (1.5 * self.tau.powf(4.0 / 3.0))
            - w.powu((4 - j) as u32) * z.powf(1.0 / 3.0) * (a * self.tau.powf(2.0 / 3.0))
            + a * a / 3.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_is_the_branch() {
        let ts = ThetaSystem::from_params(-0.8, 0.7);
        for z in [
            Complex64::new(1.0, 1.0),
            Complex64::new(-3.0, 0.4),
            Complex64::new(5.0, -0.2),
            Complex64::new(0.1, 2.0),
        ] {
            let xi = ts.branches(z).unwrap();
            let h = 1e-5 * z.norm();
            for j in 1..=3 {
                let d = (ts.theta(j, z + h).unwrap() - ts.theta(j, z - h).unwrap()) / (2.0 * h);
                let d2 = (ts.theta(j, z + Complex64::new(0.0, h)).unwrap()
                    - ts.theta(j, z - Complex64::new(0.0, h)).unwrap())
                    / Complex64::new(0.0, 2.0 * h);
                assert!(
                    (d - xi[j - 1]).norm() < 1e-8 * xi[j - 1].norm().max(1.0),
                    "{z} {j}"
                );
                assert!((d2 - xi[j - 1]).norm() < 1e-8 * xi[j - 1].norm().max(1.0));
            }
        }
    }

    #[test]
    fn alpha_zero_expansion_truncates() {
        let ts = ThetaSystem::from_params(0.0, 0.8);
        for r in [1e2, 1e4, 1e6] {
            let z = Complex64::from_polar(r, std::f64::consts::FRAC_PI_4);
            for j in 1..=3 {
                let d = ts.theta(j, z).unwrap() - ts.leading(j, z);
                assert!(d.norm() < 1e-8 * r.powf(2.0 / 3.0), "{r} {j} {d}");
            }
        }
    }

    #[test]
    fn schwarz_symmetry() {
        let ts = ThetaSystem::from_params(0.6, 1.1);
        for z in [
            Complex64::new(0.3, 0.9),
            Complex64::new(-2.0, 1.5),
            Complex64::new(4.0, 0.01),
        ] {
            for j in 1..=3 {
                let a = ts.theta(j, z.conj()).unwrap();
                let b = ts.theta(j, z).unwrap().conj();
                assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
            }
        }
    }

    #[test]
    fn jumps_beyond_x_star() {
        // θ_{2,+} = θ_{3,−} and θ_{3,+} = θ_{2,−} on (x*, ∞)
        for (alpha, tau) in [(-3.0, 1.0), (-0.5, 0.8), (1.2, 0.6)] {
            let ts = ThetaSystem::from_params(alpha, tau);
            for x in [ts.x_star + 0.5, ts.x_star + 3.0, ts.x_star + 20.0] {
                let up = Complex64::new(x, 1e-11 * x.max(1.0));
                let t_up = ts.theta_all(up).unwrap();
                let t_dn = ts.theta_all(up.conj()).unwrap();
                let scale = t_up[1].norm().max(1.0);
                assert!((t_up[1] - t_dn[2]).norm() < 1e-8 * scale, "{alpha} {x}");
                assert!((t_up[2] - t_dn[1]).norm() < 1e-8 * scale);
            }
        }
    }
}
