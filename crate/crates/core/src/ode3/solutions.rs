//! p₀, p₁, p₂ and their first three derivatives from convergent series.
//!
//! With f_n(u) = Σ λ_k u^{k+ν}, λ_k = c^{2k+ν}/(k!Γ(k+ν+1)), c = τn:
//!   p₀(z) = z^ν Σ λ_k m_{ν+k} z^k,            m over [0,∞) with W,
//!   p₂(z) = (−z)^ν Σ λ_k m̃_{ν+k} (−z)^k,      m̃ with W̃(s) = W(−s),
//!   −2i sin(νπ) p₁ + p₀ + p₂ = Σ_k c^{2k−ν}/(k!Γ(k−ν+1)) M_k z^k,
//! M_k the full-line moments. Integer ν takes the mean of ν ± 2⁻⁴⁰.
//! Everything runs in Octo and the lost digits are measured per call.

use num_complex::{Complex, Complex64};
use std::sync::OnceLock;

use super::{alpha_of, lift, to_logscaled, Ode3Error};
use crate::model::moments::{ln_moments, series_length};
use crate::model::{ModelSpec, MomentTable, Poly};
use crate::prelude::*;
use crate::specfun::{ln_gamma, rgamma, LogScaledC};
use crate::Octo;

type C<T> = Complex<T>;

const NU_SHIFT: f64 = 1.0 / 1099511627776.0;

/// m_s for W = y²/2 + αy from the expansion of e^{−nαy}:
/// Σ_k (−nα)^k/k! · ½Γ((s+k+1)/2)(2/n)^{(s+k+1)/2}. None when the
/// alternating sum would eat more than half the digits.
fn alpha_series_moment<T: Real>(alpha: f64, n: usize, s: T) -> Option<T> {
    let nt = T::from_usize(n).unwrap();
    let a = T::lit(alpha);
    let half = T::lit(0.5);
    let two_n = T::int(2) / nt;
    let seed = |k: usize| -> T {
        let e = (s + T::from_usize(k + 1).unwrap()) * half;
        half * (ln_gamma(e) + e * two_n.ln()).exp()
    };
    let mut t = [seed(0), -nt * a * seed(1)];
    let mut sum = t[0] + t[1];
    let mut peak = t[0].abs().max(t[1].abs());
    let tol = T::epsilon() * T::lit(1e-6);
    let ratio = |k: usize| {
        nt * a * a * (s + T::from_usize(k + 1).unwrap()) / T::from_usize((k + 1) * (k + 2)).unwrap()
    };
    let mut k = 0;
    loop {
        let nk = t[k % 2] * ratio(k);
        t[k % 2] = nk;
        sum += nk;
        peak = peak.max(nk.abs());
        k += 1;
        if k > 20 && t[0].abs().max(t[1].abs()) < tol * peak {
            break;
        }
        if k > 100_000 {
            return None;
        }
    }
    let lost = (peak / sum.abs()).log10().f64();
    (sum > T::zero() && lost < T::DIGITS as f64 / 2.0).then_some(sum)
}

fn anchor_pair<T: Real>(alpha: f64, n: usize, s0: f64, start: usize) -> Result<[T; 2], Ode3Error> {
    let s = T::lit(s0) + T::from_usize(start).unwrap();
    if let (Some(a), Some(b)) = (
        alpha_series_moment(alpha, n, s),
        alpha_series_moment(alpha, n, s + T::one()),
    ) {
        return Ok([a, b]);
    }
    let w = Poly(vec![0.0, alpha, 0.5]);
    let t = MomentTable::<T>::build_from(&w, n, s0, start, 1)?;
    Ok([t.values[0], t.values[1]])
}

/// m_{s0+k}, k < count, for W = y²/2 + αy from the three-term relation
/// (s+1) m_s = n (m_{s+2} + α m_{s+1}), run in its stable direction.
pub(crate) fn quadratic_moments<T: Real>(
    alpha: f64,
    n: usize,
    s0: f64,
    count: usize,
) -> Result<Vec<T>, Ode3Error> {
    let nt = T::from_usize(n).unwrap();
    let a = T::lit(alpha);
    let s = |k: usize| T::lit(s0) + T::from_usize(k + 1).unwrap();
    let mut m = vec![T::zero(); count + 2];
    if alpha <= 0.0 {
        [m[0], m[1]] = anchor_pair(alpha, n, s0, 0)?;
        for k in 0..count {
            m[k + 2] = s(k) / nt * m[k] - a * m[k + 1];
        }
    } else {
        [m[count], m[count + 1]] = anchor_pair(alpha, n, s0, count)?;
        for k in (0..count).rev() {
            m[k] = nt * (m[k + 2] + a * m[k + 1]) / s(k);
        }
    }
    m.truncate(count);
    Ok(m)
}

/// Coefficient tables at one order ν.
struct Branch<T> {
    nu: T,
    /// λ_k m_{ν+k}
    a: Vec<T>,
    /// λ_k m̃_{ν+k}
    b: Vec<T>,
    /// c^{2k−ν} M_k/(k!Γ(k−ν+1)), absent for integer ν
    e: Option<Vec<T>>,
}

fn lambdas<T: Real>(ct: T, nu: f64, count: usize) -> Vec<T> {
    let nut = T::lit(nu);
    let mut l = ct.powf(nut) * rgamma(nut + T::one());
    (0..count)
        .map(|k| {
            let v = l;
            let kk = T::from_usize(k + 1).unwrap();
            l = l * ct * ct / (kk * (kk + nut));
            v
        })
        .collect()
}

impl<T: Real> Branch<T> {
    fn build(
        alpha: f64,
        n: usize,
        tau: f64,
        nu: f64,
        count: usize,
        with_e: bool,
    ) -> Result<Self, Ode3Error> {
        let ct = T::lit(tau) * T::from_usize(n).unwrap();
        let lam = lambdas::<T>(ct, nu, count);
        let mw = quadratic_moments::<T>(alpha, n, nu, count)?;
        let mt = quadratic_moments::<T>(-alpha, n, nu, count)?;
        let a = lam.iter().zip(&mw).map(|(l, m)| *l * *m).collect();
        let b = lam.iter().zip(&mt).map(|(l, m)| *l * *m).collect();
        let e = if with_e {
            let iw = quadratic_moments::<T>(alpha, n, 0.0, count)?;
            let it = quadratic_moments::<T>(-alpha, n, 0.0, count)?;
            let nut = T::lit(nu);
            let mut g = ct.powf(-nut) * rgamma(T::one() - nut);
            let mut e = Vec::with_capacity(count);
            for k in 0..count {
                let full = if k % 2 == 0 {
                    iw[k] + it[k]
                } else {
                    iw[k] - it[k]
                };
                e.push(g * full);
                let kk = T::from_usize(k + 1).unwrap();
                g = g * ct * ct / (kk * (kk - nut));
            }
            Some(e)
        } else {
            None
        };
        Ok(Branch {
            nu: T::lit(nu),
            a,
            b,
            e,
        })
    }
}

/// Σ_k coef_k z^{k+off} and its first three derivatives, with the sum of
/// term magnitudes for each.
fn power_series<T: Real>(coef: &[T], off: T, z: C<T>) -> Result<([C<T>; 4], [T; 4]), Ode3Error> {
    let zero = C::new(T::zero(), T::zero());
    let mut s = [zero; 4];
    let mut a = [T::zero(); 4];
    let mut zk = C::new(T::one(), T::zero());
    let mut peak = T::zero();
    let tiny = T::epsilon() * T::lit(1e-6);
    let mut done = false;
    // odd coefficients vanish for symmetric W, so wait for a run of small terms
    let mut quiet = 0;
    for (k, &ck) in coef.iter().enumerate() {
        let t = zk * ck;
        let tn = t.norm();
        let x = T::from_usize(k).unwrap() + off;
        let mut ff = T::one();
        for m in 0..4 {
            let v = t * ff;
            s[m] = s[m] + v;
            a[m] += v.norm();
            ff *= x - T::from_usize(m).unwrap();
        }
        peak = peak.max(tn);
        zk = zk * z;
        if k > 4 && tn <= tiny * peak && T::from_usize(k).unwrap() > off.abs() {
            quiet += 1;
            if quiet == 3 {
                done = true;
                break;
            }
        } else {
            quiet = 0;
        }
    }
    if !done {
        return Err(Ode3Error::Range {
            r: z.norm().f64(),
            max: f64::NAN,
        });
    }
    // z^{off−m}
    let lz = z.ln();
    let mut out = [zero; 4];
    let mut abs = [T::zero(); 4];
    for m in 0..4 {
        let p = (lz * (off - T::from_usize(m).unwrap())).exp();
        out[m] = s[m] * p;
        abs[m] = a[m] * p.norm();
    }
    Ok((out, abs))
}

struct Values<T> {
    d: [C<T>; 4],
    /// magnitude sums backing each entry
    abs: [T; 4],
}

impl<T: Real> Branch<T> {
    fn p0(&self, z: C<T>) -> Result<Values<T>, Ode3Error> {
        let (d, abs) = power_series(&self.a, self.nu, z)?;
        Ok(Values { d, abs })
    }

    fn p2(&self, z: C<T>) -> Result<Values<T>, Ode3Error> {
        let (mut d, abs) = power_series(&self.b, self.nu, -z)?;
        d[1] = -d[1];
        d[3] = -d[3];
        Ok(Values { d, abs })
    }

    fn p1(&self, z: C<T>) -> Result<Values<T>, Ode3Error> {
        let e = self.e.as_ref().expect("non-integer order");
        let (ev, ea) = power_series(e, T::zero(), z)?;
        let a = self.p0(z)?;
        let b = self.p2(z)?;
        let pi = T::PI();
        // p₁ = i/(2 sin νπ) (E − p₀ − p₂)
        let f = C::new(T::zero(), (T::int(2) * (self.nu * pi).sin()).recip());
        let mut d = [C::new(T::zero(), T::zero()); 4];
        let mut abs = [T::zero(); 4];
        for m in 0..4 {
            d[m] = (ev[m] - a.d[m] - b.d[m]) * f;
            abs[m] = (ea[m] + a.abs[m] + b.abs[m]) * f.norm();
        }
        Ok(Values { d, abs })
    }
}

/// The three solutions of the third-order ODE for one spec.
pub struct SolutionTriple {
    pub spec: ModelSpec,
    pub alpha: f64,
    /// |z| up to which the coefficient tables are long enough
    pub radius: f64,
    count: usize,
    tables: OnceLock<Result<Tables, String>>,
}

struct Tables {
    main: Branch<Octo>,
    /// ν ± 2⁻⁴⁰ for integer ν
    pair: Option<[Branch<Octo>; 2]>,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct WronskianSample {
    pub z: [f64; 2],
    /// det W_n(z) z^{2−2ν}
    pub scaled_det: [f64; 2],
    /// z (log det)'
    pub log_derivative: [f64; 2],
    /// smallest singular-value ratio proxy: |det| / Π column norms
    pub independence: f64,
}

impl SolutionTriple {
    pub fn new(spec: &ModelSpec) -> Result<Self, Ode3Error> {
        Self::with_radius(spec, 50.0)
    }

    pub fn with_radius(spec: &ModelSpec, radius: f64) -> Result<Self, Ode3Error> {
        let alpha = alpha_of(spec)?;
        let drop = Octo::DIGITS as f64 * std::f64::consts::LN_10 + 40.0;
        let mut count = 16;
        for (a, nu) in [
            (alpha, spec.nu),
            (-alpha, spec.nu),
            (alpha, 0.0),
            (-alpha, 0.0),
        ] {
            let w = Poly(vec![0.0, a, 0.5]);
            let mut j = 128;
            let len = loop {
                let lnm = ln_moments(&w, spec.n, nu, j);
                if let Some(l) = series_length(
                    spec.c(),
                    spec.nu.abs(),
                    radius.ln(),
                    |k| lnm.get(k).copied(),
                    drop,
                ) {
                    break l;
                }
                j *= 2;
            };
            count = count.max(len + len / 8 + 16);
        }
        Ok(SolutionTriple {
            spec: spec.clone(),
            alpha,
            radius,
            count,
            tables: OnceLock::new(),
        })
    }

    fn is_integer_order(&self) -> bool {
        self.spec.nu == self.spec.nu.round()
    }

    fn tables(&self) -> Result<&Tables, Ode3Error> {
        let t = self.tables.get_or_init(|| {
            let (a, n, c, nu, k) = (
                self.alpha,
                self.spec.n,
                self.spec.tau,
                self.spec.nu,
                self.count,
            );
            let build = || -> Result<Tables, Ode3Error> {
                if self.is_integer_order() {
                    let main = Branch::build(a, n, c, nu, k, false)?;
                    let lo = Branch::build(a, n, c, nu - NU_SHIFT, k, true)?;
                    let hi = Branch::build(a, n, c, nu + NU_SHIFT, k, true)?;
                    Ok(Tables {
                        main,
                        pair: Some([lo, hi]),
                    })
                } else {
                    Ok(Tables {
                        main: Branch::build(a, n, c, nu, k, true)?,
                        pair: None,
                    })
                }
            };
            build().map_err(|e| e.to_string())
        });
        t.as_ref().map_err(|e| Ode3Error::Contour(e.clone()))
    }

    fn check_point(&self, j: usize, z: C<Octo>) -> Result<(), Ode3Error> {
        let zf = Complex64::new(z.re.f64(), z.im.f64());
        let r = zf.norm();
        if r > self.radius {
            return Err(Ode3Error::Range {
                r,
                max: self.radius,
            });
        }
        let zero = Octo::zero();
        let cut = match j {
            0 => z.im == zero && z.re <= zero,
            1 => z.im == zero,
            2 => z.im == zero && z.re >= zero,
            _ => panic!("solution index {j}"),
        };
        if cut {
            return Err(Ode3Error::Cut { j, z: zf });
        }
        Ok(())
    }

    fn values(&self, j: usize, z: C<Octo>) -> Result<[C<Octo>; 4], Ode3Error> {
        self.check_point(j, z)?;
        let t = self.tables()?;
        let v = match (j, &t.pair) {
            (0, _) => t.main.p0(z)?,
            (2, _) => t.main.p2(z)?,
            (1, None) => t.main.p1(z)?,
            (1, Some([lo, hi])) => {
                let (a, b) = (lo.p1(z)?, hi.p1(z)?);
                let h = Octo::lit(0.5);
                let mut d = a.d;
                let mut abs = a.abs;
                for m in 0..4 {
                    d[m] = (a.d[m] + b.d[m]) * h;
                    abs[m] = (a.abs[m] + b.abs[m]) * h;
                }
                Values { d, abs }
            }
            _ => unreachable!(),
        };
        let digits = Octo::DIGITS;
        for m in 0..4 {
            let norm = v.d[m].norm();
            if norm == Octo::zero() {
                continue;
            }
            let lost = (v.abs[m] / norm).log10().f64();
            let left = digits as f64 - lost;
            if left < 20.0 {
                return Err(Ode3Error::Precision { left, digits });
            }
        }
        Ok(v.d)
    }

    /// p_j^{(m)}(z), m = 0..=3, in working precision.
    pub fn derivs_exact(&self, j: usize, z: C<Octo>) -> Result<[C<Octo>; 4], Ode3Error> {
        self.values(j, z)
    }

    pub fn derivs(&self, j: usize, z: Complex64) -> Result<[LogScaledC; 4], Ode3Error> {
        let v = self.values(j, lift(z))?;
        Ok(v.map(to_logscaled))
    }

    pub fn eval_p(&self, j: usize, z: Complex64) -> Result<LogScaledC, Ode3Error> {
        Ok(self.derivs(j, z)?[0])
    }

    /// Boundary value on the real axis from above (`upper`) or below.
    pub fn boundary(&self, j: usize, x: f64, upper: bool) -> Result<[C<Octo>; 4], Ode3Error> {
        let eps = Octo::lit(x.abs().max(1.0)) * Octo::lit(1e-60);
        let z = C::new(Octo::lit(x), if upper { eps } else { -eps });
        self.values(j, z)
    }

    /// Residual of the ODE for p_j at z.
    pub fn residual(&self, j: usize, z: Complex64) -> Result<f64, Ode3Error> {
        let zt = lift::<Octo>(z);
        super::ode_residual(&self.spec, zt, &self.values(j, zt)?)
    }

    fn wronskian_rows(&self, z: C<Octo>) -> Result<[[C<Octo>; 4]; 3], Ode3Error> {
        Ok([self.values(0, z)?, self.values(1, z)?, self.values(2, z)?])
    }

    /// det W_n(z) with the third column scaled by e^{±νπi}, ± = sign Im z.
    pub fn wronskian_det(&self, z: Complex64) -> Result<WronskianSample, Ode3Error> {
        let zt = lift::<Octo>(z);
        if z.im == 0.0 {
            return Err(Ode3Error::Cut { j: 1, z });
        }
        let p = self.wronskian_rows(zt)?;
        let det3 = |r0: usize, r1: usize, r2: usize| -> C<Octo> {
            let m = |i: usize, j: usize| p[j][[r0, r1, r2][i]];
            m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
        };
        let pi = Octo::PI();
        let nu: Octo = self.spec.nu_t();
        let sgn = if z.im > 0.0 {
            Octo::one()
        } else {
            -Octo::one()
        };
        let ph = C::new(Octo::zero(), sgn * nu * pi).exp();
        let det = det3(0, 1, 2) * ph;
        let ddet = det3(0, 1, 3) * ph;
        let scaled = det * (zt.ln() * (Octo::int(2) - Octo::int(2) * nu)).exp();
        let colnorm = |j: usize| {
            (0..3)
                .map(|r| p[j][r].norm_sqr())
                .fold(Octo::zero(), |a, b| a + b)
                .sqrt()
        };
        let independence = (det.norm() / (colnorm(0) * colnorm(1) * colnorm(2))).f64();
        let ld = zt * ddet / det;
        Ok(WronskianSample {
            z: [z.re, z.im],
            scaled_det: [scaled.re.f64(), scaled.im.f64()],
            log_derivative: [ld.re.f64(), ld.im.f64()],
            independence,
        })
    }
}

/// max |K_i − K̄| / |K̄| over samples.
pub fn relative_spread(samples: &[WronskianSample]) -> f64 {
    let k: Vec<Complex64> = samples
        .iter()
        .map(|s| Complex64::new(s.scaled_det[0], s.scaled_det[1]))
        .collect();
    let mean = k.iter().sum::<Complex64>() / k.len() as f64;
    k.iter()
        .map(|v| (v - mean).norm() / mean.norm())
        .fold(0.0, f64::max)
}
