use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prelude::*;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("nu must be > -1 (got {0})")]
    Nu(f64),
    #[error("tau must be > 0 (got {0})")]
    Tau(f64),
    #[error("n must be a positive integer")]
    Size,
    #[error("{0} must have degree >= 1 with a strictly positive leading coefficient")]
    Leading(&'static str),
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("linear potentials need tau^2 < c1*c2 (tau^2 = {tau2}, c1*c2 = {prod})")]
    Divergent { tau2: f64, prod: f64 },
    #[error("spec parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("index l={l} outside 0..={max}")]
    Index { l: usize, max: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Moment(#[from] crate::model::moments::MomentError),
    #[error(transparent)]
    Bessel(#[from] crate::specfun::BesselError),
}

/// Polynomial with ascending coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn coef(&self, j: usize) -> f64 {
        self.0.get(j).copied().unwrap_or(0.0)
    }

    pub fn leading(&self) -> f64 {
        *self.0.last().unwrap_or(&0.0)
    }

    pub fn eval<T: Real>(&self, x: T) -> T {
        let mut acc = T::zero();
        for &c in self.0.iter().rev() {
            acc = acc * x + T::lit(c);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| j as f64 * c)
                .collect(),
        )
    }

    /// `Some(c)` if the polynomial is exactly `c x^p`.
    pub fn monomial(&self) -> Option<(f64, usize)> {
        let p = self.degree();
        self.0[..p]
            .iter()
            .all(|&c| c == 0.0)
            .then(|| (self.leading(), p))
    }

    fn trimmed(mut v: Vec<f64>) -> Vec<f64> {
        while v.len() > 1 && *v.last().unwrap() == 0.0 {
            v.pop();
        }
        v
    }
}

/// JSON shape of a model spec.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecInput {
    pub nu: f64,
    pub tau: f64,
    pub n: usize,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    #[serde(rename = "W")]
    pub w: Vec<f64>,
}

/// Validated model parameters. The constant term of `W` is removed on
/// construction and kept in `w_offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub nu: f64,
    pub tau: f64,
    pub n: usize,
    pub v: Poly,
    pub w: Poly,
    pub w_offset: f64,
}

impl Serialize for ModelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_input().serialize(s)
    }
}

impl ModelSpec {
    pub fn new(nu: f64, tau: f64, n: usize, v: Vec<f64>, w: Vec<f64>) -> Result<Self, ModelError> {
        if !(nu > -1.0) || !nu.is_finite() {
            return Err(ModelError::Nu(nu));
        }
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(ModelError::Tau(tau));
        }
        if n == 0 {
            return Err(ModelError::Size);
        }
        for (name, p) in [("V", &v), ("W", &w)] {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(ModelError::NonFinite(name));
            }
        }
        let v = Poly(Poly::trimmed(v));
        let mut w = Poly(Poly::trimmed(w));
        for (name, p) in [("V", &v), ("W", &w)] {
            if p.degree() < 1 || !(p.leading() > 0.0) {
                return Err(ModelError::Leading(name));
            }
        }
        if v.degree() == 1 && w.degree() == 1 {
            let prod = v.coef(1) * w.coef(1);
            if tau * tau >= prod {
                return Err(ModelError::Divergent {
                    tau2: tau * tau,
                    prod,
                });
            }
        }
        let w_offset = w.0[0];
        w.0[0] = 0.0;
        Ok(ModelSpec {
            nu,
            tau,
            n,
            v,
            w,
            w_offset,
        })
    }

    /// `V = c1 x`, `W = c2 y` (plus constants).
    pub fn linear(nu: f64, tau: f64, n: usize, c1: f64, c2: f64) -> Result<Self, ModelError> {
        Self::new(nu, tau, n, vec![0.0, c1], vec![0.0, c2])
    }

    /// `V = x`, `W = y^2/2 + alpha y`.
    pub fn quadratic(nu: f64, tau: f64, n: usize, alpha: f64) -> Result<Self, ModelError> {
        Self::new(nu, tau, n, vec![0.0, 1.0], vec![0.0, alpha, 0.5])
    }

    pub fn from_input(inp: SpecInput) -> Result<Self, ModelError> {
        Self::new(inp.nu, inp.tau, inp.n, inp.v, inp.w)
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let inp: SpecInput =
            serde_json::from_str(s).map_err(|e| ModelError::Parse(e.to_string()))?;
        Self::from_input(inp)
    }

    pub fn from_path(p: &Path) -> Result<Self, ModelError> {
        let s = std::fs::read_to_string(p)
            .map_err(|e| ModelError::Parse(format!("{}: {e}", p.display())))?;
        Self::from_json(&s)
    }

    pub fn to_input(&self) -> SpecInput {
        let mut w = self.w.0.clone();
        w[0] += self.w_offset;
        SpecInput {
            nu: self.nu,
            tau: self.tau,
            n: self.n,
            v: self.v.0.clone(),
            w,
        }
    }

    pub fn with_n(&self, n: usize) -> Self {
        ModelSpec { n, ..self.clone() }
    }

    pub fn r(&self) -> usize {
        self.w.degree() - 1
    }

    /// Bessel argument scale `tau * n`.
    pub fn c(&self) -> f64 {
        self.tau * self.n as f64
    }

    /// `alpha` when `W = y^2/2 + alpha y`.
    pub fn alpha(&self) -> Option<f64> {
        (self.w.degree() == 2 && self.w.coef(2) == 0.5).then(|| self.w.coef(1))
    }

    pub fn is_linear(&self) -> bool {
        self.v.degree() == 1 && self.w.degree() == 1
    }

    pub fn nu_t<T: Real>(&self) -> T {
        T::lit(self.nu)
    }

    pub fn n_t<T: Real>(&self) -> T {
        T::from_usize(self.n).unwrap()
    }

    pub fn c_t<T: Real>(&self) -> T {
        T::lit(self.tau) * self.n_t::<T>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip_and_normalization() {
        let s = r#"{"nu":0.5,"tau":0.8,"n":6,"V":[0,1],"W":[0.3,-1,0.5]}"#;
        let sp = ModelSpec::from_json(s).unwrap();
        assert_eq!(sp.w.0, vec![0.0, -1.0, 0.5]);
        assert_eq!(sp.w_offset, 0.3);
        assert_eq!(sp.alpha(), Some(-1.0));
        assert_eq!(sp.r(), 1);
        assert_eq!(sp.to_input().w, vec![0.3, -1.0, 0.5]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            ModelSpec::quadratic(-1.0, 1.0, 3, 0.0),
            Err(ModelError::Nu(_))
        ));
        assert!(matches!(
            ModelSpec::new(0.0, 1.0, 3, vec![0.0, 1.0], vec![0.0, 0.0, -0.5]),
            Err(ModelError::Leading("W"))
        ));
        assert!(matches!(
            ModelSpec::linear(0.0, 1.0, 3, 1.0, 1.0),
            Err(ModelError::Divergent { .. })
        ));
        assert!(
            ModelSpec::from_json(r#"{"nu":0,"tau":1,"n":2,"V":[0,1],"W":[0,1],"extra":1}"#)
                .is_err()
        );
        assert!(ModelSpec::new(0.0, 0.5, 3, vec![0.0, 1.0], vec![0.0, 1.0, 0.0]).is_ok());
    }

    #[test]
    fn poly_eval() {
        let p = Poly(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0f64), 9.0);
        assert_eq!(p.derivative().0, vec![-2.0, 6.0]);
        assert_eq!(Poly(vec![0.0, 0.0, 2.0]).monomial(), Some((2.0, 2)));
        assert_eq!(p.monomial(), None);
    }
}
