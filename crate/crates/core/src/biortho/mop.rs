//! Multiple orthogonality residuals of P_j against the weights e^{-nV}h_l
//! (MOP1) and the alternative family w_l (MOP2).

use serde::{Deserialize, Serialize};

use super::bimoments::BimomentSeries;
use super::outer::OuterRule;
use super::system::BiorthSystem;
use super::BiorthError;
use crate::linalg::Mat;
use crate::model::ModelSpec;
use crate::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MopVariant {
    Mop1,
    Mop2,
}

impl MopVariant {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "mop1" => Some(MopVariant::Mop1),
            "mop2" => Some(MopVariant::Mop2),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MopEntry {
    pub j: usize,
    pub l: usize,
    pub k: usize,
    pub value: f64,
    /// ∫ |P_j x^k weight_l| dx
    pub scale: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MopReport {
    pub variant: MopVariant,
    /// max |value| / scale over the index set, 0 when it is empty
    pub max_residual: f64,
    pub entries: Vec<MopEntry>,
}

/// k = 0..=⌊(j-l-1)/(2r+1)⌋, empty when the bound is negative.
pub fn mop_indices(j: usize, l: usize, r: usize) -> std::ops::Range<usize> {
    let num = j as i64 - l as i64 - 1;
    if num < 0 {
        0..0
    } else {
        0..(num as usize / (2 * r + 1) + 1)
    }
}

pub fn check_mop_with<T: Real>(
    sys: &BiorthSystem<T>,
    rule: &OuterRule<T>,
    r: usize,
    variant: MopVariant,
) -> MopReport {
    let mut entries = Vec::new();
    let pv: Vec<Vec<T>> = rule.x.iter().map(|&x| sys.p_all(x)).collect();
    for j in 0..sys.d {
        for l in 0..=2 * r {
            for k in mop_indices(j, l, r) {
                let (mut v, mut s) = (T::zero(), T::zero());
                for i in 0..rule.x.len() {
                    let wt = match variant {
                        MopVariant::Mop2 if l > r => rule.dh[i][l - r - 1],
                        _ => rule.h[i][l],
                    };
                    let t = rule.w[i] * pv[i][j] * rule.x[i].powi(k as i32) * wt;
                    v += t;
                    s += t.abs();
                }
                entries.push(MopEntry {
                    j,
                    l,
                    k,
                    value: v.f64(),
                    scale: s.f64(),
                });
            }
        }
    }
    let max_residual = entries
        .iter()
        .map(|e| e.value.abs() / e.scale)
        .fold(0.0, f64::max);
    MopReport {
        variant,
        max_residual,
        entries,
    }
}

/// Largest k over all MOP index sets for degrees below d.
fn k_max(d: usize, r: usize) -> usize {
    if d < 2 {
        0
    } else {
        (d - 2) / (2 * r + 1)
    }
}

/// Outer rule covering both MOP systems and an independent d×d bimoment
/// matrix for a system of size d.
pub fn verification_rule<T: Real>(spec: &ModelSpec, d: usize) -> Result<OuterRule<T>, BiorthError> {
    let r = spec.r();
    let j_max = d.saturating_sub(1) + k_max(d, r);
    let l_max = (d.saturating_sub(1)).max(2 * r);
    let ser = BimomentSeries::<T>::new(spec, j_max, l_max)?;
    OuterRule::build(spec, &ser, j_max, l_max)
}

/// Bimoments recomputed by the outer x-quadrature.
pub fn quadrature_bimoments<T: Real>(rule: &OuterRule<T>, d: usize) -> Mat<T> {
    Mat::from_fn(d, d, |j, l| rule.moment(j, l))
}

pub fn check_mop<T: Real>(
    spec: &ModelSpec,
    sys: &BiorthSystem<T>,
    variant: MopVariant,
) -> Result<MopReport, BiorthError> {
    let rule = verification_rule::<T>(spec, sys.d)?;
    Ok(check_mop_with(sys, &rule, spec.r(), variant))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biortho::{biorthogonalize, build_bimoments};
    use crate::Quad;

    #[test]
    fn index_sets() {
        assert!(mop_indices(0, 0, 1).is_empty());
        assert_eq!(mop_indices(4, 0, 1), 0..2);
        assert_eq!(mop_indices(4, 2, 1), 0..1);
        assert!(mop_indices(2, 2, 1).is_empty());
    }

    #[test]
    fn both_systems_hold_quadratic() {
        let s = ModelSpec::quadratic(0.5, 0.8, 6, -1.0).unwrap();
        let sys = biorthogonalize(&build_bimoments::<Quad>(&s, 9).unwrap()).unwrap();
        let rule = verification_rule::<Quad>(&s, 9).unwrap();
        let a = check_mop_with(&sys, &rule, 1, MopVariant::Mop1);
        let b = check_mop_with(&sys, &rule, 1, MopVariant::Mop2);
        assert!(a.max_residual < 1e-40, "{}", a.max_residual);
        assert!(b.max_residual < 1e-40, "{}", b.max_residual);
        assert!(a.entries.iter().all(|e| e.j > e.l));
        let m = quadrature_bimoments(&rule, 9);
        assert!(sys.residual(&m) < 1e-40);
    }

    #[test]
    fn fails_for_a_non_orthogonal_polynomial() {
        // P_j replaced by x^j: the relations must visibly break
        let s = ModelSpec::quadratic(0.0, 0.6, 4, 0.0).unwrap();
        let mut sys = biorthogonalize(&build_bimoments::<Quad>(&s, 5).unwrap()).unwrap();
        sys.p = Mat::identity(5);
        let rep = check_mop::<Quad>(&s, &sys, MopVariant::Mop1).unwrap();
        assert!(rep.max_residual > 1e-3);
    }
}
