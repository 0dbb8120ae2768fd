//! End-to-end verification of one biorthogonal system: conditioning,
//! biorthogonality against quadrature bimoments, and both MOP systems.

use serde::Serialize;

use super::{
    biorthogonalize, build_bimoments, check_mop_with, quadrature_bimoments, verification_rule,
    MopVariant,
};
use super::{BiorthError, SystemReport};
use crate::model::ModelSpec;
use crate::prelude::*;
use crate::{Ext, Octo, Precision, Quad};

#[derive(Clone, Debug, Serialize)]
pub struct BiorthReport {
    pub spec: ModelSpec,
    pub degree: usize,
    pub precision: Precision,
    pub log10_cond: f64,
    /// max off-diagonal |P M Q^T| / min κ with M from the outer quadrature
    pub off_diagonal: f64,
    pub diagonal_mismatch: f64,
    pub mop1: f64,
    pub mop2: f64,
    pub system: SystemReport,
}

fn run<T: Real>(
    spec: &ModelSpec,
    d: usize,
    precision: Precision,
) -> Result<BiorthReport, BiorthError> {
    let bm = build_bimoments::<T>(spec, d)?;
    let sys = biorthogonalize(&bm)?;
    let rule = verification_rule::<T>(spec, d)?;
    let mq = quadrature_bimoments(&rule, d);
    let r = spec.r();
    Ok(BiorthReport {
        spec: spec.clone(),
        degree: d,
        precision,
        log10_cond: bm.log10_cond,
        off_diagonal: sys.residual(&mq),
        diagonal_mismatch: sys.diagonal_mismatch(&mq),
        mop1: check_mop_with(&sys, &rule, r, MopVariant::Mop1).max_residual,
        mop2: check_mop_with(&sys, &rule, r, MopVariant::Mop2).max_residual,
        system: sys.to_report(),
    })
}

/// Runs at `precision`, or escalates Extended → Quad → Octo on a
/// conditioning alarm when none is given.
pub fn verify(
    spec: &ModelSpec,
    d: usize,
    precision: Option<Precision>,
) -> Result<BiorthReport, BiorthError> {
    let one = |p: Precision| match p {
        Precision::Double => run::<f64>(spec, d, p),
        Precision::Extended => run::<Ext>(spec, d, p),
        Precision::Quad => run::<Quad>(spec, d, p),
        Precision::Octo => run::<Octo>(spec, d, p),
    };
    if let Some(p) = precision {
        return one(p);
    }
    let mut last = None;
    for p in [Precision::Extended, Precision::Quad, Precision::Octo] {
        match one(p) {
            Err(e @ BiorthError::Conditioning { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_system_verifies() {
        let s = ModelSpec::quadratic(0.5, 0.8, 3, -0.5).unwrap();
        let r = verify(&s, 6, None).unwrap();
        assert!(
            r.off_diagonal < 1e-20 && r.mop1 < 1e-20 && r.mop2 < 1e-20,
            "{r:?}"
        );
        assert_eq!(r.system.p.len(), 6);
    }
}
