//! The sufficiently-fine test: a simplicial cone τ passes when
//! S(β_τ) ∩ ⋂_{ρ ∈ τ(1)} S(ρ) is nonempty, β_τ its unit-sum barycenter.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::cones::{average, Fan};
use crate::linalg::{primitive, Int, Rat};
use crate::oracle::{Oracle, OracleError};

/// A top cone's primitive rays with its witness set.
pub type CertifiedCone = (Vec<Vec<Int>>, BTreeSet<Vec<Int>>);

#[derive(Debug, Clone, Default, Serialize)]
pub struct SuffFineCertificate {
    /// Per top cone: its primitive rays and the witness set S(τ).
    pub cones: Vec<CertifiedCone>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FinenessReport {
    pub certificate: SuffFineCertificate,
    /// Rays of the top cones with empty witness set.
    pub failing: Vec<Vec<Vec<Int>>>,
}

impl FinenessReport {
    pub fn passes(&self) -> bool {
        self.failing.is_empty()
    }
}

/// S(τ) for the simplicial cone realized by `points`.
pub fn witness_set(oracle: &Oracle, points: &[Vec<Rat>]) -> Result<BTreeSet<Vec<Int>>, OracleError> {
    let mut s = oracle.reduce_vec(&average(points))?.cusps;
    for p in points {
        let sp = oracle.reduce_vec(p)?.cusps;
        s.retain(|c| sp.contains(c));
        if s.is_empty() {
            break;
        }
    }
    Ok(s)
}

/// Tests every maximal cone of a fan realized in the vec space.
pub fn check_sufficiently_fine(oracle: &Oracle, fan: &Fan) -> Result<FinenessReport, OracleError> {
    let mut report = FinenessReport::default();
    for cone in fan.cones() {
        let pts = fan.cone_generators(cone);
        let rays: Vec<Vec<Int>> = pts.iter().map(|p| primitive(p)).collect();
        let s = witness_set(oracle, &pts)?;
        if s.is_empty() {
            report.failing.push(rays);
        } else {
            report.certificate.cones.push((rays, s));
        }
    }
    Ok(report)
}
