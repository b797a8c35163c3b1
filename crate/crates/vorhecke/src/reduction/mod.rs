//! Reduction of Hecke-translated relative cycles to homologous Voronoi cycles.
//!
//! Algorithms are registered by name ("1", "2", "ar") as trait objects.

pub mod algorithm1;
pub mod algorithm2;
pub mod ash_rudolph;
pub mod suff_fine;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::chains::{Chain, ChainError, RelativeCycleTag, Term, VoronoiComplex};
use crate::linalg::{self, Int, Rat, RatMatrix};
use crate::model::{self, rank_one_vec, SymForm};
use crate::oracle::OracleError;

/// Default cap on relative barycentric iterations per face.
pub const DEFAULT_MAX_SUBDIV: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("no admissible cusp for ray {0:?}")]
    CuspSelectionFailure(Vec<Int>),
    #[error("could not orient a top cone")]
    OrientationFailure,
    #[error("equivariance check failed: {0} uncancelled faces")]
    EquivarianceViolation(usize),
    #[error("empty witness set for face {0:?}")]
    EmptyWitness(Vec<Vec<Int>>),
    #[error("face {face:?} not sufficiently fine after {cap} subdivisions; {failing} top cones fail")]
    IterationCapExceeded { face: Vec<Vec<Int>>, cap: usize, failing: usize },
    #[error("degenerate term with interior support: {0:?}")]
    DegenerateTerm(Term),
    #[error("algorithm {algorithm} does not support degree {degree} for n = {n}")]
    UnsupportedDegree { algorithm: String, degree: usize, n: usize },
    #[error("term is not cuspidal: {0:?}")]
    NotCuspidal(Term),
    #[error("unknown algorithm {0}")]
    UnknownAlgorithm(String),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionOptions {
    pub max_subdiv: usize,
    /// Build the explicit homotopy witness η where supported.
    pub witness: bool,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        ReductionOptions { max_subdiv: DEFAULT_MAX_SUBDIV, witness: false }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ReductionStats {
    pub terms_in: usize,
    pub terms_out: usize,
    /// Voronoi top cones met (Algorithm 1) or oracle queries (Algorithm 2).
    pub cones_visited: usize,
    /// Per processed face: (number of rays, relative subdivision count i).
    pub subdiv_levels: Vec<(usize, usize)>,
    /// Per input term: max |det| at each recursion level.
    pub det_levels: Vec<Vec<Int>>,
}

#[derive(Debug, Clone)]
pub struct ReductionOutput {
    pub chain: Chain,
    pub stats: ReductionStats,
    /// η with ∂η = ξ − ξ^V + μ, μ supported on rank-deficient cones.
    pub witness: Option<Chain>,
    pub certificates: Vec<suff_fine::SuffFineCertificate>,
}

pub trait ReductionAlgorithm: Send + Sync {
    fn name(&self) -> &'static str;
    fn reduce(
        &self,
        complex: &VoronoiComplex,
        xi: &Chain,
        options: &ReductionOptions,
    ) -> Result<ReductionOutput, ReductionError>;
}

/// Name-keyed registry of reduction algorithms.
#[derive(Clone)]
pub struct Registry {
    algorithms: BTreeMap<String, Arc<dyn ReductionAlgorithm>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry { algorithms: BTreeMap::new() };
        r.register(Arc::new(algorithm1::Algorithm1));
        r.register(Arc::new(algorithm2::Algorithm2));
        r.register(Arc::new(ash_rudolph::AshRudolph));
        r
    }
}

impl Registry {
    pub fn register(&mut self, a: Arc<dyn ReductionAlgorithm>) {
        self.algorithms.insert(a.name().to_string(), a);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ReductionAlgorithm>, ReductionError> {
        self.algorithms.get(name).cloned().ok_or_else(|| ReductionError::UnknownAlgorithm(name.to_string()))
    }

    pub fn names(&self) -> Vec<String> {
        self.algorithms.keys().cloned().collect()
    }
}

/// Verdicts used to certify a reduction's output.
#[derive(Debug, Clone, Serialize)]
pub struct OutputCheck {
    pub relative_cycle: RelativeCycleTag,
    pub all_voronoi: bool,
}

pub fn check_output(complex: &VoronoiComplex, chain: &Chain) -> Result<OutputCheck, ReductionError> {
    Ok(OutputCheck { relative_cycle: complex.is_relative_cycle(chain)?, all_voronoi: complex.is_voronoi_chain(chain) })
}

/// Picks a cusp from `candidates`: the least one after moving the cone on
/// `frame` to its Γ-canonical position, moved back. Boundary frames use the
/// least candidate directly.
pub fn choose_cusp(
    complex: &VoronoiComplex,
    candidates: &BTreeSet<Vec<Int>>,
    frame: &[Vec<Int>],
) -> Result<Vec<Int>, ReductionError> {
    let Some(first) = candidates.iter().next() else {
        return Err(ReductionError::CuspSelectionFailure(frame.first().cloned().unwrap_or_default()));
    };
    if frame.is_empty() {
        return Ok(first.clone());
    }
    match complex.canonical_frame(frame)? {
        None => Ok(first.clone()),
        Some(f) => {
            let best = candidates.iter().map(|c| model::act_cusp(&f.delta, c)).min().expect("nonempty");
            let back = f.delta.inverse().expect("unimodular");
            Ok(model::act_cusp(&back, &best))
        }
    }
}

/// The frame rays of the Voronoi cone spanned by a cusp set.
pub fn cusp_frame(cusps: &BTreeSet<Vec<Int>>) -> Vec<Vec<Int>> {
    cusps.iter().map(|c| rank_one_vec(c)).collect()
}

/// Sign of det of the coordinates of `points` in the basis `rays`.
pub fn orientation(rays: &[Vec<Rat>], points: &[Vec<Rat>]) -> Result<i32, ReductionError> {
    let cols: Vec<Vec<Rat>> = points
        .iter()
        .map(|p| linalg::solve_in_ray_basis(rays, p).map_err(|_| ReductionError::OrientationFailure))
        .collect::<Result<_, _>>()?;
    let det = RatMatrix::from_columns(&cols).det();
    if det.is_positive() {
        Ok(1)
    } else if det.is_negative() {
        Ok(-1)
    } else {
        Err(ReductionError::OrientationFailure)
    }
}

/// Splits a chain into nondegenerate terms, dropping dependent terms that lie
/// in the boundary.
pub fn nondegenerate_terms(chain: &Chain) -> Result<Vec<(Term, Int)>, ReductionError> {
    let mut out = Vec::new();
    for (t, c) in chain.terms() {
        let rs: Vec<Vec<Rat>> = t.iter().map(|r| linalg::to_rat_vec(r)).collect();
        if linalg::rank_of(&rs) < t.len() {
            let sum = crate::chains::ray_sum(t);
            if SymForm::from_int_vec(chain.n(), &sum).is_positive_definite() {
                return Err(ReductionError::DegenerateTerm(t.clone()));
            }
            continue;
        }
        out.push((t.clone(), c.clone()));
    }
    Ok(out)
}

/// a * ξ: prepends the ray `a` to every term.
pub fn cone_over(a: &[Int], chain: &Chain) -> Chain {
    let mut out = Chain::new(chain.n());
    for (t, c) in chain.terms() {
        let mut rays = vec![a.to_vec()];
        rays.extend(t.iter().cloned());
        out.add_rays(rays, c);
    }
    out
}

/// Whether every term of a chain lies in the boundary.
pub fn all_rank_deficient(chain: &Chain) -> bool {
    chain.terms().all(|(t, _)| crate::chains::is_boundary_cone(chain.n(), t))
}
