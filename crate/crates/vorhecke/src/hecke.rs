//! Hecke operators T(p) acting on relative cycles and on homology.

use serde::Serialize;
use thiserror::Error;

use crate::chains::{Chain, ChainError, HomologyPresentation, VoronoiComplex};
use crate::linalg::{hnf, int, Int, IntMatrix, Rat, RatMatrix};
use crate::model::ArithmeticGroup;
use crate::reduction::{ReductionAlgorithm, ReductionError, ReductionOptions, ReductionStats};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HeckeError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("reduced image of basis cycle {0} is not a relative cycle")]
    NotRelativeCycle(usize),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Γ g Γ = ⊔ Γ s for g = diag(1, …, 1, p); for p | N only the cosets with
/// leading entry 1.
#[derive(Debug, Clone, Serialize)]
pub struct HeckeOperator {
    pub n: usize,
    pub p: u64,
    pub level: u64,
    pub cosets: Vec<IntMatrix>,
}

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Upper triangular Hermite representatives of determinant p.
pub fn coset_decomposition(group: &ArithmeticGroup, p: u64) -> Result<HeckeOperator, HeckeError> {
    if !is_prime(p) {
        return Err(HeckeError::NotPrime(p));
    }
    let n = group.n;
    let divides = group.level.is_multiple_of(p);
    let mut cosets = Vec::new();
    for k in 0..n {
        if divides && k == 0 {
            continue;
        }
        // column k carries the pivot p; entries above it range over Z/p
        let total = p.pow(k as u32);
        for code in 0..total {
            let mut m = IntMatrix::identity(n);
            m.set(k, k, int(p as i64));
            let mut c = code;
            for i in 0..k {
                m.set(i, k, int((c % p) as i64));
                c /= p;
            }
            cosets.push(m);
        }
    }
    cosets.sort();
    Ok(HeckeOperator { n, p, level: group.level, cosets })
}

impl HeckeOperator {
    pub fn group(&self) -> ArithmeticGroup {
        ArithmeticGroup { n: self.n, level: self.level }
    }

    /// Index of the coset Γ·m, checking that m·s⁻¹ lies in Γ.
    pub fn coset_of(&self, m: &IntMatrix) -> Option<usize> {
        let (h, _) = hnf(m);
        let i = self.cosets.iter().position(|s| *s == h)?;
        let q = m.to_rat().mul(&h.to_rat().inverse()?).to_int()?;
        self.group().contains(&q).then_some(i)
    }

    /// T(ξ) = Σ_s s·ξ.
    pub fn image(&self, xi: &Chain) -> Chain {
        let mut out = Chain::new(xi.n());
        for s in &self.cosets {
            out.add(&xi.act(s));
        }
        out
    }
}

pub fn hecke_image(op: &HeckeOperator, xi: &Chain) -> Chain {
    op.image(xi)
}

#[derive(Debug, Clone, Serialize)]
pub struct HeckeMatrix {
    pub p: u64,
    pub degree: usize,
    /// Column i is the image of basis class i.
    pub matrix: RatMatrix,
    /// Coefficients, constant term first.
    pub charpoly: Vec<Rat>,
    pub stats: Vec<ReductionStats>,
}

/// The matrix of T(p) on a homology presentation, reducing each image with
/// the given algorithm.
pub fn hecke_matrix(
    complex: &VoronoiComplex,
    op: &HeckeOperator,
    presentation: &HomologyPresentation,
    algorithm: &dyn ReductionAlgorithm,
    options: &ReductionOptions,
) -> Result<HeckeMatrix, HeckeError> {
    let r = presentation.rank;
    let mut cols = Vec::with_capacity(r);
    let mut stats = Vec::with_capacity(r);
    for i in 0..r {
        let image = op.image(presentation.lift(i));
        let out = algorithm.reduce(complex, &image, options)?;
        if !complex.is_relative_cycle(&out.chain)?.is_cycle {
            return Err(HeckeError::NotRelativeCycle(i));
        }
        cols.push(presentation.project(complex, &out.chain)?);
        stats.push(out.stats);
    }
    let matrix = if r == 0 { RatMatrix::zeros(0, 0) } else { RatMatrix::from_columns(&cols) };
    let charpoly = matrix.charpoly();
    Ok(HeckeMatrix { p: op.p, degree: presentation.degree, matrix, charpoly, stats })
}

/// Integer polynomial as text in x, highest degree first.
pub fn format_poly(coeffs: &[Rat]) -> String {
    let mut parts = Vec::new();
    for (k, c) in coeffs.iter().enumerate().rev() {
        if *c == Rat::from_integer(Int::from(0)) {
            continue;
        }
        let mono = match k {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{k}"),
        };
        let one = Rat::from_integer(Int::from(1));
        let coef = if k > 0 && *c == one {
            String::new()
        } else if k > 0 && *c == -one.clone() {
            "-".to_string()
        } else {
            format!("{c}*")
        };
        let coef = if k == 0 { c.to_string() } else { coef };
        parts.push(format!("{coef}{mono}"));
    }
    if parts.is_empty() {
        return "0".into();
    }
    parts.join(" + ").replace("+ -", "- ")
}
