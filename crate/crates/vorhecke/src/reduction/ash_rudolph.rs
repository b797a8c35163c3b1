//! Modular-symbol reduction: replace a non-unimodular symbol [v₁,…,vₙ] by
//! Σᵢ [v₁,…,w,…,vₙ] for a short lattice point w of the parallelepiped lattice.

use std::collections::{BTreeSet, VecDeque};

use num::{One, Signed, Zero};

use super::{ReductionAlgorithm, ReductionError, ReductionOptions, ReductionOutput, ReductionStats};
use crate::chains::{Chain, VoronoiComplex};
use crate::linalg::{int, rat, Int, IntMatrix, Rat};

pub struct AshRudolph;

/// One refinement step: the chosen point and the children with their dets.
#[derive(Debug, Clone)]
pub struct ArStep {
    pub w: Vec<Int>,
    pub children: Vec<(Vec<Vec<Int>>, Int)>,
}

fn frac(x: &Rat) -> Rat {
    x - Rat::from_integer(x.floor().to_integer())
}

fn centered(x: &Rat) -> Rat {
    let f = frac(x);
    if f > Rat::new(int(1), int(2)) {
        f - rat(1)
    } else {
        f
    }
}

/// The nonzero element of M⁻¹Zⁿ/Zⁿ with least sup-norm representative in
/// (−1/2, 1/2]ⁿ, ties broken lexicographically; returns w = M·a and a.
pub fn short_point(m: &IntMatrix) -> Option<(Vec<Int>, Vec<Rat>)> {
    let n = m.rows();
    let minv = m.to_rat().inverse()?;
    let gens: Vec<Vec<Rat>> = (0..n).map(|j| minv.col(j).iter().map(frac).collect()).collect();
    let zero = vec![Rat::zero(); n];
    let mut seen: BTreeSet<Vec<Rat>> = BTreeSet::from([zero.clone()]);
    let mut queue = VecDeque::from([zero]);
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y: Vec<Rat> = x.iter().zip(g).map(|(a, b)| frac(&(a + b))).collect();
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    let best = seen
        .iter()
        .filter(|x| x.iter().any(|v| !v.is_zero()))
        .map(|x| x.iter().map(centered).collect::<Vec<Rat>>())
        .min_by(|a, b| {
            let na = a.iter().map(|v| v.abs()).max();
            let nb = b.iter().map(|v| v.abs()).max();
            na.cmp(&nb).then_with(|| a.cmp(b))
        })?;
    let w = m.to_rat().mul_vec(&best);
    let w: Vec<Int> = w.iter().map(|x| x.to_integer()).collect();
    Some((w, best))
}

/// Splits a symbol with |det| > 1; children with det 0 are omitted.
pub fn split(cusps: &[Vec<Int>]) -> Option<ArStep> {
    let m = IntMatrix::from_columns(cusps);
    let d = m.det();
    if d.abs() <= Int::one() {
        return None;
    }
    let (w, a) = short_point(&m)?;
    let mut children = Vec::new();
    for i in 0..cusps.len() {
        let cd = (&a[i] * Rat::from_integer(d.clone())).to_integer();
        if cd.is_zero() {
            continue;
        }
        let mut c = cusps.to_vec();
        c[i] = w.clone();
        children.push((c, cd));
    }
    Some(ArStep { w, children })
}

/// Reduces coef·[cusps] to unimodular symbols. Appends per-level max |det|
/// to `levels` and, when `witness` is given, the homotopy cones (w, v₁…vₙ).
pub fn reduce_symbol(
    cusps: &[Vec<Int>],
    coef: &Int,
    out: &mut Chain,
    levels: &mut Vec<Int>,
    mut witness: Option<&mut Chain>,
) {
    let det = IntMatrix::from_columns(cusps).det();
    if det.is_zero() {
        return;
    }
    let mut current: Vec<(Vec<Vec<Int>>, Int)> = vec![(cusps.to_vec(), det)];
    while !current.is_empty() {
        levels.push(current.iter().map(|(_, d)| d.abs()).max().expect("nonempty"));
        let mut next = Vec::new();
        for (c, d) in current {
            if d.abs().is_one() {
                out.add_cusps(&c, coef);
                continue;
            }
            let step = split(&c).expect("non-unimodular symbol splits");
            if let Some(eta) = witness.as_deref_mut() {
                let mut cone = vec![step.w.clone()];
                cone.extend(c.iter().cloned());
                eta.add_cusps(&cone, coef);
            }
            next.extend(step.children);
        }
        current = next;
    }
}

impl ReductionAlgorithm for AshRudolph {
    fn name(&self) -> &'static str {
        "ar"
    }

    fn reduce(
        &self,
        complex: &VoronoiComplex,
        xi: &Chain,
        options: &ReductionOptions,
    ) -> Result<ReductionOutput, ReductionError> {
        let n = complex.n();
        let mut stats = ReductionStats::default();
        let mut out = Chain::new(n);
        let mut eta = options.witness.then(|| Chain::new(n));
        for (term, coef) in xi.terms() {
            if term.len() != n {
                return Err(ReductionError::UnsupportedDegree {
                    algorithm: self.name().into(),
                    degree: term.len() - 1,
                    n,
                });
            }
            let cusps = xi.term_cusps(term).ok_or_else(|| ReductionError::NotCuspidal(term.clone()))?;
            stats.terms_in += 1;
            let mut levels = Vec::new();
            reduce_symbol(&cusps, coef, &mut out, &mut levels, eta.as_mut());
            stats.det_levels.push(levels);
        }
        stats.terms_out = out.len();
        Ok(ReductionOutput { chain: out, stats, witness: eta, certificates: Vec::new() })
    }
}
