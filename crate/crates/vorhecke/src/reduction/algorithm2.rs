//! Reduction through a sufficiently fine refinement of each term, built face
//! by face in increasing dimension, followed by barycentric assembly.

use std::collections::{BTreeMap, BTreeSet};

use num::Zero;

use super::suff_fine::{check_sufficiently_fine, SuffFineCertificate};
use super::{
    choose_cusp, nondegenerate_terms, orientation, ReductionAlgorithm, ReductionError, ReductionOptions,
    ReductionOutput, ReductionStats,
};
use crate::chains::{is_boundary_cone, Chain, VoronoiComplex};
use crate::cones::{average, combinations, relative_barycentric_subdivide, Fan};
use crate::linalg::{self, int, permutation_sign, primitive, Int, Rat};
use crate::oracle::Oracle;

pub struct Algorithm2;

/// A sufficiently fine refinement of one simplicial term.
#[derive(Debug, Clone)]
pub struct Refinement {
    /// Realized in the vec space; vertices 0..m are the term's rays.
    pub fan: Fan,
    /// Per face of σ of dimension ≥ 2: (dimension, subdivision count).
    pub levels: Vec<(usize, usize)>,
    pub certificate: SuffFineCertificate,
}

fn support(rays: &[Vec<Rat>], p: &[Rat]) -> BTreeSet<usize> {
    let c = linalg::solve_in_ray_basis(rays, p).expect("point of the cone");
    (0..c.len()).filter(|&i| !c[i].is_zero()).collect()
}

/// Refines σ so that every top cone is sufficiently fine. Each face G is
/// coned from its barycenter over the refinement of ∂G when ∂G has new rays,
/// then relatively subdivided i times with ∂G fixed, i minimal.
pub fn make_sufficiently_fine(oracle: &Oracle, rays: &[Vec<Int>], cap: usize) -> Result<Refinement, ReductionError> {
    let m = rays.len();
    let rays_rat: Vec<Vec<Rat>> = rays.iter().map(|r| linalg::to_rat_vec(r)).collect();
    let mut global = Fan::new(rays[0].len());
    for (i, r) in rays_rat.iter().enumerate() {
        let v = global.add_point(r.clone());
        debug_assert_eq!(v, i);
        global.add_cone(vec![v]);
    }
    let mut supports: BTreeMap<usize, BTreeSet<usize>> = (0..m).map(|i| (i, BTreeSet::from([i]))).collect();
    let mut levels = Vec::new();
    for j in 2..=m {
        for g in combinations(m, j) {
            let gs: BTreeSet<usize> = g.iter().copied().collect();
            let inside: Vec<Vec<usize>> =
                global.faces().into_iter().filter(|c| c.iter().all(|v| supports[v].is_subset(&gs))).collect();
            let bd: Vec<Vec<usize>> = inside.iter().filter(|c| c.len() == j - 1).cloned().collect();
            let used: BTreeSet<usize> = bd.iter().flatten().copied().collect();
            let mut local = Fan::new(global.ambient_dim());
            let mut constraint: BTreeSet<Vec<usize>> = BTreeSet::new();
            if used == gs {
                let idx: Vec<usize> = g.iter().map(|&v| local.add_point(global.point(v).to_vec())).collect();
                local.add_cone(idx);
                for k in 1..j {
                    for s in combinations(j, k) {
                        constraint.insert(s);
                    }
                }
            } else {
                let b = average(&g.iter().map(|&i| rays_rat[i].clone()).collect::<Vec<_>>());
                for c in &bd {
                    let mut idx: Vec<usize> = c.iter().map(|&v| local.add_point(global.point(v).to_vec())).collect();
                    idx.sort_unstable();
                    for k in 1..=idx.len() {
                        for s in combinations(idx.len(), k) {
                            constraint.insert(s.iter().map(|&i| idx[i]).collect());
                        }
                    }
                    let bi = local.add_point(b.clone());
                    idx.push(bi);
                    local.add_cone(idx);
                }
            }
            let mut i = 0;
            loop {
                let report = check_sufficiently_fine(oracle, &local)?;
                if report.passes() {
                    break;
                }
                if i == cap {
                    return Err(ReductionError::IterationCapExceeded {
                        face: g.iter().map(|&k| rays[k].clone()).collect(),
                        cap,
                        failing: report.failing.len(),
                    });
                }
                local = relative_barycentric_subdivide(&local, &constraint).expect("boundary is a subfan");
                i += 1;
            }
            levels.push((j, i));
            for c in local.cones() {
                let idx: Vec<usize> = c
                    .iter()
                    .map(|&v| {
                        let p = local.point(v).to_vec();
                        let gi = global.add_point(p.clone());
                        supports.entry(gi).or_insert_with(|| support(&rays_rat, &p));
                        gi
                    })
                    .collect();
                global.add_cone(idx);
            }
        }
    }
    let report = check_sufficiently_fine(oracle, &global)?;
    Ok(Refinement { fan: global, levels, certificate: report.certificate })
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

/// Σ over top cones T and orderings π of T's vertices of
/// sign(T)·sgn(π)·(v_{I₁}, …, v_{Iₘ}), I_k the first k vertices under π and
/// v_I a canonical cusp of ⋂_{i∈I} S(ρᵢ).
pub fn assemble(
    complex: &VoronoiComplex,
    rays: &[Vec<Int>],
    fan: &Fan,
    coef: &Int,
    out: &mut Chain,
) -> Result<(), ReductionError> {
    let oracle = complex.oracle();
    let rays_rat: Vec<Vec<Rat>> = rays.iter().map(|r| linalg::to_rat_vec(r)).collect();
    let mut face_cusp: BTreeMap<Vec<usize>, Vec<Int>> = BTreeMap::new();
    let perms = permutations(rays.len());
    for t in fan.cones() {
        let pts = fan.cone_generators(t);
        let st = orientation(&rays_rat, &pts)?;
        for p in &perms {
            let mut cusps = Vec::with_capacity(t.len());
            for k in 1..=t.len() {
                let mut face: Vec<usize> = p[..k].iter().map(|&i| t[i]).collect();
                face.sort_unstable();
                if let Some(c) = face_cusp.get(&face) {
                    cusps.push(c.clone());
                    continue;
                }
                let frame: Vec<Vec<Int>> = face.iter().map(|&v| fan.ray(v)).collect();
                let mut cands: Option<BTreeSet<Vec<Int>>> = None;
                for &v in &face {
                    let s = oracle.reduce_vec(fan.point(v))?.cusps;
                    cands = Some(match cands {
                        None => s,
                        Some(c) => c.intersection(&s).cloned().collect(),
                    });
                }
                let cands = cands.unwrap_or_default();
                if cands.is_empty() {
                    return Err(ReductionError::EmptyWitness(frame));
                }
                let c = choose_cusp(complex, &cands, &frame)?;
                face_cusp.insert(face, c.clone());
                cusps.push(c);
            }
            let sign = st * permutation_sign(p);
            out.add_cusps(&cusps, &(coef * int(sign as i64)));
        }
    }
    Ok(())
}

impl ReductionAlgorithm for Algorithm2 {
    fn name(&self) -> &'static str {
        "2"
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
        let mut certificates = Vec::new();
        let before = complex.oracle().cache_len();
        for (t, c) in nondegenerate_terms(xi)? {
            stats.terms_in += 1;
            if is_boundary_cone(n, &t) {
                continue;
            }
            let r = make_sufficiently_fine(complex.oracle(), &t, options.max_subdiv)?;
            stats.subdiv_levels.extend(r.levels.iter().copied());
            assemble(complex, &t, &r.fan, &c, &mut out)?;
            certificates.push(r.certificate);
        }
        stats.terms_out = out.len();
        stats.cones_visited = complex.oracle().cache_len().saturating_sub(before);
        Ok(ReductionOutput { chain: out, stats, witness: None, certificates })
    }
}

/// Primitive rays of every top cone of a refinement.
pub fn top_cone_rays(fan: &Fan) -> Vec<Vec<Vec<Int>>> {
    fan.cones().iter().map(|c| c.iter().map(|&v| primitive(fan.point(v))).collect()).collect()
}
