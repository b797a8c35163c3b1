//! Reduction through the Voronoi subdivision of each simplicial term: walk
//! the Voronoi cones meeting σ, triangulate the pieces without new rays, and
//! send every vertex to a cusp of its minimal Voronoi cone.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num::{Signed, Zero};

use super::{
    all_rank_deficient, choose_cusp, cone_over, cusp_frame, nondegenerate_terms, ReductionAlgorithm, ReductionError,
    ReductionOptions, ReductionOutput, ReductionStats,
};
use crate::chains::{is_boundary_cone, Chain, Term, VoronoiComplex};
use crate::cones::{combinations, cone_facets, extreme_rays_of_hrep, pulling_triangulation};
use crate::linalg::{self, int, rat, Int, IntMatrix, Rat, RatMatrix};
use crate::model::{act_cusp, action_matrix, rank_one_vec, SymForm};

pub struct Algorithm1;

/// σ ∩ γσ₀ in the coefficient space of σ's rays.
#[derive(Debug, Clone)]
pub struct Piece {
    pub gamma: IntMatrix,
    /// Cusps of the minimal Voronoi cone containing the piece's interior.
    pub cusps: BTreeSet<Vec<Int>>,
    /// Extreme rays as primitive coefficient vectors.
    pub rays: Vec<Vec<Int>>,
}

/// The simplicial refinement of σ's Voronoi subdivision with chosen cusps.
#[derive(Debug, Clone)]
pub struct CanonicalSubdivision {
    /// Rays of σ (vec coordinates).
    pub rays: Vec<Vec<Int>>,
    pub pieces: Vec<Piece>,
    /// Vertices in coefficient space.
    pub vertices: Vec<Vec<Int>>,
    /// Primitive vec points of the vertices.
    pub points: Vec<Vec<Int>>,
    /// Top simplices, ordered so that the coefficient determinant is positive.
    pub simplices: Vec<Vec<usize>>,
    pub cusps: Vec<Vec<Int>>,
}

impl CanonicalSubdivision {
    fn dim(&self) -> usize {
        self.rays.len()
    }

    /// The reduced term Σ ±(v_β₀, …, v_βₘ).
    pub fn reduced_chain(&self, n: usize, coef: &Int) -> Chain {
        let mut out = Chain::new(n);
        for s in &self.simplices {
            let cs: Vec<Vec<Int>> = s.iter().map(|&v| self.cusps[v].clone()).collect();
            out.add_cusps(&cs, coef);
        }
        out
    }

    /// The subdivision restricted to the face of σ on the ray indices `face`,
    /// oriented by the coefficient determinant on those rays.
    pub fn face_chain(&self, n: usize, face: &[usize]) -> Chain {
        let k = face.len();
        let m = self.dim();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut out = Chain::new(n);
        for s in &self.simplices {
            for comb in combinations(s.len(), k) {
                let vs: Vec<usize> = comb.iter().map(|&i| s[i]).collect();
                let mut key = vs.clone();
                key.sort_unstable();
                if !seen.insert(key) {
                    continue;
                }
                let inside =
                    vs.iter().all(|&v| (0..m).all(|i| face.contains(&i) || self.vertices[v][i].is_zero()));
                if !inside {
                    continue;
                }
                let cols: Vec<Vec<Rat>> = vs
                    .iter()
                    .map(|&v| face.iter().map(|&i| Rat::from_integer(self.vertices[v][i].clone())).collect())
                    .collect();
                let d = RatMatrix::from_columns(&cols).det();
                if d.is_zero() {
                    continue;
                }
                let sign = if d.is_positive() { int(1) } else { int(-1) };
                out.add_rays(vs.iter().map(|&v| self.points[v].clone()).collect(), &sign);
            }
        }
        out
    }

    /// η for one term: ∂η = σ − σ^V + μ with μ in the boundary of the cone.
    pub fn witness(&self, n: usize) -> Chain {
        let all: Vec<usize> = (0..self.dim()).collect();
        let mut memo = BTreeMap::new();
        let mut eta = self.homotopy(n, &all, &mut memo);
        eta = Chain::new(n).sub(&eta);
        let phi: BTreeMap<Vec<Int>, Vec<Int>> =
            self.points.iter().zip(&self.cusps).map(|(p, c)| (p.clone(), rank_one_vec(c))).collect();
        eta.add_scaled(&prism(&self.face_chain(n, &all), &phi), &int(-1));
        eta
    }

    /// H(F) = a_F * (S(F) − F − H(∂F)).
    fn homotopy(&self, n: usize, face: &[usize], memo: &mut BTreeMap<Vec<usize>, Chain>) -> Chain {
        if face.len() == 1 {
            return Chain::new(n);
        }
        if let Some(h) = memo.get(face) {
            return h.clone();
        }
        let mut inner = self.face_chain(n, face);
        inner.add_rays(face.iter().map(|&i| self.rays[i].clone()).collect(), &int(-1));
        for j in 0..face.len() {
            let sub: Vec<usize> = face.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &v)| v).collect();
            let h = self.homotopy(n, &sub, memo);
            inner.add_scaled(&h, &int(if j % 2 == 0 { -1 } else { 1 }));
        }
        let out = cone_over(&self.rays[face[0]], &inner);
        memo.insert(face.to_vec(), out.clone());
        out
    }
}

/// Prism operator between the identity and the vertex map φ.
pub fn prism(chain: &Chain, phi: &BTreeMap<Vec<Int>, Vec<Int>>) -> Chain {
    let mut out = Chain::new(chain.n());
    for (t, c) in chain.terms() {
        for i in 0..t.len() {
            let mut rays: Vec<Vec<Int>> = t[..=i].to_vec();
            rays.extend(t[i..].iter().map(|r| phi[r].clone()));
            let s = if i % 2 == 0 { c.clone() } else { -c };
            out.add_rays(rays, &s);
        }
    }
    out
}

/// Pieces of σ's Voronoi subdivision, found by crossing facets of pieces.
pub fn voronoi_pieces(complex: &VoronoiComplex, rays: &[Vec<Int>]) -> Result<Vec<Piece>, ReductionError> {
    let data = complex.data();
    let oracle = complex.oracle();
    let m = rays.len();
    let q = RatMatrix::from_columns(&rays.iter().map(|r| linalg::to_rat_vec(r)).collect::<Vec<_>>());
    let mut start = vec![q.mul_vec(&vec![rat(1); m])];
    start.extend(rays[..m - 1].iter().map(|r| linalg::to_rat_vec(r)));
    let mut queue = VecDeque::from([start]);
    let mut seen_top: BTreeSet<BTreeSet<Vec<Int>>> = BTreeSet::new();
    let mut seen: BTreeSet<Vec<Vec<Int>>> = BTreeSet::new();
    let mut pieces = Vec::new();
    while let Some(lex) = queue.pop_front() {
        let ans = oracle.reduce_lex(&lex)?;
        let g = ans.gamma;
        let top: BTreeSet<Vec<Int>> = data.rays.iter().map(|r| act_cusp(&g, r)).collect();
        if !seen_top.insert(top) {
            continue;
        }
        let ginv = g.inverse().expect("unimodular");
        let cv = data.coords.mul(&action_matrix(&ginv).to_rat()).mul(&q);
        let mut cons: Vec<Vec<Rat>> = cv.to_rows().into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
        for i in 0..m {
            let mut e = vec![Rat::zero(); m];
            e[i] = rat(1);
            cons.push(e);
        }
        let ext = extreme_rays_of_hrep(&cons, m);
        if !seen.insert(ext.clone()) {
            continue;
        }
        let ext_rat: Vec<Vec<Rat>> = ext.iter().map(|r| linalg::to_rat_vec(r)).collect();
        let total = sum(&ext_rat, &(0..ext.len()).collect::<Vec<_>>());
        for facet in cone_facets(&ext_rat) {
            if (0..m).any(|i| facet.iter().all(|&f| ext[f][i].is_zero())) {
                continue;
            }
            let pf = sum(&ext_rat, &facet);
            let np = rat(ext.len() as i64);
            let nf = rat(facet.len() as i64);
            let out: Vec<Rat> = pf.iter().zip(&total).map(|(a, b)| a * &np - b * &nf).collect();
            let mut next = vec![q.mul_vec(&pf), q.mul_vec(&out)];
            next.extend(facet.iter().map(|&f| q.mul_vec(&ext_rat[f])));
            queue.push_back(next);
        }
        let cusps = oracle.reduce_vec(&q.mul_vec(&total))?.cusps;
        pieces.push(Piece { gamma: g, cusps, rays: ext });
    }
    Ok(pieces)
}

fn sum(vs: &[Vec<Rat>], idx: &[usize]) -> Vec<Rat> {
    let mut s = vec![Rat::zero(); vs[0].len()];
    for &i in idx {
        for (a, b) in s.iter_mut().zip(&vs[i]) {
            *a += b;
        }
    }
    s
}

/// Builds the canonical subdivision of the simplicial cone on `rays`.
pub fn canonical_subdivision(
    complex: &VoronoiComplex,
    rays: &[Vec<Int>],
) -> Result<CanonicalSubdivision, ReductionError> {
    let m = rays.len();
    let pieces = voronoi_pieces(complex, rays)?;
    let to_point = |l: &[Int]| -> Vec<Int> {
        let mut y = vec![Int::zero(); rays[0].len()];
        for (c, r) in l.iter().zip(rays) {
            for (a, b) in y.iter_mut().zip(r) {
                *a += c * b;
            }
        }
        linalg::primitive_int(&y)
    };
    let mut verts: Vec<(Vec<Int>, Vec<Int>)> =
        pieces.iter().flat_map(|p| p.rays.iter().map(|l| (to_point(l), l.clone()))).collect();
    verts.sort();
    verts.dedup();
    let points: Vec<Vec<Int>> = verts.iter().map(|(p, _)| p.clone()).collect();
    let vertices: Vec<Vec<Int>> = verts.into_iter().map(|(_, l)| l).collect();
    let mut simplices = Vec::new();
    for piece in &pieces {
        let global: Vec<usize> =
            piece.rays.iter().map(|l| points.binary_search(&to_point(l)).expect("vertex recorded")).collect();
        let local: Vec<Vec<Rat>> = piece.rays.iter().map(|l| linalg::to_rat_vec(l)).collect();
        for s in pulling_triangulation(&local, &global) {
            let mut g: Vec<usize> = s.iter().map(|&i| global[i]).collect();
            let cols: Vec<Vec<Rat>> = g.iter().map(|&v| linalg::to_rat_vec(&vertices[v])).collect();
            let d = RatMatrix::from_columns(&cols).det();
            if d.is_zero() || g.len() != m {
                return Err(ReductionError::OrientationFailure);
            }
            if d.is_negative() {
                g.swap(0, 1);
            }
            simplices.push(g);
        }
    }
    let mut cusps = Vec::with_capacity(points.len());
    for p in &points {
        let s = complex.oracle().s_of_ray(p)?;
        let frame =
            if SymForm::from_int_vec(complex.n(), p).is_positive_definite() { cusp_frame(&s) } else { Vec::new() };
        cusps.push(choose_cusp(complex, &s, &frame)?);
    }
    Ok(CanonicalSubdivision { rays: rays.to_vec(), pieces, vertices, points, simplices, cusps })
}

fn supported_degree(n: usize, len: usize) -> bool {
    len == n || (n == 2 && len == 3)
}

/// Algorithm 1 on chains of degree above n − 1: the output must still be a
/// relative cycle, otherwise the cusp choices were not compatible on faces.
pub fn algorithm1_equivariant(
    complex: &VoronoiComplex,
    xi: &Chain,
    options: &ReductionOptions,
) -> Result<ReductionOutput, ReductionError> {
    let out = Algorithm1.reduce(complex, xi, options)?;
    if complex.is_relative_cycle(xi)?.is_cycle {
        let tag = complex.is_relative_cycle(&out.chain)?;
        if !tag.is_cycle {
            return Err(ReductionError::EquivarianceViolation(tag.offending.len()));
        }
    }
    Ok(out)
}

impl ReductionAlgorithm for Algorithm1 {
    fn name(&self) -> &'static str {
        "1"
    }

    fn reduce(
        &self,
        complex: &VoronoiComplex,
        xi: &Chain,
        options: &ReductionOptions,
    ) -> Result<ReductionOutput, ReductionError> {
        let n = complex.n();
        if let Some(t) = xi.terms().map(|(t, _)| t).find(|t| !supported_degree(n, t.len())) {
            return Err(ReductionError::UnsupportedDegree { algorithm: self.name().into(), degree: t.len() - 1, n });
        }
        let mut stats = ReductionStats::default();
        let mut out = Chain::new(n);
        let mut eta = options.witness.then(|| Chain::new(n));
        let terms: Vec<(Term, Int)> = nondegenerate_terms(xi)?;
        for (t, c) in terms {
            stats.terms_in += 1;
            if is_boundary_cone(n, &t) {
                continue;
            }
            let sub = canonical_subdivision(complex, &t)?;
            stats.cones_visited += sub.pieces.len();
            out.add(&sub.reduced_chain(n, &c));
            if let Some(e) = eta.as_mut() {
                e.add_scaled(&sub.witness(n), &c);
            }
        }
        stats.terms_out = out.len();
        Ok(ReductionOutput { chain: out, stats, witness: eta, certificates: Vec::new() })
    }
}

/// μ = ∂η − (ξ − ξ^V); the witness is valid when μ lies in the boundary.
pub fn witness_defect(xi: &Chain, reduced: &Chain, eta: &Chain) -> Chain {
    eta.boundary().sub(&xi.sub(reduced))
}

pub fn witness_holds(xi: &Chain, reduced: &Chain, eta: &Chain) -> bool {
    all_rank_deficient(&witness_defect(xi, reduced, eta))
}
