//! The Voronoi reduction oracle: the smallest Voronoi cone containing a point,
//! found by a certified walk over neighboring top cones, with recursion into
//! rational boundary components for singular points.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, int, Int, IntMatrix, Rat};
use crate::model::{
    self, action_matrix, boundary_component, classify_point, lll_gram, pi_face_in_boundary, ModelError, PointClass,
    SymForm, VoronoiFanData,
};

/// Wall crossings allowed before the walk is declared divergent.
pub const MAX_WALK_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("point lies outside the closed cone or is zero")]
    OutsideCone,
    #[error("reduction walk exceeded {0} steps")]
    NonConvergence(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// S(x) with its certificate: x lies in the relative interior of γ·(face of
/// the standard cone).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleAnswer {
    pub cusps: BTreeSet<Vec<Int>>,
    pub gamma: IntMatrix,
    /// Increasing indices into the standard rays.
    pub face: Vec<usize>,
    /// Coordinates of the (leading) point on all standard rays after γ⁻¹.
    pub coords: Vec<Rat>,
    pub component_rank: usize,
    pub steps: usize,
    /// Potential ⟨P, x⟩ against the current perfect form, per step.
    pub potentials: Vec<Rat>,
}

impl OracleAnswer {
    /// Cusps of the certified face in face order.
    pub fn face_cusps(&self, data: &VoronoiFanData) -> Vec<Vec<Int>> {
        self.face.iter().map(|&i| model::act_cusp(&self.gamma, &data.rays[i])).collect()
    }
}

/// Oracle for one rank with an append-only memo cache keyed by primitive point.
pub struct Oracle {
    n: usize,
    data: &'static VoronoiFanData,
    neighbor_actions: Vec<(IntMatrix, IntMatrix)>,
    cache: Mutex<HashMap<Vec<Int>, OracleAnswer>>,
}

impl Oracle {
    pub fn new(n: usize) -> Result<Self, OracleError> {
        let data = VoronoiFanData::standard(n)?;
        let neighbor_actions = data
            .neighbors
            .iter()
            .map(|g| {
                let inv = g.inverse().expect("unimodular");
                let a = action_matrix(&inv);
                (inv, a)
            })
            .collect();
        Ok(Oracle { n, data, neighbor_actions, cache: Mutex::new(HashMap::new()) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &'static VoronoiFanData {
        self.data
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn export_cache(&self) -> Vec<(Vec<Int>, OracleAnswer)> {
        let mut v: Vec<_> = self.cache.lock().expect("cache lock").iter().map(|(k, a)| (k.clone(), a.clone())).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    pub fn import_cache(&self, entries: Vec<(Vec<Int>, OracleAnswer)>) {
        let mut c = self.cache.lock().expect("cache lock");
        for (k, a) in entries {
            c.entry(k).or_insert(a);
        }
    }

    pub fn reduce(&self, x: &SymForm) -> Result<OracleAnswer, OracleError> {
        if x.n() != self.n {
            return Err(OracleError::Model(ModelError::UnsupportedRank(x.n())));
        }
        let key = linalg::primitive(x.vec());
        if let Some(a) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(a.clone());
        }
        let answer = self.reduce_uncached(x)?;
        self.cache.lock().expect("cache lock").entry(key).or_insert_with(|| answer.clone());
        Ok(answer)
    }

    pub fn reduce_vec(&self, v: &[Rat]) -> Result<OracleAnswer, OracleError> {
        self.reduce(&SymForm::from_vec(self.n, v.to_vec()))
    }

    /// S(ρ) for the ray through an integer vec point.
    pub fn s_of_ray(&self, ray: &[Int]) -> Result<BTreeSet<Vec<Int>>, OracleError> {
        Ok(self.reduce(&SymForm::from_int_vec(self.n, ray))?.cusps)
    }

    fn reduce_uncached(&self, x: &SymForm) -> Result<OracleAnswer, OracleError> {
        match classify_point(x) {
            PointClass::Outside => Err(OracleError::OutsideCone),
            PointClass::Interior => self.walk(&[x.vec().to_vec()]),
            PointClass::ProperBoundary(_) => self.boundary(x),
        }
    }

    /// The cone containing x₀ + εx₁ + ε²x₂ + … for infinitesimal ε, with x₀
    /// positive definite. Coordinate signs are read lexicographically.
    pub fn reduce_lex(&self, xs: &[Vec<Rat>]) -> Result<OracleAnswer, OracleError> {
        let x0 = SymForm::from_vec(self.n, xs[0].clone());
        if !x0.is_positive_definite() {
            return Err(OracleError::OutsideCone);
        }
        self.walk(xs)
    }

    fn walk(&self, xs: &[Vec<Rat>]) -> Result<OracleAnswer, OracleError> {
        let data = self.data;
        let x0 = SymForm::from_vec(self.n, xs[0].clone());
        let mut u = lll_gram(&x0.to_matrix());
        if u.det() != Int::one() {
            for i in 0..self.n {
                let v = -u.get(i, 0);
                u.set(i, 0, v);
            }
        }
        // γ = U⁻ᵗ so that γ⁻¹ x γ⁻ᵗ = Uᵗ x U is reduced
        let mut gamma_inv = u.transpose();
        let mut gamma = gamma_inv.inverse().expect("unimodular");
        let start = action_matrix(&gamma_inv).to_rat();
        let mut ys: Vec<Vec<Rat>> = xs.iter().map(|x| start.mul_vec(x)).collect();
        let mut potentials: Vec<Vec<Rat>> = Vec::new();
        let mut steps = 0usize;
        loop {
            let pot: Vec<Rat> = ys.iter().map(|y| model::trace_pairing(self.n, data.perfect.vec(), y)).collect();
            if let Some(prev) = potentials.last() {
                assert!(pot < *prev, "walk potential must strictly decrease");
            }
            potentials.push(pot);
            let cs: Vec<Vec<Rat>> = ys.iter().map(|y| data.coordinates(y)).collect();
            let d = data.dim();
            let signs: Vec<i8> = (0..d).map(|j| lex_sign(cs.iter().map(|c| &c[j]))).collect();
            let negative = (0..d)
                .filter(|&j| signs[j] < 0)
                .min_by(|&a, &b| cs.iter().map(|c| &c[a]).cmp(cs.iter().map(|c| &c[b])));
            match negative {
                None => {
                    let face: Vec<usize> = (0..d).filter(|&j| signs[j] > 0).collect();
                    let cusps = face.iter().map(|&i| model::act_cusp(&gamma, &data.rays[i])).collect();
                    return Ok(OracleAnswer {
                        cusps,
                        gamma,
                        face,
                        coords: cs[0].clone(),
                        component_rank: self.n,
                        steps,
                        potentials: potentials.into_iter().map(|p| p[0].clone()).collect(),
                    });
                }
                Some(j) => {
                    steps += 1;
                    if steps > MAX_WALK_STEPS {
                        return Err(OracleError::NonConvergence(steps));
                    }
                    let (inv_j, act_j) = &self.neighbor_actions[j];
                    let act = act_j.to_rat();
                    ys = ys.iter().map(|y| act.mul_vec(y)).collect();
                    gamma = gamma.mul(&data.neighbors[j]);
                    gamma_inv = inv_j.mul(&gamma_inv);
                }
            }
        }
    }

    fn boundary(&self, x: &SymForm) -> Result<OracleAnswer, OracleError> {
        let data = self.data;
        let comp = boundary_component(x);
        let bd = pi_face_in_boundary(&comp, self.n);
        let m = bd.basis;
        let m_inv = m.inverse().expect("unimodular");
        let y = x.act(&m_inv).to_matrix();
        let r = comp.rank;
        let (gamma, face, steps) = if r == 1 {
            (m.clone(), vec![0], 0)
        } else {
            // rank two inside rank three: reduce the leading block with the rank-two data
            let rows: Vec<Vec<Rat>> = (0..2).map(|i| (0..2).map(|j| y.get(i, j).clone()).collect()).collect();
            let y2 = SymForm::from_matrix(&crate::linalg::RatMatrix::from_rows(&rows));
            let sub = Oracle::new(2)?;
            let a2 = sub.walk(&[y2.vec().to_vec()])?;
            let d2 = IntMatrix::from_rows(&[vec![1, 0], vec![0, -1]]);
            let g2 = a2.gamma.mul(&d2);
            let mut block = IntMatrix::zeros(3, 3);
            for i in 0..2 {
                for j in 0..2 {
                    block.set(i, j, g2.get(i, j).clone());
                }
            }
            block.set(2, 2, int(-1));
            // rank-two rays e1, e2, e1+e2 sit on the rank-three rays e1, e2, e1-e2
            let embed = [0usize, 1, 3];
            let mut face: Vec<usize> = a2.face.iter().map(|&i| embed[i]).collect();
            face.sort_unstable();
            (m.mul(&block), face, a2.steps)
        };
        let coords = data.coordinates(x.act(&gamma.inverse().expect("unimodular")).vec());
        debug_assert!((0..coords.len()).all(|i| coords[i].is_positive() == face.contains(&i)));
        let cusps = face.iter().map(|&i| model::act_cusp(&gamma, &data.rays[i])).collect();
        let pot = model::trace_pairing(self.n, data.perfect.vec(), x.act(&gamma.inverse().expect("unimodular")).vec());
        Ok(OracleAnswer { cusps, gamma, face, coords, component_rank: r, steps, potentials: vec![pot] })
    }
}

fn lex_sign<'a>(mut it: impl Iterator<Item = &'a Rat>) -> i8 {
    it.find(|c| !c.is_zero()).map_or(0, |c| if c.is_positive() { 1 } else { -1 })
}

/// Exact check of an answer: x is recovered from the certified rays with the
/// reported coordinates, which are nonnegative and positive exactly on the face.
pub fn verify_answer(data: &VoronoiFanData, x: &SymForm, a: &OracleAnswer) -> bool {
    if a.gamma.det() != Int::one() {
        return false;
    }
    let d = data.dim();
    let mut sum = vec![Rat::zero(); d];
    for i in 0..d {
        if a.coords[i].is_negative() || a.coords[i].is_positive() != a.face.contains(&i) {
            return false;
        }
        let r = model::rank_one_vec(&a.gamma.mul_vec(&data.rays[i]));
        for (s, v) in sum.iter_mut().zip(r) {
            *s += &a.coords[i] * Rat::from_integer(v);
        }
    }
    sum == x.vec()
}
