//! Chains of pointed cones, relative cycles, the Voronoi complex modulo Γ₀(N)
//! and its relative rational homology.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, int, permutation_sign, Int, IntMatrix, Rat, RatMatrix};
use crate::model::{self, action_matrix, rank_one_vec, ArithmeticGroup, ProjectiveSpace, SymForm, VoronoiFanData};
use crate::oracle::{Oracle, OracleError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("chain is not a relative cycle")]
    NotACycle,
    #[error("term is not a Voronoi cone: {0:?}")]
    NotVoronoi(Vec<Vec<Int>>),
    #[error("only relative homology is supported")]
    Unsupported,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("malformed chain text at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// A term: the sorted tuple of primitive ray vectors (vec coordinates).
pub type Term = Vec<Vec<Int>>;

/// Finite integer combination of pointed cones. Terms are stored with their
/// rays sorted; the coefficient absorbs the sign of the sorting permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chain {
    n: usize,
    terms: BTreeMap<Term, Int>,
}

/// Sorts a ray tuple, returning None when a ray repeats.
pub fn sort_term(rays: Vec<Vec<Int>>) -> Option<(Term, i32)> {
    let mut idx: Vec<usize> = (0..rays.len()).collect();
    idx.sort_by(|&a, &b| rays[a].cmp(&rays[b]));
    if idx.windows(2).any(|w| rays[w[0]] == rays[w[1]]) {
        return None;
    }
    let sign = permutation_sign(&idx);
    let sorted = idx.iter().map(|&i| rays[i].clone()).collect();
    Some((sorted, sign))
}

impl Chain {
    pub fn new(n: usize) -> Self {
        Chain { n, terms: BTreeMap::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Term, &Int)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, term: &Term) -> Int {
        self.terms.get(term).cloned().unwrap_or_default()
    }

    /// Degree k of a chain of (k+1)-tuples; None for the zero chain.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().next().map(|t| t.len() - 1)
    }

    /// Adds coef·σ(rays); rays are arbitrary nonzero vec vectors.
    pub fn add_rays(&mut self, rays: Vec<Vec<Int>>, coef: &Int) {
        if coef.is_zero() {
            return;
        }
        let prim: Vec<Vec<Int>> = rays.iter().map(|r| linalg::primitive_int(r)).collect();
        let Some((term, sign)) = sort_term(prim) else { return };
        let c = if sign < 0 { -coef } else { coef.clone() };
        self.add_sorted(term, c);
    }

    fn add_sorted(&mut self, term: Term, c: Int) {
        let e = self.terms.entry(term).or_default();
        *e += c;
        if e.is_zero() {
            let key = self.terms.iter().find(|(_, v)| v.is_zero()).map(|(k, _)| k.clone());
            if let Some(k) = key {
                self.terms.remove(&k);
            }
        }
    }

    /// Adds coef·σ(q(v₀), …, q(v_k)).
    pub fn add_cusps(&mut self, cusps: &[Vec<Int>], coef: &Int) {
        self.add_rays(cusps.iter().map(|v| rank_one_vec(v)).collect(), coef);
    }

    pub fn from_cusp_terms(n: usize, terms: &[(Vec<Vec<i64>>, i64)]) -> Self {
        let mut c = Chain::new(n);
        for (cusps, coef) in terms {
            let vs: Vec<Vec<Int>> = cusps.iter().map(|v| linalg::int_vec(v)).collect();
            c.add_cusps(&vs, &int(*coef));
        }
        c
    }

    pub fn add(&mut self, other: &Chain) {
        for (t, c) in &other.terms {
            self.add_sorted(t.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Chain, k: &Int) {
        for (t, c) in &other.terms {
            self.add_sorted(t.clone(), c * k);
        }
    }

    pub fn sub(&self, other: &Chain) -> Chain {
        let mut out = self.clone();
        out.add_scaled(other, &int(-1));
        out
    }

    pub fn boundary(&self) -> Chain {
        let mut out = Chain::new(self.n);
        for (t, c) in &self.terms {
            if t.len() < 2 {
                continue;
            }
            for i in 0..t.len() {
                let face: Term = t.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, r)| r.clone()).collect();
                let s = if i % 2 == 0 { c.clone() } else { -c };
                out.add_sorted(face, s);
            }
        }
        out
    }

    pub fn support(&self) -> BTreeSet<Term> {
        self.terms.keys().cloned().collect()
    }

    /// g·ξ for any nonsingular integer g.
    pub fn act(&self, g: &IntMatrix) -> Chain {
        let a = action_matrix(g);
        let mut out = Chain::new(self.n);
        for (t, c) in &self.terms {
            out.add_rays(t.iter().map(|r| a.mul_vec(r)).collect(), c);
        }
        out
    }

    /// Cusp vectors of a term whose rays are all rank one.
    pub fn term_cusps(&self, term: &Term) -> Option<Vec<Vec<Int>>> {
        term.iter().map(|r| model::cusp_from_ray(self.n, r)).collect()
    }

    pub fn is_cuspidal(&self) -> bool {
        self.terms.keys().all(|t| self.term_cusps(t).is_some())
    }

    /// Text form: first line n, then `coef v0;v1;…` with cusp vectors.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for (t, c) in &self.terms {
            let cusps = self.term_cusps(t).expect("cuspidal chain");
            s.push_str(&format!("{} {}", c, cone_text(&cusps)));
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Chain, ChainError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(ChainError::Parse { line: 1, reason: "missing header".into() })?;
        let n: usize =
            header.trim().parse().map_err(|_| ChainError::Parse { line: 1, reason: "bad dimension".into() })?;
        let mut chain = Chain::new(n);
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| ChainError::Parse { line: i + 1, reason };
            let (coef, cone) = line.split_once(char::is_whitespace).ok_or_else(|| err("missing cone".into()))?;
            let coef: Int = coef.parse().map_err(|e: num::bigint::ParseBigIntError| err(e.to_string()))?;
            let cusps = crate::cones::parse_cone(cone.trim(), n).map_err(err)?;
            if cusps.iter().any(|v| v.iter().all(|x| x.is_zero())) {
                return Err(err("zero vector".into()));
            }
            chain.add_cusps(&cusps, &coef);
        }
        Ok(chain)
    }
}

fn cone_text(vs: &[Vec<Int>]) -> String {
    vs.iter().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect::<Vec<_>>().join(";")
}

/// Sum of the primitive rays of a term.
pub fn ray_sum(term: &[Vec<Int>]) -> Vec<Int> {
    let mut s = vec![Int::zero(); term[0].len()];
    for r in term {
        for (a, b) in s.iter_mut().zip(r) {
            *a += b;
        }
    }
    s
}

/// Whether the cone lies in the closed cone minus its interior: its ray sum
/// (hence every point of it) is singular.
pub fn is_boundary_cone(n: usize, term: &[Vec<Int>]) -> bool {
    !SymForm::from_int_vec(n, &ray_sum(term)).is_positive_definite()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelativeCycleTag {
    pub is_cycle: bool,
    /// Canonical faces that fail to cancel, with their leftover coefficients.
    pub offending: Vec<(Term, Int)>,
}

/// Γ-orbit canonical form of a cone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Canonical {
    /// The cone lies in the boundary.
    Boundary,
    /// Its Γ-stabilizer reverses orientation, so it vanishes over Q.
    Killed,
    /// The canonical sorted term and the orientation sign relative to it.
    Rep(Term, i32),
}

/// A Γ-frame of a cone: δ ∈ Γ carrying it to its canonical term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub delta: IntMatrix,
    pub term: Term,
    pub sign: i32,
    /// An orientation-reversing element of Γ fixes the cone.
    pub killed: bool,
    /// Some element of Γ other than ±1 fixes the canonical term.
    pub stabilized: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub cell_type: usize,
    pub degree: usize,
    /// Canonical point of P^{n-1}(Z/N) of the coset.
    pub point: Vec<u64>,
    /// γ_c with ℓ(γ_c) equal to `point`; the cell is γ_c σ_t.
    pub gamma: IntMatrix,
    /// Cusps γ_c r in the type's ray order (the cell's orientation).
    pub cusps: Vec<Vec<Int>>,
    /// Some stabilizer element in Γ reverses the orientation.
    pub killed: bool,
}

struct TypeTable {
    perms: Vec<Vec<usize>>,
    /// For each point of P^{n-1}(Z/N): the cell index and a stabilizer index h
    /// with h⁻¹ℓ canonical.
    lookup: Vec<(usize, usize)>,
}

/// The Voronoi cells meeting the interior, modulo Γ₀(N), with the relative
/// boundary maps.
pub struct VoronoiComplex {
    pub group: ArithmeticGroup,
    data: &'static VoronoiFanData,
    ps: ProjectiveSpace,
    oracle: Oracle,
    pub cells: Vec<Cell>,
    tables: Vec<TypeTable>,
    /// Live (not killed) cells per degree, as indices into `cells`.
    live: BTreeMap<usize, Vec<usize>>,
    position: HashMap<usize, usize>,
    /// ∂_k with rows indexed by live (k-1)-cells and columns by live k-cells.
    boundaries: BTreeMap<usize, IntMatrix>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComplexSummary {
    pub n: usize,
    pub level: u64,
    pub cells_per_degree: BTreeMap<usize, usize>,
    pub killed_per_degree: BTreeMap<usize, usize>,
    pub boundary_matrices: BTreeMap<usize, Vec<Vec<String>>>,
}

impl VoronoiComplex {
    pub fn build(group: &ArithmeticGroup) -> Result<Self, ChainError> {
        let n = group.n;
        let data = VoronoiFanData::standard(n).map_err(OracleError::from)?;
        let ps = group.projective_space();
        let oracle = Oracle::new(n)?;
        let mut cells = Vec::new();
        let mut tables = Vec::new();
        for (t, ty) in data.types.iter().enumerate() {
            let stab_inv: Vec<IntMatrix> =
                ty.stabilizer.iter().map(|(h, _)| h.inverse().expect("unimodular")).collect();
            let perm_sign: Vec<i32> = ty.stabilizer.iter().map(|(_, p)| permutation_sign(p)).collect();
            let perms: Vec<Vec<usize>> = ty.stabilizer.iter().map(|(_, p)| p.clone()).collect();
            let mut lookup = vec![(usize::MAX, 0usize); ps.points.len()];
            let mut canon_cell: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
            for (pi, p) in ps.points.iter().enumerate() {
                let images: Vec<Vec<u64>> = stab_inv.iter().map(|hi| ps.act(hi, p)).collect();
                let (hk, canon) = images.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).expect("stabilizer nonempty");
                let cell = *canon_cell.entry(canon.clone()).or_insert_with(|| {
                    let gamma = ps.coset_rep(canon);
                    let cusps = ty.face.iter().map(|&i| model::act_cusp(&gamma, &data.rays[i])).collect();
                    let killed = stab_inv
                        .iter()
                        .enumerate()
                        .any(|(k, hi)| perm_sign[k] < 0 && ps.act(hi, canon) == *canon);
                    cells.push(Cell {
                        cell_type: t,
                        degree: ty.face.len() - 1,
                        point: canon.clone(),
                        gamma,
                        cusps,
                        killed,
                    });
                    cells.len() - 1
                });
                lookup[pi] = (cell, hk);
            }
            tables.push(TypeTable { perms, lookup });
        }
        let mut live: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, c) in cells.iter().enumerate() {
            if !c.killed {
                live.entry(c.degree).or_default().push(i);
            }
        }
        let mut position = HashMap::new();
        for list in live.values() {
            for (p, &c) in list.iter().enumerate() {
                position.insert(c, p);
            }
        }
        let mut complex =
            VoronoiComplex { group: group.clone(), data, ps, oracle, cells, tables, live, position, boundaries: BTreeMap::new() };
        complex.build_boundaries();
        Ok(complex)
    }

    pub fn n(&self) -> usize {
        self.group.n
    }

    pub fn data(&self) -> &'static VoronoiFanData {
        self.data
    }

    pub fn oracle(&self) -> &Oracle {
        &self.oracle
    }

    pub fn live_cells(&self, degree: usize) -> &[usize] {
        self.live.get(&degree).map_or(&[], |v| v.as_slice())
    }

    pub fn boundary_matrix(&self, degree: usize) -> IntMatrix {
        self.boundaries.get(&degree).cloned().unwrap_or_else(|| {
            let rows = if degree == 0 { 0 } else { self.live_cells(degree - 1).len() };
            IntMatrix::zeros(rows, self.live_cells(degree).len())
        })
    }

    pub fn summary(&self) -> ComplexSummary {
        let mut cells_per_degree = BTreeMap::new();
        let mut killed_per_degree = BTreeMap::new();
        for c in &self.cells {
            *cells_per_degree.entry(c.degree).or_insert(0) += 1;
            if c.killed {
                *killed_per_degree.entry(c.degree).or_insert(0) += 1;
            }
        }
        let boundary_matrices = self
            .boundaries
            .iter()
            .map(|(k, m)| (*k, m.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()))
            .collect();
        ComplexSummary { n: self.n(), level: self.group.level, cells_per_degree, killed_per_degree, boundary_matrices }
    }

    /// Identifies the oriented cone whose i-th cusp is ±γ r_{t,π(i)} (positions
    /// in the type's face order). Returns the live cell position and the sign,
    /// or None for a killed cell.
    pub fn identify(&self, gamma: &IntMatrix, t: usize, ordered: &[Vec<Int>]) -> Option<(usize, usize, i32)> {
        let ty = &self.data.types[t];
        let images: Vec<Vec<Int>> = ty.face.iter().map(|&i| model::act_cusp(gamma, &self.data.rays[i])).collect();
        let pi: Vec<usize> = ordered
            .iter()
            .map(|c| images.iter().position(|x| x == c).expect("ordered cusps match the cell"))
            .collect();
        let gi = gamma.inverse().expect("unimodular");
        let point = self.ps.point_of(&gi);
        let (cell, hk) = self.tables[t].lookup[self.ps.index_of(&point)];
        if self.cells[cell].killed {
            return None;
        }
        // i-th cusp is ±(γh) r_{perm_h⁻¹(π(i))}
        let perm = &self.tables[t].perms[hk];
        let mut inv = vec![0usize; perm.len()];
        for (a, &b) in perm.iter().enumerate() {
            inv[b] = a;
        }
        let composed: Vec<usize> = pi.iter().map(|&j| inv[j]).collect();
        let sign = permutation_sign(&composed);
        Some((self.cells[cell].degree, self.position[&cell], sign))
    }

    fn build_boundaries(&mut self) {
        let degrees: Vec<usize> = self.live.keys().copied().collect();
        for k in degrees {
            if k == 0 {
                continue;
            }
            let rows = self.live_cells(k - 1).len();
            let cols = self.live_cells(k).to_vec();
            let mut m = IntMatrix::zeros(rows, cols.len());
            for (col, &ci) in cols.iter().enumerate() {
                let cell = &self.cells[ci];
                let face = &self.data.types[cell.cell_type].face;
                for drop in 0..face.len() {
                    let sub: Vec<usize> = face.iter().enumerate().filter(|&(j, _)| j != drop).map(|(_, &f)| f).collect();
                    let info = self.data.face_info(&sub).expect("face of the standard cone");
                    if !info.interior {
                        continue;
                    }
                    let t2 = info.cell_type.expect("interior face has a type");
                    let g = cell.gamma.mul(info.g.as_ref().expect("interior face has g"));
                    let ordered: Vec<Vec<Int>> =
                        sub.iter().map(|&i| model::act_cusp(&cell.gamma, &self.data.rays[i])).collect();
                    if let Some((_, row, sign)) = self.identify(&g, t2, &ordered) {
                        let s = if drop % 2 == 0 { sign } else { -sign };
                        let v = m.get(row, col) + int(s as i64);
                        m.set(row, col, v);
                    }
                }
            }
            self.boundaries.insert(k, m);
        }
    }

    /// The cell vector of a Voronoi chain: every term must be a Voronoi cone
    /// (its cusps equal S of its barycenter). Boundary terms are dropped.
    pub fn cell_vector(&self, chain: &Chain, degree: usize) -> Result<Vec<Int>, ChainError> {
        let mut v = vec![Int::zero(); self.live_cells(degree).len()];
        for (term, coef) in chain.terms() {
            if term.len() != degree + 1 {
                return Err(ChainError::NotVoronoi(term.clone()));
            }
            let cusps = chain.term_cusps(term).ok_or_else(|| ChainError::NotVoronoi(term.clone()))?;
            let sum = ray_sum(term);
            let ans = self.oracle.reduce(&SymForm::from_int_vec(self.n(), &sum))?;
            let set: BTreeSet<Vec<Int>> = cusps.iter().cloned().collect();
            if ans.cusps != set || set.len() != term.len() {
                return Err(ChainError::NotVoronoi(term.clone()));
            }
            let info = self.data.face_info(&ans.face).expect("face of the standard cone");
            if !info.interior {
                continue;
            }
            let t = info.cell_type.expect("typed");
            let g = ans.gamma.mul(info.g.as_ref().expect("interior"));
            if let Some((_, pos, sign)) = self.identify(&g, t, &cusps) {
                v[pos] += coef * int(sign as i64);
            }
        }
        Ok(v)
    }

    /// Whether every term is a Voronoi cone.
    pub fn is_voronoi_chain(&self, chain: &Chain) -> bool {
        chain.terms().all(|(term, _)| self.is_voronoi_cone(chain.n(), term))
    }

    pub fn is_voronoi_cone(&self, n: usize, term: &Term) -> bool {
        let Some(cusps) = term.iter().map(|r| model::cusp_from_ray(n, r)).collect::<Option<Vec<_>>>() else {
            return false;
        };
        let set: BTreeSet<Vec<Int>> = cusps.into_iter().collect();
        self.oracle
            .reduce(&SymForm::from_int_vec(n, &ray_sum(term)))
            .map(|a| a.cusps == set && set.len() == term.len())
            .unwrap_or(false)
    }

    /// The chain of a cell vector, using each cell's oriented cusps.
    pub fn chain_of(&self, v: &[Int], degree: usize) -> Chain {
        let mut c = Chain::new(self.n());
        for (pos, coef) in v.iter().enumerate() {
            if !coef.is_zero() {
                let cell = &self.cells[self.live_cells(degree)[pos]];
                c.add_cusps(&cell.cusps, coef);
            }
        }
        c
    }

    /// Γ-orbit canonical representative of an arbitrary cone with the given
    /// primitive rays (in orientation order).
    pub fn canonical_rep(&self, rays: &[Vec<Int>]) -> Result<Canonical, ChainError> {
        Ok(match self.canonical_frame(rays)? {
            None => Canonical::Boundary,
            Some(f) if f.killed => Canonical::Killed,
            Some(f) => Canonical::Rep(f.term, f.sign),
        })
    }

    /// Like [`Self::canonical_rep`], also returning δ ∈ Γ with δ·cone equal to
    /// the canonical term. None for boundary cones.
    pub fn canonical_frame(&self, rays: &[Vec<Int>]) -> Result<Option<Frame>, ChainError> {
        let n = self.n();
        let sum = ray_sum(rays);
        let form = SymForm::from_int_vec(n, &sum);
        if !form.is_positive_definite() {
            return Ok(None);
        }
        let ans = self.oracle.reduce(&form)?;
        let info = self.data.face_info(&ans.face).expect("face of the standard cone");
        let t = info.cell_type.expect("positive definite point lies in an interior face");
        let gamma = ans.gamma.mul(info.g.as_ref().expect("interior"));
        let gi = gamma.inverse().expect("unimodular");
        let (cell, _) = self.tables[t].lookup[self.ps.index_of(&self.ps.point_of(&gi))];
        let gc = &self.cells[cell].gamma;
        let mut best: Option<Frame> = None;
        for (h, _) in &self.data.types[t].stabilizer {
            let delta = gc.mul(h).mul(&gi);
            if !self.group.contains(&delta) {
                continue;
            }
            let a = action_matrix(&delta);
            let moved: Vec<Vec<Int>> = rays.iter().map(|r| linalg::primitive_int(&a.mul_vec(r))).collect();
            let (term, sign) = sort_term(moved).expect("distinct rays stay distinct");
            match &mut best {
                Some(b) if b.term == term => {
                    if b.sign != sign {
                        b.killed = true;
                    }
                    if delta != b.delta && delta != b.delta.neg() {
                        b.stabilized = true;
                    }
                }
                Some(b) if b.term < term => {}
                _ => best = Some(Frame { delta, term, sign, killed: false, stabilized: false }),
            }
        }
        Ok(Some(best.expect("some translate lands on the canonical cell")))
    }

    /// Boundary faces of ξ lying in the interior must cancel modulo Γ.
    pub fn is_relative_cycle(&self, chain: &Chain) -> Result<RelativeCycleTag, ChainError> {
        let mut acc: BTreeMap<Term, Int> = BTreeMap::new();
        for (face, coef) in chain.boundary().terms() {
            match self.canonical_rep(face)? {
                Canonical::Rep(term, sign) => {
                    *acc.entry(term).or_default() += coef * int(sign as i64);
                }
                Canonical::Boundary | Canonical::Killed => {}
            }
        }
        let offending: Vec<(Term, Int)> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(RelativeCycleTag { is_cycle: offending.is_empty(), offending })
    }

    /// Canonical Γ-orbit form of a chain over Q: a map from canonical terms to
    /// coefficients, boundary and killed terms dropped.
    pub fn orbit_reduce(&self, chain: &Chain) -> Result<BTreeMap<Term, Int>, ChainError> {
        let mut acc: BTreeMap<Term, Int> = BTreeMap::new();
        for (term, coef) in chain.terms() {
            if let Canonical::Rep(t, sign) = self.canonical_rep(term)? {
                *acc.entry(t).or_default() += coef * int(sign as i64);
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(acc)
    }

    /// Relative homology over Q in `degree`, with integral torsion when no
    /// cell involved is killed.
    pub fn homology(&self, degree: usize, relative: bool) -> Result<HomologyPresentation, ChainError> {
        if !relative {
            return Err(ChainError::Unsupported);
        }
        let dk = self.boundary_matrix(degree);
        let dk1 = self.boundary_matrix(degree + 1);
        let cols = self.live_cells(degree).len();
        let z = if dk.rows() == 0 {
            (0..cols)
                .map(|i| {
                    let mut e = vec![Rat::zero(); cols];
                    e[i] = Rat::one();
                    e
                })
                .collect()
        } else {
            dk.to_rat().nullspace()
        };
        let mut basis_cols: Vec<Vec<Rat>> = Vec::new();
        let b_rank = {
            let bcols: Vec<Vec<Rat>> = (0..dk1.cols()).map(|j| linalg::to_rat_vec(&dk1.col(j))).collect();
            for c in bcols {
                let mut trial = basis_cols.clone();
                trial.push(c.clone());
                if linalg::rank_of(&trial) > basis_cols.len() {
                    basis_cols = trial;
                }
            }
            basis_cols.len()
        };
        let mut cycles: Vec<Vec<Int>> = Vec::new();
        for zc in z {
            let mut trial = basis_cols.clone();
            trial.push(zc.clone());
            if linalg::rank_of(&trial) > basis_cols.len() {
                basis_cols = trial;
                cycles.push(linalg::primitive(&zc));
            }
        }
        let rank = cycles.len();
        let expression = if basis_cols.is_empty() {
            RatMatrix::zeros(0, cols)
        } else {
            let m = RatMatrix::from_columns(&basis_cols);
            let mt = m.transpose();
            let left = mt.mul(&m).inverse().expect("full column rank").mul(&mt);
            let rows: Vec<Vec<Rat>> = (b_rank..basis_cols.len()).map(|i| left.row(i).to_vec()).collect();
            if rows.is_empty() {
                RatMatrix::zeros(0, cols)
            } else {
                RatMatrix::from_rows(&rows)
            }
        };
        let any_killed = self
            .cells
            .iter()
            .any(|c| c.killed && (c.degree == degree || c.degree == degree + 1 || c.degree + 1 == degree));
        let torsion = if any_killed {
            None
        } else {
            let (s, _, _) = linalg::snf(&dk1);
            Some(linalg::snf_diagonal(&s).into_iter().filter(|d| d > &Int::one()).collect())
        };
        let basis_chains = cycles.iter().map(|c| self.chain_of(c, degree)).collect();
        Ok(HomologyPresentation { degree, rank, torsion, cycles, basis_chains, expression })
    }
}

/// Relative homology in one degree with a chosen basis of cycles.
#[derive(Debug, Clone, Serialize)]
pub struct HomologyPresentation {
    pub degree: usize,
    pub rank: usize,
    /// Integral torsion divisors, when computable.
    pub torsion: Option<Vec<Int>>,
    /// Basis cycles as primitive integer cell vectors.
    pub cycles: Vec<Vec<Int>>,
    #[serde(skip)]
    pub basis_chains: Vec<Chain>,
    /// Cycle cell vector ↦ coordinates in the basis; boundaries map to zero.
    #[serde(skip)]
    pub expression: RatMatrix,
}

impl HomologyPresentation {
    pub fn express(&self, v: &[Int]) -> Vec<Rat> {
        self.expression.mul_vec(&linalg::to_rat_vec(v))
    }

    pub fn lift(&self, i: usize) -> &Chain {
        &self.basis_chains[i]
    }

    /// Coordinates of the class of a Voronoi relative cycle.
    pub fn project(&self, complex: &VoronoiComplex, chain: &Chain) -> Result<Vec<Rat>, ChainError> {
        let v = complex.cell_vector(chain, self.degree)?;
        let d = complex.boundary_matrix(self.degree);
        if d.rows() > 0 && !d.mul_vec(&v).iter().all(|x| x.is_zero()) {
            return Err(ChainError::NotACycle);
        }
        Ok(self.express(&v))
    }
}
