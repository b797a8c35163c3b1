//! Pointed rational polyhedral cones, simplicial fans and their subdivisions.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, primitive, rank_of, rat, Int, Rat, RatMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConeError {
    #[error("cone generator is the zero vector")]
    ZeroGenerator,
    #[error("cone is degenerate")]
    DegenerateCone,
    #[error("constraint set is not a subfan")]
    NotASubfan,
    #[error("cone is not in the fan")]
    NotInFan,
    #[error("malformed fan text at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// An ordered tuple of nonzero generators. The order carries orientation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointedCone {
    generators: Vec<Vec<Rat>>,
    span_dim: usize,
}

impl PointedCone {
    pub fn new(generators: Vec<Vec<Rat>>) -> Result<Self, ConeError> {
        if generators.iter().any(|g| g.iter().all(|x| x.is_zero())) {
            return Err(ConeError::ZeroGenerator);
        }
        let span_dim = rank_of(&generators);
        Ok(PointedCone { generators, span_dim })
    }

    pub fn from_int(generators: &[Vec<Int>]) -> Result<Self, ConeError> {
        Self::new(generators.iter().map(|g| linalg::to_rat_vec(g)).collect())
    }

    pub fn generators(&self) -> &[Vec<Rat>] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn span_dim(&self) -> usize {
        self.span_dim
    }

    pub fn is_degenerate(&self) -> bool {
        self.span_dim < self.generators.len()
    }

    /// Primitive integer vector on each generator's ray, in tuple order.
    pub fn rays(&self) -> Vec<Vec<Int>> {
        self.generators.iter().map(|g| primitive(g)).collect()
    }

    /// The spanning rays R(σ): primitive generators of the extreme rays.
    pub fn spanning_rays(&self) -> BTreeSet<Vec<Int>> {
        extreme_ray_indices(&self.generators).into_iter().map(|i| primitive(&self.generators[i])).collect()
    }

    pub fn is_simplicial(&self) -> bool {
        !self.is_degenerate()
    }

    /// Cone equality is equality of spanning-ray sets.
    pub fn same_cone(&self, other: &PointedCone) -> bool {
        self.spanning_rays() == other.spanning_rays()
    }

    /// Primitive vector on the ray through the sum of the primitive generators.
    pub fn barycenter_ray(&self) -> Result<Vec<Int>, ConeError> {
        if self.is_degenerate() {
            return Err(ConeError::DegenerateCone);
        }
        let dim = self.generators[0].len();
        let mut sum = vec![Int::zero(); dim];
        for r in self.rays() {
            for (s, x) in sum.iter_mut().zip(r) {
                *s += x;
            }
        }
        Ok(linalg::primitive_int(&sum))
    }
}

/// Facets of the pointed cone generated by `rays`, as sorted index sets of the
/// rays lying on each facet. A one-dimensional cone has the single facet `{}`.
pub fn cone_facets(rays: &[Vec<Rat>]) -> Vec<Vec<usize>> {
    let coords = span_coordinates(rays);
    let d = coords.first().map_or(0, |c| c.len());
    if d <= 1 {
        return vec![vec![]];
    }
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
    for subset in combinations(rays.len(), d - 1) {
        let rows: Vec<Vec<Rat>> = subset.iter().map(|&i| coords[i].clone()).collect();
        let m = RatMatrix::from_rows(&rows);
        let ns = m.nullspace();
        if ns.len() != 1 {
            continue;
        }
        let normal = &ns[0];
        let vals: Vec<Rat> = coords.iter().map(|c| linalg::dot_rat(c, normal)).collect();
        let nonneg = vals.iter().all(|v| !v.is_negative());
        let nonpos = vals.iter().all(|v| !v.is_positive());
        if nonneg || nonpos {
            out.insert((0..rays.len()).filter(|&i| vals[i].is_zero()).collect());
        }
    }
    out.into_iter().collect()
}

/// Indices of the generators lying on extreme rays (first occurrence of each ray).
pub fn extreme_ray_indices(rays: &[Vec<Rat>]) -> Vec<usize> {
    let prims: Vec<Vec<Int>> = rays.iter().map(|r| primitive(r)).collect();
    let mut first: Vec<usize> = Vec::new();
    for i in 0..rays.len() {
        if !first.iter().any(|&j| prims[j] == prims[i]) {
            first.push(i);
        }
    }
    let d = rank_of(rays);
    if d <= 1 {
        return first.into_iter().take(1).collect();
    }
    let facets = cone_facets(rays);
    first
        .into_iter()
        .filter(|&i| {
            let containing: Vec<&Vec<usize>> = facets.iter().filter(|f| f.contains(&i)).collect();
            // The face cut out by these facets must be the ray through i alone.
            (0..rays.len()).all(|j| prims[j] == prims[i] || !containing.iter().all(|f| f.contains(&j)))
                && !containing.is_empty()
        })
        .collect()
}

/// Extreme rays of `{λ : a·λ >= 0 for every constraint a}` (assumed pointed),
/// as primitive vectors in lexicographic order.
pub fn extreme_rays_of_hrep(constraints: &[Vec<Rat>], dim: usize) -> Vec<Vec<Int>> {
    let mut out: BTreeSet<Vec<Int>> = BTreeSet::new();
    if dim == 0 {
        return vec![];
    }
    for subset in combinations(constraints.len(), dim - 1) {
        let rows: Vec<Vec<Rat>> = subset.iter().map(|&i| constraints[i].clone()).collect();
        let ns = if rows.is_empty() {
            if dim == 1 {
                vec![vec![rat(1)]]
            } else {
                continue;
            }
        } else {
            RatMatrix::from_rows(&rows).nullspace()
        };
        if ns.len() != 1 {
            continue;
        }
        let r = &ns[0];
        let vals: Vec<Rat> = constraints.iter().map(|a| linalg::dot_rat(a, r)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            out.insert(primitive(r));
        } else if vals.iter().all(|v| !v.is_positive()) {
            let neg: Vec<Rat> = r.iter().map(|x| -x).collect();
            out.insert(primitive(&neg));
        }
    }
    if dim == 1 && constraints.is_empty() {
        out.insert(vec![Int::one()]);
    }
    out.into_iter().collect()
}

/// Coordinates of each vector in a basis of their span chosen among them.
fn span_coordinates(rays: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    if rays.is_empty() {
        return vec![];
    }
    let m = RatMatrix::from_columns(rays);
    let (_, pivots) = m.rref();
    let basis: Vec<Vec<Rat>> = pivots.iter().map(|&p| rays[p].clone()).collect();
    rays.iter().map(|r| linalg::solve_in_ray_basis(&basis, r).expect("vector lies in the span")).collect()
}

/// All k-subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Pulling triangulation (no new rays) of the cone on `rays`, pulling the
/// vertices in increasing `priority`. Returns index sets of simplicial cones.
///
/// The restriction to any face is the pulling triangulation of that face for
/// the same priority, so triangulating the cones of a fan one by one with a
/// global priority yields a fan.
pub fn pulling_triangulation(rays: &[Vec<Rat>], priority: &[usize]) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..rays.len()).collect();
    let mut out = pull_rec(rays, &all, priority);
    for s in out.iter_mut() {
        s.sort_unstable();
    }
    out.sort();
    out
}

fn pull_rec(rays: &[Vec<Rat>], subset: &[usize], priority: &[usize]) -> Vec<Vec<usize>> {
    let sub: Vec<Vec<Rat>> = subset.iter().map(|&i| rays[i].clone()).collect();
    let d = rank_of(&sub);
    if subset.len() == d {
        return vec![subset.to_vec()];
    }
    let apex_pos = (0..subset.len()).min_by_key(|&p| priority[subset[p]]).expect("nonempty face");
    let apex = subset[apex_pos];
    let mut out = Vec::new();
    for facet in cone_facets(&sub) {
        if facet.contains(&apex_pos) {
            continue;
        }
        let face: Vec<usize> = facet.iter().map(|&p| subset[p]).collect();
        for mut s in pull_rec(rays, &face, priority) {
            s.push(apex);
            out.push(s);
        }
    }
    out
}

/// A finite fan of simplicial cones. Vertices carry a realizing point; each
/// cone is a sorted list of vertex indices and all faces are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    dim: usize,
    points: Vec<Vec<Rat>>,
    cones: Vec<Vec<usize>>,
}

impl Fan {
    pub fn new(dim: usize) -> Self {
        Fan { dim, points: Vec::new(), cones: Vec::new() }
    }

    /// Fan of a single simplicial cone and its faces.
    pub fn from_cone(cone: &PointedCone) -> Self {
        let dim = cone.generators().first().map_or(0, |g| g.len());
        let mut fan = Fan::new(dim);
        let idx: Vec<usize> = cone.generators().iter().map(|g| fan.add_point(g.clone())).collect();
        fan.add_cone(idx);
        fan
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<Rat>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[Rat] {
        &self.points[i]
    }

    /// Maximal cones.
    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn ray(&self, i: usize) -> Vec<Int> {
        primitive(&self.points[i])
    }

    pub fn vertex_of_ray(&self, ray: &[Int]) -> Option<usize> {
        self.points.iter().position(|q| primitive(q) == ray)
    }

    /// Adds a vertex, reusing an existing one on the same ray.
    pub fn add_point(&mut self, p: Vec<Rat>) -> usize {
        let r = primitive(&p);
        if let Some(i) = self.points.iter().position(|q| primitive(q) == r) {
            return i;
        }
        self.points.push(p);
        self.points.len() - 1
    }

    /// Adds a maximal cone, dropping any existing cone it contains.
    pub fn add_cone(&mut self, mut idx: Vec<usize>) {
        idx.sort_unstable();
        idx.dedup();
        if self.cones.iter().any(|c| is_subset(&idx, c)) {
            return;
        }
        self.cones.retain(|c| !is_subset(c, &idx));
        self.cones.push(idx);
        self.cones.sort();
    }

    /// Every cone of the fan (all nonempty faces of the maximal cones).
    pub fn faces(&self) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        for c in &self.cones {
            for k in 1..=c.len() {
                for s in combinations(c.len(), k) {
                    out.insert(s.iter().map(|&i| c[i]).collect());
                }
            }
        }
        out
    }

    pub fn contains_cone(&self, cone: &[usize]) -> bool {
        let mut c = cone.to_vec();
        c.sort_unstable();
        self.cones.iter().any(|m| is_subset(&c, m))
    }

    /// Indices of vertices that are actually used by some cone.
    pub fn used_vertices(&self) -> BTreeSet<usize> {
        self.cones.iter().flatten().copied().collect()
    }

    pub fn cone_generators(&self, cone: &[usize]) -> Vec<Vec<Rat>> {
        cone.iter().map(|&i| self.points[i].clone()).collect()
    }

    /// Barycenter of a cone in the unit-sum realization: the average of its points.
    pub fn barycenter(&self, cone: &[usize]) -> Vec<Rat> {
        average(&self.cone_generators(cone))
    }

    /// Simplicial cones of the fan whose dimension is `d`.
    pub fn cones_of_dim(&self, d: usize) -> Vec<Vec<usize>> {
        self.faces().into_iter().filter(|c| c.len() == d).collect()
    }

    /// Stellar subdivision at the cone `s` using `point` as the star point.
    pub fn stellar_at(&mut self, s: &[usize], point: Vec<Rat>) -> usize {
        let b = self.add_point(point);
        let mut s = s.to_vec();
        s.sort_unstable();
        let (touched, kept): (Vec<Vec<usize>>, Vec<Vec<usize>>) =
            std::mem::take(&mut self.cones).into_iter().partition(|c| is_subset(&s, c));
        self.cones = kept;
        for t in touched {
            for v in &s {
                let mut c: Vec<usize> = t.iter().copied().filter(|x| x != v).collect();
                c.push(b);
                c.sort_unstable();
                self.cones.push(c);
            }
        }
        self.cones.sort();
        self.cones.dedup();
        b
    }

    /// The fan axioms for a simplicial fan supported on the cone `support`
    /// (given by generators): every top cone is simplicial, every
    /// codimension-one face lies in at most two top cones, interior ones in
    /// exactly two, and the unit-sum volumes add up to the volume of `support`.
    pub fn is_triangulation_of(&self, support: &[Vec<Rat>]) -> bool {
        let k = support.len();
        let mut total = Rat::zero();
        let mut facet_count: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut coords: BTreeMap<usize, Vec<Rat>> = BTreeMap::new();
        for &v in &self.used_vertices() {
            let Ok(c) = linalg::solve_in_ray_basis(support, &self.points[v]) else {
                return false;
            };
            if c.iter().any(|x| x.is_negative()) {
                return false;
            }
            let s = c.iter().fold(Rat::zero(), |a, b| a + b);
            coords.insert(v, c.iter().map(|x| x / &s).collect());
        }
        for c in &self.cones {
            if c.len() != k {
                return false;
            }
            let m = RatMatrix::from_columns(&c.iter().map(|v| coords[v].clone()).collect::<Vec<_>>());
            let vol = m.det().abs();
            if vol.is_zero() {
                return false;
            }
            total += vol;
            for skip in 0..c.len() {
                let f: Vec<usize> = c.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
                *facet_count.entry(f).or_default() += 1;
            }
        }
        if total != Rat::one() {
            return false;
        }
        facet_count.iter().all(|(f, &n)| {
            let on_boundary = (0..k).any(|j| f.iter().all(|v| coords[v][j].is_zero()));
            if on_boundary {
                n == 1
            } else {
                n == 2
            }
        })
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

pub fn average(points: &[Vec<Rat>]) -> Vec<Rat> {
    let dim = points[0].len();
    let mut sum = vec![Rat::zero(); dim];
    for p in points {
        for (s, x) in sum.iter_mut().zip(p) {
            *s += x;
        }
    }
    let n = rat(points.len() as i64);
    sum.into_iter().map(|x| x / &n).collect()
}

/// The k+1 cones obtained by replacing one generator by the barycenter ray.
pub fn stellar_subdivide(sigma: &PointedCone) -> Result<Fan, ConeError> {
    if sigma.is_degenerate() {
        return Err(ConeError::DegenerateCone);
    }
    let mut fan = Fan::from_cone(sigma);
    if sigma.len() == 1 {
        return Ok(fan);
    }
    let all: Vec<usize> = (0..sigma.len()).collect();
    let b = sigma.barycenter_ray()?;
    fan.stellar_at(&all, linalg::to_rat_vec(&b));
    Ok(fan)
}

/// Barycentric subdivision of a simplicial fan, simplex by simplex.
pub fn barycentric_subdivide(fan: &Fan) -> Fan {
    relative_barycentric_subdivide(fan, &BTreeSet::new()).expect("empty constraint is a subfan")
}

/// The stellar cascade executed top-down over the original simplices of
/// `fan`, skipping every simplex of `constraint`.
pub fn relative_barycentric_subdivide(fan: &Fan, constraint: &BTreeSet<Vec<usize>>) -> Result<Fan, ConeError> {
    let faces = fan.faces();
    for c in constraint {
        if !faces.contains(c) {
            return Err(ConeError::NotASubfan);
        }
        for k in 1..c.len() {
            for s in combinations(c.len(), k) {
                let sub: Vec<usize> = s.iter().map(|&i| c[i]).collect();
                if !constraint.contains(&sub) {
                    return Err(ConeError::NotASubfan);
                }
            }
        }
    }
    let mut order: Vec<Vec<usize>> = faces.into_iter().filter(|c| c.len() >= 2 && !constraint.contains(c)).collect();
    order.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let mut out = fan.clone();
    for s in order {
        let p = fan.barycenter(&s);
        out.stellar_at(&s, p);
    }
    Ok(out)
}

/// Iterates [`relative_barycentric_subdivide`] `i` times; the constraint
/// subfan is left untouched at every step.
pub fn relative_barycentric_iterate(fan: &Fan, constraint: &BTreeSet<Vec<usize>>, i: usize) -> Result<Fan, ConeError> {
    let mut cur = fan.clone();
    for _ in 0..i {
        cur = relative_barycentric_subdivide(&cur, constraint)?;
    }
    Ok(cur)
}

/// Refines a fan of possibly non-simplicial cones into a simplicial fan with
/// the same rays, pulling vertices in lexicographic order of primitive rays.
pub fn simplicial_refine_no_new_rays(cones: &[Vec<Vec<Rat>>]) -> Fan {
    let dim = cones.iter().flatten().next().map_or(0, |g| g.len());
    let mut fan = Fan::new(dim);
    let mut all: Vec<Vec<Int>> = cones.iter().flatten().map(|g| primitive(g)).collect();
    all.sort();
    all.dedup();
    for cone in cones {
        let ext = extreme_ray_indices(cone);
        let rays: Vec<Vec<Rat>> = ext.iter().map(|&i| cone[i].clone()).collect();
        let priority: Vec<usize> =
            rays.iter().map(|r| all.binary_search(&primitive(r)).expect("ray recorded")).collect();
        for simplex in pulling_triangulation(&rays, &priority) {
            let idx: Vec<usize> = simplex.iter().map(|&i| fan.add_point(rays[i].clone())).collect();
            fan.add_cone(idx);
        }
    }
    fan
}

/// Open star of a cone in a fan: the union of the relative interiors of the
/// cones containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpenStar {
    pub base: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl OpenStar {
    pub fn contains_cone(&self, cone: &[usize]) -> bool {
        let mut c = cone.to_vec();
        c.sort_unstable();
        self.members.contains(&c)
    }

    /// Whether `x` lies in the relative interior of some member.
    pub fn contains_point(&self, fan: &Fan, x: &[Rat]) -> bool {
        self.members.iter().any(|m| {
            linalg::solve_in_ray_basis(&fan.cone_generators(m), x)
                .map(|c| c.iter().all(|v| v.is_positive()))
                .unwrap_or(false)
        })
    }
}

pub fn open_star(sigma: &[usize], fan: &Fan) -> Result<OpenStar, ConeError> {
    let mut base = sigma.to_vec();
    base.sort_unstable();
    if !fan.contains_cone(&base) {
        return Err(ConeError::NotInFan);
    }
    let members = fan.faces().into_iter().filter(|c| is_subset(&base, c)).collect();
    Ok(OpenStar { base, members })
}

/// The open cover by open stars of all cones of the fan.
pub fn open_cover(fan: &Fan) -> Vec<OpenStar> {
    fan.faces().into_iter().map(|c| open_star(&c, fan).expect("face of the fan")).collect()
}

/// Writes cones in the exchange format: a header with the ambient dimension,
/// then one cone per line as `;`-separated, `,`-separated integer vectors.
pub fn write_fan_text(dim: usize, cones: &[Vec<Vec<Int>>]) -> String {
    let mut s = format!("{}\n", dim);
    for cone in cones {
        let parts: Vec<String> =
            cone.iter().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")).collect();
        s.push_str(&parts.join(";"));
        s.push('\n');
    }
    s
}

/// Cones given by their integer generators.
pub type IntCones = Vec<Vec<Vec<Int>>>;

pub fn parse_fan_text(text: &str) -> Result<(usize, IntCones), ConeError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ConeError::Parse { line: 1, reason: "missing header".into() })?;
    let dim: usize =
        header.trim().parse().map_err(|_| ConeError::Parse { line: 1, reason: "bad dimension".into() })?;
    let mut cones = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cone = parse_cone(line, dim).map_err(|reason| ConeError::Parse { line: i + 1, reason })?;
        cones.push(cone);
    }
    Ok((dim, cones))
}

pub fn parse_cone(line: &str, dim: usize) -> Result<Vec<Vec<Int>>, String> {
    line.split(';')
        .map(|v| {
            let vec: Result<Vec<Int>, String> =
                v.split(',').map(|x| x.trim().parse::<Int>().map_err(|e| e.to_string())).collect();
            let vec = vec?;
            if vec.len() != dim {
                return Err(format!("expected {} entries, got {}", dim, vec.len()));
            }
            Ok(vec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int_vec, ratio};

    fn rv(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| rat(x)).collect()
    }

    fn factorial(k: usize) -> usize {
        (1..=k).product()
    }

    fn simplex(k: usize) -> PointedCone {
        let gens = (0..=k)
            .map(|i| {
                let mut v = vec![rat(0); k + 1];
                v[i] = rat(1);
                v
            })
            .collect();
        PointedCone::new(gens).unwrap()
    }

    #[test]
    fn spanning_rays_examples() {
        let c = PointedCone::new(vec![rv(&[2, 0]), rv(&[0, 3])]).unwrap();
        assert_eq!(c.spanning_rays(), [int_vec(&[1, 0]), int_vec(&[0, 1])].into_iter().collect());
        let c = PointedCone::new(vec![rv(&[1, 0]), rv(&[0, 1]), vec![ratio(5, 2), ratio(5, 2)]]).unwrap();
        assert_eq!(c.spanning_rays(), [int_vec(&[1, 0]), int_vec(&[0, 1])].into_iter().collect());
        let c = PointedCone::new(vec![rv(&[4, 6])]).unwrap();
        assert_eq!(c.spanning_rays(), [int_vec(&[2, 3])].into_iter().collect());
    }

    #[test]
    fn simplicial_examples() {
        assert!(simplex(2).is_simplicial());
        assert!(!PointedCone::new(vec![rv(&[1, 0]), rv(&[0, 1]), rv(&[1, 1])]).unwrap().is_simplicial());
        assert!(!PointedCone::new(vec![rv(&[1, 0]), rv(&[2, 0])]).unwrap().is_simplicial());
        assert_eq!(PointedCone::new(vec![rv(&[0, 0])]), Err(ConeError::ZeroGenerator));
    }

    #[test]
    fn barycenter_ray_examples() {
        let c = PointedCone::new(vec![rv(&[1, 0]), rv(&[0, 1])]).unwrap();
        assert_eq!(c.barycenter_ray().unwrap(), int_vec(&[1, 1]));
        let c = PointedCone::new(vec![rv(&[2, 0]), rv(&[0, 2])]).unwrap();
        assert_eq!(c.barycenter_ray().unwrap(), int_vec(&[1, 1]));
        // q(e1) and q(e2) in (x11, x22, x12) coordinates sum to the identity form
        let c = PointedCone::new(vec![rv(&[1, 0, 0]), rv(&[0, 1, 0])]).unwrap();
        assert_eq!(c.barycenter_ray().unwrap(), int_vec(&[1, 1, 0]));
    }

    #[test]
    fn stellar_examples() {
        let f = stellar_subdivide(&simplex(1)).unwrap();
        assert_eq!(f.cones().len(), 2);
        let rays: BTreeSet<Vec<Int>> = f.used_vertices().iter().map(|&v| f.ray(v)).collect();
        assert!(rays.contains(&int_vec(&[1, 1])));
        assert_eq!(stellar_subdivide(&simplex(2)).unwrap().cones().len(), 3);
        assert_eq!(stellar_subdivide(&simplex(0)).unwrap().cones().len(), 1);
    }

    #[test]
    fn barycentric_counts() {
        for k in 0..=4 {
            let f = barycentric_subdivide(&Fan::from_cone(&simplex(k)));
            assert_eq!(f.cones().len(), factorial(k + 1), "k = {}", k);
            assert!(f.is_triangulation_of(simplex(k).generators()));
        }
    }

    #[test]
    fn barycentric_two_cones_sharing_a_ray() {
        let mut fan = Fan::new(2);
        let a = fan.add_point(rv(&[1, 0]));
        let b = fan.add_point(rv(&[1, 1]));
        let c = fan.add_point(rv(&[0, 1]));
        fan.add_cone(vec![a, b]);
        fan.add_cone(vec![b, c]);
        let sub = barycentric_subdivide(&fan);
        assert_eq!(sub.cones().len(), 4);
    }

    #[test]
    fn relative_with_constrained_edge() {
        let fan = Fan::from_cone(&simplex(2));
        let constraint: BTreeSet<Vec<usize>> = [vec![0], vec![1], vec![0, 1]].into_iter().collect();
        let one = relative_barycentric_iterate(&fan, &constraint, 1).unwrap();
        let two = relative_barycentric_iterate(&fan, &constraint, 2).unwrap();
        for f in [&one, &two] {
            assert!(f.is_triangulation_of(simplex(2).generators()));
            // the constrained edge is still a cone and gained no vertex
            assert!(f.contains_cone(&[0, 1]));
            for v in f.used_vertices() {
                let p = f.point(v);
                if p[2].is_zero() {
                    assert!(v == 0 || v == 1);
                }
            }
        }
        // star point plus the two free edges: 1 + 2 new vertices
        assert_eq!(one.used_vertices().len(), 6);
        assert_eq!(one.cones().len(), 5);
    }

    #[test]
    fn relative_with_all_proper_faces() {
        let fan = Fan::from_cone(&simplex(2));
        let constraint: BTreeSet<Vec<usize>> =
            fan.faces().into_iter().filter(|c| c.len() < 3).collect();
        let one = relative_barycentric_subdivide(&fan, &constraint).unwrap();
        assert_eq!(one.used_vertices().len(), 4);
        assert_eq!(one.cones().len(), 3);
        let bad: BTreeSet<Vec<usize>> = [vec![0, 1]].into_iter().collect();
        assert_eq!(relative_barycentric_subdivide(&fan, &bad), Err(ConeError::NotASubfan));
    }

    #[test]
    fn refine_square_cone() {
        let square = vec![rv(&[1, 0, 1]), rv(&[0, 1, 1]), rv(&[-1, 0, 1]), rv(&[0, -1, 1])];
        let f = simplicial_refine_no_new_rays(std::slice::from_ref(&square));
        assert_eq!(f.cones().len(), 2);
        // pulled from the lexicographically smallest ray (-1,0,1): the diagonal uses it
        let diag = f.vertex_of_ray(&int_vec(&[-1, 0, 1])).unwrap();
        assert!(f.cones().iter().all(|c| c.contains(&diag)));
        assert_eq!(f.used_vertices().len(), 4);
    }

    #[test]
    fn refine_prism_cone() {
        let prism = vec![
            rv(&[0, 0, 1, 1]),
            rv(&[1, 0, 0, 1]),
            rv(&[0, 1, 0, 1]),
            rv(&[0, 0, 1, 2]),
            rv(&[1, 0, 0, 2]),
            rv(&[0, 1, 0, 2]),
        ];
        let f = simplicial_refine_no_new_rays(&[prism]);
        assert_eq!(f.cones().len(), 3);
    }

    #[test]
    fn refine_keeps_simplicial() {
        let f = simplicial_refine_no_new_rays(&[simplex(2).generators().to_vec()]);
        assert_eq!(f.cones().len(), 1);
    }

    #[test]
    fn open_star_examples() {
        let mut fan = Fan::new(2);
        let a = fan.add_point(rv(&[1, 0]));
        let b = fan.add_point(rv(&[1, 1]));
        let c = fan.add_point(rv(&[0, 1]));
        fan.add_cone(vec![a, b]);
        fan.add_cone(vec![b, c]);
        let top = open_star(&[a, b], &fan).unwrap();
        assert_eq!(top.members, vec![vec![a, b]]);
        let ray = open_star(&[b], &fan).unwrap();
        assert_eq!(ray.members.len(), 3);
        assert!(ray.contains_point(&fan, &rv(&[2, 1])));
        assert!(ray.contains_point(&fan, &rv(&[1, 1])));
        assert!(!ray.contains_point(&fan, &rv(&[1, 0])));
        assert!(top.members.iter().all(|m| ray.contains_cone(m)));
        assert_eq!(open_star(&[a, c], &fan), Err(ConeError::NotInFan));
        assert_eq!(open_cover(&fan).len(), 5);
    }

    #[test]
    fn fan_text_round_trip() {
        let cones = vec![
            vec![int_vec(&[1, 0, 0]), int_vec(&[0, 1, 0]), int_vec(&[1, 1, 1])],
            vec![int_vec(&[-3, 7, 12])],
        ];
        let text = write_fan_text(3, &cones);
        let (dim, back) = parse_fan_text(&text).unwrap();
        assert_eq!(dim, 3);
        assert_eq!(back, cones);
        assert_eq!(write_fan_text(dim, &back), text);
        assert!(parse_fan_text("3\n1,2\n").is_err());
    }
}
