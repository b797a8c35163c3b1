//! The cone of positive-definite symmetric n×n matrices (n = 2, 3), its cusps,
//! rational boundary components, standard Voronoi data and Γ₀(N).

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num::integer::Integer;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, int, rat, Int, IntMatrix, Rat, RatMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("zero vector has no cusp")]
    ZeroVector,
    #[error("form lies outside the closed cone")]
    OutsideCone,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("unsupported rank {0}; only n = 2 and n = 3 are implemented")]
    UnsupportedRank(usize),
    #[error("level must be positive")]
    BadLevel,
}

pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Matrix positions of the vec coordinates: the diagonal first, then the
/// upper off-diagonal entries in lexicographic order.
pub fn sym_positions(n: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// A symmetric rational matrix stored as its vec coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymForm {
    n: usize,
    v: Vec<Rat>,
}

impl SymForm {
    pub fn from_vec(n: usize, v: Vec<Rat>) -> Self {
        assert_eq!(v.len(), sym_dim(n), "vec length");
        SymForm { n, v }
    }

    pub fn from_int_vec(n: usize, v: &[Int]) -> Self {
        Self::from_vec(n, linalg::to_rat_vec(v))
    }

    pub fn from_matrix(m: &RatMatrix) -> Self {
        let n = m.rows();
        let v = sym_positions(n).into_iter().map(|(i, j)| m.get(i, j).clone()).collect();
        SymForm { n, v }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        Self::from_matrix(&IntMatrix::from_rows(rows).to_rat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vec(&self) -> &[Rat] {
        &self.v
    }

    pub fn to_matrix(&self) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.n, self.n);
        for (k, (i, j)) in sym_positions(self.n).into_iter().enumerate() {
            m.set(i, j, self.v[k].clone());
            m.set(j, i, self.v[k].clone());
        }
        m
    }

    /// The trace pairing tr(P x).
    pub fn pairing(&self, other: &SymForm) -> Rat {
        trace_pairing(self.n, &self.v, &other.v)
    }

    pub fn rank(&self) -> usize {
        self.to_matrix().rank()
    }

    pub fn is_positive_definite(&self) -> bool {
        let m = self.to_matrix();
        (1..=self.n).all(|k| leading_minor(&m, k).is_positive())
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        let m = self.to_matrix();
        (1..(1usize << self.n)).all(|mask| {
            let idx: Vec<usize> = (0..self.n).filter(|i| mask & (1 << i) != 0).collect();
            !principal_minor(&m, &idx).is_negative()
        })
    }

    pub fn act(&self, g: &IntMatrix) -> SymForm {
        let a = action_matrix(g).to_rat();
        SymForm { n: self.n, v: a.mul_vec(&self.v) }
    }
}

pub fn trace_pairing(n: usize, a: &[Rat], b: &[Rat]) -> Rat {
    let two = rat(2);
    let mut s = Rat::zero();
    for k in 0..a.len() {
        if k < n {
            s += &a[k] * &b[k];
        } else {
            s += &two * &a[k] * &b[k];
        }
    }
    s
}

fn leading_minor(m: &RatMatrix, k: usize) -> Rat {
    principal_minor(m, &(0..k).collect::<Vec<_>>())
}

fn principal_minor(m: &RatMatrix, idx: &[usize]) -> Rat {
    let rows: Vec<Vec<Rat>> = idx.iter().map(|&i| idx.iter().map(|&j| m.get(i, j).clone()).collect()).collect();
    RatMatrix::from_rows(&rows).det()
}

/// vec(v vᵗ) as an integer vector.
pub fn rank_one_vec(v: &[Int]) -> Vec<Int> {
    sym_positions(v.len()).into_iter().map(|(i, j)| &v[i] * &v[j]).collect()
}

pub fn rank_one_form(v: &[Int]) -> Result<SymForm, ModelError> {
    if v.iter().all(|x| x.is_zero()) {
        return Err(ModelError::ZeroVector);
    }
    Ok(SymForm::from_int_vec(v.len(), &rank_one_vec(v)))
}

/// Primitive, sign-normalized representative of the line through `v`.
pub fn cusp_of(v: &[Int]) -> Result<Vec<Int>, ModelError> {
    if v.iter().all(|x| x.is_zero()) {
        return Err(ModelError::ZeroVector);
    }
    Ok(linalg::sign_normalize(&linalg::primitive_int(v)))
}

/// Recovers the cusp vector from an integer vec on the ray of a rank-one form.
pub fn cusp_from_ray(n: usize, ray: &[Int]) -> Option<Vec<Int>> {
    let form = SymForm::from_int_vec(n, ray);
    if form.rank() != 1 || !form.is_positive_semidefinite() {
        return None;
    }
    let m = form.to_matrix();
    let col = (0..n).find(|&j| !m.get(j, j).is_zero())?;
    cusp_of(&linalg::primitive(&m.col(col))).ok()
}

/// The d×d integer matrix of x ↦ g x gᵗ on vec coordinates.
pub fn action_matrix(g: &IntMatrix) -> IntMatrix {
    let n = g.rows();
    let pos = sym_positions(n);
    let d = pos.len();
    let mut out = IntMatrix::zeros(d, d);
    for (k, &(a, b)) in pos.iter().enumerate() {
        for (r, &(i, j)) in pos.iter().enumerate() {
            // entry (i, j) of g E g^t with E = e_a e_b^t (+ e_b e_a^t off the diagonal)
            let mut v = g.get(i, a) * g.get(j, b);
            if a != b {
                v += g.get(i, b) * g.get(j, a);
            }
            out.set(r, k, v);
        }
    }
    out
}

/// g·v for a cusp, normalized again.
pub fn act_cusp(g: &IntMatrix, v: &[Int]) -> Vec<Int> {
    cusp_of(&g.mul_vec(v)).expect("nonsingular action")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryComponent {
    /// Saturated basis of the common kernel.
    pub kernel: Vec<Vec<Int>>,
    /// Saturated basis of the lattice orthogonal to the kernel.
    pub support: Vec<Vec<Int>>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointClass {
    Interior,
    ProperBoundary(BoundaryComponent),
    Outside,
}

pub fn boundary_component(x: &SymForm) -> BoundaryComponent {
    let n = x.n();
    let m = x.to_matrix();
    let scaled = scale_to_int(&m);
    let kernel = linalg::integer_kernel(&scaled);
    let support = if kernel.is_empty() {
        (0..n)
            .map(|i| {
                let mut e = vec![Int::zero(); n];
                e[i] = Int::one();
                e
            })
            .collect()
    } else {
        linalg::integer_kernel(&IntMatrix::from_int_rows(&kernel))
    };
    BoundaryComponent { rank: n - kernel.len(), kernel, support }
}

fn scale_to_int(m: &RatMatrix) -> IntMatrix {
    let mut l = Int::one();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            l = l.lcm(m.get(i, j).denom());
        }
    }
    let data = (0..m.rows())
        .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
        .map(|(i, j)| (m.get(i, j) * Rat::from_integer(l.clone())).to_integer())
        .collect();
    IntMatrix::new(m.rows(), m.cols(), data)
}

pub fn classify_point(x: &SymForm) -> PointClass {
    if x.vec().iter().all(|c| c.is_zero()) || !x.is_positive_semidefinite() {
        return PointClass::Outside;
    }
    if x.is_positive_definite() {
        return PointClass::Interior;
    }
    PointClass::ProperBoundary(boundary_component(x))
}

pub fn q_rank(x: &SymForm) -> Result<usize, ModelError> {
    match classify_point(x) {
        PointClass::Outside => Err(ModelError::OutsideCone),
        _ => Ok(x.rank()),
    }
}

/// Exact LLL reduction (δ = 3/4) of a positive-definite Gram matrix; returns
/// U ∈ GL_n(Z) with Uᵗ g U reduced.
pub fn lll_gram(g: &RatMatrix) -> IntMatrix {
    let n = g.rows();
    let mut u = IntMatrix::identity(n);
    let delta = linalg::ratio(3, 4);
    let half = linalg::ratio(1, 2);
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        assert!(guard < 100_000, "LLL did not terminate");
        for j in (0..k).rev() {
            let (mu, _) = gram_schmidt(&gram_of(g, &u));
            let r = (&mu[k][j] + &half).floor().to_integer();
            if !r.is_zero() {
                for i in 0..n {
                    let v = u.get(i, k) - &r * u.get(i, j);
                    u.set(i, k, v);
                }
            }
        }
        let (mu, b) = gram_schmidt(&gram_of(g, &u));
        if b[k] < (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1] {
            for i in 0..n {
                let t = u.get(i, k).clone();
                let s = u.get(i, k - 1).clone();
                u.set(i, k, s);
                u.set(i, k - 1, t);
            }
            k = if k > 1 { k - 1 } else { 1 };
        } else {
            k += 1;
        }
    }
    u
}

fn gram_of(g: &RatMatrix, u: &IntMatrix) -> RatMatrix {
    let ur = u.to_rat();
    ur.transpose().mul(g).mul(&ur)
}

fn gram_schmidt(g: &RatMatrix) -> (Vec<Vec<Rat>>, Vec<Rat>) {
    let n = g.rows();
    let mut mu = vec![vec![Rat::zero(); n]; n];
    let mut b = vec![Rat::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g.get(i, j).clone();
            for k in 0..j {
                s -= &mu[j][k] * &mu[i][k] * &b[k];
            }
            mu[i][j] = s / &b[j];
        }
        let mut s = g.get(i, i).clone();
        for k in 0..i {
            s -= &mu[i][k] * &mu[i][k] * &b[k];
        }
        b[i] = s;
    }
    (mu, b)
}

/// All γ ∈ SL_n(Z) carrying the set of lines `src` onto the set of lines `dst`
/// (vectors compared up to sign). `src` must span Qⁿ.
pub fn maps_between(src: &[Vec<i64>], dst: &[Vec<i64>]) -> Vec<IntMatrix> {
    let n = src[0].len();
    if src.len() != dst.len() {
        return vec![];
    }
    let basis = independent_subset(src, n);
    let Some(basis) = basis else { return vec![] };
    let s_cols: Vec<Vec<i64>> = basis.iter().map(|&i| src[i].clone()).collect();
    let s = mat_from_cols_i64(&s_cols);
    let det_s = det_i64(&s);
    let adj = adjugate_i64(&s);
    let dst_set: BTreeSet<Vec<i64>> = dst.iter().map(|v| norm_i64(v)).collect();
    let mut out: BTreeSet<Vec<Vec<i64>>> = BTreeSet::new();
    for choice in injections(dst.len(), n) {
        for signs in 0..(1u32 << n) {
            let d_cols: Vec<Vec<i64>> = choice
                .iter()
                .enumerate()
                .map(|(k, &j)| {
                    let sg = if signs & (1 << k) != 0 { -1 } else { 1 };
                    dst[j].iter().map(|x| sg * x).collect()
                })
                .collect();
            let d = mat_from_cols_i64(&d_cols);
            let prod = mul_i64(&d, &adj);
            if prod.iter().flatten().any(|x| x % det_s != 0) {
                continue;
            }
            let g: Vec<Vec<i64>> = prod.iter().map(|r| r.iter().map(|x| x / det_s).collect()).collect();
            if det_i64(&g) != 1 {
                continue;
            }
            let image: BTreeSet<Vec<i64>> = src.iter().map(|v| norm_i64(&mul_vec_i64(&g, v))).collect();
            if image == dst_set {
                out.insert(g);
            }
        }
    }
    out.into_iter().map(|g| IntMatrix::from_rows(&g)).collect()
}

fn independent_subset(vs: &[Vec<i64>], n: usize) -> Option<Vec<usize>> {
    for subset in crate::cones::combinations(vs.len(), n) {
        let cols: Vec<Vec<i64>> = subset.iter().map(|&i| vs[i].clone()).collect();
        if det_i64(&mat_from_cols_i64(&cols)) != 0 {
            return Some(subset);
        }
    }
    None
}

fn injections(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..m {
            if !cur.contains(&i) {
                cur.push(i);
                rec(m, k, cur, out);
                cur.pop();
            }
        }
    }
    rec(m, k, &mut cur, &mut out);
    out
}

pub(crate) fn norm_i64(v: &[i64]) -> Vec<i64> {
    let g = v.iter().fold(0i64, |a, &b| a.gcd(&b));
    let mut w: Vec<i64> = v.iter().map(|x| if g == 0 { *x } else { x / g }).collect();
    if w.iter().find(|x| **x != 0).is_some_and(|x| *x < 0) {
        for x in w.iter_mut() {
            *x = -*x;
        }
    }
    w
}

fn mat_from_cols_i64(cols: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = cols[0].len();
    (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
}

fn mul_i64(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let m = b[0].len();
    (0..n).map(|i| (0..m).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn mul_vec_i64(a: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn det_i64(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => unreachable!("n <= 3"),
    }
}

fn adjugate_i64(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    let mut adj = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<i64>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c]).collect())
                .collect();
            let s = if (i + j) % 2 == 0 { 1 } else { -1 };
            adj[i][j] = s * det_i64(&minor);
        }
    }
    adj
}

/// An SL_n(Z)-class of faces of the standard cone meeting the interior.
#[derive(Debug, Clone)]
pub struct CellType {
    /// Representative face, as increasing indices into the standard rays.
    pub face: Vec<usize>,
    /// Stabilizer of the representative, each with its action on the face's
    /// rays: `h r_i = ± r_{perm[i]}` (positions within `face`).
    pub stabilizer: Vec<(IntMatrix, Vec<usize>)>,
}

/// A face of the standard cone together with g_f mapping its type's
/// representative onto it.
#[derive(Debug, Clone)]
pub struct FaceInfo {
    pub face: Vec<usize>,
    pub interior: bool,
    pub cell_type: Option<usize>,
    pub g: Option<IntMatrix>,
}

/// The standard Voronoi top cone with walk and cell data.
#[derive(Debug, Clone)]
pub struct VoronoiFanData {
    pub n: usize,
    /// Cusp vectors of the standard rays.
    pub rays: Vec<Vec<Int>>,
    /// vec(q(r)) for each ray.
    pub ray_vecs: Vec<Vec<Int>>,
    /// Inverse of the matrix whose columns are `ray_vecs`.
    pub coords: RatMatrix,
    /// Perfect form dual to the standard cone.
    pub perfect: SymForm,
    /// Per facet j (opposite ray j): γ_j with γ_j σ₀ the neighbor across it.
    pub neighbors: Vec<IntMatrix>,
    /// Wall normals: row j of `coords`, as vectors on vec coordinates.
    pub walls: Vec<Vec<Rat>>,
    pub types: Vec<CellType>,
    pub faces: Vec<FaceInfo>,
}

impl VoronoiFanData {
    pub fn standard(n: usize) -> Result<&'static VoronoiFanData, ModelError> {
        static N2: OnceLock<VoronoiFanData> = OnceLock::new();
        static N3: OnceLock<VoronoiFanData> = OnceLock::new();
        match n {
            2 => Ok(N2.get_or_init(|| build_standard(2))),
            3 => Ok(N3.get_or_init(|| build_standard(3))),
            _ => Err(ModelError::UnsupportedRank(n)),
        }
    }

    pub fn dim(&self) -> usize {
        self.ray_vecs.len()
    }

    /// Coordinates of a vec point in the ray basis of the standard cone.
    pub fn coordinates(&self, x: &[Rat]) -> Vec<Rat> {
        self.coords.mul_vec(x)
    }

    pub fn face_info(&self, face: &[usize]) -> Option<&FaceInfo> {
        self.faces.iter().find(|f| f.face == face)
    }

    pub fn ray_i64(&self, i: usize) -> Vec<i64> {
        self.rays[i].iter().map(|x| x.to_i64().expect("small")).collect()
    }
}

fn standard_rays(n: usize) -> Vec<Vec<i64>> {
    match n {
        2 => vec![vec![1, 0], vec![0, 1], vec![1, 1]],
        3 => vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, -1, 0], vec![1, 0, -1], vec![0, 1, -1]],
        _ => unreachable!(),
    }
}

fn standard_perfect(n: usize) -> Vec<Vec<i64>> {
    match n {
        2 => vec![vec![2, -1], vec![-1, 2]],
        3 => vec![vec![2, 1, 1], vec![1, 2, 1], vec![1, 1, 2]],
        _ => unreachable!(),
    }
}

/// Every n×n matrix with entries in {-1, 0, 1} and determinant 1.
fn small_sl(n: usize) -> Vec<Vec<Vec<i64>>> {
    let total = 3usize.pow((n * n) as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut m = vec![vec![0i64; n]; n];
        for row in m.iter_mut() {
            for x in row.iter_mut() {
                *x = (c % 3) as i64 - 1;
                c /= 3;
            }
        }
        if det_i64(&m) == 1 {
            out.push(m);
        }
    }
    out
}

fn build_standard(n: usize) -> VoronoiFanData {
    let rays_i64 = standard_rays(n);
    let rays: Vec<Vec<Int>> = rays_i64.iter().map(|r| linalg::int_vec(r)).collect();
    let ray_vecs: Vec<Vec<Int>> = rays.iter().map(|r| rank_one_vec(r)).collect();
    let m0 = RatMatrix::from_columns(&ray_vecs.iter().map(|v| linalg::to_rat_vec(v)).collect::<Vec<_>>());
    let coords = m0.inverse().expect("standard cone is simplicial");
    let perfect = SymForm::from_rows(&standard_perfect(n));
    let d = ray_vecs.len();
    let walls: Vec<Vec<Rat>> = (0..d).map(|j| coords.row(j).to_vec()).collect();

    let ray_set: Vec<Vec<i64>> = rays_i64.iter().map(|r| norm_i64(r)).collect();
    let candidates = small_sl(n);
    let mut neighbors = Vec::new();
    for j in 0..d {
        let keep: BTreeSet<Vec<i64>> = (0..d).filter(|&i| i != j).map(|i| ray_set[i].clone()).collect();
        let found = candidates.iter().find(|g| {
            let image: Vec<Vec<i64>> = rays_i64.iter().map(|r| norm_i64(&mul_vec_i64(g, r))).collect();
            let image_set: BTreeSet<Vec<i64>> = image.iter().cloned().collect();
            if !keep.is_subset(&image_set) {
                return false;
            }
            let Some(new) = image.iter().find(|v| !keep.contains(*v)) else { return false };
            let c = coords.mul_vec(&linalg::to_rat_vec(&rank_one_vec(&linalg::int_vec(new))));
            c[j].is_negative()
        });
        let g = found.expect("neighbor certificate in the {-1,0,1} box");
        neighbors.push(IntMatrix::from_rows(g));
    }

    // faces meeting the interior and their SL_n(Z)-classes
    let mut faces: Vec<FaceInfo> = Vec::new();
    let mut types: Vec<CellType> = Vec::new();
    let mut all_faces: Vec<Vec<usize>> = (1..=d).flat_map(|k| crate::cones::combinations(d, k)).collect();
    all_faces.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    for face in all_faces {
        let mut sum = vec![Int::zero(); d];
        for &i in &face {
            for (s, x) in sum.iter_mut().zip(&ray_vecs[i]) {
                *s += x;
            }
        }
        let interior = SymForm::from_int_vec(n, &sum).is_positive_definite();
        if !interior {
            faces.push(FaceInfo { face, interior, cell_type: None, g: None });
            continue;
        }
        let dst: Vec<Vec<i64>> = face.iter().map(|&i| rays_i64[i].clone()).collect();
        let mut assigned = None;
        for (t, ty) in types.iter().enumerate() {
            if ty.face.len() != face.len() {
                continue;
            }
            let src: Vec<Vec<i64>> = ty.face.iter().map(|&i| rays_i64[i].clone()).collect();
            if let Some(g) = maps_between(&src, &dst).into_iter().next() {
                assigned = Some((t, g));
                break;
            }
        }
        let (t, g) = match assigned {
            Some(x) => x,
            None => {
                let stabilizer = maps_between(&dst, &dst)
                    .into_iter()
                    .map(|h| {
                        let perm = face_permutation(&h, &dst);
                        (h, perm)
                    })
                    .collect();
                types.push(CellType { face: face.clone(), stabilizer });
                (types.len() - 1, IntMatrix::identity(n))
            }
        };
        faces.push(FaceInfo { face, interior, cell_type: Some(t), g: Some(g) });
    }
    VoronoiFanData { n, rays, ray_vecs, coords, perfect, neighbors, walls, types, faces }
}

/// Positions π with h·v_i = ± v_{π(i)}.
pub(crate) fn face_permutation(h: &IntMatrix, vs: &[Vec<i64>]) -> Vec<usize> {
    let rows = h.to_i64_rows().expect("small entries");
    let normed: Vec<Vec<i64>> = vs.iter().map(|v| norm_i64(v)).collect();
    vs.iter()
        .map(|v| {
            let w = norm_i64(&mul_vec_i64(&rows, v));
            normed.iter().position(|u| *u == w).expect("h permutes the face")
        })
        .collect()
}

/// Voronoi data of a boundary component: the support basis completed to
/// SL_n(Z), and the standard data of the component's rank.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub component: BoundaryComponent,
    pub basis: IntMatrix,
    pub sub: Option<&'static VoronoiFanData>,
}

pub fn pi_face_in_boundary(c: &BoundaryComponent, n: usize) -> BoundaryData {
    let basis = linalg::complete_to_sl(&c.support, n).expect("support lattice is saturated");
    let sub = if c.rank >= 2 { Some(VoronoiFanData::standard(c.rank).expect("rank 2 or 3")) } else { None };
    BoundaryData { component: c.clone(), basis, sub }
}

/// Γ₀(N) ⊂ SL_n(Z): first column ≡ (*, 0, …, 0) mod N.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArithmeticGroup {
    pub n: usize,
    pub level: u64,
}

impl ArithmeticGroup {
    pub fn gamma0(n: usize, level: u64) -> Result<Self, ModelError> {
        if n != 2 && n != 3 {
            return Err(ModelError::UnsupportedRank(n));
        }
        if level == 0 {
            return Err(ModelError::BadLevel);
        }
        Ok(ArithmeticGroup { n, level })
    }

    pub fn contains(&self, g: &IntMatrix) -> bool {
        if g.rows() != self.n || g.cols() != self.n || g.det() != Int::one() {
            return false;
        }
        let nn = int(self.level as i64);
        (1..self.n).all(|i| (g.get(i, 0) % &nn).is_zero())
    }

    pub fn projective_space(&self) -> ProjectiveSpace {
        ProjectiveSpace::new(self.n, self.level)
    }
}

/// P^{n-1}(Z/N) with points normalized to the lexicographic minimum over unit
/// multiples.
#[derive(Debug, Clone)]
pub struct ProjectiveSpace {
    pub n: usize,
    pub modulus: u64,
    pub points: Vec<Vec<u64>>,
    units: Vec<u64>,
}

impl ProjectiveSpace {
    pub fn new(n: usize, modulus: u64) -> Self {
        let units: Vec<u64> = (1..=modulus.max(1)).filter(|u| u.gcd(&modulus) == 1).map(|u| u % modulus.max(1)).collect();
        let mut ps = ProjectiveSpace { n, modulus, points: Vec::new(), units };
        let total = (modulus as usize).pow(n as u32);
        let mut set = BTreeSet::new();
        for code in 0..total {
            let mut c = code;
            let mut v = vec![0u64; n];
            for x in v.iter_mut() {
                *x = (c % modulus as usize) as u64;
                c /= modulus as usize;
            }
            if v.iter().fold(modulus, |a, &b| a.gcd(&b)) == 1 {
                set.insert(ps.normalize_u(&v));
            }
        }
        ps.points = set.into_iter().collect();
        ps
    }

    fn normalize_u(&self, v: &[u64]) -> Vec<u64> {
        let m = self.modulus;
        if m == 1 {
            return vec![0; self.n];
        }
        self.units.iter().map(|u| v.iter().map(|x| (x * u) % m).collect::<Vec<u64>>()).min().expect("units nonempty")
    }

    /// Class of an integer vector whose entries are coprime to N jointly.
    pub fn normalize(&self, v: &[Int]) -> Vec<u64> {
        let nn = int(self.modulus as i64);
        let r: Vec<u64> = v.iter().map(|x| x.mod_floor(&nn).to_u64().expect("reduced")).collect();
        self.normalize_u(&r)
    }

    pub fn index_of(&self, p: &[u64]) -> usize {
        self.points.binary_search(&p.to_vec()).expect("normalized point")
    }

    /// ℓ(γ) = [γ⁻¹ e₁].
    pub fn point_of(&self, gamma_inv: &IntMatrix) -> Vec<u64> {
        self.normalize(&gamma_inv.col(0))
    }

    /// Action ℓ ↦ [h ℓ] for integer h.
    pub fn act(&self, h: &IntMatrix, p: &[u64]) -> Vec<u64> {
        let v: Vec<Int> = p.iter().map(|&x| int(x as i64)).collect();
        self.normalize(&h.mul_vec(&v))
    }

    /// An element γ ∈ SL_n(Z) with ℓ(γ) = p.
    pub fn coset_rep(&self, p: &[u64]) -> IntMatrix {
        let v = lift_primitive(p, self.modulus);
        let m = linalg::complete_to_sl(&[v], self.n).expect("primitive vector");
        m.inverse().expect("unimodular")
    }
}

/// A primitive integer vector congruent to `p` mod N.
fn lift_primitive(p: &[u64], modulus: u64) -> Vec<Int> {
    let n = p.len();
    let m = modulus as i64;
    let base: Vec<i64> = p.iter().map(|&x| x as i64).collect();
    if modulus == 1 {
        let mut e = vec![Int::zero(); n];
        e[0] = Int::one();
        return e;
    }
    for radius in 0i64.. {
        let width = (2 * radius + 1) as usize;
        for code in 0..width.pow(n as u32) {
            let mut c = code;
            let mut v = Vec::with_capacity(n);
            let mut on_shell = false;
            for &b in &base {
                let k = (c % width) as i64 - radius;
                c /= width;
                if k.abs() == radius {
                    on_shell = true;
                }
                v.push(b + k * m);
            }
            if !on_shell {
                continue;
            }
            if v.iter().fold(0i64, |a, &b| a.gcd(&b)) == 1 {
                return v.into_iter().map(int).collect();
            }
        }
    }
    unreachable!()
}
