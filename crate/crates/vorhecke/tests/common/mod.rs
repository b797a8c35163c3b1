//! Independent oracles shared by the integration tests. None of them use the
//! Voronoi machinery of the library.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeMap;

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

pub type Q = BigRational;

fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// Gauss–Lagrange reduction of the binary form [[a, b], [b, c]]: returns h in
/// SL₂(Z) with h x hᵗ in the standard top cone {x₁₂ ≥ 0, x₁₁ ≥ x₁₂, x₂₂ ≥ x₁₂}.
pub fn gauss_lagrange(a: i128, b: i128, c: i128) -> [[i128; 2]; 2] {
    let (mut a, mut b, mut c) = (a, b, c);
    let mut h = [[1i128, 0], [0, 1]];
    let mul = |m: [[i128; 2]; 2], h: [[i128; 2]; 2]| {
        let mut r = [[0i128; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = m[i][0] * h[0][j] + m[i][1] * h[1][j];
            }
        }
        r
    };
    loop {
        // row operation with [[1, 0], [k, 1]]: b ← b + k a
        let k = -(2 * b + a).div_euclid(2 * a);
        if k != 0 {
            let nb = b + k * a;
            c = c + 2 * k * b + k * k * a;
            b = nb;
            h = mul([[1, 0], [k, 1]], h);
        }
        if a > c {
            // [[0, 1], [-1, 0]]: (a, b, c) ← (c, -b, a)
            std::mem::swap(&mut a, &mut c);
            b = -b;
            h = mul([[0, 1], [-1, 0]], h);
            continue;
        }
        break;
    }
    if b < 0 {
        h = mul([[0, 1], [-1, 0]], h);
    }
    h
}

/// Cusps of the top cone found by Gauss–Lagrange: h⁻¹ applied to e₁, e₂, e₁+e₂.
pub fn gauss_cone_cusps(a: i128, b: i128, c: i128) -> Vec<Vec<i128>> {
    let h = gauss_lagrange(a, b, c);
    let inv = [[h[1][1], -h[0][1]], [-h[1][0], h[0][0]]];
    let mut out: Vec<Vec<i128>> = [[1i128, 0], [0, 1], [1, 1]]
        .iter()
        .map(|v| {
            let w = vec![inv[0][0] * v[0] + inv[0][1] * v[1], inv[1][0] * v[0] + inv[1][1] * v[1]];
            let first = w.iter().copied().find(|x| *x != 0).unwrap_or(1);
            if first < 0 {
                w.iter().map(|x| -x).collect()
            } else {
                w
            }
        })
        .collect();
    out.sort();
    out
}

/// Euler phi by trial division.
pub fn phi(n: u64) -> u64 {
    let mut r = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            while m.is_multiple_of(p) {
                m /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if m > 1 {
        r -= r / m;
    }
    r
}

fn prime_factors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m.is_multiple_of(p) {
            out.push(p);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Genus and number of cusps of X₀(N) from the classical formulas.
pub fn genus_and_cusps(n: u64) -> (i64, i64) {
    let index: Q = prime_factors(n).iter().fold(q(n as i64), |acc, &p| acc * (q(1) + Q::new(1.into(), (p as i64).into())));
    let count = |f: &dyn Fn(u64) -> u64| (0..n).filter(|&x| f(x).is_multiple_of(n)).count() as i64;
    let nu2 = if n.is_multiple_of(4) { 0 } else { count(&|x| x * x + 1) };
    let nu3 = if n.is_multiple_of(9) { 0 } else { count(&|x| x * x + x + 1) };
    let cusps: u64 = (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| phi(d.gcd(&(n / d)))).sum();
    let g = q(1) + index / q(12) - Q::new(nu2.into(), 4.into()) - Q::new(nu3.into(), 3.into())
        - Q::new((cusps as i64).into(), 2.into());
    assert!(g.is_integer());
    (g.to_integer().try_into().expect("small genus"), cusps as i64)
}

/// Dimension of H₁(X₀(N), cusps; Q) = 2g + c − 1.
pub fn relative_h1_rank(n: u64) -> usize {
    let (g, c) = genus_and_cusps(n);
    (2 * g + c - 1) as usize
}

/// Number of index-p sublattices of Zⁿ, counted as points of P^{n−1}(F_p).
pub fn sublattice_count(n: usize, p: u64) -> usize {
    let mut count = 0;
    let total = p.pow(n as u32);
    for code in 1..total {
        let digits: Vec<u64> = (0..n).map(|i| (code / p.pow(i as u32)) % p).collect();
        // normalized: last nonzero coordinate equals 1
        if digits.iter().rev().find(|&&d| d != 0) == Some(&1) {
            count += 1;
        }
    }
    count
}

/// Rational linear algebra for the Manin-symbol oracle.
fn rref(rows: &mut Vec<Vec<Q>>, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].clone().recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let pr = rows[r].clone();
                for (x, y) in rows[i].iter_mut().zip(&pr) {
                    *x = &*x - &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Weight-2 Manin symbols for Γ₀(N), N prime, over P¹(Z/N) with the
/// relations x + xS = 0 and x + xτ + xτ² = 0.
pub struct ManinSymbols {
    pub n: i64,
    pub points: Vec<(i64, i64)>,
    index: BTreeMap<(i64, i64), usize>,
    /// Reduced relation rows; free symbols give a basis of the quotient.
    relations: Vec<Vec<Q>>,
    pivots: Vec<usize>,
    pub free: Vec<usize>,
}

impl ManinSymbols {
    pub fn new(n: i64) -> Self {
        let mut points = vec![(1, 0)];
        points.extend((0..n).map(|d| (d, 1)));
        let index = points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut ms = ManinSymbols { n, points, index, relations: vec![], pivots: vec![], free: vec![] };
        let m = ms.points.len();
        let mut rows = Vec::new();
        for i in 0..m {
            let (c, d) = ms.points[i];
            let mut r = vec![q(0); m];
            r[i] += q(1);
            r[ms.idx(d, -c)] += q(1);
            rows.push(r);
            let mut r = vec![q(0); m];
            r[i] += q(1);
            let (c1, d1) = (d, -c - d);
            r[ms.idx(c1, d1)] += q(1);
            r[ms.idx(d1, -c1 - d1)] += q(1);
            rows.push(r);
        }
        let pivots = rref(&mut rows, m);
        ms.free = (0..m).filter(|c| !pivots.contains(c)).collect();
        ms.relations = rows;
        ms.pivots = pivots;
        ms
    }

    fn normalize(&self, c: i64, d: i64) -> (i64, i64) {
        let n = self.n;
        let (c, d) = (c.rem_euclid(n), d.rem_euclid(n));
        if d != 0 {
            let inv = modinv(d, n);
            ((c * inv).rem_euclid(n), 1)
        } else {
            (1, 0)
        }
    }

    fn idx(&self, c: i64, d: i64) -> usize {
        self.index[&self.normalize(c, d)]
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Coordinates of a symbol combination in the basis of free symbols.
    pub fn coords(&self, v: &[Q]) -> Vec<Q> {
        let mut v = v.to_vec();
        for (row, &p) in self.relations.iter().zip(&self.pivots) {
            if !v[p].is_zero() {
                let f = v[p].clone();
                for (x, y) in v.iter_mut().zip(row) {
                    *x = &*x - &f * y;
                }
            }
        }
        self.free.iter().map(|&i| v[i].clone()).collect()
    }

    /// {∞, a/b} as a symbol vector via continued-fraction convergents.
    fn path_from_infinity(&self, a: &BigInt, b: &BigInt, out: &mut [Q], sign: i64) {
        let (mut a, mut b) = (a.clone(), b.clone());
        if b.is_negative() {
            a = -a;
            b = -b;
        }
        if b.is_zero() {
            return;
        }
        let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
        let (mut p_pp, mut q_pp) = (BigInt::zero(), BigInt::one());
        let (mut x, mut y) = (a, b);
        while !y.is_zero() {
            let t = x.div_floor(&y);
            let p = &t * &p_prev + &p_pp;
            let qq = &t * &q_prev + &q_pp;
            // {p_prev/q_prev, p/qq} = g{0, ∞}, g = [[p, ±p_prev], [qq, ±q_prev]]
            let det = &p * &q_prev - &p_prev * &qq;
            let s: BigInt = if det.is_positive() { 1.into() } else { (-1).into() };
            let c = (&qq % BigInt::from(self.n)).try_into().unwrap_or(0i64);
            let d: i64 = ((&s * &q_prev) % BigInt::from(self.n)).try_into().unwrap_or(0);
            out[self.idx(c, d)] += q(sign);
            p_pp = std::mem::replace(&mut p_prev, p);
            q_pp = std::mem::replace(&mut q_prev, qq);
            let r = &x - &t * &y;
            x = std::mem::replace(&mut y, r);
        }
    }

    /// {r₁, r₂} for rationals given as (num, den), den may be 0 for ∞.
    fn between(&self, r1: (&BigInt, &BigInt), r2: (&BigInt, &BigInt), out: &mut [Q]) {
        self.path_from_infinity(r2.0, r2.1, out, 1);
        self.path_from_infinity(r1.0, r1.1, out, -1);
    }

    /// Matrix of T_p = Σ_s [s] over the given cosets, columns indexed by the
    /// free basis symbols.
    pub fn hecke_matrix(&self, cosets: &[[[i64; 2]; 2]]) -> Vec<Vec<Q>> {
        let m = self.points.len();
        let mut cols = Vec::new();
        for &f in &self.free {
            let (c, d) = self.points[f];
            let g = lift(c, d, self.n);
            let mut v = vec![q(0); m];
            for s in cosets {
                let h = [
                    [s[0][0] * g[0][0] + s[0][1] * g[1][0], s[0][0] * g[0][1] + s[0][1] * g[1][1]],
                    [s[1][0] * g[0][0] + s[1][1] * g[1][0], s[1][0] * g[0][1] + s[1][1] * g[1][1]],
                ];
                // h{0, ∞} = {h·0, h·∞} = {b/d, a/c}
                let (a, b, c, d) = (BigInt::from(h[0][0]), BigInt::from(h[0][1]), BigInt::from(h[1][0]), BigInt::from(h[1][1]));
                self.between((&b, &d), (&a, &c), &mut v);
            }
            cols.push(self.coords(&v));
        }
        let r = self.dim();
        (0..r).map(|i| (0..r).map(|j| cols[j][i].clone()).collect()).collect()
    }
}

fn modinv(a: i64, n: i64) -> i64 {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(n));
    let x: i64 = e.x.try_into().expect("small");
    x.rem_euclid(n)
}

/// g ∈ SL₂(Z) with bottom row ≡ (c, d) mod N.
fn lift(c: i64, d: i64, n: i64) -> [[i64; 2]; 2] {
    let (mut c, mut d) = (c, d);
    if c == 0 {
        c = n;
    }
    while num::integer::gcd(c, d) != 1 {
        d += n;
    }
    let e = BigInt::from(d).extended_gcd(&BigInt::from(c));
    // a d − b c = 1 with a = x, b = −y from x d + y c = 1
    let a: i64 = e.x.try_into().expect("small");
    let b: i64 = (-e.y).try_into().expect("small");
    [[a, b], [c, d]]
}

/// Characteristic polynomial det(xI − M), constant term first (Faddeev–LeVerrier).
pub fn charpoly(m: &[Vec<Q>]) -> Vec<Q> {
    let n = m.len();
    let mut coeffs = vec![q(0); n + 1];
    coeffs[n] = q(1);
    let mut mk = vec![vec![q(0); n]; n];
    let mul = |a: &[Vec<Q>], b: &[Vec<Q>]| -> Vec<Vec<Q>> {
        (0..n).map(|i| (0..n).map(|j| (0..n).fold(q(0), |s, k| s + &a[i][k] * &b[k][j])).collect()).collect()
    };
    for k in 1..=n {
        let mut next = mul(m, &mk);
        for i in 0..n {
            next[i][i] = &next[i][i] + &coeffs[n - k + 1];
        }
        let am = mul(m, &next);
        let tr = (0..n).fold(q(0), |s, i| s + &am[i][i]);
        coeffs[n - k] = -tr / q(k as i64);
        mk = next;
    }
    coeffs
}

/// Expands Π (x − rᵢ), constant term first.
pub fn poly_from_roots(roots: &[i64]) -> Vec<Q> {
    let mut p = vec![q(1)];
    for &r in roots {
        let mut next = vec![q(0); p.len() + 1];
        for (i, c) in p.iter().enumerate() {
            next[i + 1] += c.clone();
            next[i] -= c * q(r);
        }
        p = next;
    }
    p
}

/// a_p of the elliptic curve y² + y = x³ − x² − 10x − 20 by point counting.
pub fn ap_11a(p: i64) -> i64 {
    let mut affine = 0;
    for x in 0..p {
        for y in 0..p {
            let lhs = (y * y + y).rem_euclid(p);
            let rhs = (x * x * x - x * x - 10 * x - 20).rem_euclid(p);
            if lhs == rhs {
                affine += 1;
            }
        }
    }
    p + 1 - (affine + 1)
}

/// The classical cosets [[1, b], [0, p]] and [[p, 0], [0, 1]] for Γ₀(N), p ∤ N.
pub fn classical_cosets(p: i64) -> Vec<[[i64; 2]; 2]> {
    let mut out: Vec<[[i64; 2]; 2]> = (0..p).map(|b| [[1, b], [0, p]]).collect();
    out.push([[p, 0], [0, 1]]);
    out
}

fn sign_normalize(v: Vec<i128>) -> Vec<i128> {
    match v.iter().find(|x| **x != 0) {
        Some(x) if *x < 0 => v.iter().map(|x| -x).collect(),
        _ => v,
    }
}

fn to_i128(x: &BigInt) -> i128 {
    x.try_into().expect("fits in i128")
}

fn det_i128(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i128>> = m[1..].iter().map(|r| [&r[..j], &r[j + 1..]].concat()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det_i128(&minor)
        })
        .sum()
}

/// Checks an oracle answer for the integral form `x` without trusting the
/// library: γ is unimodular, the coordinates on γ·(standard rays) are
/// nonnegative, reproduce x, are positive exactly on the certified face, and
/// that face spans S(x). For a positive-definite x the walk potential must
/// strictly decrease.
pub fn check_certificate(
    data: &vorhecke::model::VoronoiFanData,
    x: &[Vec<i64>],
    a: &vorhecke::oracle::OracleAnswer,
) -> Result<(), String> {
    let n = x.len();
    let g: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| to_i128(a.gamma.get(i, j))).collect()).collect();
    if det_i128(&g) != 1 {
        return Err("γ is not in SL_n(Z)".into());
    }
    let mut sum = vec![vec![q(0); n]; n];
    let mut face_cusps = std::collections::BTreeSet::new();
    for (i, r) in data.rays.iter().enumerate() {
        let c = &a.coords[i];
        if c.is_negative() {
            return Err(format!("negative coordinate on ray {i}"));
        }
        if c.is_positive() != a.face.contains(&i) {
            return Err(format!("face disagrees with coordinate signs at ray {i}"));
        }
        let u: Vec<i128> = (0..n).map(|k| (0..n).map(|l| g[k][l] * to_i128(&r[l])).sum()).collect();
        for k in 0..n {
            for l in 0..n {
                sum[k][l] += c * Q::from_integer(BigInt::from(u[k] * u[l]));
            }
        }
        if c.is_positive() {
            face_cusps.insert(sign_normalize(u));
        }
    }
    for k in 0..n {
        for l in 0..n {
            if sum[k][l] != q(x[k][l]) {
                return Err("coordinates do not reproduce the form".into());
            }
        }
    }
    let cusps: std::collections::BTreeSet<Vec<i128>> =
        a.cusps.iter().map(|v| v.iter().map(to_i128).collect()).collect();
    if cusps != face_cusps {
        return Err("S(x) differs from the positive coordinate set".into());
    }
    if a.potentials.windows(2).any(|w| w[1] >= w[0]) {
        return Err("walk potential did not strictly decrease".into());
    }
    Ok(())
}

/// The form P₀ with P₀[r] = 1 on the standard rays is positive definite and
/// its minimal vectors are exactly ±(standard rays), found by enumeration.
pub fn standard_cone_is_perfect(rays: &[Vec<i64>]) -> bool {
    let n = rays[0].len();
    let pos: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let mut rows: Vec<Vec<Q>> = rays
        .iter()
        .map(|r| {
            let mut row: Vec<Q> = pos.iter().map(|&(i, j)| q(if i == j { r[i] * r[i] } else { 2 * r[i] * r[j] })).collect();
            row.push(q(1));
            row
        })
        .collect();
    let m = pos.len();
    let piv = rref(&mut rows, m + 1);
    if piv.len() != m || piv.contains(&m) {
        return false;
    }
    let mut p = vec![vec![q(0); n]; n];
    for (row, &c) in rows.iter().zip(&piv) {
        let (i, j) = pos[c];
        p[i][j] = row[m].clone();
        p[j][i] = row[m].clone();
    }
    let value = |v: &[i64]| -> Q {
        let mut s = q(0);
        for i in 0..n {
            for j in 0..n {
                s += &p[i][j] * q(v[i] * v[j]);
            }
        }
        s
    };
    let mut minimal = std::collections::BTreeSet::new();
    let range = 4i64;
    let total = (2 * range + 1).pow(n as u32);
    for code in 0..total {
        let v: Vec<i64> = (0..n).map(|i| (code / (2 * range + 1).pow(i as u32)) % (2 * range + 1) - range).collect();
        if v.iter().all(|x| *x == 0) {
            continue;
        }
        let val = value(&v);
        if val < q(1) {
            return false;
        }
        if val == q(1) {
            minimal.insert(sign_normalize(v.iter().map(|&x| x as i128).collect()));
        }
    }
    let want: std::collections::BTreeSet<Vec<i128>> =
        rays.iter().map(|r| sign_normalize(r.iter().map(|&x| x as i128).collect())).collect();
    minimal == want
}
