//! Acceptance run: one PASS/FAIL line per criterion, tolerances and time
//! limits fixed below. Exits nonzero if any criterion fails.

mod common;

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vorhecke::chains::{ray_sum, Chain, HomologyPresentation, VoronoiComplex};
use vorhecke::cones::{barycentric_subdivide, combinations, relative_barycentric_subdivide, Fan, PointedCone};
use vorhecke::hecke::{coset_decomposition, hecke_matrix, HeckeOperator};
use vorhecke::linalg::{rat, Int, IntMatrix, Rat, RatMatrix};
use vorhecke::model::{sym_positions, ArithmeticGroup, SymForm};
use vorhecke::reduction::algorithm1::witness_holds;
use vorhecke::reduction::suff_fine::SuffFineCertificate;
use vorhecke::reduction::{ReductionOptions, ReductionOutput, Registry};

const SEED: u64 = 20;

const LIMIT_1: Duration = Duration::from_secs(1);
const LIMIT_2: Duration = Duration::from_secs(30);
const LIMIT_3: Duration = Duration::from_secs(120);
const LIMIT_4: Duration = Duration::from_secs(120);
const LIMIT_5: Duration = Duration::from_secs(10);
const LIMIT_6: Duration = Duration::from_secs(60);
const LIMIT_7: Duration = Duration::from_secs(600);
const LIMIT_8: Duration = Duration::from_secs(900);
const LIMIT_9: Duration = Duration::from_secs(600);
const LIMIT_10: Duration = Duration::from_secs(120);

const BINARY_FORMS: usize = 1000;
const BINARY_BOUND: i64 = 1_000_000;
const TERNARY_FORMS: usize = 200;
const TERNARY_BOUND: i64 = 10_000;
const AR_TUPLES: usize = 200;
const AR_DET_BOUND: i64 = 500;

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

/// Every reduction output of criteria 4–8, rechecked by criterion 9.
struct Recorded {
    n: usize,
    level: u64,
    chain: Chain,
    certificates: Vec<SuffFineCertificate>,
}

thread_local! {
    static RECORDED: RefCell<Vec<Recorded>> = const { RefCell::new(Vec::new()) };
}

fn record(complex: &VoronoiComplex, out: &ReductionOutput) {
    RECORDED.with(|r| {
        r.borrow_mut().push(Recorded {
            n: complex.n(),
            level: complex.group.level,
            chain: out.chain.clone(),
            certificates: out.certificates.clone(),
        })
    });
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn complex(n: usize, level: u64) -> VoronoiComplex {
    VoronoiComplex::build(&ArithmeticGroup::gamma0(n, level).expect("valid group")).expect("complex builds")
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

fn criterion_1() -> Outcome {
    for k in 0..=4 {
        let gens: Vec<Vec<Rat>> = (0..=k).map(|i| (0..=k).map(|j| rat((i == j) as i64)).collect()).collect();
        let fan = Fan::from_cone(&PointedCone::new(gens.clone()).map_err(|e| e.to_string())?);
        let sub = barycentric_subdivide(&fan);
        ensure(sub.cones().len() == factorial(k + 1), || format!("k = {k}: {} top cones", sub.cones().len()))?;
        ensure(sub.is_triangulation_of(&gens), || format!("k = {k}: not a triangulation"))?;
        let rel = relative_barycentric_subdivide(&fan, &BTreeSet::new()).map_err(|e| e.to_string())?;
        ensure(rel.cones() == sub.cones() && rel.points() == sub.points(), || format!("k = {k}: relative differs"))?;
        if k >= 1 {
            // constrain the facet opposite the last ray
            let constraint: BTreeSet<Vec<usize>> = (1..=k).flat_map(|j| combinations(k, j)).collect();
            let sub = relative_barycentric_subdivide(&fan, &constraint).map_err(|e| e.to_string())?;
            for v in sub.used_vertices() {
                ensure(v <= k || !sub.point(v)[k].is_zero(), || format!("k = {k}: constrained face gained a vertex"))?;
            }
        }
    }
    Ok("k = 0..4".into())
}

fn criterion_2() -> Outcome {
    let c = complex(2, 1);
    let oracle = c.oracle();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut interior = 0;
    for _ in 0..BINARY_FORMS {
        let (a, b, cc) = loop {
            let a = rng.gen_range(1..=BINARY_BOUND);
            let cc = rng.gen_range(1..=BINARY_BOUND);
            let b = rng.gen_range(-BINARY_BOUND..=BINARY_BOUND);
            if (b as i128).pow(2) < (a as i128) * (cc as i128) {
                break (a, b, cc);
            }
        };
        let x = vec![vec![a, b], vec![b, cc]];
        let ans = oracle.reduce(&SymForm::from_rows(&x)).map_err(|e| e.to_string())?;
        common::check_certificate(oracle.data(), &x, &ans).map_err(|e| format!("({a}, {b}, {cc}): {e}"))?;
        let gauss: BTreeSet<Vec<i128>> = common::gauss_cone_cusps(a as i128, b as i128, cc as i128).into_iter().collect();
        let got: BTreeSet<Vec<i128>> =
            ans.cusps.iter().map(|v| v.iter().map(|x| i128::try_from(x).expect("small")).collect()).collect();
        ensure(got.is_subset(&gauss), || format!("({a}, {b}, {cc}): cone disagrees with Gauss–Lagrange"))?;
        if ans.face.len() == 3 {
            interior += 1;
            ensure(got == gauss, || format!("({a}, {b}, {cc}): top cone disagrees with Gauss–Lagrange"))?;
        }
    }
    Ok(format!("{BINARY_FORMS} forms, {interior} in open top cones, 100% agreement"))
}

fn criterion_3() -> Outcome {
    let c = complex(3, 1);
    let oracle = c.oracle();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut steps = 0;
    let mut done = 0;
    while done < TERNARY_FORMS {
        let b: Vec<Vec<i64>> = (0..3).map(|_| (0..3).map(|_| rng.gen_range(-50..=50)).collect()).collect();
        let x: Vec<Vec<i64>> =
            (0..3).map(|i| (0..3).map(|j| (0..3).map(|k| b[i][k] * b[j][k]).sum()).collect()).collect();
        let form = SymForm::from_rows(&x);
        if !form.is_positive_definite() || x.iter().flatten().any(|v| v.abs() > TERNARY_BOUND) {
            continue;
        }
        done += 1;
        let ans = oracle.reduce(&form).map_err(|e| e.to_string())?;
        common::check_certificate(oracle.data(), &x, &ans).map_err(|e| format!("{x:?}: {e}"))?;
        steps += ans.steps;
    }
    Ok(format!("{TERNARY_FORMS} forms, {steps} walk steps, potentials strictly decreasing"))
}

fn basis_images(h: &HomologyPresentation, op: &HeckeOperator) -> Vec<Chain> {
    (0..h.rank).map(|i| op.image(h.lift(i))).collect()
}

fn criterion_4() -> Outcome {
    let reg = Registry::default();
    let ar = reg.get("ar").map_err(|e| e.to_string())?;
    let alg1 = reg.get("1").map_err(|e| e.to_string())?;
    let c1 = complex(3, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut done = 0;
    let mut max_depth = 0;
    while done < AR_TUPLES {
        let vs: Vec<Vec<i64>> = (0..3).map(|_| (0..3).map(|_| rng.gen_range(-12..=12)).collect()).collect();
        let det = IntMatrix::from_rows(&vs).det();
        if det.is_zero() || det.abs() > Int::from(AR_DET_BOUND) {
            continue;
        }
        done += 1;
        let xi = Chain::from_cusp_terms(3, &[(vs.clone(), 1)]);
        let out = ar.reduce(&c1, &xi, &ReductionOptions::default()).map_err(|e| e.to_string())?;
        for (t, _) in out.chain.terms() {
            let cusps = out.chain.term_cusps(t).ok_or("non-cuspidal output")?;
            ensure(IntMatrix::from_columns(&cusps).det().abs().is_one(), || format!("{vs:?}: non-unimodular output"))?;
        }
        for levels in &out.stats.det_levels {
            ensure(levels.windows(2).all(|w| w[1] < w[0]), || format!("{vs:?}: levels {levels:?}"))?;
            max_depth = max_depth.max(levels.len());
        }
    }
    // project-equality at level 2: the degree-2 relative homology vanishes there
    let c2 = complex(3, 2);
    let h2 = c2.homology(2, true).map_err(|e| e.to_string())?;
    ensure(h2.rank == 0, || format!("level 2 rank {}", h2.rank))?;
    // the same comparison where it is not vacuous
    let g11 = ArithmeticGroup::gamma0(3, 11).map_err(|e| e.to_string())?;
    let c11 = complex(3, 11);
    let h11 = c11.homology(2, true).map_err(|e| e.to_string())?;
    let mut compared = 0;
    for p in [2, 3] {
        let op = coset_decomposition(&g11, p).map_err(|e| e.to_string())?;
        for xi in basis_images(&h11, &op) {
            let a = ar.reduce(&c11, &xi, &ReductionOptions::default()).map_err(|e| e.to_string())?;
            let b = alg1.reduce(&c11, &xi, &ReductionOptions::default()).map_err(|e| e.to_string())?;
            record(&c11, &a);
            record(&c11, &b);
            let pa = h11.project(&c11, &a.chain).map_err(|e| e.to_string())?;
            let pb = h11.project(&c11, &b.chain).map_err(|e| e.to_string())?;
            ensure(pa == pb, || format!("level 11, p = {p}: classes differ"))?;
            compared += 1;
        }
    }
    Ok(format!(
        "{AR_TUPLES} tuples, max depth {max_depth}; level 2 vacuous (rank 0), {compared} level-11 classes equal"
    ))
}

fn criterion_5() -> Outcome {
    let mut checked = Vec::new();
    for level in 1..=30u64 {
        let h = complex(2, level).homology(1, true).map_err(|e| e.to_string())?;
        let want = common::relative_h1_rank(level);
        ensure(h.rank == want, || format!("level {level}: rank {} vs {want}", h.rank))?;
        if level == 1 || level == 11 {
            checked.push(format!("level {level}: {}", h.rank));
        }
    }
    ensure(checked == ["level 1: 0", "level 11: 3"], || format!("{checked:?}"))?;
    Ok(format!("{}, levels 1..30 match 2g + c - 1", checked.join(", ")))
}

fn criterion_6() -> Outcome {
    let g = ArithmeticGroup::gamma0(2, 11).map_err(|e| e.to_string())?;
    let c = complex(2, 11);
    let h = c.homology(1, true).map_err(|e| e.to_string())?;
    let ms = common::ManinSymbols::new(11);
    let reg = Registry::default();
    let mut summary = Vec::new();
    for p in [2i64, 3] {
        let oracle = common::charpoly(&ms.hecke_matrix(&common::classical_cosets(p)));
        let ap = common::ap_11a(p);
        ensure(oracle == common::poly_from_roots(&[p + 1, ap, ap]), || format!("p = {p}: oracle identity"))?;
        let op = coset_decomposition(&g, p as u64).map_err(|e| e.to_string())?;
        for name in reg.names() {
            let alg = reg.get(&name).map_err(|e| e.to_string())?;
            let m = hecke_matrix(&c, &op, &h, alg.as_ref(), &ReductionOptions::default()).map_err(|e| e.to_string())?;
            ensure(m.charpoly == oracle, || format!("p = {p}, algorithm {name}"))?;
        }
        let factor = if ap < 0 { format!("(x+{})", -ap) } else { format!("(x-{ap})") };
        summary.push(format!("T{p}: (x-{}){factor}^2", p + 1));
    }
    Ok(summary.join(", "))
}

fn matrices(c: &VoronoiComplex, op: &HeckeOperator, h: &HomologyPresentation) -> Result<Vec<RatMatrix>, String> {
    let reg = Registry::default();
    let mut out = Vec::new();
    for name in reg.names() {
        let alg = reg.get(&name).map_err(|e| e.to_string())?;
        let mut cols = Vec::new();
        for xi in basis_images(h, op) {
            let r = alg.reduce(c, &xi, &ReductionOptions::default()).map_err(|e| format!("{name}: {e}"))?;
            record(c, &r);
            cols.push(h.project(c, &r.chain).map_err(|e| format!("{name}: {e}"))?);
        }
        out.push(if cols.is_empty() { RatMatrix::zeros(0, 0) } else { RatMatrix::from_columns(&cols) });
    }
    Ok(out)
}

fn criterion_7() -> Outcome {
    let mut runs = 0;
    for (level, primes) in [(11u64, vec![2u64, 3, 5, 7]), (14, vec![3, 5]), (15, vec![2, 7])] {
        let g = ArithmeticGroup::gamma0(2, level).map_err(|e| e.to_string())?;
        let c = complex(2, level);
        let h = c.homology(1, true).map_err(|e| e.to_string())?;
        for p in primes {
            let op = coset_decomposition(&g, p).map_err(|e| e.to_string())?;
            let ms = matrices(&c, &op, &h)?;
            ensure(ms.windows(2).all(|w| w[0] == w[1]), || format!("level {level}, p = {p}"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} (level, p) pairs, algorithms 1, 2, ar identical"))
}

fn criterion_8() -> Outcome {
    let mut notes = Vec::new();
    for level in [2u64, 11] {
        let g = ArithmeticGroup::gamma0(3, level).map_err(|e| e.to_string())?;
        let c = complex(3, level);
        let h = c.homology(2, true).map_err(|e| e.to_string())?;
        let primes: Vec<u64> = if level == 2 { vec![2] } else { vec![2, 3] };
        for p in primes {
            let op = coset_decomposition(&g, p).map_err(|e| e.to_string())?;
            let ms = matrices(&c, &op, &h)?;
            ensure(ms.windows(2).all(|w| w[0] == w[1]), || format!("level {level}, p = {p}"))?;
            notes.push(format!("level {level} T{p} rank {}", h.rank));
        }
    }
    Ok(notes.join(", "))
}

fn form_rows(n: usize, v: &[Int]) -> Option<Vec<Vec<i64>>> {
    let mut x = vec![vec![0i64; n]; n];
    for ((i, j), e) in sym_positions(n).into_iter().zip(v) {
        let e = i64::try_from(e).ok()?;
        x[i][j] = e;
        x[j][i] = e;
    }
    Some(x)
}

fn criterion_9() -> Outcome {
    let recorded = RECORDED.with(|r| std::mem::take(&mut *r.borrow_mut()));
    ensure(!recorded.is_empty(), || "no reductions recorded".into())?;
    let mut complexes: Vec<((usize, u64), VoronoiComplex)> = Vec::new();
    let (mut cones, mut fine) = (0, 0);
    for rec in &recorded {
        if !complexes.iter().any(|(k, _)| *k == (rec.n, rec.level)) {
            complexes.push(((rec.n, rec.level), complex(rec.n, rec.level)));
        }
        let c = &complexes.iter().find(|(k, _)| *k == (rec.n, rec.level)).expect("built").1;
        let tag = c.is_relative_cycle(&rec.chain).map_err(|e| e.to_string())?;
        ensure(tag.is_cycle, || format!("n = {}, level {}: not a relative cycle", rec.n, rec.level))?;
        for (t, _) in rec.chain.terms() {
            let cusps: BTreeSet<Vec<Int>> = rec.chain.term_cusps(t).ok_or("non-cuspidal term")?.into_iter().collect();
            let x = form_rows(rec.n, &ray_sum(t)).ok_or("oversized term")?;
            let ans = c.oracle().reduce(&SymForm::from_rows(&x)).map_err(|e| e.to_string())?;
            common::check_certificate(c.oracle().data(), &x, &ans)?;
            ensure(ans.cusps == cusps && cusps.len() == t.len(), || format!("term {t:?} is not a Voronoi cone"))?;
            cones += 1;
        }
        for cert in &rec.certificates {
            for (rays, w) in &cert.cones {
                ensure(!w.is_empty(), || "empty witness set".into())?;
                for r in rays {
                    let s = c.oracle().s_of_ray(r).map_err(|e| e.to_string())?;
                    ensure(w.is_subset(&s), || format!("witness not in S of ray {r:?}"))?;
                }
                fine += 1;
            }
        }
    }
    Ok(format!("{} reductions, {cones} output cones certified, {fine} refinement cones rechecked", recorded.len()))
}

fn criterion_10() -> Outcome {
    let reg = Registry::default();
    let alg1 = reg.get("1").map_err(|e| e.to_string())?;
    let opts = ReductionOptions { witness: true, ..Default::default() };
    let mut fixtures = 0;
    for n in [2usize, 3] {
        let g = ArithmeticGroup::gamma0(n, 11).map_err(|e| e.to_string())?;
        let c = complex(n, 11);
        let h = c.homology(n - 1, true).map_err(|e| e.to_string())?;
        for p in [2, 3] {
            let op = coset_decomposition(&g, p).map_err(|e| e.to_string())?;
            for xi in basis_images(&h, &op) {
                let out = alg1.reduce(&c, &xi, &opts).map_err(|e| e.to_string())?;
                let eta = out.witness.as_ref().ok_or("no witness")?;
                ensure(witness_holds(&xi, &out.chain, eta), || format!("n = {n}, p = {p}: witness defect"))?;
                fixtures += 1;
            }
        }
    }
    ensure(fixtures == 10, || format!("{fixtures} fixtures"))?;
    Ok(format!("{fixtures} level-11 fixtures"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "subdivision combinatorics", LIMIT_1, criterion_1),
        (2, "oracle soundness n=2", LIMIT_2, criterion_2),
        (3, "oracle soundness n=3", LIMIT_3, criterion_3),
        (4, "modular symbol reduction", LIMIT_4, criterion_4),
        (5, "homology ranks", LIMIT_5, criterion_5),
        (6, "hecke eigenvalues", LIMIT_6, criterion_6),
        (7, "cross-algorithm agreement", LIMIT_7, criterion_7),
        (8, "SL3 smoke equivalence", LIMIT_8, criterion_8),
        (9, "relative-cycle preservation", LIMIT_9, criterion_9),
        (10, "homotopy witness", LIMIT_10, criterion_10),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(d) if elapsed <= limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over time limit")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {id:>2} {status} {name}: {detail} [{:.2}s / limit {}s]", elapsed.as_secs_f64(), limit.as_secs());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
