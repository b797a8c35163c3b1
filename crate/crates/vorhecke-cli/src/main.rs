//! `vorhecke`: batch front end emitting JSON reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use vorhecke::chains::{Chain, VoronoiComplex};
use vorhecke::hecke::{coset_decomposition, format_poly, hecke_matrix};
use vorhecke::linalg::{Int, IntMatrix, Rat, RatMatrix};
use vorhecke::model::{sym_dim, ArithmeticGroup, SymForm};
use vorhecke::oracle::{verify_answer, Oracle, OracleAnswer};
use vorhecke::reduction::{check_output, ReductionOptions, Registry, DEFAULT_MAX_SUBDIV};

const CACHE_ENV: &str = "VORHECKE_CACHE_DIR";

#[derive(Parser, Debug)]
#[command(name = "vorhecke", version, about = "Hecke operators on Voronoi relative homology")]
struct Cli {
    /// Render a short human-readable summary instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GroupName {
    #[value(name = "SL2")]
    Sl2,
    #[value(name = "SL3")]
    Sl3,
    #[value(name = "GL2")]
    Gl2,
}

#[derive(Args, Debug, Clone)]
struct GroupArgs {
    #[arg(long, value_enum, ignore_case = true)]
    group: GroupName,
    #[arg(long, default_value_t = 1)]
    level: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce forms (one integer vec per line) to their minimal Voronoi cones.
    Oracle {
        #[command(flatten)]
        group: GroupArgs,
        /// Input file; stdin when omitted.
        input: Option<PathBuf>,
    },
    /// Relative homology of the Voronoi complex mod Γ₀(N).
    Homology {
        #[command(flatten)]
        group: GroupArgs,
        /// Defaults to n − 1.
        #[arg(long)]
        degree: Option<usize>,
        /// Include the cells, boundary matrices and basis cycles.
        #[arg(long)]
        dump: bool,
    },
    /// Reduce a chain file to a Voronoi chain.
    Reduce {
        #[command(flatten)]
        group: GroupArgs,
        input: PathBuf,
        #[arg(long, default_value = "2")]
        algorithm: String,
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_SUBDIV)]
        max_subdiv: usize,
    },
    /// Matrix and characteristic polynomial of T(p).
    Hecke {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value = "2")]
        algorithm: String,
        #[arg(long, default_value_t = DEFAULT_MAX_SUBDIV)]
        max_subdiv: usize,
    },
    /// Quick invariant suite.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
struct Failure {
    kind: &'static str,
    message: String,
}

fn fail(kind: &'static str, e: impl ToString) -> Failure {
    Failure { kind, message: e.to_string() }
}

fn group_of(g: &GroupArgs) -> Result<ArithmeticGroup, Failure> {
    let n = match g.group {
        GroupName::Sl2 => 2,
        GroupName::Sl3 => 3,
        GroupName::Gl2 => return Err(fail("unsupported", "GL2 is not supported; use SL2 (PSL is used internally)")),
    };
    ArithmeticGroup::gamma0(n, g.level).map_err(|e| fail("invalid-group", e))
}

fn cache_file(n: usize) -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(|d| Path::new(&d).join(format!("oracle-sl{n}.json")))
}

fn load_cache(oracle: &Oracle) {
    let Some(path) = cache_file(oracle.n()) else { return };
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(entries) = serde_json::from_str::<Vec<(Vec<Int>, OracleAnswer)>>(&text) {
            oracle.import_cache(entries);
        }
    }
}

fn save_cache(oracle: &Oracle) -> Result<(), Failure> {
    let Some(path) = cache_file(oracle.n()) else { return Ok(()) };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| fail("io", e))?;
    }
    let text = serde_json::to_string(&oracle.export_cache()).map_err(|e| fail("io", e))?;
    fs::write(&path, text).map_err(|e| fail("io", e))
}

fn build_complex(group: &ArithmeticGroup) -> Result<VoronoiComplex, Failure> {
    let c = VoronoiComplex::build(group).map_err(|e| fail("complex", e))?;
    load_cache(c.oracle());
    Ok(c)
}

/// Integers that fit in i64 become JSON numbers, larger ones decimal strings.
fn int_json(x: &Int) -> Value {
    i64::try_from(x).map_or_else(|_| json!(x.to_string()), |v| json!(v))
}

fn ints(v: &[Int]) -> Value {
    Value::Array(v.iter().map(int_json).collect())
}

/// Integral rationals as integers, others as "p/q" strings.
fn rat_json(x: &Rat) -> Value {
    if x.is_integer() {
        int_json(&x.to_integer())
    } else {
        json!(x.to_string())
    }
}

fn matrix_json(m: &RatMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(rat_json).collect())).collect())
}

fn int_matrix_json(m: &IntMatrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| ints(r)).collect())
}

fn chain_json(chain: &Chain) -> Value {
    Value::Array(
        chain
            .terms()
            .map(|(t, c)| match chain.term_cusps(t) {
                Some(cusps) => json!({"coef": int_json(c), "cusps": cusps.iter().map(|v| ints(v)).collect::<Vec<_>>()}),
                None => json!({"coef": int_json(c), "rays": t.iter().map(|v| ints(v)).collect::<Vec<_>>()}),
            })
            .collect(),
    )
}

fn parse_form_line(line: &str, n: usize) -> Result<SymForm, String> {
    let v: Vec<Int> = line.split(',').map(|s| s.trim().parse::<Int>().map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    if v.len() != sym_dim(n) {
        return Err(format!("expected {} entries, got {}", sym_dim(n), v.len()));
    }
    Ok(SymForm::from_int_vec(n, &v))
}

fn run_oracle(g: &GroupArgs, input: &Option<PathBuf>) -> Result<Value, Failure> {
    let group = group_of(g)?;
    let text = match input {
        Some(p) => fs::read_to_string(p).map_err(|e| fail("io", e))?,
        None => std::io::read_to_string(std::io::stdin()).map_err(|e| fail("io", e))?,
    };
    let oracle = Oracle::new(group.n).map_err(|e| fail("oracle", e))?;
    load_cache(&oracle);
    let mut results = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let form = parse_form_line(line, group.n).map_err(|e| fail("parse", format!("line {}: {e}", i + 1)))?;
        let a = oracle.reduce(&form).map_err(|e| fail("oracle", e))?;
        results.push(json!({
            "form": ints(&form.vec().iter().map(|x| x.to_integer()).collect::<Vec<_>>()),
            "cusps": a.cusps.iter().map(|c| ints(c)).collect::<Vec<_>>(),
            "gamma": int_matrix_json(&a.gamma),
            "component_rank": a.component_rank,
        }));
    }
    save_cache(&oracle)?;
    Ok(json!({"results": results}))
}

fn cells_json(c: &VoronoiComplex, degree: usize) -> Value {
    Value::Array(
        c.live_cells(degree)
            .iter()
            .map(|&i| {
                let cell = &c.cells[i];
                json!({
                    "index": i,
                    "type": cell.cell_type,
                    "point": cell.point,
                    "cusps": cell.cusps.iter().map(|v| ints(v)).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn run_homology(g: &GroupArgs, degree: Option<usize>, dump: bool) -> Result<Value, Failure> {
    let group = group_of(g)?;
    let c = build_complex(&group)?;
    let degree = degree.unwrap_or(group.n - 1);
    let h = c.homology(degree, true).map_err(|e| fail("homology", e))?;
    let summary = c.summary();
    save_cache(c.oracle())?;
    let mut out = json!({
        "degree": degree,
        "relative": true,
        "rank": h.rank,
        "torsion": h.torsion.as_ref().map(|t| ints(t)),
        "cells_per_degree": summary.cells_per_degree,
        "killed_per_degree": summary.killed_per_degree,
    });
    if dump {
        out["complex"] = json!({
            "cells": {degree.to_string(): cells_json(&c, degree), (degree + 1).to_string(): cells_json(&c, degree + 1)},
            "boundary": {
                degree.to_string(): int_matrix_json(&c.boundary_matrix(degree)),
                (degree + 1).to_string(): int_matrix_json(&c.boundary_matrix(degree + 1)),
            },
        });
        out["basis_cycles"] = Value::Array(h.cycles.iter().map(|v| ints(v)).collect());
    }
    Ok(out)
}

fn reduction_options(max_subdiv: usize, witness: bool) -> ReductionOptions {
    ReductionOptions { max_subdiv, witness }
}

fn run_reduce(g: &GroupArgs, input: &Path, algorithm: &str, witness: bool, max_subdiv: usize) -> Result<Value, Failure> {
    let group = group_of(g)?;
    let text = fs::read_to_string(input).map_err(|e| fail("io", e))?;
    let xi = Chain::parse_text(&text).map_err(|e| fail("parse", e))?;
    if xi.n() != group.n {
        return Err(fail("parse", format!("chain has n = {}, group has n = {}", xi.n(), group.n)));
    }
    let c = build_complex(&group)?;
    let alg = Registry::default().get(algorithm).map_err(|e| fail("unsupported", e))?;
    let out = alg.reduce(&c, &xi, &reduction_options(max_subdiv, witness)).map_err(|e| fail("reduction", e))?;
    let check = check_output(&c, &out.chain).map_err(|e| fail("reduction", e))?;
    save_cache(c.oracle())?;
    let certified_cones: usize = out.certificates.iter().map(|cert| cert.cones.len()).sum();
    Ok(json!({
        "algorithm": algorithm,
        "chain": chain_json(&out.chain),
        "relative_cycle": check.relative_cycle.is_cycle,
        "all_voronoi": check.all_voronoi,
        "certificates": {"terms": out.certificates.len(), "top_cones": certified_cones},
        "stats": {
            "terms_in": out.stats.terms_in,
            "terms_out": out.stats.terms_out,
            "cones_visited": out.stats.cones_visited,
            "subdiv_levels": out.stats.subdiv_levels,
            "det_levels": out.stats.det_levels.iter().map(|l| ints(l)).collect::<Vec<_>>(),
        },
        "witness": out.witness.as_ref().map(chain_json),
    }))
}

fn run_hecke(g: &GroupArgs, p: u64, degree: Option<usize>, algorithm: &str, max_subdiv: usize) -> Result<Value, Failure> {
    let group = group_of(g)?;
    let op = coset_decomposition(&group, p).map_err(|e| fail("unsupported", e))?;
    let c = build_complex(&group)?;
    let degree = degree.unwrap_or(group.n - 1);
    let pres = c.homology(degree, true).map_err(|e| fail("homology", e))?;
    let alg = Registry::default().get(algorithm).map_err(|e| fail("unsupported", e))?;
    let m = hecke_matrix(&c, &op, &pres, alg.as_ref(), &reduction_options(max_subdiv, false))
        .map_err(|e| fail("hecke", e))?;
    save_cache(c.oracle())?;
    Ok(json!({
        "p": p,
        "degree": degree,
        "algorithm": algorithm,
        "cosets": op.cosets.len(),
        "basis_size": pres.rank,
        "matrix": matrix_json(&m.matrix),
        "charpoly": m.charpoly.iter().map(rat_json).collect::<Vec<_>>(),
        "charpoly_text": format_poly(&m.charpoly),
    }))
}

fn run_selftest(seed: u64) -> Result<Value, Failure> {
    let mut checks = Vec::new();
    let mut record = |name: &str, ok: bool| checks.push(json!({"check": name, "ok": ok}));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in [2usize, 3] {
        let oracle = Oracle::new(n).map_err(|e| fail("oracle", e))?;
        let mut ok = true;
        for _ in 0..20 {
            let a: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-9..=9)).collect()).collect();
            let mut rows = vec![vec![0i64; n]; n];
            for (i, row) in rows.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x = (0..n).map(|k| a[k][i] * a[k][j]).sum::<i64>() + if i == j { 1 } else { 0 };
                }
            }
            let x = SymForm::from_rows(&rows);
            ok &= oracle.reduce(&x).map(|ans| verify_answer(oracle.data(), &x, &ans)).unwrap_or(false);
        }
        record(&format!("oracle-certificates-sl{n}"), ok);
    }
    let g = ArithmeticGroup::gamma0(2, 11).map_err(|e| fail("invalid-group", e))?;
    let c = VoronoiComplex::build(&g).map_err(|e| fail("complex", e))?;
    let h = c.homology(1, true).map_err(|e| fail("homology", e))?;
    record("sl2-level-11-rank-3", h.rank == 3);
    let op = coset_decomposition(&g, 2).map_err(|e| fail("hecke", e))?;
    let reg = Registry::default();
    let mut polys = Vec::new();
    for name in reg.names() {
        let alg = reg.get(&name).map_err(|e| fail("unsupported", e))?;
        let m = hecke_matrix(&c, &op, &h, alg.as_ref(), &ReductionOptions::default()).map_err(|e| fail("hecke", e))?;
        polys.push(format_poly(&m.charpoly));
    }
    record("sl2-level-11-t2-algorithms-agree", polys.windows(2).all(|w| w[0] == w[1]));
    let all_ok = checks.iter().all(|c| c["ok"] == json!(true));
    if !all_ok {
        return Err(fail("selftest", serde_json::to_string(&checks).unwrap_or_default()));
    }
    Ok(json!({"seed": seed, "checks": checks}))
}

fn command_echo(cmd: &Command) -> Value {
    let g = |g: &GroupArgs| json!({"group": format!("{:?}", g.group).to_uppercase(), "level": g.level});
    match cmd {
        Command::Oracle { group, input } => {
            json!({"command": "oracle", "group": g(group), "input": input.as_ref().map(|p| p.display().to_string())})
        }
        Command::Homology { group, degree, dump } => {
            json!({"command": "homology", "group": g(group), "degree": degree, "dump": dump})
        }
        Command::Reduce { group, input, algorithm, witness, max_subdiv } => json!({
            "command": "reduce", "group": g(group), "input": input.display().to_string(),
            "algorithm": algorithm, "witness": witness, "max_subdiv": max_subdiv,
        }),
        Command::Hecke { group, p, degree, algorithm, max_subdiv } => json!({
            "command": "hecke", "group": g(group), "p": p, "degree": degree,
            "algorithm": algorithm, "max_subdiv": max_subdiv,
        }),
        Command::Selftest { seed } => json!({"command": "selftest", "seed": seed}),
    }
}

fn human(report: &Value) -> String {
    let mut s = String::new();
    let result = &report["result"];
    if let Some(err) = report.get("error") {
        return format!("error ({}): {}\n", err["kind"].as_str().unwrap_or(""), err["message"].as_str().unwrap_or(""));
    }
    match report["input"]["command"].as_str().unwrap_or("") {
        "hecke" => {
            s.push_str(&format!("T({}) on H_{}: basis size {}\n", result["p"], result["degree"], result["basis_size"]));
            s.push_str(&format!("charpoly: {}\n", result["charpoly_text"].as_str().unwrap_or("")));
        }
        "homology" => s.push_str(&format!("relative H_{} rank {}\n", result["degree"], result["rank"])),
        "reduce" => s.push_str(&format!(
            "{} output terms; relative cycle: {}; all Voronoi: {}\n",
            result["chain"].as_array().map_or(0, |a| a.len()),
            result["relative_cycle"],
            result["all_voronoi"]
        )),
        "oracle" => {
            for r in result["results"].as_array().into_iter().flatten() {
                s.push_str(&format!("{} -> {} (rank {})\n", r["form"], r["cusps"], r["component_rank"]));
            }
        }
        _ => {
            for c in result["checks"].as_array().into_iter().flatten() {
                s.push_str(&format!("{}: {}\n", c["check"].as_str().unwrap_or(""), if c["ok"] == json!(true) { "ok" } else { "FAIL" }));
            }
        }
    }
    s.push_str(&format!("elapsed: {} ms\n", report["timing"]["elapsed_ms"]));
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = match &cli.command {
        Command::Oracle { group, input } => run_oracle(group, input),
        Command::Homology { group, degree, dump } => run_homology(group, *degree, *dump),
        Command::Reduce { group, input, algorithm, witness, max_subdiv } => {
            run_reduce(group, input, algorithm, *witness, *max_subdiv)
        }
        Command::Hecke { group, p, degree, algorithm, max_subdiv } => {
            run_hecke(group, *p, *degree, algorithm, *max_subdiv)
        }
        Command::Selftest { seed } => run_selftest(*seed),
    };
    let mut report = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "input": command_echo(&cli.command),
    });
    let ok = result.is_ok();
    match result {
        Ok(v) => report["result"] = v,
        Err(f) => report["error"] = json!({"kind": f.kind, "message": f.message}),
    }
    report["timing"] = json!({"elapsed_ms": start.elapsed().as_millis() as u64});
    let text = if cli.human { human(&report) } else { format!("{}\n", serde_json::to_string_pretty(&report).expect("json")) };
    match &cli.output {
        Some(p) => {
            if let Err(e) = fs::write(p, &text) {
                eprintln!("cannot write {}: {e}", p.display());
                return ExitCode::FAILURE;
            }
        }
        None => print!("{text}"),
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
