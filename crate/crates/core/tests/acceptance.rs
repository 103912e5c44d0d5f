//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};

use common::{compile, load, random_rational_triple, rational, rows, scalars};
use quasifold::atlas::Atlas;
use quasifold::document::Loaded;
use quasifold::field::{Domain, Scalar};
use quasifold::linalg::Mat;
use quasifold::verify::{
    check_class_well_defined, check_lemma_decomposition, check_proof_group_element, check_transition_equivariance,
    verify_all, NumericAtlas, TrialConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOLERANCE: f64 = 1e-9;
const TRIALS: usize = 100;
const FAULT: f64 = 1e-3;
const RANDOM_TRIPLES: usize = 50;
const GALLERY: [&str; 5] = ["quasisphere", "cp2-11a", "hirzebruch", "kite", "dodecahedron"];

type Outcome = Result<String, String>;
type Detector = Box<dyn Fn(&NumericAtlas, &TrialConfig) -> usize>;
type RelationBlock = ([usize; 3], [(usize, [&'static str; 3]); 3]);
type Criterion = (u32, &'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

fn defaults(l: &Loaded) -> TrialConfig {
    TrialConfig { samples: TRIALS, tolerance: TOLERANCE, seed: 0, ..l.trial.clone() }
}

fn matrix_is(m: &Mat, d: &Domain, expected: &[&[&str]]) -> bool {
    rows(m) == scalars(d, expected)
}

fn transition<'a>(atlas: &'a Atlas, from: &[usize], to: &[usize]) -> Result<&'a quasifold::atlas::MonomialMap, String> {
    atlas.transition(from, to).ok_or_else(|| format!("no transition {from:?} -> {to:?}"))
}

/// Smallest |m| ≤ 10 with m·g ≡ θ (mod 1), by direct enumeration.
fn in_cyclic_group(g: f64, theta: f64) -> bool {
    (-10i64..=10).any(|m| {
        let r = (m as f64 * g - theta).rem_euclid(1.0);
        r.min(1.0 - r) < TOLERANCE
    })
}

fn criterion_1() -> Outcome {
    let l = load("quasisphere");
    let d = &l.domain;
    let atlas = compile(&l);
    let map = transition(&atlas, &[1], &[2])?;
    ensure!(matrix_is(&map.exponents, d, &[&["-a"]]), "E = {:?}", map.row_texts());
    ensure!(map.render() == "[z^-a]", "rendered {}", map.render());

    // Group-level comparison with the displayed Γ_1 = {h/a} and Γ_2 = {a h}.
    let a = l.trial.parameter_sample.ok_or("no parameter sample")?;
    let displayed = [1.0 / a, a];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut failures = 0;
    for (chart, &p) in atlas.charts.iter().zip(&displayed) {
        let cols = chart.nonzero_gamma_columns();
        ensure!(cols.len() == 1, "chart {:?} has {} generators", chart.cone, cols.len());
        let g = chart.gamma_exponents.get(0, cols[0]).to_f64(Some(a)).map_err(|e| e.to_string())?;
        for _ in 0..TRIALS {
            let h = rng.random_range(-10i64..=10);
            if !in_cyclic_group(g, (h as f64 * p).rem_euclid(1.0))
                || !in_cyclic_group(p, (h as f64 * g).rem_euclid(1.0))
            {
                failures += 1;
            }
        }
    }
    ensure!(failures == 0, "{failures} group membership trials failed");
    let summary = verify_all(&NumericAtlas::new(&l.triple, &atlas, Some(a)).map_err(|e| e.to_string())?, &defaults(&l));
    let failed: usize = summary.reports().iter().map(|(_, r)| r.failures.len()).sum();
    ensure!(failed == 0, "{failed} verify failures");
    Ok(format!("E = [-a], {}, Γ groups agree over {} trials", map.render(), 2 * TRIALS))
}

fn criterion_2() -> Outcome {
    let l = load("cp2-11a");
    let atlas = compile(&l);
    let map = transition(&atlas, &[2, 3], &[1, 3])?;
    ensure!(matrix_is(&map.exponents, &l.domain, &[&["-1", "0"], &["-a", "1"]]), "E = {:?}", map.row_texts());
    ensure!(map.render() == "[z2^-1 : z2^-a z3]", "rendered {}", map.render());

    let one = l.specialize(&rational("1")).map_err(|e| e.to_string())?;
    let classical = compile(&one);
    ensure!(
        classical.transitions.iter().all(|t| t.exponents.entries().iter().all(Scalar::is_integer)),
        "non-integer exponent at a = 1"
    );
    let map1 = transition(&classical, &[2, 3], &[1, 3])?;
    ensure!(
        matrix_is(&map1.exponents, &one.domain, &[&["-1", "0"], &["-1", "1"]]),
        "a = 1: E = {:?}",
        map1.row_texts()
    );
    ensure!(map1.render() == "[z2^-1 : z2^-1 z3]", "a = 1: rendered {}", map1.render());
    Ok(format!("{}; a = 1 gives {}", map.render(), map1.render()))
}

fn criterion_3() -> Outcome {
    let cp2 = load("cp2-11a");
    let hirz = load("hirzebruch");
    let (a, b) = (compile(&cp2), compile(&hirz));
    let e1 = &transition(&a, &[2, 3], &[1, 3])?.exponents;
    let e2 = &transition(&b, &[2, 3], &[1, 3])?.exponents;
    ensure!(rows(e1) == rows(e2), "matrices differ: {:?} vs {:?}", rows(e1), rows(e2));
    ensure!(e1.row_labels() == e2.row_labels() && e1.col_labels() == e2.col_labels(), "labels differ");
    Ok("{2,3} -> {1,3} exponent matrices identical".into())
}

fn criterion_4() -> Outcome {
    let l = load("kite");
    let d = &l.domain;
    let phi = d.parse("phi").map_err(|e| e.to_string())?;
    ensure!(phi == d.parse("alpha^2 - 2").unwrap(), "phi alias");
    ensure!(&phi * &phi == &phi + &d.one(), "phi^2 != phi + 1");
    let atlas = compile(&l);
    let map = transition(&atlas, &[1, 4], &[2, 4])?;
    let expected = scalars(d, &[&["-1/phi", "0"], &["1/phi", "1"]]);
    let got = rows(&map.exponents);
    let canon = |m: &[Vec<Scalar>]| {
        m.iter().map(|r| r.iter().map(Scalar::canonical_text).collect::<Vec<_>>()).collect::<Vec<_>>()
    };
    ensure!(canon(&got) == canon(&expected), "E = {:?}", canon(&got));
    ensure!(map.render() == "[z1^(-1/phi) : z1^(1/phi) z4]", "rendered {}", map.render());
    Ok(format!("{} with canonical entries {:?}", map.render(), canon(&got)))
}

/// Rows of the dodecahedron table: vertex, fixed point, index set.
const TABLE: [(&str, &str, [usize; 3]); 20] = [
    ("-1,-1,-1", "[0:0:0:1:1:1:1:1:1:1:1:1]", [1, 2, 3]),
    ("0,-phi,-1/phi", "[0:0:1:0:1:1:1:1:1:1:1:1]", [1, 2, 4]),
    ("-phi,-1/phi,0", "[0:1:0:1:1:0:1:1:1:1:1:1]", [1, 3, 6]),
    ("0,-phi,1/phi", "[0:1:1:0:1:1:1:1:1:1:0:1]", [1, 4, 11]),
    ("-1,-1,1", "[0:1:1:1:1:0:1:1:1:1:0:1]", [1, 6, 11]),
    ("-1/phi,0,-phi", "[1:0:0:1:0:1:1:1:1:1:1:1]", [2, 3, 5]),
    ("1,-1,-1", "[1:0:1:0:1:1:1:1:1:1:1:0]", [2, 4, 12]),
    ("1/phi,0,-phi", "[1:0:1:1:0:1:1:1:1:1:1:0]", [2, 5, 12]),
    ("-1,1,-1", "[1:1:0:1:0:1:1:1:1:0:1:1]", [3, 5, 10]),
    ("-phi,1/phi,0", "[1:1:0:1:1:0:1:1:1:0:1:1]", [3, 6, 10]),
    ("1,-1,1", "[1:1:1:0:1:1:1:1:0:1:0:1]", [4, 9, 11]),
    ("phi,-1/phi,0", "[1:1:1:0:1:1:1:1:0:1:1:0]", [4, 9, 12]),
    ("0,phi,-1/phi", "[1:1:1:1:0:1:0:1:1:0:1:1]", [5, 7, 10]),
    ("1,1,-1", "[1:1:1:1:0:1:0:1:1:1:1:0]", [5, 7, 12]),
    ("-1,1,1", "[1:1:1:1:1:0:1:0:1:0:1:1]", [6, 8, 10]),
    ("-1/phi,0,phi", "[1:1:1:1:1:0:1:0:1:1:0:1]", [6, 8, 11]),
    ("1,1,1", "[1:1:1:1:1:1:0:0:0:1:1:1]", [7, 8, 9]),
    ("0,phi,1/phi", "[1:1:1:1:1:1:0:0:1:0:1:1]", [7, 8, 10]),
    ("phi,1/phi,0", "[1:1:1:1:1:1:0:1:0:1:1:0]", [7, 9, 12]),
    ("1/phi,0,phi", "[1:1:1:1:1:1:1:0:0:1:0:1]", [8, 9, 11]),
];

fn criterion_5() -> Outcome {
    let l = load("dodecahedron");
    let d = &l.domain;
    let p = l.polytope.as_ref().ok_or("no polytope")?;
    let atlas = compile(&l);

    // (a) set equality of (vertex, I_σ, fixed point) rows.
    ensure!(p.vertices().len() == TABLE.len(), "{} vertices", p.vertices().len());
    for (coords, fixed, cone) in TABLE {
        let expected: Vec<Scalar> = coords.split(',').map(|s| d.parse(s).unwrap()).collect();
        let v = p.vertices().iter().find(|v| v.facets == cone).ok_or(format!("no vertex for {cone:?}"))?;
        ensure!(v.coordinates == expected, "vertex {cone:?} is {}", v.coordinates_text());
        let chart = atlas.chart(&cone).ok_or(format!("no chart {cone:?}"))?;
        ensure!(chart.fixed_point_text() == fixed, "fixed point {cone:?} is {}", chart.fixed_point_text());
    }

    // (b) relations in the chart {1,2,3}, and their rewritten forms.
    let relation_blocks: [RelationBlock; 3] = [
        ([1, 2, 3], [(4, ["1/phi", "1/phi", "-1"]), (5, ["-1", "1/phi", "1/phi"]), (6, ["1/phi", "-1", "1/phi"])]),
        ([1, 2, 4], [(3, ["1/phi", "1/phi", "-1"]), (5, ["-1/phi", "1", "-1/phi"]), (6, ["1", "-1/phi", "-1/phi"])]),
        ([1, 3, 6], [(2, ["1/phi", "1/phi", "-1"]), (4, ["1", "-1/phi", "-1/phi"]), (5, ["-1/phi", "1", "-1/phi"])]),
    ];
    for (cone, block) in relation_blocks {
        let set = atlas.relations_for(&cone).ok_or(format!("no relations for {cone:?}"))?;
        for (j, coeffs) in block {
            let r = set.relation(j).ok_or(format!("no relation for X{j}"))?;
            let expected: Vec<Scalar> = coeffs.iter().map(|s| d.parse(s).unwrap()).collect();
            ensure!(r.coefficients == expected, "{cone:?}: {}", set.relation_text(r));
        }
    }

    // (c) the two displayed transitions.
    let first = transition(&atlas, &[1, 2, 3], &[1, 2, 4])?.render();
    ensure!(first == "[z1 z3^(1/phi) : z2 z3^(1/phi) : z3^-1]", "{{1,2,3}} -> {{1,2,4}} rendered {first}");
    let second = transition(&atlas, &[1, 2, 4], &[1, 3, 6])?.render();
    ensure!(
        second == "[z1 z2^(1/phi) z4 : z2^(1/phi) z4^(-1/phi) : z2^-1 z4^(-1/phi)]",
        "{{1,2,4}} -> {{1,3,6}} rendered {second}"
    );
    Ok(format!("20 table rows, 9 relations, {first}, {second}"))
}

/// Shared-column, inverse-pair and triangle identities; returns the pair and
/// triple counts.
fn cocycle_identities(atlas: &Atlas) -> Result<(usize, usize), String> {
    let cones: Vec<&Vec<usize>> = atlas.charts.iter().map(|c| &c.cone).collect();
    let d = atlas.charts[0].a_sigma.domain();
    let n = cones[0].len();
    let (mut pairs, mut triples) = (0, 0);
    for &s in &cones {
        for &t in &cones {
            if s == t {
                continue;
            }
            let st = transition(atlas, t, s)?;
            for &j in t.iter().filter(|j| s.contains(j)) {
                let row = s.iter().position(|&i| i == j).unwrap();
                let unit: Vec<Scalar> = (0..n).map(|r| if r == row { d.one() } else { d.zero() }).collect();
                ensure!(st.column_for(j) == Some(unit), "shared column {j} of {t:?} -> {s:?}");
            }
            let back = transition(atlas, s, t)?;
            ensure!(st.exponents.matmul(&back.exponents).unwrap().is_identity(), "inverse pair {s:?} {t:?}");
            pairs += 1;
            for &r in &cones {
                if r == s || r == t {
                    continue;
                }
                let composed = st.exponents.matmul(&transition(atlas, r, t)?.exponents).unwrap();
                ensure!(composed.same_entries(&transition(atlas, r, s)?.exponents), "triangle {r:?} {t:?} {s:?}");
                triples += 1;
            }
        }
    }
    Ok((pairs, triples))
}

fn criterion_6() -> Outcome {
    let mut detail = Vec::new();
    for name in GALLERY {
        let (pairs, triples) = cocycle_identities(&compile(&load(name)))?;
        if name == "dodecahedron" {
            ensure!(pairs == 20 * 19, "dodecahedron: {pairs} ordered pairs");
        }
        detail.push(format!("{name} {pairs}/{triples}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut random_pairs = 0;
    for _ in 0..RANDOM_TRIPLES {
        let t = random_rational_triple(&mut rng);
        random_pairs += cocycle_identities(&Atlas::compile(&t).map_err(|e| e.to_string())?)?.0;
    }
    Ok(format!("{}; {RANDOM_TRIPLES} random triples, {random_pairs} pairs", detail.join(", ")))
}

/// True if the perturbation is caught by at least one check.
fn detected(na: &NumericAtlas, cfg: &TrialConfig, checks: &[Detector]) -> bool {
    checks.iter().any(|c| c(na, cfg) > 0)
}

fn criterion_7() -> Outcome {
    let mut detail = Vec::new();
    for name in GALLERY {
        let l = load(name);
        let atlas = compile(&l);
        let cfg = defaults(&l);
        let na = NumericAtlas::new(&l.triple, &atlas, cfg.parameter_sample).map_err(|e| e.to_string())?;
        let summary = verify_all(&na, &cfg);
        for (check, r) in summary.reports() {
            ensure!(r.failures.is_empty(), "{name}: {check} has {} failures", r.failures.len());
            ensure!(r.max_deviation < TOLERANCE, "{name}: {check} deviation {:e}", r.max_deviation);
        }

        let m = na.chart_count();
        let n = na.n;
        let mut injected = 0;
        // Every entry of two transition matrices.
        for (from, to) in [(0, 1), (m - 1, 0)] {
            for row in 0..n {
                for col in 0..n {
                    let mut bad = na.clone();
                    bad.perturb_transition(from, to, row, col, FAULT);
                    let checks: Vec<Detector> = vec![
                        Box::new(move |a, c| check_class_well_defined(a, to, c).failures.len()),
                        Box::new(move |a, c| check_transition_equivariance(a, from, to, c).failures.len()),
                        Box::new(move |a, c| check_proof_group_element(a, from, to, c).failures.len()),
                    ];
                    ensure!(detected(&bad, &cfg, &checks), "{name}: E[{row}][{col}] of {from} -> {to} not detected");
                    injected += 1;
                }
            }
        }
        // Every entry of each nonzero Γ column and every relation of chart 0.
        for col in atlas.charts[0].nonzero_gamma_columns() {
            for row in 0..n {
                let mut bad = na.clone();
                bad.perturb_gamma(0, row, col, FAULT);
                // Redundant generators can mask a perturbation inside Γ_σ
                // itself; transporting Γ_σ to the other charts exposes it.
                let checks: Vec<Detector> = vec![
                    Box::new(|a, c| check_class_well_defined(a, 0, c).failures.len()),
                    Box::new(|a, c| check_lemma_decomposition(a, 0, c).failures.len()),
                    Box::new(move |a, c| {
                        (1..m).map(|s| check_transition_equivariance(a, 0, s, c).failures.len()).sum()
                    }),
                ];
                ensure!(detected(&bad, &cfg, &checks), "{name}: Γ entry ({row}, {col}) not detected");
                injected += 1;
            }
        }
        for rel in 0..na.charts[0].relations.len() {
            for row in 0..n {
                let mut bad = na.clone();
                bad.perturb_relation(0, rel, row, FAULT);
                let checks: Vec<Detector> = vec![Box::new(|a, c| check_lemma_decomposition(a, 0, c).failures.len())];
                ensure!(detected(&bad, &cfg, &checks), "{name}: relation {rel} entry {row} not detected");
                injected += 1;
            }
        }
        detail.push(format!("{name} {injected} faults"));
    }
    Ok(format!("0 failures at defaults; all injected faults detected ({})", detail.join(", ")))
}

/// Integer matrix E with A_σ E = A_τ, found by enumerating entries in [-3, 3].
fn brute_force_transition(a_sigma: &[Vec<i64>], a_tau: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let n = a_sigma.len();
    // Columns are independent: solve A_σ e = (column of A_τ) one at a time.
    let mut columns = Vec::new();
    for c in 0..n {
        let target: Vec<i64> = a_tau.iter().map(|row| row[c]).collect();
        let mut hits = Vec::new();
        let mut e = vec![-3i64; n];
        loop {
            let image: Vec<i64> = (0..n).map(|r| (0..n).map(|k| a_sigma[r][k] * e[k]).sum()).collect();
            if image == target {
                hits.push(e.clone());
            }
            let Some(i) = (0..n).find(|&i| e[i] < 3) else { break };
            e[i] += 1;
            e[..i].iter_mut().for_each(|x| *x = -3);
        }
        if hits.len() != 1 {
            return None;
        }
        columns.push(hits.pop().unwrap());
    }
    Some((0..n).map(|r| (0..n).map(|c| columns[c][r]).collect()).collect())
}

fn integer_rows(m: &Mat) -> Option<Vec<Vec<i64>>> {
    rows(m).iter().map(|r| r.iter().map(|x| x.as_integer().and_then(|b| i64::try_from(b).ok())).collect()).collect()
}

fn criterion_8() -> Outcome {
    // Hand-computed chart changes of classical CP^2 and H_1.
    let classical: [(&str, &[usize], &[usize], &str); 5] = [
        ("cp2-11a", &[2, 3], &[1, 3], "[z2^-1 : z2^-1 z3]"),
        ("cp2-11a", &[1, 3], &[1, 2], "[z1 z3^-1 : z3^-1]"),
        ("hirzebruch", &[2, 3], &[1, 3], "[z2^-1 : z2^-1 z3]"),
        ("hirzebruch", &[1, 3], &[2, 4], "[z1^-1 : z1 z3^-1]"),
        ("hirzebruch", &[1, 4], &[2, 3], "[z1^-1 : z1^-1 z4^-1]"),
    ];
    let mut checked = 0;
    for name in ["cp2-11a", "hirzebruch"] {
        let l = load(name).specialize(&rational("1")).map_err(|e| e.to_string())?;
        let atlas = compile(&l);
        for map in &atlas.transitions {
            let e = integer_rows(&map.exponents).ok_or(format!("{name}: non-integer {:?}", map.row_texts()))?;
            let a_sigma = integer_rows(&atlas.chart(&map.to_cone).unwrap().a_sigma).ok_or("non-integer ray")?;
            let a_tau = integer_rows(&atlas.chart(&map.from_cone).unwrap().a_sigma).ok_or("non-integer ray")?;
            let oracle = brute_force_transition(&a_sigma, &a_tau).ok_or(format!("{name}: oracle found no unique E"))?;
            ensure!(e == oracle, "{name}: {:?} -> {:?} is {e:?}, oracle {oracle:?}", map.from_cone, map.to_cone);
            checked += 1;
        }
        for &(_, from, to, text) in classical.iter().filter(|c| c.0 == name) {
            let r = transition(&atlas, from, to)?.render();
            ensure!(r == text, "{name}: {from:?} -> {to:?} rendered {r}, expected {text}");
        }
    }
    Ok(format!("{checked} integral transitions match the integer oracle; classical monomials reproduced"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (1, "quasisphere transition and Γ groups", criterion_1),
        (2, "CP^2_(1,1,a) transition and a = 1", criterion_2),
        (3, "Hirzebruch transition equals CP^2_(1,1,a)", criterion_3),
        (4, "Penrose kite transition", criterion_4),
        (5, "dodecahedron table, relations, transitions", criterion_5),
        (6, "cocycle identities", criterion_6),
        (7, "numeric verification and fault injection", criterion_7),
        (8, "integer oracle at a = 1", criterion_8),
    ];
    let mut failed = 0;
    for (id, title, run) in criteria {
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} PASS ({title}, {secs:.2}s): {detail}"),
            Err(reason) => {
                failed += 1;
                println!("criterion {id} FAIL ({title}, {secs:.2}s): {reason}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
