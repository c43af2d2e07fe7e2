//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Runs without the libtest harness.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use arraylab::arrays::{build_array, build_generalized, graph_depth, random_array_desc, random_gen_desc};
use arraylab::bounds::{
    collapse, pullback_energy_check, separate_verdict, subtree_decomposition, upper_bound_array,
    upper_bound_generalized, witness_certificate, ENERGY_FACTOR, VERDICT_TOL,
};
use arraylab::experiments::{run_scan, ScanConfig, SolverChoice, SolverConfig, FELLOW_TRAVEL_P95_FIXTURE};
use arraylab::report::hash_of;
use arraylab::spectral::{lambda1, lambda1_dense, lambda1_iterative};
use arraylab::walks::{pattern_density, run_walks, tree_drift, WalkConfig, Word};
use arraylab::{Graph, VertexFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const CIRCLE_TOL: f64 = 1e-10;
const CERTIFICATE_SLACK: f64 = 1e-9;
const COLLAPSE_SLACK: f64 = 1e-9;
const PULLBACK_SAMPLES: usize = 100;
const SOLVER_REL_TOL: f64 = 1e-8;
const ITERATIVE_TOL: f64 = 1e-10;
const CROSS_CHECK_MAX_N: usize = 1500;
const BAND_RATIO_MAX: f64 = 50.0;
const DRIFT_BAND: [f64; 2] = [0.48, 0.52];
const TL_GAP: f64 = 0.02;
const DENSITY_TOL: f64 = 0.01;
const HIT_RATE_MIN: f64 = 0.99;

const ARRAY_CORPUS: u64 = 200;
const ARRAY_MAX_DEPTH: usize = 4;
const ARRAY_MAX_VOLUME: usize = 5000;
const GEN_CORPUS: u64 = 500;
const GEN_MAX_DEPTH: u32 = 3;
const GEN_MAX_VOLUME: usize = 3000;
const DECOMPOSITIONS: usize = 50;

struct Verdict {
    pass: bool,
    detail: String,
    /// Hash of every computed number, compared across reruns.
    digest: String,
}

fn array_corpus() -> Vec<Graph> {
    (0..ARRAY_CORPUS)
        .into_par_iter()
        .map(|s| build_array(&random_array_desc(s, ARRAY_MAX_DEPTH, 64, ARRAY_MAX_VOLUME)).unwrap())
        .collect()
}

fn gen_corpus() -> Vec<Graph> {
    (0..GEN_CORPUS)
        .into_par_iter()
        .map(|s| build_generalized(&random_gen_desc(s, GEN_MAX_DEPTH, 48, GEN_MAX_VOLUME)).unwrap())
        .collect()
}

fn criterion_1() -> Verdict {
    let rows: Vec<(usize, f64)> = (3..=200usize)
        .map(|k| (k, lambda1(&arraylab::graph::circle(k).unwrap()).unwrap().lambda1))
        .collect();
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for &(k, lam) in &rows {
        let err = (lam - 4.0 * (PI / k as f64).sin().powi(2)).abs();
        worst = worst.max(err);
        if err > CIRCLE_TOL || lam < 4.0 / (k * k) as f64 {
            bad.push(k);
        }
    }
    Verdict {
        pass: bad.is_empty(),
        detail: format!("k = 3..200, max error {worst:.1e}, failing k {bad:?}"),
        digest: hash_of(&rows),
    }
}

fn criterion_2() -> Verdict {
    let corpus = array_corpus();
    let rows: Vec<(usize, u32, f64, f64)> = corpus
        .par_iter()
        .map(|g| {
            let h = graph_depth(g).unwrap();
            let lam = lambda1(g).unwrap().lambda1;
            (g.volume(), h, lam, upper_bound_array(g.volume() as u128, h))
        })
        .collect();
    let violations = rows.iter().filter(|r| r.2 > r.3).count();
    let max_vol = rows.iter().map(|r| r.0).max().unwrap();
    let max_h = rows.iter().map(|r| r.1).max().unwrap();
    let tightest = rows.iter().map(|r| r.2 / r.3).fold(0.0, f64::max);
    Verdict {
        pass: violations == 0 && max_vol <= ARRAY_MAX_VOLUME && max_h as usize <= ARRAY_MAX_DEPTH,
        detail: format!(
            "{} arrays, depth <= {max_h}, vol <= {max_vol}, {violations} violations, max lambda1/bound {tightest:.3}",
            rows.len()
        ),
        digest: hash_of(&rows),
    }
}

fn criterion_3() -> Verdict {
    let corpus = array_corpus();
    let rows: Vec<(f64, f64, f64, usize)> = corpus
        .par_iter()
        .map(|g| {
            let c = witness_certificate(g).unwrap();
            let lam = lambda1(g).unwrap().lambda1;
            (lam, c.achieved, c.quoted_bound, c.descents)
        })
        .collect();
    let bad: Vec<usize> = (0..rows.len())
        .filter(|&i| {
            let (lam, a, b, _) = rows[i];
            !(lam - CERTIFICATE_SLACK <= a && a <= b)
        })
        .collect();
    let tightest = rows.iter().map(|r| r.1 / r.2).fold(0.0, f64::max);
    Verdict {
        pass: bad.is_empty(),
        detail: format!(
            "{} certificates, failing seeds {bad:?}, max achieved/bound {tightest:.3}",
            rows.len()
        ),
        digest: hash_of(&rows),
    }
}

#[derive(serde::Serialize)]
struct CollapseRow {
    volume_ratio: f64,
    volume_ok: bool,
    pullback_ok: usize,
    lam_g: f64,
    lam_h: f64,
    bound: f64,
}

fn criterion_4() -> Verdict {
    let corpus = gen_corpus();
    let rows: Vec<CollapseRow> = corpus
        .par_iter()
        .enumerate()
        .map(|(seed, g)| {
            let res = collapse(g).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            let n = res.h.vertex_count();
            let mut pullback_ok = 0;
            for _ in 0..PULLBACK_SAMPLES {
                let mut f = VertexFunction::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
                f.center();
                if pullback_energy_check(g, &res, &f).unwrap().ok() {
                    pullback_ok += 1;
                }
            }
            CollapseRow {
                volume_ratio: res.volume_ratio,
                volume_ok: res.volume_ok(),
                pullback_ok,
                lam_g: lambda1(g).unwrap().lambda1,
                lam_h: lambda1(&res.h).unwrap().lambda1,
                bound: upper_bound_generalized(g.volume() as u128, res.budget.max(1)),
            }
        })
        .collect();
    let vol_bad = rows.iter().filter(|r| !r.volume_ok).count();
    let pull_bad: usize = rows.iter().map(|r| PULLBACK_SAMPLES - r.pullback_ok).sum();
    let eig_bad = rows
        .iter()
        .filter(|r| r.lam_g > ENERGY_FACTOR * r.lam_h + COLLAPSE_SLACK)
        .count();
    let bound_bad = rows.iter().filter(|r| r.lam_g > r.bound).count();
    let max_vol = corpus.iter().map(Graph::volume).max().unwrap();
    Verdict {
        pass: vol_bad + pull_bad + eig_bad + bound_bad == 0 && max_vol <= GEN_MAX_VOLUME,
        detail: format!(
            "{} generalized arrays (vol <= {max_vol}); failures: volume {vol_bad}, pullback {pull_bad}/{}, eigenvalue {eig_bad}, bound {bound_bad}",
            rows.len(),
            rows.len() * PULLBACK_SAMPLES
        ),
        digest: hash_of(&rows),
    }
}

fn criterion_5() -> Verdict {
    let cfg = ScanConfig::default();
    let solver = SolverConfig {
        choice: SolverChoice::Iterative,
        ..SolverConfig::default()
    };
    let out = run_scan(&cfg, &solver, 1_000_000, false).unwrap();
    let mut parts = Vec::new();
    let mut pass = out.skipped.is_empty();
    for h in [1u32, 2, 3] {
        let [k_lo, k_hi] = cfg.k_ranges[&h];
        let fit = out.fit(h).unwrap();
        let tol = cfg.slope_tolerance[&h];
        let ok = (fit.slope - fit.expected).abs() <= tol;
        pass &= ok;
        parts.push(format!(
            "h={h} k={k_lo}..{k_hi} slope {:.4} vs {:.4} (tol {tol}) {}",
            fit.slope,
            fit.expected,
            if ok { "ok" } else { "off" }
        ));
    }
    let ranges = out.product_ranges();
    for (h, [lo, hi]) in &cfg.bands {
        let [pmin, pmax] = ranges[h];
        let ok = hi / lo <= BAND_RATIO_MAX && *lo <= pmin && pmax <= *hi;
        pass &= ok;
        parts.push(format!(
            "h={h} products [{pmin:.3}, {pmax:.3}] in band [{lo}, {hi}] {}",
            if ok { "ok" } else { "off" }
        ));
    }
    let row_failures = out.failures.iter().filter(|f| f.starts_with("row")).count();
    pass &= row_failures == 0;
    parts.push(format!("{row_failures} row failures"));
    Verdict {
        pass,
        detail: parts.join("; "),
        digest: hash_of(&(out.rows_csv(false), out.fits_csv())),
    }
}

fn criterion_6() -> Verdict {
    let mut graphs: Vec<Graph> = array_corpus();
    graphs.extend(gen_corpus());
    graphs.extend((3..=200).map(|k| arraylab::graph::circle(k).unwrap()));
    graphs.retain(|g| g.vertex_count() <= CROSS_CHECK_MAX_N);
    let rows: Vec<(f64, f64)> = graphs
        .par_iter()
        .map(|g| {
            (
                lambda1_dense(g).unwrap().lambda1,
                lambda1_iterative(g, ITERATIVE_TOL).unwrap().lambda1,
            )
        })
        .collect();
    let worst = rows.iter().map(|(d, i)| (d - i).abs() / d).fold(0.0, f64::max);
    Verdict {
        pass: worst <= SOLVER_REL_TOL,
        detail: format!("{} graphs with n <= {CROSS_CHECK_MAX_N}, max relative gap {worst:.1e}", rows.len()),
        digest: hash_of(&rows),
    }
}

fn criterion_7() -> Verdict {
    let mut cases = Vec::new();
    let mut seed = 0u64;
    while cases.len() < DECOMPOSITIONS {
        let g = build_array(&random_array_desc(seed, 3, 10, 240)).unwrap();
        let records = g.labels().unwrap().circles.len();
        if records >= 2 {
            cases.push((g, 1 + (seed as usize) % (records - 1)));
        }
        seed += 1;
    }
    let rows: Vec<(f64, f64, f64, bool, Option<bool>)> = cases
        .par_iter()
        .map(|(g, record)| {
            let (a, b) = subtree_decomposition(g, *record).unwrap();
            let v = separate_verdict(g, &a, &b).unwrap();
            (v.lam_a, v.lam_b, v.lam_g, v.disjoint_derivative_supports, v.relaxed_ok)
        })
        .collect();
    let bad = rows
        .iter()
        .filter(|r| !(r.3 && r.4 == Some(true) && r.2 >= 0.5 * r.0.min(r.1) - VERDICT_TOL))
        .count();
    let slack = rows.iter().map(|r| r.2 / (0.5 * r.0.min(r.1))).fold(f64::INFINITY, f64::min);
    Verdict {
        pass: bad == 0,
        detail: format!(
            "{} decompositions at subtree anchors, {bad} failures, min lambda1 / (min/2) {slack:.3}",
            rows.len()
        ),
        digest: hash_of(&rows),
    }
}

fn criterion_8() -> Verdict {
    let cfg = WalkConfig::default();
    let (stats, rows) = run_walks(&cfg).unwrap();
    let short = WalkConfig {
        steps: 5000,
        ..WalkConfig::default()
    };
    let (short_stats, _) = run_walks(&short).unwrap();
    let density = pattern_density(&Word::parse(&cfg.pattern).unwrap());
    let checks = [
        (DRIFT_BAND[0] <= stats.drift_hat && stats.drift_hat <= DRIFT_BAND[1], "drift"),
        ((stats.tl_ratio_hat - stats.drift_hat).abs() <= TL_GAP, "translation length"),
        ((stats.recurrence_density - density).abs() <= DENSITY_TOL, "density"),
        (short_stats.window_hit_rate >= HIT_RATE_MIN, "window hits"),
        (stats.fellow_travel_p95 <= FELLOW_TRAVEL_P95_FIXTURE, "fellow travel"),
        ((tree_drift(2) - 0.5).abs() < 1e-15, "drift oracle"),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.0).map(|c| c.1).collect();
    Verdict {
        pass: failed.is_empty(),
        detail: format!(
            "{}x{}: drift {:.4}, tl {:.4}, density {:.4} (oracle {:.4}), hit rate at 5000 {:.3}, fellow-travel p95 {} (fixture {}); failed {failed:?}",
            cfg.trials,
            cfg.steps,
            stats.drift_hat,
            stats.tl_ratio_hat,
            stats.recurrence_density,
            density,
            short_stats.window_hit_rate,
            stats.fellow_travel_p95,
            FELLOW_TRAVEL_P95_FIXTURE
        ),
        digest: hash_of(&(stats, rows, short_stats)),
    }
}

type Criterion = (u32, &'static str, fn() -> Verdict, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "circle exactness", criterion_1, Duration::from_secs(5)),
        (2, "array bound", criterion_2, Duration::from_secs(120)),
        (3, "witness soundness", criterion_3, Duration::from_secs(120)),
        (4, "collapse contracts", criterion_4, Duration::from_secs(300)),
        (5, "scaling scan", criterion_5, Duration::from_secs(600)),
        (6, "solver cross-check", criterion_6, Duration::from_secs(180)),
        (7, "separate relaxed form", criterion_7, Duration::from_secs(60)),
        (8, "walk lab", criterion_8, Duration::from_secs(180)),
    ];
    let mut all = true;
    let mut digests = Vec::new();
    for (id, name, run, limit) in criteria {
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let pass = v.pass && took < limit;
        all &= pass;
        println!(
            "criterion {id} ({name}): {} [{:.1}s of {}s] {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit.as_secs(),
            v.detail
        );
        digests.push((id, v.digest));
    }
    let reruns: Vec<u32> = criteria
        .iter()
        .zip(&digests)
        .filter(|((_, _, run, _), (_, d))| run().digest != *d)
        .map(|(c, _)| c.0)
        .collect();
    let pass = reruns.is_empty();
    all &= pass;
    println!(
        "criterion 9 (determinism): {} reran criteria 1-8, differing outputs {reruns:?}",
        if pass { "PASS" } else { "FAIL" }
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
